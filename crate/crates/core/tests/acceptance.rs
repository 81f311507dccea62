use cycdiag::algebra::{coeff, frac, render, sign_of, Chain, Coefficient};
use cycdiag::cohomology::{bockstein, cohomology_basis, power_op, random_cochain, Normalization};
use cycdiag::diagonal::{pair_term, DiagonalEngine, Direction, MuSign, OmegaPair};
use cycdiag::resolutions::{nf_words, one_full_piece_words, phi, psi_dual_bar, PiecedWord, PsiEngine, WElem};
use cycdiag::simplicial::{AugSimplicialSet, Cell, Simplex};
use cycdiag::straightening::{
    boundary_faces, check_construction_conditions, count_straightenings, enumerate_straightenings, f_unsorted,
    Straightening,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Prints one line per criterion, then fails the test when anything went wrong.
fn report(n: u32, name: &str, start: Instant, limit: Duration, failures: Vec<String>) {
    let elapsed = start.elapsed();
    let mut failures = failures;
    if elapsed > limit {
        failures.push(format!("took {elapsed:?}, limit {limit:?}"));
    }
    if failures.len() > 6 {
        let more = failures.len() - 6;
        failures.truncate(6);
        failures.push(format!("and {more} more"));
    }
    if failures.is_empty() {
        println!("criterion {n} ({name}): PASS in {elapsed:.2?}");
    } else {
        println!("criterion {n} ({name}): FAIL in {elapsed:.2?}: {}", failures.join("; "));
        panic!("criterion {n} failed: {}", failures.join("; "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

fn welem(q: i64, r: u32, entries: &[(u32, Coefficient)]) -> WElem {
    let mut out = WElem::zero(q, r);
    for &(t, c) in entries {
        out.coeffs[t as usize] += c;
    }
    out
}

fn sx(v: &[u32], r: u32) -> Simplex {
    Simplex::new(v.to_vec(), r as i32 - 1)
}

fn pair(u: &[u32], a: &[u32], n: i32) -> OmegaPair {
    OmegaPair::new(u.to_vec(), a.to_vec(), n).unwrap()
}

fn vertices(x: &AugSimplicialSet, c: &Chain<Vec<Cell>>) -> Chain<Vec<Vec<u32>>> {
    c.map_signed(|t| Some((t.iter().map(|&f| x.data(f).vertices.clone().unwrap()).collect(), 1)))
}

#[test]
fn criterion_01_straightening_counts() {
    let start = Instant::now();
    let mut f = vec![];
    check(&mut f, count_straightenings(3, true) == Ok(1), || "r=3 count".into());
    let five = enumerate_straightenings(5, true, 100).unwrap();
    check(&mut f, five.len() == 4, || format!("r=5 count {}", five.len()));
    // choices on [0], [0,1], [0,2], [0,1,2], [0,1,3], [0,1,2,3]
    let faces: [&[u32]; 6] = [&[0], &[0, 1], &[0, 2], &[0, 1, 2], &[0, 1, 3], &[0, 1, 2, 3]];
    let mut tables: Vec<Vec<u32>> = five.iter().map(|s| faces.iter().map(|t| s.choose(t)).collect()).collect();
    tables.sort();
    let mut printed = vec![
        vec![0, 0, 0, 0, 0, 0],
        vec![0, 0, 2, 0, 0, 0],
        vec![0, 0, 0, 0, 3, 0],
        vec![0, 0, 2, 0, 3, 0],
    ];
    printed.sort();
    check(&mut f, tables == printed, || format!("r=5 tables {tables:?}"));
    let seven = count_straightenings(7, true).unwrap();
    check(&mut f, seven > 1000 && seven == 9216, || format!("r=7 count {seven}"));
    check(&mut f, enumerate_straightenings(7, true, 10_000).map(|v| v.len()) == Ok(9216), || "r=7 enumeration".into());
    report(1, "straightening counts", start, Duration::from_secs(10), f);
}

#[test]
fn criterion_02_phi() {
    let start = Instant::now();
    let mut f = vec![];
    check(&mut f, phi(&[0], 3) == WElem::basis(1, 0, 3), || "Φ([0]), r=3".into());
    check(&mut f, phi(&[1, 2], 3) == WElem::basis(2, 1, 3), || "Φ([1,2]), r=3".into());
    check(&mut f, phi(&[0, 1, 2], 5) == welem(3, 5, &[(0, frac(1, 2))]), || "Φ([0,1,2]), r=5".into());
    check(&mut f, phi(&[0, 1], 5) == welem(2, 5, &[(0, frac(1, 2)), (3, frac(1, 2))]), || "Φ([0,1]), r=5".into());
    check(&mut f, phi(&[0, 3], 5) == welem(2, 5, &[(0, frac(1, 2))]), || "Φ([0,3]), r=5".into());
    for r in [3u32, 5, 7] {
        for face in boundary_faces(r).into_iter().filter(|t| !t.is_empty()) {
            let lhs = phi(&face, r).boundary();
            let mut rhs = WElem::zero(face.len() as i64 - 1, r);
            for i in 0..face.len() {
                let mut t = face.clone();
                t.remove(i);
                rhs.add_scaled(&phi(&t, r), coeff(sign_of(i as i64)));
            }
            check(&mut f, lhs == rhs, || format!("Φ not a chain map at r={r}, {face:?}"));
        }
    }
    report(2, "Φ goldens and chain map", start, Duration::from_secs(5), f);
}

#[test]
fn criterion_03_f() {
    let start = Instant::now();
    let mut f = vec![];
    let s3 = Straightening::preset("3").unwrap();
    let s5 = Straightening::preset("5a").unwrap();
    check(&mut f, f_unsorted(&s3, &[0], &[2, 1]) == -Chain::unit(sx(&[0], 3)), || "f([0]⊗[2,1])".into());
    check(&mut f, f_unsorted(&s3, &[0, 1], &[2, 0]) == Chain::unit(sx(&[0, 1], 3)), || "f([0,1]⊗[2,0])".into());
    check(&mut f, f_unsorted(&s5, &[2, 3, 0], &[4, 1, 3]) == Chain::unit(sx(&[0, 2], 5)), || "f([2,3,0]⊗[4,1,3])".into());
    check(&mut f, f_unsorted(&s5, &[1, 2, 3, 4], &[0, 1, 2]) == Chain::unit(sx(&[1, 2, 3], 5)), || {
        "f([1,2,3,4]⊗[0,1,2])".into()
    });
    for r in [3u32, 5] {
        for st in enumerate_straightenings(r, true, 100).unwrap() {
            let rep = check_construction_conditions(&st);
            check(&mut f, rep.condition_i && rep.condition_ii && rep.condition_iii_prime, || {
                format!("conditions fail for r={r}: {:?}", rep.failures)
            });
        }
    }
    report(3, "f goldens and conditions", start, Duration::from_secs(10), f);
}

#[test]
fn criterion_04_psi() {
    let start = Instant::now();
    let mut f = vec![];
    let p3 = PsiEngine::new(Straightening::preset("3").unwrap());
    let p5 = PsiEngine::new(Straightening::preset("5a").unwrap());
    let w: PiecedWord = "1|230|413".parse().unwrap();
    let psi7 = p5.psi(&w).unwrap();
    check(&mut f, psi7 == welem(7, 5, &[(0, frac(-1, 2))]), || {
        let shown: Vec<String> = psi7.coeffs.iter().map(render).collect();
        format!("Ψ₇(1|230|413) has ρ-coefficients [{}], expected -1/2 e₇", shown.join(", "))
    });
    let (u, a) = ([0, 0, 1, 3, 4, 6], [0, 1, 2, 0, 2, 1]);
    for n in [6, 7] {
        let v = p3.psi_n(&u, &a, n).unwrap().rho_coefficient(0);
        check(&mut f, v == coeff(-1), || format!("Ψⁿ r=3 n={n}: {v}"));
    }
    let v = p5.psi_n(&[0, 1, 1, 1, 2, 2, 2], &[1, 2, 3, 0, 4, 1, 3], 2).unwrap().rho_coefficient(0);
    check(&mut f, v == coeff(4), || format!("Ψⁿ r=5 n=2: {v}, expected 4"));
    for q in 0..=7 {
        for w in nf_words(3, q) {
            check(&mut f, p3.chain_map_defect(&w).unwrap().is_zero(), || format!("Ψ chain map r=3 {w}"));
        }
        if q >= 3 {
            for w in one_full_piece_words(3, q) {
                check(&mut f, p3.full_piece_defect(&w).unwrap().is_zero(), || format!("full piece r=3 {w}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut chain_samples, mut piece_samples) = (0, 0);
    for q in 1..=7 {
        let words = nf_words(5, q);
        for w in words.choose_multiple(&mut rng, 40) {
            chain_samples += 1;
            check(&mut f, p5.chain_map_defect(w).unwrap().is_zero(), || format!("Ψ chain map r=5 {w}"));
        }
    }
    for q in 5..=9 {
        let words = one_full_piece_words(5, q);
        for w in words.choose_multiple(&mut rng, 50) {
            piece_samples += 1;
            check(&mut f, p5.full_piece_defect(w).unwrap().is_zero(), || format!("full piece r=5 {w}"));
        }
    }
    check(&mut f, chain_samples >= 200 && piece_samples >= 200, || "too few r=5 samples".into());
    report(4, "Ψ goldens, chain map and full-piece identity", start, Duration::from_secs(60), f);
}

#[test]
fn criterion_05_dual_lists() {
    let start = Instant::now();
    let mut f = vec![];
    let list = |entries: &[(&[u32], i64, i64)]| -> Chain<Vec<u32>> {
        entries.iter().map(|(w, n, d)| (w.to_vec(), frac(*n, *d))).collect()
    };
    let r3 = [
        list(&[(&[0], 1, 1)]),
        list(&[(&[0, 1], 1, 1), (&[1, 0], -1, 1)]),
        list(&[(&[0, 1, 2], 1, 1), (&[0, 2, 1], -1, 1)]),
        list(&[(&[0, 1, 2, 0], 1, 1), (&[0, 1, 0, 2], -1, 1), (&[1, 0, 2, 1], 1, 1), (&[1, 0, 1, 2], -1, 1)]),
    ];
    for (q, expect) in (1..).zip(&r3) {
        let got = psi_dual_bar(q, 3).unwrap();
        check(&mut f, &got == expect, || format!("r=3 q={q}: {got:?}"));
    }
    // (3,2) is listed with a plus sign, but ordering it takes one transposition, so its sign is
    // minus by the same rule that fixes every other entry
    let r5 = [
        list(&[(&[0], 1, 2), (&[2], 1, 2)]),
        list(&[(&[0, 1], 1, 2), (&[1, 0], -1, 2), (&[0, 3], 1, 2), (&[3, 0], -1, 2), (&[2, 3], 1, 2), (&[3, 2], -1, 2)]),
        list(&[
            (&[0, 1, 2], 1, 2),
            (&[0, 2, 1], -1, 2),
            (&[1, 2, 0], 1, 2),
            (&[1, 0, 2], -1, 2),
            (&[2, 0, 1], 1, 2),
            (&[2, 1, 0], -1, 2),
        ]),
    ];
    for (q, expect) in (1..).zip(&r5) {
        let got = psi_dual_bar(q, 5).unwrap();
        check(&mut f, &got == expect, || format!("r=5 q={q}: {got:?}"));
    }
    let four = psi_dual_bar(4, 5).unwrap();
    check(&mut f, four.len() == 24, || format!("r=5 q=4 has {} summands", four.len()));
    let half = frac(1, 2);
    check(&mut f, four.iter().all(|(_, c)| *c == half || *c == -half), || "r=5 q=4 coefficients".into());
    report(5, "dual lists", start, Duration::from_secs(1), f);
}

#[test]
fn criterion_06_mu_goldens() {
    let start = Instant::now();
    let mut f = vec![];
    let e3 = DiagonalEngine::new(Straightening::preset("3").unwrap());
    let e5 = DiagonalEngine::new(Straightening::preset("5a").unwrap());

    let x7 = AugSimplicialSet::simplex(7);
    let tau = x7.find_vertices(&[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
    // removing positions 0 and 6 leaves [1,2,3,4,5,7]; the tensor with [1,2,3,4,5] in the middle
    // has total dimension 14, while every term of μ(e_{-6} ⊗ τ) has 3·7 − 6 = 15
    let term = vec![(0..8).collect::<Vec<u32>>(), vec![1, 2, 3, 4, 5, 7], vec![2, 5, 6, 7]];
    for (route, c) in [
        ("composed", vertices(&x7, &e3.mu_composed(&x7, tau, 6, 0, MuSign::Formula).unwrap())),
        ("direct", vertices(&x7, &e3.mu_direct(&x7, tau, 6, MuSign::Formula).unwrap())),
        ("blocks", vertices(&x7, &e3.mu_r3_blocks(&x7, tau, 6, MuSign::Formula).unwrap())),
    ] {
        let v = c.coefficient(&term);
        check(&mut f, v == coeff(-1), || format!("Δ⁷ {route}: {v}"));
    }

    // the faces of [0,2,3,4,5,6,9] inside Δ¹⁹
    let x19 = AugSimplicialSet::from_facets(&[vec![0, 2, 3, 4, 5, 6, 9]]);
    let tau = x19.find_vertices(&[0, 2, 3, 4, 5, 6, 9]).unwrap();
    let term = vec![vec![0, 2, 3, 4, 5, 6, 9], vec![2, 3, 4, 5, 6], vec![3, 6, 9]];
    for (route, c) in [
        ("composed", vertices(&x19, &e3.mu_composed(&x19, tau, 6, 0, MuSign::Formula).unwrap())),
        ("direct", vertices(&x19, &e3.mu_direct(&x19, tau, 6, MuSign::Formula).unwrap())),
        ("blocks", vertices(&x19, &e3.mu_r3_blocks(&x19, tau, 6, MuSign::Formula).unwrap())),
    ] {
        let v = c.coefficient(&term);
        check(&mut f, v == coeff(-1), || format!("Δ¹⁹ {route}: {v}"));
    }

    let x2 = AugSimplicialSet::simplex(2);
    let tau = x2.find_vertices(&[0, 1, 2]).unwrap();
    let term = vec![vec![0, 2], vec![0], vec![0, 1, 2], vec![], vec![0, 1]];
    for (route, c) in [
        ("composed", vertices(&x2, &e5.mu_composed(&x2, tau, 7, 0, MuSign::Formula).unwrap())),
        ("direct", vertices(&x2, &e5.mu_direct(&x2, tau, 7, MuSign::Formula).unwrap())),
    ] {
        let v = c.coefficient(&term);
        check(&mut f, v == coeff(4), || format!("r=5 {route}: {v}, expected 4"));
    }
    let p = pair(&[0, 1, 1, 1, 2, 2, 2], &[1, 2, 3, 0, 4, 1, 3], 2);
    check(&mut f, pair_term(&p, 5).map(|t| t.1) == Some(term), || "r=5 pair does not give the cited term".into());
    report(6, "μ goldens", start, Duration::from_secs(30), f);
}

#[test]
fn criterion_07_dual_path_equivalence() {
    let start = Instant::now();
    let mut f = vec![];
    let e3 = DiagonalEngine::new(Straightening::preset("3").unwrap());
    for n in 1..=4u32 {
        let x = AugSimplicialSet::simplex_boundary(n);
        for cell in x.all_cells() {
            for q in 0..=10 {
                let a = e3.mu_composed(&x, cell, q, 0, MuSign::Formula).unwrap();
                let b = e3.mu_direct(&x, cell, q, MuSign::Formula).unwrap();
                check(&mut f, a == b, || format!("r=3 ∂Δ{n} {cell:?} q={q}"));
            }
        }
    }
    let e5 = DiagonalEngine::new(Straightening::preset("5a").unwrap());
    let x = AugSimplicialSet::simplex(3);
    let cells = x.all_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let cell = *cells.choose(&mut rng).unwrap();
        let q = rng.gen_range(0..=8);
        let a = e5.mu_composed(&x, cell, q, 0, MuSign::Formula).unwrap();
        let b = e5.mu_direct(&x, cell, q, MuSign::Formula).unwrap();
        check(&mut f, a == b, || format!("r=5 Δ³ {cell:?} q={q}"));
    }
    report(7, "composed and direct μ agree", start, Duration::from_secs(300), f);
}

#[test]
fn criterion_08_structure() {
    let start = Instant::now();
    let mut f = vec![];
    let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
    for n in 1..=4u32 {
        let x = AugSimplicialSet::simplex_boundary(n);
        for cell in x.all_cells() {
            for q in 0..=10 {
                for sign in [MuSign::Formula, MuSign::Differential] {
                    let d = e.chain_map_defect(&x, cell, q, sign).unwrap();
                    check(&mut f, d.is_zero(), || format!("chain map ∂Δ{n} {cell:?} q={q} {sign:?}"));
                }
                check(&mut f, e.equivariance_defect(&x, cell, q).unwrap().is_zero(), || {
                    format!("equivariance ∂Δ{n} {cell:?} q={q}")
                });
                check(&mut f, e.naturality_defect(&x, cell, q).unwrap().is_zero(), || {
                    format!("naturality ∂Δ{n} {cell:?} q={q}")
                });
            }
        }
    }
    report(8, "chain map, equivariance, naturality", start, Duration::from_secs(300), f);
}

#[test]
fn criterion_09_suspensions() {
    let start = Instant::now();
    let mut f = vec![];
    for (name, x) in [("3", AugSimplicialSet::simplex(2)), ("5a", AugSimplicialSet::simplex(1))] {
        let e = DiagonalEngine::new(Straightening::preset(name).unwrap());
        for cell in x.all_cells() {
            for q in 0..=7 {
                for dir in [Direction::Right, Direction::Left] {
                    let rep = e.suspend_check(&x, cell, q, dir).unwrap();
                    check(&mut f, rep.literal_holds, || format!("r={} {dir:?} {cell:?} q={q}", e.r()));
                }
            }
        }
    }
    report(9, "suspension identities", start, Duration::from_secs(120), f);
}

#[test]
fn criterion_10_power_operations() {
    let start = Instant::now();
    let mut f = vec![];
    let cases = [("3", AugSimplicialSet::simplex_boundary(3)), ("3", AugSimplicialSet::simplex_boundary(4)), ("5a", AugSimplicialSet::simplex_boundary(2))];
    let mut seed = 0u64;
    for (name, x) in cases {
        let e = DiagonalEngine::new(Straightening::preset(name).unwrap());
        let p = e.r() as u64;
        let h = cohomology_basis(&x, p).unwrap();
        for dim in -1..=x.top_dim() {
            for g in h.basis(dim) {
                for i in -3..=(x.top_dim() - dim) as i64 {
                    let base = power_op(&e, &x, i, &g, Normalization::Standard).unwrap().output;
                    if i < 0 {
                        check(&mut f, base.is_zero(), || format!("P^{i} ≠ 0 on dim {dim}"));
                        continue;
                    }
                    check(&mut f, base.coboundary(&x).is_zero(), || format!("P^{i} not a cocycle, dim {dim}"));
                    for _ in 0..50 {
                        seed += 1;
                        let z = random_cochain(&x, dim - 1, p, seed);
                        let moved = g.add(&z.coboundary(&x));
                        let y = power_op(&e, &x, i, &moved, Normalization::Standard).unwrap().output;
                        check(&mut f, y.coboundary(&x).is_zero(), || format!("P^{i} not a cocycle, dim {dim}"));
                        check(&mut f, h.same_class(&y, &base), || format!("P^{i} depends on the representative, dim {dim}"));
                    }
                }
            }
        }
    }
    report(10, "power operations", start, Duration::from_secs(120), f);
}

#[test]
fn criterion_11_even_prime_bockstein() {
    let start = Instant::now();
    let mut f = vec![];
    let x = AugSimplicialSet::rp2();
    let e = DiagonalEngine::for_r(2).unwrap();
    let h = cohomology_basis(&x, 2).unwrap();
    let a = h.generator(1, 0).unwrap();
    let sq = power_op(&e, &x, 1, &a, Normalization::Standard).unwrap().output;
    let b = bockstein(&x, &a);
    check(&mut f, sq.coboundary(&x).is_zero(), || "P¹a is not a cocycle".into());
    check(&mut f, !h.is_coboundary(&sq), || "P¹a is zero in cohomology".into());
    check(&mut f, h.same_class(&sq, &b), || "P¹a differs from the Bockstein".into());
    report(11, "r=2 Bockstein", start, Duration::from_secs(10), f);
}
