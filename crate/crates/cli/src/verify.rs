use crate::commands::{engine, load_straightening};
use crate::Outcome;
use anyhow::Result;
use clap::{Args, ValueEnum};
use cycdiag::algebra::{coeff, sign_of, Chain};
use cycdiag::cohomology::{bockstein, cohomology_basis, normalization_report, power_op, random_cochain, Normalization};
use cycdiag::diagonal::{vanishes_mod_2, DiagonalEngine, Direction, MuSign};
use cycdiag::resolutions::{
    nf_words, one_full_piece_words, phi, phi_dual, theta, w_boundary, PiecedWord, Side, WElem, WGen,
};
use cycdiag::simplicial::{dual_face_sign, dual_face_sign_via_cofaces, poincare_pairing_check, AugSimplicialSet, Simplex};
use cycdiag::straightening::{boundary_faces, check_construction_conditions, g_star, rho_simplex, subdivide};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Signs,
    Phi,
    Psi,
    F,
    Mu,
    Suspension,
    Power,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 3)]
    pub r: u32,
    #[arg(long)]
    pub straightening: Option<String>,
    /// Dimension of the test simplex.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 6)]
    pub qmax: usize,
    /// Samples per degree where a check does not run exhaustively.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    property: &'static str,
    status: &'static str,
    checked: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<serde_json::Value>,
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn start(&mut self, suite: &'static str, name: impl Into<String>, property: &'static str) -> &mut Check {
        self.checks.push(Check { suite, name: name.into(), property, status: "pass", checked: 0, failures: vec![], data: None });
        self.checks.last_mut().unwrap()
    }

    fn skip(&mut self, suite: &'static str, name: &str, property: &'static str, why: &str) {
        let c = self.start(suite, name, property);
        c.status = "skipped";
        c.failures.push(why.to_string());
    }
}

impl Check {
    fn assert(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.status = "fail";
            if self.failures.len() < 8 {
                self.failures.push(what());
            }
        }
    }
}

pub fn run(args: &VerifyArgs) -> Result<Outcome> {
    let mut rec = Recorder { checks: vec![] };
    let suites: Vec<Suite> = match args.suite {
        Suite::All => vec![Suite::Signs, Suite::Phi, Suite::Psi, Suite::F, Suite::Mu, Suite::Suspension, Suite::Power],
        s => vec![s],
    };
    let engine = engine(args.r, args.straightening.as_deref())?;
    for s in suites {
        match s {
            Suite::Signs => signs(&mut rec, args),
            Suite::Phi => phi_suite(&mut rec, args),
            Suite::Psi => psi_suite(&mut rec, args, &engine)?,
            Suite::F => f_suite(&mut rec, args)?,
            Suite::Mu => mu_suite(&mut rec, args, &engine)?,
            Suite::Suspension => suspension_suite(&mut rec, args, &engine)?,
            Suite::Power => power_suite(&mut rec, args, &engine)?,
            Suite::All => unreachable!(),
        }
    }
    let count = |status: &str| rec.checks.iter().filter(|c| c.status == status).count();
    let (passed, failed, skipped) = (count("pass"), count("fail"), count("skipped"));
    for c in &rec.checks {
        eprintln!("{:>7}  {:<10} {} ({} cases)", c.status, c.suite, c.name, c.checked);
    }
    let summary = format!("{passed} passed, {failed} failed, {skipped} skipped");
    let json = json!({
        "r": args.r,
        "n": args.n,
        "qmax": args.qmax,
        "checks": rec.checks,
        "passed": passed,
        "failed": failed,
        "skipped": skipped,
    });
    Ok(Outcome { json, summary, passed: failed == 0 })
}

fn subsets(n: u32) -> impl Iterator<Item = Vec<u32>> {
    (0u64..1 << (n + 1)).map(move |m| (0..=n).filter(|i| m >> i & 1 == 1).collect())
}

fn signs(rec: &mut Recorder, args: &VerifyArgs) {
    let c = rec.start("signs", "dual face sign", "the closed form agrees with peeling cofaces one at a time");
    for n in 0..=args.n.min(10) {
        for u in subsets(n) {
            c.assert(dual_face_sign(&u, n as i32) == dual_face_sign_via_cofaces(&u, n as i32), || format!("n={n} {u:?}"));
        }
    }
    let c = rec.start("signs", "Poincaré pairing", "Alexander duality is compatible with the boundary and its dual");
    for n in 0..=args.n.min(8) {
        let rep = poincare_pairing_check(n as i32);
        c.assert(rep.passed, || format!("n={n}: {rep:?}"));
    }
    let r = args.r;
    let q = args.qmax as i64;
    let c = rec.start("signs", "W differential", "∂∂ = 0 on the minimal, augmented and dual resolutions");
    for side in [Side::Minimal, Side::Augmented, Side::Dual] {
        let range: Vec<i64> = if side == Side::Dual { (-q..=0).collect() } else { (0..=q).collect() };
        for q in range {
            for j in 0..r {
                let g = WGen::new(side, q, j, r);
                let dd = w_boundary(&g, r).map_linear(|x| w_boundary(x, r));
                c.assert(dd.is_zero(), || format!("{side:?} q={q} ρ^{j}"));
            }
        }
    }
    if r == 2 {
        rec.skip("signs", "θ", "θ commutes with the differential", "θ is only defined for odd r");
        return;
    }
    let c = rec.start("signs", "θ", "θ commutes with the differential");
    for side in [Side::Augmented, Side::Dual] {
        let range: Vec<i64> = if side == Side::Dual { (-q..=0).collect() } else { (0..=q).collect() };
        for q in range {
            for j in 0..r {
                let g = WGen::new(side, q, j, r);
                let a = theta(&g, r as i64 - 1, r).map_linear(|x| w_boundary(x, r));
                let b = w_boundary(&g, r).map_linear(|x| theta(x, r as i64 - 1, r));
                c.assert(a == b, || format!("{side:?} q={q} ρ^{j}"));
            }
        }
    }
}

fn phi_suite(rec: &mut Recorder, args: &VerifyArgs) {
    let r = args.r;
    if r == 2 {
        rec.skip("phi", "Φ chain map", "Φ commutes with the differentials", "Φ is built for odd r");
        return;
    }
    let c = rec.start("phi", "Φ chain map", "Φ commutes with the differentials");
    for face in boundary_faces(r).into_iter().filter(|t| !t.is_empty()) {
        let lhs = phi(&face, r).boundary();
        let mut rhs = WElem::zero(face.len() as i64 - 1, r);
        for i in 0..face.len() {
            let mut t = face.clone();
            t.remove(i);
            rhs.add_scaled(&phi(&t, r), coeff(sign_of(i as i64)));
        }
        c.assert(lhs == rhs, || format!("{face:?}"));
    }
    let c = rec.start("phi", "Φ equivariance", "Φ(ρσ) = ρΦ(σ)");
    for face in boundary_faces(r) {
        let (s, rotated) = rho_simplex(&Simplex::new(face.clone(), r as i32 - 1), r);
        let lhs = phi(&rotated.vertices, r).scaled(coeff(s));
        c.assert(lhs == phi(&face, r).rho(1), || format!("{face:?}"));
    }
    let c = rec.start("phi", "Φ dual", "the dual list pairs with Φ to the coefficient of e");
    for face in boundary_faces(r) {
        let Ok(d) = phi_dual(face.len(), r) else { continue };
        let pairing = d.coefficient(&Simplex::new(face.clone(), r as i32 - 1));
        c.assert(pairing == phi(&face, r).rho_coefficient(0), || format!("{face:?}"));
    }
}

fn psi_suite(rec: &mut Recorder, args: &VerifyArgs, engine: &DiagonalEngine) -> Result<()> {
    let r = args.r;
    let psi = engine.psi();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let c = rec.start("psi", "Ψ chain map", "∂Ψ = Ψd, mod 2 when r = 2");
    for q in 0..=args.qmax {
        let words = nf_words(r, q);
        let chosen: Vec<&PiecedWord> = if words.len() <= args.samples { words.iter().collect() } else { words.choose_multiple(&mut rng, args.samples).collect() };
        for w in chosen {
            let d = psi.chain_map_defect(w)?;
            let ok = if r == 2 { d.coeffs.iter().all(|c| c.is_integer() && c.to_integer() % 2 == 0) } else { d.is_zero() };
            c.assert(ok, || format!("{w}"));
        }
    }
    if r == 2 {
        rec.skip("psi", "Ψ full-piece identity", "Ψ on a word with one full piece", "no pieces of length r arise for r = 2");
        return Ok(());
    }
    let c = rec.start("psi", "Ψ equivariance", "Ψ(ρw) = ρΨ(w)");
    for q in 0..=args.qmax.min(6) {
        for w in nf_words(r, q).choose_multiple(&mut rng, args.samples) {
            c.assert(psi.psi(&w.rho(1, r))? == psi.psi(w)?.rho(1), || format!("{w}"));
        }
    }
    let c = rec.start("psi", "Ψ full-piece identity", "Ψ on a word with one full piece");
    // the word lists grow quickly past q = 9 at r = 5
    let top = if r > 3 { args.qmax.min(9) } else { args.qmax };
    for q in r as usize..=top {
        let words = one_full_piece_words(r, q);
        for w in words.choose_multiple(&mut rng, args.samples) {
            c.assert(psi.full_piece_defect(w)?.is_zero(), || format!("{w}"));
        }
    }
    Ok(())
}

fn f_suite(rec: &mut Recorder, args: &VerifyArgs) -> Result<()> {
    let r = args.r;
    if r == 2 {
        rec.skip("f", "construction conditions", "the straightening satisfies the conditions of the construction", "no straightening at r = 2");
        return Ok(());
    }
    let st = load_straightening(r, args.straightening.as_deref())?;
    let rep = check_construction_conditions(&st);
    let c = rec.start("f", "construction conditions", "the straightening satisfies the conditions of the construction");
    c.assert(rep.condition_i, || format!("condition i: {:?}", rep.failures));
    c.assert(rep.condition_ii, || format!("condition ii: {:?}", rep.failures));
    c.assert(rep.condition_iii_prime, || format!("condition iii': {:?}", rep.failures));
    let c = rec.start("f", "assemblage", "g_* s_* is the identity on faces of the simplex");
    for a in boundary_faces(r).into_iter().filter(|a| !a.is_empty()) {
        let want = Chain::unit(Simplex::new(a.clone(), r as i32 - 1));
        c.assert(g_star(&st, &subdivide(&a)) == want, || format!("{a:?}"));
    }
    Ok(())
}

fn mu_suite(rec: &mut Recorder, args: &VerifyArgs, e: &DiagonalEngine) -> Result<()> {
    let r = args.r;
    let x = AugSimplicialSet::simplex(args.n);
    let cells = x.all_cells();
    for sign in [MuSign::Formula, MuSign::Differential] {
        let c = rec.start("mu", format!("chain map ({sign:?})"), "μ commutes with the differentials");
        for &cell in &cells {
            for q in 0..=args.qmax {
                let d = e.chain_map_defect(&x, cell, q, sign)?;
                let ok = if r == 2 { vanishes_mod_2(&d) } else { d.is_zero() };
                c.assert(ok, || format!("{} q={q}", x.name(cell)));
            }
        }
    }
    let c = rec.start("mu", "equivariance", "μ(ρe ⊗ σ) = ρμ(e ⊗ σ)");
    for &cell in &cells {
        for q in 0..=args.qmax {
            let d = e.equivariance_defect(&x, cell, q)?;
            let ok = if r == 2 { vanishes_mod_2(&d) } else { d.is_zero() };
            c.assert(ok, || format!("{} q={q}", x.name(cell)));
        }
    }
    let c = rec.start("mu", "naturality", "μ commutes with face inclusions");
    for &cell in &cells {
        for q in 0..=args.qmax {
            c.assert(e.naturality_defect(&x, cell, q)?.is_zero(), || format!("{} q={q}", x.name(cell)));
        }
    }
    if r == 2 {
        rec.skip("mu", "direct formula", "the closed formula equals the composite", "the closed formula needs odd r");
    } else {
        let c = rec.start("mu", "direct formula", "the closed formula equals the composite");
        for &cell in &cells {
            for q in 0..=args.qmax {
                let a = e.mu_composed(&x, cell, q, 0, MuSign::Formula)?;
                let b = e.mu_direct(&x, cell, q, MuSign::Formula)?;
                c.assert(a == b, || format!("{} q={q}", x.name(cell)));
            }
        }
    }
    if r == 3 {
        let c = rec.start("mu", "block rule", "the r = 3 block rule equals the composite");
        for &cell in &cells {
            for q in 0..=args.qmax {
                let a = e.mu_composed(&x, cell, q, 0, MuSign::Formula)?;
                let b = e.mu_r3_blocks(&x, cell, q, MuSign::Formula)?;
                c.assert(a == b, || format!("{} q={q}", x.name(cell)));
            }
        }
    } else {
        rec.skip("mu", "block rule", "the r = 3 block rule equals the composite", "only for r = 3");
    }
    Ok(())
}

fn suspension_suite(rec: &mut Recorder, args: &VerifyArgs, e: &DiagonalEngine) -> Result<()> {
    let r = args.r;
    let x = AugSimplicialSet::simplex(args.n.min(2));
    for dir in [Direction::Right, Direction::Left] {
        let c = rec.start("suspension", format!("{dir:?} suspension"), "μ on a suspended cell is the suspended μ, up to sign and r̃!");
        let mut measured = 0;
        for cell in x.all_cells() {
            for q in 0..=args.qmax.min(8) {
                let rep = e.suspend_check(&x, cell, q, dir)?;
                let ok = if r == 2 { rep.literal_holds_mod_2 } else { rep.literal_holds };
                measured += rep.measured_holds as usize;
                c.assert(ok, || {
                    format!("{} q={q}{}", x.name(cell), if rep.measured_holds { " (holds with the inverse rotation)" } else { "" })
                });
            }
        }
        if dir == Direction::Left && r != 2 {
            let total = c.checked;
            let c = rec.start("suspension", "Left suspension, inverse rotation", "the left identity with ρ^{-1} and sign (-1)^{C(r,2)(n+1)}");
            c.checked = total;
            if measured != total {
                c.status = "fail";
                c.failures.push(format!("{} of {total} cases", total - measured));
            }
        }
    }
    Ok(())
}

fn power_suite(rec: &mut Recorder, args: &VerifyArgs, e: &DiagonalEngine) -> Result<()> {
    let r = args.r;
    let p = r as u64;
    let mut seed = args.seed;
    let x = if r == 2 { AugSimplicialSet::rp2() } else { AugSimplicialSet::simplex_boundary(args.n.max(2)) };
    let h = cohomology_basis(&x, p)?;
    let c = rec.start("power", "cocycles and representatives", "P^i sends cocycles to cocycles and is constant on classes");
    for dim in -1..=x.top_dim() {
        for g in h.basis(dim) {
            for i in 0..=(x.top_dim() - dim) as i64 {
                let base = power_op(e, &x, i, &g, Normalization::Standard)?.output;
                c.assert(base.coboundary(&x).is_zero(), || format!("P^{i} on dim {dim}"));
                for _ in 0..10 {
                    seed += 1;
                    let z = random_cochain(&x, dim - 1, p, seed);
                    let y = power_op(e, &x, i, &g.add(&z.coboundary(&x)), Normalization::Standard)?.output;
                    c.assert(h.same_class(&y, &base), || format!("P^{i} on dim {dim}, seed {seed}"));
                }
            }
        }
    }
    if r == 2 {
        let c = rec.start("power", "Bockstein", "P^1 of the generator of H^1(RP²) is its Bockstein");
        let a = h.generator(1, 0)?;
        let sq = power_op(e, &x, 1, &a, Normalization::Standard)?.output;
        c.assert(!h.is_coboundary(&sq), || "P¹a is zero".into());
        c.assert(h.same_class(&sq, &bockstein(&x, &a)), || "P¹a differs from βa".into());
    }
    // P^0 is measured, not asserted
    let rows = normalization_report(e, &x)?;
    let c = rec.start("power", "P^0 under both normalisations", "how P^0 acts on each basis class");
    c.status = "report";
    c.checked = rows.len();
    c.data = Some(serde_json::to_value(&rows)?);
    Ok(())
}
