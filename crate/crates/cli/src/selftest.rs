//! Replays the worked examples with their printed values.

use crate::Outcome;
use anyhow::Result;
use cycdiag::algebra::{coeff, frac, render, Chain, Coefficient};
use cycdiag::diagonal::{alpha_universal, beta, gamma, DiagonalEngine, MuSign, OmegaPair};
use cycdiag::resolutions::{phi, psi_dual_bar, PiecedWord, PsiEngine, WElem};
use cycdiag::simplicial::{AugSimplicialSet, Cell, Simplex};
use cycdiag::straightening::{f_unsorted, Straightening};
use serde_json::{json, Value};
use std::fmt::Debug;

struct Goldens {
    rows: Vec<Value>,
    failed: usize,
}

impl Goldens {
    fn record<T: PartialEq + Debug>(&mut self, name: &str, expected: T, got: T, note: Option<&str>) {
        let ok = expected == got;
        self.failed += !ok as usize;
        eprintln!("{}  {name}", if ok { "pass" } else { "FAIL" });
        let mut row = json!({
            "name": name,
            "expected": format!("{expected:?}"),
            "got": format!("{got:?}"),
            "passed": ok,
        });
        if let Some(n) = note {
            row["note"] = json!(n);
        }
        self.rows.push(row);
    }
}

fn welem(q: i64, r: u32, entries: &[(u32, Coefficient)]) -> WElem {
    let mut out = WElem::zero(q, r);
    for &(t, c) in entries {
        out.coeffs[t as usize] += c;
    }
    out
}

fn shown(w: &WElem) -> Vec<String> {
    w.coeffs.iter().map(render).collect()
}

fn list(entries: &[(&[u32], i64, i64)]) -> Chain<Vec<u32>> {
    entries.iter().map(|(w, n, d)| (w.to_vec(), frac(*n, *d))).collect()
}

fn mu_coefficient(
    e: &DiagonalEngine,
    x: &AugSimplicialSet,
    cell: Cell,
    q: usize,
    term: &[Vec<u32>],
) -> Result<Coefficient> {
    let c = e.mu_composed(x, cell, q, 0, MuSign::Formula)?;
    let by_vertices: Chain<Vec<Vec<u32>>> =
        c.map_signed(|t| Some((t.iter().map(|&f| x.data(f).vertices.clone().unwrap_or_default()).collect(), 1)));
    Ok(by_vertices.coefficient(&term.to_vec()))
}

pub fn run() -> Result<Outcome> {
    let mut g = Goldens { rows: vec![], failed: 0 };
    let s3 = Straightening::preset("3")?;
    let s5 = Straightening::preset("5a")?;

    g.record("Φ([0]), r=3", shown(&WElem::basis(1, 0, 3)), shown(&phi(&[0], 3)), None);
    g.record("Φ([1,2]), r=3", shown(&WElem::basis(2, 1, 3)), shown(&phi(&[1, 2], 3)), None);
    g.record("Φ([0,1,2]), r=5", shown(&welem(3, 5, &[(0, frac(1, 2))])), shown(&phi(&[0, 1, 2], 5)), None);
    g.record("Φ([0,1]), r=5", shown(&welem(2, 5, &[(0, frac(1, 2)), (3, frac(1, 2))])), shown(&phi(&[0, 1], 5)), None);
    g.record("Φ([0,3]), r=5", shown(&welem(2, 5, &[(0, frac(1, 2))])), shown(&phi(&[0, 3], 5)), None);

    let sx = |v: &[u32], r: u32| Simplex::new(v.to_vec(), r as i32 - 1);
    g.record("f([0]⊗[2,1])", -Chain::unit(sx(&[0], 3)), f_unsorted(&s3, &[0], &[2, 1]), None);
    g.record("f([0,1]⊗[2,0])", Chain::unit(sx(&[0, 1], 3)), f_unsorted(&s3, &[0, 1], &[2, 0]), None);
    g.record("f([2,3,0]⊗[4,1,3])", Chain::unit(sx(&[0, 2], 5)), f_unsorted(&s5, &[2, 3, 0], &[4, 1, 3]), None);
    g.record("f([1,2,3,4]⊗[0,1,2])", Chain::unit(sx(&[1, 2, 3], 5)), f_unsorted(&s5, &[1, 2, 3, 4], &[0, 1, 2]), None);

    let p = OmegaPair::new(vec![0, 0, 1, 3, 4, 6], vec![0, 1, 0, 0, 0, 1], 7)?;
    g.record("β, r=3", Some((-1, vec![vec![0, 1, 3, 4], vec![0, 6], vec![]])), beta(&p, 3), None);
    let p = OmegaPair::new(vec![0, 1, 1, 1, 2, 2, 2], vec![1, 3, 4, 1, 1, 3, 0], 2)?;
    g.record("β, r=5", Some((-1, vec![vec![2], vec![0, 1, 2], vec![], vec![1, 2], vec![1]])), beta(&p, 5), None);
    let p = OmegaPair::new(vec![0, 0, 1, 3, 4, 6], vec![0, 1, 2, 0, 2, 1], 7)?;
    g.record("γ, r=3", vec![0, 1, 0, 0, 0, 1], gamma(&p, 3).a, None);
    let p = OmegaPair::new(vec![0, 1, 1, 1, 2, 2, 2], vec![1, 2, 3, 0, 4, 1, 3], 2)?;
    g.record("γ, r=5", vec![1, 3, 4, 1, 1, 3, 0], gamma(&p, 5).a, None);
    let v = vec![vec![], vec![0, 6], vec![0, 1, 3, 4]];
    g.record(
        "α on Δ⁷",
        (-1, vec![(0..8).collect(), vec![1, 2, 3, 4, 5, 7], vec![2, 5, 6, 7]]),
        alpha_universal(&v, 7),
        Some("the middle factor is printed as [1,2,3,4,5], which has the wrong dimension"),
    );
    let v = vec![vec![1], vec![1, 2], vec![], vec![0, 1, 2], vec![2]];
    g.record("α on Δ²", (-1, vec![vec![0, 2], vec![0], vec![0, 1, 2], vec![], vec![0, 1]]), alpha_universal(&v, 2), None);

    let p3 = PsiEngine::new(s3.clone());
    let p5 = PsiEngine::new(s5.clone());
    let w: PiecedWord = "1|230|413".parse()?;
    g.record(
        "Ψ₇(1|230|413), r=5",
        shown(&welem(7, 5, &[(0, frac(-1, 2))])),
        shown(&p5.psi(&w)?),
        Some("the recursion as defined divides by r̃! at every step, which gives -1/4"),
    );
    for n in [6, 7] {
        let v = p3.psi_n(&[0, 0, 1, 3, 4, 6], &[0, 1, 2, 0, 2, 1], n)?.rho_coefficient(0);
        g.record(&format!("Ψⁿ, r=3, n={n}"), render(&coeff(-1)), render(&v), None);
    }
    let v = p5.psi_n(&[0, 1, 1, 1, 2, 2, 2], &[1, 2, 3, 0, 4, 1, 3], 2)?.rho_coefficient(0);
    g.record("Ψⁿ, r=5, n=2", render(&coeff(4)), render(&v), Some("same division by r̃! as Ψ₇; the recursion gives 2"));

    let e3 = DiagonalEngine::new(s3);
    let e5 = DiagonalEngine::new(s5);
    let x7 = AugSimplicialSet::simplex(7);
    let tau = x7.find_vertices(&[0, 1, 2, 3, 4, 5, 6, 7]).expect("top cell");
    let term = vec![(0..8).collect(), vec![1, 2, 3, 4, 5, 7], vec![2, 5, 6, 7]];
    g.record("μ on Δ⁷, r=3", render(&coeff(-1)), render(&mu_coefficient(&e3, &x7, tau, 6, &term)?), None);
    let x19 = AugSimplicialSet::from_facets(&[vec![0, 2, 3, 4, 5, 6, 9]]);
    let tau = x19.find_vertices(&[0, 2, 3, 4, 5, 6, 9]).expect("facet");
    let term = vec![vec![0, 2, 3, 4, 5, 6, 9], vec![2, 3, 4, 5, 6], vec![3, 6, 9]];
    g.record("μ on a face of Δ¹⁹, r=3", render(&coeff(-1)), render(&mu_coefficient(&e3, &x19, tau, 6, &term)?), None);
    let x2 = AugSimplicialSet::simplex(2);
    let tau = x2.find_vertices(&[0, 1, 2]).expect("top cell");
    let term = vec![vec![0, 2], vec![0], vec![0, 1, 2], vec![], vec![0, 1]];
    g.record(
        "μ on Δ², r=5",
        render(&coeff(4)),
        render(&mu_coefficient(&e5, &x2, tau, 7, &term)?),
        Some("inherits the Ψⁿ value"),
    );

    let r3 = [
        list(&[(&[0], 1, 1)]),
        list(&[(&[0, 1], 1, 1), (&[1, 0], -1, 1)]),
        list(&[(&[0, 1, 2], 1, 1), (&[0, 2, 1], -1, 1)]),
        list(&[(&[0, 1, 2, 0], 1, 1), (&[0, 1, 0, 2], -1, 1), (&[1, 0, 2, 1], 1, 1), (&[1, 0, 1, 2], -1, 1)]),
    ];
    for (q, expect) in (1..).zip(r3) {
        g.record(&format!("dual list, r=3, q={q}"), expect, psi_dual_bar(q, 3)?, None);
    }
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
    for (q, expect) in (1..).zip(r5) {
        let note = (q == 2).then_some("(3,2) is printed with a plus sign; sorting it is one transposition");
        g.record(&format!("dual list, r=5, q={q}"), expect, psi_dual_bar(q, 5)?, note);
    }
    g.record("dual list, r=5, q=4, summands", 24, psi_dual_bar(4, 5)?.len(), None);

    let total = g.rows.len();
    let summary = format!("{} of {total} examples reproduced", total - g.failed);
    let json = json!({ "examples": g.rows, "failed": g.failed });
    Ok(Outcome { json, summary, passed: g.failed == 0 })
}
