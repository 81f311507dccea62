//! The connected r-cyclic diagonal `μ` on normalized chains of augmented semi-simplicial sets.
//!
//! Everything is first computed on the universal simplex `Δ^n_+`, where a tensor factor is
//! recorded by the vertex positions it keeps, and then pushed to a cell of `X` along its faces.

use crate::algebra::{binom2, coeff, frac, sign_of, sort_sign, Chain, Coefficient};
use crate::resolutions::{is_alternating, phi_index, rt_factorial, PiecedWord, PsiEngine, ResolutionError};
use crate::simplicial::{complement, dual_face_sign, AugSimplicialSet, Cell};
use crate::straightening::{Straightening, StraighteningError};
use dashmap::DashMap;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagonalError {
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Straightening(#[from] StraighteningError),
    #[error("invalid pair (U, A): {0}")]
    Pair(String),
    #[error("this operation needs r = {expected}, got r = {got}")]
    WrongPrime { expected: u32, got: u32 },
    #[error("the coefficient formula needs an odd prime, got r = {0}")]
    EvenPrime(u32),
}

/// Which overall sign `μ` carries in each bidegree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum MuSign {
    /// The sign produced by the coefficient formula (`(-1)^𝔰 ν`), which is also what the
    /// composition of the structure maps yields.
    #[default]
    Formula,
    /// Rescaled by `(-1)^{q(n+1) + C(r,2) C(n+2,2)}` so that
    /// `∂μ(e ⊗ x) = μ(∂e ⊗ x) + (-1)^q μ(θ_{r-1} e ⊗ ∂x)` holds as written.
    Differential,
}

impl MuSign {
    pub fn factor(self, r: u32, n: i32, q: usize) -> i64 {
        match self {
            MuSign::Formula => 1,
            MuSign::Differential => {
                sign_of(q as i64 * (n as i64 + 1) + binom2(r as i64) * binom2(n as i64 + 2))
            }
        }
    }
}

/// A pair `(U, A)`: `U` nondecreasing in `0..=n`, `A` over `0..r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OmegaPair {
    pub u: Vec<u32>,
    pub a: Vec<u32>,
    pub n: i32,
}

impl OmegaPair {
    pub fn new(u: Vec<u32>, a: Vec<u32>, n: i32) -> Result<Self, DiagonalError> {
        if u.len() != a.len() {
            return Err(DiagonalError::Pair(format!("|U| = {} but |A| = {}", u.len(), a.len())));
        }
        if u.windows(2).any(|p| p[0] > p[1]) {
            return Err(DiagonalError::Pair(format!("U = {u:?} is not nondecreasing")));
        }
        if u.iter().any(|&x| x as i64 > n as i64) {
            return Err(DiagonalError::Pair(format!("U = {u:?} leaves 0..={n}")));
        }
        Ok(OmegaPair { u, a, n })
    }

    pub fn q(&self) -> usize {
        self.u.len()
    }

    /// Lengths of the maximal runs of equal entries of `U`.
    pub fn runs(&self) -> Vec<usize> {
        run_lengths(&self.u)
    }

    /// `a_i < a_j` whenever `u_i = u_j` and `i < j`.
    pub fn is_ordered(&self) -> bool {
        (1..self.q()).all(|i| self.u[i - 1] != self.u[i] || self.a[i - 1] < self.a[i])
    }

    pub fn check_letters(&self, r: u32) -> Result<(), DiagonalError> {
        match self.a.iter().find(|&&x| x >= r) {
            Some(x) => Err(DiagonalError::Pair(format!("letter {x} out of range for r = {r}"))),
            None => Ok(()),
        }
    }

    /// `A` pieced along the runs of `U`.
    pub fn word(&self) -> PiecedWord {
        let mut pieces: Vec<Vec<u32>> = vec![];
        for i in 0..self.q() {
            if i > 0 && self.u[i - 1] == self.u[i] {
                pieces.last_mut().unwrap().push(self.a[i]);
            } else {
                pieces.push(vec![self.a[i]]);
            }
        }
        PiecedWord(pieces)
    }

    /// `A' = (a_i + u_i mod r)`.
    pub fn shifted(&self, r: u32) -> Vec<u32> {
        self.u.iter().zip(&self.a).map(|(u, a)| (u + a) % r).collect()
    }
}

pub fn run_lengths(u: &[u32]) -> Vec<usize> {
    let mut out: Vec<usize> = vec![];
    for i in 0..u.len() {
        if i > 0 && u[i - 1] == u[i] {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

/// Parity of the stable sort of `seq` (equal entries are not exchanged).
pub fn stable_sort_parity(seq: &[u32]) -> i64 {
    let mut inv = 0i64;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

/// `β(U, A) = (-1)^{π(A)} U^0_A ⊗ … ⊗ U^{r-1}_A` with `U^i_A = {u_j | a_j = i}`;
/// `None` when some `U^i_A` repeats an entry.
pub fn beta(p: &OmegaPair, r: u32) -> Option<(i64, Vec<Vec<u32>>)> {
    let mut parts = vec![vec![]; r as usize];
    for (&u, &a) in p.u.iter().zip(&p.a) {
        let part: &mut Vec<u32> = &mut parts[a as usize];
        if part.last() == Some(&u) {
            return None;
        }
        part.push(u);
    }
    Some((sign_of(stable_sort_parity(&p.a)), parts))
}

/// `γ(U, A) = (U, A')`.
pub fn gamma(p: &OmegaPair, r: u32) -> OmegaPair {
    OmegaPair { u: p.u.clone(), a: p.shifted(r), n: p.n }
}

/// Sign of `α(V_0 ⊗ … ⊗ V_{r-1} ⊗ τ^{⊗r}) = ± d_{V_0}τ ⊗ … ⊗ d_{V_{r-1}}τ` for `τ` of dimension `n`.
pub fn alpha_sign(v: &[Vec<u32>], n: i32) -> i64 {
    let np1 = n as i64 + 1;
    let reorder: i64 = v.iter().enumerate().map(|(k, x)| k as i64 * x.len() as i64).sum();
    v.iter().fold(sign_of(np1 * reorder), |s, x| s * dual_face_sign(x, n))
}

/// A tensor product of faces of the universal simplex, each recorded by its kept positions.
pub type UTerm = Vec<Vec<u32>>;

/// `α` on the universal simplex `Δ^n_+`.
pub fn alpha_universal(v: &[Vec<u32>], n: i32) -> (i64, UTerm) {
    (alpha_sign(v, n), v.iter().map(|x| complement(x, n)).collect())
}

/// `α` on a cell of `X`; `None` when a face lands on the basepoint.
pub fn alpha(x: &AugSimplicialSet, cell: Cell, v: &[Vec<u32>]) -> Option<(i64, Vec<Cell>)> {
    let cells = v.iter().map(|s| x.face_set(cell, s)).collect::<Option<Vec<Cell>>>()?;
    Some((alpha_sign(v, cell.dim), cells))
}

/// The universal term of a pair, `d_{U^{r-1}} ⊗ … ⊗ d_{U^0}` with `U^k = {u_i | a_i + u_i ≡ k}`,
/// and the sign of `α ∘ β ∘ γ` on it.
pub fn pair_term(p: &OmegaPair, r: u32) -> Option<(i64, UTerm)> {
    let (bs, parts) = beta(&gamma(p, r), r)?;
    let v: Vec<Vec<u32>> = parts.into_iter().rev().collect();
    let (s, term) = alpha_universal(&v, p.n);
    Some((bs * s, term))
}

/// The ordered pair whose universal term is `term`.
pub fn pair_of_term(term: &[Vec<u32>], n: i32, r: u32) -> Option<OmegaPair> {
    if term.len() != r as usize {
        return None;
    }
    let mut u = vec![];
    let mut a = vec![];
    for pos in 0..=n.max(-1) {
        let pos = pos as u32;
        let mut letters: Vec<u32> = (0..r)
            .filter(|&k| !term[(r - 1 - k) as usize].contains(&pos))
            .map(|k| (k + r - pos % r) % r)
            .collect();
        letters.sort();
        for x in letters {
            u.push(pos);
            a.push(x);
        }
    }
    let p = OmegaPair::new(u, a, n).ok()?;
    (pair_term(&p, r)?.1 == term).then_some(p)
}

/// All ordered pairs of degree `q` on `Δ^n_+` whose runs are shorter than `r`.
pub fn enumerate_pairs(r: u32, n: i32, q: usize) -> Vec<OmegaPair> {
    let subsets: Vec<Vec<Vec<u32>>> = (0..r as usize)
        .map(|k| {
            (0u32..(1 << r))
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..r).filter(|v| m >> v & 1 == 1).collect())
                .collect()
        })
        .collect();
    let mut out = vec![];
    fn rec(
        pos: i32,
        n: i32,
        rem: usize,
        r: u32,
        subsets: &[Vec<Vec<u32>>],
        u: &mut Vec<u32>,
        a: &mut Vec<u32>,
        out: &mut Vec<OmegaPair>,
    ) {
        if rem == 0 {
            out.push(OmegaPair { u: u.clone(), a: a.clone(), n });
            return;
        }
        if pos > n {
            return;
        }
        // positions left must be able to absorb the remaining letters
        if ((n - pos + 1) as usize) * (r as usize - 1) < rem {
            return;
        }
        rec(pos + 1, n, rem, r, subsets, u, a, out);
        for k in 1..(r as usize).min(rem + 1) {
            for s in &subsets[k] {
                u.extend(std::iter::repeat_n(pos as u32, k));
                a.extend(s);
                rec(pos + 1, n, rem - k, r, subsets, u, a, out);
                u.truncate(u.len() - k);
                a.truncate(a.len() - k);
            }
        }
    }
    rec(0, n, q, r, &subsets, &mut vec![], &mut vec![], &mut out);
    out
}

/// Number of pairs `enumerate_pairs` would produce.
pub fn count_pairs(r: u32, n: i32, q: usize) -> u128 {
    // coefficient of x^q in (Σ_{k<r} C(r,k) x^k)^{n+1}
    let row: Vec<u128> = (0..r as usize)
        .map(|k| (0..k).fold(1u128, |acc, i| acc * (r as u128 - i as u128) / (i as u128 + 1)))
        .collect();
    let mut poly = vec![1u128];
    for _ in 0..=n.max(-1) {
        let mut next = vec![0u128; poly.len() + row.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        poly = next;
    }
    poly.get(q).copied().unwrap_or(0)
}

/// `𝔰_0 … 𝔰_4` and the per-level `𝔱` values of the coefficient recursion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SignLedger {
    pub s: [i64; 5],
    pub steps: Vec<LedgerStep>,
    pub base: Option<BaseStep>,
}

impl SignLedger {
    pub fn s_total(&self) -> i64 {
        self.s.iter().sum::<i64>() % 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerStep {
    pub depth: usize,
    pub w: Vec<u32>,
    pub z: Vec<u32>,
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    pub pi: Vec<u32>,
    pub t: [i64; 5],
    pub next: Option<(Vec<u32>, Vec<u32>)>,
}

impl LedgerStep {
    pub fn t_total(&self) -> i64 {
        self.t.iter().sum::<i64>() % 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseStep {
    pub depth: usize,
    pub sorted: Vec<u32>,
    pub t: i64,
    pub nonzero: bool,
}

/// `𝔰_0 … 𝔰_4` of a pair, each reduced mod 2.
pub fn s_ledger(p: &OmegaPair, r: u32) -> [i64; 5] {
    let q = p.q() as i64;
    let n = p.n as i64;
    let shifted = p.shifted(r);
    let s1: i64 = (0..r).map(|k| binom2(shifted.iter().filter(|&&x| x == k).count() as i64)).sum();
    let s2: i64 = p.u.iter().map(|&x| x as i64).sum();
    let s3: i64 = (n + 1) * shifted.iter().map(|&x| x as i64).sum::<i64>();
    [(n * q).rem_euclid(2), s1 % 2, s2 % 2, s3.rem_euclid(2), stable_sort_parity(&shifted)]
}

/// Universal term with no sign: `d_{U^{r-1}} ⊗ … ⊗ d_{U^0}` by kept positions.
pub fn bare_term(p: &OmegaPair, r: u32) -> UTerm {
    let shifted = p.shifted(r);
    (0..r)
        .rev()
        .map(|k| {
            let removed: Vec<u32> =
                p.u.iter().zip(&shifted).filter(|(_, &s)| s == k).map(|(&u, _)| u).collect();
            complement(&removed, p.n)
        })
        .collect()
}

/// `(r̃!)^n`, which is `1/r̃!` on the (−1)-cell.
fn rt_power(r: u32, n: i32) -> Coefficient {
    let f = rt_factorial(r);
    if n < 0 {
        frac(1, f)
    } else {
        coeff(f.pow(n as u32))
    }
}

type NuKey = (Vec<usize>, Vec<u32>);

/// Computes `μ` by both routes, caching the universal expansions.
pub struct DiagonalEngine {
    psi: PsiEngine,
    composed: DashMap<(i32, usize, u32), Arc<Chain<UTerm>>>,
    direct: DashMap<(i32, usize), Arc<Chain<UTerm>>>,
    nu_memo: DashMap<NuKey, Coefficient>,
}

impl std::fmt::Debug for DiagonalEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DiagonalEngine({:?})", self.psi)
    }
}

impl DiagonalEngine {
    pub fn new(st: Straightening) -> Self {
        Self::from_psi(PsiEngine::new(st))
    }

    pub fn from_psi(psi: PsiEngine) -> Self {
        DiagonalEngine { psi, composed: DashMap::new(), direct: DashMap::new(), nu_memo: DashMap::new() }
    }

    /// The preset or default straightening for odd `r`; the 𝔽_2 quotient for `r = 2`.
    pub fn for_r(r: u32) -> Result<Self, DiagonalError> {
        Ok(Self::from_psi(PsiEngine::for_r(r)?))
    }

    pub fn r(&self) -> u32 {
        self.psi.r()
    }

    pub fn psi(&self) -> &PsiEngine {
        &self.psi
    }

    fn straightening(&self) -> Result<&Straightening, DiagonalError> {
        self.psi.straightening().ok_or(DiagonalError::EvenPrime(self.r()))
    }

    /// `(r̃!)^{n+1} (-1)^{q(n+1)}` times the coefficient of `ρ^{-j} e_q` in `Ψ(ηⁿ(U,A))`.
    pub fn psi_coefficient(&self, p: &OmegaPair, j: u32) -> Result<Coefficient, DiagonalError> {
        let r = self.r();
        p.check_letters(r)?;
        if p.runs().iter().any(|&k| k >= r as usize) {
            return Ok(Coefficient::zero());
        }
        let v = self.psi.psi(&p.word())?;
        let scale = rt_factorial(r).pow((p.n + 1) as u32) * sign_of(p.q() as i64 * (p.n as i64 + 1));
        // C_r acts trivially in degree 0
        let j = if p.q() == 0 { 0 } else { j % r };
        Ok(v.rho_coefficient((r - j) % r) * coeff(scale))
    }

    /// Coefficient of the term of `p` in `μ(ρ^j e^∨_{-q} ⊗ τ)` through `α ∘ β ∘ γ ∘ Ψ`.
    pub fn coefficient_composed(&self, p: &OmegaPair, j: u32) -> Result<Coefficient, DiagonalError> {
        let Some((s, _)) = pair_term(p, self.r()) else { return Ok(Coefficient::zero()) };
        Ok(self.psi_coefficient(p, j)? * coeff(s))
    }

    /// `μ(ρ^j e^∨_{-q} ⊗ ι_n)` on the universal simplex, by composition.
    pub fn mu_universal(&self, n: i32, q: usize, j: u32) -> Result<Arc<Chain<UTerm>>, DiagonalError> {
        let r = self.r();
        let key = (n, q, j % r);
        if let Some(c) = self.composed.get(&key) {
            return Ok(c.clone());
        }
        let pairs = enumerate_pairs(r, n, q);
        let terms: Vec<(UTerm, Coefficient)> = pairs
            .par_iter()
            .map(|p| -> Result<Option<(UTerm, Coefficient)>, DiagonalError> {
                let c = self.psi_coefficient(p, j)?;
                if c.is_zero() {
                    return Ok(None);
                }
                Ok(pair_term(p, r).map(|(s, t)| (t, c * coeff(s))))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        let chain: Arc<Chain<UTerm>> = Arc::new(terms.into_iter().collect());
        self.composed.insert(key, chain.clone());
        Ok(chain)
    }

    /// `ν_{U,A}` of the coefficient recursion; the recursive step divides by `r̃!`.
    pub fn nu(&self, p: &OmegaPair) -> Result<Coefficient, DiagonalError> {
        self.straightening()?;
        p.check_letters(self.r())?;
        let scale = rt_power(self.r(), p.n);
        Ok(self.nu_reduced(&p.runs(), &p.a, None, 0) * scale)
    }

    /// `ν_{U,A}` with the full sign ledger.
    pub fn nu_traced(&self, p: &OmegaPair) -> Result<(Coefficient, SignLedger), DiagonalError> {
        self.straightening()?;
        p.check_letters(self.r())?;
        let mut ledger = SignLedger { s: s_ledger(p, self.r()), ..Default::default() };
        let scale = rt_power(self.r(), p.n);
        let v = self.nu_reduced(&p.runs(), &p.a, Some(&mut ledger), 0) * scale;
        Ok((v, ledger))
    }

    /// `ν / (r̃!)^n`, which depends only on the run lengths of `U` and on `A`.
    fn nu_reduced(&self, runs: &[usize], a: &[u32], mut ledger: Option<&mut SignLedger>, depth: usize) -> Coefficient {
        let r = self.r();
        let q = a.len();
        if runs.iter().any(|&k| k >= r as usize) {
            return Coefficient::zero();
        }
        if q < r as usize {
            let (t, sorted) = match sort_sign(a) {
                Some((s, v)) => ((1 - s) / 2, v),
                None => {
                    if let Some(l) = ledger {
                        l.base = Some(BaseStep { depth, sorted: a.to_vec(), t: 0, nonzero: false });
                    }
                    return Coefficient::zero();
                }
            };
            let ok = is_alternating(&sorted, r);
            if let Some(l) = ledger {
                l.base = Some(BaseStep { depth, sorted: sorted.clone(), t, nonzero: ok });
            }
            if !ok {
                return Coefficient::zero();
            }
            let f = crate::algebra::factorial(phi_index(r, q) as u64);
            return coeff(sign_of(t) * f);
        }
        let key = (runs.to_vec(), a.to_vec());
        if ledger.is_none() {
            if let Some(v) = self.nu_memo.get(&key) {
                return *v;
            }
        }
        let st = self.psi.straightening().expect("odd r");
        // ℓ: letters in the whole runs after the pivotal run; k: ℓ plus the pivotal run
        let mut ell = 0;
        let mut piv = runs.len();
        for (idx, &len) in runs.iter().enumerate().rev() {
            if ell + len >= r as usize {
                piv = idx;
                break;
            }
            ell += len;
        }
        let k = ell + runs[piv];
        let w = &a[q - ell..];
        let z = &a[q - k..q - ell];
        let mut out = Coefficient::zero();
        let covered = (0..r).all(|v| w.contains(&v) || z.contains(&v));
        let w_distinct = sort_sign(w).is_some();
        if covered && w_distinct {
            let x: Vec<u32> = (0..r).filter(|v| !w.contains(v)).collect();
            let y: Vec<u32> = z.iter().copied().filter(|v| !x.contains(v)).collect();
            let wx: Vec<u32> = w.iter().chain(&x).copied().collect();
            let t0 = stable_sort_parity(&wx);
            let xy: Vec<u32> = x.iter().chain(&y).copied().collect();
            let t1 = match sort_sign(z) {
                Some((zs, _)) => (stable_sort_parity(&xy) + (1 - zs) / 2) % 2,
                None => return Coefficient::zero(),
            };
            let t2 = ((x.len() as i64 - 1) * y.len() as i64).rem_euclid(2);
            let mut next_runs = runs[..piv].to_vec();
            next_runs.push(k - r as usize + 1);
            for (t3s, perm) in crate::straightening::signed_permutations(y.len()) {
                let t3 = (1 - t3s) / 2;
                let mut cur = x.clone();
                let mut omega = vec![st.choose(&cur)];
                for &i in &perm {
                    cur.push(y[i]);
                    cur.sort();
                    omega.push(st.choose(&cur));
                }
                let pi: Vec<u32> = perm.iter().map(|&i| y[i]).collect();
                let Some((t4s, sorted)) = sort_sign(&omega) else {
                    if let Some(l) = ledger.as_deref_mut() {
                        l.steps.push(LedgerStep {
                            depth,
                            w: w.to_vec(),
                            z: z.to_vec(),
                            x: x.clone(),
                            y: y.clone(),
                            pi,
                            t: [t0, t1, t2, t3, 0],
                            next: None,
                        });
                    }
                    continue;
                };
                let t4 = (1 - t4s) / 2;
                let mut next_a = a[..q - k].to_vec();
                next_a.extend(&sorted);
                let t = [t0, t1, t2, t3, t4];
                let total: i64 = t.iter().sum();
                if let Some(l) = ledger.as_deref_mut() {
                    let next_u: Vec<u32> = next_runs
                        .iter()
                        .enumerate()
                        .flat_map(|(i, &len)| std::iter::repeat_n(i as u32, len))
                        .collect();
                    l.steps.push(LedgerStep {
                        depth,
                        w: w.to_vec(),
                        z: z.to_vec(),
                        x: x.clone(),
                        y: y.clone(),
                        pi,
                        t,
                        next: Some((next_u, next_a.clone())),
                    });
                }
                let sub = self.nu_reduced(&next_runs, &next_a, ledger.as_deref_mut(), depth + 1);
                out += sub * coeff(sign_of(total));
            }
        }
        out *= frac(1, rt_factorial(r));
        if ledger.is_none() {
            self.nu_memo.insert(key, out);
        }
        out
    }

    /// `(-1)^𝔰 ν_{U,A}`, the coefficient of the term of `p` by the direct formula.
    pub fn coefficient_direct(&self, p: &OmegaPair) -> Result<Coefficient, DiagonalError> {
        let s: i64 = s_ledger(p, self.r()).iter().sum();
        Ok(self.nu(p)? * coeff(sign_of(s)))
    }

    /// `μ(e^∨_{-q} ⊗ ι_n)` on the universal simplex, by the direct formula.
    pub fn mu_direct_universal(&self, n: i32, q: usize) -> Result<Arc<Chain<UTerm>>, DiagonalError> {
        self.straightening()?;
        let r = self.r();
        if let Some(c) = self.direct.get(&(n, q)) {
            return Ok(c.clone());
        }
        let pairs = enumerate_pairs(r, n, q);
        let terms: Vec<(UTerm, Coefficient)> = pairs
            .par_iter()
            .map(|p| self.coefficient_direct(p).map(|c| (bare_term(p, r), c)))
            .collect::<Result<Vec<_>, _>>()?;
        let chain: Arc<Chain<UTerm>> =
            Arc::new(terms.into_iter().filter(|(_, c)| !c.is_zero()).collect());
        self.direct.insert((n, q), chain.clone());
        Ok(chain)
    }

    /// The r = 3 block rule, summed over pairs with `a_i ≠ a_{i+1}` and runs of length ≤ 2.
    pub fn mu_r3_blocks_universal(&self, n: i32, q: usize) -> Result<Chain<UTerm>, DiagonalError> {
        if self.r() != 3 {
            return Err(DiagonalError::WrongPrime { expected: 3, got: self.r() });
        }
        let mut out = Chain::zero();
        for u in nondecreasing_runs(n, q, 2) {
            for a in adjacent_distinct_words(q, 3) {
                let p = OmegaPair { u: u.clone(), a, n };
                if let Some(c) = r3_block_coefficient(&p) {
                    out.add_term(bare_term(&p, 3), coeff(c));
                }
            }
        }
        Ok(out)
    }

    /// Pushes a universal expansion to a cell of `X`, dropping terms with a basepoint face.
    pub fn push_forward(x: &AugSimplicialSet, cell: Cell, chain: &Chain<UTerm>) -> Chain<Vec<Cell>> {
        chain.map_signed(|t| {
            t.iter()
                .map(|keep| x.face_keep(cell, keep))
                .collect::<Option<Vec<Cell>>>()
                .map(|cells| (cells, 1))
        })
    }

    /// `μ(ρ^j e^∨_{-q} ⊗ cell)` through `α ∘ β ∘ γ ∘ Ψ`.
    pub fn mu_composed(
        &self,
        x: &AugSimplicialSet,
        cell: Cell,
        q: usize,
        j: u32,
        sign: MuSign,
    ) -> Result<Chain<Vec<Cell>>, DiagonalError> {
        let u = self.mu_universal(cell.dim, q, j)?;
        let s = sign.factor(self.r(), cell.dim, q);
        Ok(Self::push_forward(x, cell, &u).scaled(coeff(s)))
    }

    /// `μ(e^∨_{-q} ⊗ cell)` by the direct coefficient formula.
    pub fn mu_direct(&self, x: &AugSimplicialSet, cell: Cell, q: usize, sign: MuSign) -> Result<Chain<Vec<Cell>>, DiagonalError> {
        let u = self.mu_direct_universal(cell.dim, q)?;
        let s = sign.factor(self.r(), cell.dim, q);
        Ok(Self::push_forward(x, cell, &u).scaled(coeff(s)))
    }

    pub fn mu_r3_blocks(&self, x: &AugSimplicialSet, cell: Cell, q: usize, sign: MuSign) -> Result<Chain<Vec<Cell>>, DiagonalError> {
        let u = self.mu_r3_blocks_universal(cell.dim, q)?;
        let s = sign.factor(self.r(), cell.dim, q);
        Ok(Self::push_forward(x, cell, &u).scaled(coeff(s)))
    }

    /// Coefficient of a universal term in `μ(e^∨_{-q} ⊗ ι_n)`, by both routes.
    pub fn coefficient_of(&self, term: &[Vec<u32>], n: i32) -> Result<(Coefficient, Coefficient), DiagonalError> {
        match pair_of_term(term, n, self.r()) {
            None => Ok((Coefficient::zero(), Coefficient::zero())),
            Some(p) => {
                let direct =
                    if self.r() == 2 { self.coefficient_composed(&p, 0)? } else { self.coefficient_direct(&p)? };
                Ok((self.coefficient_composed(&p, 0)?, direct))
            }
        }
    }

    /// `∂μ(e ⊗ c)` minus the right-hand side of the chain-map identity for `sign`.
    pub fn chain_map_defect(
        &self,
        x: &AugSimplicialSet,
        cell: Cell,
        q: usize,
        sign: MuSign,
    ) -> Result<Chain<Vec<Cell>>, DiagonalError> {
        let r = self.r();
        let n = cell.dim as i64;
        let mut out = tensor_boundary(x, &self.mu_composed(x, cell, q, 0, sign)?);
        let (a, b) = match sign {
            MuSign::Formula => (sign_of(n + 1), sign_of(binom2(r as i64) * (n + 1))),
            MuSign::Differential => (1, sign_of(q as i64)),
        };
        if q.is_multiple_of(2) {
            for j in 0..r {
                out.add_scaled(&self.mu_composed(x, cell, q + 1, j, sign)?, coeff(a));
            }
        } else {
            out.add_scaled(&self.mu_composed(x, cell, q + 1, 1, sign)?, coeff(-a));
            out.add_scaled(&self.mu_composed(x, cell, q + 1, 0, sign)?, coeff(a));
        }
        if q + 1 >= r as usize && cell.dim >= 0 {
            let q2 = q + 1 - r as usize;
            for (face, c) in x.boundary(cell).iter() {
                out.add_scaled(&self.mu_composed(x, *face, q2, 0, sign)?, -*c * coeff(b));
            }
        }
        Ok(out)
    }

    /// `μ(ρ e^∨ ⊗ c) - ρ·μ(e^∨ ⊗ c)`.
    pub fn equivariance_defect(&self, x: &AugSimplicialSet, cell: Cell, q: usize) -> Result<Chain<Vec<Cell>>, DiagonalError> {
        let one = self.mu_composed(x, cell, q, 1, MuSign::Formula)?;
        let zero = self.mu_composed(x, cell, q, 0, MuSign::Formula)?;
        Ok(one - rho_tensor(&zero))
    }

    /// Compares `μ` on a cell with vertices against `μ` of the universal simplex mapped by the
    /// cell's vertex inclusion.
    pub fn naturality_defect(&self, x: &AugSimplicialSet, cell: Cell, q: usize) -> Result<Chain<Vec<Vec<u32>>>, DiagonalError> {
        let verts = x.data(cell).vertices.clone().ok_or_else(|| DiagonalError::Pair("cell has no vertices".into()))?;
        let on_x = self.mu_composed(x, cell, q, 0, MuSign::Formula)?.map_signed(|cells| {
            Some((cells.iter().map(|&c| x.data(c).vertices.clone().unwrap_or_default()).collect::<Vec<_>>(), 1))
        });
        let universal = self.mu_universal(cell.dim, q, 0)?.map_signed(|t| {
            Some((t.iter().map(|keep| keep.iter().map(|&p| verts[p as usize]).collect()).collect::<Vec<Vec<u32>>>(), 1))
        });
        Ok(on_x - universal)
    }

    /// Checks the suspension identities on a cell of `X`.
    pub fn suspend_check(&self, x: &AugSimplicialSet, cell: Cell, q: usize, direction: Direction) -> Result<SuspensionReport, DiagonalError> {
        let r = self.r();
        let n = cell.dim as i64;
        let rt = coeff(rt_factorial(r));
        let (sx, scell) = match direction {
            Direction::Right => (x.right_suspension(), AugSimplicialSet::suspended(cell)),
            Direction::Left => (x.left_suspension(), AugSimplicialSet::suspended(cell)),
        };
        let big = self.mu_composed(&sx, scell, q, 0, MuSign::Formula)?;
        let small = self.mu_composed(x, cell, q, 0, MuSign::Formula)?;
        let susp = |c: &Chain<Vec<Cell>>, extra: i64| -> Chain<Vec<Cell>> {
            c.map_signed(|cells| {
                let s: i64 = cells.iter().enumerate().map(|(k, c)| k as i64 * (c.dim as i64 + 1)).sum();
                Some((cells.iter().map(|&c| AugSimplicialSet::suspended(c)).collect(), sign_of(s + extra)))
            })
        };
        let literal_sign = sign_of(q as i64 + binom2(r as i64) * (n + 1));
        let (literal, measured) = match direction {
            Direction::Right => {
                let rhs = susp(&small, 0).scaled(rt * coeff(literal_sign));
                (rhs.clone(), rhs)
            }
            Direction::Left => {
                let lit = susp(&rho_tensor(&small), 0).scaled(rt * coeff(literal_sign));
                let mut back = small.clone();
                for _ in 1..r {
                    back = rho_tensor(&back);
                }
                let meas = susp(&back, 0).scaled(rt * coeff(sign_of(binom2(r as i64) * (n + 1))));
                (lit, meas)
            }
        };
        Ok(SuspensionReport {
            direction,
            q,
            dim: cell.dim,
            terms: big.len(),
            literal_holds: big == literal,
            literal_holds_mod_2: vanishes_mod_2(&(big.clone() - literal)),
            measured_holds: big == measured,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuspensionReport {
    pub direction: Direction,
    pub q: usize,
    pub dim: i32,
    pub terms: usize,
    /// The identity with the sign `(-1)^{q + C(r,2)(n+1)}`, and for the left suspension the
    /// rotation moving the last factor to the front.
    pub literal_holds: bool,
    pub literal_holds_mod_2: bool,
    /// For the left suspension: sign `(-1)^{C(r,2)(n+1)}` and the inverse rotation.
    pub measured_holds: bool,
}

/// Whether every coefficient is an even integer.
pub fn vanishes_mod_2<G: Ord + Clone>(c: &Chain<G>) -> bool {
    c.iter().all(|(_, v)| v.is_integer() && v.to_integer() % 2 == 0)
}

/// The generator of C_r on `C^{⊗r}`: the last factor moves to the front, with its Koszul sign.
pub fn rho_tensor<G: Clone + Ord + crate::algebra::Graded>(c: &Chain<Vec<G>>) -> Chain<Vec<G>> {
    c.map_signed(|t| {
        let (last, rest) = t.split_last()?;
        let rest_deg: i64 = rest.iter().map(|g| g.degree()).sum();
        let mut out = vec![last.clone()];
        out.extend(rest.iter().cloned());
        Some((out, sign_of(last.degree() * rest_deg)))
    })
}

/// The differential of `N̂(X)^{⊗r}`.
pub fn tensor_boundary(x: &AugSimplicialSet, c: &Chain<Vec<Cell>>) -> Chain<Vec<Cell>> {
    c.map_linear(|t| {
        let mut out = Chain::zero();
        let mut pre = 0i64;
        for k in 0..t.len() {
            for (f, s) in x.boundary(t[k]).iter() {
                let mut v = t.clone();
                v[k] = *f;
                out.add_term(v, *s * coeff(sign_of(pre)));
            }
            pre += t[k].dim as i64 + 1;
        }
        out
    })
}

fn nondecreasing_runs(n: i32, q: usize, max_run: usize) -> Vec<Vec<u32>> {
    let mut out = vec![];
    fn rec(pos: i32, n: i32, rem: usize, max_run: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        if pos > n {
            return;
        }
        rec(pos + 1, n, rem, max_run, cur, out);
        for k in 1..=max_run.min(rem) {
            cur.extend(std::iter::repeat_n(pos as u32, k));
            rec(pos + 1, n, rem - k, max_run, cur, out);
            cur.truncate(cur.len() - k);
        }
    }
    rec(0, n, q, max_run, &mut vec![], &mut out);
    out
}

fn adjacent_distinct_words(q: usize, r: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..q {
        let mut next = vec![];
        for w in &out {
            for x in (0..r).filter(|x| w.last() != Some(x)) {
                let mut v: Vec<u32> = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn cyclically_ordered(b: [u32; 3]) -> bool {
    matches!(b, [0, 1, 2] | [1, 2, 0] | [2, 0, 1])
}

/// The r = 3 block rule on a pair with runs of length ≤ 2 and `a_i ≠ a_{i+1}`: the signed
/// coefficient `(-1)^{𝔰+𝔱}`, or `None` when it vanishes.
///
/// The exceptional block `(a_0)` (odd `q`) must be `(0)`; for even `q ≥ 2` it is `(a_0, a_1)`,
/// which must be `(0,1)`, or `(1,0)` with `u_0 < u_1` (counted in `𝔱`). A regular block
/// `(a_i, a_{i+1}, a_{i+2})`, `i = q-2k-1`, must have distinct entries; a descending one needs
/// `u_i < u_{i+1} < u_{i+2}` and is counted in `𝔱`.
pub fn r3_block_coefficient(p: &OmegaPair) -> Option<i64> {
    let (u, a) = (&p.u, &p.a);
    let q = a.len();
    if a.windows(2).any(|w| w[0] == w[1]) || run_lengths(u).iter().any(|&k| k > 2) {
        return None;
    }
    let mut t = 0;
    if q % 2 == 1 {
        if a[0] != 0 {
            return None;
        }
    } else if q >= 2 {
        match (a[0], a[1]) {
            (0, 1) => {}
            (1, 0) if u[0] < u[1] => t += 1,
            _ => return None,
        }
    }
    let mut k = 1;
    while q > 2 * k {
        let i = q - 2 * k - 1;
        let b = [a[i], a[i + 1], a[i + 2]];
        if b[0] == b[2] {
            return None;
        }
        if !cyclically_ordered(b) {
            if !(u[i] < u[i + 1] && u[i + 1] < u[i + 2]) {
                return None;
            }
            t += 1;
        }
        k += 1;
    }
    let s: i64 = s_ledger(p, 3).iter().sum();
    Some(sign_of(s + t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(u: &[u32], a: &[u32], n: i32) -> OmegaPair {
        OmegaPair::new(u.to_vec(), a.to_vec(), n).unwrap()
    }

    #[test]
    fn beta_gamma_examples() {
        let p = pair(&[0, 0, 1, 3, 4, 6], &[0, 1, 0, 0, 0, 1], 7);
        assert_eq!(beta(&p, 3), Some((-1, vec![vec![0, 1, 3, 4], vec![0, 6], vec![]])));
        let p = pair(&[0, 1, 1, 1, 2, 2, 2], &[1, 3, 4, 1, 1, 3, 0], 2);
        assert_eq!(beta(&p, 5), Some((-1, vec![vec![2], vec![0, 1, 2], vec![], vec![1, 2], vec![1]])));
        let p = pair(&[0, 1, 2], &[0, 1, 2], 2);
        assert_eq!(beta(&p, 3).unwrap().0, 1);
        let g = gamma(&pair(&[0, 0, 1, 3, 4, 6], &[0, 1, 2, 0, 2, 1], 7), 3);
        assert_eq!(g.a, vec![0, 1, 0, 0, 0, 1]);
        let g = gamma(&pair(&[0, 1, 1, 1, 2, 2, 2], &[1, 2, 3, 0, 4, 1, 3], 2), 5);
        assert_eq!(g.a, vec![1, 3, 4, 1, 1, 3, 0]);
        let p = pair(&[0, 0, 0], &[2, 0, 1], 1);
        assert_eq!(gamma(&p, 3), p);
    }

    #[test]
    fn alpha_examples() {
        let v = vec![vec![], vec![0, 6], vec![0, 1, 3, 4]];
        assert_eq!(alpha_universal(&v, 7), (-1, vec![(0..8).collect(), vec![1, 2, 3, 4, 5, 7], vec![2, 5, 6, 7]]));
        // the faces of τ inside Δ¹⁹
        let x = AugSimplicialSet::from_facets(&[vec![0, 2, 3, 4, 5, 6, 9]]);
        let cell = x.find_vertices(&[0, 2, 3, 4, 5, 6, 9]).unwrap();
        let (s, cells) = alpha(&x, cell, &v).unwrap();
        let verts: Vec<Vec<u32>> = cells.iter().map(|&c| x.data(c).vertices.clone().unwrap()).collect();
        assert_eq!((s, verts), (-1, vec![vec![0, 2, 3, 4, 5, 6, 9], vec![2, 3, 4, 5, 6], vec![3, 6, 9]]));
        let v = vec![vec![1], vec![1, 2], vec![], vec![0, 1, 2], vec![2]];
        assert_eq!(
            alpha_universal(&v, 2),
            (-1, vec![vec![0, 2], vec![0], vec![0, 1, 2], vec![], vec![0, 1]])
        );
    }

    #[test]
    fn pair_count_matches_enumeration() {
        for (r, n, q) in [(3, 4, 6), (5, 2, 7), (3, -1, 0), (2, 3, 2)] {
            assert_eq!(enumerate_pairs(r, n, q).len() as u128, count_pairs(r, n, q));
        }
        assert!(enumerate_pairs(3, 2, 7).is_empty());
    }

    #[test]
    fn terms_determine_pairs() {
        for p in enumerate_pairs(5, 2, 6) {
            let (_, t) = pair_term(&p, 5).unwrap();
            assert_eq!(pair_of_term(&t, 2, 5), Some(p));
        }
    }

    #[test]
    fn ledger_r3() {
        let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
        let p = pair(&[0, 0, 1, 3, 4, 6], &[0, 1, 2, 0, 2, 1], 7);
        let (nu, l) = e.nu_traced(&p).unwrap();
        assert_eq!(l.s, [0, 1, 0, 0, 1]);
        assert_eq!(l.steps[0].t, [1, 0, 0, 0, 0]);
        assert_eq!(l.steps[0].next, Some((vec![0, 0, 1, 2], vec![0, 1, 2, 0])));
        // the reordering of ω is odd here; the printed ledger puts that parity under 𝔱₃
        assert_eq!(l.steps[1].t, [0, 1, 0, 0, 1]);
        assert_eq!(l.steps[1].t_total(), 0);
        assert_eq!(nu, coeff(-1));
        assert_eq!(e.coefficient_direct(&p).unwrap(), coeff(-1));
    }

    #[test]
    fn ledger_r5() {
        let e = DiagonalEngine::new(Straightening::preset("5a").unwrap());
        let p = pair(&[0, 1, 1, 1, 2, 2, 2], &[1, 2, 3, 0, 1, 3, 4], 2);
        let (nu, l) = e.nu_traced(&p).unwrap();
        assert_eq!(l.s, [0, 0, 1, 1, 1]);
        let step = &l.steps[0];
        assert_eq!((step.x.clone(), step.y.clone()), (vec![0, 2], vec![3]));
        assert_eq!(step.t, [1, 0, 1, 0, 0]);
        assert_eq!(step.next, Some((vec![0, 1, 1], vec![1, 0, 2])));
        assert_eq!(nu, coeff(-2));
        assert_eq!(e.coefficient_direct(&p).unwrap(), coeff(2));
    }

    #[test]
    fn composed_and_direct_agree_pointwise() {
        for (name, n, qmax) in [("3", 3, 8), ("5a", 1, 8)] {
            let e = DiagonalEngine::new(Straightening::preset(name).unwrap());
            let r = e.r();
            for q in 0..=qmax {
                for p in enumerate_pairs(r, n, q) {
                    assert_eq!(e.coefficient_composed(&p, 0).unwrap(), e.coefficient_direct(&p).unwrap(), "{name} {p:?}");
                }
            }
        }
    }

    #[test]
    fn r3_blocks_agree() {
        let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
        for n in 0..=3 {
            for q in 0..=8 {
                assert_eq!(e.mu_r3_blocks_universal(n, q).unwrap(), *e.mu_direct_universal(n, q).unwrap(), "n={n} q={q}");
            }
        }
        let p = pair(&[0, 0, 1, 3, 4, 6], &[0, 1, 2, 0, 2, 1], 7);
        assert_eq!(r3_block_coefficient(&p), Some(-1));
        assert_eq!(r3_block_coefficient(&pair(&[0, 1], &[1, 2], 1)), None);
    }

    #[test]
    fn chain_map_equivariance_naturality() {
        let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
        let x = AugSimplicialSet::simplex(3);
        for cell in x.all_cells() {
            for q in 0..=7 {
                for sign in [MuSign::Formula, MuSign::Differential] {
                    assert!(e.chain_map_defect(&x, cell, q, sign).unwrap().is_zero(), "{cell:?} {q} {sign:?}");
                }
                assert!(e.equivariance_defect(&x, cell, q).unwrap().is_zero());
                assert!(e.naturality_defect(&x, cell, q).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn r2_chain_map_mod_2() {
        let e = DiagonalEngine::for_r(2).unwrap();
        let x = AugSimplicialSet::simplex(3);
        for cell in x.all_cells() {
            for q in 0..=5 {
                let d = e.chain_map_defect(&x, cell, q, MuSign::Formula).unwrap();
                assert!(d.iter().all(|(_, c)| c.is_integer() && c.to_integer() % 2 == 0), "{cell:?} {q}");
            }
        }
    }

    #[test]
    fn connectedness() {
        let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
        assert!(e.mu_universal(3, 9, 0).unwrap().is_zero());
        assert!(!e.mu_universal(3, 8, 0).unwrap().is_zero());
    }

    #[test]
    fn suspension_r3() {
        let e = DiagonalEngine::new(Straightening::preset("3").unwrap());
        let x = AugSimplicialSet::simplex(1);
        for cell in x.all_cells() {
            for q in 0..=6 {
                let right = e.suspend_check(&x, cell, q, Direction::Right).unwrap();
                assert!(right.literal_holds, "{right:?}");
                let left = e.suspend_check(&x, cell, q, Direction::Left).unwrap();
                assert!(left.measured_holds, "{left:?}");
            }
        }
    }
}
