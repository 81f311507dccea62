//! Resolutions of the cyclic group C_r and the maps from pieced words into them.
//!
//! Group-ring elements are stored densely as `r` coefficients, index `t` holding the
//! coefficient of `ρ^t`.

use crate::algebra::{coeff, factorial, frac, sign_of, sort_sign, Chain, Coefficient, Graded};
use crate::simplicial::Simplex;
use crate::straightening::{f_unsorted, Straightening};
use dashmap::DashMap;
use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolutionError {
    #[error("pieced word {0} has a full piece")]
    FullPiece(String),
    #[error("pieced word {0} has more than one full piece")]
    TooManyFullPieces(String),
    #[error("letter {letter} is out of range for r = {r}")]
    Letter { letter: u32, r: u32 },
    #[error("S needs degree at least r = {r}, got {q}")]
    DegreeTooLow { q: usize, r: u32 },
    #[error("malformed pieced word {0:?}")]
    Parse(String),
    #[error("invalid pair (U, A): {0}")]
    Pair(String),
    #[error("r = {0} needs a straightening")]
    NoStraightening(u32),
    #[error("degree {q} is outside the range of this operation for r = {r}")]
    Degree { q: i64, r: u32 },
}

/// `r̃! = ((r-1)/2)!`.
pub fn rt_factorial(r: u32) -> i64 {
    factorial(((r.max(1) - 1) / 2) as u64)
}

/// `φ(q) = ⌊(r-q-1)/2⌋`.
pub fn phi_index(r: u32, q: usize) -> i64 {
    (r as i64 - q as i64 - 1).div_euclid(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// The minimal resolution `W`.
    Minimal,
    /// Its augmented right suspension `r̆W`, with `e_0` spanning the trivial module.
    Augmented,
    /// The dual `r̆W^∨`, concentrated in degrees `≤ 0`.
    Dual,
}

/// `ρ^power e_q` (or `ρ^power e^∨_q` with `q ≤ 0` on the dual side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WGen {
    pub side: Side,
    pub q: i64,
    pub power: u32,
}

impl WGen {
    pub fn new(side: Side, q: i64, power: u32, r: u32) -> Self {
        let trivial = q == 0 && side != Side::Minimal;
        WGen { side, q, power: if trivial { 0 } else { power % r } }
    }
}

impl Graded for WGen {
    fn degree(&self) -> i64 {
        self.q
    }
}

fn norm_chain(side: Side, q: i64, power: u32, r: u32, c: Coefficient) -> Chain<WGen> {
    (0..r).map(|j| (WGen::new(side, q, power + j, r), c)).collect()
}

fn t_chain(side: Side, q: i64, power: u32, r: u32, c: Coefficient) -> Chain<WGen> {
    let mut out = Chain::term(WGen::new(side, q, power + 1, r), c);
    out.add_term(WGen::new(side, q, power, r), -c);
    out
}

pub fn w_boundary(g: &WGen, r: u32) -> Chain<WGen> {
    let (s, q, p) = (g.side, g.q, g.power);
    let one = coeff(1);
    match s {
        Side::Minimal if q <= 0 => Chain::zero(),
        Side::Minimal if q % 2 == 0 => norm_chain(s, q - 1, p, r, one),
        Side::Minimal => t_chain(s, q - 1, p, r, one),
        Side::Augmented if q <= 0 => Chain::zero(),
        Side::Augmented if q == 1 => Chain::unit(WGen::new(s, 0, 0, r)),
        Side::Augmented if q % 2 == 0 => t_chain(s, q - 1, p, r, one),
        Side::Augmented => norm_chain(s, q - 1, p, r, one),
        Side::Dual if q > 0 => Chain::zero(),
        Side::Dual if (-q) % 2 == 1 => t_chain(s, q - 1, p, r, one),
        Side::Dual => norm_chain(s, q - 1, p, r, -one),
    }
}

/// The suspension `θ_k`, defined for even `k` (every `k` when r = 2).
pub fn theta(g: &WGen, k: i64, r: u32) -> Chain<WGen> {
    match g.side {
        Side::Minimal => Chain::unit(WGen::new(g.side, g.q + k, g.power, r)),
        Side::Augmented => {
            if g.q == 0 {
                if k > 0 {
                    norm_chain(g.side, k, 0, r, coeff(1))
                } else if k == 0 {
                    Chain::unit(*g)
                } else {
                    Chain::zero()
                }
            } else if g.q + k <= 0 {
                Chain::zero()
            } else {
                Chain::unit(WGen::new(g.side, g.q + k, g.power, r))
            }
        }
        Side::Dual => {
            if g.q == 0 {
                match k.cmp(&0) {
                    std::cmp::Ordering::Less => norm_chain(g.side, k, 0, r, coeff(1)),
                    std::cmp::Ordering::Equal => Chain::unit(*g),
                    std::cmp::Ordering::Greater => Chain::zero(),
                }
            } else if g.q + k > 0 {
                Chain::zero()
            } else {
                Chain::unit(WGen::new(g.side, g.q + k, g.power, r))
            }
        }
    }
}

/// A homogeneous element `Σ_t c_t ρ^t e_q` of `r̆W`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WElem {
    pub q: i64,
    pub coeffs: Vec<Coefficient>,
}

impl fmt::Debug for WElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_chain())
    }
}

impl WElem {
    pub fn zero(q: i64, r: u32) -> Self {
        WElem { q, coeffs: vec![Coefficient::zero(); r as usize] }
    }

    pub fn basis(q: i64, power: u32, r: u32) -> Self {
        let mut e = Self::zero(q, r);
        e.coeffs[if q == 0 { 0 } else { (power % r) as usize }] = Coefficient::one();
        e
    }

    pub fn r(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The coefficient of `ρ^j e_q`; this is the pairing with `ρ^{-j} e^∨_{-q}`.
    pub fn rho_coefficient(&self, j: u32) -> Coefficient {
        self.coeffs[(j % self.r()) as usize]
    }

    pub fn scaled(&self, c: Coefficient) -> Self {
        WElem { q: self.q, coeffs: self.coeffs.iter().map(|x| *x * c).collect() }
    }

    pub fn add_scaled(&mut self, other: &WElem, c: Coefficient) {
        debug_assert_eq!(self.q, other.q);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += *y * c;
        }
    }

    /// Multiplication by `ρ^j`.
    pub fn rho(&self, j: u32) -> Self {
        if self.q == 0 {
            return self.clone();
        }
        let r = self.r() as usize;
        let mut out = Self::zero(self.q, self.r());
        for t in 0..r {
            out.coeffs[(t + j as usize) % r] = self.coeffs[t];
        }
        out
    }

    pub fn to_chain(&self) -> Chain<WGen> {
        let r = self.r();
        (0..r).map(|t| (WGen::new(Side::Augmented, self.q, t, r), self.coeffs[t as usize])).collect()
    }

    pub fn boundary(&self) -> WElem {
        let r = self.r() as usize;
        let q = self.q;
        let v = &self.coeffs;
        let total: Coefficient = v.iter().copied().sum();
        let mut out = Self::zero(q - 1, self.r());
        if q <= 0 {
            return Self::zero(q - 1, self.r());
        }
        if q == 1 {
            out.coeffs[0] = total;
        } else if q % 2 == 0 {
            for t in 0..r {
                out.coeffs[t] = v[(t + r - 1) % r] - v[t];
            }
        } else {
            out.coeffs = vec![total; r];
        }
        out
    }

    /// `θ_{r-1}` on `r̆W`.
    pub fn theta(&self) -> WElem {
        let r = self.r();
        if self.q == 0 {
            return WElem { q: r as i64 - 1, coeffs: vec![self.coeffs[0]; r as usize] };
        }
        WElem { q: self.q + r as i64 - 1, coeffs: self.coeffs.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Cyclic difference `b - a` taken in `{1, …, r}`.
pub fn cyclic_difference(a: u32, b: u32, r: u32) -> u32 {
    let d = (b + r - a % r) % r;
    if d == 0 {
        r
    } else {
        d
    }
}

/// `φ_e(a,b) = Σ_{i=1}^{d/2} ρ^{a+2i}` for even `d`, `φ_o(a,b) = Σ_{i=1}^{(d-1)/2} ρ^{a+2i+1}` for odd `d`.
pub fn phi_pair(a: u32, b: u32, flavor: Parity, r: u32) -> Vec<Coefficient> {
    let d = cyclic_difference(a, b, r);
    let mut v = vec![Coefficient::zero(); r as usize];
    match flavor {
        Parity::Even if d.is_multiple_of(2) => {
            for i in 1..=d / 2 {
                v[((a + 2 * i) % r) as usize] += Coefficient::one();
            }
        }
        Parity::Odd if d % 2 == 1 => {
            for i in 1..=(d - 1) / 2 {
                v[((a + 2 * i + 1) % r) as usize] += Coefficient::one();
            }
        }
        _ => {}
    }
    v
}

/// `Φ` on a sorted face of `∂Δ^{r-1}` (possibly empty).
pub fn phi(face: &[u32], r: u32) -> WElem {
    let q = face.len();
    if q == 0 {
        return WElem::basis(0, 0, r);
    }
    let mut out = WElem::zero(q as i64, r);
    if q >= r as usize {
        return out;
    }
    let c = frac(factorial(phi_index(r, q) as u64), rt_factorial(r));
    let next = |j: usize| face[(j + 1) % q];
    let even: Vec<usize> =
        (0..q).filter(|&j| cyclic_difference(face[j], next(j), r).is_multiple_of(2)).collect();
    if q.is_multiple_of(2) {
        if let [j] = even[..] {
            let s = coeff(sign_of(j as i64 + 1));
            for (t, x) in phi_pair(face[j], next(j), Parity::Even, r).into_iter().enumerate() {
                out.coeffs[t] += c * s * x;
            }
        }
    } else if even.is_empty() {
        for j in 0..q {
            for (t, x) in phi_pair(face[j], next(j), Parity::Odd, r).into_iter().enumerate() {
                out.coeffs[t] += c * x;
            }
        }
    }
    out
}

/// `Φ` on an arbitrary vertex sequence, through its sorting sign.
pub fn phi_unsorted(seq: &[u32], r: u32) -> WElem {
    match sort_sign(seq) {
        Some((s, v)) => phi(&v, r).scaled(coeff(s)),
        None => WElem::zero(seq.len() as i64, r),
    }
}

/// Sorted sequences with `a_{2i}` even and different from `r-1`, and `a_{2i+1}` odd.
pub fn alternating_faces(q: usize, r: u32) -> Vec<Vec<u32>> {
    fn rec(pos: usize, lo: u32, q: usize, r: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == q {
            out.push(cur.clone());
            return;
        }
        for a in lo..r {
            let ok = if pos.is_multiple_of(2) { a % 2 == 0 && a != r - 1 } else { a % 2 == 1 };
            if ok {
                cur.push(a);
                rec(pos + 1, a + 1, q, r, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = vec![];
    rec(0, 0, q, r, &mut vec![], &mut out);
    out
}

pub fn is_alternating(sorted: &[u32], r: u32) -> bool {
    sorted.iter().enumerate().all(|(i, &a)| if i % 2 == 0 { a % 2 == 0 && a != r - 1 } else { a % 2 == 1 })
}

/// The linear dual of `Φ` on `e^∨_{-q}`: `(φ(q)!/r̃!) Σ_{A ∈ L_q} A^∨`, for `0 ≤ q ≤ r-1`.
pub fn phi_dual(q: usize, r: u32) -> Result<Chain<Simplex>, ResolutionError> {
    if q >= r as usize {
        return Err(ResolutionError::Degree { q: q as i64, r });
    }
    let c = frac(factorial(phi_index(r, q).max(0) as u64), rt_factorial(r));
    Ok(alternating_faces(q, r).into_iter().map(|a| (Simplex::new(a, r as i32 - 1), c)).collect())
}

/// A generator `A_0|A_1|…|A_k` of the pieced-word complex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PiecedWord(pub Vec<Vec<u32>>);

impl PiecedWord {
    pub fn new(pieces: Vec<Vec<u32>>) -> Self {
        PiecedWord(pieces.into_iter().filter(|p| !p.is_empty()).collect())
    }

    pub fn empty() -> Self {
        PiecedWord(vec![])
    }

    /// Single-letter pieces.
    pub fn letters(a: &[u32]) -> Self {
        PiecedWord(a.iter().map(|&x| vec![x]).collect())
    }

    pub fn pieces(&self) -> &[Vec<u32>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flatten(&self) -> Vec<u32> {
        self.0.concat()
    }

    pub fn full_pieces(&self, r: u32) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].len() >= r as usize).collect()
    }

    pub fn validate(&self, r: u32) -> Result<(), ResolutionError> {
        match self.0.iter().flatten().find(|&&x| x >= r) {
            Some(&letter) => Err(ResolutionError::Letter { letter, r }),
            None => Ok(()),
        }
    }

    /// Each piece sorted, with the product of the sorting signs; `None` on a repeated letter.
    pub fn normalize(&self) -> Option<(i64, PiecedWord)> {
        let mut s = 1;
        let mut out = Vec::with_capacity(self.0.len());
        for p in &self.0 {
            let (ps, sorted) = sort_sign(p)?;
            s *= ps;
            out.push(sorted);
        }
        Some((s, PiecedWord(out)))
    }

    /// The action of `ρ^j` on every letter.
    pub fn rho(&self, j: u32, r: u32) -> Self {
        PiecedWord(self.0.iter().map(|p| p.iter().map(|x| (x + j) % r).collect()).collect())
    }

    /// Index of the pivotal piece: the leftmost one whose right tail has fewer than `r` letters.
    pub fn pivotal(&self, r: u32) -> Option<usize> {
        let mut tail = 0;
        for j in (0..self.0.len()).rev() {
            if tail + self.0[j].len() >= r as usize {
                return Some(j);
            }
            tail += self.0[j].len();
        }
        None
    }
}

impl Graded for PiecedWord {
    fn degree(&self) -> i64 {
        self.len() as i64
    }
}

impl fmt::Display for PiecedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().flatten().any(|&x| x >= 10);
        let sep = if wide { "," } else { "" };
        let parts: Vec<String> =
            self.0.iter().map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)).collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl fmt::Debug for PiecedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for PiecedWord {
    type Err = ResolutionError;

    /// `"01|230|413"`, or `"0,1|10,2"` when letters have several digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "()" {
            return Ok(PiecedWord::empty());
        }
        let bad = || ResolutionError::Parse(s.to_string());
        let pieces = s
            .split('|')
            .map(|p| {
                let p = p.trim();
                if p.is_empty() {
                    return Err(bad());
                }
                if p.contains(',') {
                    p.split(',').map(|x| x.trim().parse::<u32>().map_err(|_| bad())).collect()
                } else {
                    p.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect()
                }
            })
            .collect::<Result<Vec<Vec<u32>>, _>>()?;
        Ok(PiecedWord(pieces))
    }
}

/// `Σ_j (-1)^j d_j A`, split into the summands without a full piece and those with one.
pub fn omega_boundary(
    w: &PiecedWord,
    r: u32,
) -> Result<(Chain<PiecedWord>, Chain<PiecedWord>), ResolutionError> {
    if w.full_pieces(r).len() > 1 {
        return Err(ResolutionError::TooManyFullPieces(w.to_string()));
    }
    let mut nf = Chain::zero();
    let mut full = Chain::zero();
    let mut idx = 0i64;
    for (k, p) in w.0.iter().enumerate() {
        for i in 0..p.len() {
            let mut pieces = w.0.clone();
            pieces[k].remove(i);
            let v = PiecedWord::new(pieces);
            if v.full_pieces(r).is_empty() {
                nf.add_term(v, coeff(sign_of(idx)));
            } else {
                full.add_term(v, coeff(sign_of(idx)));
            }
            idx += 1;
        }
    }
    Ok((nf, full))
}

/// Deletes the full piece and rotates every later piece by `ρ`; zero without a full piece.
pub fn d_map(w: &PiecedWord, r: u32) -> Result<Chain<PiecedWord>, ResolutionError> {
    let full = w.full_pieces(r);
    let j = match full[..] {
        [] => return Ok(Chain::zero()),
        [j] => j,
        _ => return Err(ResolutionError::TooManyFullPieces(w.to_string())),
    };
    let m = w.len() as i64;
    let pre: usize = w.0[..j].iter().map(|p| p.len()).sum();
    let Some((s, _)) = sort_sign(&w.0[j]) else { return Ok(Chain::zero()) };
    let mut pieces = w.0[..j].to_vec();
    pieces.extend(w.0[j + 1..].iter().map(|p| p.iter().map(|x| (x + 1) % r).collect()));
    Ok(Chain::term(PiecedWord(pieces), coeff(sign_of(r as i64 * (m + pre as i64)) * s)))
}

/// Joins all pieces right of the pivotal one (all pieces when the degree is below `r`)
/// into one sorted piece, with the sign of the sorting permutation.
pub fn kappa(w: &PiecedWord, r: u32) -> Option<(i64, PiecedWord)> {
    let start = w.pivotal(r).map_or(0, |j| j + 1);
    if start >= w.0.len() {
        return Some((1, w.clone()));
    }
    let (s, tail) = sort_sign(&w.0[start..].concat())?;
    let mut pieces = w.0[..start].to_vec();
    pieces.push(tail);
    Some((s, PiecedWord(pieces)))
}

/// `S(A_0|…|A_k) = A_0|…|A_{j-1}|f(A_j ⊗ κ(A_{j+1}|…|A_k))` with `A_j` pivotal.
pub fn s_susp(w: &PiecedWord, st: &Straightening) -> Result<Chain<PiecedWord>, ResolutionError> {
    let r = st.r();
    if w.len() < r as usize {
        return Err(ResolutionError::DegreeTooLow { q: w.len(), r });
    }
    if !w.full_pieces(r).is_empty() {
        return Err(ResolutionError::FullPiece(w.to_string()));
    }
    let j = w.pivotal(r).expect("degree at least r has a pivotal piece");
    let Some((s, tail)) = sort_sign(&w.0[j + 1..].concat()) else { return Ok(Chain::zero()) };
    let prefix = &w.0[..j];
    Ok(f_unsorted(st, &w.0[j], &tail)
        .scaled(coeff(s))
        .map_signed(|simplex| {
            let mut p = prefix.to_vec();
            p.push(simplex.vertices.clone());
            Some((PiecedWord(p), 1))
        }))
}

/// For r = 2 over 𝔽_2: the normalized word, or `None` when two adjacent letters agree.
pub fn r2_quotient(word: &[u32]) -> Option<Vec<u32>> {
    if word.windows(2).any(|p| p[0] == p[1]) {
        None
    } else {
        Some(word.to_vec())
    }
}

/// `Ψ` from the non-full pieced words to `r̆W`, memoised on normalized words.
pub struct PsiEngine {
    r: u32,
    st: Option<Straightening>,
    memo: DashMap<PiecedWord, WElem>,
}

impl fmt::Debug for PsiEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsiEngine(r={}, {:?}, memo={})", self.r, self.st, self.memo.len())
    }
}

impl PsiEngine {
    pub fn new(st: Straightening) -> Self {
        PsiEngine { r: st.r(), st: Some(st), memo: DashMap::new() }
    }

    /// The engine for r = 2, whose values are meant to be read mod 2.
    pub fn even() -> Self {
        PsiEngine { r: 2, st: None, memo: DashMap::new() }
    }

    pub fn for_r(r: u32) -> Result<Self, crate::straightening::StraighteningError> {
        if r == 2 {
            Ok(Self::even())
        } else {
            Ok(Self::new(Straightening::default_for(r)?))
        }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn straightening(&self) -> Option<&Straightening> {
        self.st.as_ref()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn psi(&self, w: &PiecedWord) -> Result<WElem, ResolutionError> {
        let r = self.r;
        w.validate(r)?;
        if !w.full_pieces(r).is_empty() {
            return Err(ResolutionError::FullPiece(w.to_string()));
        }
        let q = w.len() as i64;
        if r == 2 {
            return Ok(match r2_quotient(&w.flatten()) {
                Some(v) if !v.is_empty() => WElem::basis(q, v[0], 2),
                Some(_) => WElem::basis(0, 0, 2),
                None => WElem::zero(q, 2),
            });
        }
        let Some((s, norm)) = w.normalize() else { return Ok(WElem::zero(q, r)) };
        Ok(self.psi_normalized(&norm).scaled(coeff(s)))
    }

    fn psi_normalized(&self, w: &PiecedWord) -> WElem {
        if let Some(v) = self.memo.get(w) {
            return v.clone();
        }
        let v = self.compute(w);
        self.memo.insert(w.clone(), v.clone());
        v
    }

    fn compute(&self, w: &PiecedWord) -> WElem {
        let r = self.r;
        let q = w.len();
        if q < r as usize {
            return phi_unsorted(&w.flatten(), r);
        }
        let st = self.st.as_ref().expect("odd r carries a straightening");
        let j = w.pivotal(r).expect("degree at least r has a pivotal piece");
        let mut out = WElem::zero(q as i64, r);
        let Some((ts, tail)) = sort_sign(&w.0[j + 1..].concat()) else { return out };
        let scale = frac(ts, rt_factorial(r));
        for (piece, c) in crate::straightening::f_map(st, &w.0[j], &tail).iter() {
            let mut next = w.0[..j].to_vec();
            next.push(piece.vertices.clone());
            let v = self.psi_normalized(&PiecedWord(next)).theta();
            out.add_scaled(&v, *c * scale);
        }
        out
    }

    /// `ηⁿ(U, A)`: `A` pieced along the runs of `U`, with sign `(-1)^{q(n+1)}`.
    pub fn eta_n(u: &[u32], a: &[u32], n: u32) -> Result<(i64, PiecedWord), ResolutionError> {
        if u.len() != a.len() {
            return Err(ResolutionError::Pair("U and A differ in length".into()));
        }
        if u.windows(2).any(|p| p[0] > p[1]) || u.iter().any(|&x| x > n) {
            return Err(ResolutionError::Pair(format!("U = {u:?} is not a nondecreasing sequence in 0..={n}")));
        }
        let mut pieces: Vec<Vec<u32>> = vec![];
        for (i, (&ui, &ai)) in u.iter().zip(a).enumerate() {
            if i > 0 && u[i - 1] == ui {
                pieces.last_mut().unwrap().push(ai);
            } else {
                pieces.push(vec![ai]);
            }
        }
        Ok((sign_of(u.len() as i64 * (n as i64 + 1)), PiecedWord(pieces)))
    }

    /// `Ψⁿ(U, A) = (r̃!)^{n+1} Ψ(ηⁿ(U, A))`.
    pub fn psi_n(&self, u: &[u32], a: &[u32], n: u32) -> Result<WElem, ResolutionError> {
        let (s, w) = Self::eta_n(u, a, n)?;
        if !w.full_pieces(self.r).is_empty() {
            return Ok(WElem::zero(w.len() as i64, self.r));
        }
        let scale = coeff(s * rt_factorial(self.r).pow(n + 1));
        Ok(self.psi(&w)?.scaled(scale))
    }

    /// `∂Ψ(A) - Ψ(∂^{nf} A)`; zero exactly when the chain-map identity holds at `A`.
    pub fn chain_map_defect(&self, w: &PiecedWord) -> Result<WElem, ResolutionError> {
        let mut d = self.psi(w)?.boundary();
        if w.is_empty() {
            return Ok(d);
        }
        let (nf, _) = omega_boundary(w, self.r)?;
        for (v, c) in nf.iter() {
            d.add_scaled(&self.psi(v)?, -*c);
        }
        Ok(d)
    }

    /// `r̃! Ψ(∂^{nf} A) - (-1)^q θ_{r-1} Ψ(D A)` for a word with one full piece.
    pub fn full_piece_defect(&self, w: &PiecedWord) -> Result<WElem, ResolutionError> {
        let r = self.r;
        let q = w.len() as i64;
        let (nf, _) = omega_boundary(w, r)?;
        let mut out = WElem::zero(q - 1, r);
        let rt = coeff(rt_factorial(r));
        for (v, c) in nf.iter() {
            out.add_scaled(&self.psi(v)?, *c * rt);
        }
        for (v, c) in d_map(w, r)?.iter() {
            out.add_scaled(&self.psi(v)?.theta(), -*c * coeff(sign_of(q)));
        }
        Ok(out)
    }
}

/// All words of degree `q` with sorted, non-full pieces.
pub fn nf_words(r: u32, q: usize) -> Vec<PiecedWord> {
    let subsets: Vec<Vec<u32>> = (1..(1u32 << r) - 1)
        .map(|m| (0..r).filter(|v| m >> v & 1 == 1).collect::<Vec<u32>>())
        .collect();
    fn rec(rem: usize, subsets: &[Vec<u32>], cur: &mut Vec<Vec<u32>>, out: &mut Vec<PiecedWord>) {
        if rem == 0 {
            out.push(PiecedWord(cur.clone()));
            return;
        }
        for s in subsets.iter().filter(|s| s.len() <= rem) {
            cur.push(s.clone());
            rec(rem - s.len(), subsets, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(q, &subsets, &mut vec![], &mut out);
    out.sort();
    out
}

/// All words of degree `q` with exactly one full piece, every piece an ordered tuple of distinct letters.
pub fn one_full_piece_words(r: u32, q: usize) -> Vec<PiecedWord> {
    let mut tuples: Vec<Vec<u32>> = vec![];
    fn perms(r: u32, len: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for a in 0..r {
            if !cur.contains(&a) {
                cur.push(a);
                perms(r, len, cur, out);
                cur.pop();
            }
        }
    }
    for len in 1..=r as usize {
        perms(r, len, &mut vec![], &mut tuples);
    }
    fn rec(rem: usize, full: bool, r: u32, tuples: &[Vec<u32>], cur: &mut Vec<Vec<u32>>, out: &mut Vec<PiecedWord>) {
        if rem == 0 {
            if full {
                out.push(PiecedWord(cur.clone()));
            }
            return;
        }
        for t in tuples.iter().filter(|t| t.len() <= rem) {
            let is_full = t.len() == r as usize;
            if is_full && full {
                continue;
            }
            cur.push(t.clone());
            rec(rem - t.len(), full || is_full, r, tuples, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(q, false, r, &tuples, &mut vec![], &mut out);
    out
}

/// The dual of `Ψ` on `e^∨_{-q}` read on words of the bar resolution of C_r, in closed form.
///
/// A word `a_0…a_{q-1}` is cut from the right into windows of length `r` overlapping in one
/// letter, leaving a prefix of length `p < r` that shares its last letter with the leftmost
/// window. The word contributes when no window repeats a letter and the sorted prefix
/// alternates even/odd as in `phi_dual`; its coefficient is the product of the sorting signs
/// of the prefix and the windows times `φ(p)!/(r̃!)^{windows+1}`.
pub fn psi_dual_bar(q: usize, r: u32) -> Result<Chain<Vec<u32>>, ResolutionError> {
    if q == 0 || r < 3 {
        return Err(ResolutionError::Degree { q: q as i64, r });
    }
    let step = r as usize - 1;
    let windows = if q < r as usize { 0 } else { (q - r as usize) / step + 1 };
    let p = q - windows * step;
    let c = frac(factorial(phi_index(r, p) as u64), rt_factorial(r).pow(windows as u32 + 1));
    let mut out = Chain::zero();
    let total = (r as u64).pow(q as u32);
    for code in 0..total {
        let mut word = vec![0u32; q];
        let mut x = code;
        for slot in word.iter_mut().rev() {
            *slot = (x % r as u64) as u32;
            x /= r as u64;
        }
        let Some((mut s, sorted)) = sort_sign(&word[..p]) else { continue };
        if !is_alternating(&sorted, r) {
            continue;
        }
        let mut ok = true;
        for k in 0..windows {
            let start = p - 1 + k * step;
            match sort_sign(&word[start..start + r as usize]) {
                Some((ws, _)) => s *= ws,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.add_term(word, c * coeff(s));
        }
    }
    Ok(out)
}
