//! Cyclic straightenings of ∂Δ^{r-1}, the subdivision chain maps and the map `f`.
//!
//! Faces of ∂Δ^{r-1} are `Simplex` values with ambient `r - 1`. A face of the barycentric
//! subdivision is an ascending chain of faces, stored as the list of its members.

use crate::algebra::{coeff, factorial, is_prime, sign_of, sort_sign, Chain, Graded};
use crate::simplicial::{complement, lambda, Simplex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StraighteningError {
    #[error("r = {0} is not prime; cyclic straightenings need a free action on proper faces")]
    NotPrime(u32),
    #[error("r = {0} is out of the supported range 2..=13")]
    OutOfRange(u32),
    #[error("choice {x} does not lie in the face {face:?}")]
    NotInFace { face: Vec<u32>, x: u32 },
    #[error("no choice given for the orbit of {0:?}")]
    MissingOrbit(Vec<u32>),
    #[error("enumeration would produce {count} straightenings, above the cap {cap}")]
    TooMany { count: u128, cap: usize },
    #[error("unknown straightening preset {0}")]
    UnknownPreset(String),
    #[error("the straightening does not have duality")]
    NoDuality,
}

fn mask_of(vs: &[u32]) -> usize {
    vs.iter().fold(0, |m, v| m | 1 << v)
}

fn rotate(vs: &[u32], t: u32, r: u32) -> Vec<u32> {
    let mut out: Vec<u32> = vs.iter().map(|v| (v + t) % r).collect();
    out.sort();
    out
}

/// One representative per C_r-orbit of proper nonempty subsets: the lexicographically least rotation.
pub fn orbit_representatives(r: u32) -> Vec<Vec<u32>> {
    let mut reps = vec![];
    for k in 1..r {
        for mask in 0usize..(1 << r) {
            if mask.count_ones() != k {
                continue;
            }
            let c: Vec<u32> = (0..r).filter(|v| mask >> v & 1 == 1).collect();
            if (0..r).all(|t| rotate(&c, t, r) >= c) {
                reps.push(c);
            }
        }
    }
    reps.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    reps
}

/// Admissible choices on a representative, optionally restricted by duality.
pub fn orbit_options(rep: &[u32], r: u32, duality: bool) -> Vec<u32> {
    rep.iter().copied().filter(|&x| !duality || !rep.contains(&((x + r - 1) % r))).collect()
}

/// An equivariant choice `τ ↦ x_τ ∈ τ` on the proper nonempty faces of Δ^{r-1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Straightening {
    r: u32,
    table: Vec<u8>,
    name: Option<String>,
}

impl fmt::Debug for Straightening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Straightening(r={}, {:?})", self.r, self.choices())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitChoice {
    pub face: Vec<u32>,
    pub x: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StraighteningTable {
    pub r: u32,
    pub name: Option<String>,
    pub duality: bool,
    pub choices: Vec<OrbitChoice>,
}

fn check_r(r: u32) -> Result<(), StraighteningError> {
    if !(2..=13).contains(&r) {
        return Err(StraighteningError::OutOfRange(r));
    }
    if !is_prime(r as u64) {
        return Err(StraighteningError::NotPrime(r));
    }
    Ok(())
}

impl Straightening {
    /// Extends choices on orbit representatives equivariantly.
    pub fn from_orbit_choices(r: u32, choices: &[(Vec<u32>, u32)]) -> Result<Self, StraighteningError> {
        check_r(r)?;
        let mut table = vec![u8::MAX; 1 << r];
        for rep in orbit_representatives(r) {
            let (given, gx) = choices
                .iter()
                .find(|(f, _)| {
                    let mut f = f.clone();
                    f.sort();
                    (0..r).any(|t| rotate(&f, t, r) == rep)
                })
                .ok_or_else(|| StraighteningError::MissingOrbit(rep.clone()))?;
            let mut given = given.clone();
            given.sort();
            if !given.contains(gx) {
                return Err(StraighteningError::NotInFace { face: given, x: *gx });
            }
            for t in 0..r {
                let img = rotate(&given, t, r);
                table[mask_of(&img)] = ((gx + t) % r) as u8;
            }
        }
        Ok(Straightening { r, table, name: None })
    }

    fn from_choice_vector(r: u32, reps: &[Vec<u32>], xs: &[u32]) -> Self {
        let mut table = vec![u8::MAX; 1 << r];
        for (rep, &x) in reps.iter().zip(xs) {
            for t in 0..r {
                table[mask_of(&rotate(rep, t, r))] = ((x + t) % r) as u8;
            }
        }
        Straightening { r, table, name: None }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// `x_τ` for a proper nonempty face given by its vertices.
    pub fn choose(&self, face: &[u32]) -> u32 {
        let x = self.table[mask_of(face)];
        assert!(x != u8::MAX, "no straightening value on {face:?}");
        x as u32
    }

    pub fn choices(&self) -> Vec<OrbitChoice> {
        orbit_representatives(self.r)
            .into_iter()
            .map(|face| {
                let x = self.choose(&face);
                OrbitChoice { face, x }
            })
            .collect()
    }

    pub fn choice_vector(&self) -> Vec<u32> {
        self.choices().into_iter().map(|c| c.x).collect()
    }

    /// The cyclic predecessor of every chosen vertex avoids its face.
    pub fn has_duality(&self) -> bool {
        (1..(1usize << self.r) - 1).all(|m| {
            let x = self.table[m] as u32;
            m >> ((x + self.r - 1) % self.r) & 1 == 0
        })
    }

    pub fn is_equivariant(&self) -> bool {
        let r = self.r;
        (1..(1usize << r) - 1).all(|m| {
            let face: Vec<u32> = (0..r).filter(|v| m >> v & 1 == 1).collect();
            let x = self.table[m] as u32;
            face.contains(&x) && self.table[mask_of(&rotate(&face, 1, r))] as u32 == (x + 1) % r
        })
    }

    pub fn to_table(&self) -> StraighteningTable {
        StraighteningTable {
            r: self.r,
            name: self.name.clone(),
            duality: self.has_duality(),
            choices: self.choices(),
        }
    }

    pub fn from_table(t: &StraighteningTable) -> Result<Self, StraighteningError> {
        let choices: Vec<(Vec<u32>, u32)> = t.choices.iter().map(|c| (c.face.clone(), c.x)).collect();
        let s = Self::from_orbit_choices(t.r, &choices)?;
        Ok(match &t.name {
            Some(n) => s.with_name(n),
            None => s,
        })
    }

    /// Named presets: `3` (the unique one for r = 3) and `5a`..`5d` for r = 5.
    pub fn preset(name: &str) -> Result<Self, StraighteningError> {
        let base5 = |c02: u32, c013: u32| {
            vec![
                (vec![0], 0),
                (vec![0, 1], 0),
                (vec![0, 2], c02),
                (vec![0, 1, 2], 0),
                (vec![0, 1, 3], c013),
                (vec![0, 1, 2, 3], 0),
            ]
        };
        let (r, choices) = match name {
            "3" => (3, vec![(vec![0], 0), (vec![0, 1], 0)]),
            "5a" => (5, base5(0, 0)),
            "5b" => (5, base5(2, 0)),
            "5c" => (5, base5(0, 3)),
            "5d" => (5, base5(2, 3)),
            _ => return Err(StraighteningError::UnknownPreset(name.to_string())),
        };
        Ok(Self::from_orbit_choices(r, &choices)?.with_name(name))
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["3", "5a", "5b", "5c", "5d"]
    }

    /// The default straightening for `r`: the preset when one exists, else the first enumerated one.
    pub fn default_for(r: u32) -> Result<Self, StraighteningError> {
        match r {
            3 => Self::preset("3"),
            5 => Self::preset("5a"),
            _ => {
                check_r(r)?;
                let reps = orbit_representatives(r);
                let xs: Vec<u32> = reps.iter().map(|rep| orbit_options(rep, r, true)[0]).collect();
                Ok(Self::from_choice_vector(r, &reps, &xs))
            }
        }
    }
}

/// Number of cyclic straightenings, with or without duality.
pub fn count_straightenings(r: u32, require_duality: bool) -> Result<u128, StraighteningError> {
    check_r(r)?;
    Ok(orbit_representatives(r)
        .iter()
        .map(|rep| orbit_options(rep, r, require_duality).len() as u128)
        .product())
}

/// All cyclic straightenings, ordered lexicographically by their choice vector on the
/// representatives of `orbit_representatives`.
pub fn enumerate_straightenings(
    r: u32,
    require_duality: bool,
    cap: usize,
) -> Result<Vec<Straightening>, StraighteningError> {
    let count = count_straightenings(r, require_duality)?;
    if count > cap as u128 {
        return Err(StraighteningError::TooMany { count, cap });
    }
    let reps = orbit_representatives(r);
    let opts: Vec<Vec<u32>> = reps.iter().map(|rep| orbit_options(rep, r, require_duality)).collect();
    let radix: Vec<usize> = opts.iter().map(|o| o.len()).collect();
    let out: Vec<Straightening> = (0..count as usize)
        .into_par_iter()
        .map(|mut idx| {
            let mut xs = vec![0; reps.len()];
            for k in (0..reps.len()).rev() {
                xs[k] = opts[k][idx % radix[k]];
                idx /= radix[k];
            }
            Straightening::from_choice_vector(r, &reps, &xs)
        })
        .collect();
    Ok(out)
}

/// An ascending chain `τ_0 ⊂ … ⊂ τ_k` of faces, i.e. a face of the barycentric subdivision.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SdChain(pub Vec<Vec<u32>>);

impl SdChain {
    /// The successive differences `(τ̄_0|τ̄_1|…)`.
    pub fn bars(&self) -> Vec<Vec<u32>> {
        let mut prev: Vec<u32> = vec![];
        self.0
            .iter()
            .map(|t| {
                let b: Vec<u32> = t.iter().copied().filter(|v| !prev.contains(v)).collect();
                prev = t.clone();
                b
            })
            .collect()
    }

    pub fn from_bars(bars: &[Vec<u32>]) -> Self {
        let mut acc: Vec<u32> = vec![];
        SdChain(
            bars.iter()
                .map(|b| {
                    acc.extend(b);
                    let mut s = acc.clone();
                    s.sort();
                    s
                })
                .collect(),
        )
    }
}

impl Graded for SdChain {
    fn degree(&self) -> i64 {
        self.0.len() as i64
    }
}

impl fmt::Debug for SdChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bars: Vec<String> =
            self.bars().iter().map(|b| b.iter().map(|v| v.to_string()).collect::<String>()).collect();
        write!(f, "({})", bars.join("|"))
    }
}

/// Boundary in the (augmented) chains of the barycentric subdivision.
pub fn sd_boundary(c: &SdChain) -> Chain<SdChain> {
    (0..c.0.len())
        .map(|i| {
            let mut v = c.0.clone();
            v.remove(i);
            (SdChain(v), coeff(sign_of(i as i64)))
        })
        .collect()
}

/// A cell `b ⊗ a` of the pair subdivision: `b` a dual face with support inside `a`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairGen {
    pub b: Vec<u32>,
    pub a: Vec<u32>,
}

impl fmt::Debug for PairGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}⊗{:?}", self.b, self.a)
    }
}

impl Graded for PairGen {
    fn degree(&self) -> i64 {
        self.a.len() as i64 - self.b.len() as i64 + 1
    }
}

fn permutations(n: usize) -> Vec<(i64, Vec<usize>)> {
    fn rec(pre: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if pre.len() == used.len() {
            out.push(pre.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                pre.push(i);
                rec(pre, used, out);
                pre.pop();
                used[i] = false;
            }
        }
    }
    let mut out = vec![];
    rec(&mut vec![], &mut vec![false; n], &mut out);
    out.into_iter().map(|p| (sort_sign(&p).unwrap().0, p)).collect()
}

/// Signed permutations of `0..n`, in lexicographic order.
pub fn signed_permutations(n: usize) -> Vec<(i64, Vec<usize>)> {
    permutations(n)
}

/// `s_*[a_0..a_{k-1}] = Σ_π sgn π (a_π(0)|…|a_π(k-1))`.
pub fn subdivide(a: &[u32]) -> Chain<SdChain> {
    signed_permutations(a.len())
        .into_iter()
        .map(|(s, p)| {
            let bars: Vec<Vec<u32>> = p.iter().map(|&i| vec![a[i]]).collect();
            (SdChain::from_bars(&bars), coeff(s))
        })
        .collect()
}

/// `s^Δ_*[a_0..a_{k-1}] = (-1)^k Σ_j (a_j) ⊗ [a]`.
pub fn subdivide_to_pairs(a: &[u32]) -> Chain<PairGen> {
    let s = coeff(sign_of(a.len() as i64));
    a.iter().map(|&v| (PairGen { b: vec![v], a: a.to_vec() }, s)).collect()
}

/// `s^P_*(b ⊗ a) = (-1)^{ℓ+1} Σ_π sgn π (b|c_π(0)|…|c_π(ℓ-1))` with `a = [b, c]` reordered
/// from the sorted representative.
pub fn pairs_to_subdivision(p: &PairGen) -> Chain<SdChain> {
    if p.b.is_empty() || !p.b.iter().all(|v| p.a.contains(v)) {
        return Chain::zero();
    }
    let c: Vec<u32> = p.a.iter().copied().filter(|v| !p.b.contains(v)).collect();
    let cat: Vec<u32> = p.b.iter().chain(&c).copied().collect();
    let s0 = sort_sign(&cat).map(|x| x.0).unwrap_or(0);
    let l = c.len() as i64;
    signed_permutations(c.len())
        .into_iter()
        .map(|(s, pi)| {
            let mut bars = vec![p.b.clone()];
            bars.extend(pi.iter().map(|&i| vec![c[i]]));
            (SdChain::from_bars(&bars), coeff(s0 * s * sign_of(l + 1)))
        })
        .collect()
}

/// `h(b ⊗ a) = (-1)^{λ(b,b^c)} (b^c)^∨ ⊗ a`, zero unless `b^c ⊆ a`.
pub fn h_map(b: &[u32], a: &[u32], r: u32) -> Chain<PairGen> {
    let n = r as i32 - 1;
    let bc = complement(b, n);
    if bc.is_empty() || !bc.iter().all(|v| a.contains(v)) {
        return Chain::zero();
    }
    Chain::term(PairGen { b: bc, a: a.to_vec() }, coeff(sign_of(lambda(b, &complement(b, n)))))
}

/// The involution of the subdivision sending `τ_0 ⊂ … ⊂ τ_{k-1}` to `(-1)^{C(k,2)} τ_{k-1}^c ⊂ … ⊂ τ_0^c`.
pub fn lambda_sd(c: &SdChain, r: u32) -> Chain<SdChain> {
    let n = r as i32 - 1;
    let k = c.0.len() as i64;
    let out: Vec<Vec<u32>> = c.0.iter().rev().map(|t| complement(t, n)).collect();
    if out.iter().any(|t| t.is_empty()) {
        return Chain::zero();
    }
    Chain::term(SdChain(out), coeff(sign_of(k * (k - 1) / 2)))
}

/// `twist ∘ (Λ^{-1} ⊗ Λ)` on the pair subdivision.
pub fn lambda_pairs(p: &PairGen, r: u32) -> Chain<PairGen> {
    let n = r as i32 - 1;
    let y = complement(&p.b, n);
    let x = complement(&p.a, n);
    if x.is_empty() || y.is_empty() {
        return Chain::zero();
    }
    let m = p.b.len() as i64;
    let s = m * (n as i64 + 1) + lambda(&p.a, &x) + lambda(&y, &p.b) + (x.len() * y.len()) as i64;
    Chain::term(PairGen { b: x, a: y }, coeff(sign_of(s)))
}

/// `g(τ_0 ⊂ … ⊂ τ_{k-1}) = (x_τ0, …, x_τk-1)`, sorted with its sign; `None` on repeats.
pub fn g_map(st: &Straightening, c: &SdChain) -> Option<(i64, Vec<u32>)> {
    let xs: Vec<u32> = c.0.iter().map(|t| st.choose(t)).collect();
    sort_sign(&xs)
}

pub fn g_star(st: &Straightening, c: &Chain<SdChain>) -> Chain<Simplex> {
    let n = st.r() as i32 - 1;
    c.map_signed(|x| g_map(st, x).map(|(s, v)| (Simplex::new(v, n), s)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub stage: &'static str,
    pub sign: i64,
    pub value: String,
}

/// `f(t1 ⊗ t2) = (-1)^{r(|t1|+|t2|)} g_* s^P_* h twist (t1 ⊗ t2)` for sorted faces of ∂Δ^{r-1}.
pub fn f_map(st: &Straightening, t1: &[u32], t2: &[u32]) -> Chain<Simplex> {
    f_map_traced(st, t1, t2, None)
}

pub fn f_map_traced(
    st: &Straightening,
    t1: &[u32],
    t2: &[u32],
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Chain<Simplex> {
    let r = st.r();
    let (m, k) = (t1.len() as i64, t2.len() as i64);
    let susp = sign_of(r as i64 * (m + k));
    let twist = sign_of(m * k);
    let h = h_map(t2, t1, r);
    let mut log = |stage: &'static str, sign: i64, value: String| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep { stage, sign, value });
        }
    };
    log("suspension", susp, format!("{t1:?}⊗{t2:?}"));
    log("twist", twist, format!("{t2:?}⊗{t1:?}"));
    log("h", h.iter().next().map_or(0, |(_, c)| *c.numer()), format!("{h:?}"));
    let sd = h.map_linear(pairs_to_subdivision);
    log("sP", 1, format!("{sd:?}"));
    let out = g_star(st, &sd).scaled(coeff(susp * twist));
    log("g", 1, format!("{out:?}"));
    out
}

/// `f` on arbitrary (possibly unsorted) vertex sequences.
pub fn f_unsorted(st: &Straightening, t1: &[u32], t2: &[u32]) -> Chain<Simplex> {
    match (sort_sign(t1), sort_sign(t2)) {
        (Some((s1, a)), Some((s2, b))) => f_map(st, &a, &b).scaled(coeff(s1 * s2)),
        _ => Chain::zero(),
    }
}

/// All faces of ∂Δ^{r-1}_+ (including the empty face), sorted by degree.
pub fn boundary_faces(r: u32) -> Vec<Vec<u32>> {
    Simplex::all(r as i32 - 1)
        .into_iter()
        .filter(|s| s.vertices.len() < r as usize)
        .map(|s| s.vertices)
        .collect()
}

/// `∂σ` for the top simplex σ of Δ^{r-1}, as a list of signed faces.
pub fn boundary_of_top(r: u32) -> Vec<(i64, Vec<u32>)> {
    (0..r).map(|i| (sign_of(i as i64), (0..r).filter(|&v| v != i).collect())).collect()
}

pub fn rho_simplex(s: &Simplex, r: u32) -> (i64, Simplex) {
    let v: Vec<u32> = s.vertices.iter().map(|x| (x + 1) % r).collect();
    let (sg, v) = sort_sign(&v).unwrap();
    (sg, Simplex::new(v, s.ambient))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub checked: usize,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii_prime: bool,
    pub failures: Vec<String>,
}

/// Checks `f ∘ ι_1 = id`, `f ∘ ι_2 = ρ` and the vertex condition on degree-r inputs.
pub fn check_construction_conditions(st: &Straightening) -> ConditionReport {
    let r = st.r();
    let n = r as i32 - 1;
    let faces: Vec<Vec<u32>> = boundary_faces(r).into_iter().filter(|f| !f.is_empty()).collect();
    let bd = boundary_of_top(r);
    let mut failures = vec![];
    let (mut ci, mut cii, mut ciii) = (true, true, true);
    for t in &faces {
        let mut one = Chain::zero();
        let mut two = Chain::zero();
        for (s, face) in &bd {
            one.add_scaled(&f_map(st, t, face), coeff(*s));
            two.add_scaled(&f_map(st, face, t), coeff(*s));
        }
        if one != Chain::unit(Simplex::new(t.clone(), n)) {
            ci = false;
            failures.push(format!("f(τ⊗∂σ) for τ={t:?}: {one:?}"));
        }
        let (sg, rt) = rho_simplex(&Simplex::new(t.clone(), n), r);
        if two != Chain::term(rt, coeff(sg)) {
            cii = false;
            failures.push(format!("f(∂σ⊗τ) for τ={t:?}: {two:?}"));
        }
    }
    let mut checked = faces.len();
    for t1 in &faces {
        for t2 in &faces {
            if t1.len() + t2.len() != r as usize {
                continue;
            }
            checked += 1;
            let v = f_map(st, t1, t2);
            let ok = match crate::simplicial::lambda_sign(t1, t2) {
                Err(_) => v.is_zero(),
                Ok(odd) => {
                    v.len() == 1
                        && v.iter().all(|(g, c)| g.vertices.len() == 1 && *c == coeff(if odd { -1 } else { 1 }))
                }
            };
            if !ok {
                ciii = false;
                failures.push(format!("f({t1:?}⊗{t2:?}) = {v:?}"));
            }
        }
    }
    ConditionReport { checked, condition_i: ci, condition_ii: cii, condition_iii_prime: ciii, failures }
}

/// `r̃ = (r-1)/2` and `r̃!`.
pub fn r_tilde_factorial(r: u32) -> i64 {
    factorial(((r.max(1) - 1) / 2) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx(v: &[u32], r: u32) -> Simplex {
        Simplex::new(v.to_vec(), r as i32 - 1)
    }

    #[test]
    fn counts() {
        assert_eq!(count_straightenings(3, true), Ok(1));
        assert_eq!(count_straightenings(5, true), Ok(4));
        assert_eq!(count_straightenings(4, true), Err(StraighteningError::NotPrime(4)));
        let all5 = enumerate_straightenings(5, true, 100).unwrap();
        let names: Vec<Straightening> =
            ["5a", "5c", "5b", "5d"].iter().map(|n| Straightening::preset(n).unwrap()).collect();
        let plain: Vec<Vec<u32>> = all5.iter().map(|s| s.choice_vector()).collect();
        assert_eq!(plain, names.iter().map(|s| s.choice_vector()).collect::<Vec<_>>());
    }

    #[test]
    fn presets_are_equivariant_with_duality() {
        for n in Straightening::preset_names() {
            let s = Straightening::preset(n).unwrap();
            assert!(s.is_equivariant() && s.has_duality(), "{n}");
        }
    }

    #[test]
    fn table_round_trip() {
        let s = Straightening::preset("5c").unwrap();
        let t = serde_json::to_string(&s.to_table()).unwrap();
        let back: StraighteningTable = serde_json::from_str(&t).unwrap();
        assert_eq!(Straightening::from_table(&back).unwrap(), s);
    }

    #[test]
    fn subdivision_examples() {
        let s = subdivide(&[0, 1]);
        let expect = Chain::unit(SdChain::from_bars(&[vec![0], vec![1]]))
            - Chain::unit(SdChain::from_bars(&[vec![1], vec![0]]));
        assert_eq!(s, expect);
        let p = subdivide_to_pairs(&[0, 1]);
        assert_eq!(p.coefficient(&PairGen { b: vec![1], a: vec![0, 1] }), coeff(1));
    }

    #[test]
    fn pair_factorisation_of_subdivision() {
        for a in boundary_faces(5).into_iter().filter(|a| !a.is_empty()) {
            let lhs = subdivide_to_pairs(&a).map_linear(pairs_to_subdivision);
            assert_eq!(lhs, subdivide(&a), "{a:?}");
        }
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_map(&[1, 2], &[0], 3), Chain::unit(PairGen { b: vec![0], a: vec![0] }));
        assert_eq!(
            h_map(&[0, 1, 2], &[1, 2, 3, 4], 5),
            Chain::unit(PairGen { b: vec![3, 4], a: vec![1, 2, 3, 4] })
        );
    }

    #[test]
    fn g_example_and_assemblage() {
        let st = Straightening::preset("3").unwrap();
        assert_eq!(g_map(&st, &SdChain(vec![vec![1], vec![0, 1]])), Some((-1, vec![0, 1])));
        for name in Straightening::preset_names() {
            let st = Straightening::preset(name).unwrap();
            let r = st.r();
            for a in boundary_faces(r).into_iter().filter(|a| !a.is_empty()) {
                assert_eq!(g_star(&st, &subdivide(&a)), Chain::unit(sx(&a, r)));
                // ρ^{-1} g_* Λ s_* is an assemblage map as well
                let dual = subdivide(&a).map_linear(|c| lambda_sd(c, r));
                let back = g_star(&st, &dual).map_signed(|s| {
                    let v: Vec<u32> = s.vertices.iter().map(|x| (x + r - 1) % r).collect();
                    sort_sign(&v).map(|(sg, v)| (sx(&v, r), sg))
                });
                assert!(back == Chain::unit(sx(&a, r)) || back == -Chain::unit(sx(&a, r)), "{name} {a:?}");
            }
        }
    }

    #[test]
    fn f_examples() {
        let s3 = Straightening::preset("3").unwrap();
        let s5 = Straightening::preset("5a").unwrap();
        assert_eq!(f_unsorted(&s3, &[0], &[2, 1]), -Chain::unit(sx(&[0], 3)));
        assert_eq!(f_unsorted(&s3, &[0, 1], &[2, 0]), Chain::unit(sx(&[0, 1], 3)));
        assert_eq!(f_unsorted(&s5, &[2, 3, 0], &[4, 1, 3]), Chain::unit(sx(&[0, 2], 5)));
        assert_eq!(f_unsorted(&s5, &[1, 2, 3, 4], &[0, 1, 2]), Chain::unit(sx(&[1, 2, 3], 5)));
        // the four cases that govern r = 3
        assert_eq!(f_unsorted(&s3, &[0], &[1, 2]), Chain::unit(sx(&[0], 3)));
        assert_eq!(f_unsorted(&s3, &[0, 1], &[2]), Chain::unit(sx(&[0], 3)));
        assert!(f_unsorted(&s3, &[0, 1], &[2, 1]).is_zero());
    }

    #[test]
    fn trace_records_each_stage() {
        let s5 = Straightening::preset("5a").unwrap();
        let mut t = vec![];
        f_map_traced(&s5, &[0, 2, 3], &[1, 3, 4], Some(&mut t));
        let stages: Vec<&str> = t.iter().map(|s| s.stage).collect();
        assert_eq!(stages, ["suspension", "twist", "h", "sP", "g"]);
        assert_eq!(t[0].sign, 1);
    }

    #[test]
    fn lambda_sd_squares_to_sign() {
        for c in sd_faces(3) {
            let twice = lambda_sd(&c, 3).map_linear(|x| lambda_sd(x, 3));
            let k = c.0.len() as i64;
            assert_eq!(twice, Chain::term(c.clone(), coeff(1)), "k={k}");
        }
    }

    fn sd_faces(r: u32) -> Vec<SdChain> {
        let faces: Vec<Vec<u32>> = boundary_faces(r).into_iter().filter(|f| !f.is_empty()).collect();
        let mut out = vec![];
        fn rec(cur: &mut Vec<Vec<u32>>, faces: &[Vec<u32>], out: &mut Vec<SdChain>) {
            if !cur.is_empty() {
                out.push(SdChain(cur.clone()));
            }
            for f in faces {
                let ok = cur.last().is_none_or(|l| l.len() < f.len() && l.iter().all(|v| f.contains(v)));
                if ok {
                    cur.push(f.clone());
                    rec(cur, faces, out);
                    cur.pop();
                }
            }
        }
        rec(&mut vec![], &faces, &mut out);
        out
    }

    #[test]
    fn lambda_diagram_squares() {
        for r in [3, 5] {
            lambda_squares_at(r);
        }
    }

    fn lambda_squares_at(r: u32) {
        let n = r as i64 - 1;
        let expected = coeff(sign_of(n + 1));
        let faces: Vec<Vec<u32>> = boundary_faces(r).into_iter().filter(|f| !f.is_empty()).collect();
        for b in &faces {
            for a in &faces {
                let top = h_map(b, a, r).map_linear(|p| lambda_pairs(p, r));
                let side = h_map(a, b, r).scaled(coeff(sign_of((a.len() * b.len()) as i64)) * expected);
                assert_eq!(top, side, "first square b={b:?} a={a:?}");
            }
        }
        for a in &faces {
            for mask in 1u32..(1 << a.len()) {
                let b: Vec<u32> = a.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect();
                let p = PairGen { b, a: a.clone() };
                let lhs = pairs_to_subdivision(&p).map_linear(|c| lambda_sd(c, r));
                let rhs = lambda_pairs(&p, r).map_linear(pairs_to_subdivision).scaled(expected);
                assert_eq!(lhs, rhs, "second square {p:?}");
            }
        }
    }

    #[test]
    fn construction_conditions_hold_for_presets() {
        for n in Straightening::preset_names() {
            let rep = check_construction_conditions(&Straightening::preset(n).unwrap());
            assert!(rep.condition_i && rep.condition_ii && rep.condition_iii_prime, "{n}: {:?}", rep.failures);
        }
    }
}
