//! Exact coefficients, sparse graded chains and the Koszul sign conventions.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type Coefficient = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("denominator {den} is not invertible modulo {p}")]
    NotInvertible { den: i64, p: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("chain has terms of different degrees")]
    MixedDegree,
    #[error("coefficient {0} is not allowed in the selected ring")]
    OutsideRing(String),
}

pub fn coeff(n: i64) -> Coefficient {
    Ratio::from_integer(n)
}

pub fn frac(n: i64, d: i64) -> Coefficient {
    Ratio::new(n, d)
}

/// `(-1)^k` as an integer.
pub fn sign_of(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn factorial(n: u64) -> i64 {
    (1..=n as i64).product()
}

pub fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Number of inversions of `seq`, i.e. the parity of the stable sort.
pub fn inversions<T: Ord>(seq: &[T]) -> usize {
    let mut n = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                n += 1;
            }
        }
    }
    n
}

/// Sign of the permutation sorting `seq` together with the sorted sequence,
/// or `None` if `seq` has a repeated entry.
pub fn sort_sign<T: Ord + Clone>(seq: &[T]) -> Option<(i64, Vec<T>)> {
    let mut sorted = seq.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign_of(inversions(seq) as i64), sorted))
}

/// Image of an exact coefficient in `F_p`.
pub fn mod_p(c: &Coefficient, p: u64) -> Result<u64, AlgebraError> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    let pm = p as i128;
    let den = (*c.denom() as i128).rem_euclid(pm);
    if den == 0 {
        return Err(AlgebraError::NotInvertible { den: *c.denom(), p });
    }
    let num = (*c.numer() as i128).rem_euclid(pm);
    Ok(((num * inverse_mod(den, pm)) % pm) as u64)
}

fn inverse_mod(a: i128, m: i128) -> i128 {
    let e = a.extended_gcd(&m);
    e.x.rem_euclid(m)
}

/// The coefficient rings a computation may run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientRing {
    /// The integers; only meaningful for r = 3 where r̃! = 1.
    Integers,
    /// Z[1/r̃!] for the given r.
    Localized { r: u64 },
    /// The prime field F_p.
    Prime(u64),
}

impl CoefficientRing {
    pub fn contains(&self, c: &Coefficient) -> bool {
        match *self {
            CoefficientRing::Integers => c.is_integer(),
            CoefficientRing::Localized { r } => {
                let f = factorial((r.saturating_sub(1)) / 2);
                let mut d = *c.denom();
                loop {
                    let g = d.gcd(&f);
                    if g == 1 {
                        break;
                    }
                    d /= g;
                }
                d == 1
            }
            CoefficientRing::Prime(p) => mod_p(c, p).is_ok(),
        }
    }
}

pub trait Graded {
    fn degree(&self) -> i64;
}

impl<A: Graded, B: Graded> Graded for (A, B) {
    fn degree(&self) -> i64 {
        self.0.degree() + self.1.degree()
    }
}

impl<G: Graded> Graded for Vec<G> {
    fn degree(&self) -> i64 {
        self.iter().map(Graded::degree).sum()
    }
}

/// Finite formal sum of generators with exact coefficients; zero terms are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chain<G: Ord> {
    terms: BTreeMap<G, Coefficient>,
}

impl<G: Ord> Default for Chain<G> {
    fn default() -> Self {
        Chain { terms: BTreeMap::new() }
    }
}

impl<G: Ord + Clone> Chain<G> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(g: G, c: Coefficient) -> Self {
        let mut ch = Self::zero();
        ch.add_term(g, c);
        ch
    }

    pub fn unit(g: G) -> Self {
        Self::term(g, Coefficient::one())
    }

    pub fn add_term(&mut self, g: G, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Chain<G>, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        for (g, v) in &other.terms {
            self.add_term(g.clone(), *v * c);
        }
    }

    pub fn scaled(&self, c: Coefficient) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Chain {
            terms: self.terms.iter().map(|(g, v)| (g.clone(), *v * c)).collect(),
        }
    }

    pub fn coefficient(&self, g: &G) -> Coefficient {
        self.terms.get(g).copied().unwrap_or_else(Coefficient::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&G, &Coefficient)> {
        self.terms.iter()
    }

    pub fn generators(&self) -> impl Iterator<Item = &G> {
        self.terms.keys()
    }

    pub fn into_terms(self) -> BTreeMap<G, Coefficient> {
        self.terms
    }

    /// Linear extension of a map on generators.
    pub fn map_linear<H: Ord + Clone>(&self, mut f: impl FnMut(&G) -> Chain<H>) -> Chain<H> {
        let mut out = Chain::zero();
        for (g, c) in &self.terms {
            out.add_scaled(&f(g), *c);
        }
        out
    }

    /// Linear extension of a map sending each generator to a signed generator or zero.
    pub fn map_signed<H: Ord + Clone>(&self, mut f: impl FnMut(&G) -> Option<(H, i64)>) -> Chain<H> {
        let mut out = Chain::zero();
        for (g, c) in &self.terms {
            if let Some((h, s)) = f(g) {
                out.add_term(h, *c * coeff(s));
            }
        }
        out
    }

    pub fn filter(&self, mut keep: impl FnMut(&G) -> bool) -> Self {
        Chain {
            terms: self
                .terms
                .iter()
                .filter(|(g, _)| keep(g))
                .map(|(g, c)| (g.clone(), *c))
                .collect(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Reduction of every coefficient into `F_p`, dropping terms that vanish.
    pub fn reduce_mod(&self, p: u64) -> Result<BTreeMap<G, u64>, AlgebraError> {
        let mut out = BTreeMap::new();
        for (g, c) in &self.terms {
            let v = mod_p(c, p)?;
            if v != 0 {
                out.insert(g.clone(), v);
            }
        }
        Ok(out)
    }

    /// Tensor product of two chains; no sign arises on elements.
    pub fn tensor<H: Ord + Clone>(&self, other: &Chain<H>) -> Chain<(G, H)> {
        let mut out = Chain::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term((a.clone(), b.clone()), *x * *y);
            }
        }
        out
    }
}

impl<G: Ord + Clone + Graded> Chain<G> {
    /// Common degree of all terms; `Ok(None)` for the zero chain.
    pub fn degree(&self) -> Result<Option<i64>, AlgebraError> {
        let mut it = self.terms.keys().map(Graded::degree);
        let Some(d) = it.next() else { return Ok(None) };
        if it.all(|e| e == d) {
            Ok(Some(d))
        } else {
            Err(AlgebraError::MixedDegree)
        }
    }

    pub fn homogeneous_part(&self, d: i64) -> Self {
        self.filter(|g| g.degree() == d)
    }
}

impl<G: Ord + Clone> FromIterator<(G, Coefficient)> for Chain<G> {
    fn from_iter<I: IntoIterator<Item = (G, Coefficient)>>(iter: I) -> Self {
        let mut ch = Chain::zero();
        for (g, c) in iter {
            ch.add_term(g, c);
        }
        ch
    }
}

impl<G: Ord + Clone> AddAssign<&Chain<G>> for Chain<G> {
    fn add_assign(&mut self, rhs: &Chain<G>) {
        self.add_scaled(rhs, Coefficient::one());
    }
}

impl<G: Ord + Clone> Add for Chain<G> {
    type Output = Chain<G>;
    fn add(mut self, rhs: Chain<G>) -> Chain<G> {
        self += &rhs;
        self
    }
}

impl<G: Ord + Clone> Sub for Chain<G> {
    type Output = Chain<G>;
    fn sub(mut self, rhs: Chain<G>) -> Chain<G> {
        self.add_scaled(&rhs, -Coefficient::one());
        self
    }
}

impl<G: Ord + Clone> Neg for Chain<G> {
    type Output = Chain<G>;
    fn neg(self) -> Chain<G> {
        self.scaled(-Coefficient::one())
    }
}

impl<G: Ord + Clone> Mul<Coefficient> for Chain<G> {
    type Output = Chain<G>;
    fn mul(self, rhs: Coefficient) -> Chain<G> {
        self.scaled(rhs)
    }
}

impl<G: Ord + fmt::Debug> fmt::Debug for Chain<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}·{:?}", render(c), g)?;
        }
        Ok(())
    }
}

/// Canonical rendering `num/den` (or `num` when integral).
pub fn render(c: &Coefficient) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_coefficient(s: &str) -> Option<Coefficient> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Ratio::new(n.trim().parse().ok()?, d))
        }
        None => Some(coeff(s.trim().parse().ok()?)),
    }
}

pub fn abs_sign(c: &Coefficient) -> i64 {
    if c.is_negative() {
        -1
    } else {
        1
    }
}

/// Which suspension a graded map of nonzero degree is read against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Commutes with the differential; `(f⊗g)(a⊗b) = (-1)^{|f||b|} f(a)⊗g(b)`.
    Right,
    /// Commutes up to `(-1)^{deg}`; `(f⊗g)(a⊗b) = (-1)^{|g||a|} f(a)⊗g(b)`.
    Left,
}

type Action<'a, G, H> = Box<dyn Fn(&G) -> Chain<H> + Send + Sync + 'a>;

/// A homogeneous linear map given on basis generators.
pub struct GradedMap<'a, G: Ord, H: Ord> {
    pub degree: i64,
    pub convention: Convention,
    action: Action<'a, G, H>,
}

impl<'a, G: Ord + Clone + 'a, H: Ord + Clone + 'a> GradedMap<'a, G, H> {
    pub fn new(
        degree: i64,
        convention: Convention,
        action: impl Fn(&G) -> Chain<H> + Send + Sync + 'a,
    ) -> Self {
        GradedMap { degree, convention, action: Box::new(action) }
    }

    pub fn on(&self, g: &G) -> Chain<H> {
        (self.action)(g)
    }

    pub fn apply(&self, c: &Chain<G>) -> Chain<H> {
        c.map_linear(|g| (self.action)(g))
    }

    /// `self ∘ first`.
    pub fn after<F: Ord + Clone + 'a>(self, first: GradedMap<'a, F, G>) -> GradedMap<'a, F, H> {
        let degree = self.degree + first.degree;
        let convention = self.convention;
        GradedMap::new(degree, convention, move |x: &F| self.apply(&first.on(x)))
    }
}

/// Tensor product of two graded maps under the convention of `f`.
pub fn tensor_maps<'a, G1, G2, H1, H2>(
    f: GradedMap<'a, G1, H1>,
    g: GradedMap<'a, G2, H2>,
) -> GradedMap<'a, (G1, G2), (H1, H2)>
where
    G1: Ord + Clone + Graded + 'a,
    G2: Ord + Clone + Graded + 'a,
    H1: Ord + Clone + 'a,
    H2: Ord + Clone + 'a,
{
    let convention = f.convention;
    let degree = f.degree + g.degree;
    GradedMap::new(degree, convention, move |(a, b): &(G1, G2)| {
        let s = match convention {
            Convention::Right => sign_of(f.degree * b.degree()),
            Convention::Left => sign_of(g.degree * a.degree()),
        };
        f.on(a).tensor(&g.on(b)).scaled(coeff(s))
    })
}

/// Differential of a tensor product: `∂(a⊗b) = ∂a⊗b + (-1)^{|a|} a⊗∂b`.
pub fn tensor_differential<G, H>(
    da: impl Fn(&G) -> Chain<G>,
    db: impl Fn(&H) -> Chain<H>,
) -> impl Fn(&(G, H)) -> Chain<(G, H)>
where
    G: Ord + Clone + Graded,
    H: Ord + Clone + Graded,
{
    move |(a, b)| {
        let mut out = da(a).tensor(&Chain::unit(b.clone()));
        out.add_scaled(&Chain::unit(a.clone()).tensor(&db(b)), coeff(sign_of(a.degree())));
        out
    }
}

/// Linear dual of a generator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dual<G>(pub G);

impl<G: Graded> Graded for Dual<G> {
    fn degree(&self) -> i64 {
        -self.0.degree()
    }
}

/// `(∂^∨ f)(τ) = (-1)^{|f|+1} f(∂τ)`, computed against the basis enumerated by `basis(degree)`.
pub fn dual_differential<'a, G>(
    d: &'a GradedMap<'a, G, G>,
    basis: impl Fn(i64) -> Vec<G> + Send + Sync + 'a,
) -> GradedMap<'a, Dual<G>, Dual<G>>
where
    G: Ord + Clone + Graded + Send + Sync + 'a,
{
    GradedMap::new(-d.degree, d.convention, move |f: &Dual<G>| {
        let s = coeff(sign_of(f.degree() + 1));
        let mut out = Chain::zero();
        for tau in basis(f.0.degree() - d.degree) {
            let c = d.on(&tau).coefficient(&f.0);
            out.add_term(Dual(tau), c * s);
        }
        out
    })
}

/// A generator on which `∂∘f` and `ε·f∘∂` disagree.
#[derive(Debug, Clone)]
pub struct ChainMapFailure<G> {
    pub generator: G,
    pub lhs: String,
    pub rhs: String,
}

/// Checks `∂∘f = ε·f∘∂` on every listed generator, with `ε = 1` for the right
/// convention and `(-1)^{deg f}` for the left one.
pub fn verify_chain_map<G, H>(
    f: &GradedMap<'_, G, H>,
    d_source: impl Fn(&G) -> Chain<G>,
    d_target: impl Fn(&H) -> Chain<H>,
    generators: impl IntoIterator<Item = G>,
) -> Result<usize, ChainMapFailure<G>>
where
    G: Ord + Clone + fmt::Debug,
    H: Ord + Clone + fmt::Debug,
{
    let eps = match f.convention {
        Convention::Right => 1,
        Convention::Left => sign_of(f.degree),
    };
    let mut checked = 0;
    for g in generators {
        let lhs = f.on(&g).map_linear(&d_target);
        let rhs = f.apply(&d_source(&g)).scaled(coeff(eps));
        if lhs != rhs {
            return Err(ChainMapFailure {
                lhs: format!("{lhs:?}"),
                rhs: format!("{rhs:?}"),
                generator: g,
            });
        }
        checked += 1;
    }
    Ok(checked)
}
