//! Reduced mod-p cohomology of finite augmented semi-simplicial sets and the power operations
//! induced by the cyclic diagonal.

use crate::algebra::{binom2, is_prime, mod_p, sign_of, AlgebraError};
use crate::diagonal::{DiagonalEngine, DiagonalError};
use crate::resolutions::rt_factorial;
use crate::simplicial::{AugSimplicialSet, Cell};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("the diagonal is built for r = {r}, but p = {p}")]
    PrimeMismatch { r: u32, p: u64 },
    #[error("the input cochain of dimension {0} is not a cocycle")]
    NotCocycle(i32),
    #[error("cochain has {got} values but dimension {dim} has {expected} cells")]
    Length { dim: i32, got: usize, expected: usize },
    #[error("class index {index} out of range: dimension {dim} has {count} generators")]
    ClassIndex { dim: i32, index: usize, count: usize },
    #[error(transparent)]
    Diagonal(#[from] DiagonalError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn inv(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(rows: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, pr);
        let f = inv(rows[rank][col], p);
        for x in rows[rank].iter_mut() {
            *x = *x * f % p;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col];
                for j in 0..ncols {
                    rows[i][j] = (rows[i][j] + p * p - f * rows[rank][j] % p) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

/// Basis of `{v | M v = 0}` for `M` given by rows of length `ncols`.
pub fn kernel(m: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut rows = m.to_vec();
    let pivots = row_reduce(&mut rows, p);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; ncols];
            v[free] = 1;
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = (p - row[free]) % p;
            }
            v
        })
        .collect()
}

/// Coordinates of `target` in the span of `vectors`, if it lies there.
pub fn solve(vectors: &[Vec<u64>], target: &[u64], p: u64) -> Option<Vec<u64>> {
    let k = vectors.len();
    // rows: one per coordinate, columns: the vectors then the target
    let mut rows: Vec<Vec<u64>> = (0..target.len())
        .map(|i| vectors.iter().map(|v| v[i]).chain(std::iter::once(target[i] % p)).collect())
        .collect();
    if rows.is_empty() {
        return Some(vec![0; k]);
    }
    let pivots = row_reduce(&mut rows, p);
    if pivots.contains(&k) {
        return None;
    }
    let mut out = vec![0u64; k];
    for (row, &pc) in rows.iter().zip(&pivots) {
        out[pc] = row[k];
    }
    Some(out)
}

fn rank(vectors: &[Vec<u64>], p: u64) -> usize {
    let mut rows = vectors.to_vec();
    row_reduce(&mut rows, p).len()
}

/// A mod-p cochain on the cells of one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CochainClass {
    pub dim: i32,
    pub values: Vec<u64>,
    pub p: u64,
}

impl CochainClass {
    pub fn zero(x: &AugSimplicialSet, dim: i32, p: u64) -> Self {
        CochainClass { dim, values: vec![0; x.count(dim)], p }
    }

    pub fn new(x: &AugSimplicialSet, dim: i32, values: Vec<u64>, p: u64) -> Result<Self, CohomologyError> {
        if values.len() != x.count(dim) {
            return Err(CohomologyError::Length { dim, got: values.len(), expected: x.count(dim) });
        }
        Ok(CochainClass { dim, values: values.into_iter().map(|v| v % p).collect(), p })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| (a + b) % self.p).collect();
        CochainClass { dim: self.dim, values, p: self.p }
    }

    pub fn scaled(&self, c: u64) -> Self {
        CochainClass { dim: self.dim, values: self.values.iter().map(|v| v * c % self.p).collect(), p: self.p }
    }

    pub fn value(&self, c: Cell) -> u64 {
        if c.dim == self.dim {
            self.values[c.index as usize]
        } else {
            0
        }
    }

    /// `δx = x ∘ ∂`.
    pub fn coboundary(&self, x: &AugSimplicialSet) -> Self {
        let p = self.p as i64;
        let values = x
            .cells(self.dim + 1)
            .into_iter()
            .map(|c| {
                let s: i64 = x
                    .boundary(c)
                    .iter()
                    .map(|(f, k)| k.to_integer() * self.values[f.index as usize] as i64)
                    .sum();
                s.rem_euclid(p) as u64
            })
            .collect();
        CochainClass { dim: self.dim + 1, values, p: self.p }
    }
}

/// Coboundary matrices over 𝔽_p and chosen cohomology representatives, per dimension.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedComplex {
    pub p: u64,
    pub top: i32,
    /// `coboundaries[m + 1]` spans the image of `δ` in dimension `m`.
    coboundaries: Vec<Vec<Vec<u64>>>,
    /// `basis[m + 1]` lists cocycles whose classes form a basis of `H̃^m`.
    basis: Vec<Vec<Vec<u64>>>,
    cocycle_dims: Vec<usize>,
}

impl ReducedComplex {
    fn slot(&self, dim: i32) -> Option<usize> {
        (dim >= -1 && dim <= self.top).then(|| (dim + 1) as usize)
    }

    pub fn betti(&self, dim: i32) -> usize {
        self.slot(dim).map_or(0, |k| self.basis[k].len())
    }

    pub fn bettis(&self) -> Vec<(i32, usize)> {
        (-1..=self.top).map(|d| (d, self.betti(d))).collect()
    }

    /// Representative cocycles of the chosen basis of `H̃^dim`.
    pub fn basis(&self, dim: i32) -> Vec<CochainClass> {
        self.slot(dim)
            .map(|k| self.basis[k].iter().map(|v| CochainClass { dim, values: v.clone(), p: self.p }).collect())
            .unwrap_or_default()
    }

    pub fn generator(&self, dim: i32, index: usize) -> Result<CochainClass, CohomologyError> {
        let b = self.basis(dim);
        let count = b.len();
        b.into_iter().nth(index).ok_or(CohomologyError::ClassIndex { dim, index, count })
    }

    pub fn is_coboundary(&self, c: &CochainClass) -> bool {
        match self.slot(c.dim) {
            None => c.is_zero(),
            Some(k) => solve(&self.coboundaries[k], &c.values, self.p).is_some(),
        }
    }

    /// Coordinates of a cocycle's class in the chosen basis.
    pub fn coordinates(&self, c: &CochainClass) -> Option<Vec<u64>> {
        let k = self.slot(c.dim)?;
        let mut vecs = self.basis[k].clone();
        let nb = vecs.len();
        vecs.extend(self.coboundaries[k].iter().cloned());
        solve(&vecs, &c.values, self.p).map(|v| v[..nb].to_vec())
    }

    pub fn same_class(&self, a: &CochainClass, b: &CochainClass) -> bool {
        a.dim == b.dim && self.is_coboundary(&a.add(&b.scaled(self.p - 1)))
    }

    /// `true` when rank–nullity holds in every dimension.
    pub fn consistent(&self, x: &AugSimplicialSet) -> bool {
        (-1..=self.top).all(|d| {
            let k = (d + 1) as usize;
            let im = rank(&self.coboundaries[k], self.p);
            let next_im = if d < self.top { rank(&self.coboundaries[k + 1], self.p) } else { 0 };
            self.cocycle_dims[k] == x.count(d) - next_im && self.basis[k].len() == self.cocycle_dims[k] - im
        })
    }
}

/// The integral coboundary matrix from dimension `dim` to `dim + 1`, rows indexed by `(dim+1)`-cells.
pub fn integral_coboundary(x: &AugSimplicialSet, dim: i32) -> Vec<Vec<i64>> {
    x.cells(dim + 1)
        .into_iter()
        .map(|c| {
            let mut row = vec![0i64; x.count(dim)];
            for (f, k) in x.boundary(c).iter() {
                row[f.index as usize] += k.to_integer();
            }
            row
        })
        .collect()
}

/// Reduced cohomology of `x` over 𝔽_p, including the (−1)-dimensional layer.
pub fn cohomology_basis(x: &AugSimplicialSet, p: u64) -> Result<ReducedComplex, CohomologyError> {
    if !is_prime(p) {
        return Err(CohomologyError::NotPrime(p));
    }
    let top = x.top_dim().max(-1);
    let reduce = |m: Vec<Vec<i64>>| -> Vec<Vec<u64>> {
        m.into_iter().map(|r| r.into_iter().map(|v| v.rem_euclid(p as i64) as u64).collect()).collect()
    };
    let mut coboundaries = vec![];
    let mut basis = vec![];
    let mut cocycle_dims = vec![];
    for d in -1..=top {
        let ncols = x.count(d);
        let delta = reduce(integral_coboundary(x, d));
        let cocycles = kernel(&delta, ncols, p);
        // image of δ into dimension d: columns of the previous matrix
        let image: Vec<Vec<u64>> = if d > -1 {
            let prev = reduce(integral_coboundary(x, d - 1));
            let mut rows: Vec<Vec<u64>> =
                (0..x.count(d - 1)).map(|j| prev.iter().map(|row| row[j]).collect()).collect();
            row_reduce(&mut rows, p);
            rows
        } else {
            vec![]
        };
        let mut span = image.clone();
        let mut chosen = vec![];
        for z in &cocycles {
            span.push(z.clone());
            if rank(&span, p) == image.len() + chosen.len() + 1 {
                chosen.push(z.clone());
            } else {
                span.pop();
            }
        }
        cocycle_dims.push(cocycles.len());
        coboundaries.push(image);
        basis.push(chosen);
    }
    Ok(ReducedComplex { p, top, coboundaries, basis, cocycle_dims })
}

/// The normalising constant applied to `x^{⊗r}(μ(e_{ri} ⊗ a))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum Normalization {
    /// `(−1)^{C(ir,2) + C(m,2) r̃} (r̃!)^m`.
    #[default]
    Standard,
    /// `1 / (r̃!)^m`.
    Reciprocal,
}

impl Normalization {
    pub fn constant(self, r: u32, i: i64, m: i32, p: u64) -> u64 {
        if r == 2 {
            return 1;
        }
        let rt = (r as i64 - 1) / 2;
        let f = rt_factorial(r).rem_euclid(p as i64) as u64;
        let mut pow = 1u64;
        for _ in 0..m.max(0) {
            pow = pow * f % p;
        }
        match self {
            Normalization::Standard => {
                let s = sign_of(binom2(i * r as i64) + binom2(m as i64) * rt);
                if s < 0 {
                    (p - pow) % p
                } else {
                    pow
                }
            }
            Normalization::Reciprocal => inv(pow, p),
        }
    }
}

/// Evaluation data of one power operation.
#[derive(Debug, Clone, Serialize)]
pub struct PowerOutput {
    pub input: CochainClass,
    pub i: i64,
    pub q: usize,
    pub output: CochainClass,
    /// Cells of the output dimension.
    pub cells: usize,
    /// Terms of the universal expansion whose factors all have the input dimension.
    pub universal_terms: usize,
}

/// `P^i(x)`: evaluates `x^{⊗r}` on the degree `q = r·i` component of `μ` over every
/// `(m + i)`-cell, with the Koszul sign `(−1)^{C(r,2)(m+1)}` and the chosen normalisation.
pub fn power_op(
    engine: &DiagonalEngine,
    x: &AugSimplicialSet,
    i: i64,
    input: &CochainClass,
    norm: Normalization,
) -> Result<PowerOutput, CohomologyError> {
    let r = engine.r();
    let p = input.p;
    if r as u64 != p {
        return Err(CohomologyError::PrimeMismatch { r, p });
    }
    let m = input.dim;
    if input.values.len() != x.count(m) {
        return Err(CohomologyError::Length { dim: m, got: input.values.len(), expected: x.count(m) });
    }
    if !input.coboundary(x).is_zero() {
        return Err(CohomologyError::NotCocycle(m));
    }
    let out_dim = m + i as i32;
    let zero = |q| PowerOutput {
        input: input.clone(),
        i,
        q,
        output: CochainClass::zero(x, out_dim, p),
        cells: x.count(out_dim),
        universal_terms: 0,
    };
    if i < 0 {
        return Ok(zero(0));
    }
    let q = r as usize * i as usize;
    if x.count(out_dim) == 0 {
        return Ok(zero(q));
    }
    let universal = engine.mu_universal(out_dim, q, 0)?;
    let width = (m + 1) as usize;
    let terms: Vec<(Vec<Vec<u32>>, u64)> = universal
        .iter()
        .filter(|(t, _)| t.iter().all(|f| f.len() == width))
        .map(|(t, c)| mod_p(c, p).map(|c| (t.clone(), c)))
        .collect::<Result<_, _>>()?;
    let koszul = sign_of(binom2(r as i64) * (m as i64 + 1));
    let mut k = norm.constant(r, i, m, p);
    if koszul < 0 {
        k = (p - k) % p;
    }
    let values: Vec<u64> = x
        .cells(out_dim)
        .into_par_iter()
        .map(|cell| {
            let mut acc = 0u64;
            for (t, c) in &terms {
                let mut prod = *c;
                for keep in t {
                    match x.face_keep(cell, keep) {
                        Some(f) => prod = prod * input.values[f.index as usize] % p,
                        None => prod = 0,
                    }
                    if prod == 0 {
                        break;
                    }
                }
                acc = (acc + prod) % p;
            }
            acc * k % p
        })
        .collect();
    Ok(PowerOutput {
        input: input.clone(),
        i,
        q,
        output: CochainClass { dim: out_dim, values, p },
        cells: x.count(out_dim),
        universal_terms: terms.len(),
    })
}

/// A uniformly random cochain, for perturbation tests.
pub fn random_cochain(x: &AugSimplicialSet, dim: i32, p: u64, seed: u64) -> CochainClass {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CochainClass { dim, values: (0..x.count(dim)).map(|_| rng.gen_range(0..p)).collect(), p }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizationRow {
    pub dim: i32,
    pub class: usize,
    pub standard: Option<Vec<u64>>,
    pub reciprocal: Option<Vec<u64>>,
    pub standard_is_identity: bool,
    pub reciprocal_is_identity: bool,
}

/// `P^0` on every basis class under both normalisations, as coordinates in the same basis.
pub fn normalization_report(engine: &DiagonalEngine, x: &AugSimplicialSet) -> Result<Vec<NormalizationRow>, CohomologyError> {
    let p = engine.r() as u64;
    let h = cohomology_basis(x, p)?;
    let mut rows = vec![];
    for dim in -1..=h.top {
        for (class, g) in h.basis(dim).iter().enumerate() {
            let own = h.coordinates(g);
            let eval = |norm| -> Result<Option<Vec<u64>>, CohomologyError> {
                Ok(h.coordinates(&power_op(engine, x, 0, g, norm)?.output))
            };
            let standard = eval(Normalization::Standard)?;
            let reciprocal = eval(Normalization::Reciprocal)?;
            rows.push(NormalizationRow {
                dim,
                class,
                standard_is_identity: standard == own,
                reciprocal_is_identity: reciprocal == own,
                standard,
                reciprocal,
            });
        }
    }
    Ok(rows)
}

/// The Bockstein of a mod-p cocycle: lift to integers, apply `δ`, divide by `p`, reduce.
pub fn bockstein(x: &AugSimplicialSet, c: &CochainClass) -> CochainClass {
    let p = c.p as i64;
    let m = integral_coboundary(x, c.dim);
    let values = m
        .iter()
        .map(|row| {
            let s: i64 = row.iter().zip(&c.values).map(|(a, v)| a * *v as i64).sum();
            debug_assert_eq!(s.rem_euclid(p), 0, "not a cocycle");
            (s / p).rem_euclid(p) as u64
        })
        .collect();
    CochainClass { dim: c.dim + 1, values, p: c.p }
}
