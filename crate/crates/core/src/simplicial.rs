//! Augmented semi-simplicial sets, the join product and Alexander duality on the simplex.
//!
//! Chain degrees are dimension + 1 throughout, so the (-1)-simplex sits in degree 0.

use crate::algebra::{coeff, inversions, sign_of, sort_sign, Chain, Coefficient, Dual, Graded};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplicialError {
    #[error("tuples share the vertex {0}")]
    Degenerate(u32),
    #[error("index {i} out of range for a generator of Δ^{n}")]
    IndexOutOfRange { i: u32, n: i32 },
    #[error("semi-simplicial identity d_{i} d_{j} = d_{jm1} d_{i} fails on cell {cell}", jm1 = .j - 1)]
    Identity { cell: String, i: usize, j: usize },
    #[error("cell {cell} of dimension {dim} lists {got} faces")]
    FaceCount { cell: String, dim: i32, got: usize },
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("face {face} of {cell} has the wrong dimension")]
    FaceDimension { cell: String, face: String },
    #[error("malformed complex description: {0}")]
    Malformed(String),
    #[error("unknown builder {0}")]
    UnknownBuilder(String),
}

/// A face of the augmented standard simplex Δ^n_+; the empty vertex list is the (-1)-simplex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<u32>,
    pub ambient: i32,
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices)
    }
}

impl Graded for Simplex {
    fn degree(&self) -> i64 {
        self.vertices.len() as i64
    }
}

impl Simplex {
    pub fn new(vertices: Vec<u32>, ambient: i32) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(vertices.iter().all(|&v| (v as i32) <= ambient));
        Simplex { vertices, ambient }
    }

    pub fn top(n: i32) -> Self {
        Simplex::new((0..=n).map(|v| v as u32).collect(), n)
    }

    pub fn empty(n: i32) -> Self {
        Simplex::new(vec![], n)
    }

    /// The sorted representative of an arbitrary vertex sequence with its sign, or `None` on repeats.
    pub fn ordered(entries: &[u32], ambient: i32) -> Option<(i64, Simplex)> {
        sort_sign(entries).map(|(s, v)| (s, Simplex::new(v, ambient)))
    }

    pub fn dimension(&self) -> i32 {
        self.vertices.len() as i32 - 1
    }

    pub fn complement(&self) -> Simplex {
        Simplex::new(complement(&self.vertices, self.ambient), self.ambient)
    }

    pub fn face(&self, i: usize) -> Simplex {
        let mut v = self.vertices.clone();
        v.remove(i);
        Simplex::new(v, self.ambient)
    }

    /// `Σ (-1)^i d_i`; the boundary of a vertex is the (-1)-simplex.
    pub fn boundary(&self) -> Chain<Simplex> {
        (0..self.vertices.len())
            .map(|i| (self.face(i), coeff(sign_of(i as i64))))
            .collect()
    }

    /// Every face of Δ^n_+ (including the empty one).
    pub fn all(n: i32) -> Vec<Simplex> {
        let k = (n + 1).max(0) as u32;
        let mut out: Vec<Simplex> = (0u32..(1 << k))
            .map(|mask| Simplex::new((0..k).filter(|v| mask >> v & 1 == 1).collect(), n))
            .collect();
        out.sort_by(|a, b| (a.vertices.len(), &a.vertices).cmp(&(b.vertices.len(), &b.vertices)));
        out
    }

    pub fn all_of_degree(n: i32, degree: i64) -> Vec<Simplex> {
        Simplex::all(n).into_iter().filter(|s| s.degree() == degree).collect()
    }
}

pub fn complement(vertices: &[u32], ambient: i32) -> Vec<u32> {
    (0..=ambient.max(-1)).map(|v| v as u32).filter(|v| !vertices.contains(v)).collect()
}

/// Parity of the permutation sorting the concatenation `t1·t2`.
pub fn lambda_sign(t1: &[u32], t2: &[u32]) -> Result<bool, SimplicialError> {
    if let Some(v) = t1.iter().find(|v| t2.contains(v)) {
        return Err(SimplicialError::Degenerate(*v));
    }
    let cat: Vec<u32> = t1.iter().chain(t2).copied().collect();
    Ok(inversions(&cat) % 2 == 1)
}

pub fn lambda(t1: &[u32], t2: &[u32]) -> i64 {
    match lambda_sign(t1, t2) {
        Ok(true) => 1,
        Ok(false) => 0,
        Err(_) => panic!("lambda on overlapping tuples"),
    }
}

/// The join product on N̂(Δ^n_+).
pub fn join(t1: &Simplex, t2: &Simplex) -> Chain<Simplex> {
    assert_eq!(t1.ambient, t2.ambient, "join of simplices in different ambients");
    match lambda_sign(&t1.vertices, &t2.vertices) {
        Err(_) => Chain::zero(),
        Ok(odd) => {
            let mut v: Vec<u32> = t1.vertices.iter().chain(&t2.vertices).copied().collect();
            v.sort();
            Chain::term(Simplex::new(v, t1.ambient), coeff(if odd { -1 } else { 1 }))
        }
    }
}

/// Alexander duality `τ ↦ (-1)^{λ(τ,τ^c)} (τ^c)^∨`.
pub fn alexander_dual(t: &Simplex) -> (i64, Dual<Simplex>) {
    let c = t.complement();
    (sign_of(lambda(&t.vertices, &c.vertices)), Dual(c))
}

/// Inverse of Alexander duality on a dual generator `(b)^∨`.
pub fn alexander_dual_inverse(b: &Simplex) -> (i64, Simplex) {
    let y = b.complement();
    (sign_of(lambda(&y.vertices, &b.vertices)), y)
}

/// First closed form for λ(τ,τ^c): Σ (v_i - i).
pub fn lambda_complement_closed_form(t: &Simplex) -> i64 {
    t.vertices.iter().enumerate().map(|(i, &v)| v as i64 - i as i64).sum::<i64>().rem_euclid(2)
}

/// Second closed form for λ(τ,τ^c), written through the complement.
pub fn lambda_complement_closed_form_dual(t: &Simplex) -> i64 {
    let c = t.complement();
    let m = c.vertices.len() as i64 - 1;
    let n = t.ambient as i64;
    c.vertices
        .iter()
        .enumerate()
        .map(|(j, &u)| n - u as i64 - m + j as i64)
        .sum::<i64>()
        .rem_euclid(2)
}

/// Dual differential on N̂^∨(Δ^n_+).
pub fn dual_boundary(f: &Dual<Simplex>) -> Chain<Dual<Simplex>> {
    let s = coeff(sign_of(f.degree() + 1));
    let mut out = Chain::zero();
    for tau in Simplex::all_of_degree(f.0.ambient, f.0.degree() + 1) {
        let c = tau.boundary().coefficient(&f.0);
        out.add_term(Dual(tau), c * s);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub n: i32,
    pub vanishes_above_top: bool,
    pub top_rank: usize,
    /// For each degree i, whether the pairing into the top degree is a signed permutation matrix.
    pub nondegenerate: Vec<(i64, bool)>,
    pub passed: bool,
}

/// Checks that the join product makes N̂(Δ^n_+) a Poincaré duality algebra of formal dimension n+1.
pub fn poincare_pairing_check(n: i32) -> PairingReport {
    let all = Simplex::all(n);
    let d = n as i64 + 1;
    let vanishes_above_top = all.iter().all(|s| s.degree() <= d);
    let top_rank = all.iter().filter(|s| s.degree() == d).count();
    let top = Simplex::top(n);
    let mut nondegenerate = vec![];
    for i in 0..=d {
        let left = Simplex::all_of_degree(n, i);
        let right = Simplex::all_of_degree(n, d - i);
        let ok = left.len() == right.len()
            && left.iter().all(|a| {
                let row: Vec<Coefficient> =
                    right.iter().map(|b| join(a, b).coefficient(&top)).collect();
                row.iter().filter(|c| **c != coeff(0)).count() == 1
                    && row.iter().all(|c| *c == coeff(0) || *c == coeff(1) || *c == coeff(-1))
            })
            && right.iter().all(|b| {
                left.iter().filter(|a| join(a, b).coefficient(&top) != coeff(0)).count() == 1
            });
        nondegenerate.push((i, ok));
    }
    let passed = vanishes_above_top && top_rank == 1 && nondegenerate.iter().all(|x| x.1);
    PairingReport { n, vanishes_above_top, top_rank, nondegenerate, passed }
}

/// Coface `d^i` on a dual generator `U = (u_0..u_{m-1})` of N̂^∨(Δ^n_+), landing in Δ^{n+1}_+.
pub fn coface_dual(u: &[u32], n: i32, i: u32) -> Result<(i64, Vec<u32>), SimplicialError> {
    if i as i32 > n + 1 {
        return Err(SimplicialError::IndexOutOfRange { i, n });
    }
    let j = u.iter().take_while(|&&x| x < i).count();
    let m = u.len() as i64;
    let mut out: Vec<u32> = u[..j].to_vec();
    out.push(i);
    out.extend(u[j..].iter().map(|x| x + 1));
    Ok((sign_of(i as i64 + j as i64 + m + n as i64 + 1), out))
}

/// Codegeneracy `s^i` on a dual generator of N̂^∨(Δ^{n+1}_+); zero unless `i ∈ U`.
pub fn codegeneracy_dual(u: &[u32], n: i32, i: u32) -> Result<Option<(i64, Vec<u32>)>, SimplicialError> {
    if i as i32 > n {
        return Err(SimplicialError::IndexOutOfRange { i, n });
    }
    let Some(j) = u.iter().position(|&x| x == i) else { return Ok(None) };
    let m = u.len() as i64;
    let mut out: Vec<u32> = u[..j].to_vec();
    out.extend(u[j + 1..].iter().map(|x| x - 1));
    Ok(Some((sign_of(i as i64 + j as i64 + m + n as i64 + 1), out)))
}

/// Coface on an r-fold tensor of dual generators, paying `(-1)^{Σ_k (r-1-k) m_k}`.
pub fn coface_dual_tensor(us: &[Vec<u32>], n: i32, i: u32) -> Result<(i64, Vec<Vec<u32>>), SimplicialError> {
    let r = us.len() as i64;
    let mut s: i64 = us.iter().enumerate().map(|(k, u)| (r - 1 - k as i64) * u.len() as i64).sum();
    let mut out = vec![];
    for u in us {
        let (t, v) = coface_dual(u, n, i)?;
        if t < 0 {
            s += 1;
        }
        out.push(v);
    }
    Ok((sign_of(s), out))
}

/// Sign of `U ⊗ τ ↦ U^c ⊗ τ` for a dual generator `U` of N̂^∨(Δ^n_+) (the inverse of Alexander
/// duality inside the functor tensor product): `λ(U^c,U) + (n+1)|U|`.
pub fn dual_face_sign(u: &[u32], n: i32) -> i64 {
    let c = complement(u, n);
    sign_of(lambda(&c, u) + (n as i64 + 1) * u.len() as i64)
}

/// Reduces `U ⊗ τ` to `± ∅ ⊗ d_U τ` by peeling the largest entry of `U` as a coface and moving it
/// across with `d^i V ⊗ τ = (-1)^{|d^i V| + n} V ⊗ d_i τ` (`n` the dimension of `τ`).
pub fn dual_face_sign_via_cofaces(u: &[u32], n: i32) -> i64 {
    if u.is_empty() {
        return 1;
    }
    let (rest, i) = (&u[..u.len() - 1], *u.last().unwrap());
    let (s, back) = coface_dual(rest, n - 1, i).expect("coface in range");
    debug_assert_eq!(back, u);
    s * sign_of(u.len() as i64 + n as i64) * dual_face_sign_via_cofaces(rest, n - 1)
}

/// A cell of an augmented semi-simplicial set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub dim: i32,
    pub index: u32,
}

impl Graded for Cell {
    fn degree(&self) -> i64 {
        self.dim as i64 + 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellData {
    pub name: String,
    /// `faces[i]` is the index of `d_i` in the layer below, or `None` for the basepoint.
    pub faces: Vec<Option<u32>>,
    pub vertices: Option<Vec<u32>>,
}

/// A finite augmented semi-simplicial set, optionally pointed. Only faces are stored; the
/// basepoint is never a cell and faces landing on it annihilate chains.
#[derive(Debug, Clone, Serialize)]
pub struct AugSimplicialSet {
    layers: Vec<Vec<CellData>>,
    pub pointed: bool,
}

impl AugSimplicialSet {
    fn layer(&self, dim: i32) -> &[CellData] {
        let k = dim + 1;
        if k < 0 || k as usize >= self.layers.len() {
            &[]
        } else {
            &self.layers[k as usize]
        }
    }

    pub fn top_dim(&self) -> i32 {
        self.layers.iter().rposition(|l| !l.is_empty()).map(|k| k as i32 - 1).unwrap_or(-2)
    }

    pub fn cells(&self, dim: i32) -> Vec<Cell> {
        (0..self.layer(dim).len() as u32).map(|index| Cell { dim, index }).collect()
    }

    pub fn all_cells(&self) -> Vec<Cell> {
        (-1..=self.top_dim()).flat_map(|d| self.cells(d)).collect()
    }

    pub fn count(&self, dim: i32) -> usize {
        self.layer(dim).len()
    }

    pub fn data(&self, c: Cell) -> &CellData {
        &self.layer(c.dim)[c.index as usize]
    }

    pub fn name(&self, c: Cell) -> &str {
        &self.data(c).name
    }

    pub fn find(&self, name: &str) -> Option<Cell> {
        (-1..=self.top_dim()).flat_map(|d| self.cells(d)).find(|&c| self.name(c) == name)
    }

    pub fn find_vertices(&self, vertices: &[u32]) -> Option<Cell> {
        let dim = vertices.len() as i32 - 1;
        self.cells(dim).into_iter().find(|&c| self.data(c).vertices.as_deref() == Some(vertices))
    }

    /// `d_i`, or `None` when it is the basepoint.
    pub fn face(&self, c: Cell, i: usize) -> Option<Cell> {
        self.data(c).faces[i].map(|index| Cell { dim: c.dim - 1, index })
    }

    /// Removes the vertex positions `positions` (sorted, in `0..=dim`), largest first.
    pub fn face_set(&self, c: Cell, positions: &[u32]) -> Option<Cell> {
        let mut cur = c;
        for &p in positions.iter().rev() {
            cur = self.face(cur, p as usize)?;
        }
        Some(cur)
    }

    /// The face spanned by the kept positions `keep` (sorted).
    pub fn face_keep(&self, c: Cell, keep: &[u32]) -> Option<Cell> {
        let removed = complement(keep, c.dim);
        self.face_set(c, &removed)
    }

    pub fn boundary(&self, c: Cell) -> Chain<Cell> {
        if c.dim < 0 {
            return Chain::zero();
        }
        let mut out = Chain::zero();
        for i in 0..=(c.dim as usize) {
            if let Some(f) = self.face(c, i) {
                out.add_term(f, coeff(sign_of(i as i64)));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimplicialError> {
        for dim in 0..=self.top_dim() {
            for c in self.cells(dim) {
                let d = self.data(c);
                if d.faces.len() != (dim + 1) as usize {
                    return Err(SimplicialError::FaceCount { cell: d.name.clone(), dim, got: d.faces.len() });
                }
                for f in d.faces.iter().flatten() {
                    if *f as usize >= self.count(dim - 1) {
                        return Err(SimplicialError::FaceDimension {
                            cell: d.name.clone(),
                            face: f.to_string(),
                        });
                    }
                }
                for j in 0..=(dim as usize) {
                    for i in 0..j {
                        let lhs = self.face(c, j).and_then(|x| self.face(x, i));
                        let rhs = self.face(c, i).and_then(|x| self.face(x, j - 1));
                        if lhs != rhs {
                            return Err(SimplicialError::Identity { cell: d.name.clone(), i, j });
                        }
                    }
                }
            }
        }
        if !self.pointed && self.count(-1) == 0 && self.top_dim() >= 0 {
            return Err(SimplicialError::Malformed("empty (-1) layer on an unpointed set".into()));
        }
        Ok(())
    }

    fn from_vertex_sets(sets: BTreeSet<Vec<u32>>) -> Self {
        let top = sets.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut layers: Vec<Vec<Vec<u32>>> = vec![vec![]; top + 1];
        for s in sets {
            layers[s.len()].push(s);
        }
        for l in &mut layers {
            l.sort();
        }
        let index: Vec<HashMap<Vec<u32>, u32>> = layers
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect())
            .collect();
        let layers = layers
            .iter()
            .enumerate()
            .map(|(k, l)| {
                l.iter()
                    .map(|s| CellData {
                        name: format!("{s:?}").replace(' ', ""),
                        faces: if k == 0 {
                            vec![]
                        } else {
                            (0..s.len())
                                .map(|i| {
                                    let mut f = s.clone();
                                    f.remove(i);
                                    Some(index[k - 1][&f])
                                })
                                .collect()
                        },
                        vertices: Some(s.clone()),
                    })
                    .collect()
            })
            .collect();
        AugSimplicialSet { layers, pointed: false }
    }

    /// Closure of a facet list, augmented by the terminal object.
    pub fn from_facets(facets: &[Vec<u32>]) -> Self {
        let mut sets = BTreeSet::new();
        sets.insert(vec![]);
        for f in facets {
            let mut f = f.clone();
            f.sort();
            f.dedup();
            for mask in 0u64..(1 << f.len()) {
                sets.insert(
                    f.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect(),
                );
            }
        }
        Self::from_vertex_sets(sets)
    }

    /// The augmented standard simplex Δ^n_+.
    pub fn simplex(n: u32) -> Self {
        Self::from_facets(&[(0..=n).collect()])
    }

    /// The boundary ∂Δ^n_+ (augmented).
    pub fn simplex_boundary(n: u32) -> Self {
        let facets: Vec<Vec<u32>> = (0..=n).map(|i| (0..=n).filter(|&v| v != i).collect()).collect();
        Self::from_facets(&facets)
    }

    /// The six-vertex triangulation of the real projective plane.
    pub fn rp2() -> Self {
        let facets = [
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 1, 5],
            [1, 2, 4],
            [2, 3, 5],
            [1, 3, 4],
            [1, 3, 5],
            [2, 4, 5],
        ];
        Self::from_facets(&facets.iter().map(|f| f.to_vec()).collect::<Vec<_>>())
    }

    /// Named builders: `simplex(n)`, `boundary(n)`, `rp2`, `circle`.
    pub fn builder(spec: &str) -> Result<Self, SimplicialError> {
        let spec = spec.trim();
        let arg = |prefix: &str| -> Option<u32> {
            spec.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.trim().parse().ok()
        };
        if let Some(n) = arg("simplex") {
            return Ok(Self::simplex(n));
        }
        if let Some(n) = arg("boundary") {
            return Ok(Self::simplex_boundary(n));
        }
        match spec {
            "rp2" | "RP2" => Ok(Self::rp2()),
            "circle" => Ok(Self::simplex_boundary(2)),
            _ => Err(SimplicialError::UnknownBuilder(spec.into())),
        }
    }

    /// Left suspension: cells `Σ'σ` of dimension `dim σ + 1` with `d_0 Σ'σ = *` and
    /// `d_{i+1} Σ'σ = Σ' d_i σ`.
    pub fn left_suspension(&self) -> Self {
        self.suspension(true)
    }

    /// Right suspension: `d_{m+1} Σσ = *` and `d_i Σσ = Σ d_i σ` for `i ≤ m`.
    pub fn right_suspension(&self) -> Self {
        self.suspension(false)
    }

    fn suspension(&self, left: bool) -> Self {
        let mut layers = vec![vec![]];
        for k in 0..self.layers.len() {
            let layer = self.layers[k]
                .iter()
                .map(|d| {
                    let mut faces: Vec<Option<u32>> = d.faces.clone();
                    if left {
                        faces.insert(0, None);
                    } else {
                        faces.push(None);
                    }
                    CellData {
                        name: format!("{}({})", if left { "L" } else { "R" }, d.name),
                        faces,
                        vertices: None,
                    }
                })
                .collect();
            layers.push(layer);
        }
        AugSimplicialSet { layers, pointed: true }
    }

    /// The suspended cell corresponding to `c`.
    pub fn suspended(c: Cell) -> Cell {
        Cell { dim: c.dim + 1, index: c.index }
    }

    pub fn from_json(text: &str) -> Result<Self, SimplicialError> {
        let desc: ComplexDescription =
            serde_json::from_str(text).map_err(|e| SimplicialError::Malformed(e.to_string()))?;
        desc.build()
    }
}

/// JSON description of a complex: explicit cells and faces, a facet list, or a named builder.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDescription {
    #[serde(default)]
    pub dims: Option<BTreeMap<i32, Vec<String>>>,
    #[serde(default)]
    pub faces: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    pub pointed: bool,
    #[serde(default)]
    pub facets: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    pub builder: Option<String>,
}

pub const BASEPOINT: &str = "*";

impl ComplexDescription {
    pub fn build(&self) -> Result<AugSimplicialSet, SimplicialError> {
        if let Some(b) = &self.builder {
            return AugSimplicialSet::builder(b);
        }
        if let Some(f) = &self.facets {
            return Ok(AugSimplicialSet::from_facets(f));
        }
        let dims = self
            .dims
            .as_ref()
            .ok_or_else(|| SimplicialError::Malformed("expected one of dims, facets or builder".into()))?;
        let faces = self.faces.clone().unwrap_or_default();
        let top = dims.keys().copied().max().unwrap_or(-1);
        let augment = !self.pointed && dims.get(&-1).is_none_or(|l| l.is_empty());
        let mut layers: Vec<Vec<CellData>> = vec![vec![]; (top + 2).max(1) as usize];
        let mut index: HashMap<String, (i32, u32)> = HashMap::new();
        if augment {
            layers[0].push(CellData { name: "()".into(), faces: vec![], vertices: None });
            index.insert("()".into(), (-1, 0));
        }
        for (&dim, ids) in dims {
            if dim < -1 {
                return Err(SimplicialError::Malformed(format!("dimension {dim}")));
            }
            for id in ids {
                if id == BASEPOINT || index.contains_key(id) {
                    return Err(SimplicialError::Malformed(format!("duplicate or reserved cell id {id}")));
                }
                let k = (dim + 1) as usize;
                index.insert(id.clone(), (dim, layers[k].len() as u32));
                layers[k].push(CellData { name: id.clone(), faces: vec![], vertices: None });
            }
        }
        for (&dim, ids) in dims {
            for id in ids {
                let (_, ix) = index[id];
                let fs: Vec<String> = match faces.get(id) {
                    Some(f) => f.clone(),
                    None if dim == 0 && augment => vec!["()".into()],
                    None if dim == -1 => vec![],
                    None => return Err(SimplicialError::Malformed(format!("no faces given for {id}"))),
                };
                if fs.len() != (dim + 1) as usize {
                    return Err(SimplicialError::FaceCount { cell: id.clone(), dim, got: fs.len() });
                }
                let mut out = vec![];
                for f in fs {
                    if f == BASEPOINT {
                        if !self.pointed {
                            return Err(SimplicialError::Malformed(format!("basepoint face on unpointed {id}")));
                        }
                        out.push(None);
                        continue;
                    }
                    let &(fd, fi) = index.get(&f).ok_or_else(|| SimplicialError::UnknownCell(f.clone()))?;
                    if fd != dim - 1 {
                        return Err(SimplicialError::FaceDimension { cell: id.clone(), face: f });
                    }
                    out.push(Some(fi));
                }
                layers[(dim + 1) as usize][ix as usize].faces = out;
            }
        }
        let x = AugSimplicialSet { layers, pointed: self.pointed };
        x.validate()?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[u32], n: i32) -> Simplex {
        Simplex::new(v.to_vec(), n)
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_sign(&[0, 1], &[2, 3]), Ok(false));
        assert_eq!(lambda_sign(&[0, 2], &[1, 3]), Ok(true));
        assert!(lambda_sign(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn join_examples() {
        assert_eq!(join(&s(&[], 3), &s(&[0, 2], 3)), Chain::unit(s(&[0, 2], 3)));
        assert_eq!(join(&s(&[0, 2], 3), &s(&[1, 3], 3)), Chain::term(s(&[0, 1, 2, 3], 3), coeff(-1)));
        assert!(join(&s(&[0], 3), &s(&[0, 1], 3)).is_zero());
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(alexander_dual(&Simplex::top(4)), (1, Dual(Simplex::empty(4))));
        assert_eq!(alexander_dual(&s(&[0, 2], 3)), (-1, Dual(s(&[1, 3], 3))));
    }

    #[test]
    fn lambda_closed_forms_agree() {
        for n in 0..=6 {
            for t in Simplex::all(n) {
                let c = t.complement();
                let l = lambda(&t.vertices, &c.vertices);
                assert_eq!(l, lambda_complement_closed_form(&t), "{t:?}");
                assert_eq!(l, lambda_complement_closed_form_dual(&t), "{t:?}");
            }
        }
    }

    #[test]
    fn alexander_duality_is_a_chain_isomorphism() {
        // Λ lands in the (n+1)-fold left suspension, whose differential carries (-1)^{n+1}.
        for n in 0..=3 {
            for t in Simplex::all(n) {
                let lhs = t.boundary().map_linear(|x| {
                    let (sg, d) = alexander_dual(x);
                    Chain::term(d, coeff(sg))
                });
                let (sg, d) = alexander_dual(&t);
                let rhs = dual_boundary(&d).scaled(coeff(sg * sign_of(n as i64 + 1)));
                assert_eq!(lhs, rhs, "n={n} t={t:?}");
            }
        }
    }

    #[test]
    fn poincare_duality() {
        for n in [0, 2, 4] {
            let rep = poincare_pairing_check(n);
            assert!(rep.passed, "{rep:?}");
        }
        assert_eq!(poincare_pairing_check(0).nondegenerate.len(), 2);
    }

    #[test]
    fn coface_of_empty_in_minus_one() {
        assert_eq!(coface_dual(&[], -1, 0), Ok((1, vec![0])));
        assert!(coface_dual(&[0], 0, 2).is_err());
    }

    #[test]
    fn coface_reduction_reproduces_alexander_path() {
        // (0,6) ⊗ [0..7] ↦ -[1,2,3,4,5,7]
        assert_eq!(dual_face_sign_via_cofaces(&[0, 6], 7), -1);
        assert_eq!(dual_face_sign(&[0, 6], 7), -1);
        for n in 0..=5 {
            for u in Simplex::all(n) {
                assert_eq!(dual_face_sign_via_cofaces(&u.vertices, n), dual_face_sign(&u.vertices, n));
            }
        }
    }

    #[test]
    fn cosimplicial_identities() {
        for n in -1..=3 {
            for u in Simplex::all(n) {
                for j in 0..=(n + 2) as u32 {
                    for i in 0..j {
                        let (a, x) = coface_dual(&u.vertices, n, i).unwrap();
                        let (b, lhs) = coface_dual(&x, n + 1, j).unwrap();
                        let (c, y) = coface_dual(&u.vertices, n, j - 1).unwrap();
                        let (d, rhs) = coface_dual(&y, n + 1, i).unwrap();
                        assert_eq!(lhs, rhs);
                        assert_eq!(a * b, c * d, "n={n} u={u:?} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn builders() {
        let b3 = AugSimplicialSet::builder("boundary(3)").unwrap();
        assert_eq!((b3.count(-1), b3.count(0), b3.count(1), b3.count(2), b3.count(3)), (1, 4, 6, 4, 0));
        let circle = AugSimplicialSet::from_facets(&[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!((circle.count(0), circle.count(1)), (3, 3));
        let rp2 = AugSimplicialSet::rp2();
        assert_eq!((rp2.count(0), rp2.count(1), rp2.count(2)), (6, 15, 10));
        for x in [&b3, &circle, &rp2] {
            x.validate().unwrap();
        }
    }

    #[test]
    fn json_ingestion() {
        let x = AugSimplicialSet::from_json(
            r#"{"dims": {"0": ["a", "b"], "1": ["e"]}, "faces": {"e": ["b", "a"]}}"#,
        )
        .unwrap();
        assert_eq!(x.count(-1), 1);
        let e = x.find("e").unwrap();
        assert_eq!(x.boundary(e), Chain::unit(x.find("b").unwrap()) - Chain::unit(x.find("a").unwrap()));
        let bad = AugSimplicialSet::from_json(
            r#"{"dims": {"0": ["a", "b"], "1": ["e", "f"], "2": ["t"]},
                "faces": {"e": ["b", "a"], "f": ["b", "a"], "t": ["e", "f", "e"]}}"#,
        );
        assert!(matches!(bad, Err(SimplicialError::Identity { .. })), "{bad:?}");
        let f = AugSimplicialSet::from_json(r#"{"facets": [[0,1],[1,2],[0,2]]}"#).unwrap();
        assert_eq!(f.count(1), 3);
        let b = AugSimplicialSet::from_json(r#"{"builder": "boundary(2)"}"#).unwrap();
        assert_eq!(b.count(0), 3);
    }

    #[test]
    fn suspensions_are_valid() {
        let x = AugSimplicialSet::simplex(2);
        for s in [x.left_suspension(), x.right_suspension()] {
            s.validate().unwrap();
            assert_eq!(s.count(-1), 0);
            assert_eq!(s.count(3), 1);
        }
    }

    #[test]
    fn boundary_squares_to_zero() {
        let x = AugSimplicialSet::rp2();
        for c in x.all_cells() {
            assert!(x.boundary(c).map_linear(|f| x.boundary(*f)).is_zero());
        }
    }
}
