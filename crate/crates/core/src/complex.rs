//! Oriented simplicial complexes, integer chains and boundary operators.
//!
//! Every simplex is stored as a strictly increasing tuple of vertex indices,
//! which is also its canonical orientation. Within each dimension simplices
//! are sorted lexicographically, so indices are reproducible for a given set
//! of simplices regardless of the order they were supplied in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("degenerate simplex {0:?} (repeated vertex)")]
    DegenerateSimplex(Vec<usize>),
    #[error("vertex index {vertex} out of range (vertex count {count})")]
    IndexOutOfRange { vertex: usize, count: usize },
    #[error("dimension {dim} out of range for complex of top dimension {top}")]
    DimensionOutOfRange { dim: usize, top: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("simplex index {index} out of range in dimension {dim}")]
    SimplexIndexOutOfRange { dim: usize, index: usize },
    #[error("negative weight {value} at simplex {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight vector has length {found}, expected {expected}")]
    WeightLength { expected: usize, found: usize },
    #[error("ambient dimension {ambient} is smaller than top simplex dimension {top}")]
    AmbientTooSmall { ambient: usize, top: usize },
    #[error("coordinates have inconsistent dimensions")]
    RaggedCoordinates,
    #[error("operation requires vertex coordinates")]
    MissingCoordinates,
    #[error("complex has no simplices")]
    Empty,
    #[error("midpoint subdivision supports simplices up to dimension 3, found {0}")]
    SubdivisionUnsupported(usize),
}

/// Sorts a vertex tuple and returns it with the sign of the sorting permutation.
///
/// Returns `None` when the tuple repeats a vertex.
pub fn canonical_orientation(tuple: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut sorted = tuple.to_vec();
    // bubble sort keeps track of the transposition parity
    let mut sign = 1i64;
    for i in 0..sorted.len() {
        for j in 0..sorted.len() - 1 - i {
            if sorted[j] > sorted[j + 1] {
                sorted.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sorted, sign))
}

/// An immutable finite simplicial complex, closed under taking faces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    coords: Option<Vec<Vec<f64>>>,
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Builds the closure of `top_simplices`.
    ///
    /// With coordinates, every point becomes a vertex (even if no simplex
    /// references it) and the embedding dimension must be at least the top
    /// simplex dimension. Without coordinates the vertex set is
    /// `0..=max index`.
    pub fn build(
        top_simplices: &[Vec<usize>],
        coords: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, ComplexError> {
        let vertex_count = match &coords {
            Some(points) => {
                if let Some(first) = points.first() {
                    if points.iter().any(|p| p.len() != first.len()) {
                        return Err(ComplexError::RaggedCoordinates);
                    }
                }
                points.len()
            }
            None => top_simplices
                .iter()
                .flat_map(|s| s.iter().copied())
                .max()
                .map_or(0, |m| m + 1),
        };
        if vertex_count == 0 {
            return Err(ComplexError::Empty);
        }

        let mut sets: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new()];
        for v in 0..vertex_count {
            sets[0].insert(vec![v]);
        }
        for tuple in top_simplices {
            if let Some(&bad) = tuple.iter().find(|&&v| v >= vertex_count) {
                return Err(ComplexError::IndexOutOfRange { vertex: bad, count: vertex_count });
            }
            let (sorted, _) = canonical_orientation(tuple)
                .ok_or_else(|| ComplexError::DegenerateSimplex(tuple.clone()))?;
            if sorted.is_empty() {
                continue;
            }
            insert_with_faces(&mut sets, sorted);
        }

        let top = sets.len() - 1;
        if let Some(points) = &coords {
            let ambient = points[0].len();
            if ambient < top {
                return Err(ComplexError::AmbientTooSmall { ambient, top });
            }
        }

        let simplices: Vec<Vec<Vec<usize>>> =
            sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let lookup = simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(Self { coords, simplices, lookup })
    }

    /// Top dimension `p`.
    pub fn top_dim(&self) -> usize {
        self.simplices.len() - 1
    }

    /// Embedding dimension `q`, if coordinates are present.
    pub fn ambient_dim(&self) -> Option<usize> {
        self.coords.as_ref().map(|c| c[0].len())
    }

    pub fn vertex_count(&self) -> usize {
        self.simplices[0].len()
    }

    /// Number of simplices of dimension `dim` (zero above the top dimension).
    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, Vec::len)
    }

    pub fn simplices(&self, dim: usize) -> &[Vec<usize>] {
        self.simplices.get(dim).map_or(&[], |v| v.as_slice())
    }

    pub fn simplex(&self, dim: usize, index: usize) -> &[usize] {
        &self.simplices[dim][index]
    }

    /// Index of a canonical (strictly increasing) vertex tuple.
    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.is_empty() {
            return None;
        }
        self.lookup.get(tuple.len() - 1)?.get(tuple).copied()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn point(&self, vertex: usize) -> Result<&[f64], ComplexError> {
        self.coords
            .as_ref()
            .map(|c| c[vertex].as_slice())
            .ok_or(ComplexError::MissingCoordinates)
    }

    /// Coordinates of the vertices of a simplex.
    pub fn simplex_points(&self, dim: usize, index: usize) -> Result<Vec<&[f64]>, ComplexError> {
        let coords = self.coords.as_ref().ok_or(ComplexError::MissingCoordinates)?;
        Ok(self.simplices[dim][index].iter().map(|&v| coords[v].as_slice()).collect())
    }

    /// Faces of a simplex with their incidence signs: deleting the vertex at
    /// position `i` gives a face with sign `(-1)^i`.
    pub fn signed_faces(&self, dim: usize, index: usize) -> Vec<(usize, i8)> {
        if dim == 0 {
            return Vec::new();
        }
        let simplex = &self.simplices[dim][index];
        (0..simplex.len())
            .map(|i| {
                let mut face = simplex.clone();
                face.remove(i);
                let face_index = self.lookup[dim - 1][&face];
                (face_index, if i % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    /// For every `dim`-simplex, the `(dim+1)`-simplices having it as a face.
    pub fn cofaces(&self, dim: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count(dim)];
        for j in 0..self.count(dim + 1) {
            for (i, _) in self.signed_faces(dim + 1, j) {
                out[i].push(j);
            }
        }
        out
    }

    /// Simplices that are not a face of any other simplex, lowest dimension first.
    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for dim in 0..=self.top_dim() {
            let cofaces = self.cofaces(dim);
            for (i, c) in cofaces.iter().enumerate() {
                if c.is_empty() {
                    out.push(self.simplices[dim][i].clone());
                }
            }
        }
        out
    }

    /// True if every simplex of dimension below `dim` is a face of some `dim`-simplex.
    pub fn is_pure(&self, dim: usize) -> bool {
        if self.top_dim() != dim {
            return false;
        }
        (0..dim).all(|l| self.cofaces(l).iter().all(|c| !c.is_empty()))
    }

    /// The `(d+1)`-boundary matrix `[∂_{d+1}]`: rows are `d`-simplices,
    /// columns are `(d+1)`-simplices.
    pub fn boundary_matrix(&self, d: usize) -> Result<BoundaryMatrix, ComplexError> {
        if d >= self.top_dim() {
            return Err(ComplexError::DimensionOutOfRange { dim: d, top: self.top_dim() });
        }
        let columns = (0..self.count(d + 1))
            .map(|j| {
                let mut col = self.signed_faces(d + 1, j);
                col.sort_unstable();
                col
            })
            .collect();
        Ok(BoundaryMatrix { face_dim: d, rows: self.count(d), columns })
    }

    /// Validates and builds a chain from `(simplex index, coefficient)` pairs.
    /// Repeated indices are summed.
    pub fn chain(&self, dim: usize, pairs: &[(usize, i64)]) -> Result<Chain, ComplexError> {
        if dim > self.top_dim() {
            return Err(ComplexError::DimensionOutOfRange { dim, top: self.top_dim() });
        }
        let count = self.count(dim);
        if let Some(&(index, _)) = pairs.iter().find(|(i, _)| *i >= count) {
            return Err(ComplexError::SimplexIndexOutOfRange { dim, index });
        }
        Ok(Chain::from_pairs(dim, pairs.iter().copied()))
    }

    /// Midpoint subdivision: edges split in two, triangles 4-to-1,
    /// tetrahedra 8-to-1 (inner octahedron cut along its shortest diagonal).
    /// Original vertices keep their indices; edge midpoints follow in edge order.
    pub fn midpoint_subdivision(&self) -> Result<Self, ComplexError> {
        let coords = self.coords.as_ref().ok_or(ComplexError::MissingCoordinates)?;
        if self.top_dim() > 3 {
            return Err(ComplexError::SubdivisionUnsupported(self.top_dim()));
        }
        let nv = self.vertex_count();
        let mut points = coords.clone();
        for edge in self.simplices(1) {
            let (a, b) = (&coords[edge[0]], &coords[edge[1]]);
            points.push(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect());
        }
        let mid = |u: usize, v: usize| -> usize {
            let key = if u < v { [u, v] } else { [v, u] };
            nv + self.lookup[1][&key[..]]
        };

        let mut tops: Vec<Vec<usize>> = Vec::new();
        for simplex in self.maximal_simplices() {
            match simplex.len() {
                1 => tops.push(simplex),
                2 => {
                    let m = mid(simplex[0], simplex[1]);
                    tops.push(vec![simplex[0], m]);
                    tops.push(vec![m, simplex[1]]);
                }
                3 => {
                    let [a, b, c] = [simplex[0], simplex[1], simplex[2]];
                    let (ab, ac, bc) = (mid(a, b), mid(a, c), mid(b, c));
                    tops.extend([vec![a, ab, ac], vec![b, ab, bc], vec![c, ac, bc], vec![ab, ac, bc]]);
                }
                4 => {
                    let v = [simplex[0], simplex[1], simplex[2], simplex[3]];
                    let m = |i: usize, j: usize| mid(v[i], v[j]);
                    // corner tetrahedra
                    for i in 0..4 {
                        let others: Vec<usize> = (0..4).filter(|&j| j != i).map(|j| m(i, j)).collect();
                        tops.push(vec![v[i], others[0], others[1], others[2]]);
                    }
                    // inner octahedron: opposite midpoint pairs are (01,23), (02,13), (03,12)
                    let pairs = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
                    let dist = |p: usize, q: usize| -> f64 {
                        points[p].iter().zip(&points[q]).map(|(x, y)| (x - y) * (x - y)).sum()
                    };
                    let mut best = 0;
                    let mut best_len = f64::INFINITY;
                    for (k, ((a, b), (c, d))) in pairs.iter().enumerate() {
                        let len = dist(m(*a, *b), m(*c, *d));
                        if len < best_len - 1e-12 * len.abs().max(1.0) {
                            best_len = len;
                            best = k;
                        }
                    }
                    let ((a, b), (c, d)) = pairs[best];
                    let (p, q) = (m(a, b), m(c, d));
                    // the equator is the cycle through the other four midpoints
                    let (e1, e2) = (pairs[(best + 1) % 3], pairs[(best + 2) % 3]);
                    let ring = [m(e1.0 .0, e1.0 .1), m(e2.0 .0, e2.0 .1), m(e1.1 .0, e1.1 .1), m(e2.1 .0, e2.1 .1)];
                    for i in 0..4 {
                        tops.push(vec![p, q, ring[i], ring[(i + 1) % 4]]);
                    }
                }
                n => return Err(ComplexError::SubdivisionUnsupported(n - 1)),
            }
        }
        Self::build(&tops, Some(points))
    }
}

fn insert_with_faces(sets: &mut Vec<BTreeSet<Vec<usize>>>, simplex: Vec<usize>) {
    let dim = simplex.len() - 1;
    while sets.len() <= dim {
        sets.push(BTreeSet::new());
    }
    if sets[dim].contains(&simplex) {
        return;
    }
    if dim > 0 {
        for i in 0..simplex.len() {
            let mut face = simplex.clone();
            face.remove(i);
            insert_with_faces(sets, face);
        }
    }
    sets[dim].insert(simplex);
}

/// A sparse integer chain over the elementary simplices of one dimension.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Chain {
    dim: usize,
    coeffs: BTreeMap<usize, i64>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut chain = Self::zero(dim);
        for (i, c) in pairs {
            chain.add_to(i, c);
        }
        chain
    }

    pub fn from_dense(dim: usize, values: &[i64]) -> Self {
        Self::from_pairs(dim, values.iter().copied().enumerate())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, index: usize) -> i64 {
        self.coeffs.get(&index).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().map(|(&i, &c)| (i, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of nonzero coefficients.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add_to(&mut self, index: usize, value: i64) {
        if value == 0 {
            return;
        }
        let entry = self.coeffs.entry(index).or_insert(0);
        *entry += value;
        if *entry == 0 {
            self.coeffs.remove(&index);
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<i64> {
        let mut out = vec![0; len];
        for (i, c) in self.iter() {
            out[i] = c;
        }
        out
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> i64 {
        self.coeffs.values().map(|c| c.abs()).sum()
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        assert_eq!(self.dim, rhs.dim, "adding chains of different dimension");
        let mut out = self.clone();
        for (i, c) in rhs.iter() {
            out.add_to(i, c);
        }
        out
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self + &(-rhs)
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        Chain { dim: self.dim, coeffs: self.coeffs.iter().map(|(&i, &c)| (i, -c)).collect() }
    }
}

/// Sparse `{-1, 0, +1}` boundary matrix stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    face_dim: usize,
    rows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    /// Builds a matrix directly from columns; used for tests and for matrices
    /// that do not come from a complex.
    pub fn from_columns(face_dim: usize, rows: usize, columns: Vec<Vec<(usize, i8)>>) -> Self {
        Self { face_dim, rows, columns }
    }

    /// Dimension `d` of the row simplices.
    pub fn face_dim(&self) -> usize {
        self.face_dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    /// All nonzero entries as `(row, col, sign)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, s)| (i, j, s)))
    }

    /// Row-major view: for every row, its `(col, sign)` entries.
    pub fn row_entries(&self) -> Vec<Vec<(usize, i8)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (i, j, s) in self.entries() {
            rows[i].push((j, s));
        }
        rows
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; self.cols()]; self.rows];
        for (i, j, s) in self.entries() {
            out[i][j] = i64::from(s);
        }
        out
    }

    /// Exact sparse product `B·s` for a `(d+1)`-chain `s`.
    pub fn apply(&self, s: &Chain) -> Result<Chain, ComplexError> {
        if s.dim() != self.face_dim + 1 {
            return Err(ComplexError::DimensionMismatch { expected: self.face_dim + 1, found: s.dim() });
        }
        let mut out = Chain::zero(self.face_dim);
        for (j, c) in s.iter() {
            let col = self
                .columns
                .get(j)
                .ok_or(ComplexError::SimplexIndexOutOfRange { dim: s.dim(), index: j })?;
            for &(i, sign) in col {
                out.add_to(i, c * i64::from(sign));
            }
        }
        Ok(out)
    }
}

/// Weighted mass `Σ w_i |c_i|`.
pub fn chain_mass(chain: &Chain, weights: &[f64]) -> Result<f64, ComplexError> {
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
        return Err(ComplexError::NegativeWeight { index, value });
    }
    if let Some(max) = chain.max_index() {
        if max >= weights.len() {
            return Err(ComplexError::WeightLength { expected: max + 1, found: weights.len() });
        }
    }
    Ok(chain.iter().map(|(i, c)| weights[i] * c.unsigned_abs() as f64).sum())
}
