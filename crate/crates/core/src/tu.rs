//! Total unimodularity certificates for boundary matrices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{BoundaryMatrix, SimplicialComplex};

pub const DEFAULT_SIZE_CAP: usize = 12;
pub const DEFAULT_CYCLE_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TuError {
    #[error("Möbius detection works on triangles only (d = 1), got d = {0}")]
    WrongDimension(usize),
    #[error("matrix is {rows}x{cols}, above the brute-force cap {cap}")]
    SizeCapExceeded { rows: usize, cols: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "TU")]
    Tu,
    #[serde(rename = "NotTU")]
    NotTu,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TuReason {
    OrientableManifold,
    CodimOneEmbedded,
    NoMoebius,
    BruteForce,
    /// Cyclic strip of triangles with orientation-reversing holonomy.
    /// `edges[i]` is shared by `triangles[i]` and `triangles[i + 1]`
    /// (cyclically); `det` is the determinant of that square submatrix.
    MoebiusFound { triangles: Vec<usize>, edges: Vec<usize>, det: i128 },
    SubdeterminantWitness { rows: Vec<usize>, cols: Vec<usize>, det: i128 },
    /// No applicable test settled the question.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuCertificate {
    pub verdict: Verdict,
    pub reason: TuReason,
}

impl TuCertificate {
    fn tu(reason: TuReason) -> Self {
        Self { verdict: Verdict::Tu, reason }
    }

    fn unknown() -> Self {
        Self { verdict: Verdict::Unknown, reason: TuReason::Inconclusive }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TuHints {
    /// Caller asserts the complex is geometrically embedded in `R^{d+1}`.
    pub embedded_codim_one: bool,
}

/// Union-find over `±1` labels: `union(a, b, p)` records `label(a)·label(b) = p`.
#[derive(Debug, Clone)]
pub struct ParityUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    // parity relative to the parent, 0 for equal labels
    parity: Vec<u8>,
}

impl ParityUnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n], parity: vec![0; n] }
    }

    pub fn find(&mut self, x: usize) -> (usize, u8) {
        let mut path = Vec::new();
        let mut v = x;
        while self.parent[v] != v {
            path.push(v);
            v = self.parent[v];
        }
        let root = v;
        // compress from the top so each parity is already relative to root
        let mut acc = 0;
        for &u in path.iter().rev() {
            acc ^= self.parity[u];
            self.parity[u] = acc;
            self.parent[u] = root;
        }
        (root, if path.is_empty() { 0 } else { self.parity[x] })
    }

    /// False when the relation contradicts earlier ones.
    pub fn union(&mut self, a: usize, b: usize, same: bool) -> bool {
        let want = u8::from(!same);
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == want;
        }
        let (big, small) = if self.rank[ra] >= self.rank[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.parity[small] = pa ^ pb ^ want;
        if self.rank[big] == self.rank[small] {
            self.rank[big] += 1;
        }
        true
    }

    /// `+1` or `-1` label of `x` relative to its component root.
    pub fn sign(&mut self, x: usize) -> i8 {
        if self.find(x).1 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Column signs `σ` such that every row of `B·diag(σ)` with two nonzeros
/// has one `+1` and one `-1`. None if some row has three or more nonzeros
/// or no such signs exist. Such a matrix is the transpose of a directed
/// graph's incidence matrix, hence TU.
pub fn network_column_signs(b: &BoundaryMatrix) -> Option<Vec<i8>> {
    let mut uf = ParityUnionFind::new(b.cols());
    for row in b.row_entries() {
        match row.as_slice() {
            [] | [_] => {}
            [(ja, sa), (jb, sb)] => {
                if !uf.union(*ja, *jb, sa * sb < 0) {
                    return None;
                }
            }
            _ => return None,
        }
    }
    Some((0..b.cols()).map(|j| uf.sign(j)).collect())
}

/// Pure `(d+1)`-complex in which every `d`-simplex has at most two cofaces
/// and the top simplices can be oriented coherently.
pub fn check_orientable_manifold(k: &SimplicialComplex, d: usize) -> bool {
    if !k.is_pure(d + 1) {
        return false;
    }
    match k.boundary_matrix(d) {
        Ok(b) => network_column_signs(&b).is_some(),
        Err(_) => false,
    }
}

/// Fraction-free determinant of an integer square matrix.
pub fn bareiss_determinant(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn submatrix_det(dense: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i128 {
    bareiss_determinant(rows.iter().map(|&i| cols.iter().map(|&j| i128::from(dense[i][j])).collect()).collect())
}

/// Next k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Exhaustive subdeterminant test on a dense integer matrix.
///
/// Square submatrices having a row or column with at most one nonzero are
/// skipped: their determinant is a smaller subdeterminant (up to sign) or the
/// single entry, which are examined on their own.
pub fn brute_force_tu_dense(dense: &[Vec<i64>], size_cap: usize) -> Result<TuCertificate, TuError> {
    let m = dense.len();
    let n = dense.first().map_or(0, Vec::len);
    if m.min(n) > size_cap {
        return Err(TuError::SizeCapExceeded { rows: m, cols: n, cap: size_cap });
    }
    for (i, row) in dense.iter().enumerate() {
        if let Some(j) = row.iter().position(|a| a.abs() >= 2) {
            return Ok(TuCertificate {
                verdict: Verdict::NotTu,
                reason: TuReason::SubdeterminantWitness { rows: vec![i], cols: vec![j], det: i128::from(dense[i][j]) },
            });
        }
    }
    for size in 2..=m.min(n) {
        let mut cols: Vec<usize> = (0..size).collect();
        loop {
            let candidates: Vec<usize> =
                (0..m).filter(|&i| cols.iter().filter(|&&j| dense[i][j] != 0).count() >= 2).collect();
            if candidates.len() >= size {
                let mut pick: Vec<usize> = (0..size).collect();
                loop {
                    let rows: Vec<usize> = pick.iter().map(|&p| candidates[p]).collect();
                    let dense_cols =
                        cols.iter().all(|&j| rows.iter().filter(|&&i| dense[i][j] != 0).count() >= 2);
                    if dense_cols {
                        let det = submatrix_det(dense, &rows, &cols);
                        if det.abs() >= 2 {
                            return Ok(TuCertificate {
                                verdict: Verdict::NotTu,
                                reason: TuReason::SubdeterminantWitness { rows, cols: cols.clone(), det },
                            });
                        }
                    }
                    if !next_combination(&mut pick, candidates.len()) {
                        break;
                    }
                }
            }
            if !next_combination(&mut cols, n) {
                break;
            }
        }
    }
    Ok(TuCertificate::tu(TuReason::BruteForce))
}

pub fn brute_force_tu(b: &BoundaryMatrix, size_cap: usize) -> Result<TuCertificate, TuError> {
    brute_force_tu_dense(&b.to_dense(), size_cap)
}

struct StripSearch<'a> {
    dense_sign: &'a dyn Fn(usize, usize) -> i8,
    tri_edges: &'a [Vec<usize>],
    edge_tris: &'a [Vec<usize>],
    budget: usize,
    steps: usize,
    tris: Vec<usize>,
    edges: Vec<usize>,
    on_path: Vec<bool>,
    edge_used: Vec<bool>,
}

enum Search {
    Found,
    Exhausted,
    OutOfBudget,
}

impl StripSearch<'_> {
    fn gluing(&self, e: usize, a: usize, b: usize) -> i8 {
        -(self.dense_sign)(e, a) * (self.dense_sign)(e, b)
    }

    fn contains_used_edge(&self, t: usize, except: usize) -> bool {
        self.tri_edges[t].iter().any(|&e| e != except && self.edge_used[e])
    }

    fn edge_in_path_triangle(&self, e: usize, skip_first: bool, skip_last: bool) -> bool {
        let len = self.tris.len();
        self.edge_tris[e].iter().any(|&t| {
            self.on_path[t] && !((skip_first && t == self.tris[0]) || (skip_last && t == self.tris[len - 1]))
        })
    }

    /// Extends the current path; `parity` is the product of gluing signs so far.
    fn extend(&mut self, parity: i8) -> Search {
        self.steps += 1;
        if self.steps > self.budget {
            return Search::OutOfBudget;
        }
        let start = self.tris[0];
        let last = *self.tris.last().expect("nonempty path");
        let last_edges = self.tri_edges[last].clone();
        for e in last_edges {
            if self.edge_used[e] {
                continue;
            }
            for &next in self.edge_tris[e].clone().iter() {
                if next == last || next < start {
                    continue;
                }
                let sign = parity * self.gluing(e, last, next);
                if next == start {
                    if self.tris.len() >= 3 && sign < 0 && !self.edge_in_path_triangle(e, true, true) {
                        self.edges.push(e);
                        return Search::Found;
                    }
                    continue;
                }
                if self.on_path[next] || self.edge_in_path_triangle(e, false, true) {
                    continue;
                }
                if self.contains_used_edge(next, usize::MAX) {
                    continue;
                }
                self.edges.push(e);
                self.edge_used[e] = true;
                self.tris.push(next);
                self.on_path[next] = true;
                match self.extend(sign) {
                    Search::Exhausted => {}
                    other => return other,
                }
                self.on_path[next] = false;
                self.tris.pop();
                self.edge_used[e] = false;
                self.edges.pop();
            }
        }
        Search::Exhausted
    }
}

/// Balance test of the signed dual graph of the triangles.
///
/// Adjacent triangles get sign `+1` when they induce opposite orientations on
/// their shared edge. When every edge lies in at most two triangles a
/// negative cycle is found by parity union-find. Otherwise a budgeted search
/// looks for a negative cycle of triangles whose shared edges are distinct
/// and lie in no other triangle of the cycle; its submatrix has determinant
/// `±2`. Exceeding the budget gives `Unknown`.
pub fn check_moebius_free(k: &SimplicialComplex, d: usize) -> Result<TuCertificate, TuError> {
    check_moebius_free_with_budget(k, d, DEFAULT_CYCLE_BUDGET)
}

pub fn check_moebius_free_with_budget(
    k: &SimplicialComplex,
    d: usize,
    budget: usize,
) -> Result<TuCertificate, TuError> {
    if d != 1 {
        return Err(TuError::WrongDimension(d));
    }
    if k.top_dim() < 2 || k.count(2) == 0 {
        return Ok(TuCertificate::tu(TuReason::NoMoebius));
    }
    let b = k.boundary_matrix(1).expect("triangles present");
    let tri_edges: Vec<Vec<usize>> = (0..b.cols()).map(|j| b.column(j).iter().map(|&(i, _)| i).collect()).collect();
    let edge_tris: Vec<Vec<usize>> = b.row_entries().into_iter().map(|r| r.into_iter().map(|(j, _)| j).collect()).collect();
    let sign_of = |e: usize, t: usize| -> i8 {
        b.column(t).iter().find(|&&(i, _)| i == e).map_or(0, |&(_, s)| s)
    };

    let witness = |triangles: Vec<usize>, edges: Vec<usize>| {
        let dense = b.to_dense();
        let det = submatrix_det(&dense, &edges, &triangles);
        debug_assert_eq!(det.abs(), 2);
        TuCertificate { verdict: Verdict::NotTu, reason: TuReason::MoebiusFound { triangles, edges, det } }
    };

    if edge_tris.iter().all(|t| t.len() <= 2) {
        let mut uf = ParityUnionFind::new(b.cols());
        let mut tree: Vec<Vec<(usize, usize)>> = vec![Vec::new(); b.cols()];
        for (e, ts) in edge_tris.iter().enumerate() {
            let [a, c] = ts.as_slice() else { continue };
            let opposite = sign_of(e, *a) * sign_of(e, *c) < 0;
            if uf.union(*a, *c, opposite) {
                tree[*a].push((*c, e));
                tree[*c].push((*a, e));
                continue;
            }
            // closing arc of a negative cycle: recover the tree path c -> a
            let mut prev = vec![None; b.cols()];
            let mut seen = vec![false; b.cols()];
            let mut queue = std::collections::VecDeque::from([*c]);
            seen[*c] = true;
            while let Some(u) = queue.pop_front() {
                if u == *a {
                    break;
                }
                for &(v, edge) in &tree[u] {
                    if !seen[v] {
                        seen[v] = true;
                        prev[v] = Some((u, edge));
                        queue.push_back(v);
                    }
                }
            }
            let mut triangles = vec![*a];
            let mut edges = Vec::new();
            let mut u = *a;
            while let Some((p, edge)) = prev[u] {
                edges.push(edge);
                triangles.push(p);
                u = p;
            }
            // triangles runs a .. c; the closing edge joins c back to a
            edges.push(e);
            return Ok(witness(triangles, edges));
        }
        return Ok(TuCertificate::tu(TuReason::NoMoebius));
    }

    let mut search = StripSearch {
        dense_sign: &sign_of,
        tri_edges: &tri_edges,
        edge_tris: &edge_tris,
        budget,
        steps: 0,
        tris: Vec::new(),
        edges: Vec::new(),
        on_path: vec![false; b.cols()],
        edge_used: vec![false; b.rows()],
    };
    for start in 0..b.cols() {
        search.tris = vec![start];
        search.edges.clear();
        search.on_path[start] = true;
        let outcome = search.extend(1);
        search.on_path[start] = false;
        match outcome {
            Search::Found => return Ok(witness(search.tris.clone(), search.edges.clone())),
            Search::OutOfBudget => return Ok(TuCertificate::unknown()),
            Search::Exhausted => {}
        }
    }
    Ok(TuCertificate::tu(TuReason::NoMoebius))
}

/// Layered certification: codimension-one hint, orientable manifold, Möbius
/// test (d ≤ 1), brute force within the cap, else `Unknown`.
pub fn certify(k: &SimplicialComplex, d: usize, hints: TuHints) -> TuCertificate {
    if d >= k.top_dim() {
        // no (d+1)-simplices: the matrix has no columns
        return TuCertificate::tu(TuReason::BruteForce);
    }
    if hints.embedded_codim_one && k.ambient_dim() == Some(d + 1) {
        return TuCertificate::tu(TuReason::CodimOneEmbedded);
    }
    if check_orientable_manifold(k, d) {
        return TuCertificate::tu(TuReason::OrientableManifold);
    }
    if d == 0 {
        // graph incidence matrices are TU; no 1-dimensional Möbius strip exists
        return TuCertificate::tu(TuReason::NoMoebius);
    }
    if d == 1 {
        if let Ok(cert) = check_moebius_free(k, d) {
            if cert.verdict != Verdict::Unknown {
                return cert;
            }
        }
    }
    let b = k.boundary_matrix(d).expect("d below top dimension");
    brute_force_tu(&b, DEFAULT_SIZE_CAP).unwrap_or_else(|_| TuCertificate::unknown())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(tris: &[[usize; 3]]) -> SimplicialComplex {
        let tops: Vec<Vec<usize>> = tris.iter().map(|t| t.to_vec()).collect();
        SimplicialComplex::build(&tops, None).unwrap()
    }

    fn moebius() -> SimplicialComplex {
        complex(&[[0, 1, 2], [1, 2, 3], [2, 3, 4], [3, 4, 0], [4, 0, 1]])
    }

    #[test]
    fn parity_union_find() {
        let mut uf = ParityUnionFind::new(4);
        assert!(uf.union(0, 1, false));
        assert!(uf.union(1, 2, false));
        assert!(uf.union(2, 0, true));
        assert!(!uf.union(0, 2, false));
        assert_eq!(uf.sign(0), -uf.sign(1));
        assert_eq!(uf.sign(0), uf.sign(2));
    }

    #[test]
    fn determinants() {
        assert_eq!(bareiss_determinant(vec![vec![2, 1], vec![1, 3]]), 5);
        assert_eq!(bareiss_determinant(vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(bareiss_determinant(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]), 2);
        assert_eq!(bareiss_determinant(vec![vec![1, 2], vec![2, 4]]), 0);
    }

    #[test]
    fn manifold_checks() {
        let sphere = complex(&[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]);
        assert!(check_orientable_manifold(&sphere, 1));
        assert!(!check_orientable_manifold(&moebius(), 1));
        assert!(check_orientable_manifold(&complex(&[[0, 1, 2], [0, 2, 3]]), 1));
        // the closed tetrahedron is not pure of dimension 2
        let solid = SimplicialComplex::build(&[vec![0, 1, 2, 3]], None).unwrap();
        assert!(!check_orientable_manifold(&solid, 1));
        assert!(check_orientable_manifold(&solid, 2));
    }

    #[test]
    fn moebius_detection() {
        let cert = check_moebius_free(&moebius(), 1).unwrap();
        assert_eq!(cert.verdict, Verdict::NotTu);
        match cert.reason {
            TuReason::MoebiusFound { triangles, edges, det } => {
                assert_eq!(triangles.len(), 5);
                assert_eq!(edges.len(), 5);
                assert_eq!(det.abs(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let two = complex(&[[0, 1, 2], [3, 4, 5]]);
        assert_eq!(check_moebius_free(&two, 1).unwrap().verdict, Verdict::Tu);
        assert_eq!(check_moebius_free(&two, 0), Err(TuError::WrongDimension(0)));
    }

    #[test]
    fn books_are_unimodular() {
        // three and four triangles on one edge: every row has many entries
        // but there is no strip
        for pages in [3, 4] {
            let tris: Vec<[usize; 3]> = (0..pages).map(|i| [0, 1, 2 + i]).collect();
            let k = complex(&tris);
            assert_eq!(check_moebius_free(&k, 1).unwrap().verdict, Verdict::Tu);
            assert_eq!(brute_force_tu(&k.boundary_matrix(1).unwrap(), 12).unwrap().verdict, Verdict::Tu);
        }
    }

    #[test]
    fn moebius_with_extra_page() {
        let mut tris = vec![[0, 1, 2], [1, 2, 3], [2, 3, 4], [0, 3, 4], [0, 1, 4]];
        tris.push([1, 2, 5]);
        let k = complex(&tris);
        let cert = check_moebius_free(&k, 1).unwrap();
        assert_eq!(cert.verdict, Verdict::NotTu);
        let brute = brute_force_tu(&k.boundary_matrix(1).unwrap(), 12).unwrap();
        assert_eq!(brute.verdict, Verdict::NotTu);
    }

    #[test]
    fn brute_force_cases() {
        let single = complex(&[[0, 1, 2]]);
        assert_eq!(brute_force_tu(&single.boundary_matrix(1).unwrap(), 12).unwrap().verdict, Verdict::Tu);
        let cert = brute_force_tu(&moebius().boundary_matrix(1).unwrap(), 12).unwrap();
        match cert.reason {
            TuReason::SubdeterminantWitness { det, .. } => assert!(det.abs() >= 2),
            other => panic!("unexpected {other:?}"),
        }
        let big = vec![vec![1i64; 14]; 14];
        assert!(matches!(brute_force_tu_dense(&big, 12), Err(TuError::SizeCapExceeded { .. })));
        assert_eq!(brute_force_tu_dense(&[vec![2]], 12).unwrap().verdict, Verdict::NotTu);
    }

    #[test]
    fn certify_layers() {
        let solid = SimplicialComplex::build(
            &[vec![0, 1, 2, 3], vec![1, 2, 3, 4]],
            Some(vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ]),
        )
        .unwrap();
        let hinted = certify(&solid, 2, TuHints { embedded_codim_one: true });
        assert_eq!(hinted.reason, TuReason::CodimOneEmbedded);
        let cert = certify(&moebius(), 1, TuHints::default());
        assert_eq!(cert.verdict, Verdict::NotTu);
        assert!(matches!(cert.reason, TuReason::MoebiusFound { .. }));
        assert_eq!(certify(&moebius(), 0, TuHints::default()).verdict, Verdict::Tu);
    }
}
