//! Mass bounds of the simplicial deformation, Sullivan's bounds for
//! comparison, and the center-projection retraction of piecewise-linear
//! curves onto the 1-skeleton.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Chain, ComplexError, SimplicialComplex};
use crate::geometry::{distance, regularity_report, simplex_geometry, AffineFrame, GeometryError, RegularityReport};

const BARY_TOL: f64 = 1e-9;
// smallest admissible value of the exit function along a pushed segment;
// below it the segment passes too close to the center
const CENTER_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformError {
    #[error("invalid dimension: d = {d} with top dimension {p}")]
    InvalidDimension { d: usize, p: usize },
    #[error("masses must be nonnegative")]
    NegativeMass,
    #[error("segment {segment} of the curve leaves the complex")]
    CurveOutsideComplex { segment: usize },
    #[error("no sampled center in {dim}-simplex {simplex} met the expansion bound")]
    CenterSamplingFailed { dim: usize, simplex: usize },
    #[error("curve needs at least {needed} distinct consecutive points")]
    DegenerateCurve { needed: usize },
    #[error("retraction produced a chain with nonzero boundary")]
    BrokenCycle,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationBounds {
    pub d: usize,
    pub k: usize,
    pub mass_t: f64,
    pub mass_boundary_t: f64,
    pub theta: f64,
    pub delta: f64,
    pub bound_mp: f64,
    pub bound_mdp: f64,
    pub bound_mr: f64,
    pub bound_mq: f64,
    pub bound_flat_distance: f64,
}

pub fn deformation_bounds(
    report: &RegularityReport,
    d: usize,
    mass_t: f64,
    mass_boundary_t: f64,
) -> Result<DeformationBounds, DeformError> {
    let p = report.top_dim;
    if d >= p {
        return Err(DeformError::InvalidDimension { d, p });
    }
    if mass_t < 0.0 || mass_boundary_t < 0.0 {
        return Err(DeformError::NegativeMass);
    }
    let k = p - d;
    let c = 4.0 * report.theta;
    let ck = c.powi(k as i32);
    let delta = report.delta;
    Ok(DeformationBounds {
        d,
        k,
        mass_t,
        mass_boundary_t,
        theta: report.theta,
        delta,
        bound_mp: ck * mass_t + delta * ck * c * mass_boundary_t,
        bound_mdp: ck * c * mass_boundary_t,
        bound_mr: delta * ck * mass_t,
        bound_mq: delta * ck * (1.0 + c) * mass_boundary_t,
        bound_flat_distance: delta * ck * (mass_t + (1.0 + c) * mass_boundary_t),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SullivanBounds {
    pub bound_mp: f64,
    pub bound_mdp: f64,
    pub bound_flat_distance: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sullivan's bounds for deforming a `d`-current in `R^q` onto the boundary
/// of a cell complex; the flat-distance bound uses the given `M(P)`, `M(∂P)`.
#[allow(clippy::too_many_arguments)]
pub fn sullivan_bounds(
    q: usize,
    d: usize,
    kappa2: f64,
    delta: f64,
    mass_t: f64,
    mass_boundary_t: f64,
    mass_p: f64,
    mass_boundary_p: f64,
) -> Result<SullivanBounds, DeformError> {
    if d == 0 || q < d {
        return Err(DeformError::InvalidDimension { d, p: q });
    }
    let e = (q - d + 1) as i32;
    let base = (d + 1) as f64 / (2 * d) as f64 * kappa2;
    let df = d as f64;
    Ok(SullivanBounds {
        bound_mp: binomial(q, d) * (2.0 * df * base.powi(d as i32 + 1)).powi(e) * mass_t,
        bound_mdp: binomial(q, d - 1) * (2.0 * df * base.powi(d as i32)).powi(e) * mass_boundary_t,
        bound_flat_distance: (q - d + 1) as f64 * delta * (mass_p + mass_boundary_p),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub q: usize,
    pub ours: DeformationBounds,
    /// Flat-distance entry evaluated at Sullivan's own `M(P)` and `M(∂P)` bounds.
    pub sullivan: SullivanBounds,
    /// Sullivan's flat-distance bound divided by ours.
    pub flat_ratio: f64,
    pub ours_below: bool,
}

pub fn compare_bounds(
    report: &RegularityReport,
    d: usize,
    mass_t: f64,
    mass_boundary_t: f64,
) -> Result<BoundComparison, DeformError> {
    let ours = deformation_bounds(report, d, mass_t, mass_boundary_t)?;
    let q = report.ambient_dim;
    let first = sullivan_bounds(q, d, report.kappa2, report.delta, mass_t, mass_boundary_t, 0.0, 0.0)?;
    let sullivan =
        sullivan_bounds(q, d, report.kappa2, report.delta, mass_t, mass_boundary_t, first.bound_mp, first.bound_mdp)?;
    let flat_ratio = sullivan.bound_flat_distance / ours.bound_flat_distance;
    let ours_below = ours.bound_flat_distance < sullivan.bound_flat_distance;
    Ok(BoundComparison { q, ours, sullivan, flat_ratio, ours_below })
}

/// Polygonal curve; consecutive points are distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLCurve {
    points: Vec<Vec<f64>>,
    closed: bool,
}

impl PLCurve {
    pub fn new(points: Vec<Vec<f64>>, closed: bool) -> Result<Self, DeformError> {
        let needed = if closed { 3 } else { 2 };
        if points.len() < needed {
            return Err(DeformError::DegenerateCurve { needed });
        }
        let n = points.len();
        let segments = if closed { n } else { n - 1 };
        if (0..segments).any(|i| distance(&points[i], &points[(i + 1) % n]) == 0.0) {
            return Err(DeformError::DegenerateCurve { needed });
        }
        Ok(Self { points, closed })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.points[i].as_slice(), self.points[(i + 1) % n].as_slice()))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| distance(a, b)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetractOptions {
    pub samples: usize,
    pub retries: usize,
    pub seed: u64,
}

impl Default for RetractOptions {
    fn default() -> Self {
        Self { samples: 16, retries: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStep {
    pub level: usize,
    pub simplex: usize,
    pub center: Vec<f64>,
    pub factor: f64,
    /// `4·ϑ_σ` for this simplex.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetractionTrace {
    pub snapped: Chain,
    pub mass_before: f64,
    /// Length of the curve once pushed onto the 1-skeleton, before rounding
    /// to whole edges.
    pub mass_pushed: f64,
    pub mass_after: f64,
    pub per_level: Vec<LevelStep>,
    pub resamples: usize,
    /// `(4ϑ_K)^k` with `k = p − 1`.
    pub bound_factor: f64,
    pub within_bound: bool,
}

/// Straight piece of the current carried by the open simplex `(dim, index)`.
#[derive(Debug, Clone)]
struct Piece {
    a: Vec<f64>,
    b: Vec<f64>,
    dim: usize,
    index: usize,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Lowest face of `vertices` with positive barycentric weight.
fn carrier(k: &SimplicialComplex, vertices: &[usize], bary: &[f64]) -> (usize, usize) {
    let mut face: Vec<usize> = vertices.iter().zip(bary).filter(|(_, &b)| b > BARY_TOL).map(|(&v, _)| v).collect();
    if face.is_empty() {
        let i = bary.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map_or(0, |(i, _)| i);
        face.push(vertices[i]);
    }
    face.sort_unstable();
    (face.len() - 1, k.index_of(&face).expect("faces of a simplex are in the complex"))
}

struct Located {
    vertices: Vec<usize>,
    frame: AffineFrame,
}

fn locate(k: &SimplicialComplex, curve: &PLCurve) -> Result<Vec<Piece>, DeformError> {
    let cells: Vec<Located> = k
        .maximal_simplices()
        .into_iter()
        .filter(|s| s.len() >= 2)
        .filter_map(|vertices| {
            let pts: Vec<&[f64]> = vertices.iter().map(|&v| k.point(v)).collect::<Result<_, _>>().ok()?;
            AffineFrame::new(&pts).map(|frame| Located { vertices, frame })
        })
        .collect();
    let mut pieces = Vec::new();
    for (segment, (p, q)) in curve.segments().enumerate() {
        let scale = distance(p, q).max(1.0);
        let mut intervals: Vec<(f64, f64, usize)> = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            let (bp, rp) = cell.frame.barycentric(p);
            let (bq, rq) = cell.frame.barycentric(q);
            if rp > BARY_TOL * scale || rq > BARY_TOL * scale {
                continue;
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for (x, y) in bp.iter().zip(&bq) {
                // x + t (y - x) ≥ -tol
                let slope = y - x;
                if slope.abs() < 1e-15 {
                    if *x < -BARY_TOL {
                        hi = -1.0;
                    }
                } else if slope > 0.0 {
                    lo = lo.max((-BARY_TOL - x) / slope);
                } else {
                    hi = hi.min((-BARY_TOL - x) / slope);
                }
            }
            if hi - lo > 1e-12 {
                intervals.push((lo.max(0.0), hi.min(1.0), c));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut reach = 0.0f64;
        for &(lo, hi, _) in &intervals {
            if lo > reach + 1e-9 {
                break;
            }
            reach = reach.max(hi);
        }
        if reach < 1.0 - 1e-9 {
            return Err(DeformError::CurveOutsideComplex { segment });
        }
        let mut cuts: Vec<f64> = intervals.iter().flat_map(|&(lo, hi, _)| [lo, hi]).chain([0.0, 1.0]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0].clamp(0.0, 1.0), w[1].clamp(0.0, 1.0));
            if t1 - t0 < 1e-12 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            let Some(&(_, _, c)) = intervals.iter().find(|&&(lo, hi, _)| lo <= mid && mid <= hi) else {
                return Err(DeformError::CurveOutsideComplex { segment });
            };
            let cell = &cells[c];
            let (bary, _) = cell.frame.barycentric(&lerp(p, q, mid));
            let (dim, index) = carrier(k, &cell.vertices, &bary);
            pieces.push(Piece { a: lerp(p, q, t0), b: lerp(p, q, t1), dim, index });
        }
    }
    Ok(pieces)
}

struct Cell<'a> {
    k: &'a SimplicialComplex,
    vertices: Vec<usize>,
    points: Vec<Vec<f64>>,
    frame: AffineFrame,
}

impl Cell<'_> {
    fn point_from(&self, bary: &[f64]) -> Vec<f64> {
        let q = self.points[0].len();
        (0..q).map(|c| self.points.iter().zip(bary).map(|(p, b)| b * p[c]).sum()).collect()
    }

    /// Radial projection of the pieces from `center` onto the boundary of
    /// the cell. None if a piece passes too close to the center.
    fn push(&self, pieces: &[&Piece], center: &[f64]) -> Option<Vec<Piece>> {
        let (ba, _) = self.frame.barycentric(center);
        let n = ba.len();
        let mut out = Vec::new();
        for piece in pieces {
            let (b0, _) = self.frame.barycentric(&piece.a);
            let (b1, _) = self.frame.barycentric(&piece.b);
            let g0: Vec<f64> = (0..n).map(|i| (ba[i] - b0[i]) / ba[i]).collect();
            let g1: Vec<f64> = (0..n).map(|i| (ba[i] - b1[i]) / ba[i]).collect();
            let g = |i: usize, t: f64| g0[i] + t * (g1[i] - g0[i]);
            let mut cuts = vec![0.0, 1.0];
            for i in 0..n {
                for j in i + 1..n {
                    let denom = (g1[i] - g0[i]) - (g1[j] - g0[j]);
                    if denom.abs() > 1e-15 {
                        let t = (g0[j] - g0[i]) / denom;
                        if t > 0.0 && t < 1.0 {
                            cuts.push(t);
                        }
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
            let image = |i: usize, t: f64| -> Option<Vec<f64>> {
                let gi = g(i, t);
                if gi < CENTER_CLEARANCE {
                    return None;
                }
                let z = lerp(&b0, &b1, t);
                let mut bary: Vec<f64> = (0..n).map(|j| (ba[j] + (z[j] - ba[j]) / gi).max(0.0)).collect();
                bary[i] = 0.0;
                let total: f64 = bary.iter().sum();
                debug_assert!((total - 1.0).abs() < 1e-6, "pushed point left the simplex");
                bary.iter_mut().for_each(|b| *b /= total);
                Some(bary)
            };
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let exit = (0..n).max_by(|&x, &y| g(x, mid).total_cmp(&g(y, mid))).expect("nonempty simplex");
                let ya = image(exit, w[0])?;
                let yb = image(exit, w[1])?;
                let (pa, pb) = (self.point_from(&ya), self.point_from(&yb));
                if distance(&pa, &pb) < 1e-14 {
                    continue;
                }
                let mid_bary: Vec<f64> = ya.iter().zip(&yb).map(|(x, y)| 0.5 * (x + y)).collect();
                let (dim, index) = carrier(self.k, &self.vertices, &mid_bary);
                out.push(Piece { a: pa, b: pb, dim, index });
            }
        }
        Some(out)
    }
}

fn length(pieces: &[Piece]) -> f64 {
    pieces.iter().map(|p| distance(&p.a, &p.b)).sum()
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, basis: &[Vec<f64>]) -> Vec<f64> {
    let u = loop {
        let u: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            break u;
        }
    };
    let mut out = center.to_vec();
    for (ui, b) in u.iter().zip(basis) {
        for (o, bc) in out.iter_mut().zip(b) {
            *o += radius * ui * bc;
        }
    }
    out
}

/// Pushes `curve` through the skeleta of `k` from the top dimension down to
/// the 1-skeleton, then rounds it to an integer edge chain.
pub fn retract_curve(
    k: &SimplicialComplex,
    curve: &PLCurve,
    options: RetractOptions,
) -> Result<RetractionTrace, DeformError> {
    let p = k.top_dim();
    if p < 2 {
        return Err(DeformError::InvalidDimension { d: 1, p });
    }
    let report = regularity_report(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut pieces = locate(k, curve)?;
    let mass_before = curve.length();
    let mut per_level = Vec::new();
    let mut resamples = 0;

    for level in (2..=p).rev() {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, piece) in pieces.iter().enumerate() {
            if piece.dim == level {
                groups.entry(piece.index).or_default().push(i);
            }
        }
        let mut replaced: BTreeMap<usize, Vec<Piece>> = BTreeMap::new();
        for (&simplex, members) in &groups {
            let geom = simplex_geometry(k, level, simplex)?;
            let vertices = k.simplex(level, simplex).to_vec();
            let points: Vec<Vec<f64>> = vertices.iter().map(|&v| k.point(v).map(<[f64]>::to_vec)).collect::<Result<_, _>>()?;
            let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
            let frame = AffineFrame::new(&refs).ok_or(GeometryError::DegenerateSimplex { dim: level, index: simplex })?;
            let basis = frame.orthonormal_basis();
            let cell = Cell { k, vertices, points, frame };
            let group: Vec<&Piece> = members.iter().map(|&i| &pieces[i]).collect();
            let before: f64 = group.iter().map(|p| distance(&p.a, &p.b)).sum();
            let bound = 4.0 * geom.theta_term();
            let mut best: Option<(Vec<f64>, Vec<Piece>, f64)> = None;
            for round in 0..=options.retries {
                if round > 0 {
                    resamples += 1;
                }
                for _ in 0..options.samples {
                    let center = sample_ball(&mut rng, &geom.incenter, geom.inradius_half, &basis);
                    let Some(pushed) = cell.push(&group, &center) else { continue };
                    let factor = length(&pushed) / before;
                    if best.as_ref().is_none_or(|(_, _, f)| factor < *f) {
                        best = Some((center, pushed, factor));
                    }
                }
                if best.as_ref().is_some_and(|(_, _, f)| *f <= bound) {
                    break;
                }
            }
            match best {
                Some((center, pushed, factor)) if factor <= bound => {
                    per_level.push(LevelStep { level, simplex, center, factor, bound });
                    replaced.insert(simplex, pushed);
                }
                _ => return Err(DeformError::CenterSamplingFailed { dim: level, simplex }),
            }
        }
        let mut next: Vec<Piece> = pieces.into_iter().filter(|p| p.dim != level).collect();
        next.extend(replaced.into_values().flatten());
        pieces = next;
    }

    let mass_pushed = length(&pieces);
    let mut by_edge: BTreeMap<usize, Vec<&Piece>> = BTreeMap::new();
    for piece in pieces.iter().filter(|p| p.dim == 1) {
        by_edge.entry(piece.index).or_default().push(piece);
    }
    let mut snapped = Chain::zero(1);
    let edge_lengths: Vec<f64> = (0..k.count(1))
        .map(|e| {
            let pts = k.simplex_points(1, e)?;
            Ok(distance(pts[0], pts[1]))
        })
        .collect::<Result<_, ComplexError>>()?;
    for (&edge, members) in &by_edge {
        let pts = k.simplex_points(1, edge)?;
        let dir: Vec<f64> = pts[1].iter().zip(pts[0]).map(|(x, y)| x - y).collect();
        let len2: f64 = dir.iter().map(|x| x * x).sum();
        let tau = |z: &[f64]| z.iter().zip(pts[0]).zip(&dir).map(|((a, b), c)| (a - b) * c).sum::<f64>() / len2;
        let c: f64 = rng.random_range(0.25..0.75);
        let step = |x: f64| i64::from(x > 0.0);
        let net: i64 = members.iter().map(|p| step(tau(&p.b) - c) - step(tau(&p.a) - c)).sum();
        snapped.add_to(edge, net);
    }
    if curve.closed() && !k.boundary_matrix(0)?.apply(&snapped)?.is_zero() {
        return Err(DeformError::BrokenCycle);
    }
    let mass_after: f64 = snapped.iter().map(|(e, c)| edge_lengths[e] * c.unsigned_abs() as f64).sum();
    let bound_factor = (4.0 * report.theta).powi((p - 1) as i32);
    let within_bound = mass_after <= bound_factor * mass_before;
    Ok(RetractionTrace { snapped, mass_before, mass_pushed, mass_after, per_level, resamples, bound_factor, within_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub level: usize,
    pub delta: f64,
    pub theta: f64,
    pub flat_distance_bound: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    pub empirical_mass_gap: f64,
}

/// Retracts `curve` on `k` and on `levels` successive midpoint subdivisions.
pub fn refinement_convergence(
    k: &SimplicialComplex,
    curve: &PLCurve,
    levels: usize,
    options: RetractOptions,
) -> Result<Vec<RefinementStep>, DeformError> {
    let mut current = k.clone();
    let mut out = Vec::with_capacity(levels + 1);
    for level in 0..=levels {
        if level > 0 {
            current = current.midpoint_subdivision()?;
        }
        let report = regularity_report(&current)?;
        let trace = retract_curve(&current, curve, options)?;
        let boundary_mass = if curve.closed() { 0.0 } else { 2.0 };
        let bounds = deformation_bounds(&report, 1, trace.mass_before, boundary_mass)?;
        out.push(RefinementStep {
            level,
            delta: report.delta,
            theta: report.theta,
            flat_distance_bound: bounds.bound_flat_distance,
            mass_before: trace.mass_before,
            mass_after: trace.mass_after,
            empirical_mass_gap: (trace.mass_after - trace.mass_before).abs(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cube_block, equilateral_lattice, equilateral_triangle};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn zero_and_closed_bounds() {
        let report = regularity_report(&equilateral_triangle()).unwrap();
        let zero = deformation_bounds(&report, 1, 0.0, 0.0).unwrap();
        assert_eq!(zero.bound_flat_distance, 0.0);
        let closed = deformation_bounds(&report, 1, 1.0, 0.0).unwrap();
        assert!((closed.bound_mp - 211.06).abs() < 0.01);
        assert_eq!(closed.bound_mq, 0.0);
        assert!(close(closed.bound_mp, 4.0 * report.theta));
        assert!(matches!(deformation_bounds(&report, 2, 1.0, 0.0), Err(DeformError::InvalidDimension { .. })));
    }

    #[test]
    fn sullivan_transcription() {
        let k2 = 4.0 * 3f64.sqrt();
        let s = sullivan_bounds(3, 1, k2, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(close(s.bound_mp, 3.0 * (2.0 * k2 * k2).powi(3)));
        assert!((s.bound_mp - 2_654_208.0).abs() < 1e-6);
        let s = sullivan_bounds(2, 2, 10.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(close(s.bound_mp, 4.0 * (0.75 * 10.0f64).powi(3)));
        assert_eq!(s.bound_flat_distance, 0.0);
        assert!(sullivan_bounds(1, 2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ours_below_sullivan_on_tetrahedra() {
        let report = regularity_report(&cube_block(1)).unwrap();
        for (mt, mb) in [(1.0, 0.0), (1.0, 4.0), (10.0, 1.0)] {
            let cmp = compare_bounds(&report, 2, mt, mb).unwrap();
            assert_eq!(cmp.q, 3);
            assert!(cmp.ours_below, "{cmp:?}");
            assert!(cmp.flat_ratio > 1.0);
        }
    }

    #[test]
    fn refinement_halves_delta_and_bound() {
        let k = equilateral_lattice(2, 2);
        let h = 3f64.sqrt() / 6.0;
        let s = 0.25;
        let pts = vec![vec![1.0 - s, h - s], vec![1.0 + s, h - s], vec![1.0 + s, h + s], vec![1.0 - s, h + s]];
        let curve = PLCurve::new(pts, true).unwrap();
        let steps = refinement_convergence(&k, &curve, 2, RetractOptions::default()).unwrap();
        assert_eq!(steps.len(), 3);
        for w in steps.windows(2) {
            assert!(close(w[1].delta, w[0].delta / 2.0));
            assert!(close(w[1].theta, w[0].theta));
            assert!((w[1].flat_distance_bound / w[0].flat_distance_bound - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn skeleton_curve_is_fixed() {
        let k = equilateral_lattice(2, 2);
        let pts: Vec<Vec<f64>> = [0, 1, 3].iter().map(|&v| k.point(v).unwrap().to_vec()).collect();
        let curve = PLCurve::new(pts, true).unwrap();
        let trace = retract_curve(&k, &curve, RetractOptions::default()).unwrap();
        assert!(trace.per_level.is_empty());
        assert_eq!(trace.snapped.support_len(), 3);
        assert!(close(trace.mass_after, trace.mass_before));
    }

    #[test]
    fn small_square_in_one_triangle() {
        let k = equilateral_lattice(3, 3);
        let c = [1.5, 0.3];
        let h = 0.1;
        let pts = vec![
            vec![c[0] - h, c[1] - h],
            vec![c[0] + h, c[1] - h],
            vec![c[0] + h, c[1] + h],
            vec![c[0] - h, c[1] + h],
        ];
        let curve = PLCurve::new(pts, true).unwrap();
        let trace = retract_curve(&k, &curve, RetractOptions::default()).unwrap();
        assert!(k.boundary_matrix(0).unwrap().apply(&trace.snapped).unwrap().is_zero());
        assert!(trace.within_bound);
        for step in &trace.per_level {
            assert!(step.factor <= step.bound);
        }
    }

    #[test]
    fn median_segment() {
        let k = equilateral_triangle();
        let h = 3f64.sqrt() / 2.0;
        let curve = PLCurve::new(vec![vec![0.5, 0.0], vec![0.5, h]], false).unwrap();
        let trace = retract_curve(&k, &curve, RetractOptions::default()).unwrap();
        assert_eq!(trace.per_level.len(), 1);
        let step = &trace.per_level[0];
        assert!(step.factor >= 1.0 && step.factor <= step.bound);
        assert!(close(step.bound, 4.0 * regularity_report(&k).unwrap().theta));
        assert!(trace.mass_pushed > 0.0);
    }

    #[test]
    fn curve_outside_is_rejected() {
        let k = equilateral_triangle();
        let curve = PLCurve::new(vec![vec![0.5, 0.1], vec![5.0, 0.1]], false).unwrap();
        assert!(matches!(
            retract_curve(&k, &curve, RetractOptions::default()),
            Err(DeformError::CurveOutsideComplex { segment: 0 })
        ));
    }
}
