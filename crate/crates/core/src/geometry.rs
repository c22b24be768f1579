//! Euclidean measurements of simplices and the mesh regularity constants
//! (`κ1`, `κ2`, `Δ`, `ϑ_K`) that control mass expansion under retraction.
//!
//! Geometry is floating point; exactness is reserved for the optimization
//! layer, which rationalizes volumes once when a problem is formulated.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex};

/// Relative volume tolerance below which a simplex counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate {dim}-simplex {index} (zero volume)")]
    DegenerateSimplex { dim: usize, index: usize },
    #[error("simplex dimension must be at least 1, got {0}")]
    ZeroDimensional(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `ℓ`-volume of the simplex spanned by `points` (`ℓ+1` points in `R^q`):
/// `sqrt(det(GᵀG)) / ℓ!` with edge vectors `v_i - v_0` as the columns of `G`.
/// A single point has volume 1 (counting measure). Degenerate simplices give 0.
pub fn simplex_volume(points: &[&[f64]]) -> f64 {
    let l = points.len().saturating_sub(1);
    if l == 0 {
        return 1.0;
    }
    let q = points[0].len();
    let edges = DMatrix::from_fn(q, l, |r, c| points[c + 1][r] - points[0][r]);
    let gram = edges.transpose() * &edges;
    let det = gram.determinant();
    if det <= 0.0 {
        return 0.0;
    }
    det.sqrt() / factorial(l)
}

/// Largest pairwise vertex distance (the longest edge).
pub fn simplex_diameter(points: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(distance(points[i], points[j]));
        }
    }
    best
}

/// `Γ(ℓ/2 + 1)`.
fn gamma_half_plus_one(l: usize) -> f64 {
    if l.is_multiple_of(2) {
        factorial(l / 2)
    } else {
        let m = l.div_ceil(2);
        factorial(2 * m) / (4f64.powi(m as i32) * factorial(m)) * std::f64::consts::PI.sqrt()
    }
}

/// Volume of an `ℓ`-dimensional ball of radius `r`.
pub fn ball_volume(l: usize, r: f64) -> f64 {
    std::f64::consts::PI.powf(l as f64 / 2.0) * r.powi(l as i32) / gamma_half_plus_one(l)
}

/// Measurements of one simplex of a complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexGeometry {
    pub dim: usize,
    pub index: usize,
    pub volume: f64,
    pub diameter: f64,
    /// Sum of the volumes of the codimension-one faces.
    pub perimeter: f64,
    /// Half the inradius: the radius of the ball `B_σ`.
    pub inradius_half: f64,
    /// `V_ℓ(B_σ)` in the simplex's own dimension.
    pub ball_volume: f64,
    /// Center of the inscribed ball (shared by `B_σ`).
    pub incenter: Vec<f64>,
}

impl SimplexGeometry {
    /// `D(σ)·P(σ) / V_ℓ(B_σ)`.
    pub fn kappa1_term(&self) -> f64 {
        self.diameter * self.perimeter / self.ball_volume
    }

    /// `D(σ) / r_σ`.
    pub fn kappa2_term(&self) -> f64 {
        self.diameter / self.inradius_half
    }

    /// Per-simplex expansion constant `ϑ_σ`; a single retraction step inside
    /// `σ` can be chosen to expand mass by at most `4·ϑ_σ`.
    pub fn theta_term(&self) -> f64 {
        self.kappa1_term() + self.kappa2_term()
    }

    pub fn inradius(&self) -> f64 {
        2.0 * self.inradius_half
    }
}

/// Geometry of the `index`-th `dim`-simplex of `k`.
pub fn simplex_geometry(
    k: &SimplicialComplex,
    dim: usize,
    index: usize,
) -> Result<SimplexGeometry, GeometryError> {
    if dim == 0 {
        return Err(GeometryError::ZeroDimensional(dim));
    }
    let points = k.simplex_points(dim, index)?;
    let volume = simplex_volume(&points);
    let diameter = simplex_diameter(&points);
    if !(volume > DEGENERACY_TOL * diameter.powi(dim as i32)) {
        return Err(GeometryError::DegenerateSimplex { dim, index });
    }
    // facet i is opposite vertex i
    let facet_volumes: Vec<f64> = (0..points.len())
        .map(|i| {
            let facet: Vec<&[f64]> =
                points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| *p).collect();
            simplex_volume(&facet)
        })
        .collect();
    let perimeter: f64 = facet_volumes.iter().sum();
    let inradius = dim as f64 * volume / perimeter;
    let inradius_half = 0.5 * inradius;
    let q = points[0].len();
    let incenter = (0..q)
        .map(|c| points.iter().zip(&facet_volumes).map(|(p, w)| w * p[c]).sum::<f64>() / perimeter)
        .collect();
    Ok(SimplexGeometry {
        dim,
        index,
        volume,
        diameter,
        perimeter,
        inradius_half,
        ball_volume: ball_volume(dim, inradius_half),
        incenter,
    })
}

/// Complex-wide regularity constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub top_dim: usize,
    pub ambient_dim: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub theta: f64,
    /// `(dim, index)` of the simplex attaining `kappa1`.
    pub kappa1_argmax: (usize, usize),
    pub kappa2_argmax: (usize, usize),
    pub per_simplex: Vec<SimplexGeometry>,
}

impl RegularityReport {
    pub fn simplex(&self, dim: usize, index: usize) -> Option<&SimplexGeometry> {
        self.per_simplex.iter().find(|g| g.dim == dim && g.index == index)
    }
}

/// Maxima of the regularity ratios over all simplices of dimension `1..=p`.
/// Vertices are excluded (their diameter is zero).
pub fn regularity_report(k: &SimplicialComplex) -> Result<RegularityReport, GeometryError> {
    let ambient_dim = k.ambient_dim().ok_or(ComplexError::MissingCoordinates)?;
    let mut per_simplex = Vec::new();
    for dim in 1..=k.top_dim() {
        let level: Result<Vec<_>, _> =
            (0..k.count(dim)).into_par_iter().map(|i| simplex_geometry(k, dim, i)).collect();
        per_simplex.extend(level?);
    }
    if per_simplex.is_empty() {
        return Err(GeometryError::Complex(ComplexError::Empty));
    }
    let argmax = |f: &dyn Fn(&SimplexGeometry) -> f64| -> (f64, (usize, usize)) {
        per_simplex.iter().fold((f64::NEG_INFINITY, (0, 0)), |best, g| {
            let v = f(g);
            if v > best.0 {
                (v, (g.dim, g.index))
            } else {
                best
            }
        })
    };
    let (kappa1, kappa1_argmax) = argmax(&SimplexGeometry::kappa1_term);
    let (kappa2, kappa2_argmax) = argmax(&SimplexGeometry::kappa2_term);
    let delta = per_simplex.iter().map(|g| g.diameter).fold(0.0, f64::max);
    Ok(RegularityReport {
        top_dim: k.top_dim(),
        ambient_dim,
        kappa1,
        kappa2,
        delta,
        theta: kappa1 + kappa2,
        kappa1_argmax,
        kappa2_argmax,
        per_simplex,
    })
}

/// Affine coordinates on the hull of a simplex.
#[derive(Debug, Clone)]
pub struct AffineFrame {
    origin: DVector<f64>,
    edges: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

impl AffineFrame {
    pub fn new(points: &[&[f64]]) -> Option<Self> {
        let l = points.len() - 1;
        let q = points[0].len();
        let origin = DVector::from_column_slice(points[0]);
        let edges = DMatrix::from_fn(q, l, |r, c| points[c + 1][r] - points[0][r]);
        let gram_inv = (edges.transpose() * &edges).try_inverse()?;
        Some(Self { origin, edges, gram_inv })
    }

    pub fn dim(&self) -> usize {
        self.edges.ncols()
    }

    /// Barycentric coordinates of the orthogonal projection of `z` onto the
    /// affine hull, together with the distance from `z` to the hull.
    pub fn barycentric(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let rel = DVector::from_column_slice(z) - &self.origin;
        let lam = &self.gram_inv * (self.edges.transpose() * &rel);
        let residual = (&rel - &self.edges * &lam).norm();
        let mut bary = Vec::with_capacity(lam.len() + 1);
        bary.push(1.0 - lam.sum());
        bary.extend(lam.iter().copied());
        (bary, residual)
    }

    /// Point with the given barycentric coordinates.
    pub fn point(&self, bary: &[f64]) -> Vec<f64> {
        let lam = DVector::from_iterator(bary.len() - 1, bary[1..].iter().copied());
        (&self.origin + &self.edges * lam).iter().copied().collect()
    }

    /// Orthonormal basis of the direction space of the hull, as `q`-vectors.
    pub fn orthonormal_basis(&self) -> Vec<Vec<f64>> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for c in 0..self.edges.ncols() {
            let mut v = self.edges.column(c).into_owned();
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
            let norm = v.norm();
            basis.push(v / norm);
        }
        basis.into_iter().map(|b| b.iter().copied().collect()).collect()
    }
}
