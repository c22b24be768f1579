//! Synthetic noisy pyramid inside a tetrahedralized box.

use flatnorm::complex::{canonical_orientation, Chain, SimplicialComplex};
use flatnorm::fixtures::kuhn_tetrahedra;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Layers of hexahedra below and above the surface in every column.
pub const LAYERS: usize = 2;

// (x, y, height, width) of the fixed peaks and troughs
const BUMPS: [(f64, f64, f64, f64); 5] = [
    (0.45, 0.40, 0.22, 0.12),
    (-0.50, 0.35, -0.18, 0.20),
    (-0.35, -0.55, 0.12, 0.08),
    (0.55, -0.45, -0.10, 0.30),
    (0.00, 0.00, 0.08, 0.05),
];

/// Height of the surface rim and the floor of the height field.
pub const RIM: f64 = -0.4;
// the flat layer just under the surface sits this far below the rim
const GAP: f64 = 0.02;

fn height(x: f64, y: f64) -> f64 {
    let pyramid = RIM + 0.9 * (1.0 - x.abs().max(y.abs()));
    let bumps: f64 = BUMPS
        .iter()
        .map(|&(bx, by, h, w)| h * (-((x - bx).powi(2) + (y - by).powi(2)) / (2.0 * w * w)).exp())
        .sum();
    pyramid + bumps
}

/// Pyramid with bumps and uniform noise of the given amplitude over an
/// `n × n` grid on `[-1, 1]²`, embedded as the middle layer of a
/// tetrahedralization of `[-1, 1]³`. The rim is flat at [`RIM`] and the
/// layers below the surface are flat, so the mesh also carries a flat
/// sheet spanning the rim. Returns the complex and the upward oriented
/// surface 2-chain.
pub fn generate_noisy_pyramid(grid_n: usize, noise_amplitude: f64, seed: u64) -> (SimplicialComplex, Chain) {
    assert!(grid_n >= 4, "grid needs n ≥ 4");
    let n = grid_n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 2.0 / (n - 1) as f64;
    let levels = 2 * LAYERS + 1;
    let id = |i: usize, j: usize, m: usize| (m * n + j) * n + i;
    let mut coords = vec![Vec::new(); n * n * levels];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (-1.0 + i as f64 * step, -1.0 + j as f64 * step);
            let noise = if noise_amplitude > 0.0 { noise_amplitude * rng.random_range(-1.0..1.0) } else { 0.0 };
            let rim = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            let h = if rim { RIM } else { (height(x, y) + noise).clamp(RIM, 0.9) };
            for m in 0..levels {
                let z = if m < LAYERS {
                    -1.0 + (RIM - GAP + 1.0) * m as f64 / (LAYERS - 1) as f64
                } else if m == LAYERS {
                    h
                } else {
                    h + (1.0 - h) * (m - LAYERS) as f64 / LAYERS as f64
                };
                coords[id(i, j, m)] = vec![x, y, z];
            }
        }
    }
    let mut tops = Vec::with_capacity(6 * (n - 1) * (n - 1) * 2 * LAYERS);
    for m in 0..levels - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                tops.extend(kuhn_tetrahedra(|dx, dy, dz| id(i + dx, j + dy, m + dz)));
            }
        }
    }
    let k = SimplicialComplex::build(&tops, Some(coords)).expect("structured grid is a valid complex");
    let mut surface = Chain::zero(2);
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let s = |di: usize, dj: usize| id(i + di, j + dj, LAYERS);
            // counterclockwise seen from above
            for tri in [[s(0, 0), s(1, 0), s(1, 1)], [s(0, 0), s(1, 1), s(0, 1)]] {
                let (sorted, sign) = canonical_orientation(&tri).expect("distinct vertices");
                surface.add_to(k.index_of(&sorted).expect("surface triangle is a face"), sign);
            }
        }
    }
    (k, surface)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let (k, t) = generate_noisy_pyramid(4, 0.0, 0);
        assert_eq!(t.support_len(), 18);
        assert_eq!(k.count(3), 6 * 9 * 2 * LAYERS);
        let (k, _) = generate_noisy_pyramid(22, 0.02, 1);
        assert!(k.count(3) >= 10_000);
    }

    #[test]
    fn deterministic_by_seed() {
        assert_eq!(generate_noisy_pyramid(6, 0.05, 7), generate_noisy_pyramid(6, 0.05, 7));
        assert_ne!(generate_noisy_pyramid(6, 0.05, 7).0, generate_noisy_pyramid(6, 0.05, 8).0);
    }

    #[test]
    fn surface_boundary_is_the_rim() {
        let n = 5;
        let (k, t) = generate_noisy_pyramid(n, 0.05, 3);
        let boundary = k.boundary_matrix(1).unwrap().apply(&t).unwrap();
        assert_eq!(boundary.support_len(), 4 * (n - 1));
        assert!(boundary.iter().all(|(_, c)| c.abs() == 1));
        for tet in 0..k.count(3) {
            assert!(flatnorm::geometry::simplex_geometry(&k, 3, tet).is_ok());
        }
    }
}
