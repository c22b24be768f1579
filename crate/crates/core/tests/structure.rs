use flatnorm::complex::{Chain, SimplicialComplex};
use flatnorm::fixtures::*;
use flatnorm::geometry::{regularity_report, simplex_geometry};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixtures() -> Vec<(&'static str, SimplicialComplex)> {
    vec![
        ("square", square()),
        ("triangle", equilateral_triangle()),
        ("moebius", moebius_strip()),
        ("annulus", annulus()),
        ("torus", torus(4)),
        ("octahedron", octahedron()),
        ("tetrahedron", tetrahedron_boundary()),
        ("lattice", equilateral_lattice(3, 2)),
        ("cubes", cube_block(2)),
    ]
}

fn boundary_of_boundary_vanishes(k: &SimplicialComplex) {
    for d in 1..k.top_dim() {
        let outer = k.boundary_matrix(d - 1).unwrap();
        let inner = k.boundary_matrix(d).unwrap();
        for j in 0..inner.cols() {
            let column = Chain::from_pairs(d + 1, [(j, 1)]);
            let face = inner.apply(&column).unwrap();
            assert!(outer.apply(&face).unwrap().is_zero());
            assert_eq!(inner.column(j).len(), d + 2);
        }
    }
}

#[test]
fn fixtures_are_chain_complexes() {
    for (name, k) in fixtures() {
        boundary_of_boundary_vanishes(&k);
        if k.top_dim() >= 2 {
            boundary_of_boundary_vanishes(&k.midpoint_subdivision().unwrap());
        }
        assert!(k.count(0) > 0, "{name}");
    }
}

#[test]
fn ball_fits_inside_each_simplex() {
    for (name, k) in fixtures() {
        if k.ambient_dim().is_none() {
            continue;
        }
        for dim in 1..=k.top_dim() {
            for idx in 0..k.count(dim) {
                let g = simplex_geometry(&k, dim, idx).unwrap();
                assert!(g.inradius() <= g.diameter / 2.0 + 1e-12, "{name} {dim} {idx}");
                assert!(g.inradius_half > 0.0);
                assert!(g.kappa2_term() >= 4.0 - 1e-9, "{name}: D/r below the equilateral edge case");
            }
        }
    }
}

#[test]
fn regularity_is_scale_invariant_except_delta() {
    let k = equilateral_lattice(2, 2);
    let fine = k.midpoint_subdivision().unwrap();
    let (a, b) = (regularity_report(&k).unwrap(), regularity_report(&fine).unwrap());
    assert!((b.delta * 2.0 - a.delta).abs() < 1e-12);
    assert!((a.kappa1 - b.kappa1).abs() < 1e-9 * a.kappa1);
    assert!((a.kappa2 - b.kappa2).abs() < 1e-9 * a.kappa2);
}

proptest! {
    #[test]
    fn random_complexes_are_chain_complexes(seed in any::<u64>(), d in 0usize..3, cells in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_complex(&mut rng, d, d + 5, cells);
        boundary_of_boundary_vanishes(&k);
        let b = k.boundary_matrix(d).unwrap();
        for j in 0..b.cols() {
            prop_assert_eq!(b.column(j).len(), d + 2);
        }
    }
}
