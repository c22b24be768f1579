//! Small reference complexes used by tests, examples and the CLI.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{Chain, SimplicialComplex};

fn build(tops: Vec<Vec<usize>>, coords: Vec<Vec<f64>>) -> SimplicialComplex {
    SimplicialComplex::build(&tops, Some(coords)).expect("fixture is a valid complex")
}

/// Unit square `(0,0) (1,0) (1,1) (0,1)` split along the diagonal `0–2`.
pub fn square() -> SimplicialComplex {
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    build(vec![vec![0, 1, 2], vec![0, 2, 3]], coords)
}

/// The path `v0 → v1 → v2` on [`square`].
pub fn square_path(k: &SimplicialComplex) -> Chain {
    let e01 = k.index_of(&[0, 1]).expect("edge 01");
    let e12 = k.index_of(&[1, 2]).expect("edge 12");
    Chain::from_pairs(1, [(e01, 1), (e12, 1)])
}

pub fn equilateral_triangle() -> SimplicialComplex {
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
    build(vec![vec![0, 1, 2]], coords)
}

/// Minimal Möbius strip: triangles `(i, i+1, i+2)` mod 5, embedded in R³
/// with every vertex on the boundary curve of the standard strip.
pub fn moebius_strip() -> SimplicialComplex {
    let coords = (0..5)
        .map(|i| {
            let u = 4.0 * PI / 5.0 * ((3 * i) % 5) as f64;
            let r = 1.0 + 0.5 * (u / 2.0).cos();
            vec![r * u.cos(), r * u.sin(), 0.5 * (u / 2.0).sin()]
        })
        .collect();
    let tops = (0..5).map(|i| vec![i, (i + 1) % 5, (i + 2) % 5]).collect();
    build(tops, coords)
}

/// Chain on [`moebius_strip`] whose relaxation at λ = 0 with unit weights
/// is fractional (optimum 9/2) while the integer optimum is 5.
pub fn moebius_regression_chain() -> Chain {
    Chain::from_dense(1, &[-1, 0, 0, 1, -1, -1, 0, -1, -1, -1])
}

/// Annulus with an inner triangle (vertices 0..3, radius 1) and an outer
/// hexagon (vertices 3..9, radius 2), nine triangles.
pub fn annulus() -> SimplicialComplex {
    let mut coords = Vec::new();
    for i in 0..3 {
        let a = 2.0 * PI * i as f64 / 3.0;
        coords.push(vec![a.cos(), a.sin()]);
    }
    for k in 0..6 {
        let a = 2.0 * PI * k as f64 / 6.0;
        coords.push(vec![2.0 * a.cos(), 2.0 * a.sin()]);
    }
    let inner = |i: usize| i % 3;
    let outer = |k: usize| 3 + k % 6;
    let mut tops = Vec::new();
    for i in 0..3 {
        tops.push(vec![inner(i), outer(2 * i), outer(2 * i + 1)]);
        tops.push(vec![inner(i), outer(2 * i + 1), inner(i + 1)]);
        tops.push(vec![inner(i + 1), outer(2 * i + 1), outer(2 * i + 2)]);
    }
    build(tops, coords)
}

/// The inner boundary cycle `0 → 1 → 2 → 0` of [`annulus`].
pub fn annulus_inner_cycle(k: &SimplicialComplex) -> Chain {
    oriented_cycle(k, &[0, 1, 2])
}

/// Chain of the closed vertex path `vertices[0] → vertices[1] → … → vertices[0]`.
pub fn oriented_cycle(k: &SimplicialComplex, vertices: &[usize]) -> Chain {
    let mut chain = Chain::zero(1);
    for (i, &a) in vertices.iter().enumerate() {
        let b = vertices[(i + 1) % vertices.len()];
        let (lo, hi, sign) = if a < b { (a, b, 1) } else { (b, a, -1) };
        chain.add_to(k.index_of(&[lo, hi]).expect("cycle edge in complex"), sign);
    }
    chain
}

/// `n × n` grid on the torus, each square cut along one diagonal, embedded
/// in R³ with radii 2 and 1.
pub fn torus(n: usize) -> SimplicialComplex {
    assert!(n >= 3, "torus grid needs n ≥ 3");
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut coords = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64);
            coords.push(vec![(2.0 + v.cos()) * u.cos(), (2.0 + v.cos()) * u.sin(), v.sin()]);
        }
    }
    let mut tops = Vec::new();
    for i in 0..n {
        for j in 0..n {
            tops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tops.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    build(tops, coords)
}

/// Boundary of the octahedron.
pub fn octahedron() -> SimplicialComplex {
    let coords = vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ];
    let mut tops = Vec::new();
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                tops.push(vec![x, y, z]);
            }
        }
    }
    build(tops, coords)
}

/// Boundary of a tetrahedron.
pub fn tetrahedron_boundary() -> SimplicialComplex {
    let coords = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    build(vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]], coords)
}

/// Equilateral triangle lattice with `rows + 1` staggered rows of
/// `cols + 1` vertices and unit edges.
pub fn equilateral_lattice(cols: usize, rows: usize) -> SimplicialComplex {
    let h = 3f64.sqrt() / 2.0;
    let id = |i: usize, j: usize| j * (cols + 1) + i;
    let mut coords = Vec::new();
    for j in 0..=rows {
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..=cols {
            coords.push(vec![i as f64 + shift, j as f64 * h]);
        }
    }
    let mut tops = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            if j % 2 == 0 {
                tops.push(vec![id(i, j), id(i + 1, j), id(i, j + 1)]);
                tops.push(vec![id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)]);
            } else {
                tops.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
                tops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            }
        }
    }
    build(tops, coords)
}

/// `n³` unit cubes, each cut into six tetrahedra around its main diagonal.
pub fn cube_block(n: usize) -> SimplicialComplex {
    let id = |x: usize, y: usize, z: usize| (z * (n + 1) + y) * (n + 1) + x;
    let mut coords = Vec::new();
    for z in 0..=n {
        for y in 0..=n {
            for x in 0..=n {
                coords.push(vec![x as f64, y as f64, z as f64]);
            }
        }
    }
    let mut tops = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                tops.extend(kuhn_tetrahedra(|dx, dy, dz| id(x + dx, y + dy, z + dz)));
            }
        }
    }
    build(tops, coords)
}

/// The six tetrahedra of a unit cube sharing the diagonal `000–111`, one per
/// axis order; `corner(dx, dy, dz)` names the cube corners.
pub fn kuhn_tetrahedra(corner: impl Fn(usize, usize, usize) -> usize) -> Vec<Vec<usize>> {
    const ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    ORDERS
        .iter()
        .map(|order| {
            let mut p = [0usize; 3];
            let mut tet = vec![corner(0, 0, 0)];
            for &axis in order {
                p[axis] = 1;
                tet.push(corner(p[0], p[1], p[2]));
            }
            tet
        })
        .collect()
}

/// Random pure complex of `cells` distinct `(d+1)`-simplices on
/// `vertices` vertices, without coordinates.
pub fn random_complex<R: Rng>(rng: &mut R, d: usize, vertices: usize, cells: usize) -> SimplicialComplex {
    let size = d + 2;
    assert!(vertices >= size);
    let mut tops: Vec<Vec<usize>> = Vec::new();
    let mut pool: Vec<usize> = (0..vertices).collect();
    let mut attempts = 0;
    while tops.len() < cells && attempts < 1000 {
        attempts += 1;
        pool.shuffle(rng);
        let mut s: Vec<usize> = pool[..size].to_vec();
        s.sort_unstable();
        if !tops.contains(&s) {
            tops.push(s);
        }
    }
    SimplicialComplex::build(&tops, None).expect("random simplices are valid")
}
