use flatnorm::complex::{Chain, SimplicialComplex};
use flatnorm::exact::{int, rat};
use flatnorm::fixtures::random_complex;
use flatnorm::msfn::{compute_msfn_with, LpMethod, MsfnOptions, MsfnProblem};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimum of `Σ w|t − Bs| + λ Σ v|s|` over `s ∈ {−2..2}^n`, doubled so
/// that λ ∈ {0, 1/2, 1, 2} stays integral. One entry per λ.
fn box_minimum(k: &SimplicialComplex, d: usize, t: &[i64], w: &[i64], v: &[i64], twice_lambdas: &[i64]) -> Vec<i64> {
    let b = k.boundary_matrix(d).unwrap();
    let n = b.cols();
    let mut s = vec![-2i64; n];
    let mut x: Vec<i64> = t.to_vec();
    for (j, &sj) in s.iter().enumerate() {
        for &(i, sign) in b.column(j) {
            x[i] -= i64::from(sign) * sj;
        }
    }
    let mut best = vec![i64::MAX; twice_lambdas.len()];
    loop {
        let xm: i64 = x.iter().zip(w).map(|(a, c)| a.abs() * c).sum();
        let sm: i64 = s.iter().zip(v).map(|(a, c)| a.abs() * c).sum();
        for (bst, l2) in best.iter_mut().zip(twice_lambdas) {
            *bst = (*bst).min(2 * xm + l2 * sm);
        }
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            let delta = if s[j] == 2 { -4 } else { 1 };
            s[j] += delta;
            for &(i, sign) in b.column(j) {
                x[i] -= i64::from(sign) * delta;
            }
            if delta == 1 {
                break;
            }
            j += 1;
        }
    }
}

fn check(seed: u64, method: LpMethod) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = (seed % 3) as usize;
    let cells = 1 + (seed / 3 % 8) as usize;
    let k = random_complex(&mut rng, d, d + 4, cells);
    let m = k.count(d);
    let n = k.count(d + 1);
    prop_assume!(n <= 8);
    use rand::Rng;
    let t: Vec<i64> = (0..m).map(|_| rng.random_range(-2..=2)).collect();
    let w: Vec<i64> = (0..m).map(|_| rng.random_range(1..=3)).collect();
    let v: Vec<i64> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let twice = [0, 1, 2, 4];
    let best = box_minimum(&k, d, &t, &w, &v, &twice);
    let to_rat = |xs: &[i64]| xs.iter().map(|&a| int(a)).collect::<Vec<_>>();
    for (l2, bst) in twice.iter().zip(best) {
        let lambda = rat(*l2, 2);
        let problem = MsfnProblem::new(&k, Chain::from_dense(d, &t), lambda, to_rat(&w), to_rat(&v)).unwrap();
        let r = compute_msfn_with(&problem, MsfnOptions { method, ..Default::default() }).unwrap();
        let doubled = &r.flat_norm * int(2);
        prop_assert!(doubled <= BigRational::from_integer(bst.into()));
        if r.s.iter().all(|(_, c)| c.abs() <= 2) {
            prop_assert_eq!(doubled, BigRational::from_integer(bst.into()));
        }
        let bs = k.boundary_matrix(d).unwrap().apply(&r.s).unwrap();
        prop_assert_eq!(&(&r.x + &bs), &Chain::from_dense(d, &t));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn matches_box_enumeration(seed in any::<u64>()) {
        check(seed, LpMethod::Auto)?;
    }

    #[test]
    fn simplex_route_matches_box_enumeration(seed in any::<u64>()) {
        check(seed, LpMethod::Simplex)?;
    }
}
