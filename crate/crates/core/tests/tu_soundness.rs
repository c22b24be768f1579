use flatnorm::fixtures::{moebius_strip, random_complex};
use flatnorm::tu::{bareiss_determinant, certify, check_moebius_free, TuHints, TuReason, Verdict};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every square submatrix, no pruning.
fn naive_is_tu(a: &[Vec<i64>]) -> bool {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let subsets = |len: usize, size: usize| -> Vec<Vec<usize>> {
        (0u32..1 << len).filter(|mask| mask.count_ones() as usize == size).map(|mask| (0..len).filter(|i| mask >> i & 1 == 1).collect()).collect()
    };
    for size in 1..=m.min(n) {
        for rows in subsets(m, size) {
            for cols in subsets(n, size) {
                let sub: Vec<Vec<i128>> = rows.iter().map(|&i| cols.iter().map(|&j| i128::from(a[i][j])).collect()).collect();
                if bareiss_determinant(sub).abs() > 1 {
                    return false;
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn verdicts_agree_with_naive_enumeration(seed in any::<u64>(), cells in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_complex(&mut rng, 1, 6, cells);
        let b = k.boundary_matrix(1).unwrap();
        prop_assume!(b.rows() <= 16);
        let naive = naive_is_tu(&b.to_dense());
        let cert = certify(&k, 1, TuHints::default());
        match cert.verdict {
            Verdict::Tu => prop_assert!(naive),
            Verdict::NotTu => prop_assert!(!naive),
            Verdict::Unknown => {}
        }
    }
}

#[test]
fn moebius_witness_is_a_real_subdeterminant() {
    let k = moebius_strip();
    let cert = check_moebius_free(&k, 1).unwrap();
    let TuReason::MoebiusFound { triangles, edges, det } = cert.reason else { panic!("{cert:?}") };
    let dense = k.boundary_matrix(1).unwrap().to_dense();
    let sub: Vec<Vec<i128>> = edges.iter().map(|&i| triangles.iter().map(|&j| i128::from(dense[i][j])).collect()).collect();
    assert_eq!(bareiss_determinant(sub), det);
    assert_eq!(det.abs(), 2);
    assert!(!naive_is_tu(&dense));
}
