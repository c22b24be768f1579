use flatnorm::exact::int;
use flatnorm::lp::{is_integral, solve_ilp, solve_lp, IlpOptions, IlpStatus, LinearProgram, LpStatus};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Solves `A_S x = b` for the columns in `subset`; None unless the columns are
/// independent and the system is consistent.
fn basic_solution(a: &[Vec<i64>], b: &[i64], subset: &[usize]) -> Option<Vec<BigRational>> {
    let m = a.len();
    let k = subset.len();
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|i| subset.iter().map(|&j| int(a[i][j])).chain(std::iter::once(int(b[i]))).collect())
        .collect();
    let mut r = 0;
    for c in 0..k {
        let p = (r..m).find(|&i| !rows[i][c].is_zero())?;
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v -= &f * pv;
                }
            }
        }
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|c| rows[c][k].clone()).collect())
}

fn vertex_enumeration(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Option<BigRational> {
    let n = c.len();
    let mut best: Option<BigRational> = None;
    for mask in 0u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if subset.len() > a.len() {
            continue;
        }
        let Some(xs) = basic_solution(a, b, &subset) else { continue };
        if xs.iter().any(|v| v.is_negative()) {
            continue;
        }
        let obj: BigRational = subset.iter().zip(&xs).map(|(&j, v)| int(c[j]) * v).sum();
        if best.as_ref().is_none_or(|bst| obj < *bst) {
            best = Some(obj);
        }
    }
    best
}

fn program(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> LinearProgram {
    let mut lp = LinearProgram::new(c.iter().map(|&v| int(v)).collect());
    for (row, &bi) in a.iter().zip(b) {
        lp.add_row(row.iter().enumerate().map(|(j, &v)| (j, int(v))), int(bi));
    }
    lp
}

fn instance(rows: usize, cols: usize) -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<i64>)> {
    (
        proptest::collection::vec(proptest::collection::vec(-1i64..=1, cols), rows),
        proptest::collection::vec(-3i64..=3, rows),
        proptest::collection::vec(0i64..=4, cols),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration((a, b, c) in instance(4, 7)) {
        let lp = program(&a, &b, &c);
        let sol = solve_lp(&lp);
        match vertex_enumeration(&a, &b, &c) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert_eq!(sol.objective.clone(), Some(best));
                prop_assert!(lp.is_feasible(&sol.values));
                prop_assert!(sol.dual_verified);
            }
        }
    }

    #[test]
    fn branch_and_bound_matches_box_enumeration((a, b, c) in instance(3, 6)) {
        let mut lp = program(&a, &b, &c);
        for j in 0..6 {
            lp.set_upper(j, Some(int(2)));
        }
        let sol = solve_ilp(&lp, IlpOptions::default());
        let mut best: Option<BigRational> = None;
        for code in 0..3usize.pow(6) {
            let x: Vec<BigRational> = (0..6).map(|j| int((code / 3usize.pow(j)) as i64 % 3)).collect();
            if lp.is_feasible(&x) {
                let obj = lp.objective_of(&x);
                if best.as_ref().is_none_or(|bst| obj < *bst) {
                    best = Some(obj);
                }
            }
        }
        match best {
            None => prop_assert_eq!(sol.status, IlpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, IlpStatus::Optimal);
                prop_assert_eq!(sol.objective.clone(), Some(best));
                let x: Vec<BigRational> = sol.values.iter().map(|v| BigRational::from_integer(v.clone())).collect();
                prop_assert!(lp.is_feasible(&x));
            }
        }
    }
}

#[test]
fn unimodular_system_has_integral_optimum() {
    // incidence matrix of a directed 4-cycle with a chord
    let a = vec![vec![1, 0, 0, -1, 1], vec![-1, 1, 0, 0, 0], vec![0, -1, 1, 0, -1], vec![0, 0, -1, 1, 0]];
    let lp = program(&a, &[2, -1, 0, -1], &[1, 2, 1, 3, 1]);
    let sol = solve_lp(&lp);
    assert_eq!(is_integral(&sol), Ok(true));
    let ilp = solve_ilp(&lp, IlpOptions::default());
    assert_eq!(ilp.objective, sol.objective);
    assert!(ilp.values.iter().all(|v| *v >= BigInt::zero()));
}
