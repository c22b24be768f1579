//! LP-based branch and bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{floor, solve_lp, LinearProgram, LpSolution, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpOptions {
    /// Maximum number of nodes explored below the root.
    pub node_budget: usize,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self { node_budget: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IlpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The node budget ran out; `values` holds the incumbent if any.
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    pub status: IlpStatus,
    pub values: Vec<BigInt>,
    pub objective: Option<BigRational>,
    pub node_count: usize,
    pub proven_optimal: bool,
    /// The root relaxation, kept for reporting LP versus ILP gaps.
    pub root: LpSolution,
}

#[derive(Clone)]
enum Bound {
    AtMost(usize, BigInt),
    AtLeast(usize, BigInt),
}

fn restricted(lp: &LinearProgram, bounds: &[Bound]) -> LinearProgram {
    let n = lp.num_vars();
    let mut lower: Vec<Option<BigInt>> = vec![None; n];
    let mut upper: Vec<Option<BigRational>> = lp.upper().to_vec();
    for b in bounds {
        match b {
            Bound::AtMost(j, k) => {
                let k = BigRational::from_integer(k.clone());
                if upper[*j].as_ref().is_none_or(|u| k < *u) {
                    upper[*j] = Some(k);
                }
            }
            Bound::AtLeast(j, k) => {
                if lower[*j].as_ref().is_none_or(|l| k > l) {
                    lower[*j] = Some(k.clone());
                }
            }
        }
    }
    let surplus: Vec<usize> = (0..n).filter(|&j| lower[j].is_some()).collect();
    let mut cost = lp.cost().to_vec();
    cost.resize(n + surplus.len(), BigRational::from_integer(BigInt::from(0)));
    let mut out = LinearProgram::new(cost);
    for (row, b) in lp.rows().iter().zip(lp.rhs()) {
        out.add_row(row.iter().cloned(), b.clone());
    }
    for (k, &j) in surplus.iter().enumerate() {
        let l = lower[j].clone().expect("lower bound present");
        out.add_row([(j, BigRational::one()), (n + k, -BigRational::one())], BigRational::from_integer(l));
    }
    for (j, u) in upper.into_iter().enumerate() {
        out.set_upper(j, u);
    }
    out
}

/// Most fractional variable, lowest index on ties.
fn branching_variable(values: &[BigRational]) -> Option<usize> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut best: Option<(usize, BigRational)> = None;
    for (j, v) in values.iter().enumerate() {
        if v.is_integer() {
            continue;
        }
        let distance = (v.fract() - &half).abs();
        if best.as_ref().is_none_or(|(_, d)| distance < *d) {
            best = Some((j, distance));
        }
    }
    best.map(|(j, _)| j)
}

/// Depth-first branch and bound, lower branch first, pruning nodes whose
/// relaxation cannot beat the incumbent.
pub fn solve_ilp(lp: &LinearProgram, options: IlpOptions) -> IlpSolution {
    let n = lp.num_vars();
    let root = solve_lp(lp);
    let finish = |status, incumbent: Option<(Vec<BigRational>, BigRational)>, node_count, root: LpSolution| {
        let (values, objective) = match incumbent {
            Some((v, obj)) => (v.iter().map(floor).collect(), Some(obj)),
            None => (Vec::new(), None),
        };
        IlpSolution { status, values, objective, node_count, proven_optimal: status == IlpStatus::Optimal, root }
    };
    match root.status {
        LpStatus::Infeasible => return finish(IlpStatus::Infeasible, None, 0, root),
        LpStatus::Unbounded => return finish(IlpStatus::Unbounded, None, 0, root),
        LpStatus::Optimal => {}
    }

    let mut incumbent: Option<(Vec<BigRational>, BigRational)> = None;
    let mut stack: Vec<(Vec<Bound>, Option<LpSolution>)> = vec![(Vec::new(), Some(root.clone()))];
    let mut nodes = 0usize;
    while let Some((bounds, solved)) = stack.pop() {
        let sol = match solved {
            Some(sol) => sol,
            None => {
                if nodes >= options.node_budget {
                    return finish(IlpStatus::BudgetExceeded, incumbent, nodes, root);
                }
                nodes += 1;
                let mut sol = solve_lp(&restricted(lp, &bounds));
                sol.values.truncate(n);
                sol
            }
        };
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let objective = sol.objective.clone().expect("optimal objective");
        if incumbent.as_ref().is_some_and(|(_, best)| objective >= *best) {
            continue;
        }
        match branching_variable(&sol.values) {
            None => incumbent = Some((sol.values, objective)),
            Some(j) => {
                let f = floor(&sol.values[j]);
                let mut up = bounds.clone();
                up.push(Bound::AtLeast(j, &f + 1));
                let mut down = bounds;
                down.push(Bound::AtMost(j, f));
                stack.push((up, None));
                stack.push((down, None));
            }
        }
    }
    let status = if incumbent.is_some() { IlpStatus::Optimal } else { IlpStatus::Infeasible };
    finish(status, incumbent, nodes, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn integral_root_needs_no_nodes() {
        let mut lp = LinearProgram::new(vec![int(1), int(2)]);
        lp.add_row([(0, int(1)), (1, int(1))], int(3));
        let sol = solve_ilp(&lp, IlpOptions::default());
        assert_eq!(sol.status, IlpStatus::Optimal);
        assert_eq!(sol.node_count, 0);
        assert_eq!(sol.values, vec![BigInt::from(3), BigInt::from(0)]);
        assert_eq!(sol.objective, Some(int(3)));
    }

    #[test]
    fn parity_infeasible() {
        let mut lp = LinearProgram::new(vec![int(1), int(1)]);
        lp.add_row([(0, int(2)), (1, int(2))], int(3));
        let sol = solve_ilp(&lp, IlpOptions::default());
        assert_eq!(sol.status, IlpStatus::Infeasible);
        assert!(!sol.proven_optimal);
        assert_eq!(sol.root.objective, Some(rat(3, 2)));
    }

    #[test]
    fn knapsack_like() {
        // min -5a - 4b s.t. 6a + 4b + s1 = 24, a + 2b + s2 = 6; optimum a=4, b=0 or a=3,b=1.5 in LP
        let mut lp = LinearProgram::new(vec![int(-5), int(-4), int(0), int(0)]);
        lp.add_row([(0, int(6)), (1, int(4)), (2, int(1))], int(24));
        lp.add_row([(0, int(1)), (1, int(2)), (3, int(1))], int(6));
        let sol = solve_ilp(&lp, IlpOptions::default());
        assert_eq!(sol.status, IlpStatus::Optimal);
        assert_eq!(sol.objective, Some(int(-20)));
        assert_eq!(sol.root.objective, Some(int(-21)));
        assert!(sol.node_count > 0);
    }

    #[test]
    fn budget_reports_incumbent_state() {
        let mut lp = LinearProgram::new(vec![int(-5), int(-4), int(0), int(0)]);
        lp.add_row([(0, int(6)), (1, int(4)), (2, int(1))], int(24));
        lp.add_row([(0, int(1)), (1, int(2)), (3, int(1))], int(6));
        let sol = solve_ilp(&lp, IlpOptions { node_budget: 0 });
        assert_eq!(sol.status, IlpStatus::BudgetExceeded);
        assert!(!sol.proven_optimal);
    }
}
