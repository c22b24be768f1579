//! Exact linear and integer programming.
//!
//! Programs are in equality standard form: minimize `c·x` subject to
//! `A x = b`, `0 ≤ x ≤ u` with optional upper bounds `u`.

mod ilp;
mod network;
mod simplex;

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::format_rational;

pub use ilp::{solve_ilp, IlpOptions, IlpSolution, IlpStatus};
pub use network::{solve_tension, NetworkError, TensionArc, TensionProblem, TensionSolution};
pub use simplex::solve_lp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("solution is not optimal")]
    NotOptimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    rows: Vec<Vec<(usize, BigRational)>>,
    rhs: Vec<BigRational>,
    cost: Vec<BigRational>,
    upper: Vec<Option<BigRational>>,
}

impl LinearProgram {
    pub fn new(cost: Vec<BigRational>) -> Self {
        let num_vars = cost.len();
        Self { num_vars, rows: Vec::new(), rhs: Vec::new(), cost, upper: vec![None; num_vars] }
    }

    /// Appends the equality `Σ a_j x_j = rhs`. Zero coefficients are dropped
    /// and repeated indices are summed.
    pub fn add_row(&mut self, entries: impl IntoIterator<Item = (usize, BigRational)>, rhs: BigRational) {
        let mut row: Vec<(usize, BigRational)> = Vec::new();
        for (j, a) in entries {
            assert!(j < self.num_vars, "column {j} out of range");
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some((_, v)) => *v += a,
                None => row.push((j, a)),
            }
        }
        row.retain(|(_, a)| !a.is_zero());
        row.sort_by_key(|(j, _)| *j);
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn set_upper(&mut self, var: usize, bound: Option<BigRational>) {
        self.upper[var] = bound;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, BigRational)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[BigRational] {
        &self.rhs
    }

    pub fn cost(&self) -> &[BigRational] {
        &self.cost
    }

    pub fn upper(&self) -> &[Option<BigRational>] {
        &self.upper
    }

    pub fn objective_of(&self, x: &[BigRational]) -> BigRational {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Exact feasibility test, no tolerance.
    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        if self.upper.iter().zip(x).any(|(u, v)| u.as_ref().is_some_and(|u| v > u)) {
            return false;
        }
        self.rows.iter().zip(&self.rhs).all(|(row, b)| {
            let lhs: BigRational = row.iter().map(|(j, a)| a * &x[*j]).sum();
            &lhs == b
        })
    }

    /// Plain-text dump, one line per item:
    ///
    /// ```text
    /// vars <n>
    /// min <c_0> ... <c_{n-1}>
    /// row <a_0> ... <a_{n-1}> = <b>
    /// upper <j> <u_j>
    /// ```
    ///
    /// Numbers are integers or `p/q`. All variables are nonnegative.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars);
        let costs: Vec<String> = self.cost.iter().map(format_rational).collect();
        let _ = writeln!(out, "min {}", costs.join(" "));
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let mut dense = vec![String::from("0"); self.num_vars];
            for (j, a) in row {
                dense[*j] = format_rational(a);
            }
            let _ = writeln!(out, "row {} = {}", dense.join(" "), format_rational(b));
        }
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                let _ = writeln!(out, "upper {j} {}", format_rational(u));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<BigRational>,
    pub objective: Option<BigRational>,
    /// Basic columns, in terms of the program's own variables. Columns at or
    /// beyond `num_vars` are slacks of upper-bound rows.
    pub basis: Vec<usize>,
    pub is_vertex: bool,
    /// One multiplier per equality row followed by one per finite upper
    /// bound (for `x_j + slack = u_j`).
    pub dual: Vec<BigRational>,
    /// Whether `dual` was checked to be feasible with objective equal to the
    /// primal objective.
    pub dual_verified: bool,
    pub pivots: usize,
}

impl LpSolution {
    pub(crate) fn without_optimum(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: None,
            basis: Vec::new(),
            is_vertex: false,
            dual: Vec::new(),
            dual_verified: false,
            pivots,
        }
    }
}

/// Exact integrality test on an optimal solution.
pub fn is_integral(solution: &LpSolution) -> Result<bool, LpError> {
    if solution.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal);
    }
    Ok(solution.values.iter().all(|v| v.is_integer()))
}

pub(crate) fn floor(v: &BigRational) -> BigInt {
    v.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn integrality() {
        let mut sol = LpSolution::without_optimum(LpStatus::Optimal, 0);
        sol.values = vec![int(1), int(0), int(3)];
        assert_eq!(is_integral(&sol), Ok(true));
        sol.values = vec![rat(1, 2), rat(1, 2)];
        assert_eq!(is_integral(&sol), Ok(false));
        let infeasible = LpSolution::without_optimum(LpStatus::Infeasible, 0);
        assert_eq!(is_integral(&infeasible), Err(LpError::NotOptimal));
    }

    #[test]
    fn text_dump() {
        let mut lp = LinearProgram::new(vec![int(1), rat(1, 2)]);
        lp.add_row([(0, int(1)), (1, int(-1)), (0, int(1))], int(3));
        lp.set_upper(1, Some(int(4)));
        assert_eq!(lp.to_text(), "vars 2\nmin 1 1/2\nrow 2 -1 = 3\nupper 1 4\n");
    }

    #[test]
    fn feasibility_is_exact() {
        let mut lp = LinearProgram::new(vec![int(1), int(1)]);
        lp.add_row([(0, int(1)), (1, int(1))], rat(1, 3));
        assert!(lp.is_feasible(&[rat(1, 6), rat(1, 6)]));
        assert!(!lp.is_feasible(&[rat(1, 6), rat(1, 7)]));
        assert!(!lp.is_feasible(&[rat(1, 2), rat(-1, 6)]));
    }
}
