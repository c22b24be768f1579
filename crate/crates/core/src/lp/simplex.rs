//! Two-phase primal simplex on a dense rational tableau, Bland's rule.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpSolution, LpStatus};

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    /// Reduced costs; the last entry holds minus the objective value.
    z: Vec<BigRational>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.z.len()
    }

    fn rhs(&self, i: usize) -> &BigRational {
        self.rows[i].last().expect("tableau row has a rhs")
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        let nz: Vec<usize> = (0..self.width()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nz {
            self.rows[r][j] *= &inv;
        }
        let pivot_row: Vec<(usize, BigRational)> = nz.iter().map(|&j| (j, self.rows[r][j].clone())).collect();
        let eliminate = |row: &mut Vec<BigRational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (j, v) in &pivot_row {
                row[*j] -= &f * v;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.z);
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn set_costs(&mut self, cost: &[BigRational]) {
        let w = self.width();
        let mut z: Vec<BigRational> = (0..w).map(|j| cost.get(j).cloned().unwrap_or_else(BigRational::zero)).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = match cost.get(self.basis[i]) {
                Some(c) if !c.is_zero() => c,
                _ => continue,
            };
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    z[j] -= cb * a;
                }
            }
        }
        self.z = z;
    }

    /// Runs Bland iterations over columns `< allowed`. Returns false when
    /// the objective is unbounded below.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.z[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solves the program exactly. Optimal results carry a verified dual.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n0 = lp.num_vars();
    // upper bounds become rows x_j + slack = u_j
    let bounded: Vec<usize> = (0..n0).filter(|&j| lp.upper()[j].is_some()).collect();
    let n = n0 + bounded.len();
    let mut a_rows: Vec<Vec<(usize, BigRational)>> = lp.rows().to_vec();
    let mut b: Vec<BigRational> = lp.rhs().to_vec();
    for (k, &j) in bounded.iter().enumerate() {
        a_rows.push(vec![(j, BigRational::one()), (n0 + k, BigRational::one())]);
        b.push(lp.upper()[j].clone().expect("bounded column"));
    }
    let mut cost = lp.cost().to_vec();
    cost.resize(n, BigRational::zero());

    // presolve: empty rows are either trivially satisfied or infeasible
    let mut kept = Vec::new();
    for (i, row) in a_rows.iter().enumerate() {
        if row.is_empty() {
            if !b[i].is_zero() {
                return LpSolution::without_optimum(LpStatus::Infeasible, 0);
            }
        } else {
            kept.push(i);
        }
    }
    let m = kept.len();
    let sign: Vec<BigRational> =
        kept.iter().map(|&i| if b[i].is_negative() { -BigRational::one() } else { BigRational::one() }).collect();

    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (r, &i) in kept.iter().enumerate() {
        let mut row = vec![BigRational::zero(); width];
        for (j, a) in &a_rows[i] {
            row[*j] = a * &sign[r];
        }
        row[n + r] = BigRational::one();
        row[width - 1] = &b[i] * &sign[r];
        rows.push(row);
    }
    let mut t = Tableau { rows, z: vec![BigRational::zero(); width], basis: (n..n + m).collect(), pivots: 0 };

    let phase_one: Vec<BigRational> =
        (0..n + m).map(|j| if j < n { BigRational::zero() } else { BigRational::one() }).collect();
    t.set_costs(&phase_one);
    t.optimize(n + m);
    if !t.z[width - 1].is_zero() {
        return LpSolution::without_optimum(LpStatus::Infeasible, t.pivots);
    }

    // drive artificials out of the basis; rows where that is impossible are
    // linear combinations of the others
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    kept.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let row_sign: Vec<BigRational> = kept.iter().map(|&i| if b[i].is_negative() { -BigRational::one() } else { BigRational::one() }).collect();
    for row in &mut t.rows {
        row.drain(n..n + m);
    }
    t.z = vec![BigRational::zero(); n + 1];
    t.set_costs(&cost);
    if !t.optimize(n) {
        return LpSolution::without_optimum(LpStatus::Unbounded, t.pivots);
    }

    let mut full = vec![BigRational::zero(); n];
    for (r, &j) in t.basis.iter().enumerate() {
        full[j] = t.rhs(r).clone();
    }
    let objective: BigRational = cost.iter().zip(&full).map(|(c, v)| c * v).sum();

    // duals: solve y^T A_B = c_B on the kept, sign-adjusted rows
    let size = t.basis.len();
    let mut system: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); size + 1]; size];
    for (r, &i) in kept.iter().enumerate() {
        for (j, a) in &a_rows[i] {
            if let Some(col) = t.basis.iter().position(|&bj| bj == *j) {
                system[col][r] = a * &row_sign[r];
            }
        }
    }
    for (col, &j) in t.basis.iter().enumerate() {
        system[col][size] = cost[j].clone();
    }
    let y_kept = solve_square(system);
    let mut dual = vec![BigRational::zero(); a_rows.len()];
    if let Some(y) = &y_kept {
        for (r, &i) in kept.iter().enumerate() {
            dual[i] = &y[r] * &row_sign[r];
        }
    }
    let dual_verified = y_kept.is_some() && verify_dual(&a_rows, &b, &cost, &dual, &objective);
    debug_assert!(dual_verified, "dual certificate failed");

    LpSolution {
        status: LpStatus::Optimal,
        values: full[..n0].to_vec(),
        objective: Some(objective),
        basis: t.basis.clone(),
        is_vertex: true,
        dual,
        dual_verified,
        pivots: t.pivots,
    }
}

fn verify_dual(
    rows: &[Vec<(usize, BigRational)>],
    b: &[BigRational],
    cost: &[BigRational],
    y: &[BigRational],
    objective: &BigRational,
) -> bool {
    let mut reduced = cost.to_vec();
    for (row, yi) in rows.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, a) in row {
            reduced[*j] -= a * yi;
        }
    }
    let dual_objective: BigRational = b.iter().zip(y).map(|(bi, yi)| bi * yi).sum();
    reduced.iter().all(|r| !r.is_negative()) && &dual_objective == objective
}

/// Gauss-Jordan on an augmented square system; None when singular.
fn solve_square(mut m: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}
