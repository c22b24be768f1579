//! Multiscale simplicial flat norm: `min_s Σ w_i |x_i| + λ Σ v_j |s_j|`
//! over integer `s` with `x = t − [∂_{d+1}] s`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{BoundaryMatrix, Chain, ComplexError, SimplicialComplex};
use crate::exact::{common_denominator, rationalize};
use crate::geometry::simplex_volume;
use crate::lp::{
    is_integral, solve_ilp, solve_lp, solve_tension, IlpOptions, IlpStatus, LinearProgram, LpStatus, NetworkError,
    TensionArc, TensionProblem,
};
use crate::tu::network_column_signs;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsfnError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("λ must be nonnegative")]
    NegativeLambda,
    #[error("negative weight at index {0}")]
    NegativeWeight(usize),
    #[error("{which} weights have length {found}, expected {expected}")]
    WeightLength { which: &'static str, expected: usize, found: usize },
    #[error("linear program unexpectedly {0:?}")]
    Solver(LpStatus),
    #[error("branch and bound node budget exhausted")]
    NodeBudgetExceeded { incumbent: Option<Box<MsfnResult>> },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    LpOnly,
    BranchAndBound,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpMethod {
    /// Network route when the boundary matrix admits it, simplex otherwise.
    #[default]
    Auto,
    Simplex,
    Network,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MsfnOptions {
    pub method: LpMethod,
    pub ilp: IlpOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsfnProblem<'a> {
    complex: &'a SimplicialComplex,
    d: usize,
    t: Chain,
    lambda: BigRational,
    w: Vec<BigRational>,
    v: Vec<BigRational>,
    multiplicity_cap: bool,
}

impl<'a> MsfnProblem<'a> {
    pub fn new(
        complex: &'a SimplicialComplex,
        t: Chain,
        lambda: BigRational,
        w: Vec<BigRational>,
        v: Vec<BigRational>,
    ) -> Result<Self, MsfnError> {
        let d = t.dim();
        if d + 1 > complex.top_dim() {
            return Err(ComplexError::DimensionOutOfRange { dim: d + 1, top: complex.top_dim() }.into());
        }
        if let Some(index) = t.max_index() {
            if index >= complex.count(d) {
                return Err(ComplexError::SimplexIndexOutOfRange { dim: d, index }.into());
            }
        }
        if lambda.is_negative() {
            return Err(MsfnError::NegativeLambda);
        }
        for (which, weights, expected) in [("d-simplex", &w, complex.count(d)), ("(d+1)-simplex", &v, complex.count(d + 1))] {
            if weights.len() != expected {
                return Err(MsfnError::WeightLength { which, expected, found: weights.len() });
            }
            if let Some(i) = weights.iter().position(|x| x.is_negative()) {
                return Err(MsfnError::NegativeWeight(i));
            }
        }
        Ok(Self { complex, d, t, lambda, w, v, multiplicity_cap: false })
    }

    /// Euclidean volumes of `d`- and `(d+1)`-simplices, rationalized.
    pub fn euclidean(complex: &'a SimplicialComplex, t: Chain, lambda: BigRational) -> Result<Self, MsfnError> {
        let d = t.dim();
        let w = euclidean_weights(complex, d)?;
        let v = euclidean_weights(complex, d + 1)?;
        Self::new(complex, t, lambda, w, v)
    }

    pub fn unit(complex: &'a SimplicialComplex, t: Chain, lambda: BigRational) -> Result<Self, MsfnError> {
        let d = t.dim();
        let w = unit_weights(complex, d);
        let v = unit_weights(complex, d + 1);
        Self::new(complex, t, lambda, w, v)
    }

    /// Restricts every variable (both signs of x and s) to at most 1.
    pub fn with_multiplicity_cap(mut self, cap: bool) -> Self {
        self.multiplicity_cap = cap;
        self
    }

    pub fn with_lambda(&self, lambda: BigRational) -> Result<Self, MsfnError> {
        if lambda.is_negative() {
            return Err(MsfnError::NegativeLambda);
        }
        Ok(Self { lambda, ..self.clone() })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        self.complex
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn chain(&self) -> &Chain {
        &self.t
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn w(&self) -> &[BigRational] {
        &self.w
    }

    pub fn v(&self) -> &[BigRational] {
        &self.v
    }

    pub fn multiplicity_cap(&self) -> bool {
        self.multiplicity_cap
    }

    /// `Σ w_i |t_i|`, the value attained by `s = 0`.
    pub fn input_mass(&self) -> BigRational {
        mass(&self.t, &self.w)
    }
}

pub fn euclidean_weights(complex: &SimplicialComplex, dim: usize) -> Result<Vec<BigRational>, MsfnError> {
    (0..complex.count(dim))
        .map(|i| Ok(rationalize(simplex_volume(&complex.simplex_points(dim, i)?))))
        .collect()
}

pub fn unit_weights(complex: &SimplicialComplex, dim: usize) -> Vec<BigRational> {
    vec![BigRational::one(); complex.count(dim)]
}

pub fn mass(chain: &Chain, weights: &[BigRational]) -> BigRational {
    chain.iter().map(|(i, c)| &weights[i] * BigRational::from_integer(BigInt::from(c.abs()))).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsfnResult {
    pub x: Chain,
    pub s: Chain,
    pub flat_norm: BigRational,
    pub x_mass: BigRational,
    pub s_mass: BigRational,
    pub lp_was_integral: bool,
    /// Optimum of the relaxation; differs from `flat_norm` only after branch and bound.
    pub lp_objective: BigRational,
    pub solver_path: SolverPath,
    pub lp_method: LpMethod,
    pub proven_optimal: bool,
    pub node_count: usize,
}

/// The relaxation in standard form. Columns are `x⁺, x⁻, s⁺, s⁻`; rows read
/// `x⁺ − x⁻ + B(s⁺ − s⁻) = t`. With the multiplicity cap every column `y`
/// gets a slack `y'` and a row `y + y' = 1`.
pub fn formulate(problem: &MsfnProblem) -> Result<LinearProgram, MsfnError> {
    let b = problem.complex.boundary_matrix(problem.d)?;
    Ok(formulate_with(problem, &b))
}

fn formulate_with(problem: &MsfnProblem, b: &BoundaryMatrix) -> LinearProgram {
    let m = b.rows();
    let n = b.cols();
    let cols = 2 * m + 2 * n;
    let scaled: Vec<BigRational> = problem.v.iter().map(|v| v * &problem.lambda).collect();
    let mut cost: Vec<BigRational> =
        problem.w.iter().chain(&problem.w).chain(&scaled).chain(&scaled).cloned().collect();
    if problem.multiplicity_cap {
        cost.resize(2 * cols, BigRational::zero());
    }
    let mut lp = LinearProgram::new(cost);
    let rows = b.row_entries();
    for (i, row) in rows.iter().enumerate() {
        let one = BigRational::one();
        let mut entries = vec![(i, one.clone()), (m + i, -one)];
        for &(j, sign) in row {
            let a = BigRational::from_integer(BigInt::from(sign));
            entries.push((2 * m + j, a.clone()));
            entries.push((2 * m + n + j, -a));
        }
        lp.add_row(entries, BigRational::from_integer(BigInt::from(problem.t.get(i))));
    }
    if problem.multiplicity_cap {
        for y in 0..cols {
            lp.add_row([(y, BigRational::one()), (cols + y, BigRational::one())], BigRational::one());
        }
    }
    lp
}

fn decode(
    problem: &MsfnProblem,
    b: &BoundaryMatrix,
    s: Chain,
    lp_objective: BigRational,
    meta: (bool, SolverPath, LpMethod, bool, usize),
) -> MsfnResult {
    let x = &problem.t - &b.apply(&s).expect("s has dimension d+1");
    let x_mass = mass(&x, &problem.w);
    let s_mass = mass(&s, &problem.v);
    let flat_norm = &x_mass + &problem.lambda * &s_mass;
    let (lp_was_integral, solver_path, lp_method, proven_optimal, node_count) = meta;
    MsfnResult {
        x,
        s,
        flat_norm,
        x_mass,
        s_mass,
        lp_was_integral,
        lp_objective,
        solver_path,
        lp_method,
        proven_optimal,
        node_count,
    }
}

fn s_from_values(values: &[BigRational], m: usize, n: usize, dim: usize) -> Chain {
    let dense: Vec<i64> = (0..n)
        .map(|j| {
            let v = &values[2 * m + j] - &values[2 * m + n + j];
            v.to_integer().to_i64().expect("integral value fits in i64")
        })
        .collect();
    Chain::from_dense(dim, &dense)
}

/// Exact integer scaling of the problem weights, if it fits comfortably in
/// `i128` arithmetic.
fn integer_weights(problem: &MsfnProblem) -> Option<(Vec<i128>, Vec<i128>, BigInt)> {
    let scaled_v: Vec<BigRational> = problem.v.iter().map(|v| v * &problem.lambda).collect();
    let scale = common_denominator(problem.w.iter().chain(&scaled_v));
    let limit = BigInt::one() << 90;
    let to_int = |r: &BigRational| -> Option<i128> {
        let value = (r * BigRational::from_integer(scale.clone())).to_integer();
        if value > limit {
            return None;
        }
        value.to_i128()
    };
    let w: Option<Vec<i128>> = problem.w.iter().map(to_int).collect();
    let v: Option<Vec<i128>> = scaled_v.iter().map(to_int).collect();
    let (w, v) = (w?, v?);
    let total = w.iter().chain(&v).try_fold(0i128, |acc, x| acc.checked_add(*x))?;
    (total < (1i128 << 100)).then_some((w, v, scale))
}

fn solve_network(problem: &MsfnProblem, b: &BoundaryMatrix) -> Result<Option<MsfnResult>, MsfnError> {
    if problem.multiplicity_cap {
        return Ok(None);
    }
    let Some(sigma) = network_column_signs(b) else { return Ok(None) };
    let Some((w, v, scale)) = integer_weights(problem) else { return Ok(None) };
    let n = b.cols();
    let ground = n;
    let mut arcs = Vec::with_capacity(b.rows() + n);
    for (i, row) in b.row_entries().iter().enumerate() {
        let target = problem.t.get(i);
        // the row of B·diag(σ) reads +1 at `tail` and −1 at `head`
        let oriented: Vec<(usize, i8)> = row.iter().map(|&(j, s)| (j, s * sigma[j])).collect();
        let (tail, head) = match oriented.as_slice() {
            [] => (ground, ground),
            [(j, 1)] => (*j, ground),
            [(j, _)] => (ground, *j),
            [(a, 1), (c, _)] => (*a, *c),
            [(a, _), (c, _)] => (*c, *a),
            _ => unreachable!("network rows have at most two entries"),
        };
        arcs.push(TensionArc { tail, head, target, weight: w[i] });
    }
    for (j, &weight) in v.iter().enumerate() {
        arcs.push(TensionArc { tail: j, head: ground, target: 0, weight });
    }
    let tension = TensionProblem { nodes: n + 1, arcs };
    let sol = solve_tension(&tension, ground)?;
    let s = Chain::from_pairs(problem.d + 1, (0..n).map(|j| (j, i64::from(sigma[j]) * sol.potentials[j])));
    let objective = BigRational::new(BigInt::from(sol.objective), scale);
    let result = decode(problem, b, s, objective.clone(), (true, SolverPath::LpOnly, LpMethod::Network, true, 0));
    assert_eq!(result.flat_norm, objective, "network certificate disagrees with decoded masses");
    Ok(Some(result))
}

pub fn compute_msfn(problem: &MsfnProblem) -> Result<MsfnResult, MsfnError> {
    compute_msfn_with(problem, MsfnOptions::default())
}

pub fn compute_msfn_with(problem: &MsfnProblem, options: MsfnOptions) -> Result<MsfnResult, MsfnError> {
    let b = problem.complex.boundary_matrix(problem.d)?;
    if options.method != LpMethod::Simplex {
        if let Some(result) = solve_network(problem, &b)? {
            return Ok(result);
        }
    }
    let m = b.rows();
    let n = b.cols();
    let lp = formulate_with(problem, &b);
    let root = solve_lp(&lp);
    if root.status != LpStatus::Optimal {
        return Err(MsfnError::Solver(root.status));
    }
    let lp_objective = root.objective.clone().expect("optimal objective");
    let dim = problem.d + 1;
    if is_integral(&root).expect("optimal") {
        let s = s_from_values(&root.values, m, n, dim);
        let result = decode(problem, &b, s, lp_objective.clone(), (true, SolverPath::LpOnly, LpMethod::Simplex, true, 0));
        debug_assert_eq!(result.flat_norm, lp_objective);
        return Ok(result);
    }
    let ilp = solve_ilp(&lp, options.ilp);
    let values: Vec<BigRational> = ilp.values.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    let build = |proven: bool| {
        let s = s_from_values(&values, m, n, dim);
        decode(
            problem,
            &b,
            s,
            lp_objective.clone(),
            (false, SolverPath::BranchAndBound, LpMethod::Simplex, proven, ilp.node_count),
        )
    };
    match ilp.status {
        IlpStatus::Optimal => Ok(build(true)),
        IlpStatus::BudgetExceeded => Err(MsfnError::NodeBudgetExceeded {
            incumbent: (!values.is_empty()).then(|| Box::new(build(false))),
        }),
        IlpStatus::Infeasible => Err(MsfnError::Solver(LpStatus::Infeasible)),
        IlpStatus::Unbounded => Err(MsfnError::Solver(LpStatus::Unbounded)),
    }
}

/// λ = 0 with unit weights: a minimal 1-norm chain homologous to `t`.
pub fn ohcp_mode(complex: &SimplicialComplex, t: Chain) -> Result<MsfnResult, MsfnError> {
    compute_msfn(&MsfnProblem::unit(complex, t, BigRational::zero())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    pub lower: BigRational,
    pub upper: BigRational,
    /// Where the optimal lines of the two bracketing results cross.
    pub crossing: Option<BigRational>,
    /// The crossing was re-solved and both lines are optimal there.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub points: Vec<(BigRational, MsfnResult)>,
    pub breakpoints: Vec<Breakpoint>,
}

/// One solve per λ (in parallel, results in input order) plus the λ
/// intervals where the optimal `(x_mass, s_mass)` pair changes.
pub fn lambda_sweep(problem: &MsfnProblem, lambdas: &[BigRational], options: MsfnOptions) -> Result<Sweep, MsfnError> {
    let solve = |lambda: &BigRational| -> Result<MsfnResult, MsfnError> {
        compute_msfn_with(&problem.with_lambda(lambda.clone())?, options)
    };
    let results: Vec<MsfnResult> = lambdas.par_iter().map(solve).collect::<Result<_, _>>()?;
    let mut breakpoints = Vec::new();
    for k in 1..results.len() {
        let (a, b) = (&results[k - 1], &results[k]);
        if a.x_mass == b.x_mass && a.s_mass == b.s_mass {
            continue;
        }
        let slope = &a.s_mass - &b.s_mass;
        let crossing = (!slope.is_zero()).then(|| (&b.x_mass - &a.x_mass) / slope);
        let crossing = crossing.filter(|c| *c >= lambdas[k - 1] && *c <= lambdas[k]);
        let verified = match &crossing {
            Some(c) => {
                let at = solve(c)?;
                at.flat_norm == &a.x_mass + c * &a.s_mass && at.flat_norm == &b.x_mass + c * &b.s_mass
            }
            None => false,
        };
        breakpoints.push(Breakpoint { lower: lambdas[k - 1].clone(), upper: lambdas[k].clone(), crossing, verified });
    }
    Ok(Sweep { points: lambdas.iter().cloned().zip(results).collect(), breakpoints })
}
