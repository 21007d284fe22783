//! Self-contained solver for the small mixed-integer and continuous linear
//! programs produced by pathwise instantiation, the lookahead search and the
//! Frank-Wolfe master step: a bounded-variable primal simplex plus best-first
//! branch-and-bound on binaries.

mod branch;
mod presolve;
mod simplex;
mod textfmt;

pub use textfmt::write_lp_format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

/// One decision variable: finite bounds, objective coefficient, optional
/// binary flag (binaries must have bounds within [0, 1]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Variable {
    pub lo: f64,
    pub hi: f64,
    pub obj: f64,
    pub binary: bool,
}

impl Variable {
    pub fn continuous(lo: f64, hi: f64, obj: f64) -> Self {
        Variable { lo, hi, obj, binary: false }
    }

    pub fn binary(obj: f64) -> Self {
        Variable { lo: 0.0, hi: 1.0, obj, binary: true }
    }

    pub fn fixed(value: f64) -> Self {
        Variable { lo: value, hi: value, obj: 0.0, binary: false }
    }
}

/// Sparse linear constraint `sum coef * x rel rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(terms: Vec<(usize, f64)>, rel: Rel, rhs: f64) -> Self {
        Constraint { terms, rel, rhs }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpProblem {
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub cons: Vec<Constraint>,
    /// Constant added to the objective value (realized history payoffs).
    pub obj_offset: f64,
}

impl MilpProblem {
    pub fn new(sense: Sense) -> Self {
        MilpProblem { sense, vars: Vec::new(), cons: Vec::new(), obj_offset: 0.0 }
    }

    pub fn add_var(&mut self, v: Variable) -> usize {
        self.vars.push(v);
        self.vars.len() - 1
    }

    pub fn add_con(&mut self, c: Constraint) {
        self.cons.push(c);
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.binary).count()
    }

    fn validate(&self) -> Result<()> {
        if self.vars.is_empty() {
            return Err(Error::parameter("milp: problem has no variables"));
        }
        for (j, v) in self.vars.iter().enumerate() {
            if !v.lo.is_finite() || !v.hi.is_finite() {
                return Err(Error::parameter(format!("milp: variable {j} has non-finite bounds")));
            }
            if v.lo > v.hi + 1e-12 {
                return Err(Error::parameter(format!("milp: variable {j} has lo > hi")));
            }
            if v.binary && (v.lo < -1e-9 || v.hi > 1.0 + 1e-9) {
                return Err(Error::parameter(format!("milp: binary {j} bounds outside [0,1]")));
            }
        }
        for (i, c) in self.cons.iter().enumerate() {
            for &(j, a) in &c.terms {
                if j >= self.vars.len() {
                    return Err(Error::parameter(format!("milp: constraint {i} references missing var {j}")));
                }
                if !a.is_finite() {
                    return Err(Error::parameter(format!("milp: constraint {i} has non-finite coefficient")));
                }
            }
            if !c.rhs.is_finite() {
                return Err(Error::parameter(format!("milp: constraint {i} has non-finite rhs")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Bound proved by branch-and-bound (equals objective at optimality).
    pub best_bound: f64,
    pub nodes: u64,
    pub simplex_iters: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub int_tol: f64,
    pub gap_tol: f64,
    pub max_simplex_iters: u64,
    pub max_nodes: u64,
    /// Engage Bland's rule after this many consecutive non-improving pivots.
    pub bland_after: u32,
    /// Switch from best-bound to diving when the node queue exceeds this.
    pub node_queue_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-7,
            int_tol: 1e-7,
            gap_tol: 1e-6,
            max_simplex_iters: 2_000_000,
            max_nodes: 2_000_000,
            bland_after: 64,
            node_queue_cap: 50_000,
        }
    }
}

/// Solve the linear relaxation (integrality dropped).
pub fn solve_lp(problem: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution> {
    problem.validate()?;
    presolve::solve_decomposed(problem, opts, false)
}

/// Solve to global optimality over the binaries.
pub fn solve_milp(problem: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution> {
    problem.validate()?;
    presolve::solve_decomposed(problem, opts, true)
}

/// Check a point against every constraint and bound of a problem.
pub fn feasibility_residual(problem: &MilpProblem, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, v) in problem.vars.iter().enumerate() {
        worst = worst.max(v.lo - x[j]).max(x[j] - v.hi);
    }
    for c in &problem.cons {
        let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
        let r = match c.rel {
            Rel::Le => lhs - c.rhs,
            Rel::Ge => c.rhs - lhs,
            Rel::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(r);
    }
    worst
}

pub(crate) fn objective_value(problem: &MilpProblem, x: &[f64]) -> f64 {
    problem.obj_offset + problem.vars.iter().zip(x).map(|(v, &xj)| v.obj * xj).sum::<f64>()
}
