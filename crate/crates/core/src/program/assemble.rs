//! Pathwise instantiation: turn a program template plus sample paths (and
//! optionally a nearest-neighbor cell layout) into one concrete MILP whose
//! variables are basis weights and per-path auxiliaries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::milp::{Constraint, MilpProblem, Rel, Sense, SolveStatus, SolverOptions, Variable};
use crate::models::PathView;

use super::{ConScope, OptionProgram, VarId, VarKind, VarScope};

/// Voronoi-cell layout of the decision dates `anchor..=T`.
///
/// `cells[n][k]` is the cell of path `n` at offset `k` from the anchor;
/// `counts[k]` is the scheduled basis size at that offset.
#[derive(Debug, Clone)]
pub struct CellLayout {
    pub anchor: usize,
    pub counts: Vec<usize>,
    pub cells: Vec<Vec<u32>>,
}

impl CellLayout {
    /// Single-path, single-cell layout (plain pathwise instantiation).
    pub fn trivial(anchor: usize, horizon_dates: usize, n_paths: usize) -> CellLayout {
        CellLayout {
            anchor,
            counts: vec![1; horizon_dates],
            cells: vec![vec![0; horizon_dates]; n_paths],
        }
    }
}

/// A concrete MILP plus the maps needed to read decisions back out.
pub struct Assembly {
    pub problem: MilpProblem,
    pub anchor: usize,
    /// Column of weight (program var, visited-cell slot); indexed per var.
    weight_cols: Vec<Vec<usize>>,
    /// Slot of each cell per offset (u32::MAX when the cell is unvisited).
    slot_of_cell: Vec<Vec<u32>>,
    /// Column of each per-path auxiliary copy: `aux_cols[var][path]`.
    aux_cols: Vec<Vec<usize>>,
    /// Columns of the per-path OR stop variables (dual assembly only).
    pub stop_cols: Vec<Vec<Option<usize>>>,
}

impl Assembly {
    /// Column of the anchor-cell weight of a decision variable.
    pub fn anchor_col(&self, var: VarId) -> Option<usize> {
        self.weight_cols[var.0].first().copied()
    }

    /// Column of the weight of `var` in cell `cell` (if visited).
    pub fn weight_col(&self, program: &OptionProgram, var: VarId, cell: u32) -> Option<usize> {
        let k = program.var(var).time - self.anchor;
        let slot = self.slot_of_cell[k][cell as usize];
        if slot == u32::MAX {
            None
        } else {
            Some(self.weight_cols[var.0][slot as usize])
        }
    }

    pub fn aux_col(&self, var: VarId, path: usize) -> usize {
        self.aux_cols[var.0][path]
    }

    /// Solve, tolerating the fully-determined case with no variables.
    pub fn solve(&self, opts: &SolverOptions) -> Result<crate::milp::MilpSolution> {
        if self.problem.vars.is_empty() {
            return Ok(crate::milp::MilpSolution {
                status: SolveStatus::Optimal,
                objective: self.problem.obj_offset,
                x: Vec::new(),
                best_bound: self.problem.obj_offset,
                nodes: 0,
                simplex_iters: 0,
            });
        }
        crate::milp::solve_milp(&self.problem, opts)
    }
}

enum Resolved {
    Col(usize),
    Const(f64),
}

struct Builder<'a> {
    program: &'a OptionProgram,
    layout: &'a CellLayout,
    fixed: &'a [Option<f64>],
    big_m: f64,
    bound_m: f64,
    problem: MilpProblem,
    weight_cols: Vec<Vec<usize>>,
    slot_of_cell: Vec<Vec<u32>>,
    visited: Vec<Vec<u32>>,
    aux_cols: Vec<Vec<usize>>,
}

impl<'a> Builder<'a> {
    fn clamp(&self, b: f64) -> f64 {
        if b.is_finite() {
            b
        } else if b > 0.0 {
            self.bound_m
        } else {
            -self.bound_m
        }
    }

    /// Resolve a variable mention on a path to a column or a constant.
    fn resolve(&self, var: VarId, path: usize) -> Result<Resolved> {
        let v = self.program.var(var);
        match v.scope {
            VarScope::PathAux => Ok(Resolved::Col(self.aux_cols[var.0][path])),
            VarScope::Decision => {
                if v.time < self.layout.anchor {
                    match self.fixed[var.0] {
                        Some(val) => Ok(Resolved::Const(val)),
                        None => Err(Error::InfeasibleHistory(format!(
                            "decision {} at date {} has no fixed value before anchor {}",
                            v.name, v.time, self.layout.anchor
                        ))),
                    }
                } else {
                    let k = v.time - self.layout.anchor;
                    let cell = self.layout.cells[path][k];
                    let slot = self.slot_of_cell[k][cell as usize];
                    debug_assert_ne!(slot, u32::MAX);
                    Ok(Resolved::Col(self.weight_cols[var.0][slot as usize]))
                }
            }
        }
    }
}

/// Assemble the program over `paths` with the given cell layout.
///
/// Decision variables dated before the anchor read their values from
/// `fixed`; per-path constraints are replicated over paths (with duplicate
/// rows collapsed); per-cell constraints are replicated over the visited
/// cells at their date. The objective is the average over paths of the
/// payoff plus an optional per-path additive term ("penalty", used for the
/// dual payoff).
pub fn assemble(
    program: &OptionProgram,
    paths: &[PathView<'_>],
    layout: &CellLayout,
    fixed: &[Option<f64>],
    price_bound: f64,
    penalty: Option<&dyn Fn(usize, usize) -> f64>, // (path, date) -> martingale value
) -> Result<Assembly> {
    let n_paths = paths.len();
    if n_paths == 0 || layout.cells.len() != n_paths {
        return Err(Error::Shape("assemble: need one cell row per path".into()));
    }
    let dates = program.dates();
    if layout.anchor > dates {
        return Err(Error::Shape("assemble: anchor beyond the horizon".into()));
    }
    let horizon = dates - layout.anchor;
    if layout.counts.len() != horizon {
        return Err(Error::Shape("assemble: cell layout must cover anchor..=T".into()));
    }
    let big_m = if program.bigm_unit > 0.0 { (program.bigm_unit * price_bound).max(1.0) } else { 0.0 };
    let bound_m = if big_m > 0.0 { big_m } else { 1.0 };

    // Visited cells per offset, slot-compacted in cell order.
    let mut slot_of_cell: Vec<Vec<u32>> = layout.counts.iter().map(|&c| vec![u32::MAX; c]).collect();
    let mut visited: Vec<Vec<u32>> = vec![Vec::new(); horizon];
    for row in &layout.cells {
        for (k, &cell) in row.iter().enumerate() {
            let slot = &mut slot_of_cell[k][cell as usize];
            if *slot == u32::MAX {
                *slot = visited[k].len() as u32;
                visited[k].push(cell);
            }
        }
    }

    let mut b = Builder {
        program,
        layout,
        fixed,
        big_m,
        bound_m,
        problem: MilpProblem::new(Sense::Maximize),
        weight_cols: vec![Vec::new(); program.vars.len()],
        slot_of_cell,
        visited,
        aux_cols: vec![Vec::new(); program.vars.len()],
    };

    // Weight columns for decision variables at and after the anchor, one per
    // visited cell.
    for (i, v) in program.vars.iter().enumerate() {
        if v.scope != VarScope::Decision || v.time < layout.anchor {
            continue;
        }
        let k = v.time - layout.anchor;
        let slots = b.visited[k].len();
        let mut cols = Vec::with_capacity(slots);
        for _ in 0..slots {
            cols.push(b.problem.add_var(Variable {
                lo: b.clamp(v.lo),
                hi: b.clamp(v.hi),
                obj: 0.0,
                binary: v.kind == VarKind::Binary,
            }));
        }
        b.weight_cols[i] = cols;
    }
    // Per-path auxiliary copies.
    for (i, v) in program.vars.iter().enumerate() {
        if v.scope != VarScope::PathAux {
            continue;
        }
        let mut cols = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            cols.push(b.problem.add_var(Variable {
                lo: b.clamp(v.lo),
                hi: b.clamp(v.hi),
                obj: 0.0,
                binary: v.kind == VarKind::Binary,
            }));
        }
        b.aux_cols[i] = cols;
    }

    // Objective: average payoff over paths plus history constant.
    let inv_n = 1.0 / n_paths as f64;
    for (coef, var) in &program.payoff {
        for (n, path) in paths.iter().enumerate() {
            let c = coef.eval(path, &program.grid, big_m);
            if c == 0.0 {
                continue;
            }
            match b.resolve(*var, n)? {
                Resolved::Col(col) => b.problem.vars[col].obj += inv_n * c,
                Resolved::Const(val) => b.problem.obj_offset += inv_n * c * val,
            }
        }
    }

    // Constraints.
    let mut row_seen: HashMap<(Vec<(usize, u64)>, u8, u64), ()> = HashMap::new();
    for con in &program.constraints {
        match con.scope {
            ConScope::PerCell { time } => {
                if time < layout.anchor {
                    // Fully historical: check feasibility of the fixed values.
                    let mut lhs = 0.0;
                    for (coef, var) in &con.terms {
                        debug_assert!(coef.is_path_free());
                        let val = fixed[var.0].ok_or_else(|| {
                            Error::InfeasibleHistory(format!(
                                "cell constraint at {time} references unfixed {}",
                                program.var(*var).name
                            ))
                        })?;
                        lhs += coef.eval(&paths[0], &program.grid, big_m) * val;
                    }
                    check_const_row(lhs, con.rel, con.rhs + con.rhs_bigm * big_m)?;
                    continue;
                }
                let k = time - layout.anchor;
                for slot in 0..b.visited[k].len() {
                    let mut terms = Vec::with_capacity(con.terms.len());
                    for (coef, var) in &con.terms {
                        let c = coef.eval(&paths[0], &program.grid, big_m);
                        debug_assert!(coef.is_path_free());
                        debug_assert_eq!(program.var(*var).time, time);
                        terms.push((b.weight_cols[var.0][slot], c));
                    }
                    b.problem.add_con(Constraint::new(terms, con.rel, con.rhs + con.rhs_bigm * big_m));
                }
            }
            ConScope::PerPath => {
                for (n, path) in paths.iter().enumerate() {
                    let mut terms: Vec<(usize, f64)> = Vec::with_capacity(con.terms.len());
                    let mut rhs = con.rhs + con.rhs_bigm * big_m;
                    for (coef, var) in &con.terms {
                        let c = coef.eval(path, &program.grid, big_m);
                        if c == 0.0 {
                            continue;
                        }
                        match b.resolve(*var, n)? {
                            Resolved::Col(col) => terms.push((col, c)),
                            Resolved::Const(val) => rhs -= c * val,
                        }
                    }
                    if terms.is_empty() {
                        check_const_row(0.0, con.rel, rhs)?;
                        continue;
                    }
                    terms.sort_by_key(|&(c, _)| c);
                    let key = (
                        terms.iter().map(|&(c, a)| (c, a.to_bits())).collect::<Vec<_>>(),
                        con.rel as u8,
                        rhs.to_bits(),
                    );
                    if row_seen.insert(key, ()).is_none() {
                        b.problem.add_con(Constraint::new(terms, con.rel, rhs));
                    }
                }
            }
        }
    }

    // Additive per-path penalty on the weighting stopping time (dual form).
    let mut stop_cols: Vec<Vec<Option<usize>>> = vec![vec![None; dates]; n_paths];
    if let Some(pen) = penalty {
        for (n, _path) in paths.iter().enumerate() {
            for t in 0..dates {
                let stops = &program.stop_vars[t];
                if stops.is_empty() {
                    continue;
                }
                let m_t = pen(n, t);
                if t < layout.anchor {
                    // Historical stop weight is a constant.
                    let mut w = 0.0;
                    for v in stops {
                        if fixed[v.0].unwrap_or(0.0) > 0.5 {
                            w = 1.0;
                        }
                    }
                    b.problem.obj_offset -= inv_n * m_t * w;
                    continue;
                }
                if stops.len() == 1 {
                    match b.resolve(stops[0], n)? {
                        Resolved::Col(col) => {
                            b.problem.vars[col].obj -= inv_n * m_t;
                            stop_cols[n][t] = Some(col);
                        }
                        Resolved::Const(w) => b.problem.obj_offset -= inv_n * m_t * w,
                    }
                } else {
                    // OR variable with both-direction forcing rows.
                    let or_col = b.problem.add_var(Variable::binary(-inv_n * m_t));
                    let mut sum_terms = vec![(or_col, 1.0)];
                    let mut const_sum = 0.0;
                    for v in stops {
                        match b.resolve(*v, n)? {
                            Resolved::Col(col) => {
                                // or >= each binary
                                b.problem.add_con(Constraint::new(
                                    vec![(or_col, 1.0), (col, -1.0)],
                                    Rel::Ge,
                                    0.0,
                                ));
                                sum_terms.push((col, -1.0));
                            }
                            Resolved::Const(val) => {
                                if val > 0.5 {
                                    b.problem.add_con(Constraint::new(vec![(or_col, 1.0)], Rel::Ge, 1.0));
                                    const_sum += 1.0;
                                }
                            }
                        }
                    }
                    // or <= sum of binaries, fixed ones folded into the rhs
                    b.problem.add_con(Constraint::new(sum_terms, Rel::Le, const_sum));
                    stop_cols[n][t] = Some(or_col);
                }
            }
        }
    }

    Ok(Assembly {
        problem: b.problem,
        anchor: layout.anchor,
        weight_cols: b.weight_cols,
        slot_of_cell: b.slot_of_cell,
        aux_cols: b.aux_cols,
        stop_cols,
    })
}

fn check_const_row(lhs: f64, rel: Rel, rhs: f64) -> Result<()> {
    let ok = match rel {
        Rel::Le => lhs <= rhs + 1e-6,
        Rel::Ge => lhs >= rhs - 1e-6,
        Rel::Eq => (lhs - rhs).abs() <= 1e-6,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InfeasibleHistory(format!(
            "fixed decisions violate a constraint: {lhs} {rel:?} {rhs}"
        )))
    }
}

/// Concrete MILP for one path: path values become numeric coefficients and
/// fixed decisions become constants. The optimum is the pathwise residual
/// payoff maximum from `anchor` onward (plus the realized history payoff).
pub fn instantiate_on_path(
    program: &OptionProgram,
    path: &PathView<'_>,
    anchor: usize,
    fixed: &[Option<f64>],
    price_bound: f64,
) -> Result<Assembly> {
    let horizon = program.dates() - anchor;
    let layout = CellLayout::trivial(anchor, horizon, 1);
    assemble(program, std::slice::from_ref(path), &layout, fixed, price_bound, None)
}

/// Lookahead program over basis weights: average residual payoff across the
/// conditional paths, constraints imposed on every path with shared weights.
pub fn instantiate_lookahead(
    program: &OptionProgram,
    paths: &[PathView<'_>],
    layout: &CellLayout,
    fixed: &[Option<f64>],
    price_bound: f64,
) -> Result<Assembly> {
    assemble(program, paths, layout, fixed, price_bound, None)
}

/// Dual payoff program on one path: the pathwise MILP plus the penalty
/// `-sum_t M_t w_t` on the weighting stopping time.
pub fn instantiate_dual(
    program: &OptionProgram,
    path: &PathView<'_>,
    martingale: &[f64],
    price_bound: f64,
) -> Result<Assembly> {
    assert!(martingale.len() >= program.dates());
    let layout = CellLayout::trivial(0, program.dates(), 1);
    let fixed = vec![None; program.vars.len()];
    let pen = move |_n: usize, t: usize| martingale[t];
    assemble(program, std::slice::from_ref(path), &layout, &fixed, price_bound, Some(&pen))
}
