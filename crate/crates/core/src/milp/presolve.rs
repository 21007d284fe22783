//! Reductions applied before the simplex and branch-and-bound: singleton
//! rows, fixed-variable substitution, dominated columns, and decomposition
//! of the problem into independent blocks that share no constraints.

use super::{branch, objective_value, Constraint, Error, MilpProblem, MilpSolution, Rel, Result, Sense, SolveStatus, SolverOptions, Variable};

/// Working row in `Le`/`Eq` normal form.
#[derive(Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    eq: bool,
    rhs: f64,
}

pub(crate) fn solve_decomposed(problem: &MilpProblem, opts: &SolverOptions, integer: bool) -> Result<MilpSolution> {
    let n = problem.vars.len();
    let mut lo: Vec<f64> = problem.vars.iter().map(|v| v.lo).collect();
    let mut hi: Vec<f64> = problem.vars.iter().map(|v| v.hi).collect();
    let max_sense = problem.sense == Sense::Maximize;

    let mut rows: Vec<Row> = problem
        .cons
        .iter()
        .map(|c| match c.rel {
            Rel::Ge => Row { terms: c.terms.iter().map(|&(j, a)| (j, -a)).collect(), eq: false, rhs: -c.rhs },
            Rel::Le => Row { terms: c.terms.clone(), eq: false, rhs: c.rhs },
            Rel::Eq => Row { terms: c.terms.clone(), eq: true, rhs: c.rhs },
        })
        .collect();
    for r in &mut rows {
        // Merge duplicate variable mentions within a row.
        r.terms.sort_by_key(|&(j, _)| j);
        r.terms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        r.terms.retain(|&(_, a)| a != 0.0);
    }

    let feas = opts.feas_tol;
    let mut alive: Vec<bool> = vec![true; rows.len()];
    let mut fixed: Vec<bool> = vec![false; n];

    // Reduction fixpoint.
    for _pass in 0..12 {
        let mut changed = false;

        if integer {
            for (j, v) in problem.vars.iter().enumerate() {
                if v.binary && !fixed[j] {
                    // Round binary bounds inward; never loosen.
                    let nl = if lo[j] > feas { lo[j].max(1.0) } else { lo[j].max(0.0) };
                    let nh = if hi[j] < 1.0 - feas { hi[j].min(0.0) } else { hi[j].min(1.0) };
                    if nl != lo[j] || nh != hi[j] {
                        lo[j] = nl;
                        hi[j] = nh;
                        changed = true;
                    }
                }
            }
        }
        for j in 0..n {
            if lo[j] > hi[j] + feas {
                return Ok(infeasible_solution(problem, n));
            }
            if !fixed[j] && hi[j] - lo[j] <= 1e-12 {
                fixed[j] = true;
                changed = true;
            }
        }

        for (i, row) in rows.iter_mut().enumerate() {
            if !alive[i] {
                continue;
            }
            // Substitute fixed variables into the rhs.
            let mut k = 0;
            while k < row.terms.len() {
                let (j, a) = row.terms[k];
                if fixed[j] {
                    row.rhs -= a * lo[j];
                    row.terms.swap_remove(k);
                    changed = true;
                } else {
                    k += 1;
                }
            }
            match row.terms.len() {
                0 => {
                    let bad = if row.eq { row.rhs.abs() > feas * 10.0 } else { row.rhs < -feas * 10.0 };
                    if bad {
                        return Ok(infeasible_solution(problem, n));
                    }
                    alive[i] = false;
                    changed = true;
                }
                1 => {
                    let (j, a) = row.terms[0];
                    let b = row.rhs / a;
                    if row.eq {
                        lo[j] = lo[j].max(b);
                        hi[j] = hi[j].min(b);
                    } else if a > 0.0 {
                        hi[j] = hi[j].min(b);
                    } else {
                        lo[j] = lo[j].max(b);
                    }
                    alive[i] = false;
                    changed = true;
                }
                _ => {}
            }
        }

        // Dominated columns: a variable whose movement toward one bound can
        // never hurt any surviving row may be pinned there.
        let mut eq_touch = vec![false; n];
        let mut pos = vec![true; n]; // all Le coefficients >= 0
        let mut neg = vec![true; n]; // all Le coefficients <= 0
        for (i, row) in rows.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            for &(j, a) in &row.terms {
                if row.eq {
                    eq_touch[j] = true;
                } else {
                    if a < 0.0 {
                        pos[j] = false;
                    }
                    if a > 0.0 {
                        neg[j] = false;
                    }
                }
            }
        }
        for j in 0..n {
            if fixed[j] || eq_touch[j] || hi[j] - lo[j] <= 1e-12 {
                continue;
            }
            let is_int = integer && problem.vars[j].binary;
            let gain_up = if max_sense { problem.vars[j].obj } else { -problem.vars[j].obj };
            if gain_up <= 0.0 && pos[j] {
                // Pin at the smallest admissible value.
                let v = if is_int {
                    if lo[j] > feas {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    lo[j]
                };
                if v > hi[j] + feas {
                    return Ok(infeasible_solution(problem, n));
                }
                lo[j] = v;
                hi[j] = v;
                changed = true;
            } else if gain_up >= 0.0 && neg[j] {
                // Pin at the largest admissible value.
                let v = if is_int {
                    if hi[j] < 1.0 - feas {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    hi[j]
                };
                if v < lo[j] - feas {
                    return Ok(infeasible_solution(problem, n));
                }
                lo[j] = v;
                hi[j] = v;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }

    // Union-find over shared rows.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (i, row) in rows.iter().enumerate() {
        if !alive[i] {
            continue;
        }
        let mut it = row.terms.iter().filter(|&&(j, _)| !fixed[j]);
        if let Some(&(first, _)) = it.next() {
            let ra = find(&mut parent, first);
            for &(j, _) in it {
                let rb = find(&mut parent, j);
                parent[rb] = ra;
            }
        }
    }

    let mut x = vec![0.0f64; n];
    for j in 0..n {
        if fixed[j] {
            x[j] = lo[j];
        }
    }

    // Free variables in no surviving row: objective decides the bound.
    let mut in_row = vec![false; n];
    for (i, row) in rows.iter().enumerate() {
        if alive[i] {
            for &(j, _) in &row.terms {
                if !fixed[j] {
                    in_row[j] = true;
                }
            }
        }
    }
    for j in 0..n {
        if fixed[j] || in_row[j] {
            continue;
        }
        let gain_up = if max_sense { problem.vars[j].obj } else { -problem.vars[j].obj };
        x[j] = if gain_up > 0.0 { hi[j] } else { lo[j] };
        fixed[j] = true;
    }

    // Collect blocks in first-seen order.
    let mut block_of: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        if fixed[j] || !in_row[j] {
            continue;
        }
        let root = find(&mut parent, j);
        let b = match block_of[root] {
            Some(b) => b,
            None => {
                blocks.push(Vec::new());
                block_of[root] = Some(blocks.len() - 1);
                blocks.len() - 1
            }
        };
        blocks[b].push(j);
    }

    let mut nodes = 0u64;
    let mut iters = 0u64;
    let mut limit_hit = false;
    let mut bound_extra = 0.0f64;

    for members in &blocks {
        let mut map = vec![usize::MAX; n];
        let mut sub = MilpProblem::new(problem.sense);
        for (local, &j) in members.iter().enumerate() {
            map[j] = local;
            sub.add_var(Variable {
                lo: lo[j],
                hi: hi[j],
                obj: problem.vars[j].obj,
                binary: problem.vars[j].binary && integer,
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            if row.terms.iter().any(|&(j, _)| map[j] != usize::MAX) {
                let terms: Vec<(usize, f64)> = row.terms.iter().map(|&(j, a)| (map[j], a)).collect();
                debug_assert!(terms.iter().all(|&(j, _)| j != usize::MAX));
                sub.add_con(Constraint::new(terms, if row.eq { Rel::Eq } else { Rel::Le }, row.rhs));
            }
        }
        let sol = branch::solve(&sub, opts, integer)?;
        nodes += sol.nodes;
        iters += sol.simplex_iters;
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::IterationLimit => {
                limit_hit = true;
                if sol.best_bound.is_finite() && sol.objective.is_finite() {
                    bound_extra += sol.best_bound - sol.objective;
                }
            }
            SolveStatus::Infeasible | SolveStatus::Unbounded => {
                let mut out = infeasible_solution(problem, n);
                out.status = sol.status;
                out.nodes = nodes;
                out.simplex_iters = iters;
                return Ok(out);
            }
        }
        for (local, &j) in members.iter().enumerate() {
            x[j] = sol.x[local];
        }
    }

    let objective = objective_value(problem, &x);
    let status = if limit_hit { SolveStatus::IterationLimit } else { SolveStatus::Optimal };
    if status == SolveStatus::Optimal {
        let resid = super::feasibility_residual(problem, &x);
        if resid > opts.feas_tol * 100.0 {
            return Err(Error::Engine(format!(
                "milp: solver returned a point with feasibility residual {resid:.3e}"
            )));
        }
    }
    Ok(MilpSolution { status, objective, x, best_bound: objective + bound_extra, nodes, simplex_iters: iters })
}

fn infeasible_solution(_problem: &MilpProblem, n: usize) -> MilpSolution {
    MilpSolution {
        status: SolveStatus::Infeasible,
        objective: f64::NAN,
        x: vec![0.0; n],
        best_bound: f64::NAN,
        nodes: 0,
        simplex_iters: 0,
        // caller reads status before anything else
    }
}

impl MilpProblem {
    /// Problem metadata echo used by error messages and dumps.
    pub fn size_summary(&self) -> String {
        format!("{} vars ({} binary), {} rows", self.vars.len(), self.num_binaries(), self.cons.len())
    }
}
