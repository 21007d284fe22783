//! Bounded-variable two-phase primal simplex on a dense tableau.
//!
//! Variables may sit nonbasic at either bound; the ratio test covers bound
//! flips of the entering column. Bland's rule engages after a run of
//! degenerate pivots to guarantee termination.

use super::{MilpProblem, Rel, Sense, SolveStatus, SolverOptions};

const INF: f64 = f64::INFINITY;
const PIVOT_EPS: f64 = 1e-10;

pub(crate) struct LpResult {
    pub status: SolveStatus,
    /// Structural variable values (valid for Optimal, best effort otherwise).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iters: u64,
}

struct Col {
    lo: f64,
    hi: f64,
}

pub(crate) struct Tableau {
    n_struct: usize,
    ncols: usize,
    nrows: usize,
    cols: Vec<Col>,
    /// Row-major dense tableau, nrows x ncols.
    t: Vec<f64>,
    /// Basic column per row.
    basis: Vec<usize>,
    /// Basic values per row.
    xb: Vec<f64>,
    /// True when a nonbasic column rests at its upper bound.
    at_upper: Vec<bool>,
    /// Reduced-cost row for the active phase (maximization).
    d: Vec<f64>,
    /// Phase-2 objective per column (structural costs, zero elsewhere).
    cost: Vec<f64>,
    in_basis: Vec<bool>,
    art_start: usize,
    iters: u64,
}

impl Tableau {
    /// Lay out structural + slack + artificial columns and the slack basis.
    pub(crate) fn build(problem: &MilpProblem) -> Tableau {
        let n = problem.vars.len();
        let m = problem.cons.len();
        let sign = match problem.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };

        // Nonbasic start: every structural variable at the finite bound
        // nearer its objective-improving direction is not needed; lower
        // works and keeps the start deterministic.
        let start: Vec<f64> = problem.vars.iter().map(|v| v.lo).collect();

        // Slack per inequality row; Ge rows are flipped to Le.
        let mut n_slack = 0usize;
        for c in &problem.cons {
            if c.rel != Rel::Eq {
                n_slack += 1;
            }
        }

        // Row activities at the nonbasic start decide which rows need an
        // artificial to open phase 1 with a feasible basis.
        let mut resid = vec![0.0f64; m];
        for (i, c) in problem.cons.iter().enumerate() {
            let flip = if c.rel == Rel::Ge { -1.0 } else { 1.0 };
            let act: f64 = c.terms.iter().map(|&(j, a)| a * start[j]).sum();
            resid[i] = flip * (c.rhs - act);
        }
        let mut n_art = 0usize;
        for (i, c) in problem.cons.iter().enumerate() {
            let needs_art = match c.rel {
                Rel::Eq => true,
                _ => resid[i] < 0.0,
            };
            if needs_art {
                n_art += 1;
            }
        }

        let ncols = n + n_slack + n_art;
        let mut cols = Vec::with_capacity(ncols);
        for v in &problem.vars {
            cols.push(Col { lo: v.lo, hi: v.hi });
        }
        let mut t = vec![0.0f64; m * ncols];
        let mut basis = vec![usize::MAX; m];
        let mut xb = vec![0.0f64; m];

        let mut slack_at = n;
        let mut art_at = n + n_slack;
        for (i, c) in problem.cons.iter().enumerate() {
            let flip = if c.rel == Rel::Ge { -1.0 } else { 1.0 };
            let row = &mut t[i * ncols..(i + 1) * ncols];
            for &(j, a) in &c.terms {
                row[j] += flip * a;
            }
            if c.rel != Rel::Eq {
                row[slack_at] = 1.0;
                if resid[i] >= 0.0 {
                    basis[i] = slack_at;
                    xb[i] = resid[i];
                }
                slack_at += 1;
            }
            if basis[i] == usize::MAX {
                // Artificial sized to the start violation, nonnegative. A
                // negative violation flips the row so the basic artificial
                // keeps a unit coefficient.
                if resid[i] < 0.0 {
                    for v in row.iter_mut() {
                        *v = -*v;
                    }
                }
                row[art_at] = 1.0;
                basis[i] = art_at;
                xb[i] = resid[i].abs();
                art_at += 1;
            }
        }
        for _ in n..n + n_slack {
            cols.push(Col { lo: 0.0, hi: INF });
        }
        for _ in n + n_slack..ncols {
            cols.push(Col { lo: 0.0, hi: INF });
        }

        let mut cost = vec![0.0f64; ncols];
        for (j, v) in problem.vars.iter().enumerate() {
            cost[j] = sign * v.obj;
        }

        let mut in_basis = vec![false; ncols];
        for &b in &basis {
            in_basis[b] = true;
        }

        Tableau {
            n_struct: n,
            ncols,
            nrows: m,
            cols,
            t,
            basis,
            xb,
            at_upper: vec![false; ncols],
            d: vec![0.0; ncols],
            cost,
            in_basis,
            art_start: n + n_slack,
            iters: 0,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.cols[j].hi
        } else {
            self.cols[j].lo
        }
    }

    /// Rebuild the reduced-cost row for the given column costs.
    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.nrows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (dj, rj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * rj;
                }
            }
        }
    }

    /// Run the simplex loop for the current reduced costs; maximization.
    fn iterate(&mut self, opts: &SolverOptions, phase1: bool) -> SolveStatus {
        let tol = opts.feas_tol;
        let mut degen_run: u32 = 0;
        loop {
            if self.iters >= opts.max_simplex_iters {
                return SolveStatus::IterationLimit;
            }
            let bland = degen_run >= opts.bland_after;

            // Entering column.
            let mut enter = usize::MAX;
            let mut best = tol;
            for j in 0..self.ncols {
                if self.in_basis[j] {
                    continue;
                }
                let c = &self.cols[j];
                if c.hi - c.lo < PIVOT_EPS {
                    continue;
                }
                if phase1 && j >= self.art_start {
                    continue;
                }
                let dj = self.d[j];
                let gain = if self.at_upper[j] { -dj } else { dj };
                if gain > best {
                    enter = j;
                    if bland {
                        break;
                    }
                    best = gain;
                } else if bland && gain > tol {
                    enter = j;
                    break;
                }
            }
            if enter == usize::MAX {
                return SolveStatus::Optimal;
            }
            let dir = if self.at_upper[enter] { -1.0 } else { 1.0 };

            // Ratio test.
            let own_range = self.cols[enter].hi - self.cols[enter].lo;
            let mut t_star = own_range; // may be INF
            let mut leave: usize = usize::MAX; // row index of leaving basic
            for i in 0..self.nrows {
                let w = dir * self.t[i * self.ncols + enter];
                if w > PIVOT_EPS {
                    let b = self.basis[i];
                    let slack = (self.xb[i] - self.cols[b].lo) / w;
                    if slack < t_star - PIVOT_EPS || (slack < t_star + PIVOT_EPS && (leave == usize::MAX || b < self.basis[leave])) {
                        t_star = slack.max(0.0);
                        leave = i;
                    }
                } else if w < -PIVOT_EPS {
                    let b = self.basis[i];
                    if self.cols[b].hi.is_finite() {
                        let slack = (self.cols[b].hi - self.xb[i]) / (-w);
                        if slack < t_star - PIVOT_EPS || (slack < t_star + PIVOT_EPS && (leave == usize::MAX || b < self.basis[leave])) {
                            t_star = slack.max(0.0);
                            leave = i;
                        }
                    }
                }
            }

            if t_star.is_infinite() {
                return SolveStatus::Unbounded;
            }
            self.iters += 1;
            if t_star <= tol {
                degen_run += 1;
            } else {
                degen_run = 0;
            }

            if leave == usize::MAX {
                // Bound flip: entering runs to its opposite bound.
                for i in 0..self.nrows {
                    self.xb[i] -= dir * t_star * self.t[i * self.ncols + enter];
                }
                self.at_upper[enter] = !self.at_upper[enter];
                continue;
            }

            // Pivot (leave row r, enter column).
            let r = leave;
            let new_val = self.nonbasic_value(enter) + dir * t_star;
            let piv = self.t[r * self.ncols + enter];
            debug_assert!(piv.abs() > PIVOT_EPS);

            let wr = dir * piv;
            let leaving = self.basis[r];
            // Leaving variable settles on the bound it hit.
            self.at_upper[leaving] = wr < 0.0;
            self.in_basis[leaving] = false;
            self.in_basis[enter] = true;
            for i in 0..self.nrows {
                if i != r {
                    self.xb[i] -= dir * t_star * self.t[i * self.ncols + enter];
                }
            }
            self.basis[r] = enter;
            self.xb[r] = new_val;

            // Row reduction.
            let inv = 1.0 / piv;
            let (before, rest) = self.t.split_at_mut(r * self.ncols);
            let (prow, after) = rest.split_at_mut(self.ncols);
            for v in prow.iter_mut() {
                *v *= inv;
            }
            let elim = |row: &mut [f64], factor: f64| {
                if factor != 0.0 {
                    for (a, b) in row.iter_mut().zip(prow.iter()) {
                        *a -= factor * b;
                    }
                }
            };
            for row in before.chunks_exact_mut(self.ncols) {
                let f = row[enter];
                elim(row, f);
            }
            for row in after.chunks_exact_mut(self.ncols) {
                let f = row[enter];
                elim(row, f);
            }
            let f = self.d[enter];
            if f != 0.0 {
                for (a, b) in self.d.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }
    }

    /// Total infeasibility carried by artificial columns.
    fn artificial_mass(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nrows {
            if self.basis[i] >= self.art_start {
                s += self.xb[i];
            }
        }
        for j in self.art_start..self.ncols {
            if !self.in_basis[j] && self.at_upper[j] {
                s += self.cols[j].hi;
            }
        }
        s
    }

    fn extract(&self, problem: &MilpProblem) -> Vec<f64> {
        let mut x = vec![0.0f64; self.n_struct];
        for j in 0..self.n_struct {
            x[j] = self.nonbasic_value(j);
        }
        for i in 0..self.nrows {
            if self.basis[i] < self.n_struct {
                x[self.basis[i]] = self.xb[i];
            }
        }
        for (j, v) in problem.vars.iter().enumerate() {
            x[j] = x[j].clamp(v.lo, v.hi);
        }
        x
    }
}

pub(crate) fn solve_relaxation(problem: &MilpProblem, opts: &SolverOptions) -> LpResult {
    let mut tab = Tableau::build(problem);

    // Phase 1 only when an artificial entered the basis.
    if tab.art_start < tab.ncols {
        let mut p1 = vec![0.0f64; tab.ncols];
        for c in p1.iter_mut().skip(tab.art_start) {
            *c = -1.0;
        }
        tab.price(&p1);
        let st = tab.iterate(opts, true);
        if st == SolveStatus::IterationLimit {
            return LpResult { status: st, x: tab.extract(problem), objective: f64::NAN, iters: tab.iters };
        }
        if tab.artificial_mass() > opts.feas_tol * 10.0 {
            return LpResult {
                status: SolveStatus::Infeasible,
                x: tab.extract(problem),
                objective: f64::NAN,
                iters: tab.iters,
            };
        }
        // Freeze artificials at zero for phase 2.
        for j in tab.art_start..tab.ncols {
            tab.cols[j].hi = 0.0;
            tab.at_upper[j] = false;
        }
    }

    let cost = tab.cost.clone();
    tab.price(&cost);
    let st = tab.iterate(opts, false);
    let x = tab.extract(problem);
    let obj = super::objective_value(problem, &x);
    match st {
        SolveStatus::Optimal => LpResult { status: SolveStatus::Optimal, x, objective: obj, iters: tab.iters },
        SolveStatus::Unbounded => LpResult { status: SolveStatus::Unbounded, x, objective: f64::NAN, iters: tab.iters },
        other => LpResult { status: other, x, objective: obj, iters: tab.iters },
    }
}
