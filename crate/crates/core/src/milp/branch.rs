//! Best-first branch-and-bound on binary variables over the bounded-variable
//! simplex relaxation. Branching picks the most fractional binary with ties
//! broken by lowest index; node selection is best-bound first with a diving
//! fallback once the open queue grows past its cap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::solve_relaxation;
use super::{objective_value, Error, MilpProblem, MilpSolution, Result, Sense, SolveStatus, SolverOptions};

struct Node {
    /// Relaxation bound inherited from the parent, in maximize orientation.
    key: f64,
    depth: u32,
    seq: u64,
    fixes: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub(crate) fn solve(problem: &MilpProblem, opts: &SolverOptions, integer: bool) -> Result<MilpSolution> {
    let sign = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };

    let root = solve_relaxation(problem, opts);
    let mut iters = root.iters;
    match root.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            return Ok(MilpSolution {
                status: root.status,
                objective: f64::NAN,
                x: root.x,
                best_bound: f64::NAN,
                nodes: 1,
                simplex_iters: iters,
            });
        }
        SolveStatus::IterationLimit => {
            return Err(Error::IterationLimit(format!(
                "simplex hit its iteration cap on {}",
                problem.size_summary()
            )));
        }
    }

    let binaries: Vec<usize> = if integer {
        problem.vars.iter().enumerate().filter(|(_, v)| v.binary).map(|(j, _)| j).collect()
    } else {
        Vec::new()
    };

    let frac_of = |x: &[f64]| -> Option<usize> {
        let mut pick = None;
        let mut best = opts.int_tol;
        for &j in &binaries {
            let f = (x[j] - x[j].round()).abs();
            if f > best {
                best = f;
                pick = Some(j);
            }
        }
        pick
    };

    if frac_of(&root.x).is_none() {
        let x = snap(problem, root.x, integer);
        let objective = objective_value(problem, &x);
        return Ok(MilpSolution {
            status: SolveStatus::Optimal,
            objective,
            x,
            best_bound: objective,
            nodes: 1,
            simplex_iters: iters,
        });
    }

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node { key: sign * root.objective, depth: 0, seq, fixes: Vec::new() });

    let mut incumbent: Option<(f64, Vec<f64>)> = None; // key orientation: maximize
    let mut nodes = 1u64;
    let mut scratch = problem.clone();

    while let Some(node) = pop_next(&mut heap, opts) {
        // Global bound check against the incumbent.
        if let Some((inc_key, _)) = &incumbent {
            if node.key <= inc_key + opts.gap_tol {
                continue;
            }
        }
        if nodes >= opts.max_nodes {
            let best_bound = sign * node.key;
            return Ok(finish_limited(problem, incumbent, best_bound, nodes, iters, sign));
        }

        // Materialize node bounds.
        for v in scratch.vars.iter_mut().zip(problem.vars.iter()) {
            v.0.lo = v.1.lo;
            v.0.hi = v.1.hi;
        }
        for &(j, val) in &node.fixes {
            scratch.vars[j].lo = val;
            scratch.vars[j].hi = val;
        }

        let rel = solve_relaxation(&scratch, opts);
        nodes += 1;
        iters += rel.iters;
        match rel.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                return Ok(MilpSolution {
                    status: SolveStatus::Unbounded,
                    objective: f64::NAN,
                    x: rel.x,
                    best_bound: f64::NAN,
                    nodes,
                    simplex_iters: iters,
                })
            }
            SolveStatus::IterationLimit => {
                return Err(Error::IterationLimit(format!(
                    "simplex hit its iteration cap in branch-and-bound on {}",
                    problem.size_summary()
                )));
            }
            SolveStatus::Optimal => {}
        }
        let key = sign * rel.objective;
        if let Some((inc_key, _)) = &incumbent {
            if key <= inc_key + opts.gap_tol {
                continue;
            }
        }

        match frac_of(&rel.x) {
            None => {
                let x = snap(problem, rel.x, integer);
                let key = sign * objective_value(problem, &x);
                let better = incumbent.as_ref().map_or(true, |(ik, _)| key > *ik);
                if better {
                    incumbent = Some((key, x));
                }
            }
            Some(j) => {
                for val in [1.0, 0.0] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, val));
                    seq += 1;
                    heap.push(Node { key, depth: node.depth + 1, seq, fixes });
                }
            }
        }
    }

    match incumbent {
        Some((key, x)) => {
            let objective = sign * key;
            Ok(MilpSolution {
                status: SolveStatus::Optimal,
                objective,
                x,
                best_bound: objective,
                nodes,
                simplex_iters: iters,
            })
        }
        None => Ok(MilpSolution {
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            x: vec![0.0; problem.vars.len()],
            best_bound: f64::NAN,
            nodes,
            simplex_iters: iters,
        }),
    }
}

/// Best-bound first; switch to deepest-first while the queue is oversized.
fn pop_next(heap: &mut BinaryHeap<Node>, opts: &SolverOptions) -> Option<Node> {
    if heap.len() <= opts.node_queue_cap {
        return heap.pop();
    }
    let mut drained: Vec<Node> = std::mem::take(heap).into_vec();
    let deepest = drained
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.depth
                .cmp(&b.depth)
                .then(a.key.total_cmp(&b.key))
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)?;
    let node = drained.swap_remove(deepest);
    *heap = BinaryHeap::from(drained);
    Some(node)
}

fn snap(problem: &MilpProblem, mut x: Vec<f64>, integer: bool) -> Vec<f64> {
    if integer {
        for (j, v) in problem.vars.iter().enumerate() {
            if v.binary {
                x[j] = x[j].round().clamp(0.0, 1.0);
            }
        }
    }
    x
}

fn finish_limited(
    problem: &MilpProblem,
    incumbent: Option<(f64, Vec<f64>)>,
    best_bound: f64,
    nodes: u64,
    iters: u64,
    sign: f64,
) -> MilpSolution {
    match incumbent {
        Some((key, x)) => MilpSolution {
            status: SolveStatus::IterationLimit,
            objective: sign * key,
            x,
            best_bound,
            nodes,
            simplex_iters: iters,
        },
        None => MilpSolution {
            status: SolveStatus::IterationLimit,
            objective: f64::NAN,
            x: vec![0.0; problem.vars.len()],
            best_bound,
            nodes,
            simplex_iters: iters,
        },
    }
}
