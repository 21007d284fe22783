//! Nearest-neighbor step-function machinery: Voronoi cells over path
//! segments for the lookahead strategy class, and conditional two-level
//! bases for the martingale increments.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{resimulate_conditional, ModelSpec, PathBatch, PathView, TimeGrid};
use crate::rng::StreamId;

/// Basis-size schedule indexed by offset from the anchor (or by date).
///
/// The convention `m = x` means sizes grow linearly from 1 at the anchor to
/// `x` at the horizon, rounded to nearest, never below 1.
pub fn schedule_linear(len: usize, target: usize) -> Vec<usize> {
    assert!(len >= 1);
    let x = target.max(1) as f64;
    (0..len)
        .map(|k| {
            if len == 1 {
                1
            } else {
                let f = 1.0 + (x - 1.0) * k as f64 / (len - 1) as f64;
                (f.round() as usize).max(1)
            }
        })
        .collect()
}

/// Strategy basis at an anchor time: per decision offset, centroid path
/// segments spanning `[anchor, anchor+offset]`, flattened asset-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyBasis {
    pub anchor: usize,
    pub schedule: Vec<usize>,
    /// `centroids[k][i]` is the i-th segment at offset k.
    pub centroids: Vec<Vec<Vec<f64>>>,
}

impl StrategyBasis {
    /// Sample basis centroids uniformly without replacement from a
    /// conditional batch anchored at the same time.
    pub fn build(anchor: usize, schedule: &[usize], batch: &PathBatch, seed: u64) -> Result<StrategyBasis> {
        if schedule.is_empty() || schedule[0] != 1 {
            return Err(Error::parameter("strategy basis: schedule must start with a single anchor cell"));
        }
        if batch.start_time != anchor {
            return Err(Error::Shape(format!(
                "strategy basis: batch starts at {} but anchor is {anchor}",
                batch.start_time
            )));
        }
        // Schedule covers offsets 0..=T-anchor.
        if anchor + schedule.len() != batch.grid.num_steps + 1 {
            return Err(Error::Shape("strategy basis: schedule length must reach the horizon".into()));
        }
        let max_m = *schedule.iter().max().unwrap();
        if batch.n_paths < max_m {
            return Err(Error::InsufficientSample(format!(
                "strategy basis: {} paths cannot seed {max_m} centroids",
                batch.n_paths
            )));
        }
        let root = StreamId::new(seed);
        let mut centroids = Vec::with_capacity(schedule.len());
        for (k, &m) in schedule.iter().enumerate() {
            let mut rng = root.child(k as u64).rng();
            let picks = sample(&mut rng, batch.n_paths, m);
            let mut level = Vec::with_capacity(m);
            for idx in picks.iter() {
                level.push(batch.path(idx).segment(anchor, anchor + k));
            }
            centroids.push(level);
        }
        Ok(StrategyBasis { anchor, schedule: schedule.to_vec(), centroids })
    }

    /// Cell index of a path at every offset.
    pub fn assign_path(&self, path: &PathView<'_>) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.schedule.len());
        for (k, level) in self.centroids.iter().enumerate() {
            let seg = path.segment(self.anchor, self.anchor + k);
            out.push(assign_cell(&seg, level) as u32);
        }
        out
    }

    pub fn horizon_offsets(&self) -> usize {
        self.schedule.len()
    }
}

/// Index of the centroid nearest in Euclidean distance on the flattened
/// segment; ties break to the lowest index.
pub fn assign_cell(segment: &[f64], centroids: &[Vec<f64>]) -> usize {
    debug_assert!(!centroids.is_empty());
    debug_assert_eq!(segment.len(), centroids[0].len());
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        // Early abandon once the partial sum exceeds the incumbent.
        let mut d = 0.0;
        for (a, b) in segment.iter().zip(c) {
            let diff = a - b;
            d += diff * diff;
            if d >= best_d {
                break;
            }
        }
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Step-function strategy: weights over (offset, cell).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepStrategy {
    pub basis: StrategyBasis,
    /// `weights[k][i]` mirrors `basis.centroids`.
    pub weights: Vec<Vec<f64>>,
    /// True where the underlying decision is binary.
    pub integral: Vec<bool>,
}

impl StepStrategy {
    /// Weight of the cell containing the path, per offset.
    pub fn evaluate(&self, path: &PathView<'_>) -> Vec<f64> {
        self.basis
            .assign_path(path)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.weights[k][i as usize])
            .collect()
    }
}

/// Conditional two-level basis: per date, conditioning path prefixes and,
/// for each, next-price centroids sampled conditional on that prefix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondBasis {
    pub p_sched: Vec<usize>,
    pub q_sched: Vec<usize>,
    /// `cond_prefix[t][i]`: flattened `S_{0:t-1}` of conditioning centroid i.
    pub cond_prefix: Vec<Vec<Vec<f64>>>,
    /// `next_price[t][i][j]`: state vector of the j-th continuation at t.
    pub next_price: Vec<Vec<Vec<Vec<f64>>>>,
    pub dim: usize,
}

impl CondBasis {
    /// Build with `p_t` conditioning paths simulated from time zero and
    /// `q_t` one-step continuations for each.
    pub fn build(
        p_sched: &[usize],
        q_sched: &[usize],
        model: &ModelSpec,
        grid: &TimeGrid,
        seed: u64,
    ) -> Result<CondBasis> {
        let dates = grid.dates();
        if p_sched.len() != dates || q_sched.len() != dates {
            return Err(Error::Shape("cond basis: schedules must cover every date".into()));
        }
        if p_sched.iter().chain(q_sched).any(|&v| v < 1) {
            return Err(Error::parameter("cond basis: schedule entries must be at least 1"));
        }
        let p_max = *p_sched.iter().max().unwrap();
        let root = StreamId::new(seed);
        // Master sample of conditioning paths; per-date subsets are drawn
        // without replacement so the prefixes stay genuine sample paths.
        let master = crate::models::simulate(model, grid, p_max.max(2), root.child(0).child(0).rng_seed(), None)?;

        let mut cond_prefix0 = vec![Vec::new(); dates];
        let mut next_price = vec![Vec::new(); dates];
        let d = model.dim();
        for t in 1..dates {
            let p_t = p_sched[t];
            let q_t = q_sched[t];
            let mut rng = root.child(1).child(t as u64).rng();
            let picks = sample(&mut rng, master.n_paths, p_t);
            let mut prefixes = Vec::with_capacity(p_t);
            let mut conts = Vec::with_capacity(p_t);
            for (i, idx) in picks.iter().enumerate() {
                let view = master.path(idx);
                prefixes.push(view.segment(0, t - 1));
                let state = view.state(t - 1);
                let one_step = resimulate_conditional(
                    (t - 1, &state),
                    model,
                    grid,
                    q_t,
                    root.child(2).child(t as u64).child(i as u64).rng_seed(),
                )?;
                let mut nexts = Vec::with_capacity(q_t);
                for q in 0..q_t {
                    nexts.push(one_step.path(q).state(t));
                }
                conts.push(nexts);
            }
            cond_prefix0[t] = prefixes;
            next_price[t] = conts;
        }
        Ok(CondBasis {
            p_sched: p_sched.to_vec(),
            q_sched: q_sched.to_vec(),
            cond_prefix: cond_prefix0,
            next_price,
            dim: d,
        })
    }

    /// Two-stage cell of a path at date `t`: nearest conditioning prefix,
    /// then nearest next-price centroid within it.
    pub fn assign_at(&self, path: &PathView<'_>, t: usize) -> (u32, u32) {
        let prefix = path.segment(0, t - 1);
        let i = assign_cell(&prefix, &self.cond_prefix[t]);
        let state = path.state(t);
        let j = assign_cell(&state, &self.next_price[t][i]);
        (i as u32, j as u32)
    }

    /// Cells of a path at every date 1..=T.
    pub fn assign_path(&self, path: &PathView<'_>) -> Vec<(u32, u32)> {
        (1..self.p_sched.len()).map(|t| self.assign_at(path, t)).collect()
    }

    pub fn dates(&self) -> usize {
        self.p_sched.len()
    }

    /// Weight-table shape: per date, per conditioning cell, q_t entries.
    pub fn zero_weights(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dates())
            .map(|t| {
                if t == 0 {
                    Vec::new()
                } else {
                    vec![vec![0.0; self.q_sched[t]]; self.p_sched[t]]
                }
            })
            .collect()
    }
}

/// Multiple signed random projections with an exact re-check of a short
/// candidate list. Optional accelerator for large centroid sets; the exact
/// scan stays the reference.
#[derive(Debug, Clone)]
pub struct ProjectionIndex {
    dims: usize,
    k: usize,
    proj: Vec<f64>,
    projected: Vec<f64>,
    shortlist: usize,
}

impl ProjectionIndex {
    pub fn build(centroids: &[Vec<f64>], k: usize, shortlist: usize, seed: u64) -> ProjectionIndex {
        use rand::Rng;
        let dims = centroids.first().map_or(0, |c| c.len());
        let mut rng = StreamId::new(seed).child(crate::rng::tag::PROJECTION).rng();
        let mut proj = vec![0.0f64; k * dims];
        for v in proj.iter_mut() {
            *v = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        let mut projected = vec![0.0f64; centroids.len() * k];
        for (i, c) in centroids.iter().enumerate() {
            for r in 0..k {
                let mut acc = 0.0;
                for (d, x) in c.iter().enumerate() {
                    acc += proj[r * dims + d] * x;
                }
                projected[i * k + r] = acc;
            }
        }
        ProjectionIndex { dims, k, proj, projected, shortlist }
    }

    /// Approximate nearest centroid: rank by projected distance, then check
    /// the shortlist exactly.
    pub fn assign(&self, segment: &[f64], centroids: &[Vec<f64>]) -> usize {
        debug_assert_eq!(segment.len(), self.dims);
        let k = self.k;
        let mut q = vec![0.0f64; k];
        for r in 0..k {
            let mut acc = 0.0;
            for (d, x) in segment.iter().enumerate() {
                acc += self.proj[r * self.dims + d] * x;
            }
            q[r] = acc;
        }
        let n = centroids.len();
        let cap = self.shortlist.min(n);
        // Maintain the `cap` smallest projected distances (index-ordered ties).
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(cap + 1);
        for i in 0..n {
            let mut d = 0.0;
            for r in 0..k {
                let diff = q[r] - self.projected[i * k + r];
                d += diff * diff;
            }
            if cand.len() < cap {
                cand.push((d, i));
                cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            } else if d < cand[cap - 1].0 {
                cand[cap - 1] = (d, i);
                cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            }
        }
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for &(_, i) in &cand {
            let mut d = 0.0;
            for (a, b) in segment.iter().zip(&centroids[i]) {
                let diff = a - b;
                d += diff * diff;
            }
            if d < best_d || (d == best_d && i < best) {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
