//! Risk-neutral path simulation for the dynamics used by the four reference
//! options, with reproducible seeding and restart-from-state simulation.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamId;

/// Discrete exercise-date grid with an annualized rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub steps_per_year: u32,
    pub maturity_years: f64,
    /// Number of steps; dates run 0..=num_steps.
    pub num_steps: usize,
    /// Risk-free rate per annum.
    pub rate: f64,
}

impl TimeGrid {
    pub fn new(steps_per_year: u32, maturity_years: f64, rate: f64) -> Result<TimeGrid> {
        if steps_per_year == 0 || !(maturity_years > 0.0) {
            return Err(Error::parameter("time grid: steps_per_year and maturity must be positive"));
        }
        let num_steps = (steps_per_year as f64 * maturity_years).round() as usize;
        if num_steps < 1 {
            return Err(Error::parameter("time grid: fewer than one step"));
        }
        Ok(TimeGrid { steps_per_year, maturity_years, num_steps, rate })
    }

    /// Year fraction of one step.
    pub fn dt(&self) -> f64 {
        self.maturity_years / self.num_steps as f64
    }

    /// Discount factor from date index `t` back to 0.
    pub fn discount(&self, t: usize) -> f64 {
        (-self.rate * self.dt() * t as f64).exp()
    }

    /// Number of dates (steps + 1).
    pub fn dates(&self) -> usize {
        self.num_steps + 1
    }
}

/// Supported risk-neutral dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// dS = r S dt + sigma S dW, exact log-normal stepping.
    Gbm { s0: f64, sigma: f64 },
    /// log S_t = phi log S_{t-1} + vol W_t with unit-variance normal steps.
    Ar1 { phi: f64, vol: f64, s0: f64 },
    /// dS = theta (mu - S) dt + sigma dW + dJ, Poisson jumps with
    /// exponential severity, Euler stepping.
    MeanRevJump { theta: f64, mu: f64, sigma: f64, lambda: f64, alpha: f64, s0: f64 },
    /// Independent GBMs, one per asset.
    MultiGbm { s0: Vec<f64>, sigma: Vec<f64> },
    /// Two-point lattice step: S -> S*up with probability p_up else S*down.
    /// Used by small-lattice consistency checks against the exact
    /// dynamic-programming oracle.
    Binomial { s0: f64, up: f64, down: f64, p_up: f64 },
}

impl ModelSpec {
    /// Number of assets.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::MultiGbm { s0, .. } => s0.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::parameter(format!("model: {m}")));
        match self {
            ModelSpec::Gbm { s0, sigma } => {
                if !(*s0 > 0.0) {
                    return bad("gbm s0 must be positive");
                }
                if !(*sigma >= 0.0) {
                    return bad("gbm sigma must be nonnegative");
                }
            }
            ModelSpec::Ar1 { vol, s0, .. } => {
                if !(*vol >= 0.0) {
                    return bad("ar1 vol must be nonnegative");
                }
                if !(*s0 > 0.0) {
                    return bad("ar1 s0 must be positive");
                }
            }
            ModelSpec::MeanRevJump { sigma, lambda, alpha, .. } => {
                if !(*sigma >= 0.0) {
                    return bad("jump model sigma must be nonnegative");
                }
                if !(*lambda >= 0.0) {
                    return bad("jump intensity must be nonnegative");
                }
                if !(*alpha > 0.0) {
                    return bad("jump severity rate alpha must be positive");
                }
            }
            ModelSpec::MultiGbm { s0, sigma } => {
                if s0.is_empty() || s0.len() != sigma.len() {
                    return bad("multi-gbm s0 and sigma must be nonempty and equal length");
                }
                if s0.iter().any(|v| !(*v > 0.0)) || sigma.iter().any(|v| !(*v >= 0.0)) {
                    return bad("multi-gbm needs positive s0 and nonnegative sigma");
                }
            }
            ModelSpec::Binomial { s0, up, down, p_up } => {
                if !(*s0 > 0.0) || !(*up > 0.0) || !(*down > 0.0) {
                    return bad("binomial prices must stay positive");
                }
                if !(*p_up >= 0.0 && *p_up <= 1.0) {
                    return bad("binomial p_up must lie in [0,1]");
                }
            }
        }
        Ok(())
    }

    fn start_state(&self) -> Vec<f64> {
        match self {
            ModelSpec::Gbm { s0, .. }
            | ModelSpec::Ar1 { s0, .. }
            | ModelSpec::Binomial { s0, .. }
            | ModelSpec::MeanRevJump { s0, .. } => vec![*s0],
            ModelSpec::MultiGbm { s0, .. } => s0.clone(),
        }
    }
}

/// A seeded batch of simulated paths on `[start_time, num_steps]`.
///
/// Values are stored path-major, then asset, then date:
/// `data[((p * d) + a) * len + (t - start_time)]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathBatch {
    pub model: ModelSpec,
    pub grid: TimeGrid,
    pub seed: u64,
    pub start_time: usize,
    pub start_state: Vec<f64>,
    pub n_paths: usize,
    data: Vec<f64>,
}

/// Borrowed view of one path of a batch.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    data: &'a [f64],
    pub dim: usize,
    pub start_time: usize,
    /// Number of stored dates.
    pub len: usize,
}

impl<'a> PathView<'a> {
    /// Price of `asset` at absolute date `t`.
    #[inline]
    pub fn value(&self, asset: usize, t: usize) -> f64 {
        debug_assert!(t >= self.start_time && t < self.start_time + self.len);
        self.data[asset * self.len + (t - self.start_time)]
    }

    /// Flattened segment over dates `[from, to]`, asset-major.
    pub fn segment(&self, from: usize, to: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (to - from + 1));
        for a in 0..self.dim {
            for t in from..=to {
                out.push(self.value(a, t));
            }
        }
        out
    }

    /// State vector at date `t`.
    pub fn state(&self, t: usize) -> Vec<f64> {
        (0..self.dim).map(|a| self.value(a, t)).collect()
    }

    pub fn from_slice(data: &'a [f64], dim: usize, start_time: usize, len: usize) -> PathView<'a> {
        debug_assert_eq!(data.len(), dim * len);
        PathView { data, dim, start_time, len }
    }

    pub fn raw(&self) -> &'a [f64] {
        self.data
    }
}

impl PathBatch {
    pub fn path(&self, p: usize) -> PathView<'_> {
        let d = self.model.dim();
        let len = self.len_dates();
        PathView {
            data: &self.data[p * d * len..(p + 1) * d * len],
            dim: d,
            start_time: self.start_time,
            len,
        }
    }

    pub fn len_dates(&self) -> usize {
        self.grid.num_steps + 1 - self.start_time
    }

    /// Largest absolute price over all paths, assets and dates.
    pub fn max_abs_price(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Build a batch from explicit rows (tests, diagnostics, file import).
    pub fn from_paths(model: ModelSpec, grid: TimeGrid, start_time: usize, paths: Vec<Vec<f64>>) -> PathBatch {
        let d = model.dim();
        let len = grid.num_steps + 1 - start_time;
        let n = paths.len();
        let mut data = Vec::with_capacity(n * d * len);
        for p in &paths {
            assert_eq!(p.len(), d * len);
            data.extend_from_slice(p);
        }
        let start_state = model.start_state();
        PathBatch { model, grid, seed: 0, start_time, start_state, n_paths: n, data }
    }

    /// Dump as CSV, one row per path, assets ordered by index.
    pub fn to_csv(&self) -> String {
        let d = self.model.dim();
        let mut s = String::new();
        let mut header: Vec<String> = vec!["path".into()];
        for a in 0..d {
            for t in self.start_time..=self.grid.num_steps {
                header.push(format!("a{a}_t{t}"));
            }
        }
        s.push_str(&header.join(","));
        s.push('\n');
        for p in 0..self.n_paths {
            let view = self.path(p);
            let mut row = vec![p.to_string()];
            for a in 0..d {
                for t in self.start_time..=self.grid.num_steps {
                    row.push(format!("{}", view.value(a, t)));
                }
            }
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Simulate `n` paths from date 0 (or from an explicit `(time, state)`).
///
/// Deterministic in `(model, grid, n, seed, from)`; per-path substreams are
/// derived from the seed and path index so parallel generation is stable.
pub fn simulate(
    model: &ModelSpec,
    grid: &TimeGrid,
    n: usize,
    seed: u64,
    from: Option<(usize, &[f64])>,
) -> Result<PathBatch> {
    model.validate()?;
    if n < 1 {
        return Err(Error::parameter("simulate: need at least one path"));
    }
    let (start_time, start_state) = match from {
        None => (0usize, model.start_state()),
        Some((t, state)) => {
            if t >= grid.num_steps {
                return Err(Error::parameter("simulate: start time must precede maturity"));
            }
            if state.len() != model.dim() {
                return Err(Error::Shape(format!(
                    "simulate: state has {} entries for a {}-asset model",
                    state.len(),
                    model.dim()
                )));
            }
            (t, state.to_vec())
        }
    };

    let d = model.dim();
    let len = grid.num_steps + 1 - start_time;
    let mut data = vec![0.0f64; n * d * len];
    let root = StreamId::new(seed);
    for (p, chunk) in data.chunks_exact_mut(d * len).enumerate() {
        let mut rng = root.child(p as u64).rng();
        simulate_one(model, grid, &start_state, len, chunk, &mut rng);
    }
    Ok(PathBatch {
        model: model.clone(),
        grid: *grid,
        seed,
        start_time,
        start_state,
        n_paths: n,
        data,
    })
}

/// Restart-from-state simulation: `n` paths on `[t, T]` starting at `state`.
pub fn resimulate_conditional(
    state_at: (usize, &[f64]),
    model: &ModelSpec,
    grid: &TimeGrid,
    n: usize,
    seed: u64,
) -> Result<PathBatch> {
    simulate(model, grid, n, seed, Some(state_at))
}

fn simulate_one(
    model: &ModelSpec,
    grid: &TimeGrid,
    start: &[f64],
    len: usize,
    out: &mut [f64],
    rng: &mut impl Rng,
) {
    let dt = grid.dt();
    let r = grid.rate;
    let gauss = Normal::new(0.0, 1.0).unwrap();
    match model {
        ModelSpec::Gbm { sigma, .. } => {
            let drift = (r - 0.5 * sigma * sigma) * dt;
            let diff = sigma * dt.sqrt();
            out[0] = start[0];
            for k in 1..len {
                let z: f64 = gauss.sample(rng);
                out[k] = out[k - 1] * (drift + diff * z).exp();
            }
        }
        ModelSpec::Ar1 { phi, vol, .. } => {
            // One transition per exercise date on the log-price.
            let mut log_s = start[0].ln();
            out[0] = start[0];
            for k in 1..len {
                let z: f64 = gauss.sample(rng);
                log_s = phi * log_s + vol * z;
                out[k] = log_s.exp();
            }
        }
        ModelSpec::MeanRevJump { theta, mu, sigma, lambda, alpha, .. } => {
            let pois = if *lambda > 0.0 { Some(Poisson::new(lambda * dt).unwrap()) } else { None };
            let sev = Exp::new(*alpha).unwrap();
            let diff = sigma * dt.sqrt();
            out[0] = start[0];
            for k in 1..len {
                let z: f64 = gauss.sample(rng);
                let mut s = out[k - 1] + theta * (mu - out[k - 1]) * dt + diff * z;
                if let Some(p) = &pois {
                    let jumps = p.sample(rng) as usize;
                    for _ in 0..jumps {
                        s += sev.sample(rng);
                    }
                }
                out[k] = s;
            }
        }
        ModelSpec::MultiGbm { sigma, .. } => {
            let sqrt_dt = dt.sqrt();
            for (a, _) in sigma.iter().enumerate() {
                out[a * len] = start[a];
            }
            // Step-major draws keep the stream layout independent of d.
            for k in 1..len {
                for (a, sg) in sigma.iter().enumerate() {
                    let z: f64 = gauss.sample(rng);
                    let drift = (r - 0.5 * sg * sg) * dt;
                    out[a * len + k] = out[a * len + k - 1] * (drift + sg * sqrt_dt * z).exp();
                }
            }
        }
        ModelSpec::Binomial { up, down, p_up, .. } => {
            out[0] = start[0];
            for k in 1..len {
                let u: f64 = rng.gen();
                out[k] = out[k - 1] * if u < *p_up { *up } else { *down };
            }
        }
    }
}
