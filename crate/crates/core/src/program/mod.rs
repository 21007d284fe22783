//! Algebraic model of a constrained multiple-exercise option: decision
//! variables, per-time payoff terms, almost-sure linear constraints, the
//! weighting stopping time used by the dual, and product-linearization
//! helpers. Builders for the four reference contracts live in [`builders`].

mod assemble;
pub mod builders;

pub use assemble::{instantiate_dual, instantiate_lookahead, instantiate_on_path, Assembly, CellLayout};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::Rel;
use crate::models::{PathView, TimeGrid};

/// Handle to a program variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    Stopping,
    Control,
    Auxiliary,
}

/// How a variable is replicated when a pathwise program is assembled.
///
/// `Decision` variables become nearest-neighbor basis weights in the
/// lookahead (one copy per Voronoi cell at their date); `PathAux` variables
/// track per-path state (accounts, barrier flags) and get one copy per
/// sample path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarScope {
    Decision,
    PathAux,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionVar {
    pub name: String,
    pub kind: VarKind,
    pub time: usize,
    pub lo: f64,
    pub hi: f64,
    pub role: VarRole,
    pub scope: VarScope,
}

/// Path-dependent scalar kernels that appear as coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kern {
    One,
    /// max(strike - S_t, 0)
    PutPayoff { strike: f64, time: usize },
    /// S^asset_t
    Spot { asset: usize, time: usize },
    /// max(mean(S_{t-window+1..t}) - strike, 0)
    WindowCallPayoff { strike: f64, window: usize, time: usize },
    /// S^asset_t - S^asset_{t-1}
    Increment { asset: usize, time: usize },
}

impl Kern {
    fn eval(&self, path: &PathView<'_>) -> f64 {
        match *self {
            Kern::One => 1.0,
            Kern::PutPayoff { strike, time } => (strike - path.value(0, time)).max(0.0),
            Kern::Spot { asset, time } => path.value(asset, time),
            Kern::WindowCallPayoff { strike, window, time } => {
                let mut acc = 0.0;
                for s in time + 1 - window..=time {
                    acc += path.value(0, s);
                }
                (acc / window as f64 - strike).max(0.0)
            }
            Kern::Increment { asset, time } => path.value(asset, time) - path.value(asset, time - 1),
        }
    }
}

/// Coefficient `scale * kern(path) * e^{-r dt disc_time} + bigm_mult * M`,
/// where `M` is the run-level big-M bound supplied at instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCoef {
    pub kern: Kern,
    pub scale: f64,
    pub disc_time: Option<usize>,
    pub bigm_mult: f64,
}

impl PathCoef {
    pub fn constant(c: f64) -> PathCoef {
        PathCoef { kern: Kern::One, scale: c, disc_time: None, bigm_mult: 0.0 }
    }

    pub fn big_m(mult: f64) -> PathCoef {
        PathCoef { kern: Kern::One, scale: 0.0, disc_time: None, bigm_mult: mult }
    }

    pub fn kernel(kern: Kern) -> PathCoef {
        PathCoef { kern, scale: 1.0, disc_time: None, bigm_mult: 0.0 }
    }

    pub fn discounted(kern: Kern, time: usize) -> PathCoef {
        PathCoef { kern, scale: 1.0, disc_time: Some(time), bigm_mult: 0.0 }
    }

    pub fn scaled(mut self, s: f64) -> PathCoef {
        self.scale *= s;
        self
    }

    pub fn eval(&self, path: &PathView<'_>, grid: &TimeGrid, big_m: f64) -> f64 {
        let disc = match self.disc_time {
            Some(t) => grid.discount(t),
            None => 1.0,
        };
        self.scale * self.kern.eval(path) * disc + self.bigm_mult * big_m
    }

    pub fn is_path_free(&self) -> bool {
        matches!(self.kern, Kern::One)
    }
}

/// Where a constraint template is replicated at instantiation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConScope {
    /// Once per Voronoi cell at `time`; may reference only `Decision`
    /// variables at that date and path-free coefficients.
    PerCell { time: usize },
    /// Once per sample path.
    PerPath,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinConstraint {
    pub terms: Vec<(PathCoef, VarId)>,
    pub rel: Rel,
    pub rhs: f64,
    pub rhs_bigm: f64,
    pub scope: ConScope,
}

/// Exercise-budget metadata used to skip lookaheads once rights run out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetCap {
    pub vars: Vec<VarId>,
    pub cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub name: String,
    pub params: serde_json::Value,
}

/// Algebraic description of one option: payoff terms that are linear in the
/// decisions for each fixed path, almost-sure linear constraints, and the
/// weighting stopping time used by the dual penalty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptionProgram {
    pub grid: TimeGrid,
    pub vars: Vec<DecisionVar>,
    pub payoff: Vec<(PathCoef, VarId)>,
    pub constraints: Vec<LinConstraint>,
    /// Per date, the binary decisions whose OR forms the weighting stopping
    /// time; a single entry is the plain product form.
    pub stop_vars: Vec<Vec<VarId>>,
    pub budget_caps: Vec<BudgetCap>,
    /// Unit for run-level big-M values (0 when the program never needs one);
    /// the effective big-M is `bigm_unit * price_bound`.
    pub bigm_unit: f64,
    pub meta: ProgramMeta,
}

impl OptionProgram {
    pub fn var(&self, id: VarId) -> &DecisionVar {
        &self.vars[id.0]
    }

    pub fn dates(&self) -> usize {
        self.grid.num_steps + 1
    }

    /// Decision-scope variables at a given date, program order.
    pub fn decisions_at(&self, t: usize) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(move |(_, v)| v.scope == VarScope::Decision && v.time == t)
            .map(|(i, _)| VarId(i))
    }

    /// True when some budget cap is exhausted by the fixed decisions.
    pub fn budget_exhausted(&self, fixed: &[Option<f64>]) -> bool {
        self.budget_caps.iter().any(|cap| {
            let used: f64 = cap.vars.iter().filter_map(|v| fixed[v.0]).sum();
            used >= cap.cap - 1e-9
        })
    }

    /// JSON debug dump of variables, constraints and payoff terms.
    pub fn debug_dump(&self) -> serde_json::Value {
        serde_json::json!({
            "meta": self.meta,
            "vars": self.vars,
            "payoff_terms": self.payoff.len(),
            "constraints": self.constraints.len(),
            "stop_vars": self.stop_vars,
        })
    }
}

/// Incremental builder used by the contract builders.
pub struct ProgramBuilder {
    grid: TimeGrid,
    vars: Vec<DecisionVar>,
    payoff: Vec<(PathCoef, VarId)>,
    constraints: Vec<LinConstraint>,
    stop_vars: Vec<Vec<VarId>>,
    budget_caps: Vec<BudgetCap>,
    bigm_unit: f64,
}

impl ProgramBuilder {
    pub fn new(grid: TimeGrid) -> ProgramBuilder {
        let dates = grid.num_steps + 1;
        ProgramBuilder {
            grid,
            vars: Vec::new(),
            payoff: Vec::new(),
            constraints: Vec::new(),
            stop_vars: vec![Vec::new(); dates],
            budget_caps: Vec::new(),
            bigm_unit: 0.0,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        time: usize,
        lo: f64,
        hi: f64,
        role: VarRole,
        scope: VarScope,
    ) -> VarId {
        let (lo, hi) = match kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Continuous => (lo, hi),
        };
        self.vars.push(DecisionVar { name: name.into(), kind, time, lo, hi, role, scope });
        VarId(self.vars.len() - 1)
    }

    pub fn add_payoff(&mut self, coef: PathCoef, var: VarId) {
        self.payoff.push((coef, var));
    }

    pub fn add_con(&mut self, terms: Vec<(PathCoef, VarId)>, rel: Rel, rhs: f64, scope: ConScope) {
        self.constraints.push(LinConstraint { terms, rel, rhs, rhs_bigm: 0.0, scope });
    }

    pub fn add_con_bigm(
        &mut self,
        terms: Vec<(PathCoef, VarId)>,
        rel: Rel,
        rhs: f64,
        rhs_bigm: f64,
        scope: ConScope,
    ) {
        self.constraints.push(LinConstraint { terms, rel, rhs, rhs_bigm, scope });
    }

    pub fn mark_stop(&mut self, t: usize, var: VarId) {
        self.stop_vars[t].push(var);
    }

    pub fn add_budget_cap(&mut self, vars: Vec<VarId>, cap: f64) {
        self.budget_caps.push(BudgetCap { vars, cap });
    }

    pub fn set_bigm_unit(&mut self, unit: f64) {
        self.bigm_unit = unit;
    }

    /// Exact linearization of `z = x * y` for binary `x` and `y in [0, a]`:
    /// `z <= y`, `z <= a x`, `z >= y + a x - a`.
    pub fn linearize_product(&mut self, x: VarId, y: VarId, a: f64) -> Result<VarId> {
        if !(a > 0.0) {
            return Err(Error::parameter("linearize_product: bound a must be positive"));
        }
        let (xt, yt) = (self.vars[x.0].time, self.vars[y.0].time);
        if xt != yt {
            return Err(Error::parameter("linearize_product: x and y must share a date"));
        }
        let scope = if self.vars[x.0].scope == VarScope::Decision && self.vars[y.0].scope == VarScope::Decision {
            ConScope::PerCell { time: xt }
        } else {
            ConScope::PerPath
        };
        let name = format!("{}*{}", self.vars[x.0].name, self.vars[y.0].name);
        let z = self.add_var(name, VarKind::Continuous, xt, 0.0, a, VarRole::Auxiliary, self.vars[y.0].scope);
        let one = PathCoef::constant(1.0);
        self.add_con(vec![(one, z), (PathCoef::constant(-1.0), y)], Rel::Le, 0.0, scope);
        self.add_con(vec![(one, z), (PathCoef::constant(-a), x)], Rel::Le, 0.0, scope);
        self.add_con(
            vec![(one, z), (PathCoef::constant(-1.0), y), (PathCoef::constant(-a), x)],
            Rel::Ge,
            -a,
            scope,
        );
        Ok(z)
    }

    /// Big-M linearization of `z = x * y` for binary `x` and `y` bounded by
    /// the run-level big-M: `|z| <= M x`, `|z - y| <= M (1 - x)`.
    pub fn linearize_product_bigm(&mut self, x: VarId, y: VarId, scope: ConScope) -> VarId {
        let t = self.vars[x.0].time.max(self.vars[y.0].time);
        let name = format!("{}*{}", self.vars[x.0].name, self.vars[y.0].name);
        let z = self.add_var(name, VarKind::Continuous, t, f64::NEG_INFINITY, f64::INFINITY, VarRole::Auxiliary, VarScope::PathAux);
        let one = PathCoef::constant(1.0);
        let neg = PathCoef::constant(-1.0);
        // z <= M x ; z >= -M x
        self.add_con_bigm(vec![(one, z), (PathCoef::big_m(-1.0), x)], Rel::Le, 0.0, 0.0, scope);
        self.add_con_bigm(vec![(one, z), (PathCoef::big_m(1.0), x)], Rel::Ge, 0.0, 0.0, scope);
        // z - y <= M (1 - x) ; z - y >= -M (1 - x)
        self.add_con_bigm(vec![(one, z), (neg, y), (PathCoef::big_m(1.0), x)], Rel::Le, 0.0, 1.0, scope);
        self.add_con_bigm(vec![(one, z), (neg, y), (PathCoef::big_m(-1.0), x)], Rel::Ge, 0.0, -1.0, scope);
        z
    }

    pub fn finish(self, meta: ProgramMeta) -> OptionProgram {
        OptionProgram {
            grid: self.grid,
            vars: self.vars,
            payoff: self.payoff,
            constraints: self.constraints,
            stop_vars: self.stop_vars,
            budget_caps: self.budget_caps,
            bigm_unit: self.bigm_unit,
            meta,
        }
    }
}

#[cfg(test)]
mod tests;
