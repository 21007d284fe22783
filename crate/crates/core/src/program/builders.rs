//! Builders for the four reference contracts: American put, zero-strike
//! swing, windowed Asian swing with refraction, and the multi-right
//! passport option.

use serde_json::json;

use crate::error::{Error, Result};
use crate::milp::Rel;
use crate::models::TimeGrid;

use super::{
    ConScope, Kern, OptionProgram, PathCoef, ProgramBuilder, ProgramMeta, VarId, VarKind, VarRole, VarScope,
};

/// Single-exercise American put with strike `k`: payoff
/// `e^{-rt} max(K - S_t, 0) X_t`, one exercise right over the horizon.
pub fn build_american_put(k: f64, grid: &TimeGrid) -> Result<OptionProgram> {
    if !(k > 0.0) {
        return Err(Error::parameter("american put: strike must be positive"));
    }
    let mut b = ProgramBuilder::new(*grid);
    let dates = grid.num_steps + 1;
    let mut xs = Vec::with_capacity(dates);
    for t in 0..dates {
        let x = b.add_var(format!("x{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.add_payoff(PathCoef::discounted(Kern::PutPayoff { strike: k, time: t }, t), x);
        b.mark_stop(t, x);
        xs.push(x);
    }
    let terms: Vec<(PathCoef, VarId)> = xs.iter().map(|&x| (PathCoef::constant(1.0), x)).collect();
    b.add_con(terms, Rel::Le, 1.0, ConScope::PerPath);
    b.add_budget_cap(xs, 1.0);
    Ok(b.finish(ProgramMeta {
        name: "american_put".into(),
        params: json!({ "strike": k }),
    }))
}

/// Zero-strike swing call on the spot with at most `n_rights` exercises;
/// undiscounted payoff `S_t X_t`.
pub fn build_swing_zero_strike(n_rights: usize, grid: &TimeGrid) -> Result<OptionProgram> {
    let mut b = ProgramBuilder::new(*grid);
    let dates = grid.num_steps + 1;
    let mut xs = Vec::with_capacity(dates);
    for t in 0..dates {
        let x = b.add_var(format!("x{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.add_payoff(PathCoef::kernel(Kern::Spot { asset: 0, time: t }), x);
        b.mark_stop(t, x);
        xs.push(x);
    }
    let terms: Vec<(PathCoef, VarId)> = xs.iter().map(|&x| (PathCoef::constant(1.0), x)).collect();
    b.add_con(terms, Rel::Le, n_rights as f64, ConScope::PerPath);
    b.add_budget_cap(xs, n_rights as f64);
    Ok(b.finish(ProgramMeta {
        name: "swing_zero_strike".into(),
        params: json!({ "rights": n_rights }),
    }))
}

/// Multiple-exercise Asian call on the 5-period trailing average with a
/// local volume bound `q`, global volume bound `q_total`, refraction window
/// `refraction`, and at most `n_rights` exercises. Payoff terms start at
/// the first date where the window exists.
pub fn build_asian_swing(
    strike: f64,
    n_rights: usize,
    refraction: usize,
    q: f64,
    q_total: f64,
    grid: &TimeGrid,
) -> Result<OptionProgram> {
    if !(strike > 0.0) {
        return Err(Error::parameter("asian swing: strike must be positive"));
    }
    if !(q > 0.0) || !(q_total > 0.0) {
        return Err(Error::parameter("asian swing: volume bounds must be positive"));
    }
    const WINDOW: usize = 5;
    let mut b = ProgramBuilder::new(*grid);
    let dates = grid.num_steps + 1;
    let mut xs = Vec::with_capacity(dates);
    let mut ys = Vec::with_capacity(dates);
    for t in 0..dates {
        let x = b.add_var(format!("x{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        let y = b.add_var(format!("y{t}"), VarKind::Continuous, t, 0.0, q, VarRole::Control, VarScope::Decision);
        b.mark_stop(t, x);
        xs.push(x);
        ys.push(y);
    }
    for t in (WINDOW - 1)..dates {
        let z = b.linearize_product(xs[t], ys[t], q)?;
        b.add_payoff(
            PathCoef::discounted(Kern::WindowCallPayoff { strike, window: WINDOW, time: t }, t),
            z,
        );
    }
    // Global volume.
    let vol_terms: Vec<(PathCoef, VarId)> = ys.iter().map(|&y| (PathCoef::constant(1.0), y)).collect();
    b.add_con(vol_terms, Rel::Le, q_total, ConScope::PerPath);
    // Refraction windows.
    if refraction >= 1 {
        for t in 0..dates {
            let hi = (t + refraction).min(dates - 1);
            if hi == t {
                continue;
            }
            let terms: Vec<(PathCoef, VarId)> =
                (t..=hi).map(|s| (PathCoef::constant(1.0), xs[s])).collect();
            b.add_con(terms, Rel::Le, 1.0, ConScope::PerPath);
        }
    }
    // Exercise count.
    let count_terms: Vec<(PathCoef, VarId)> = xs.iter().map(|&x| (PathCoef::constant(1.0), x)).collect();
    b.add_con(count_terms, Rel::Le, n_rights as f64, ConScope::PerPath);
    b.add_budget_cap(xs.clone(), n_rights as f64);
    b.add_budget_cap(ys.clone(), q_total);
    Ok(b.finish(ProgramMeta {
        name: "asian_swing".into(),
        params: json!({
            "strike": strike, "rights": n_rights, "refraction": refraction,
            "local_volume": q, "global_volume": q_total, "window": WINDOW,
        }),
    }))
}

/// Passport option configuration; `barrier: None` means no knockout.
#[derive(Debug, Clone)]
pub struct PassportConfig {
    pub n_switches: usize,
    /// Position limit Q.
    pub position_limit: f64,
    /// Smooth-change limit q.
    pub smooth_limit: f64,
    /// Position-limit extension length L.
    pub extension_len: usize,
    pub barrier: Option<f64>,
    pub n_assets: usize,
}

/// Passport option on `n_assets` stocks with constrained trading, switch
/// limits, smooth-change exceptions, one position-limit extension, a
/// knockout barrier, reset rights, mark/restore rights and a final
/// long-or-short choice.
pub fn build_passport(cfg: &PassportConfig, grid: &TimeGrid) -> Result<OptionProgram> {
    let q_pos = cfg.position_limit;
    let q_smooth = cfg.smooth_limit;
    if !(q_pos >= 0.0) {
        return Err(Error::parameter("passport: position limit must be nonnegative"));
    }
    if !(q_smooth > 0.0) {
        return Err(Error::parameter("passport: smooth-change limit must be positive"));
    }
    if let Some(bar) = cfg.barrier {
        if !(bar > 0.0) {
            return Err(Error::parameter("passport: barrier must be positive"));
        }
    }
    if cfg.n_assets == 0 {
        return Err(Error::parameter("passport: need at least one asset"));
    }
    let t_end = grid.num_steps; // payoff date
    if t_end < 2 {
        return Err(Error::parameter("passport: need at least two steps"));
    }
    let n_assets = cfg.n_assets;
    let mut b = ProgramBuilder::new(*grid);
    // Big-M unit: account values are bounded by (2Q) * T * max price, with
    // the factor 2 covering the extended position limit.
    b.set_bigm_unit(2.0 * q_pos.max(1e-9) * t_end as f64);
    let one = PathCoef::constant(1.0);
    let neg = PathCoef::constant(-1.0);

    // Trading decisions per date 0..T-1.
    let mut x = vec![Vec::with_capacity(t_end); n_assets]; // X^i_t
    let mut y = vec![Vec::with_capacity(t_end); n_assets]; // Y^i_t
    let mut z = vec![Vec::with_capacity(t_end); n_assets]; // Z = X*Y
    let mut pl = Vec::with_capacity(t_end);
    for t in 0..t_end {
        for i in 0..n_assets {
            let xv = b.add_var(format!("x{i}_{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
            b.mark_stop(t, xv);
            x[i].push(xv);
            let yv = b.add_var(
                format!("y{i}_{t}"),
                VarKind::Continuous,
                t,
                -2.0 * q_pos,
                2.0 * q_pos,
                VarRole::Control,
                VarScope::Decision,
            );
            y[i].push(yv);
            // Z = X*Y with static box bounds, exact for binary X:
            // z <= hi x, z >= lo x, z - y - lo x <= -lo, z - y - hi x >= -hi.
            let (lo_y, hi_y) = (-2.0 * q_pos, 2.0 * q_pos);
            let zv = b.add_var(format!("z{i}_{t}"), VarKind::Continuous, t, lo_y, hi_y, VarRole::Auxiliary, VarScope::Decision);
            let cell = ConScope::PerCell { time: t };
            b.add_con(vec![(one, zv), (PathCoef::constant(-hi_y), xv)], Rel::Le, 0.0, cell);
            b.add_con(vec![(one, zv), (PathCoef::constant(-lo_y), xv)], Rel::Ge, 0.0, cell);
            b.add_con(vec![(one, zv), (neg, yv), (PathCoef::constant(-lo_y), xv)], Rel::Le, -lo_y, cell);
            b.add_con(vec![(one, zv), (neg, yv), (PathCoef::constant(-hi_y), xv)], Rel::Ge, -hi_y, cell);
            z[i].push(zv);
        }
        let plv = b.add_var(format!("pl{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.mark_stop(t, plv);
        pl.push(plv);
    }
    // One extension right.
    b.add_con(pl.iter().map(|&v| (one, v)).collect(), Rel::Le, 1.0, ConScope::PerPath);

    // Trading volume I: |Y^i_t| <= Q + Q * U_t with U_t the extension window.
    for t in 0..t_end {
        let lo_s = t.saturating_sub(cfg.extension_len);
        for i in 0..n_assets {
            let mut up: Vec<(PathCoef, VarId)> = vec![(one, y[i][t])];
            let mut dn: Vec<(PathCoef, VarId)> = vec![(one, y[i][t])];
            for s in lo_s..=t {
                up.push((PathCoef::constant(-q_pos), pl[s]));
                dn.push((PathCoef::constant(q_pos), pl[s]));
            }
            b.add_con(up, Rel::Le, q_pos, ConScope::PerPath);
            b.add_con(dn, Rel::Ge, -q_pos, ConScope::PerPath);
        }
    }

    // Trading volume II: smooth changes with 3 exceptions.
    let mut sl = Vec::new();
    for t in 1..t_end {
        let slv = b.add_var(format!("sl{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.mark_stop(t, slv);
        sl.push(slv);
        for i in 0..n_assets {
            let big = 4.0 * q_pos;
            b.add_con(
                vec![(one, y[i][t]), (neg, y[i][t - 1]), (PathCoef::constant(-big), slv)],
                Rel::Le,
                q_smooth,
                ConScope::PerPath,
            );
            b.add_con(
                vec![(one, y[i][t - 1]), (neg, y[i][t]), (PathCoef::constant(-big), slv)],
                Rel::Le,
                q_smooth,
                ConScope::PerPath,
            );
        }
    }
    if !sl.is_empty() {
        b.add_con(sl.iter().map(|&v| (one, v)).collect(), Rel::Le, 3.0, ConScope::PerPath);
    }

    // Trading timing: one stock at a time, switch count limited.
    for t in 0..t_end {
        let terms: Vec<(PathCoef, VarId)> = (0..n_assets).map(|i| (one, x[i][t])).collect();
        b.add_con(terms, Rel::Le, 1.0, ConScope::PerCell { time: t });
    }
    let mut switch_terms: Vec<(PathCoef, VarId)> = Vec::new();
    for t in 1..t_end {
        for i in 0..n_assets {
            let u = b.add_var(format!("u{i}_{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Auxiliary, VarScope::Decision);
            b.add_con(vec![(one, u), (neg, x[i][t]), (one, x[i][t - 1])], Rel::Ge, 0.0, ConScope::PerPath);
            b.add_con(vec![(one, u), (one, x[i][t]), (neg, x[i][t - 1])], Rel::Ge, 0.0, ConScope::PerPath);
            switch_terms.push((one, u));
        }
    }
    b.add_con(switch_terms, Rel::Le, cfg.n_switches as f64, ConScope::PerPath);

    // Rights acting on the account: reset, mark, restore.
    let mut reset = Vec::with_capacity(t_end);
    let mut mpx = Vec::with_capacity(t_end);
    let mut mark = Vec::with_capacity(t_end);
    for t in 1..=t_end {
        let rv = b.add_var(format!("r{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.mark_stop(t, rv);
        reset.push(rv);
        let mv = b.add_var(format!("mpx{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.mark_stop(t, mv);
        mpx.push(mv);
    }
    for t in 0..t_end {
        let mv = b.add_var(format!("mp{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        b.mark_stop(t, mv);
        mark.push(mv);
    }
    b.add_con(reset.iter().map(|&v| (one, v)).collect(), Rel::Le, 3.0, ConScope::PerPath);
    b.add_con(mpx.iter().map(|&v| (one, v)).collect(), Rel::Le, 1.0, ConScope::PerPath);
    b.add_con(mark.iter().map(|&v| (one, v)).collect(), Rel::Le, 1.0, ConScope::PerPath);

    // Long-or-short election at mid-life.
    let t_mid = t_end / 2;
    let p_long = b.add_var("p_long", VarKind::Binary, t_mid, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
    b.mark_stop(t_mid, p_long);

    // Account recursion.
    let inf = f64::INFINITY;
    let mut acct = Vec::with_capacity(t_end + 1); // A_t
    for t in 0..=t_end {
        let a = b.add_var(format!("a{t}"), VarKind::Continuous, t, if t == 0 { 0.0 } else { -inf }, if t == 0 { 0.0 } else { inf }, VarRole::Auxiliary, VarScope::PathAux);
        acct.push(a);
    }
    // Marked value terms MP_s * A_s, shared across the restore dates.
    let mut marked: Vec<VarId> = Vec::with_capacity(t_end);
    for s in 0..t_end {
        marked.push(b.linearize_product_bigm(mark[s], acct[s], ConScope::PerPath));
    }
    for t in 1..=t_end {
        let aa = b.add_var(format!("aa{t}"), VarKind::Continuous, t, -inf, inf, VarRole::Auxiliary, VarScope::PathAux);
        // A^a_t = A_{t-1} + sum_i dS^i_t Z^i_{t-1}
        let mut terms: Vec<(PathCoef, VarId)> = vec![(one, aa), (neg, acct[t - 1])];
        for i in 0..n_assets {
            terms.push((PathCoef::kernel(Kern::Increment { asset: i, time: t }).scaled(-1.0), z[i][t - 1]));
        }
        b.add_con(terms, Rel::Eq, 0.0, ConScope::PerPath);

        // A^b_t = sum_{s<t} MP_s A_s.
        let ab = b.add_var(format!("ab{t}"), VarKind::Continuous, t, -inf, inf, VarRole::Auxiliary, VarScope::PathAux);
        let mut ab_terms: Vec<(PathCoef, VarId)> = vec![(one, ab)];
        for &prod in marked.iter().take(t.min(t_end)) {
            ab_terms.push((neg, prod));
        }
        b.add_con(ab_terms, Rel::Eq, 0.0, ConScope::PerPath);

        // Gate A^a / A^b by the reset and restore rights:
        // A_t = (1-R_t)(1-MPX_t) A^a_t + (1-R_t) MPX_t A^b_t.
        let (rv, mv) = (reset[t - 1], mpx[t - 1]);
        let wa = b.add_var(format!("wa{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Auxiliary, VarScope::Decision);
        let wb = b.add_var(format!("wb{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Auxiliary, VarScope::Decision);
        let cell = ConScope::PerCell { time: t };
        b.add_con(vec![(one, wa), (one, rv)], Rel::Le, 1.0, cell);
        b.add_con(vec![(one, wa), (one, mv)], Rel::Le, 1.0, cell);
        b.add_con(vec![(one, wa), (one, rv), (one, mv)], Rel::Ge, 1.0, cell);
        b.add_con(vec![(one, wb), (one, rv)], Rel::Le, 1.0, cell);
        b.add_con(vec![(one, wb), (neg, mv)], Rel::Le, 0.0, cell);
        b.add_con(vec![(one, wb), (one, rv), (neg, mv)], Rel::Ge, 0.0, cell);
        let aw = b.linearize_product_bigm(wa, aa, ConScope::PerPath);
        let bw = b.linearize_product_bigm(wb, ab, ConScope::PerPath);
        b.add_con(vec![(one, acct[t]), (neg, aw), (neg, bw)], Rel::Eq, 0.0, ConScope::PerPath);
    }

    // Barrier indicator per date plus the knockout OR.
    let p_b = if let Some(bar) = cfg.barrier {
        let pb = b.add_var("p_b", VarKind::Binary, t_end, 0.0, 1.0, VarRole::Auxiliary, VarScope::PathAux);
        let mut or_terms: Vec<(PathCoef, VarId)> = vec![(one, pb)];
        for t in 1..=t_end {
            let g = b.add_var(format!("bar_up{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Auxiliary, VarScope::PathAux);
            let h = b.add_var(format!("bar_dn{t}"), VarKind::Binary, t, 0.0, 1.0, VarRole::Auxiliary, VarScope::PathAux);
            // A_t - M G <= bar ; A_t - M G >= bar - M
            b.add_con_bigm(vec![(one, acct[t]), (PathCoef::big_m(-1.0), g)], Rel::Le, bar, 0.0, ConScope::PerPath);
            b.add_con_bigm(vec![(one, acct[t]), (PathCoef::big_m(-1.0), g)], Rel::Ge, bar, -1.0, ConScope::PerPath);
            // -A_t - M H <= bar ; -A_t - M H >= bar - M
            b.add_con_bigm(vec![(neg, acct[t]), (PathCoef::big_m(-1.0), h)], Rel::Le, bar, 0.0, ConScope::PerPath);
            b.add_con_bigm(vec![(neg, acct[t]), (PathCoef::big_m(-1.0), h)], Rel::Ge, bar, -1.0, ConScope::PerPath);
            b.add_con(vec![(one, pb), (neg, g)], Rel::Ge, 0.0, ConScope::PerPath);
            b.add_con(vec![(one, pb), (neg, h)], Rel::Ge, 0.0, ConScope::PerPath);
            or_terms.push((neg, g));
            or_terms.push((neg, h));
        }
        b.add_con(or_terms, Rel::Le, 0.0, ConScope::PerPath);
        Some(pb)
    } else {
        None
    };

    // Final payoff legs: split A_T into positive and negative parts.
    let s_sign = b.add_var("sign_T", VarKind::Binary, t_end, 0.0, 1.0, VarRole::Auxiliary, VarScope::PathAux);
    let a_plus = b.add_var("a_plus", VarKind::Continuous, t_end, 0.0, inf, VarRole::Auxiliary, VarScope::PathAux);
    let a_minus = b.add_var("a_minus", VarKind::Continuous, t_end, 0.0, inf, VarRole::Auxiliary, VarScope::PathAux);
    b.add_con(vec![(one, acct[t_end]), (neg, a_plus), (one, a_minus)], Rel::Eq, 0.0, ConScope::PerPath);
    b.add_con_bigm(vec![(one, a_plus), (PathCoef::big_m(-1.0), s_sign)], Rel::Le, 0.0, 0.0, ConScope::PerPath);
    b.add_con_bigm(vec![(one, a_minus), (PathCoef::big_m(1.0), s_sign)], Rel::Le, 0.0, 1.0, ConScope::PerPath);

    // Chosen leg: P_long A_plus + (1 - P_long) A_minus.
    let c_long = b.linearize_product_bigm(p_long, a_plus, ConScope::PerPath);
    let d_short = b.linearize_product_bigm(p_long, a_minus, ConScope::PerPath);
    let leg = b.add_var("leg", VarKind::Continuous, t_end, -inf, inf, VarRole::Auxiliary, VarScope::PathAux);
    b.add_con(
        vec![(one, leg), (neg, c_long), (neg, a_minus), (one, d_short)],
        Rel::Eq,
        0.0,
        ConScope::PerPath,
    );

    match p_b {
        Some(pb) => {
            // Payoff: e^{-rT} [(1 - P_B) leg + P_B * bar].
            let gated = b.linearize_product_bigm(pb, leg, ConScope::PerPath);
            b.add_payoff(PathCoef { kern: Kern::One, scale: 1.0, disc_time: Some(t_end), bigm_mult: 0.0 }, leg);
            b.add_payoff(PathCoef { kern: Kern::One, scale: -1.0, disc_time: Some(t_end), bigm_mult: 0.0 }, gated);
            let bar = cfg.barrier.unwrap();
            b.add_payoff(PathCoef { kern: Kern::One, scale: bar, disc_time: Some(t_end), bigm_mult: 0.0 }, pb);
        }
        None => {
            b.add_payoff(PathCoef { kern: Kern::One, scale: 1.0, disc_time: Some(t_end), bigm_mult: 0.0 }, leg);
        }
    }

    Ok(b.finish(ProgramMeta {
        name: "passport".into(),
        params: json!({
            "switches": cfg.n_switches,
            "position_limit": q_pos,
            "smooth_limit": q_smooth,
            "extension_len": cfg.extension_len,
            "barrier": cfg.barrier,
            "assets": n_assets,
        }),
    }))
}
