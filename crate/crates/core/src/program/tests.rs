use super::builders::*;
use super::*;
use crate::milp::{solve_milp, SolveStatus, SolverOptions};
use crate::models::{ModelSpec, PathBatch, TimeGrid};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn one_asset_batch(prices: Vec<f64>, rate: f64) -> PathBatch {
    let steps = prices.len() - 1;
    let grid = TimeGrid::new(steps as u32, 1.0, rate).unwrap();
    let model = ModelSpec::Gbm { s0: prices[0], sigma: 0.0 };
    PathBatch::from_paths(model, grid, 0, vec![prices])
}

fn solve_pathwise(program: &OptionProgram, batch: &PathBatch) -> f64 {
    let fixed = vec![None; program.vars.len()];
    let asm = instantiate_on_path(program, &batch.path(0), 0, &fixed, batch.max_abs_price() * 1.5).unwrap();
    let sol = asm.solve(&opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    sol.objective
}

mod linearize {
    use super::*;
    use crate::milp::{Constraint, MilpProblem, Rel, Sense, Variable};
    use rand::Rng;

    /// Feasible z-set of the constraint triple for fixed (x, y), by scan.
    fn feasible_z(x: f64, y: f64, a: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let steps = 400;
        for i in 0..=steps {
            let z = a * i as f64 / steps as f64;
            if z <= y + 1e-9 && z <= a * x + 1e-9 && z >= y + a * x - a - 1e-9 {
                out.push(z);
            }
        }
        out
    }

    #[test]
    fn zero_x_forces_zero() {
        let zs = feasible_z(0.0, 0.7, 1.0);
        assert!(zs.iter().all(|&z| z.abs() < 1e-6));
        assert!(!zs.is_empty());
    }

    #[test]
    fn unit_x_forces_y() {
        let zs = feasible_z(1.0, 0.7, 1.0);
        assert!(zs.iter().all(|&z| (z - 0.7).abs() < 3e-3));
        assert!(!zs.is_empty());
    }

    #[test]
    fn random_draws_force_product() {
        let mut rng = crate::rng::StreamId::new(5).child(0).rng();
        for _ in 0..1000 {
            let a = rng.gen_range(0.1..4.0);
            let x = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
            let y = rng.gen_range(0.0..a);
            // LP over z with the triple: any feasible z equals x*y.
            let mut p = MilpProblem::new(Sense::Maximize);
            let z = p.add_var(Variable::continuous(0.0, a, 1.0));
            p.add_con(Constraint::new(vec![(z, 1.0)], Rel::Le, y));
            p.add_con(Constraint::new(vec![(z, 1.0)], Rel::Le, a * x));
            p.add_con(Constraint::new(vec![(z, 1.0)], Rel::Ge, y + a * x - a));
            let hi = solve_milp(&p, &opts()).unwrap();
            let mut q = p.clone();
            q.vars[z].obj = -1.0;
            let lo = solve_milp(&q, &opts()).unwrap();
            assert!((hi.objective - x * y).abs() < 1e-7);
            assert!((-lo.objective - x * y).abs() < 1e-7);
        }
    }

    #[test]
    fn nonpositive_bound_rejected() {
        let grid = TimeGrid::new(2, 1.0, 0.0).unwrap();
        let mut b = ProgramBuilder::new(grid);
        let x = b.add_var("x", VarKind::Binary, 0, 0.0, 1.0, VarRole::Stopping, VarScope::Decision);
        let y = b.add_var("y", VarKind::Continuous, 0, 0.0, 1.0, VarRole::Control, VarScope::Decision);
        assert!(b.linearize_product(x, y, 0.0).is_err());
    }
}

mod put {
    use super::*;

    #[test]
    fn never_in_the_money_is_worthless() {
        let batch = one_asset_batch(vec![50.0, 55.0, 60.0], 0.0);
        let put = build_american_put(40.0, &batch.grid).unwrap();
        assert!(solve_pathwise(&put, &batch).abs() < 1e-9);
    }

    #[test]
    fn two_date_exhaustive_enumeration() {
        let batch = one_asset_batch(vec![40.0, 30.0], 0.0);
        let put = build_american_put(40.0, &batch.grid).unwrap();
        // Feasible patterns: never (0), exercise at 0 (0), exercise at 1 (10).
        assert!((solve_pathwise(&put, &batch) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn structure_single_global_constraint() {
        let grid = TimeGrid::new(50, 1.0, 0.06).unwrap();
        let put = build_american_put(40.0, &grid).unwrap();
        assert_eq!(put.constraints.len(), 1);
        assert_eq!(put.vars.len(), 51);
        assert!(put.vars.iter().all(|v| v.kind == VarKind::Binary));
        assert!(build_american_put(0.0, &grid).is_err());
    }

    #[test]
    fn budget_exhausted_after_fix() {
        let grid = TimeGrid::new(2, 1.0, 0.0).unwrap();
        let put = build_american_put(40.0, &grid).unwrap();
        let mut fixed = vec![None; put.vars.len()];
        assert!(!put.budget_exhausted(&fixed));
        fixed[0] = Some(1.0);
        assert!(put.budget_exhausted(&fixed));
    }

    #[test]
    fn exercised_history_forces_remaining_zero() {
        let batch = one_asset_batch(vec![30.0, 20.0, 10.0], 0.0);
        let put = build_american_put(40.0, &batch.grid).unwrap();
        let mut fixed = vec![None; put.vars.len()];
        fixed[0] = Some(1.0);
        let asm = instantiate_on_path(&put, &batch.path(0), 1, &fixed, 100.0).unwrap();
        let sol = asm.solve(&opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        // Realized payoff at date 0 is 10; nothing else can be taken.
        assert!((sol.objective - 10.0).abs() < 1e-9);
    }

    #[test]
    fn fully_fixed_instantiation_is_constant() {
        let batch = one_asset_batch(vec![30.0, 20.0, 10.0], 0.0);
        let put = build_american_put(40.0, &batch.grid).unwrap();
        let mut fixed = vec![Some(0.0); put.vars.len()];
        fixed[2] = Some(1.0);
        let asm = instantiate_on_path(&put, &batch.path(0), 3, &fixed, 100.0).unwrap();
        let sol = asm.solve(&opts()).unwrap();
        assert!((sol.objective - 30.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_history_detected() {
        let batch = one_asset_batch(vec![30.0, 20.0, 10.0], 0.0);
        let put = build_american_put(40.0, &batch.grid).unwrap();
        let mut fixed = vec![Some(1.0); put.vars.len()];
        fixed[2] = Some(0.0);
        let r = instantiate_on_path(&put, &batch.path(0), 3, &fixed, 100.0);
        assert!(matches!(r, Err(crate::error::Error::InfeasibleHistory(_))));
    }
}

mod swing {
    use super::*;

    #[test]
    fn unconstrained_limit_takes_every_date() {
        let prices = vec![1.0, 3.0, 2.0, 5.0];
        let total: f64 = prices.iter().sum();
        let batch = one_asset_batch(prices, 0.0);
        let sw = build_swing_zero_strike(4, &batch.grid).unwrap();
        assert!((solve_pathwise(&sw, &batch) - total).abs() < 1e-9);
    }

    #[test]
    fn single_right_takes_the_peak() {
        let batch = one_asset_batch(vec![1.0, 3.0, 2.0, 5.0], 0.0);
        let sw = build_swing_zero_strike(1, &batch.grid).unwrap();
        assert!((solve_pathwise(&sw, &batch) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn two_rights_enumeration() {
        let batch = one_asset_batch(vec![1.0, 3.0, 2.0], 0.0);
        let sw = build_swing_zero_strike(2, &batch.grid).unwrap();
        // C(3,2) pairs: {0,1}=4, {0,2}=3, {1,2}=5.
        assert!((solve_pathwise(&sw, &batch) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn payoff_is_undiscounted() {
        let batch = one_asset_batch(vec![1.0, 1.0], 0.5);
        let sw = build_swing_zero_strike(2, &batch.grid).unwrap();
        assert!((solve_pathwise(&sw, &batch) - 2.0).abs() < 1e-9);
    }
}

mod asian {
    use super::*;

    fn fixed_path_10() -> Vec<f64> {
        vec![36.0, 37.5, 39.0, 38.0, 41.0, 44.0, 40.0, 35.0, 42.0, 45.0]
    }

    #[test]
    fn zero_rights_zero_value() {
        let batch = one_asset_batch(fixed_path_10(), 0.06);
        let pr = build_asian_swing(36.0, 0, 2, 0.3, 0.5, &batch.grid).unwrap();
        assert!(solve_pathwise(&pr, &batch).abs() < 1e-9);
    }

    #[test]
    fn payoff_terms_start_at_window_end() {
        let grid = TimeGrid::new(9, 1.0, 0.06).unwrap();
        let pr = build_asian_swing(36.0, 3, 2, 0.3, 0.5, &grid).unwrap();
        for (coef, _) in &pr.payoff {
            match coef.kern {
                Kern::WindowCallPayoff { time, .. } => assert!(time >= 4),
                k => panic!("unexpected payoff kernel {k:?}"),
            }
        }
    }

    #[test]
    fn refraction_spanning_horizon_allows_one_exercise() {
        let batch = one_asset_batch(fixed_path_10(), 0.06);
        let grid = batch.grid;
        let q = 0.3;
        let cap = 0.5;
        let pr = build_asian_swing(36.0, 3, 20, q, cap, &grid).unwrap();
        let got = solve_pathwise(&pr, &batch);
        // Single best windowed payoff with volume min(q, cap).
        let path = batch.path(0);
        let mut best = 0.0f64;
        for t in 4..=9 {
            let avg: f64 = (t - 4..=t).map(|s| path.value(0, s)).sum::<f64>() / 5.0;
            let pay = grid.discount(t) * (avg - 36.0).max(0.0) * q.min(cap);
            best = best.max(pay);
        }
        assert!((got - best).abs() < 1e-9, "milp {got} vs single-exercise {best}");
    }

    #[test]
    fn parameter_validation() {
        let grid = TimeGrid::new(9, 1.0, 0.06).unwrap();
        assert!(build_asian_swing(36.0, 2, 1, 0.0, 0.5, &grid).is_err());
        assert!(build_asian_swing(36.0, 2, 1, 0.3, 0.0, &grid).is_err());
    }

    /// Brute-force oracle over exercise patterns and a 0.1-step volume grid.
    fn grid_oracle(strike: f64, n: usize, refr: usize, q: f64, cap: f64, batch: &PathBatch) -> f64 {
        let grid = &batch.grid;
        let path = batch.path(0);
        let dates = grid.num_steps + 1;
        let coefs: Vec<f64> = (0..dates)
            .map(|t| {
                if t < 4 {
                    0.0
                } else {
                    let avg: f64 = (t - 4..=t).map(|s| path.value(0, s)).sum::<f64>() / 5.0;
                    grid.discount(t) * (avg - strike).max(0.0)
                }
            })
            .collect();
        let mut best = 0.0f64;
        let mut pattern = Vec::new();
        fn rec(
            t: usize,
            dates: usize,
            n_left: usize,
            last_ex: Option<usize>,
            refr: usize,
            pattern: &mut Vec<usize>,
            best: &mut f64,
            coefs: &[f64],
            q: f64,
            cap: f64,
        ) {
            if t == dates {
                // Volume grid: 0.1 steps per exercised date, greedy is not
                // exact under the shared cap, so enumerate.
                let k = pattern.len();
                if k == 0 {
                    return;
                }
                let steps = (q / 0.1).round() as usize;
                let mut alloc = vec![0usize; k];
                loop {
                    let vol: f64 = alloc.iter().map(|&a| a as f64 * 0.1).sum();
                    if vol <= cap + 1e-9 {
                        let val: f64 =
                            alloc.iter().zip(pattern.iter()).map(|(&a, &t)| a as f64 * 0.1 * coefs[t]).sum();
                        if val > *best {
                            *best = val;
                        }
                    }
                    let mut i = 0;
                    loop {
                        if i == k {
                            return;
                        }
                        alloc[i] += 1;
                        if alloc[i] <= steps {
                            break;
                        }
                        alloc[i] = 0;
                        i += 1;
                    }
                }
            } else {
                rec(t + 1, dates, n_left, last_ex, refr, pattern, best, coefs, q, cap);
                let ok_refr = last_ex.map_or(true, |s| t > s + refr);
                if n_left > 0 && ok_refr && coefs[t] > 0.0 {
                    pattern.push(t);
                    rec(t + 1, dates, n_left - 1, Some(t), refr, pattern, best, coefs, q, cap);
                    pattern.pop();
                }
            }
        }
        rec(0, dates, n, None, refr, &mut pattern, &mut best, &coefs, q, cap);
        best
    }

    #[test]
    fn milp_matches_volume_grid_oracle() {
        let batch = one_asset_batch(fixed_path_10(), 0.06);
        let (strike, n, refr, q, cap) = (38.0, 2, 2, 0.3, 0.5);
        let pr = build_asian_swing(strike, n, refr, q, cap, &batch.grid).unwrap();
        let milp = solve_pathwise(&pr, &batch);
        let oracle = grid_oracle(strike, n, refr, q, cap, &batch);
        // The oracle discretizes volumes at 0.1; the MILP is continuous.
        let max_coef = 6.0; // payoff coefficients on this path stay below 6
        assert!(milp >= oracle - 1e-9);
        assert!(milp <= oracle + 2.0 * 0.1 * max_coef + 1e-9, "milp {milp} oracle {oracle}");
    }
}

pub(crate) mod passport_reference {
    //! Direct contract semantics, independent of the MILP encoding.
    use crate::models::PathView;
    use crate::program::builders::PassportConfig;

    pub struct Decisions {
        pub x: Vec<Vec<u8>>,      // [asset][t], t = 0..T-1
        pub y: Vec<Vec<f64>>,     // [asset][t]
        pub pl: Vec<u8>,          // t = 0..T-1
        pub sl: Vec<u8>,          // t = 1..T-1 (index t-1)
        pub reset: Vec<u8>,       // t = 1..T (index t-1)
        pub mpx: Vec<u8>,         // t = 1..T (index t-1)
        pub mark: Vec<u8>,        // t = 0..T-1
        pub p_long: u8,
    }

    /// Payoff of a decision set on a path, or None when infeasible.
    pub fn value(cfg: &PassportConfig, disc_t: f64, path: &PathView<'_>, d: &Decisions) -> Option<f64> {
        let t_end = path.len - 1;
        let na = cfg.n_assets;
        let q_pos = cfg.position_limit;
        // Counts.
        if d.pl.iter().map(|&v| v as usize).sum::<usize>() > 1 {
            return None;
        }
        if d.sl.iter().map(|&v| v as usize).sum::<usize>() > 3 {
            return None;
        }
        if d.reset.iter().map(|&v| v as usize).sum::<usize>() > 3 {
            return None;
        }
        if d.mpx.iter().map(|&v| v as usize).sum::<usize>() > 1 {
            return None;
        }
        if d.mark.iter().map(|&v| v as usize).sum::<usize>() > 1 {
            return None;
        }
        let mut switches = 0usize;
        for t in 0..t_end {
            let live: usize = (0..na).map(|i| d.x[i][t] as usize).sum();
            if live > 1 {
                return None;
            }
            if t >= 1 {
                for i in 0..na {
                    switches += (d.x[i][t] as i32 - d.x[i][t - 1] as i32).unsigned_abs() as usize;
                }
            }
        }
        if switches > cfg.n_switches {
            return None;
        }
        // Volume bounds.
        for t in 0..t_end {
            let lo_s = t.saturating_sub(cfg.extension_len);
            let u: f64 = (lo_s..=t).map(|s| d.pl[s] as f64).sum();
            let lim = q_pos + q_pos * u;
            for i in 0..na {
                if d.y[i][t].abs() > lim + 1e-9 {
                    return None;
                }
                if t >= 1 {
                    let width = cfg.smooth_limit + 4.0 * q_pos * d.sl[t - 1] as f64;
                    if (d.y[i][t] - d.y[i][t - 1]).abs() > width + 1e-9 {
                        return None;
                    }
                }
            }
        }
        // Account recursion.
        let mut a = vec![0.0f64; t_end + 1];
        let mut hit = false;
        for t in 1..=t_end {
            let mut gain = 0.0;
            for i in 0..na {
                let ds = path.value(i, t) - path.value(i, t - 1);
                gain += ds * d.y[i][t - 1] * d.x[i][t - 1] as f64;
            }
            let aa = a[t - 1] + gain;
            let ab: f64 = (0..t.min(t_end)).map(|s| d.mark[s] as f64 * a[s]).sum();
            let (r, m) = (d.reset[t - 1], d.mpx[t - 1]);
            a[t] = if r == 1 {
                0.0
            } else if m == 1 {
                ab
            } else {
                aa
            };
            if let Some(b) = cfg.barrier {
                if a[t].abs() >= b - 1e-12 {
                    hit = true;
                }
            }
        }
        let payoff = if hit {
            cfg.barrier.unwrap()
        } else if d.p_long == 1 {
            a[t_end].max(0.0)
        } else {
            (-a[t_end]).max(0.0)
        };
        Some(disc_t * payoff)
    }
}

mod passport {
    use super::passport_reference::{value, Decisions};
    use super::*;

    fn cfg_single(barrier: Option<f64>) -> PassportConfig {
        PassportConfig {
            n_switches: 2,
            position_limit: 1.0,
            smooth_limit: 1.0,
            extension_len: 0,
            barrier,
            n_assets: 1,
        }
    }

    fn two_step_batch() -> PathBatch {
        one_asset_batch(vec![10.0, 12.0, 11.0], 0.0)
    }

    #[test]
    fn zero_position_limit_worthless() {
        let batch = two_step_batch();
        let cfg = PassportConfig { position_limit: 0.0, ..cfg_single(Some(5.0)) };
        let pr = build_passport(&cfg, &batch.grid).unwrap();
        let v = solve_pathwise(&pr, &batch);
        assert!(v.abs() < 1e-7, "expected 0, got {v}");
    }

    #[test]
    fn tiny_barrier_pays_barrier() {
        let batch = two_step_batch();
        let cfg = cfg_single(Some(0.01));
        let pr = build_passport(&cfg, &batch.grid).unwrap();
        let v = solve_pathwise(&pr, &batch);
        // Any nonzero trade breaches immediately; the barrier payout
        // dominates doing nothing.
        assert!((v - 0.01).abs() < 1e-7, "expected barrier payout, got {v}");
    }

    /// Exhaustive enumeration over binaries and a 0.25-step volume grid.
    fn enumerate_two_step(cfg: &PassportConfig, batch: &PathBatch) -> f64 {
        let path = batch.path(0);
        let disc = batch.grid.discount(2);
        let mut best = 0.0f64;
        let ys: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25).collect();
        for bits in 0u32..(1 << 12) {
            let b = |k: u32| ((bits >> k) & 1) as u8;
            let d0 = Decisions {
                x: vec![vec![b(0), b(1)]],
                y: vec![vec![0.0, 0.0]],
                pl: vec![b(2), b(3)],
                sl: vec![b(4)],
                reset: vec![b(5), b(6)],
                mpx: vec![b(7), b(8)],
                mark: vec![b(9), b(10)],
                p_long: b(11),
            };
            for &y0 in &ys {
                for &y1 in &ys {
                    let d = Decisions {
                        x: d0.x.clone(),
                        y: vec![vec![y0, y1]],
                        pl: d0.pl.clone(),
                        sl: d0.sl.clone(),
                        reset: d0.reset.clone(),
                        mpx: d0.mpx.clone(),
                        mark: d0.mark.clone(),
                        p_long: d0.p_long,
                    };
                    if let Some(v) = value(cfg, disc, &path, &d) {
                        if v > best {
                            best = v;
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn two_step_single_asset_matches_enumeration() {
        let batch = two_step_batch();
        let cfg = cfg_single(None);
        let pr = build_passport(&cfg, &batch.grid).unwrap();
        let milp = solve_pathwise(&pr, &batch);
        let oracle = enumerate_two_step(&cfg, &batch);
        assert!(
            (milp - oracle).abs() < 1e-6,
            "milp {milp} vs enumeration {oracle}"
        );
    }

    #[test]
    fn two_step_with_barrier_matches_enumeration() {
        let batch = two_step_batch();
        let cfg = cfg_single(Some(1.5));
        let pr = build_passport(&cfg, &batch.grid).unwrap();
        let milp = solve_pathwise(&pr, &batch);
        let oracle = enumerate_two_step(&cfg, &batch);
        assert!(
            (milp - oracle).abs() < 1e-6,
            "milp {milp} vs enumeration {oracle}"
        );
    }

    #[test]
    fn parameter_validation() {
        let grid = TimeGrid::new(12, 1.0, 0.06).unwrap();
        assert!(build_passport(&PassportConfig { barrier: Some(0.0), ..cfg_single(None) }, &grid).is_err());
        assert!(build_passport(&PassportConfig { smooth_limit: 0.0, ..cfg_single(None) }, &grid).is_err());
    }
}

mod weighting_stop {
    use super::*;

    #[test]
    fn put_stop_is_the_exercise_decision() {
        let grid = TimeGrid::new(3, 1.0, 0.0).unwrap();
        let put = build_american_put(40.0, &grid).unwrap();
        for t in 0..4 {
            assert_eq!(put.stop_vars[t].len(), 1);
            let v = put.var(put.stop_vars[t][0]);
            assert_eq!(v.time, t);
            assert_eq!(v.kind, VarKind::Binary);
        }
    }

    #[test]
    fn passport_stop_is_an_or_of_all_binary_decisions() {
        let grid = TimeGrid::new(4, 1.0, 0.0).unwrap();
        let cfg = PassportConfig {
            n_switches: 2,
            position_limit: 1.0,
            smooth_limit: 1.0,
            extension_len: 0,
            barrier: None,
            n_assets: 2,
        };
        let pr = build_passport(&cfg, &grid).unwrap();
        // Date 1 carries trading decisions plus SL, R, MPX rights.
        assert!(pr.stop_vars[1].len() >= 5);
        for &v in &pr.stop_vars[1] {
            assert_eq!(pr.var(v).kind, VarKind::Binary);
            assert_eq!(pr.var(v).role, VarRole::Stopping);
        }
    }
}

mod linearization_soundness {
    use super::*;
    use rand::Rng;

    /// Sampling random feasible integer assignments: the linearized
    /// objective must match direct evaluation of the nonlinear payoff.
    #[test]
    fn asian_product_linearization_consistent() {
        let mut rng = crate::rng::StreamId::new(77).child(0).rng();
        let batch = one_asset_batch(vec![36.0, 37.5, 39.0, 38.0, 41.0, 44.0, 40.0, 35.0, 42.0, 45.0], 0.06);
        let (strike, q, cap) = (38.0, 0.3, 0.5);
        let pr = build_asian_swing(strike, 2, 2, q, cap, &batch.grid).unwrap();
        let path = batch.path(0);
        for _ in 0..200 {
            // Random feasible decisions: two exercise dates with spacing,
            // volumes within the local and global bounds.
            let t1 = rng.gen_range(0..10);
            let t2 = rng.gen_range(0..10);
            let (t1, t2) = (t1.min(t2), t1.max(t2));
            let use_two = t2 > t1 + 2;
            let mut x = vec![0.0; 10];
            let mut y = vec![0.0; 10];
            x[t1] = 1.0;
            y[t1] = rng.gen_range(0.0..q);
            if use_two {
                x[t2] = 1.0;
                y[t2] = rng.gen_range(0.0..(cap - y[t1]).min(q).max(0.0));
            }
            // Direct nonlinear payoff.
            let mut direct = 0.0;
            for t in 4..10 {
                let avg: f64 = (t - 4..=t).map(|s| path.value(0, s)).sum::<f64>() / 5.0;
                direct += batch.grid.discount(t) * (avg - strike).max(0.0) * y[t] * x[t];
            }
            // Linearized objective with decisions fixed.
            let mut fixed = vec![None; pr.vars.len()];
            for t in 0..10 {
                for v in pr.decisions_at(t) {
                    let dv = pr.var(v);
                    fixed[v.0] = Some(match dv.role {
                        VarRole::Stopping => x[t],
                        VarRole::Control => y[t],
                        VarRole::Auxiliary => x[t] * y[t], // the product z
                    });
                }
            }
            let asm = instantiate_on_path(&pr, &path, 10, &fixed, 100.0).unwrap();
            let sol = asm.solve(&SolverOptions::default()).unwrap();
            assert!(
                (sol.objective - direct).abs() < 1e-9,
                "linearized {} vs direct {direct}",
                sol.objective
            );
        }
    }
}
