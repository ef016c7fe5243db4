//! Library results checked against independent computations.

use xdiff_lab::diagnostics::{dissipation_constant, duality_accumulate};
use xdiff_lab::fast::{run_fast, FastState};
use xdiff_lab::grid::{lp_norm, Field, Grid};
use xdiff_lab::harness::{eps_sweep, history_distance, refine_study, stability_experiment, SweepOptions};
use xdiff_lab::harness::{Problem, Profile};
use xdiff_lab::model::{build_fast_reaction, ModelParams};
use xdiff_lab::solver::{History, NoObserver, SolverConfig};
use xdiff_lab::xdiff::{run_cross, CrossDiffState};

fn growth_u(p: &ModelParams, s: f64, v: f64) -> f64 {
    p.r_u - p.r_a * s.powf(p.a) - p.r_b * v.powf(p.b)
}

fn growth_v(p: &ModelParams, s: f64, v: f64) -> f64 {
    p.r_v - p.r_c * v.powf(p.c) - p.r_d * s.powf(p.d)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn coexistence_matches_bisection() {
    for p in [Problem::skt_preset().params, Problem::theorem1_preset().params] {
        // eliminate u through the u-nullcline, then bisect the v-equation along it
        let u_of = |v: f64| ((p.r_u - p.r_b * v.powf(p.b)) / p.r_a).powf(1.0 / p.a);
        let v_max = (p.r_u / p.r_b).powf(1.0 / p.b).min(p.v_carrying_capacity());
        let v = bisect(1e-12, v_max * (1.0 - 1e-12), |v| growth_v(&p, u_of(v), v));
        let (un, vn) = p.coexistence_state().expect("coexistence exists");
        assert!((vn - v).abs() < 1e-12, "v {vn} vs {v}");
        assert!((un - u_of(v)).abs() < 1e-12, "u {un} vs {}", u_of(v));
    }
}

#[test]
fn phi1_matches_dense_scan() {
    let p = Problem::skt_preset();
    let frc = p.fast_config(1e-2).unwrap();
    let v1 = frc.v1;
    let chi = |v: f64| {
        if v <= v1 {
            1.0
        } else if v >= 2.0 * v1 {
            0.0
        } else {
            let s = (v - v1) / v1;
            1.0 - 10.0 * s.powi(3) + 15.0 * s.powi(4) - 6.0 * s.powi(5)
        }
    };
    let n = 2_000_000;
    let scan = (0..=n)
        .map(|i| {
            let v = 2.0 * v1 * i as f64 / n as f64;
            chi(v) * 0.5 * v
        })
        .fold(0.0f64, f64::max);
    assert!(frc.phi1 >= scan - 1e-12, "phi1 {} below scan {scan}", frc.phi1);
    assert!((frc.phi1 - scan).abs() < 1e-9 * scan, "phi1 {} vs {scan}", frc.phi1);
}

#[test]
fn dissipation_constant_matches_ratio_scan() {
    for p in [0.5f64, 1.5, 2.0, 3.0] {
        let ratio = |t: f64| {
            let num = (p - 1.0).signum() * (t - 1.0) * (t.powf(p - 1.0) - 1.0);
            let gap = t.powf(p / 2.0) - 1.0;
            num / (gap * gap)
        };
        let n = 400_000;
        let scan = (0..=n)
            .map(|i| 10f64.powf(-12.0 + 24.0 * i as f64 / n as f64))
            .filter(|t| (t - 1.0).abs() > 1e-4)
            .map(ratio)
            .fold(f64::INFINITY, f64::min);
        let c = dissipation_constant(p).unwrap();
        assert!((c - scan).abs() < 1e-3 * scan, "p = {p}: {c} vs scan {scan}");
    }
}

/// Classical RK4 on `y' = f(y)`.
fn rk4<const N: usize>(mut y: [f64; N], t_end: f64, steps: usize, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let h = t_end / steps as f64;
    let axpy = |y: &[f64; N], k: &[f64; N], a: f64| std::array::from_fn(|i| y[i] + a * k[i]);
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    y
}

fn uniform(grid: Grid, c: f64) -> Field {
    Field::constant(grid, c)
}

#[test]
fn uniform_cross_run_converges_to_reaction_ode_at_first_order() {
    let p = Problem::theorem1_preset().params;
    let grid = Grid::new_1d(4, 1.0).unwrap();
    let (u0, v0, t_end) = (1.3, 0.4, 0.5);
    let exact = rk4([u0, v0], t_end, 20_000, |y| {
        [y[0] * growth_u(&p, y[0], y[1]), y[1] * growth_v(&p, y[0], y[1])]
    });
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let init = CrossDiffState::new(uniform(grid, u0), uniform(grid, v0)).unwrap();
            let mut cfg = SolverConfig::new(dt, t_end);
            cfg.linear_tol = 1e-14;
            let h = run_cross(&init, &p, &cfg, 1000, &mut NoObserver).unwrap();
            let s = h.last();
            (s.u.values()[0] - exact[0]).abs() + (s.v.values()[0] - exact[1]).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let r = w[0] / w[1];
        assert!((1.8..2.2).contains(&r), "error ratio {r} ({errors:?})");
    }
}

#[test]
fn uniform_fast_run_converges_to_three_component_ode_at_first_order() {
    let p = Problem::skt_preset().params;
    let grid = Grid::new_1d(4, 1.0).unwrap();
    let frc = build_fast_reaction(&p, 1.5, 0.05).unwrap();
    let (a0, b0, v0, t_end) = (0.9, 0.2, 0.8, 0.5);
    let exact = rk4([a0, b0, v0], t_end, 40_000, |y| {
        let s = y[0] + y[1];
        let (h, k) = (frc.h(y[2]), frc.k(y[2]));
        let x = (k * y[1] - h * y[0]) / frc.epsilon;
        let g = growth_u(&p, s, y[2]);
        [y[0] * g + x, y[1] * g - x, y[2] * growth_v(&p, s, y[2])]
    });
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let init =
                FastState::new(uniform(grid, a0), uniform(grid, b0), uniform(grid, v0)).unwrap();
            let mut cfg = SolverConfig::new(dt, t_end);
            cfg.linear_tol = 1e-14;
            let h = run_fast(&init, &p, &frc, &cfg, 1000, &mut NoObserver).unwrap();
            let s = h.last();
            (s.u_a.values()[0] - exact[0]).abs()
                + (s.u_b.values()[0] - exact[1]).abs()
                + (s.v.values()[0] - exact[2]).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let r = w[0] / w[1];
        assert!((1.7..2.3).contains(&r), "error ratio {r} ({errors:?})");
    }
}

#[test]
fn duality_norm_matches_compensated_trapezoid() {
    let grid = Grid::new_1d(37, 2.0).unwrap();
    let times = [0.0, 0.013, 0.05, 0.051, 0.2, 0.7];
    let snapshots: Vec<CrossDiffState> = times
        .iter()
        .map(|&t| {
            let u = grid.sample(|x| 1.0 + t * (3.0 * x[0]).sin().abs() + x[0] * x[0]).unwrap();
            let mut s = CrossDiffState::new(u, uniform(grid, 1.0)).unwrap();
            s.t = t;
            s
        })
        .collect();
    // Kahan-summed trapezoid of ∫|u|² dx written out cell by cell
    let sq: Vec<f64> = snapshots
        .iter()
        .map(|s| s.u.values().iter().map(|x| x * x).sum::<f64>() * grid.cell_volume())
        .collect();
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 1..times.len() {
        let term = 0.5 * (times[i] - times[i - 1]) * (sq[i] + sq[i - 1]) - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    let history = History { grid, snapshots };
    let got = duality_accumulate(&history).unwrap();
    assert!((got - sum.sqrt()).abs() < 1e-13 * got, "{got} vs {}", sum.sqrt());
}

#[test]
fn restricted_distance_between_identical_profiles_is_roundoff() {
    let p = Problem::skt_preset();
    let mut coarse = p.clone();
    coarse.grid = Grid::new_1d(20, 1.0).unwrap();
    coarse.solver = SolverConfig::new(1e-2, 0.05);
    coarse.snapshot_every = 1;
    coarse.u_in = Profile::Coexistence;
    coarse.v_in = Profile::Coexistence;
    let fine = coarse.refined(2);
    let run = |q: &Problem| run_cross(&q.cross_initial().unwrap(), &q.params, &q.solver, q.snapshot_every, &mut NoObserver).unwrap();
    let (l1, l2) = history_distance(&run(&coarse), &run(&fine)).unwrap();
    assert!(l1 < 1e-13 && l2 < 1e-13, "{l1} {l2}");
}

fn short_problem() -> Problem {
    let mut p = Problem::skt_preset();
    p.grid = Grid::new_1d(24, 1.0).unwrap();
    p.solver = SolverConfig::new(5e-3, 0.1);
    p.snapshot_every = 4;
    p
}

#[test]
fn refinement_of_a_steady_state_has_no_differences() {
    let mut p = short_problem();
    p.u_in = Profile::Coexistence;
    p.v_in = Profile::Coexistence;
    let report = refine_study(&p, 3).unwrap();
    assert_eq!(report.levels.len(), 3);
    assert_eq!(report.levels[2].nx, 96);
    for d in &report.successive_diffs {
        assert!(d.l1 < 1e-12 && d.l2 < 1e-12, "{d:?}");
    }
}

#[test]
fn refinement_of_smooth_data_is_first_order() {
    let report = refine_study(&short_problem(), 3).unwrap();
    let order = report.fitted_order.unwrap();
    assert!((0.8..1.3).contains(&order), "order {order}");
}

#[test]
fn zero_perturbation_gives_zero_gap() {
    let report = stability_experiment(&short_problem(), &[0.0, 1e-3]).unwrap();
    assert_eq!(report.final_gap[0], 0.0);
    assert!(report.comparisons[0].gap().iter().all(|&g| g == 0.0));
    assert!(report.final_gap[1] > 0.0);
    // v is unperturbed, so the initial gap is δ times the bump's L² norm
    let bump_norm = lp_norm(&xdiff_lab::harness::perturbation_bump(&short_problem().grid).unwrap(), 2.0).unwrap();
    assert!((report.comparisons[1].initial_gap - 1e-3 * bump_norm).abs() < 1e-12);
}

#[test]
fn single_epsilon_sweep_has_no_slopes() {
    let p = short_problem();
    let opts = SweepOptions { eps_list: vec![0.05], defect_p: 0.5, dissipation_ps: vec![0.5] };
    let report = eps_sweep(&p, &opts).unwrap();
    assert_eq!(report.errors.len(), 1);
    assert!(report.errors[0].is_some());
    assert!(report.fitted_slopes.l1.is_none() && report.fitted_slopes.defect.is_none());
}
