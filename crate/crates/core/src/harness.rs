//! Experiments built on the two solvers: ε-sweeps of the fast-reaction
//! system against the direct solver, self-convergence studies, and two-run
//! stability comparisons.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    exchange_dissipation_signcheck, relaxation_defect, stability_compare,
    Populations, StabilityReport, TimeIntegral,
};
use crate::error::{Error, Result};
use crate::fast::{initial_fast_state, run_fast, FastState};
use crate::grid::{integrate, lp_norm, Field, Grid};
use crate::model::{
    build_fast_reaction, mass_growth_constant, v_bound_constants, CrossFunction,
    FastReactionConfig, ModelParams,
};
use crate::solver::{History, Observer, SolverConfig};
use crate::xdiff::{run_cross, CrossDiffState};

pub const SCHEMA: &str = "xdiff-lab/1";

/// Initial profile, sampled at cell centers of whatever grid a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `base + amp · cos(kx π x / Lx) · cos(ky π y / Ly)`
    Cosine { base: f64, amp: f64, kx: f64, ky: f64 },
    /// The spatially uniform coexistence state of the reaction system.
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    U,
    V,
}

impl Profile {
    pub fn sample(&self, grid: &Grid, params: &ModelParams, species: Species) -> Result<Field> {
        match *self {
            Profile::Constant { value } => Ok(Field::constant(*grid, value)),
            Profile::Cosine { base, amp, kx, ky } => {
                let (lx, ly) = (grid.length(0), grid.length(1));
                let dim = grid.dim();
                grid.sample(|x| {
                    let cy = if dim == 2 { (ky * PI * x[1] / ly).cos() } else { 1.0 };
                    base + amp * (kx * PI * x[0] / lx).cos() * cy
                })
            }
            Profile::Coexistence => {
                let (u, v) = params.coexistence_state().ok_or_else(|| {
                    Error::Model("no positive coexistence state found for these parameters".into())
                })?;
                Ok(Field::constant(*grid, if species == Species::U { u } else { v }))
            }
        }
    }
}

/// Everything a direct run needs, with initial data kept as profiles so the
/// same problem can be posed on refined grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub params: ModelParams,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub u_in: Profile,
    pub v_in: Profile,
    pub snapshot_every: usize,
}

impl Problem {
    fn preset(a: f64, d: f64) -> Self {
        Problem {
            params: ModelParams {
                d_u: 0.1,
                d_v: 0.1,
                r_u: 1.0,
                r_v: 1.0,
                r_a: 1.0,
                r_b: 0.5,
                r_c: 1.0,
                r_d: 0.5,
                a,
                b: 1.0,
                c: 1.0,
                d,
                phi: CrossFunction::Linear { slope: 0.5 },
            },
            grid: Grid::new_1d(200, 1.0).expect("preset grid"),
            solver: SolverConfig::new(2e-4, 1.0),
            u_in: Profile::Cosine { base: 1.0, amp: 0.5, kx: 2.0, ky: 0.0 },
            v_in: Profile::Cosine { base: 1.0, amp: 0.5, kx: 1.0, ky: 0.0 },
            snapshot_every: 50,
        }
    }

    /// Quadratic SKT competition (`a = b = c = d = 1`, linear φ).
    pub fn skt_preset() -> Self {
        Self::preset(1.0, 1.0)
    }

    /// `a = 2`, `d = 1`, so `d < a`.
    pub fn theorem1_preset() -> Self {
        Self::preset(2.0, 1.0)
    }

    pub fn initial_fields(&self, grid: &Grid) -> Result<(Field, Field)> {
        Ok((
            self.u_in.sample(grid, &self.params, Species::U)?,
            self.v_in.sample(grid, &self.params, Species::V)?,
        ))
    }

    pub fn cross_initial(&self) -> Result<CrossDiffState> {
        let (u, v) = self.initial_fields(&self.grid)?;
        CrossDiffState::new(u, v)
    }

    /// Grid and time step divided by `factor`; snapshot times are kept.
    pub fn refined(&self, factor: usize) -> Self {
        Problem {
            grid: self.grid.refined(factor),
            solver: self.solver.refined(factor),
            snapshot_every: self.snapshot_every * factor,
            ..self.clone()
        }
    }

    pub fn fast_config(&self, epsilon: f64) -> Result<FastReactionConfig> {
        let (_, v) = self.initial_fields(&self.grid)?;
        build_fast_reaction(&self.params, v.max(), epsilon)
    }

    pub fn fast_initial(&self, frc: &FastReactionConfig) -> Result<FastState> {
        let (u, v) = self.initial_fields(&self.grid)?;
        initial_fast_state(&u, &v, frc)
    }
}

/// Per-step checks of the maximum principle, the mass inequality, the sign of
/// the exchange dissipation, and accumulation of space-time norms.
#[derive(Debug, Clone)]
pub struct EstimateMonitor<'a> {
    frc: Option<&'a FastReactionConfig>,
    dissipation_ps: Vec<f64>,
    defect_p: f64,
    dt: f64,
    v_bound: f64,
    v_bound_strict: f64,
    mass_in: f64,
    volume: f64,
    k_true: f64,
    t0: f64,
    pub report: MonitorReport,
    defect: TimeIntegral,
    duality: TimeIntegral,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub steps: usize,
    /// `max_t (max v − bound)`; ≤ 1e-9 required.
    pub max_v_excess: f64,
    /// Steps on which the stricter explicit bound on `v` was exceeded.
    pub strict_v_bound_violations: usize,
    /// `max_t (∫u(t) − ∫u_in − K |Ω| t)`, compared against `1e-9 · t/dt`.
    pub max_mass_excess: f64,
    pub mass_violations: usize,
    pub min_dissipation: f64,
    /// `(∫₀ᵀ ‖(h u_A)^{p/2} − (k u_B)^{p/2}‖²)^{1/2}`
    pub defect_space_time: f64,
    /// `‖u‖_{L²([0,T]×Ω)}`
    pub duality_norm: f64,
}

impl<'a> EstimateMonitor<'a> {
    /// `v_in_sup` is the max of the initial `v` as seen by the solver, so it
    /// already contains any shift of the data.
    pub fn new(
        params: &'a ModelParams,
        frc: Option<&'a FastReactionConfig>,
        v_in_sup: f64,
        mass_in: f64,
        grid: &Grid,
        cfg: &SolverConfig,
        defect_p: f64,
        dissipation_ps: Vec<f64>,
    ) -> Self {
        let (strict, comparison) = v_bound_constants(params, v_in_sup);
        Self {
            frc,
            dissipation_ps,
            defect_p,
            dt: cfg.dt,
            v_bound: comparison,
            v_bound_strict: strict,
            mass_in,
            volume: grid.volume(),
            k_true: mass_growth_constant(params).1,
            t0: f64::NAN,
            report: MonitorReport {
                max_v_excess: f64::NEG_INFINITY,
                max_mass_excess: f64::NEG_INFINITY,
                min_dissipation: f64::INFINITY,
                ..MonitorReport::default()
            },
            defect: TimeIntegral::default(),
            duality: TimeIntegral::default(),
        }
    }

    fn common<S: Populations>(&mut self, step: usize, state: &S) -> Result<()> {
        if step == 0 {
            self.t0 = state.time();
        }
        let t = state.time() - self.t0;
        let vmax = state.v_field().max();
        self.report.steps = step;
        self.report.max_v_excess = self.report.max_v_excess.max(vmax - self.v_bound);
        if vmax > self.v_bound_strict + 1e-9 {
            self.report.strict_v_bound_violations += 1;
        }
        let u = state.total_u();
        let excess = integrate(&u) - self.mass_in - self.k_true * self.volume * t;
        self.report.max_mass_excess = self.report.max_mass_excess.max(excess);
        if excess > 1e-9 * (t / self.dt) {
            self.report.mass_violations += 1;
        }
        let l2 = lp_norm(&u, 2.0)?;
        self.duality.push(t, l2 * l2);
        self.report.duality_norm = self.duality.value.sqrt();
        Ok(())
    }

    pub fn v_bound(&self) -> f64 {
        self.v_bound
    }
}

impl Observer<CrossDiffState> for EstimateMonitor<'_> {
    fn observe(&mut self, step: usize, state: &CrossDiffState) -> Result<()> {
        self.common(step, state)
    }
}

impl Observer<FastState> for EstimateMonitor<'_> {
    fn observe(&mut self, step: usize, state: &FastState) -> Result<()> {
        self.common(step, state)?;
        let frc = self
            .frc
            .ok_or_else(|| Error::Parameter("fast-reaction monitoring needs rates".into()))?;
        for &p in &self.dissipation_ps {
            let (min, _) = exchange_dissipation_signcheck(state, frc, p)?;
            self.report.min_dissipation = self.report.min_dissipation.min(min);
        }
        let d = relaxation_defect(state, frc, self.defect_p)?;
        self.defect.push(state.t - self.t0, d * d);
        self.report.defect_space_time = self.defect.value.sqrt();
        Ok(())
    }
}

/// Runs the direct solver with a monitor attached.
pub fn monitored_cross(
    problem: &Problem,
) -> Result<(History<CrossDiffState>, MonitorReport)> {
    let init = problem.cross_initial()?;
    let mut mon = EstimateMonitor::new(
        &problem.params,
        None,
        init.v.max(),
        integrate(&init.u),
        &problem.grid,
        &problem.solver,
        2.0,
        Vec::new(),
    );
    let h = run_cross(&init, &problem.params, &problem.solver, problem.snapshot_every, &mut mon)?;
    Ok((h, mon.report))
}

/// Runs the fast-reaction solver at `epsilon` with a monitor attached.
pub fn monitored_fast(
    problem: &Problem,
    epsilon: f64,
    defect_p: f64,
    dissipation_ps: &[f64],
) -> Result<(History<FastState>, MonitorReport)> {
    let frc = problem.fast_config(epsilon)?;
    let init = problem.fast_initial(&frc)?;
    let mut mon = EstimateMonitor::new(
        &problem.params,
        Some(&frc),
        init.v.max(),
        integrate(&init.total_u()),
        &problem.grid,
        &problem.solver,
        defect_p,
        dissipation_ps.to_vec(),
    );
    let h = run_fast(&init, &problem.params, &frc, &problem.solver, problem.snapshot_every, &mut mon)?;
    Ok((h, mon.report))
}

/// Sup-in-time L¹ and L² distances between the total `u` of two histories
/// at their common snapshot times; the finer one is restricted onto the
/// coarser grid.
pub fn history_distance<A: Populations, B: Populations>(
    coarse: &History<A>,
    fine: &History<B>,
) -> Result<(f64, f64)> {
    let mut l1: f64 = 0.0;
    let mut l2: f64 = 0.0;
    let mut matched = 0;
    let mut j = 0;
    for a in &coarse.snapshots {
        let ta = a.time();
        while j < fine.snapshots.len() && fine.snapshots[j].time() < ta - 1e-9 {
            j += 1;
        }
        let Some(b) = fine.snapshots.get(j) else { break };
        if (b.time() - ta).abs() > 1e-9 {
            continue;
        }
        let ub = b.total_u().restrict_to(&coarse.grid)?;
        let diff = a.total_u().zip_map(&ub, |x, y| x - y);
        l1 = l1.max(lp_norm(&diff, 1.0)?);
        l2 = l2.max(lp_norm(&diff, 2.0)?);
        matched += 1;
    }
    if matched < 2 {
        return Err(Error::Comparison("histories share fewer than two snapshot times".into()));
    }
    Ok((l1, l2))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsError {
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSlopes {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub defect: Option<f64>,
    /// ε values left out of the error fits for sitting within 3× of the floor.
    pub excluded_eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeta {
    pub nx: usize,
    pub dt: f64,
    pub reference_nx: usize,
    pub reference_dt: f64,
    /// Distance between the direct run and its refined reference.
    pub floor: EpsError,
    /// Same measurement for the fast run at the smallest ε, for context.
    pub fast_floor: Option<EpsError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub eps_values: Vec<f64>,
    pub errors: Vec<Option<EpsError>>,
    pub defects: Vec<Option<f64>>,
    pub duality_norms: Vec<Option<f64>>,
    pub fitted_slopes: FittedSlopes,
    pub reference_meta: ReferenceMeta,
    pub direct_monitor: MonitorReport,
    pub reference_monitor: MonitorReport,
    pub fast_monitors: Vec<Option<MonitorReport>>,
    /// `(ε, message)` for runs that failed.
    pub failures: Vec<(f64, String)>,
    /// Non-monotone error steps above the floor.
    pub anomalies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub eps_list: Vec<f64>,
    /// Exponent of the relaxation defect.
    pub defect_p: f64,
    /// Exponents at which the dissipation sign is monitored.
    pub dissipation_ps: Vec<f64>,
}

pub fn eps_sweep(problem: &Problem, opts: &SweepOptions) -> Result<SweepReport> {
    let eps = &opts.eps_list;
    if eps.is_empty() {
        return Err(Error::Parameter("eps_list is empty".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Parameter("every ε must lie in (0, 1)".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("eps_list must be strictly decreasing".into()));
    }

    let reference = problem.refined(2);
    let smallest = *eps.last().expect("nonempty");
    let ((direct, refined), (fast_runs, fast_ref)) = rayon::join(
        || rayon::join(|| monitored_cross(problem), || monitored_cross(&reference)),
        || {
            rayon::join(
                || {
                    eps.par_iter()
                        .map(|&e| monitored_fast(problem, e, opts.defect_p, &opts.dissipation_ps))
                        .collect::<Vec<_>>()
                },
                || monitored_fast(&reference, smallest, opts.defect_p, &[]),
            )
        },
    );
    let (direct, direct_monitor) = direct?;
    let (refined, reference_monitor) = refined?;
    let (f1, f2) = history_distance(&direct, &refined)?;
    let floor = EpsError { l1: f1, l2: f2 };

    let fast_floor = match (&fast_runs[eps.len() - 1], fast_ref) {
        (Ok((coarse, _)), Ok((fine, _))) => {
            history_distance(coarse, &fine).ok().map(|(l1, l2)| EpsError { l1, l2 })
        }
        _ => None,
    };

    let mut errors = Vec::new();
    let mut defects = Vec::new();
    let mut duality_norms = Vec::new();
    let mut fast_monitors = Vec::new();
    let mut failures = Vec::new();
    for (&e, run) in eps.iter().zip(fast_runs) {
        let outcome = run.and_then(|(h, mon)| {
            let (l1, l2) = history_distance(&direct, &h)?;
            Ok((EpsError { l1, l2 }, mon))
        });
        match outcome {
            Ok((err, mon)) => {
                errors.push(Some(err));
                defects.push(Some(mon.defect_space_time));
                duality_norms.push(Some(mon.duality_norm));
                fast_monitors.push(Some(mon));
            }
            Err(err) => {
                failures.push((e, err.to_string()));
                errors.push(None);
                defects.push(None);
                duality_norms.push(None);
                fast_monitors.push(None);
            }
        }
    }

    let mut excluded = Vec::new();
    let mut fit = |pick: fn(&EpsError) -> f64, floor: f64, record: bool| {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&e, err) in eps.iter().zip(&errors) {
            let Some(err) = err else { continue };
            if pick(err) <= 3.0 * floor {
                if record {
                    excluded.push(e);
                }
                continue;
            }
            xs.push(e);
            ys.push(pick(err));
        }
        loglog_slope(&xs, &ys)
    };
    let l1_slope = fit(|e| e.l1, floor.l1, true);
    let l2_slope = fit(|e| e.l2, floor.l2, false);
    let (dx, dy): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(&defects)
        .filter_map(|(&e, d)| d.map(|d| (e, d)))
        .unzip();
    let defect_slope = loglog_slope(&dx, &dy);

    let mut anomalies = Vec::new();
    for i in 1..errors.len() {
        if let (Some(prev), Some(cur)) = (&errors[i - 1], &errors[i]) {
            if cur.l1 > prev.l1 && cur.l1 > 2.0 * floor.l1 {
                anomalies.push(format!(
                    "L1 error grows from {:.3e} (ε = {}) to {:.3e} (ε = {}) above the floor {:.3e}",
                    prev.l1, eps[i - 1], cur.l1, eps[i], floor.l1
                ));
            }
        }
    }

    Ok(SweepReport {
        schema: SCHEMA.into(),
        eps_values: eps.clone(),
        errors,
        defects,
        duality_norms,
        fitted_slopes: FittedSlopes { l1: l1_slope, l2: l2_slope, defect: defect_slope, excluded_eps: excluded },
        reference_meta: ReferenceMeta {
            nx: problem.grid.n(0),
            dt: problem.solver.dt,
            reference_nx: reference.grid.n(0),
            reference_dt: reference.solver.dt,
            floor,
            fast_floor,
        },
        direct_monitor,
        reference_monitor,
        fast_monitors,
        failures,
        anomalies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMeta {
    pub nx: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub schema: String,
    pub levels: Vec<LevelMeta>,
    /// Distance between level `i` and level `i + 1`.
    pub successive_diffs: Vec<EpsError>,
    /// `log2` of consecutive L² difference ratios.
    pub orders: Vec<f64>,
    /// Least-squares order over all levels, when at least two differences exist.
    pub fitted_order: Option<f64>,
}

pub fn refine_study(problem: &Problem, levels: usize) -> Result<RefineReport> {
    refine_study_with_ratio(problem, levels, 2)
}

pub fn refine_study_with_ratio(problem: &Problem, levels: usize, ratio: usize) -> Result<RefineReport> {
    if levels < 2 {
        return Err(Error::Parameter(format!("refinement needs at least 2 levels, got {levels}")));
    }
    if ratio < 2 {
        return Err(Error::Parameter(
            "refinement ratio below 2 makes consecutive levels identical".into(),
        ));
    }
    let problems: Vec<Problem> =
        (0..levels).map(|l| problem.refined(ratio.pow(l as u32))).collect();
    let runs: Vec<Result<History<CrossDiffState>>> =
        problems.par_iter().map(|p| monitored_cross(p).map(|r| r.0)).collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut diffs = Vec::new();
    for w in runs.windows(2) {
        let (l1, l2) = history_distance(&w[0], &w[1])?;
        diffs.push(EpsError { l1, l2 });
    }
    let orders: Vec<f64> = diffs
        .windows(2)
        .map(|w| (w[0].l2 / w[1].l2).ln() / (ratio as f64).ln())
        .collect();
    let hs: Vec<f64> = (0..diffs.len()).map(|l| (ratio as f64).powi(-(l as i32))).collect();
    let fitted_order = if diffs.len() >= 2 {
        loglog_slope(&hs, &diffs.iter().map(|d| d.l2).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(RefineReport {
        schema: SCHEMA.into(),
        levels: problems
            .iter()
            .map(|p| LevelMeta { nx: p.grid.n(0), dt: p.solver.dt })
            .collect(),
        successive_diffs: diffs,
        orders,
        fitted_order,
    })
}

/// Compactly supported bump `(1 − r²)²` centered in the box, radius a quarter
/// of each side.
pub fn perturbation_bump(grid: &Grid) -> Result<Field> {
    let dim = grid.dim();
    let (lx, ly) = (grid.length(0), grid.length(1));
    grid.sample(|x| {
        let mut r2 = ((x[0] - 0.5 * lx) / (0.25 * lx)).powi(2);
        if dim == 2 {
            r2 += ((x[1] - 0.5 * ly) / (0.25 * ly)).powi(2);
        }
        if r2 < 1.0 { (1.0 - r2) * (1.0 - r2) } else { 0.0 }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityExperimentReport {
    pub schema: String,
    pub deltas: Vec<f64>,
    pub final_gap: Vec<f64>,
    pub gap_over_delta: Vec<f64>,
    pub growth_rates: Vec<f64>,
    /// Worst `gap / envelope` with a 10% margin on the rate; ≤ 1 means respected.
    pub envelope_ratio: Vec<f64>,
    pub comparisons: Vec<StabilityReport>,
}

pub fn stability_experiment(problem: &Problem, deltas: &[f64]) -> Result<StabilityExperimentReport> {
    if deltas.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
        return Err(Error::Parameter("perturbation sizes must be finite and ≥ 0".into()));
    }
    let base = problem.cross_initial()?;
    let bump = perturbation_bump(&problem.grid)?;
    let run = |init: &CrossDiffState| {
        run_cross(init, &problem.params, &problem.solver, problem.snapshot_every, &mut crate::solver::NoObserver)
    };
    let reference = run(&base)?;
    let comparisons = deltas
        .par_iter()
        .map(|&delta| {
            let init = CrossDiffState { u: base.u.zip_map(&bump, |u, b| u + delta * b), ..base.clone() };
            stability_compare(&reference, &run(&init)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let final_gap: Vec<f64> =
        comparisons.iter().map(|c| *c.gap().last().expect("nonempty")).collect();
    let gap_over_delta = final_gap
        .iter()
        .zip(deltas)
        .map(|(g, d)| if *d == 0.0 { 0.0 } else { g / d })
        .collect();
    Ok(StabilityExperimentReport {
        schema: SCHEMA.into(),
        deltas: deltas.to_vec(),
        final_gap,
        gap_over_delta,
        growth_rates: comparisons.iter().map(|c| c.fitted_growth_rate).collect(),
        envelope_ratio: comparisons.iter().map(|c| c.envelope_ratio(0.1)).collect(),
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1e-1, 1e-2, 1e-3];
        let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.sqrt()).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 0.5).abs() < 1e-12);
        assert!(loglog_slope(&x[..1], &y[..1]).is_none());
    }

    #[test]
    fn sweep_validates_eps_list() {
        let p = Problem::skt_preset();
        let opts = |eps: Vec<f64>| SweepOptions { eps_list: eps, defect_p: 0.5, dissipation_ps: vec![0.5] };
        assert!(eps_sweep(&p, &opts(vec![])).is_err());
        assert!(eps_sweep(&p, &opts(vec![0.01, 0.1])).is_err());
        assert!(eps_sweep(&p, &opts(vec![1.5])).is_err());
    }

    #[test]
    fn refine_rejects_degenerate_requests() {
        let p = Problem::skt_preset();
        assert!(refine_study(&p, 1).is_err());
        assert!(refine_study_with_ratio(&p, 3, 1).is_err());
    }

    #[test]
    fn bump_is_compact() {
        let g = Grid::new_1d(100, 2.0).unwrap();
        let b = perturbation_bump(&g).unwrap();
        assert_eq!(b.values()[0], 0.0);
        assert!((b.max() - 1.0).abs() < 1e-3);
    }
}
