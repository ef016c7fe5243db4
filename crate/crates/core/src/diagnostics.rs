//! Evaluators for the quantities the a-priori estimates control: mass, norms,
//! the weighted entropy, the relaxation defect, the sign of the exchange
//! dissipation, the weak-formulation residual, the space-time duality norm,
//! and the L² distance between two runs.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast::FastState;
use crate::grid::{for_each_face, gradient_l2, integrate, lp_norm, Field, Grid};
use crate::model::{FastReactionConfig, ModelParams};
use crate::solver::{History, Observer, TimeState};
use crate::xdiff::CrossDiffState;

/// Read access to the total `u` density and to `v` for either system.
pub trait Populations: TimeState {
    fn total_u(&self) -> Cow<'_, Field>;
    fn v_field(&self) -> &Field;
}

impl Populations for CrossDiffState {
    fn total_u(&self) -> Cow<'_, Field> {
        Cow::Borrowed(&self.u)
    }
    fn v_field(&self) -> &Field {
        &self.v
    }
}

impl Populations for FastState {
    fn total_u(&self) -> Cow<'_, Field> {
        Cow::Owned(FastState::total_u(self))
    }
    fn v_field(&self) -> &Field {
        &self.v
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("exponent p must be positive, got {p}")));
    }
    Ok(())
}

/// `∫ h(v)^{p−1} u_A^p/p + ∫ k(v)^{p−1} u_B^p/p`
pub fn entropy(state: &FastState, frc: &FastReactionConfig, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == 1.0 {
        return Err(Error::Parameter("the entropy is defined for p ≠ 1".into()));
    }
    let cells = state.u_a.values().iter().zip(state.u_b.values()).zip(state.v.values());
    let s: f64 = cells
        .map(|((&a, &b), &v)| {
            frc.h(v).powf(p - 1.0) * a.powf(p) / p + frc.k(v).powf(p - 1.0) * b.powf(p) / p
        })
        .sum();
    Ok(s * state.v.grid().cell_volume())
}

/// `‖(h u_A)^{p/2} − (k u_B)^{p/2}‖_{L²(Ω)}` at one instant.
pub fn relaxation_defect(state: &FastState, frc: &FastReactionConfig, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let cells = state.u_a.values().iter().zip(state.u_b.values()).zip(state.v.values());
    let s: f64 = cells
        .map(|((&a, &b), &v)| {
            let d = (frc.h(v) * a).powf(p / 2.0) - (frc.k(v) * b).powf(p / 2.0);
            d * d
        })
        .sum();
    Ok((s * state.v.grid().cell_volume()).sqrt())
}

/// `sign(p − 1) · (x − y)(x^{p−1} − y^{p−1})`, nonnegative for all `x, y ≥ 0`.
fn signed_dissipation(x: f64, y: f64, p: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    let prod = (x - y) * (x.powf(p - 1.0) - y.powf(p - 1.0));
    if p > 1.0 { prod } else { -prod }
}

/// Cellwise minimum and integral of the exchange dissipation
/// `[k u_B − h u_A][(k u_B)^{p−1} − (h u_A)^{p−1}]`, sign-flipped for `p < 1`
/// so both regimes are expected to be nonnegative.
pub fn exchange_dissipation_signcheck(
    state: &FastState,
    frc: &FastReactionConfig,
    p: f64,
) -> Result<(f64, f64)> {
    check_exponent(p)?;
    if p == 1.0 {
        return Err(Error::Parameter("dissipation sign check needs p ≠ 1".into()));
    }
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    let cells = state.u_a.values().iter().zip(state.u_b.values()).zip(state.v.values());
    for ((&a, &b), &v) in cells {
        let d = signed_dissipation(frc.k(v) * b, frc.h(v) * a, p);
        min = min.min(d);
        sum += d;
    }
    Ok((min, sum * state.v.grid().cell_volume()))
}

/// Largest `C` with `sign(p−1)(x−y)(x^{p−1}−y^{p−1}) ≥ C |x^{p/2} − y^{p/2}|²`
/// for all `x, y > 0`, estimated by a log-spaced scan of the ratio `x/y`.
pub fn dissipation_constant(p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == 1.0 {
        return Err(Error::Parameter("dissipation constant needs p ≠ 1".into()));
    }
    // the ratio tends to 4|p − 1|/p² as x/y → 1
    let mut c = 4.0 * (p - 1.0).abs() / (p * p);
    let n = 20_000;
    for i in 0..=n {
        let t = 10f64.powf(-10.0 + 20.0 * i as f64 / n as f64);
        let gap = t.powf(p / 2.0) - 1.0;
        if gap.abs() < 1e-6 {
            continue;
        }
        c = c.min(signed_dissipation(t, 1.0, p) / (gap * gap));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_u: f64,
    pub lp_u: BTreeMap<String, f64>,
    pub linf_v: f64,
    pub grad_v_l2: f64,
    pub entropy: BTreeMap<String, f64>,
    pub relaxation_defect: f64,
    pub exchange_dissipation: f64,
    pub duality_accum: f64,
}

pub fn exponent_key(p: f64) -> String {
    format!("{p}")
}

fn base_record(t: f64, u: &Field, v: &Field, p_list: &[f64]) -> Result<DiagnosticsRecord> {
    let mut lp_u = BTreeMap::new();
    for &p in p_list {
        lp_u.insert(exponent_key(p), lp_norm(u, p)?);
    }
    Ok(DiagnosticsRecord {
        t,
        mass_u: integrate(u),
        lp_u,
        linf_v: lp_norm(v, f64::INFINITY)?,
        grad_v_l2: gradient_l2(v),
        entropy: BTreeMap::new(),
        relaxation_defect: 0.0,
        exchange_dissipation: 0.0,
        duality_accum: 0.0,
    })
}

pub fn record_cross(state: &CrossDiffState, p_list: &[f64]) -> Result<DiagnosticsRecord> {
    base_record(state.t, &state.u, &state.v, p_list)
}

/// One record of a fast-reaction state. The defect and dissipation entries
/// use the first exponent of `p_list`.
pub fn record_fast(
    state: &FastState,
    frc: &FastReactionConfig,
    p_list: &[f64],
) -> Result<DiagnosticsRecord> {
    let mut rec = base_record(state.t, &state.total_u(), &state.v, p_list)?;
    for &p in p_list.iter().filter(|&&p| p != 1.0) {
        rec.entropy.insert(exponent_key(p), entropy(state, frc, p)?);
    }
    if let Some(&p) = p_list.iter().find(|&&p| p != 1.0) {
        rec.relaxation_defect = relaxation_defect(state, frc, p)?;
        rec.exchange_dissipation = exchange_dissipation_signcheck(state, frc, p)?.1;
    }
    Ok(rec)
}

/// Trapezoid accumulator for `∫₀ᵗ g(s) ds` on irregular sample times.
#[derive(Debug, Clone, Default)]
pub struct TimeIntegral {
    last: Option<(f64, f64)>,
    pub value: f64,
}

impl TimeIntegral {
    pub fn push(&mut self, t: f64, g: f64) {
        if let Some((t0, g0)) = self.last {
            self.value += 0.5 * (t - t0) * (g + g0);
        }
        self.last = Some((t, g));
    }
}

/// Observer that turns every `every`-th accepted state into a record, with the
/// running space-time norm `∫₀ᵗ ‖u‖²_{L²}` accumulated over all states.
pub struct DiagnosticsSink<'a> {
    pub records: Vec<DiagnosticsRecord>,
    p_list: Vec<f64>,
    frc: Option<&'a FastReactionConfig>,
    every: usize,
    duality: TimeIntegral,
}

impl<'a> DiagnosticsSink<'a> {
    pub fn new(p_list: Vec<f64>, frc: Option<&'a FastReactionConfig>, every: usize) -> Self {
        Self { records: Vec::new(), p_list, frc, every: every.max(1), duality: TimeIntegral::default() }
    }

    pub fn write_ndjson(&self, mut out: impl Write) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl Observer<CrossDiffState> for DiagnosticsSink<'_> {
    fn observe(&mut self, step: usize, state: &CrossDiffState) -> Result<()> {
        let l2 = lp_norm(&state.u, 2.0)?;
        self.duality.push(state.t, l2 * l2);
        if step % self.every == 0 {
            let mut rec = record_cross(state, &self.p_list)?;
            rec.duality_accum = self.duality.value;
            self.records.push(rec);
        }
        Ok(())
    }
}

impl Observer<FastState> for DiagnosticsSink<'_> {
    fn observe(&mut self, step: usize, state: &FastState) -> Result<()> {
        let frc = self
            .frc
            .ok_or_else(|| Error::Parameter("fast-reaction records need a rate configuration".into()))?;
        let l2 = lp_norm(&state.total_u(), 2.0)?;
        self.duality.push(state.t, l2 * l2);
        if step % self.every == 0 {
            let mut rec = record_fast(state, frc, &self.p_list)?;
            rec.duality_accum = self.duality.value;
            self.records.push(rec);
        }
        Ok(())
    }
}

/// `‖u‖_{L²([0,T]×Ω)}` by the trapezoid rule on the stored snapshots.
pub fn duality_accumulate<S: Populations>(history: &History<S>) -> Result<f64> {
    let mut acc = TimeIntegral::default();
    for s in &history.snapshots {
        let n = lp_norm(&s.total_u(), 2.0)?;
        acc.push(s.time(), n * n);
    }
    Ok(acc.value.sqrt())
}

/// Polynomials on `[0, L]` with vanishing derivative at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannPoly {
    One,
    /// `3s² − 2s³`
    Cubic,
    /// `16 s²(1 − s)²`
    Quartic,
}

impl NeumannPoly {
    pub fn eval(self, x: f64, len: f64) -> f64 {
        let s = x / len;
        match self {
            NeumannPoly::One => 1.0,
            NeumannPoly::Cubic => s * s * (3.0 - 2.0 * s),
            NeumannPoly::Quartic => 16.0 * s * s * (1.0 - s) * (1.0 - s),
        }
    }

    pub fn derivative(self, x: f64, len: f64) -> f64 {
        let s = x / len;
        match self {
            NeumannPoly::One => 0.0,
            NeumannPoly::Cubic => 6.0 * s * (1.0 - s) / len,
            NeumannPoly::Quartic => 32.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / len,
        }
    }
}

/// `ψ(t, x, y) = (1 − t/T)² P_x(x) P_y(y)` on `[0, T]`, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub px: NeumannPoly,
    pub py: NeumannPoly,
    pub horizon: f64,
    /// Multiplies the whole function; `0` gives `ψ ≡ 0`.
    pub scale: f64,
}

impl TestFunction {
    fn theta(&self, t: f64) -> f64 {
        if t >= self.horizon {
            0.0
        } else {
            let s = 1.0 - t / self.horizon;
            self.scale * s * s
        }
    }

    fn theta_dot(&self, t: f64) -> f64 {
        if t >= self.horizon {
            0.0
        } else {
            -2.0 * self.scale * (1.0 - t / self.horizon) / self.horizon
        }
    }

    fn space(&self, grid: &Grid, x: [f64; 2]) -> f64 {
        let py = if grid.dim() == 2 { self.py.eval(x[1], grid.length(1)) } else { 1.0 };
        self.px.eval(x[0], grid.length(0)) * py
    }

    fn space_grad(&self, grid: &Grid, x: [f64; 2], axis: usize) -> f64 {
        if axis == 0 {
            let py = if grid.dim() == 2 { self.py.eval(x[1], grid.length(1)) } else { 1.0 };
            self.px.derivative(x[0], grid.length(0)) * py
        } else {
            self.px.eval(x[0], grid.length(0)) * self.py.derivative(x[1], grid.length(1))
        }
    }
}

/// Products of `{1, cubic, quartic}` along each active axis.
pub fn default_test_set(grid: &Grid, horizon: f64) -> Vec<TestFunction> {
    use NeumannPoly::*;
    let polys = [One, Cubic, Quartic];
    let ys: &[NeumannPoly] = if grid.dim() == 2 { &polys } else { &[One] };
    polys
        .iter()
        .flat_map(|&px| ys.iter().map(move |&py| TestFunction { px, py, horizon, scale: 1.0 }))
        .collect()
}

struct WeakTerms {
    mass: f64,
    flux: f64,
    source: f64,
}

fn weak_terms(
    psi: &TestFunction,
    grid: &Grid,
    density: &[f64],
    flux_potential: &[f64],
    source: &[f64],
) -> WeakTerms {
    let vol = grid.cell_volume();
    let mut mass = 0.0;
    let mut src = 0.0;
    for c in 0..grid.cell_count() {
        let p = psi.space(grid, grid.center(c));
        mass += p * density[c];
        src += p * source[c];
    }
    let h = [grid.spacing(0), grid.spacing(1)];
    let mut flux = 0.0;
    for_each_face(grid, |l, r, axis| {
        let mut x = grid.center(l);
        x[axis] += 0.5 * h[axis];
        flux += psi.space_grad(grid, x, axis) * (flux_potential[r] - flux_potential[l]) / h[axis];
    });
    WeakTerms { mass: mass * vol, flux: flux * vol, source: src * vol }
}

/// Largest violation of the two weak-form identities over `test_set`, with
/// time integrals taken by the trapezoid rule on the stored snapshots.
pub fn weak_residual(
    history: &History<CrossDiffState>,
    params: &ModelParams,
    test_set: &[TestFunction],
) -> Result<f64> {
    if history.snapshots.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "weak residual needs at least 3 snapshots, history has {}",
            history.snapshots.len()
        )));
    }
    let t0 = history.snapshots[0].t;
    let t_last = history.last().t;
    let grid = history.grid;
    let mut worst: f64 = 0.0;
    for psi in test_set {
        if psi.horizon > t_last - t0 + 1e-12 {
            return Err(Error::InsufficientData(format!(
                "test function horizon {} exceeds the stored history ({})",
                psi.horizon,
                t_last - t0
            )));
        }
        let mut int_u = TimeIntegral::default();
        let mut int_v = TimeIntegral::default();
        let mut initial = (0.0, 0.0);
        for (n, s) in history.snapshots.iter().enumerate() {
            let t = s.t - t0;
            let (u, v) = (s.u.values(), s.v.values());
            let mu: Vec<f64> =
                u.iter().zip(v).map(|(&u, &v)| (params.d_u + params.phi.eval(v)) * u).collect();
            let dv: Vec<f64> = v.iter().map(|&v| params.d_v * v).collect();
            let ru: Vec<f64> = u.iter().zip(v).map(|(&u, &v)| u * params.growth_u(u, v)).collect();
            let rv: Vec<f64> = u.iter().zip(v).map(|(&u, &v)| v * params.growth_v(u, v)).collect();
            let wu = weak_terms(psi, &grid, u, &mu, &ru);
            let wv = weak_terms(psi, &grid, v, &dv, &rv);
            let (th, thd) = (psi.theta(t), psi.theta_dot(t));
            int_u.push(t, -thd * wu.mass + th * wu.flux - th * wu.source);
            int_v.push(t, -thd * wv.mass + th * wv.flux - th * wv.source);
            if n == 0 {
                initial = (th * wu.mass, th * wv.mass);
            }
        }
        worst = worst
            .max((int_u.value - initial.0).abs())
            .max((int_v.value - initial.1).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub t_grid: Vec<f64>,
    pub l2_diff_u: Vec<f64>,
    pub l2_diff_v: Vec<f64>,
    pub initial_gap: f64,
    pub fitted_growth_rate: f64,
}

impl StabilityReport {
    /// `sqrt(‖Δu‖² + ‖Δv‖²)` at each stored time.
    pub fn gap(&self) -> Vec<f64> {
        self.l2_diff_u.iter().zip(&self.l2_diff_v).map(|(a, b)| a.hypot(*b)).collect()
    }

    /// Largest `gap(t) / (initial_gap · e^{R t})` over the run, with
    /// `R = fitted rate + margin·|fitted rate|`; values ≤ 1 mean the
    /// exponential envelope holds.
    pub fn envelope_ratio(&self, margin: f64) -> f64 {
        let r = self.fitted_growth_rate + margin * self.fitted_growth_rate.abs();
        let t0 = self.t_grid.first().copied().unwrap_or(0.0);
        self.gap()
            .iter()
            .zip(&self.t_grid)
            .map(|(g, t)| {
                if *g == 0.0 { 0.0 } else { g / (self.initial_gap * (r * (t - t0)).exp()) }
            })
            .fold(0.0, f64::max)
    }
}

/// Half the least-squares slope of `ln(‖Δu‖² + ‖Δv‖²)` against `t`, over the
/// stored times where the gap is nonzero.
fn fitted_rate(times: &[f64], du: &[f64], dv: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(du.iter().zip(dv))
        .map(|(t, (a, b))| (*t, a * a + b * b))
        .filter(|(_, g2)| *g2 > 0.0)
        .map(|(t, g2)| (t, g2.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    if stt > 0.0 { 0.5 * stl / stt } else { 0.0 }
}

pub fn stability_compare(
    first: &History<CrossDiffState>,
    second: &History<CrossDiffState>,
) -> Result<StabilityReport> {
    if first.grid != second.grid {
        return Err(Error::Comparison("histories live on different grids".into()));
    }
    if first.snapshots.len() != second.snapshots.len()
        || first
            .snapshots
            .iter()
            .zip(&second.snapshots)
            .any(|(a, b)| (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0))
    {
        return Err(Error::Comparison("histories have different snapshot times".into()));
    }
    let mut t_grid = Vec::new();
    let mut du = Vec::new();
    let mut dv = Vec::new();
    for (a, b) in first.snapshots.iter().zip(&second.snapshots) {
        t_grid.push(a.t);
        du.push(lp_norm(&a.u.zip_map(&b.u, |x, y| x - y), 2.0)?);
        dv.push(lp_norm(&a.v.zip_map(&b.v, |x, y| x - y), 2.0)?);
    }
    let initial_gap = du[0] + dv[0];
    let fitted_growth_rate = fitted_rate(&t_grid, &du, &dv);
    Ok(StabilityReport { t_grid, l2_diff_u: du, l2_diff_v: dv, initial_gap, fitted_growth_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_fast_reaction, CrossFunction};

    fn params() -> ModelParams {
        ModelParams {
            d_u: 1.0,
            d_v: 1.0,
            r_u: 1.0,
            r_v: 1.0,
            r_a: 1.0,
            r_b: 1.0,
            r_c: 1.0,
            r_d: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            phi: CrossFunction::Linear { slope: 0.0 },
        }
    }

    /// `h ≡ k ≡ 1` requires `d_u = 2` and `φ ≡ 0` (then `φ_1 = 0`).
    fn unit_rates() -> FastReactionConfig {
        let mut p = params();
        p.d_u = 2.0;
        build_fast_reaction(&p, 1.0, 0.5).unwrap()
    }

    fn fast_state(g: Grid, a: f64, b: f64, v: f64) -> FastState {
        FastState::new(Field::constant(g, a), Field::constant(g, b), Field::constant(g, v)).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let frc = unit_rates();
        assert_eq!(frc.h(0.3), 1.0);
        assert_eq!(frc.k(0.3), 1.0);
        let g = Grid::new_1d(8, 1.0).unwrap();
        assert!((entropy(&fast_state(g, 1.0, 1.0, 0.5), &frc, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(entropy(&fast_state(g, 0.0, 0.0, 0.5), &frc, 0.5).unwrap(), 0.0);
        assert!(entropy(&fast_state(g, 1.0, 1.0, 0.5), &frc, 1.0).is_err());
    }

    #[test]
    fn defect_examples() {
        let frc = unit_rates();
        let g = Grid::new_1d(8, 2.0).unwrap();
        let d = relaxation_defect(&fast_state(g, 1.0, 0.0, 0.5), &frc, 2.0).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(relaxation_defect(&fast_state(g, 0.7, 0.7, 0.5), &frc, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn dissipation_examples() {
        assert_eq!(signed_dissipation(2.0, 2.0, 1.5), 0.0);
        assert_eq!(signed_dissipation(2.0, 1.0, 2.0), 1.0);
        assert!(signed_dissipation(0.0, 0.0, 0.5) == 0.0);
        assert_eq!(signed_dissipation(1.0, 0.0, 0.5), f64::INFINITY);
        assert!(signed_dissipation(3.0, 0.2, 0.3) > 0.0);
    }

    #[test]
    fn dissipation_constant_matches_quadratic_case() {
        // p = 2: (x − y)² ≥ C |x − y|² holds with C = 1 exactly
        assert!((dissipation_constant(2.0).unwrap() - 1.0).abs() < 1e-9);
        let c = dissipation_constant(0.5).unwrap();
        assert!(c > 0.0 && c <= 4.0 * 0.5 / 0.25);
    }

    #[test]
    fn zero_state_record() {
        let frc = unit_rates();
        let g = Grid::new_1d(10, 1.0).unwrap();
        let s = fast_state(g, 0.0, 0.0, 0.4);
        let r = record_fast(&s, &frc, &[2.0, 0.5]).unwrap();
        assert_eq!(r.mass_u, 0.0);
        assert!(r.lp_u.values().all(|&x| x == 0.0));
        assert!(r.entropy.values().all(|&x| x == 0.0));
        assert_eq!((r.relaxation_defect, r.exchange_dissipation, r.grad_v_l2), (0.0, 0.0, 0.0));
        assert_eq!(r.linf_v, 0.4);
        assert_eq!(r, record_fast(&s, &frc, &[2.0, 0.5]).unwrap());
    }

    #[test]
    fn records_report_total_mass() {
        let frc = unit_rates();
        let g = Grid::new_1d(10, 1.0).unwrap();
        let r = record_fast(&fast_state(g, 0.25, 0.5, 1.0), &frc, &[2.0]).unwrap();
        assert!((r.mass_u - 0.75).abs() < 1e-15);
        let c = CrossDiffState::new(Field::constant(g, 0.3), Field::constant(g, 1.0)).unwrap();
        assert!((record_cross(&c, &[2.0]).unwrap().mass_u - 0.3).abs() < 1e-15);
    }

    fn uniform_history(g: Grid, values: impl Fn(f64) -> f64, times: &[f64]) -> History<CrossDiffState> {
        History {
            grid: g,
            snapshots: times
                .iter()
                .map(|&t| CrossDiffState {
                    t,
                    u: Field::constant(g, values(t)),
                    v: Field::constant(g, 1.0),
                })
                .collect(),
        }
    }

    #[test]
    fn duality_examples() {
        let g = Grid::new_1d(5, 1.0).unwrap();
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let h = uniform_history(g, |_| 2.0, &times);
        assert!((duality_accumulate(&h).unwrap() - 2.0).abs() < 1e-12);
        let h = uniform_history(g, |t| t, &times);
        assert!((duality_accumulate(&h).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn weak_residual_needs_three_snapshots() {
        let g = Grid::new_1d(5, 1.0).unwrap();
        let h = uniform_history(g, |_| 1.0, &[0.0, 1.0]);
        assert!(matches!(
            weak_residual(&h, &params(), &default_test_set(&g, 1.0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn weak_residual_of_zero_test_function() {
        let g = Grid::new_1d(5, 1.0).unwrap();
        let h = uniform_history(g, |t| 1.0 + t, &[0.0, 0.5, 1.0]);
        let psi = TestFunction { scale: 0.0, ..default_test_set(&g, 1.0)[1] };
        assert_eq!(weak_residual(&h, &params(), &[psi]).unwrap(), 0.0);
    }

    #[test]
    fn neumann_polys_have_zero_end_slopes() {
        for p in [NeumannPoly::One, NeumannPoly::Cubic, NeumannPoly::Quartic] {
            assert_eq!(p.derivative(0.0, 2.0), 0.0);
            assert!(p.derivative(2.0, 2.0).abs() < 1e-15);
            let x = 0.7;
            let fd = (p.eval(x + 1e-6, 2.0) - p.eval(x - 1e-6, 2.0)) / 2e-6;
            assert!((fd - p.derivative(x, 2.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn identical_histories_compare_to_zero() {
        let g = Grid::new_1d(5, 1.0).unwrap();
        let h = uniform_history(g, |t| 1.0 + t, &[0.0, 0.5, 1.0]);
        let r = stability_compare(&h, &h).unwrap();
        assert!(r.l2_diff_u.iter().chain(&r.l2_diff_v).all(|&x| x == 0.0));
        assert_eq!(r.initial_gap, 0.0);
        let other = uniform_history(g, |t| t, &[0.0, 0.6, 1.0]);
        assert!(matches!(stability_compare(&h, &other), Err(Error::Comparison(_))));
    }
}
