//! Time-stepping plumbing shared by the direct and fast-reaction solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linsolve::{pcg, ShiftedLaplacian};
use crate::model::{pw, ModelParams};

/// Values in `[-POSITIVITY_SLACK, 0)` are treated as roundoff and clipped to zero.
pub const POSITIVITY_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub linear_tol: f64,
    pub max_linear_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 2e-4, t_end: 1.0, linear_tol: 1e-10, max_linear_iters: 10_000 }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be ≥ 0, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::Parameter(format!(
                "dt = {} exceeds the horizon t_end = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.linear_tol > 0.0) {
            return Err(Error::Parameter(format!(
                "linear_tol must be positive, got {}",
                self.linear_tol
            )));
        }
        if self.max_linear_iters == 0 {
            return Err(Error::Parameter("max_linear_iters must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Number of fixed steps to reach `t_end`; the last step lands on `steps · dt`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Same horizon with `dt` divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self { dt: self.dt / factor as f64, ..*self }
    }
}

/// Stored snapshots of a run, always including the initial and final states.
#[derive(Debug, Clone, PartialEq)]
pub struct History<S> {
    pub grid: Grid,
    pub snapshots: Vec<S>,
}

pub trait TimeState {
    fn time(&self) -> f64;
}

impl<S: TimeState> History<S> {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(TimeState::time).collect()
    }

    pub fn last(&self) -> &S {
        self.snapshots.last().expect("history always holds the initial state")
    }
}

/// Receives every accepted state of a run, including the initial one.
pub trait Observer<S> {
    fn observe(&mut self, step: usize, state: &S) -> Result<()>;
}

impl<S, F: FnMut(usize, &S) -> Result<()>> Observer<S> for F {
    fn observe(&mut self, step: usize, state: &S) -> Result<()> {
        self(step, state)
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl<S> Observer<S> for NoObserver {
    fn observe(&mut self, _: usize, _: &S) -> Result<()> {
        Ok(())
    }
}

pub(crate) fn enforce_positivity(values: &mut [f64], field: &'static str, t: f64) -> Result<()> {
    for (cell, v) in values.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v >= -POSITIVITY_SLACK {
                *v = 0.0;
            } else {
                return Err(Error::Positivity { t, field, cell, value: *v });
            }
        } else if !v.is_finite() {
            return Err(Error::Data(format!("{field} became non-finite in cell {cell} at t = {t}")));
        }
    }
    Ok(())
}

fn check_diagonal(diag: &[f64], field: &str, dt: f64) -> Result<()> {
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Parameter(format!(
            "dt = {dt} is too large for the linear-implicit {field} reaction (diagonal {} in cell {i})",
            diag[i]
        )));
    }
    Ok(())
}

/// One linear-implicit step of `∂_t v = d_v Δv + v (r_v − r_c v^c − r_d u^d)`:
/// growth and losses act on the new `v`, with the loss coefficients lagged.
pub(crate) fn implicit_v_update(
    v: &Field,
    u_total: &[f64],
    params: &ModelParams,
    cfg: &SolverConfig,
    t: f64,
) -> Result<Vec<f64>> {
    let dt = cfg.dt;
    let diag: Vec<f64> = v
        .values()
        .iter()
        .zip(u_total)
        .map(|(&vn, &un)| {
            1.0 + dt * (-params.r_v + params.r_c * pw(vn, params.c) + params.r_d * pw(un, params.d))
        })
        .collect();
    check_diagonal(&diag, "v", dt)?;
    let op = ShiftedLaplacian::new(v.grid(), diag, dt * params.d_v);
    let mut x = v.values().to_vec();
    let stats = pcg(&op, v.values(), &mut x, cfg.linear_tol, cfg.max_linear_iters)?;
    log::trace!("v solve: {} iterations, residual {:e}", stats.iterations, stats.residual);
    enforce_positivity(&mut x, "v", t)?;
    Ok(x)
}

/// One linear-implicit step of `∂_t w = Δ(D w) + w (r_u − r_a s^a − r_b v^b)`
/// where `s` is the lagged total density and `D > 0` a cellwise diffusivity.
///
/// Solved for `D w`, which turns the product diffusion into a symmetric
/// M-matrix system.
pub(crate) fn implicit_product_update(
    w: &[f64],
    s: &[f64],
    v_new: &[f64],
    diffusivity: &[f64],
    params: &ModelParams,
    cfg: &SolverConfig,
    grid: &Grid,
    field: &'static str,
    t: f64,
) -> Result<Vec<f64>> {
    let dt = cfg.dt;
    let mut raw = Vec::with_capacity(w.len());
    let mut diag = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let q = -params.r_u + params.r_a * pw(s[i], params.a) + params.r_b * pw(v_new[i], params.b);
        raw.push(1.0 + dt * q);
        diag.push((1.0 + dt * q) / diffusivity[i]);
    }
    check_diagonal(&raw, field, dt)?;
    let op = ShiftedLaplacian::new(grid, diag, dt);
    let mut x: Vec<f64> = w.iter().zip(diffusivity).map(|(a, m)| a * m).collect();
    let stats = pcg(&op, w, &mut x, cfg.linear_tol, cfg.max_linear_iters)?;
    log::trace!("{field} solve: {} iterations, residual {:e}", stats.iterations, stats.residual);
    for (xi, m) in x.iter_mut().zip(diffusivity) {
        *xi /= m;
    }
    enforce_positivity(&mut x, field, t)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.1, 1.0).validate().is_ok());
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(2.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(0.1, 0.0).validate().is_ok());
        let mut c = SolverConfig::new(0.1, 1.0);
        c.linear_tol = 0.0;
        assert!(c.validate().is_err());
        assert_eq!(SolverConfig::new(2e-4, 1.0).steps(), 5000);
    }

    #[test]
    fn positivity_clipping() {
        let mut v = vec![1.0, -1e-14, 0.0];
        enforce_positivity(&mut v, "u", 0.0).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
        let mut v = vec![1.0, -1e-6];
        assert!(matches!(
            enforce_positivity(&mut v, "u", 0.5),
            Err(Error::Positivity { cell: 1, .. })
        ));
    }
}
