//! Direct solver for the triangular cross-diffusion system
//!
//! ```text
//! ∂_t u = Δ((d_u + φ(v)) u) + u (r_u − r_a u^a − r_b v^b)
//! ∂_t v = d_v Δv            + v (r_v − r_c v^c − r_d u^d)
//! ```
//!
//! with zero-flux boundaries. Each step updates `v` first, then `u` with the
//! new `v` frozen inside the diffusivity; both sub-steps are linear-implicit.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::ModelParams;
use crate::solver::{
    implicit_product_update, implicit_v_update, History, Observer, SolverConfig, TimeState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossDiffState {
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

impl TimeState for CrossDiffState {
    fn time(&self) -> f64 {
        self.t
    }
}

impl CrossDiffState {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        let s = Self { t: 0.0, u, v };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.grid() != self.v.grid() {
            return Err(Error::Data("u and v live on different grids".into()));
        }
        self.u.check_nonnegative("u")?;
        self.v.check_nonnegative("v")
    }
}

pub fn step_cross(
    state: &CrossDiffState,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<CrossDiffState> {
    let t_new = state.t + cfg.dt;
    advance(state, params, cfg, t_new)
}

fn advance(
    state: &CrossDiffState,
    params: &ModelParams,
    cfg: &SolverConfig,
    t_new: f64,
) -> Result<CrossDiffState> {
    let grid = *state.u.grid();
    let wrap = |e: Error| Error::Step { t: state.t, source: Box::new(e) };
    let v_new = implicit_v_update(&state.v, state.u.values(), params, cfg, t_new).map_err(wrap)?;
    let diffusivity: Vec<f64> = v_new.iter().map(|&v| params.d_u + params.phi.eval(v)).collect();
    let u_new = implicit_product_update(
        state.u.values(),
        state.u.values(),
        &v_new,
        &diffusivity,
        params,
        cfg,
        &grid,
        "u",
        t_new,
    )
    .map_err(wrap)?;
    Ok(CrossDiffState {
        t: t_new,
        u: Field::from_vec_unchecked(grid, u_new),
        v: Field::from_vec_unchecked(grid, v_new),
    })
}

/// Integrates to `cfg.t_end`, storing every `snapshot_every`-th state (plus
/// the final one) and showing every accepted state to `observer`.
pub fn run_cross(
    init: &CrossDiffState,
    params: &ModelParams,
    cfg: &SolverConfig,
    snapshot_every: usize,
    observer: &mut impl Observer<CrossDiffState>,
) -> Result<History<CrossDiffState>> {
    params.validate()?;
    cfg.validate()?;
    init.validate()?;
    let every = snapshot_every.max(1);
    let steps = cfg.steps();
    let mut history = History { grid: *init.u.grid(), snapshots: vec![init.clone()] };
    observer.observe(0, init)?;
    let mut state = init.clone();
    for n in 1..=steps {
        state = advance(&state, params, cfg, init.t + n as f64 * cfg.dt)?;
        observer.observe(n, &state)?;
        if n.is_multiple_of(every) || n == steps {
            history.snapshots.push(state.clone());
        }
    }
    Ok(history)
}
