//! Three-species fast-reaction approximation
//!
//! ```text
//! ∂_t u_A = d_A Δu_A         + R u_A + (k(v) u_B − h(v) u_A)/ε
//! ∂_t u_B = (d_A + d_B) Δu_B + R u_B − (k(v) u_B − h(v) u_A)/ε
//! ∂_t v   = d_v Δv           + v (r_v − r_c v^c − r_d (u_A + u_B)^d)
//! ```
//!
//! with `R = r_u − r_a (u_A + u_B)^a − r_b v^b`. Steps are Strang-split: the
//! stiff exchange is integrated exactly over half steps on either side of a
//! linear-implicit diffusion-reaction step.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{FastReactionConfig, ModelParams};
use crate::solver::{
    implicit_product_update, implicit_v_update, History, Observer, SolverConfig, TimeState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FastState {
    pub t: f64,
    pub u_a: Field,
    pub u_b: Field,
    pub v: Field,
}

impl TimeState for FastState {
    fn time(&self) -> f64 {
        self.t
    }
}

impl FastState {
    pub fn new(u_a: Field, u_b: Field, v: Field) -> Result<Self> {
        let s = Self { t: 0.0, u_a, u_b, v };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_a.grid() != self.v.grid() || self.u_b.grid() != self.v.grid() {
            return Err(Error::Data("fast-reaction fields live on different grids".into()));
        }
        self.u_a.check_nonnegative("u_a")?;
        self.u_b.check_nonnegative("u_b")?;
        self.v.check_nonnegative("v")
    }

    /// `u_A + u_B`
    pub fn total_u(&self) -> Field {
        self.u_a.zip_map(&self.u_b, |a, b| a + b)
    }
}

/// Exact flow of `u_A' = (k u_B − h u_A)/ε`, `u_B' = −u_A'` over `dt`.
pub fn exchange_exact(u_a: f64, u_b: f64, h: f64, k: f64, epsilon: f64, dt: f64) -> (f64, f64) {
    debug_assert!(h >= 0.0 && k >= 0.0 && h + k > 0.0);
    debug_assert!(epsilon > 0.0 && dt >= 0.0);
    let s = u_a + u_b;
    let eq = k * s / (h + k);
    let rate = (h + k) * dt / epsilon;
    if rate > 700.0 {
        return (eq, s - eq);
    }
    // written with expm1 so that dt = 0 returns u_a bit for bit
    let a = u_a + (eq - u_a) * -(-rate).exp_m1();
    (a, (s - a).max(0.0))
}

fn exchange_field(
    u_a: &[f64],
    u_b: &[f64],
    v: &[f64],
    frc: &FastReactionConfig,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    u_a.iter()
        .zip(u_b)
        .zip(v)
        .map(|((&a, &b), &vv)| exchange_exact(a, b, frc.h(vv), frc.k(vv), frc.epsilon, dt))
        .unzip()
}

pub fn step_fast(
    state: &FastState,
    params: &ModelParams,
    frc: &FastReactionConfig,
    cfg: &SolverConfig,
) -> Result<FastState> {
    advance(state, params, frc, cfg, state.t + cfg.dt)
}

fn advance(
    state: &FastState,
    params: &ModelParams,
    frc: &FastReactionConfig,
    cfg: &SolverConfig,
    t_new: f64,
) -> Result<FastState> {
    let grid = *state.v.grid();
    let half = 0.5 * cfg.dt;
    let wrap = |e: Error| Error::Step { t: state.t, source: Box::new(e) };

    let (a, b) = exchange_field(
        state.u_a.values(),
        state.u_b.values(),
        state.v.values(),
        frc,
        half,
    );
    let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let v_new = implicit_v_update(&state.v, &s, params, cfg, t_new).map_err(wrap)?;
    let n = grid.cell_count();
    let a_new = implicit_product_update(
        &a, &s, &v_new, &vec![frc.d_a; n], params, cfg, &grid, "u_a", t_new,
    )
    .map_err(wrap)?;
    let b_new = implicit_product_update(
        &b, &s, &v_new, &vec![frc.d_a + frc.d_b; n], params, cfg, &grid, "u_b", t_new,
    )
    .map_err(wrap)?;
    let (a, b) = exchange_field(&a_new, &b_new, &v_new, frc, half);
    Ok(FastState {
        t: t_new,
        u_a: Field::from_vec_unchecked(grid, a),
        u_b: Field::from_vec_unchecked(grid, b),
        v: Field::from_vec_unchecked(grid, v_new),
    })
}

pub fn run_fast(
    init: &FastState,
    params: &ModelParams,
    frc: &FastReactionConfig,
    cfg: &SolverConfig,
    snapshot_every: usize,
    observer: &mut impl Observer<FastState>,
) -> Result<History<FastState>> {
    params.validate()?;
    cfg.validate()?;
    init.validate()?;
    let every = snapshot_every.max(1);
    let steps = cfg.steps();
    let mut history = History { grid: *init.v.grid(), snapshots: vec![init.clone()] };
    observer.observe(0, init)?;
    let mut state = init.clone();
    for n in 1..=steps {
        state = advance(&state, params, frc, cfg, init.t + n as f64 * cfg.dt)?;
        observer.observe(n, &state)?;
        if n.is_multiple_of(every) || n == steps {
            history.snapshots.push(state.clone());
        }
    }
    Ok(history)
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Normalized polynomial bump `(1 − (r/ε)²)²` sampled on cell offsets, or
/// `None` when the radius does not reach a neighbouring cell.
pub fn mollifier_weights(grid: &Grid, epsilon: f64) -> Option<Vec<((isize, isize), f64)>> {
    let hx = grid.spacing(0);
    let hy = if grid.dim() == 2 { grid.spacing(1) } else { f64::INFINITY };
    if epsilon <= hx.min(hy) {
        return None;
    }
    let rx = (epsilon / hx).floor() as isize;
    let ry = if grid.dim() == 2 { (epsilon / hy).floor() as isize } else { 0 };
    let mut w = Vec::new();
    for jx in -rx..=rx {
        for jy in -ry..=ry {
            let dx = jx as f64 * hx;
            let dy = if grid.dim() == 2 { jy as f64 * hy } else { 0.0 };
            let q = (dx * dx + dy * dy) / (epsilon * epsilon);
            if q < 1.0 {
                w.push(((jx, jy), (1.0 - q) * (1.0 - q)));
            }
        }
    }
    let total: f64 = w.iter().map(|(_, x)| x).sum();
    w.iter_mut().for_each(|(_, x)| *x /= total);
    Some(w)
}

/// Boundary cutoff: 0 within `ε` of the boundary, 1 beyond `2ε`.
pub fn boundary_cutoff(distance: f64, epsilon: f64) -> f64 {
    smoothstep((distance - epsilon) / epsilon)
}

/// `χ^ε · (u ∗ ρ^ε) + ε`, with `u` extended by zero outside the domain.
pub fn mollify_initial(u_in: &Field, epsilon: f64) -> Result<Field> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    u_in.check_nonnegative("u_in")?;
    let grid = *u_in.grid();
    let Some(weights) = mollifier_weights(&grid, epsilon) else {
        warn!("mollifier radius {epsilon} is below one cell; using identity plus epsilon");
        return Ok(u_in.map(|x| x + epsilon));
    };
    let (nx, ny) = (grid.n(0) as isize, grid.n(1) as isize);
    let u = u_in.values();
    let out = (0..grid.cell_count())
        .map(|c| {
            let (ix, iy) = grid.coords(c);
            let conv: f64 = weights
                .iter()
                .filter_map(|&((jx, jy), w)| {
                    let (x, y) = (ix as isize + jx, iy as isize + jy);
                    (x >= 0 && x < nx && y >= 0 && y < ny)
                        .then(|| w * u[grid.index(x as usize, y as usize)])
                })
                .sum();
            boundary_cutoff(grid.boundary_distance(c), epsilon) * conv + epsilon
        })
        .collect();
    Ok(Field::from_vec_unchecked(grid, out))
}

/// Splits `u_in` at exchange equilibrium with respect to `v_in`.
pub fn partition_initial(
    u_in: &Field,
    v_in: &Field,
    frc: &FastReactionConfig,
) -> Result<(Field, Field)> {
    if u_in.grid() != v_in.grid() {
        return Err(Error::Data("u_in and v_in live on different grids".into()));
    }
    u_in.check_nonnegative("u_in")?;
    v_in.check_nonnegative("v_in")?;
    let u_a = u_in.zip_map(v_in, |u, v| {
        let (h, k) = (frc.h(v), frc.k(v));
        k / (h + k) * u
    });
    let u_b = u_in.zip_map(&u_a, |u, a| u - a);
    Ok((u_a, u_b))
}

/// Regularized fast-reaction initial state: partition, mollify each part,
/// and shift `v` by `ε`.
pub fn initial_fast_state(
    u_in: &Field,
    v_in: &Field,
    frc: &FastReactionConfig,
) -> Result<FastState> {
    let (a, b) = partition_initial(u_in, v_in, frc)?;
    let eps = frc.epsilon;
    FastState::new(mollify_initial(&a, eps)?, mollify_initial(&b, eps)?, v_in.map(|v| v + eps))
}

/// Density-weighted diffusivity `(d_A u_A + (d_A + d_B) u_B)/(u_A + u_B)`;
/// `d_A` where both densities vanish.
pub fn effective_m(state: &FastState, frc: &FastReactionConfig) -> Field {
    state.u_a.zip_map(&state.u_b, |a, b| {
        if a + b > 0.0 {
            (frc.d_a * a + (frc.d_a + frc.d_b) * b) / (a + b)
        } else {
            frc.d_a
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use crate::model::{build_fast_reaction, CrossFunction};
    use crate::solver::NoObserver;
    use crate::xdiff::{run_cross, CrossDiffState};

    fn params() -> ModelParams {
        ModelParams {
            d_u: 0.1,
            d_v: 0.1,
            r_u: 1.0,
            r_v: 1.0,
            r_a: 1.0,
            r_b: 0.5,
            r_c: 1.0,
            r_d: 0.5,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            phi: CrossFunction::Linear { slope: 0.5 },
        }
    }

    #[test]
    fn exchange_closed_form() {
        let (a, b) = exchange_exact(1.0, 0.0, 1.0, 1.0, 0.1, 0.1);
        let expect = 0.5 + 0.5 * (-2.0f64).exp();
        assert!((a - expect).abs() < 1e-15);
        assert!((b - (1.0 - expect)).abs() < 1e-15);
        let (a, b) = exchange_exact(0.3, 0.9, 2.0, 1.0, 1e-6, 1.0);
        assert!((a - 0.4).abs() < 1e-15 && (b - 0.8).abs() < 1e-15);
        let (a, b) = exchange_exact(0.7, 0.2, 1.0, 3.0, 0.5, 0.0);
        assert_eq!(a, 0.7);
        assert!((b - 0.2).abs() < 1e-16);
    }

    #[test]
    fn mollifier_is_normalized() {
        for g in [Grid::new_1d(100, 1.0).unwrap(), Grid::new_2d(40, 30, 1.0, 0.8).unwrap()] {
            let w = mollifier_weights(&g, 0.1).unwrap();
            let s: f64 = w.iter().map(|(_, x)| x).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|(_, x)| *x > 0.0));
        }
        assert!(mollifier_weights(&Grid::new_1d(10, 1.0).unwrap(), 0.05).is_none());
    }

    #[test]
    fn mollified_constant_in_the_interior() {
        let g = Grid::new_1d(200, 1.0).unwrap();
        let eps = 0.05;
        let out = mollify_initial(&Field::constant(g, 2.0), eps).unwrap();
        for c in 0..g.cell_count() {
            if g.boundary_distance(c) > 3.0 * eps {
                assert!((out.values()[c] - 2.0 - eps).abs() < 1e-12);
            }
            if g.boundary_distance(c) < eps {
                assert_eq!(out.values()[c], eps);
            }
        }
        assert!(out.min() >= eps);
    }

    #[test]
    fn mollifier_falls_back_below_one_cell() {
        let g = Grid::new_1d(20, 1.0).unwrap();
        let u = g.sample(|x| x[0]).unwrap();
        let out = mollify_initial(&u, 0.01).unwrap();
        for (o, i) in out.values().iter().zip(u.values()) {
            assert_eq!(*o, i + 0.01);
        }
    }

    #[test]
    fn partition_identities() {
        let p = params();
        let g = Grid::new_1d(64, 1.0).unwrap();
        let frc = build_fast_reaction(&p, 2.0, 0.1).unwrap();
        let u = g.sample(|x| 1.0 + (7.0 * x[0]).sin().abs()).unwrap();
        let v = g.sample(|x| 3.0 * x[0]).unwrap();
        let (a, b) = partition_initial(&u, &v, &frc).unwrap();
        for i in 0..g.cell_count() {
            let (ai, bi, ui, vi) = (a.values()[i], b.values()[i], u.values()[i], v.values()[i]);
            assert!((ai + bi - ui).abs() <= f64::EPSILON * ui);
            let (h, k) = (frc.h(vi), frc.k(vi));
            assert!((h * ai - k * bi).abs() <= 4.0 * f64::EPSILON * k * ui);
        }
    }

    #[test]
    fn effective_diffusivity_bounds() {
        let p = params();
        let frc = build_fast_reaction(&p, 1.5, 0.1).unwrap();
        let g = Grid::new_1d(4, 1.0).unwrap();
        let s = FastState::new(
            Field::new(g, vec![1.0, 0.0, 2.0, 0.0]).unwrap(),
            Field::new(g, vec![0.0, 1.0, 2.0, 0.0]).unwrap(),
            Field::constant(g, 1.0),
        )
        .unwrap();
        let m = effective_m(&s, &frc);
        assert_eq!(m.values()[0], frc.d_a);
        assert_eq!(m.values()[1], frc.d_a + frc.d_b);
        assert!((m.values()[2] - (frc.d_a + frc.d_b / 2.0)).abs() < 1e-15);
        assert_eq!(m.values()[3], frc.d_a);
    }

    #[test]
    fn exchange_conserves_integral_of_total() {
        let p = params();
        let frc = build_fast_reaction(&p, 1.5, 0.01).unwrap();
        let g = Grid::new_1d(50, 1.0).unwrap();
        let a = g.sample(|x| 1.0 + x[0]).unwrap();
        let b = g.sample(|x| 2.0 - x[0] * x[0]).unwrap();
        let v = g.sample(|x| 1.5 * x[0]).unwrap();
        let (a2, b2) = exchange_field(a.values(), b.values(), v.values(), &frc, 0.3);
        let before = integrate(&a) + integrate(&b);
        let after: f64 = a2.iter().chain(&b2).sum::<f64>() * g.cell_volume();
        assert!((before - after).abs() < 1e-14);
    }

    #[test]
    fn idle_b_state_reduces_to_single_species() {
        let mut p = params();
        p.phi = CrossFunction::Linear { slope: 0.0 };
        p.d_u = 0.3;
        // h ≡ 0 with u_B ≡ 0: the exchange never fires
        let frc = FastReactionConfig {
            d_a: 0.3,
            d_b: 1.0,
            h0: 0.0,
            phi1: 1.0,
            v1: 1.0,
            epsilon: 0.5,
            d_u: 0.0,
            phi: CrossFunction::Linear { slope: 0.0 },
        };
        let g = Grid::new_1d(40, 1.0).unwrap();
        let u = g.sample(|x| 1.0 + 0.5 * (6.0 * x[0]).cos()).unwrap();
        let v = g.sample(|x| 0.8 + 0.1 * x[0]).unwrap();
        let cfg = SolverConfig { linear_tol: 1e-14, ..SolverConfig::new(1e-3, 0.05) };
        let fs = FastState::new(u.clone(), Field::zeros(g), v.clone()).unwrap();
        let hf = run_fast(&fs, &p, &frc, &cfg, 50, &mut NoObserver).unwrap();
        let hc = run_cross(&CrossDiffState::new(u, v).unwrap(), &p, &cfg, 50, &mut NoObserver)
            .unwrap();
        let (f, c) = (hf.last(), hc.last());
        assert!(f.u_b.values().iter().all(|&x| x == 0.0));
        for (x, y) in f.u_a.values().iter().zip(c.u.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
