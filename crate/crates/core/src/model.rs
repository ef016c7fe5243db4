//! Coefficients and nonlinearities of the cross-diffusion system and of its
//! three-species fast-reaction approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `w^e` for `w ≥ 0`, with `0^e = 0` so fractional exponents never see a zero base.
#[inline]
pub(crate) fn pw(w: f64, e: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else if e == 1.0 {
        w
    } else if e == 2.0 {
        w * w
    } else {
        w.powf(e)
    }
}

/// Density-dependent part of the diffusion rate of `u`, as a function of `v ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossFunction {
    Linear { slope: f64 },
    Power { coeff: f64, exponent: f64 },
    Tabulated(MonotoneCubic),
}

impl CrossFunction {
    pub fn linear(slope: f64) -> Result<Self> {
        let f = CrossFunction::Linear { slope };
        f.validate()?;
        Ok(f)
    }

    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        let f = CrossFunction::Power { coeff, exponent };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let f = CrossFunction::Tabulated(MonotoneCubic::new(points)?);
        f.validate()?;
        Ok(f)
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            CrossFunction::Linear { slope } => slope * v,
            CrossFunction::Power { coeff, exponent } => coeff * pw(v, *exponent),
            CrossFunction::Tabulated(t) => t.eval(v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            CrossFunction::Linear { slope } => *slope,
            CrossFunction::Power { coeff, exponent } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    coeff * exponent * pw(v, exponent - 1.0)
                }
            }
            CrossFunction::Tabulated(t) => t.derivative(v),
        }
    }

    /// Checks parameter sanity and `φ ≥ 0` on a sample grid.
    pub fn validate(&self) -> Result<()> {
        let upper = match self {
            CrossFunction::Linear { slope } => {
                if !(slope.is_finite() && *slope >= 0.0) {
                    return Err(Error::Model(format!("linear slope must be ≥ 0, got {slope}")));
                }
                10.0
            }
            CrossFunction::Power { coeff, exponent } => {
                if !(coeff.is_finite() && *coeff >= 0.0) {
                    return Err(Error::Model(format!("power coefficient must be ≥ 0, got {coeff}")));
                }
                // exponents in (0, 1) have an unbounded derivative at v = 0
                if !(exponent.is_finite() && (*exponent == 0.0 || *exponent >= 1.0)) {
                    return Err(Error::Model(format!(
                        "power exponent must be 0 or ≥ 1 for a C¹ cross function, got {exponent}"
                    )));
                }
                10.0
            }
            CrossFunction::Tabulated(t) => t.xs[t.xs.len() - 1],
        };
        self.check_nonnegative(0.0, upper, 1000)
    }

    pub(crate) fn check_nonnegative(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        for i in 0..=samples {
            let v = lo + (hi - lo) * i as f64 / samples as f64;
            let phi = self.eval(v);
            if !(phi >= 0.0) {
                return Err(Error::Model(format!("cross function is {phi} < 0 at v = {v}")));
            }
        }
        Ok(())
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes; linear
/// extension past the last node keeps it C¹.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Model("table needs at least two points".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::Model("table must start at v = 0".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Model("table contains non-finite entries".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Model("table abscissae must be strictly increasing".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                (secants[i - 1] + secants[i]) / 2.0
            };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let alpha = slopes[i] / secants[i];
            let beta = slopes[i + 1] / secants[i];
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * alpha * secants[i];
                slopes[i + 1] = tau * beta * secants[i];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    fn locate(&self, x: f64) -> usize {
        match self.xs.partition_point(|&p| p <= x) {
            0 => 0,
            i => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.ys[last] + self.slopes[last] * (x - self.xs[last]);
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.slopes[last];
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * self.ys[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[i]
            + (-6.0 * t2 + 6.0 * t) / h * self.ys[i + 1]
            + (3.0 * t2 - 2.0 * t) * self.slopes[i + 1]
    }
}

/// Which existence theorem's hypotheses the exponents satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    /// `d < a`
    Theorem1,
    /// `a ≤ d`, `a ≤ 1`, `d ≤ 2`
    Theorem2,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub d_u: f64,
    pub d_v: f64,
    pub r_u: f64,
    pub r_v: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub r_c: f64,
    pub r_d: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub phi: CrossFunction,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, val) in self.scalars() {
            if !(val.is_finite() && val > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {val}")));
            }
        }
        self.phi.validate()
    }

    pub fn scalars(&self) -> [(&'static str, f64); 12] {
        [
            ("d_u", self.d_u),
            ("d_v", self.d_v),
            ("r_u", self.r_u),
            ("r_v", self.r_v),
            ("r_a", self.r_a),
            ("r_b", self.r_b),
            ("r_c", self.r_c),
            ("r_d", self.r_d),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
        ]
    }

    pub fn regime(&self) -> Regime {
        if self.d < self.a {
            Regime::Theorem1
        } else if self.a <= self.d && self.a <= 1.0 && self.d <= 2.0 {
            Regime::Theorem2
        } else {
            Regime::Unsupported
        }
    }

    /// Positive zero of the logistic part of the v-reaction, `(r_v/r_c)^{1/c}`.
    pub fn v_carrying_capacity(&self) -> f64 {
        (self.r_v / self.r_c).powf(1.0 / self.c)
    }

    /// Net per-capita growth of u, `r_u − r_a u^a − r_b v^b`.
    #[inline]
    pub(crate) fn growth_u(&self, u: f64, v: f64) -> f64 {
        self.r_u - self.r_a * pw(u, self.a) - self.r_b * pw(v, self.b)
    }

    #[inline]
    pub(crate) fn growth_v(&self, u: f64, v: f64) -> f64 {
        self.r_v - self.r_c * pw(v, self.c) - self.r_d * pw(u, self.d)
    }

    /// Spatially uniform coexistence state `(u*, v*)` with both components
    /// positive, found by damped Newton iteration.
    pub fn coexistence_state(&self) -> Option<(f64, f64)> {
        let residual = |u: f64, v: f64| (self.growth_u(u, v), self.growth_v(u, v));
        let mut u = 0.5 * (self.r_u / self.r_a).powf(1.0 / self.a);
        let mut v = 0.5 * self.v_carrying_capacity();
        for _ in 0..200 {
            let (f, g) = residual(u, v);
            if f.abs().max(g.abs()) < 1e-15 * self.r_u.max(self.r_v) {
                return Some((u, v));
            }
            let fu = -self.r_a * self.a * pw(u, self.a - 1.0);
            let fv = -self.r_b * self.b * pw(v, self.b - 1.0);
            let gu = -self.r_d * self.d * pw(u, self.d - 1.0);
            let gv = -self.r_c * self.c * pw(v, self.c - 1.0);
            let det = fu * gv - fv * gu;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let du = (f * gv - fv * g) / det;
            let dv = (fu * g - f * gu) / det;
            let mut lambda = 1.0;
            while u - lambda * du <= 0.0 || v - lambda * dv <= 0.0 {
                lambda *= 0.5;
                if lambda < 1e-12 {
                    return None;
                }
            }
            u -= lambda * du;
            v -= lambda * dv;
        }
        let (f, g) = residual(u, v);
        (f.abs().max(g.abs()) < 1e-12).then_some((u, v))
    }
}

fn check_density(name: &str, w: f64) -> Result<()> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Data(format!("{name} must be finite and ≥ 0, got {w}")));
    }
    Ok(())
}

/// `u (r_u − r_a u^a − r_b v^b)`
pub fn reaction_u(u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    check_density("u", u)?;
    check_density("v", v)?;
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(u * params.growth_u(u, v))
}

/// `v (r_v − r_c v^c − r_d u^d)`
pub fn reaction_v(u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    check_density("u", u)?;
    check_density("v", v)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    Ok(v * params.growth_v(u, v))
}

/// Bounds on `v`: the stricter explicit constant `(r_v/(r_c(c+1)))^{1/c}`, and the carrying-capacity
/// bound that a comparison argument actually delivers.
pub fn v_bound_constants(params: &ModelParams, v_in_sup: f64) -> (f64, f64) {
    let strict = (params.r_v / (params.r_c * (params.c + 1.0))).powf(1.0 / params.c);
    (v_in_sup.max(strict), v_in_sup.max(params.v_carrying_capacity()))
}

/// Returns `(argmax, max)` of `w ↦ (r_u − r_a w^a) w` over `w ≥ 0`.
/// The maximum bounds the growth rate of the total mass.
pub fn mass_growth_constant(params: &ModelParams) -> (f64, f64) {
    let w_star = (params.r_u / ((1.0 + params.a) * params.r_a)).powf(1.0 / params.a);
    (w_star, w_star * params.r_u * params.a / (1.0 + params.a))
}

/// Quintic smoothstep cutoff: 1 on `[0, v1]`, 0 on `[2 v1, ∞)`, C² in between.
pub fn cutoff(v: f64, v1: f64) -> f64 {
    if v <= v1 {
        1.0
    } else if v >= 2.0 * v1 {
        0.0
    } else {
        let s = (v - v1) / v1;
        1.0 - s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

/// Rates of the fast-reaction system built so that its averaged diffusion
/// reproduces `d_u + φ_B(v)`, where `φ_B` is `φ` cut off above `2 v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FastReactionConfig {
    pub d_a: f64,
    pub d_b: f64,
    pub h0: f64,
    pub phi1: f64,
    pub v1: f64,
    pub epsilon: f64,
    pub(crate) d_u: f64,
    pub(crate) phi: CrossFunction,
}

const PHI1_SAMPLES: usize = 100_000;
const VALIDATION_SAMPLES: usize = 10_000;

impl FastReactionConfig {
    pub fn chi(&self, v: f64) -> f64 {
        cutoff(v, self.v1)
    }

    pub fn phi_b(&self, v: f64) -> f64 {
        let chi = self.chi(v);
        if chi == 0.0 {
            0.0
        } else {
            chi * self.phi.eval(v)
        }
    }

    /// Switching rate from the A state to the B state.
    pub fn h(&self, v: f64) -> f64 {
        self.d_u / 2.0 + self.phi_b(v)
    }

    /// Switching rate from the B state back to A.
    pub fn k(&self, v: f64) -> f64 {
        self.d_u / 2.0 + self.phi1 - self.phi_b(v)
    }

    pub fn d_u(&self) -> f64 {
        self.d_u
    }

    pub fn phi(&self) -> &CrossFunction {
        &self.phi
    }

    /// `|d_A + d_B h/(h+k) − (d_u + φ_B)|` at `v`.
    pub fn compatibility_residual(&self, v: f64) -> f64 {
        let (h, k) = (self.h(v), self.k(v));
        (self.d_a + self.d_b * h / (h + k) - (self.d_u + self.phi_b(v))).abs()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, ..self.clone() })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

pub fn build_fast_reaction(
    params: &ModelParams,
    v_in_sup: f64,
    epsilon: f64,
) -> Result<FastReactionConfig> {
    params.validate()?;
    check_epsilon(epsilon)?;
    check_density("v_in_sup", v_in_sup)?;

    let (v1, _) = v_bound_constants(params, v_in_sup);
    let phi = params.phi.clone();
    phi.check_nonnegative(0.0, 2.0 * v1, PHI1_SAMPLES)?;

    let phi_b = |v: f64| {
        let chi = cutoff(v, v1);
        if chi == 0.0 { 0.0 } else { chi * phi.eval(v) }
    };
    let step = 2.0 * v1 / PHI1_SAMPLES as f64;
    let (best_i, mut phi1) = (0..=PHI1_SAMPLES)
        .map(|i| (i, phi_b(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |m, x| if x.1 > m.1 { x } else { m });
    // golden-section refinement on the bracketing sample cell
    let (mut lo, mut hi) = (
        (best_i as f64 - 1.0).max(0.0) * step,
        ((best_i + 1) as f64 * step).min(2.0 * v1),
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 * v1 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if phi_b(m1) < phi_b(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    phi1 = phi1.max(phi_b(0.5 * (lo + hi)));

    let cfg = FastReactionConfig {
        d_a: params.d_u / 2.0,
        d_b: params.d_u + phi1,
        h0: params.d_u / 2.0,
        phi1,
        v1,
        epsilon,
        d_u: params.d_u,
        phi,
    };

    for i in 0..=VALIDATION_SAMPLES {
        let v = 2.0 * v1 * i as f64 / VALIDATION_SAMPLES as f64;
        let (h, k) = (cfg.h(v), cfg.k(v));
        if h < cfg.h0 || k < cfg.h0 {
            return Err(Error::Model(format!(
                "switching rates fall below {} at v = {v}: h = {h}, k = {k}",
                cfg.h0
            )));
        }
        let res = cfg.compatibility_residual(v);
        if res >= 1e-12 {
            return Err(Error::Model(format!(
                "diffusion compatibility residual {res:e} at v = {v}"
            )));
        }
    }
    Ok(cfg)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn skt_params(slope: f64) -> ModelParams {
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
            phi: CrossFunction::Linear { slope },
        }
    }

    #[test]
    fn reaction_examples() {
        let mut p = skt_params(0.0);
        assert_eq!(reaction_u(0.0, 3.0, &p).unwrap(), 0.0);
        assert_eq!(reaction_u(1.0, 0.0, &p).unwrap(), 0.0);
        p.a = 2.0;
        assert_eq!(reaction_u(2.0, 1.0, &p).unwrap(), -8.0);
        assert!(matches!(reaction_u(-1.0, 0.0, &p), Err(Error::Data(_))));

        let mut p = skt_params(0.0);
        assert_eq!(reaction_v(2.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(reaction_v(0.0, 1.0, &p).unwrap(), 0.0);
        p.r_d = 2.0;
        assert_eq!(reaction_v(1.0, 0.5, &p).unwrap(), -0.75);
        assert!(reaction_v(0.0, f64::NAN, &p).is_err());
    }

    #[test]
    fn fractional_exponents_at_zero() {
        let mut p = skt_params(0.0);
        p.a = 0.3;
        p.b = 0.5;
        assert_eq!(reaction_u(0.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(reaction_u(1.0, 0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn regimes() {
        let mut p = skt_params(1.0);
        assert_eq!(p.regime(), Regime::Theorem2);
        p.a = 2.0;
        assert_eq!(p.regime(), Regime::Theorem1);
        p.a = 0.5;
        p.d = 3.0;
        assert_eq!(p.regime(), Regime::Unsupported);
    }

    #[test]
    fn v_bounds() {
        let p = skt_params(0.0);
        assert_eq!(v_bound_constants(&p, 0.3), (0.5, 1.0));
        assert_eq!(v_bound_constants(&p, 10.0), (10.0, 10.0));
    }

    #[test]
    fn mass_constant_logistic() {
        let p = skt_params(0.0);
        let (kp, kt) = mass_growth_constant(&p);
        assert!((kp - 0.5).abs() < 1e-15);
        assert!((kt - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cutoff_shape() {
        let v1 = 1.3;
        assert_eq!(cutoff(v1, v1), 1.0);
        assert_eq!(cutoff(2.0 * v1, v1), 0.0);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let c = cutoff(i as f64 * 3.0 * v1 / 1000.0, v1);
            assert!(c <= prev && (0.0..=1.0).contains(&c));
            prev = c;
        }
    }

    #[test]
    fn cutoff_is_c2_at_junctions() {
        let v1 = 1.0;
        let d1 = |v: f64, h: f64| (cutoff(v + h, v1) - cutoff(v - h, v1)) / (2.0 * h);
        let d2 = |v: f64, h: f64| {
            (cutoff(v + h, v1) - 2.0 * cutoff(v, v1) + cutoff(v - h, v1)) / (h * h)
        };
        for h in [1e-3, 1e-4] {
            for v in [v1, 2.0 * v1] {
                assert!(d1(v, h).abs() < 10.0 * h * h, "first derivative jump at {v}");
                // one-sided second derivatives approach 0 from both sides
                assert!(d2(v + 2.0 * h, h).abs() < 150.0 * h);
                assert!(d2(v - 2.0 * h, h).abs() < 150.0 * h);
            }
        }
    }

    #[test]
    fn fast_config_linear_example() {
        let p = skt_params(2.0);
        // v_in_sup = 1 dominates (1/2)^1, so v1 = 1
        let frc = build_fast_reaction(&p, 1.0, 0.1).unwrap();
        assert_eq!(frc.v1, 1.0);
        assert!((frc.h(0.5) - 1.5).abs() < 1e-15);
        let (h, k) = (frc.h(0.5), frc.k(0.5));
        assert!((frc.d_a + frc.d_b * h / (h + k) - 2.0).abs() < 1e-14);
        assert!((2.0..=4.0).contains(&frc.phi1));
        assert_eq!(frc.d_a, 0.5);
        assert_eq!(frc.d_b, 1.0 + frc.phi1);
        for i in 0..=1000 {
            let v = 2.0 * i as f64 / 1000.0;
            assert!((frc.h(v) + frc.k(v) - frc.d_b).abs() < 1e-14);
        }
    }

    #[test]
    fn fast_config_rejects_bad_inputs() {
        let p = skt_params(1.0);
        assert!(build_fast_reaction(&p, 1.0, 0.0).is_err());
        assert!(build_fast_reaction(&p, 1.0, 1.0).is_err());
        assert!(build_fast_reaction(&p, -1.0, 0.5).is_err());
        let mut bad = p.clone();
        bad.phi = CrossFunction::Tabulated(
            MonotoneCubic::new(vec![(0.0, 0.1), (0.5, -0.2), (5.0, 1.0)]).unwrap(),
        );
        assert!(matches!(build_fast_reaction(&bad, 1.0, 0.5), Err(Error::Model(_))));
    }

    #[test]
    fn tabulated_is_c1_and_interpolates() {
        let pts = vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0), (2.0, 1.1), (3.0, 3.0)];
        let t = MonotoneCubic::new(pts.clone()).unwrap();
        for (x, y) in &pts {
            assert!((t.eval(*x) - y).abs() < 1e-15);
        }
        // derivative continuity across nodes and agreement with finite differences
        for (x, _) in &pts[1..] {
            let h = 1e-7;
            assert!((t.derivative(x - h) - t.derivative(x + h)).abs() < 1e-5);
            let fd = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
            assert!((fd - t.derivative(*x)).abs() < 1e-5);
        }
        // monotone data gives a monotone interpolant
        let mut prev = t.eval(0.0);
        for i in 1..=3000 {
            let y = t.eval(i as f64 * 1e-3);
            assert!(y >= prev - 1e-15);
            prev = y;
        }
    }

    #[test]
    fn power_cross_function_validation() {
        assert!(CrossFunction::power(1.0, 0.5).is_err());
        assert!(CrossFunction::power(-1.0, 2.0).is_err());
        let f = CrossFunction::power(0.5, 2.0).unwrap();
        assert_eq!(f.eval(2.0), 2.0);
        assert_eq!(f.derivative(2.0), 2.0);
    }

    #[test]
    fn coexistence_newton() {
        let mut p = skt_params(0.0);
        p.r_b = 0.5;
        p.r_d = 0.5;
        let (u, v) = p.coexistence_state().unwrap();
        assert!((u - 2.0 / 3.0).abs() < 1e-14 && (v - 2.0 / 3.0).abs() < 1e-14);
    }
}
