//! Closed-form oracles for Gaussian data: evolution under the flow
//! `∂_t u = (A+iB) Δu`, quadratic-exponentially weighted norms, and the
//! extremal pairs of the Gaussian decay threshold. These are the ground
//! truth the grid-based modules are tested against.
//!
//! A state `u(x) = amplitude · e^{-c x^2}` with `Re c > 0` stays Gaussian
//! under the flow: with `z = A + iB`,
//!
//! ```text
//! c(t)   = c / (1 + 4 z c t),
//! amp(t) = amp · (1 + 4 z c t)^{-1/2},
//! ```
//!
//! where the square root follows the continuous branch along the trajectory.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};

/// Gaussian profile `amplitude · e^{-c x^2}` with `Re c > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub c: Complex64,
    pub amplitude: Complex64,
}

impl GaussianState {
    pub fn new(c: Complex64, amplitude: Complex64) -> Result<Self> {
        if !(c.re > 0.0 && c.is_finite() && amplitude.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "analytic.c must have positive real part, got {c}"
            )));
        }
        Ok(Self { c, amplitude })
    }

    /// Unit-amplitude real Gaussian `e^{-c x^2}`.
    pub fn real(c: f64) -> Result<Self> {
        Self::new(Complex64::new(c, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Samples the state on a grid.
    pub fn sample(&self, grid: Grid) -> Result<ComplexField> {
        ComplexField::from_fn(grid, |x| self.amplitude * (-self.c * x * x).exp())
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.amplitude * (-self.c * x * x).exp()
    }
}

/// Continuous-branch square root of `w(s) = 1 + 4 z c s t` along `s ∈ [0,1]`,
/// returned as `w(1)^{-1/2}`. The path is subdivided until each step turns
/// the argument by less than pi/2, then the winding is accumulated.
fn tracked_inverse_sqrt(z: Complex64, c: Complex64, t: f64) -> Complex64 {
    let w_at = |s: f64| Complex64::new(1.0, 0.0) + 4.0 * z * c * (s * t);
    let mut steps = 8usize;
    loop {
        let mut total_arg = 0.0;
        let mut prev = w_at(0.0);
        let mut ok = true;
        for i in 1..=steps {
            let cur = w_at(i as f64 / steps as f64);
            let delta = (cur / prev).arg();
            if delta.abs() > std::f64::consts::FRAC_PI_2 || cur.norm() == 0.0 {
                ok = false;
                break;
            }
            total_arg += delta;
            prev = cur;
        }
        if ok {
            let modulus = w_at(1.0).norm();
            return Complex64::from_polar(modulus.powf(-0.5), -0.5 * total_arg);
        }
        steps *= 2;
        if steps > 1 << 20 {
            // Path passes through (or hugs) the origin; fall back to principal.
            return w_at(1.0).powf(-0.5);
        }
    }
}

/// Evolves a Gaussian state by time `t` under `∂_t u = (A+iB) Δu`.
pub fn evolve_gaussian(state: &GaussianState, a: f64, b: f64, t: f64) -> Result<GaussianState> {
    if a < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "analytic.A must be nonnegative, got {a}"
        )));
    }
    if a > 0.0 && t < 0.0 {
        return Err(Error::BackwardDissipative { a, t });
    }
    let z = Complex64::new(a, b);
    let w = Complex64::new(1.0, 0.0) + 4.0 * z * state.c * t;
    let c_new = state.c / w;
    if !(c_new.re > 0.0) {
        return Err(Error::BranchOrDecayLoss { re_c: c_new.re });
    }
    let amp_new = state.amplitude * tracked_inverse_sqrt(z, state.c, t);
    GaussianState::new(c_new, amp_new)
}

/// Weighted norm of a Gaussian state, `‖e^{γ x^2} u‖`, or `Divergent` when
/// the weight beats the decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightedNorm {
    Finite(f64),
    Divergent,
}

impl WeightedNorm {
    pub fn finite(self) -> Option<f64> {
        match self {
            WeightedNorm::Finite(v) => Some(v),
            WeightedNorm::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, WeightedNorm::Divergent)
    }
}

/// `‖e^{γ x^2} amplitude e^{-c x^2}‖ = |amplitude| (π / (2 Re c - 2γ))^{1/4}`
/// when `Re c > γ`.
pub fn gaussian_weighted_norm(state: &GaussianState, gamma: f64) -> WeightedNorm {
    let margin = 2.0 * state.c.re - 2.0 * gamma;
    if margin <= 0.0 {
        return WeightedNorm::Divergent;
    }
    WeightedNorm::Finite(state.amplitude.norm() * (std::f64::consts::PI / margin).powf(0.25))
}

/// Extremal initial state for the Gaussian two-time decay threshold: data
/// `e^{-(1/β^2 + i/(4T)) x^2}` evolved freely for time `T` has modulus decay
/// rate exactly `1/α^2` with `αβ = 4T`.
pub fn hardy_extremal_pair(beta: f64, t_final: f64) -> Result<(GaussianState, f64)> {
    if !(beta > 0.0 && t_final > 0.0) {
        return Err(Error::ParameterOutOfRange(
            "analytic.beta and analytic.T must be positive".into(),
        ));
    }
    let state = GaussianState::new(
        Complex64::new(1.0 / (beta * beta), 1.0 / (4.0 * t_final)),
        Complex64::new(1.0, 0.0),
    )?;
    let evolved = evolve_gaussian(&state, 0.0, 1.0, t_final)?;
    // Modulus decay rate of the evolved state; with alpha = 4T/beta it equals
    // 1/alpha^2 = beta^2/(16 T^2).
    let rate = evolved.c.re;
    Ok((state, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let s = GaussianState::real(1.0).unwrap();
        let e = evolve_gaussian(&s, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(e, s);
    }

    #[test]
    fn heat_evolution_rate() {
        // c(1) = c / (1 + 4c) with c = 1 gives 1/5.
        let s = GaussianState::real(1.0).unwrap();
        let e = evolve_gaussian(&s, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(e.c.re, 0.2, max_relative = 1e-14);
        assert!(e.c.im.abs() < 1e-15);
    }

    #[test]
    fn schrodinger_evolution_is_unitary() {
        let s = GaussianState::real(1.0).unwrap();
        let n0 = gaussian_weighted_norm(&s, 0.0).finite().unwrap();
        for k in 1..=10 {
            let t = 0.1 * k as f64;
            let e = evolve_gaussian(&s, 0.0, 1.0, t).unwrap();
            let n = gaussian_weighted_norm(&e, 0.0).finite().unwrap();
            assert_relative_eq!(n, n0, max_relative = 1e-12);
        }
    }

    #[test]
    fn schrodinger_real_rate_formula() {
        // Re c(t) = c / (1 + 16 c^2 t^2) for real initial c.
        let c = 0.7;
        let s = GaussianState::real(c).unwrap();
        for k in 1..=5 {
            let t = 0.2 * k as f64;
            let e = evolve_gaussian(&s, 0.0, 1.0, t).unwrap();
            assert_relative_eq!(
                e.c.re,
                c / (1.0 + 16.0 * c * c * t * t),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn weighted_norm_values() {
        let s = GaussianState::real(1.0).unwrap();
        // γ = 1/4: (π / (3/2))^{1/4} = (2π/3)^{1/4}
        let v = gaussian_weighted_norm(&s, 0.25).finite().unwrap();
        assert_relative_eq!(v, (2.0 * PI / 3.0).powf(0.25), max_relative = 1e-14);
        assert!(gaussian_weighted_norm(&s, 1.0).is_divergent());
        assert!(gaussian_weighted_norm(&s, 1.5).is_divergent());
        // γ = 0 reduces to the plain L2 norm.
        let plain = gaussian_weighted_norm(&s, 0.0).finite().unwrap();
        assert_relative_eq!(plain, (PI / 2.0).powf(0.25), max_relative = 1e-14);
    }

    #[test]
    fn evolution_composes() {
        let s = GaussianState::new(Complex64::new(0.8, 0.1), Complex64::new(1.0, -0.5)).unwrap();
        for (a, b) in [(0.0, 1.0), (1.0, 0.0), (0.5, -1.2)] {
            let one = evolve_gaussian(&evolve_gaussian(&s, a, b, 0.3).unwrap(), a, b, 0.45).unwrap();
            let two = evolve_gaussian(&s, a, b, 0.75).unwrap();
            assert!((one.c - two.c).norm() < 1e-12 * two.c.norm());
            assert!((one.amplitude - two.amplitude).norm() < 1e-12 * two.amplitude.norm());
        }
    }

    #[test]
    fn extremal_pair_rates() {
        let (state, rate) = hardy_extremal_pair(2.0, 1.0).unwrap();
        assert_relative_eq!(state.c.re, 0.25, max_relative = 1e-14);
        assert_relative_eq!(state.c.im, 0.25, max_relative = 1e-14);
        // alpha = 4T/beta = 2, decay rate 1/alpha^2 = 1/4.
        assert_relative_eq!(rate, 0.25, max_relative = 1e-12);
        let (_, rate41) = hardy_extremal_pair(1.0, 1.0).unwrap();
        assert_relative_eq!(rate41, 1.0 / 16.0, max_relative = 1e-12);
    }

    #[test]
    fn extremal_threshold_scan() {
        let (state, rate) = hardy_extremal_pair(2.0, 1.0).unwrap();
        let evolved = evolve_gaussian(&state, 0.0, 1.0, 1.0).unwrap();
        // Weighted norms of u(T) diverge above the terminal rate, are finite below.
        assert!(gaussian_weighted_norm(&evolved, rate * 1.01).is_divergent());
        assert!(gaussian_weighted_norm(&evolved, rate * 0.99).finite().is_some());
    }

    #[test]
    fn log_convexity_of_closed_form_weighted_norm() {
        // H(t) = ‖e^{γx^2} u(t)‖^2 along the free flow, dense sampling.
        let gamma = 0.25;
        let s = GaussianState::real(1.0).unwrap();
        let n = 400;
        let t_max = 0.4;
        let mut log_h = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = t_max * i as f64 / n as f64;
            let e = evolve_gaussian(&s, 0.0, 1.0, t).unwrap();
            let v = gaussian_weighted_norm(&e, gamma).finite().expect("finite inside window");
            log_h.push(2.0 * v.ln());
        }
        let dt = t_max / n as f64;
        for w in log_h.windows(3) {
            let second = (w[2] - 2.0 * w[1] + w[0]) / (dt * dt);
            assert!(second > -1e-7, "second difference {second}");
        }
    }

    #[test]
    fn branch_tracking_stays_continuous_for_long_times() {
        // (1 + 4ict)^{-1/2} crosses the principal branch cut as t grows; the
        // tracked amplitude must stay continuous (norm-preserving for A = 0).
        let s = GaussianState::real(1.0).unwrap();
        let mut prev = s.amplitude;
        for k in 1..=60 {
            let t = 0.25 * k as f64;
            let e = evolve_gaussian(&s, 0.0, 1.0, t).unwrap();
            let n = gaussian_weighted_norm(&e, 0.0).finite().unwrap();
            assert_relative_eq!(n, (PI / 2.0).powf(0.25), max_relative = 1e-10);
            // continuity: successive amplitudes stay close
            assert!((e.amplitude - prev).norm() < 0.75);
            prev = e.amplitude;
        }
    }

    #[test]
    fn rejects_decay_loss() {
        // Backward heat flow destroys decay once 1 + 4zct crosses zero.
        let s = GaussianState::real(1.0).unwrap();
        assert!(matches!(
            evolve_gaussian(&s, 1.0, 0.0, -0.3),
            Err(Error::BackwardDissipative { .. })
        ));
    }
}
