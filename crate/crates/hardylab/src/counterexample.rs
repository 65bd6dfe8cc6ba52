//! The construction showing where the formal convexity argument fails: a
//! positive even weight rate `a(t)` solving `32a³ + a'' - 2a'²/a = 0` makes
//! the commutator calculus formally nonnegative, yet the resulting
//! two-endpoint interpolation inequality is false for the explicit free
//! solution `u(x,t) = (t-i)^{-1/2} e^{i x²/(4(t-i))}` — because the weighted
//! quantity at `t = 0` is infinite.
//!
//! Numerics: the substitution `b = 1/a` turns the rate equation into the
//! regular problem `b'' = 32/b`, integrated by fixed-step RK4 from
//! `b(0) = 1, b'(0) = 0` and conserving the first integral
//! `b'² - 64 ln b`. The divergence is exhibited as non-convergence of the
//! truncated weighted integrals under domain growth, never as an "infinite"
//! value.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::log_integral_rectangle;

/// Hard cap on the RK4 step.
pub const MAX_ODE_STEP: f64 = 1e-3;

/// Sampled solution of the weight-rate equation on `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub b_prime_values: Vec<f64>,
    pub step: f64,
    /// Integration order (classical RK4).
    pub order: u32,
}

impl OdeTrajectory {
    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// `a(t)` at a stored node index.
    pub fn a_at(&self, index: usize) -> f64 {
        self.a_values[index]
    }

    /// Nearest stored node index for time `t >= 0`.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        if t < 0.0 || t > self.t_max() + 0.5 * self.step {
            return Err(Error::TrajectoryTooShort { needed: t, t_max: self.t_max() });
        }
        Ok(((t / self.step).round() as usize).min(self.times.len() - 1))
    }

    /// Worst deviation of the first integral `b'² - 64 ln b` from zero.
    pub fn first_integral_residual(&self) -> f64 {
        self.b_values
            .iter()
            .zip(&self.b_prime_values)
            .map(|(&b, &bp)| (bp * bp - 64.0 * b.ln()).abs())
            .fold(0.0, f64::max)
    }

    /// Worst pointwise residual of `32a³ + a'' - 2a'²/a` with both
    /// derivatives from fourth-order stencils on the stored grid.
    pub fn rate_equation_residual(&self) -> f64 {
        let h = self.step;
        let a = &self.a_values;
        let mut worst: f64 = 0.0;
        for i in 2..a.len() - 2 {
            let d1 = (8.0 * (a[i + 1] - a[i - 1]) - (a[i + 2] - a[i - 2])) / (12.0 * h);
            let d2 = (-a[i + 2] + 16.0 * a[i + 1] - 30.0 * a[i] + 16.0 * a[i - 1] - a[i - 2])
                / (12.0 * h * h);
            worst = worst.max((32.0 * a[i].powi(3) + d2 - 2.0 * d1 * d1 / a[i]).abs());
        }
        worst
    }
}

/// Integrates `b'' = 32/b`, `b(0) = 1`, `b'(0) = 0` with classical RK4 and
/// returns both `b` and `a = 1/b`.
pub fn solve_weight_ode(t_max: f64, step: f64) -> Result<OdeTrajectory> {
    if !(t_max > 0.0) {
        return Err(Error::ParameterOutOfRange("counterexample.t_max".into()));
    }
    if !(step > 0.0) || step > MAX_ODE_STEP {
        return Err(Error::StepTooLarge { step, max: MAX_ODE_STEP });
    }
    let n = (t_max / step).ceil() as usize;
    let h = t_max / n as f64;
    let mut b = 1.0f64;
    let mut bp = 0.0f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut a_values = Vec::with_capacity(n + 1);
    let mut b_values = Vec::with_capacity(n + 1);
    let mut b_prime_values = Vec::with_capacity(n + 1);
    let accel = |b: f64| 32.0 / b;
    for i in 0..=n {
        times.push(i as f64 * h);
        a_values.push(1.0 / b);
        b_values.push(b);
        b_prime_values.push(bp);
        if i == n {
            break;
        }
        let k1v = bp;
        let k1a = accel(b);
        let k2v = bp + 0.5 * h * k1a;
        let k2a = accel(b + 0.5 * h * k1v);
        let k3v = bp + 0.5 * h * k2a;
        let k3a = accel(b + 0.5 * h * k2v);
        let k4v = bp + h * k3a;
        let k4a = accel(b + h * k3v);
        b += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        bp += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    }
    Ok(OdeTrajectory { times, a_values, b_values, b_prime_values, step: h, order: 4 })
}

/// `a_R(t) = R a(R|t|)` (even extension): the scaled family solves the same
/// rate equation.
pub fn scaled_weight(traj: &OdeTrajectory, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::ParameterOutOfRange("counterexample.R".into()));
    }
    let idx = traj.node_index(r * t.abs())?;
    Ok(r * traj.a_at(idx))
}

/// Worst residual of the rate equation for the scaled family `a_R`, checked
/// at node-aligned points via the exact scaling relations
/// `a_R'' (t) = R³ a''(Rt)`, `a_R'(t) = R² a'(Rt)`.
pub fn scaled_weight_residual(traj: &OdeTrajectory, r: f64, t_samples: &[f64]) -> Result<f64> {
    let h = traj.step;
    let a = &traj.a_values;
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let i = traj.node_index(r * t.abs())?;
        if i < 2 || i + 2 >= a.len() {
            continue;
        }
        let d1 = (8.0 * (a[i + 1] - a[i - 1]) - (a[i + 2] - a[i - 2])) / (12.0 * h);
        let d2 = (-a[i + 2] + 16.0 * a[i + 1] - 30.0 * a[i] + 16.0 * a[i - 1] - a[i - 2])
            / (12.0 * h * h);
        let ar = r * a[i];
        let ar1 = r * r * d1;
        let ar2 = r * r * r * d2;
        worst = worst.max((32.0 * ar.powi(3) + ar2 - 2.0 * ar1 * ar1 / ar).abs());
    }
    Ok(worst)
}

/// The explicit free solution `u(x,t) = (t-i)^{-1/2} e^{i x²/(4(t-i))}`;
/// `|u(x,t)|² = (t²+1)^{-1/2} e^{-x²/(2(t²+1))}`.
pub fn explicit_solution(x: f64, t: f64) -> Complex64 {
    let denom = Complex64::new(t, -1.0);
    denom.powf(-0.5) * (Complex64::new(0.0, 1.0) * x * x / (4.0 * denom)).exp()
}

/// Log of the squared modulus of the explicit solution.
pub fn explicit_solution_log_sq_modulus(x: f64, t: f64) -> f64 {
    -0.5 * (t * t + 1.0).ln() - x * x / (2.0 * (t * t + 1.0))
}

/// One row of the truncated-integral divergence table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceRow {
    pub r: f64,
    pub half_width: f64,
    /// Natural log of the truncated `H_{a_R}(0) = ∫_{-L}^{L} e^{2 a_R(0) x²} |u(x,0)|² dx`.
    pub log_h0: f64,
    pub h_minus1: f64,
    pub h_plus1: f64,
    /// Relative change of the endpoint integrals against the previous row.
    pub h_minus1_rel_change: f64,
    pub h_plus1_rel_change: f64,
    /// Endpoint integrals settled to < 1e-6 relative change.
    pub endpoints_converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceTable {
    pub r: f64,
    /// `a_R(0) = R`: the t = 0 weighted integrand grows like
    /// `e^{(2R - 1/2) x²}`; it diverges for R >= 1/4.
    pub center_divergent_regime: bool,
    /// `2 a_R(1) < 1/4`: the endpoint integrals converge.
    pub endpoint_rate: f64,
    pub rows: Vec<DivergenceRow>,
}

/// Truncated weighted integrals of the explicit solution under the scaled
/// weight family, per domain half-width: the center integral grows without
/// bound while the endpoint integrals settle.
pub fn divergence_demonstration(
    traj: &OdeTrajectory,
    r: f64,
    domain_halfwidths: &[f64],
) -> Result<DivergenceTable> {
    if domain_halfwidths.len() < 2 || domain_halfwidths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ParameterOutOfRange(
            "counterexample.domain_halfwidths must be increasing with at least two entries".into(),
        ));
    }
    let a_r_at_1 = scaled_weight(traj, r, 1.0)?;
    let mut rows: Vec<DivergenceRow> = Vec::new();
    for &l in domain_halfwidths {
        let n = ((l * 800.0) as usize).clamp(4000, 200_000);
        let log_h0 = log_integral_rectangle(
            &|x| 2.0 * r * x * x + explicit_solution_log_sq_modulus(x, 0.0),
            -l,
            l,
            n,
        );
        let h_at = |t: f64| {
            log_integral_rectangle(
                &|x| 2.0 * a_r_at_1 * x * x + explicit_solution_log_sq_modulus(x, t),
                -l,
                l,
                n,
            )
            .exp()
        };
        let h_minus1 = h_at(-1.0);
        let h_plus1 = h_at(1.0);
        let (dm, dp) = match rows.last() {
            Some(prev) => (
                (h_minus1 - prev.h_minus1).abs() / h_minus1,
                (h_plus1 - prev.h_plus1).abs() / h_plus1,
            ),
            None => (f64::INFINITY, f64::INFINITY),
        };
        rows.push(DivergenceRow {
            r,
            half_width: l,
            log_h0,
            h_minus1,
            h_plus1,
            h_minus1_rel_change: dm,
            h_plus1_rel_change: dp,
            endpoints_converged: dm < 1e-6 && dp < 1e-6,
        });
    }
    Ok(DivergenceTable {
        r,
        center_divergent_regime: r >= 0.25,
        endpoint_rate: 2.0 * a_r_at_1,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{spectral_laplacian, ComplexField, Grid};
    use approx::assert_relative_eq;

    fn trajectory() -> OdeTrajectory {
        solve_weight_ode(50.0, 1e-3).unwrap()
    }

    #[test]
    fn initial_conditions_and_positivity() {
        let traj = trajectory();
        assert_eq!(traj.a_values[0], 1.0);
        assert_eq!(traj.b_prime_values[0], 0.0);
        // a stays positive and strictly decreasing.
        for w in traj.a_values.windows(2) {
            assert!(w[1] > 0.0 && w[1] < w[0]);
        }
    }

    #[test]
    fn first_integral_conserved() {
        let traj = trajectory();
        let resid = traj.first_integral_residual();
        assert!(resid < 1e-6, "first-integral residual {resid}");
    }

    #[test]
    fn rate_equation_residual_small() {
        let traj = trajectory();
        let resid = traj.rate_equation_residual();
        assert!(resid < 1e-6, "rate equation residual {resid}");
    }

    #[test]
    fn r_a_of_r_decreases_and_is_small_at_ten() {
        let traj = trajectory();
        let values: Vec<f64> = [5.0, 10.0, 20.0, 50.0]
            .iter()
            .map(|&r| r * traj.a_at(traj.node_index(r).unwrap()))
            .collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "R a(R) not decreasing: {values:?}");
        }
        assert!(values[1] < 0.1, "10 a(10) = {}", values[1]);
    }

    #[test]
    fn scaled_family_solves_the_equation() {
        let traj = trajectory();
        assert_eq!(scaled_weight(&traj, 7.0, 0.0).unwrap(), 7.0);
        // R = 1 reproduces the base trajectory.
        for &t in &[0.1, 0.5, 1.0] {
            let idx = traj.node_index(t).unwrap();
            assert_eq!(scaled_weight(&traj, 1.0, t).unwrap(), traj.a_at(idx));
            // even extension
            assert_eq!(
                scaled_weight(&traj, 1.0, -t).unwrap(),
                scaled_weight(&traj, 1.0, t).unwrap()
            );
        }
        let samples: Vec<f64> = (1..=40).map(|k| 0.025 * k as f64).collect();
        let resid = scaled_weight_residual(&traj, 10.0, &samples).unwrap();
        assert!(resid < 1e-4, "scaled residual {resid}");
    }

    #[test]
    fn trajectory_too_short_detected() {
        let traj = solve_weight_ode(1.0, 1e-3).unwrap();
        assert!(matches!(
            scaled_weight(&traj, 10.0, 0.5),
            Err(Error::TrajectoryTooShort { .. })
        ));
        assert!(matches!(
            solve_weight_ode(1.0, 0.01),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn explicit_solution_modulus_and_norm() {
        // |u(x,0)|² = e^{-x²/2}
        for &x in &[0.0, 0.7, 2.0] {
            assert_relative_eq!(
                explicit_solution(x, 0.0).norm_sqr(),
                (-x * x / 2.0).exp(),
                max_relative = 1e-12
            );
        }
        // ‖u(t)‖² = sqrt(2π) for every t (free flow is unitary).
        for &t in &[-1.0, 0.0, 0.4, 1.0] {
            let norm_sq = crate::quad::adaptive_simpson(
                &|x| explicit_solution(x, t).norm_sqr(),
                -30.0,
                30.0,
                1e-12,
            );
            assert_relative_eq!(
                norm_sq,
                (2.0 * std::f64::consts::PI).sqrt(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn explicit_solution_solves_the_free_equation() {
        // ∂_t u - iΔu = 0 with spectral Δ and analytic ∂_t.
        let grid = Grid::new(20.0, 1024).unwrap();
        for &t in &[-0.8, 0.0, 0.6] {
            let slice = ComplexField::from_fn(grid, |x| explicit_solution(x, t)).unwrap();
            let lap = spectral_laplacian(&slice).unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..grid.points() {
                let x = grid.coord(j);
                // analytic time derivative: u_t = u (-1/(2(t-i)) - i x²/(4(t-i)²))
                let denom = Complex64::new(t, -1.0);
                let ut = slice.values()[j]
                    * (-0.5 / denom - Complex64::new(0.0, 0.25) * x * x / (denom * denom));
                let defect = ut - Complex64::new(0.0, 1.0) * lap.values()[j];
                num += defect.norm_sqr();
                den += slice.values()[j].norm_sqr();
            }
            let rel = (num / den).sqrt();
            assert!(rel < 1e-8, "free-equation residual {rel} at t={t}");
        }
    }

    #[test]
    fn divergence_table_r1() {
        let traj = trajectory();
        // Endpoint rate must be below the t = ±1 integrability threshold 1/4.
        let table = divergence_demonstration(&traj, 1.0, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!(table.center_divergent_regime);
        assert!(table.endpoint_rate < 0.25, "endpoint rate {}", table.endpoint_rate);
        // log H0 grows by more than the previous L² between rows
        // (integrand e^{1.5 x²}).
        for w in table.rows.windows(2) {
            assert!(w[1].log_h0 > w[0].log_h0);
            assert!(
                w[1].log_h0 - w[0].log_h0 > w[0].half_width * w[0].half_width,
                "growth {} vs L² {}",
                w[1].log_h0 - w[0].log_h0,
                w[0].half_width * w[0].half_width
            );
        }
        // Endpoint integrals settle.
        let last = table.rows.last().unwrap();
        assert!(last.endpoints_converged, "endpoints not converged: {last:?}");
        assert_relative_eq!(last.h_minus1, last.h_plus1, max_relative = 1e-9);
    }

    #[test]
    fn divergence_table_small_r_converges_everywhere() {
        let traj = trajectory();
        let table = divergence_demonstration(&traj, 0.1, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!(!table.center_divergent_regime);
        // Center integral settles too: successive log values agree tightly.
        let rows = &table.rows;
        let d = (rows[3].log_h0 - rows[2].log_h0).abs();
        assert!(d < 1e-9, "center change {d}");
    }
}
