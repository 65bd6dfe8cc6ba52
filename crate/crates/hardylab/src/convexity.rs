//! The frequency-function calculus for weighted evolutions: the trace
//! `H(t) = (f, f)`, `D(t) = (S f, f)`, `N(t) = D/H` with `f = e^{γ x^2} u`,
//! discrete log-convexity verification, the commutator identity for the
//! quadratic weight, and the gradient/Hermite lower-bound inequalities.
//!
//! For `φ = |x|^2` the symmetric and skew-symmetric parts of the conjugated
//! generator are (in one dimension)
//!
//! ```text
//! S = A (Δ + 4γ^2 x^2) - i B γ (4 x ∂_x + 2)
//! A = i B (Δ + 4γ^2 x^2) - A γ (4 x ∂_x + 2)
//! ```
//!
//! and the commutator assembles to the nonnegative quadratic form
//! `(S_t f + [S,A] f, f) = γ (A^2+B^2) ∫ 8 |∇f|^2 + 32 γ^2 x^2 |f|^2 dx`.
//!
//! Operator assembly (anything that differentiates the weighted field `f`)
//! requires slices whose weighted products are resolved on the grid;
//! closed-form sampled data qualifies, while fields that have been through
//! FFTs carry tail noise that the quadratic-exponential weight amplifies.
//! Plain `H` traces are protected against exactly that by the tail-aware
//! weighted norm.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    inner_product, l2_norm, spectral_derivative, spectral_laplacian, ComplexField, SpaceTimeField,
};
use crate::quad::composite_simpson;
use crate::weight::{weighted_l2_norm_strict, WeightProfile, NOISE_FLOOR};

/// Sampled `H(t)` with discrete log-convexity diagnostics; `D` and `N` are
/// present only when the trace was built with the quadratic-weight operator
/// form.
#[derive(Debug, Clone)]
pub struct ConvexityTrace {
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    pub log_h: Vec<f64>,
    /// Undivided centered second differences of `log H` at interior nodes;
    /// divide by `dt^2` for a second-derivative approximation.
    pub second_diff_log_h: Vec<f64>,
    pub d: Option<Vec<f64>>,
    /// Frequency function `N = D / H`.
    pub frequency: Option<Vec<f64>>,
}

impl ConvexityTrace {
    /// Builds the diagnostic part of a trace from raw positive `H` samples.
    pub fn from_h_samples(times: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if times.len() != h.len() || times.len() < 3 {
            return Err(Error::ParameterOutOfRange(
                "convexity.trace needs at least three matching samples".into(),
            ));
        }
        let dt = times[1] - times[0];
        let span = times[times.len() - 1] - times[0];
        if times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * span.max(1.0))
        {
            return Err(Error::NonUniformTimeGrid(
                "convexity traces require uniform time spacing".into(),
            ));
        }
        if h.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::ParameterOutOfRange(
                "convexity.H must be positive and finite".into(),
            ));
        }
        let log_h: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let second_diff_log_h = log_h
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .collect();
        Ok(Self { times, h, log_h, second_diff_log_h, d: None, frequency: None })
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }
}

/// `H(t) = ‖e^{phase} u(t)‖^2` slice by slice, with the strict tail check.
pub fn build_trace(u: &SpaceTimeField, profile: &WeightProfile) -> Result<ConvexityTrace> {
    let mut h = Vec::with_capacity(u.len());
    for (i, slice) in u.slices().iter().enumerate() {
        let v = weighted_l2_norm_strict(slice, profile, u.times()[i])?;
        h.push(v * v);
    }
    ConvexityTrace::from_h_samples(u.times().to_vec(), h)
}

/// Pointwise weighted field `e^{γ x^2} u` with sub-noise-floor samples of
/// `u` zeroed, so the weight does not amplify unresolved tails.
pub fn weighted_field(u: &ComplexField, gamma: f64) -> Result<ComplexField> {
    let grid = u.grid();
    let floor = u.max_abs() * NOISE_FLOOR;
    ComplexField::new(
        grid,
        u.values()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if v.norm() < floor {
                    Complex64::new(0.0, 0.0)
                } else {
                    let x = grid.coord(j);
                    v * (gamma * x * x).exp()
                }
            })
            .collect(),
    )
}

/// `S f` for the quadratic weight: `A(Δ + 4γ^2 x^2) f - iBγ (4x ∂_x + 2) f`.
pub fn apply_symmetric_part(
    f: &ComplexField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<ComplexField> {
    let grid = f.grid();
    let lap = spectral_laplacian(f)?;
    let der = spectral_derivative(f)?;
    ComplexField::new(
        grid,
        (0..grid.points())
            .map(|j| {
                let x = grid.coord(j);
                let v = f.values()[j];
                a_coef * (lap.values()[j] + 4.0 * gamma * gamma * x * x * v)
                    - Complex64::new(0.0, b_coef * gamma)
                        * (4.0 * x * der.values()[j] + 2.0 * v)
            })
            .collect(),
    )
}

/// `A f` for the quadratic weight: `iB(Δ + 4γ^2 x^2) f - Aγ (4x ∂_x + 2) f`.
pub fn apply_skew_part(
    f: &ComplexField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<ComplexField> {
    let grid = f.grid();
    let lap = spectral_laplacian(f)?;
    let der = spectral_derivative(f)?;
    ComplexField::new(
        grid,
        (0..grid.points())
            .map(|j| {
                let x = grid.coord(j);
                let v = f.values()[j];
                Complex64::new(0.0, b_coef) * (lap.values()[j] + 4.0 * gamma * gamma * x * x * v)
                    - a_coef * gamma * (4.0 * x * der.values()[j] + 2.0 * v)
            })
            .collect(),
    )
}

/// Builds the trace including `D(t) = (S f, f)` and `N = D/H` for the
/// quadratic weight. Slices should be resolved down to their tails
/// (closed-form sampling) since `f` is differentiated spectrally.
pub fn build_trace_with_operator(
    u: &SpaceTimeField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<ConvexityTrace> {
    let profile = WeightProfile::static_gaussian(gamma)?;
    let mut h = Vec::with_capacity(u.len());
    let mut d = Vec::with_capacity(u.len());
    for (i, slice) in u.slices().iter().enumerate() {
        let v = weighted_l2_norm_strict(slice, &profile, u.times()[i])?;
        h.push(v * v);
        let f = weighted_field(slice, gamma)?;
        let sf = apply_symmetric_part(&f, gamma, a_coef, b_coef)?;
        d.push(inner_product(&sf, &f)?.re);
    }
    let mut trace = ConvexityTrace::from_h_samples(u.times().to_vec(), h)?;
    let frequency = d.iter().zip(&trace.h).map(|(di, hi)| di / hi).collect();
    trace.d = Some(d);
    trace.frequency = Some(frequency);
    Ok(trace)
}

/// Discrete convexity verdict: both numbers are margins, negative means a
/// violation beyond the allowed slack.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConvexityCheck {
    /// `min` over interior nodes of `d^2 log H / dt^2 + slack`.
    pub worst_second_diff: f64,
    /// `min` over nodes of `slack + (1-s) log H_0 + s log H_end - log H_i`
    /// with `s` the normalized time.
    pub worst_interpolation_margin: f64,
}

/// Checks discrete log-convexity of a trace plus the endpoint interpolation
/// bound `H(t) <= e^{slack} H(t_0)^{1-s} H(t_end)^s`.
pub fn log_convexity_check(trace: &ConvexityTrace, slack: f64) -> ConvexityCheck {
    let dt = trace.dt();
    let worst_second_diff = trace
        .second_diff_log_h
        .iter()
        .map(|sd| sd / (dt * dt) + slack)
        .fold(f64::INFINITY, f64::min);
    let t0 = trace.times[0];
    let span = trace.times[trace.times.len() - 1] - t0;
    let lh0 = trace.log_h[0];
    let lh1 = trace.log_h[trace.log_h.len() - 1];
    let worst_interpolation_margin = trace
        .times
        .iter()
        .zip(&trace.log_h)
        .map(|(&t, &lh)| {
            let s = (t - t0) / span;
            slack + (1.0 - s) * lh0 + s * lh1 - lh
        })
        .fold(f64::INFINITY, f64::min);
    ConvexityCheck { worst_second_diff, worst_interpolation_margin }
}

/// The commutator quadratic form for the quadratic weight, assembled
/// termwise from `∫|∇f|^2` and `∫ x^2 |f|^2`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CommutatorForm {
    pub gamma: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    /// `γ (A^2+B^2) (8 gradient_part + 32 γ^2 moment_part)`.
    pub value_of_form: f64,
    pub gradient_part: f64,
    pub moment_part: f64,
}

fn moment_tail_check(f: &ComplexField) -> Result<()> {
    let grid = f.grid();
    let n = grid.points();
    let g = |j: usize| {
        let x = grid.coord(j);
        x * x * f.values()[j].norm_sqr()
    };
    let max = (0..n).map(g).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(());
    }
    let boundary = g(0).max(g(n - 1));
    if boundary >= 1e-10 * max {
        return Err(Error::WeightedNormDivergent(format!(
            "x^2 moment boundary/max ratio {:.3e}",
            boundary / max
        )));
    }
    Ok(())
}

/// Termwise route: `γ (A^2+B^2) ∫ 8 |∇f|^2 + 32 γ^2 x^2 |f|^2 dx`.
pub fn commutator_form(
    f: &ComplexField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<CommutatorForm> {
    if !(gamma > 0.0) {
        return Err(Error::ParameterOutOfRange("convexity.gamma".into()));
    }
    moment_tail_check(f)?;
    let grid = f.grid();
    let der = spectral_derivative(f)?;
    let gradient_part = l2_norm(&der).powi(2);
    let dx = grid.spacing();
    let moment_part: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let x = grid.coord(j);
            x * x * v.norm_sqr()
        })
        .sum::<f64>()
        * dx;
    let value_of_form = gamma
        * (a_coef * a_coef + b_coef * b_coef)
        * (8.0 * gradient_part + 32.0 * gamma * gamma * moment_part);
    Ok(CommutatorForm { gamma, a_coef, b_coef, value_of_form, gradient_part, moment_part })
}

/// Direct operator route for the same form:
/// `-γ (A^2+B^2) [ 8 (Δf, f) - 32 γ^2 (x^2 f, f) ]`.
pub fn commutator_form_direct(
    f: &ComplexField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<f64> {
    let grid = f.grid();
    let lap = spectral_laplacian(f)?;
    let lap_term = inner_product(&lap, f)?.re;
    let dx = grid.spacing();
    let moment: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let x = grid.coord(j);
            x * x * v.norm_sqr()
        })
        .sum::<f64>()
        * dx;
    Ok(-gamma
        * (a_coef * a_coef + b_coef * b_coef)
        * (8.0 * lap_term - 32.0 * gamma * gamma * moment))
}

/// `∫ |∇f|^2 + 4γ^2 x^2 |f|^2 dx - 2γ ∫ |f|^2 dx` (n = 1); the harmonic
/// oscillator ground-state bound makes this nonnegative, with equality at
/// `f = e^{-γ x^2}`.
pub fn hermite_lower_bound_check(f: &ComplexField, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::ParameterOutOfRange("convexity.gamma".into()));
    }
    moment_tail_check(f)?;
    let der = spectral_derivative(f)?;
    let grad = l2_norm(&der).powi(2);
    let grid = f.grid();
    let dx = grid.spacing();
    let moment: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let x = grid.coord(j);
            x * x * v.norm_sqr()
        })
        .sum::<f64>()
        * dx;
    let lhs = grad + 4.0 * gamma * gamma * moment;
    let rhs = 2.0 * gamma * l2_norm(f).powi(2);
    Ok(lhs - rhs)
}

/// Weighted squared space integral `∫ e^{2γx^2} |v|^2 dx` over resolved
/// samples of `v` (sub-floor samples dropped).
fn weighted_squared_integral(v: &ComplexField, gamma: f64) -> f64 {
    let grid = v.grid();
    let floor = v.max_abs() * NOISE_FLOOR;
    let dx = grid.spacing();
    v.values()
        .iter()
        .enumerate()
        .filter(|(_, val)| val.norm() >= floor)
        .map(|(j, val)| {
            let x = grid.coord(j);
            (2.0 * gamma * x * x).exp() * val.norm_sqr()
        })
        .sum::<f64>()
        * dx
}

/// Space-time gradient/moment quotient monitored against the convexity
/// bound's right-hand side (the unquantified universal constant is the
/// caller's to calibrate):
///
/// `[ ‖sqrt(s(1-s)) e^{γx^2} ∇u‖ + ‖sqrt(s(1-s)) |x| e^{γx^2} u‖ ] /
///  [ (1+M1) sup_t ‖e^{γx^2} u(t)‖ + weighted_source_norm ]`
///
/// with `s` the time normalized to `[0,1]` over the sampled window.
pub fn gradient_estimate_check(
    u: &SpaceTimeField,
    gamma: f64,
    m1: f64,
    weighted_source_norm: f64,
) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::ParameterOutOfRange("convexity.gamma".into()));
    }
    let dt = u.uniform_dt()?;
    let t0 = u.times()[0];
    let span = u.times()[u.len() - 1] - t0;
    let profile = WeightProfile::static_gaussian(gamma)?;
    let mut grad_integrand = Vec::with_capacity(u.len());
    let mut moment_integrand = Vec::with_capacity(u.len());
    let mut sup_weighted: f64 = 0.0;
    for (i, slice) in u.slices().iter().enumerate() {
        let s = (u.times()[i] - t0) / span;
        let w = s * (1.0 - s);
        let der = spectral_derivative(slice)?;
        grad_integrand.push(w * weighted_squared_integral(&der, gamma));
        let grid = slice.grid();
        let moment_field = ComplexField::new(
            grid,
            slice
                .values()
                .iter()
                .enumerate()
                .map(|(j, v)| v * grid.coord(j))
                .collect(),
        )?;
        moment_integrand.push(w * weighted_squared_integral(&moment_field, gamma));
        sup_weighted = sup_weighted.max(weighted_l2_norm_strict(slice, &profile, u.times()[i])?);
    }
    // Normalized-time quadrature keeps the ratio window-invariant.
    let scale = dt / span;
    let lhs = composite_simpson(&grad_integrand, scale).max(0.0).sqrt()
        + composite_simpson(&moment_integrand, scale).max(0.0).sqrt();
    let rhs = (1.0 + m1) * sup_weighted + weighted_source_norm;
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Residual of the second-derivative identity for `H(t) = ‖f(t)‖^2` along a
/// free flow: the left side is a centered second difference of `H`, the
/// right side assembles
///
/// `2 ∂_t Re(∂_t f - S f - A f, f) + 2 (S_t f + [S,A] f, f)
///  + ‖∂_t f - A f + S f‖^2 - ‖∂_t f - A f - S f‖^2`
///
/// with `∂_t f` by centered differences and `S`, `A` spectral. Returns the
/// worst interior deviation normalized by the scale of both sides.
pub fn second_derivative_identity_check(
    u: &SpaceTimeField,
    gamma: f64,
    a_coef: f64,
    b_coef: f64,
) -> Result<f64> {
    let dt = u.uniform_dt()?;
    let n = u.len();
    if n < 7 {
        return Err(Error::ParameterOutOfRange(
            "convexity.identity check needs at least 7 slices".into(),
        ));
    }
    let fields: Vec<ComplexField> = u
        .slices()
        .iter()
        .map(|s| weighted_field(s, gamma))
        .collect::<Result<_>>()?;
    let h: Vec<f64> = fields.iter().map(|f| l2_norm(f).powi(2)).collect();

    let grid = u.grid();
    let dx = grid.spacing();
    // r_i = Re(∂_t f - S f - A f, f), defined on 1..n-1.
    let mut r = vec![0.0; n];
    // flux and commutator terms per node.
    let mut flux = vec![0.0; n];
    let mut comm = vec![0.0; n];
    for i in 1..n - 1 {
        let f = &fields[i];
        let dtf = ComplexField::new(
            grid,
            fields[i + 1]
                .values()
                .iter()
                .zip(fields[i - 1].values())
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect(),
        )?;
        let sf = apply_symmetric_part(f, gamma, a_coef, b_coef)?;
        let af = apply_skew_part(f, gamma, a_coef, b_coef)?;
        let mut defect = Complex64::new(0.0, 0.0);
        let mut plus_sq = 0.0;
        let mut minus_sq = 0.0;
        for j in 0..grid.points() {
            let d = dtf.values()[j] - sf.values()[j] - af.values()[j];
            defect += d * f.values()[j].conj();
            let base = dtf.values()[j] - af.values()[j];
            plus_sq += (base + sf.values()[j]).norm_sqr();
            minus_sq += (base - sf.values()[j]).norm_sqr();
        }
        r[i] = (defect * dx).re;
        flux[i] = (plus_sq - minus_sq) * dx;
        comm[i] = commutator_form_direct(f, gamma, a_coef, b_coef)?;
    }

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 2..n - 2 {
        let lhs = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (dt * dt);
        let dr = (r[i + 1] - r[i - 1]) / (2.0 * dt);
        let rhs = 2.0 * dr + 2.0 * comm[i] + flux[i];
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    let h_scale = h.iter().cloned().fold(0.0, f64::max);
    Ok(worst / scale.max(h_scale).max(1e-300))
}
