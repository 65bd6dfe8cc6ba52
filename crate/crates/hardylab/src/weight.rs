//! Quadratic-exponential weight families, their truncations and
//! mollifications, and weighted norms with an explicit tail-dominance
//! diagnostic.
//!
//! Every profile exposes its *phase*: `weight(x,t) = e^{phase(x,t)}`.
//! Truncated-domain quadrature of `e^{2 phase} |u|^2` is only trusted when
//! the boundary integrand is negligible against the interior maximum;
//! [`weighted_l2_norm`] reports that ratio instead of silently integrating,
//! and the strict variant turns a failed check into an error.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::quad::adaptive_simpson;

/// Which evolution a moving Carleman weight is tuned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlemanOperator {
    Schrodinger,
    Parabolic,
}

/// A time-indexed spatial weight, identified by its phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightProfile {
    /// `γ x^2`.
    StaticGaussian { gamma: f64 },
    /// `a(t) x^2` with `a(t) = γA / (A + 4γ(A^2+B^2) t)`, the solution of the
    /// Riccati equation `a' = -4 (A + B^2/A) a^2`, `a(0) = γ`. This is the
    /// fastest Gaussian rate that survives the dissipative flow with
    /// coefficient `A + iB`.
    RiccatiDecay { gamma: f64, a_coef: f64, b_coef: f64 },
    /// `x^2 / (α t + (1-t) β)^2`: interpolates rate `1/β^2` at `t=0` to
    /// `1/α^2` at `t=1`.
    TimeInterpolated { alpha: f64, beta: f64 },
    /// Moving Gaussian centered at `-R t(1-t)` with the compensating
    /// time factor: `μ (x + R t(1-t))^2 - (1+ε) R^2 t(1-t) / (16 μ)`.
    /// The parabolic variant adds `R^2 t(1-t)(1-2t) / 6`.
    MovingCarleman {
        mu: f64,
        r: f64,
        epsilon: f64,
        operator: CarlemanOperator,
    },
    /// `λ x`.
    LinearExponential { lambda: f64 },
    /// `γ · (θ_ρ * φ_R)(x)` where `φ_R(x) = min(x^2, R^2)` and `θ_ρ` is a
    /// radial mollifier of support radius `ρ`. Constant for `|x| > R + ρ`.
    TruncatedGaussian {
        gamma: f64,
        truncation_radius: f64,
        mollification_radius: f64,
    },
    /// `γ · (θ_ρ * φ_a)(x)` where `φ_a(x) = x^2` inside the unit ball and
    /// `(2|x|^{2-a} - a)/(2-a)` outside: convex, sub-quadratic growth.
    RegularizedConvex {
        gamma: f64,
        a_exponent: f64,
        mollification_radius: f64,
    },
}

fn require_positive(module: &str, name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "{module}.{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

impl WeightProfile {
    pub fn static_gaussian(gamma: f64) -> Result<Self> {
        let p = WeightProfile::StaticGaussian { gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn riccati_decay(gamma: f64, a_coef: f64, b_coef: f64) -> Result<Self> {
        let p = WeightProfile::RiccatiDecay { gamma, a_coef, b_coef };
        p.validate()?;
        Ok(p)
    }

    pub fn time_interpolated(alpha: f64, beta: f64) -> Result<Self> {
        let p = WeightProfile::TimeInterpolated { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn moving_carleman(mu: f64, r: f64, epsilon: f64, operator: CarlemanOperator) -> Result<Self> {
        let p = WeightProfile::MovingCarleman { mu, r, epsilon, operator };
        p.validate()?;
        Ok(p)
    }

    pub fn linear_exponential(lambda: f64) -> Result<Self> {
        let p = WeightProfile::LinearExponential { lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn truncated_gaussian(gamma: f64, truncation_radius: f64, mollification_radius: f64) -> Result<Self> {
        let p = WeightProfile::TruncatedGaussian { gamma, truncation_radius, mollification_radius };
        p.validate()?;
        Ok(p)
    }

    pub fn regularized_convex(gamma: f64, a_exponent: f64, mollification_radius: f64) -> Result<Self> {
        let p = WeightProfile::RegularizedConvex { gamma, a_exponent, mollification_radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightProfile::StaticGaussian { gamma } => require_positive("weight", "gamma", gamma),
            WeightProfile::RiccatiDecay { gamma, a_coef, b_coef } => {
                require_positive("weight", "gamma", gamma)?;
                require_positive("weight", "a_coef", a_coef)?;
                if !b_coef.is_finite() {
                    return Err(Error::ParameterOutOfRange("weight.b_coef".into()));
                }
                Ok(())
            }
            WeightProfile::TimeInterpolated { alpha, beta } => {
                require_positive("weight", "alpha", alpha)?;
                require_positive("weight", "beta", beta)
            }
            WeightProfile::MovingCarleman { mu, r, epsilon, .. } => {
                require_positive("weight", "mu", mu)?;
                require_positive("weight", "r", r)?;
                require_positive("weight", "epsilon", epsilon)
            }
            WeightProfile::LinearExponential { lambda } => {
                if !lambda.is_finite() {
                    return Err(Error::ParameterOutOfRange("weight.lambda".into()));
                }
                Ok(())
            }
            WeightProfile::TruncatedGaussian { gamma, truncation_radius, mollification_radius } => {
                require_positive("weight", "gamma", gamma)?;
                require_positive("weight", "truncation_radius", truncation_radius)?;
                require_positive("weight", "mollification_radius", mollification_radius)
            }
            WeightProfile::RegularizedConvex { gamma, a_exponent, mollification_radius } => {
                require_positive("weight", "gamma", gamma)?;
                if !(a_exponent > 0.0 && a_exponent < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "weight.a_exponent must lie in (0,1), got {a_exponent}"
                    )));
                }
                if !(mollification_radius > 0.0 && mollification_radius < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "weight.mollification_radius must lie in (0,1), got {mollification_radius}"
                    )));
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Mollifier kernel: theta(s) = C exp(-1/(1-s^2)) on (-1,1), unit mass.
// theta_rho(y) = theta(y/rho)/rho.
// ---------------------------------------------------------------------------

fn kernel_raw(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn kernel_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| adaptive_simpson(&kernel_raw, -1.0, 1.0, 1e-15))
}

/// Normalized kernel value.
pub fn mollifier(s: f64) -> f64 {
    kernel_raw(s) / kernel_mass()
}

/// Second derivative of the normalized kernel (closed form).
pub fn mollifier_second_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - s * s;
    // q = -1/u, q' = -2s/u^2, q'' = -(2u + 8s^2)/u^3; theta'' = (q'' + q'^2) theta
    let q1 = -2.0 * s / (u * u);
    let q2 = -(2.0 * u + 8.0 * s * s) / (u * u * u);
    (q2 + q1 * q1) * mollifier(s)
}

/// Second moment `∫ s^2 theta(s) ds` of the normalized kernel; the
/// mollification of `x^2` is `x^2 + m2 ρ^2`.
pub fn kernel_second_moment() -> f64 {
    static M2: OnceLock<f64> = OnceLock::new();
    *M2.get_or_init(|| adaptive_simpson(&|s| s * s * kernel_raw(s), -1.0, 1.0, 1e-15) / kernel_mass())
}

/// `(theta_rho * phi)(x)` where `phi` is piecewise smooth with kinks at the
/// given locations. The s-integral is split at every kink so each piece is
/// smooth and the adaptive rule converges fast.
fn mollified_value(phi: &dyn Fn(f64) -> f64, kinks: &[f64], rho: f64, x: f64) -> f64 {
    let mut cuts = vec![-1.0, 1.0];
    for &k in kinks {
        let s = (x - k) / rho;
        if s.abs() < 1.0 {
            cuts.push(s);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] - w[0] > 1e-14 {
            total += adaptive_simpson(&|s| mollifier(s) * phi(x - rho * s), w[0], w[1], 1e-14);
        }
    }
    total
}

fn phi_truncated(radius: f64, y: f64) -> f64 {
    if y.abs() <= radius {
        y * y
    } else {
        radius * radius
    }
}

fn phi_convex(a: f64, y: f64) -> f64 {
    let r = y.abs();
    if r < 1.0 {
        r * r
    } else {
        (2.0 * r.powf(2.0 - a) - a) / (2.0 - a)
    }
}

fn phi_convex_second(a: f64, y: f64) -> f64 {
    let r = y.abs();
    if r < 1.0 {
        2.0
    } else {
        2.0 * (1.0 - a) * r.powf(-a)
    }
}

/// The exponent of the weight at `(x, t)` — not its exponential.
pub fn evaluate_phase(profile: &WeightProfile, x: f64, t: f64) -> Result<f64> {
    match *profile {
        WeightProfile::StaticGaussian { gamma } => Ok(gamma * x * x),
        WeightProfile::RiccatiDecay { gamma, a_coef, b_coef } => {
            let denom = a_coef + 4.0 * gamma * (a_coef * a_coef + b_coef * b_coef) * t;
            if denom <= 0.0 {
                return Err(Error::ParameterOutOfRange(format!(
                    "weight.riccati_decay time {t} outside the positive-denominator range"
                )));
            }
            Ok(gamma * a_coef * x * x / denom)
        }
        WeightProfile::TimeInterpolated { alpha, beta } => {
            let denom = alpha * t + (1.0 - t) * beta;
            if denom <= 0.0 {
                return Err(Error::ParameterOutOfRange(format!(
                    "weight.time_interpolated time {t} gives nonpositive denominator"
                )));
            }
            Ok(x * x / (denom * denom))
        }
        WeightProfile::MovingCarleman { mu, r, epsilon, operator } => {
            let shift = x + r * t * (1.0 - t);
            let mut phase =
                mu * shift * shift - (1.0 + epsilon) * r * r * t * (1.0 - t) / (16.0 * mu);
            if operator == CarlemanOperator::Parabolic {
                phase += r * r * t * (1.0 - t) * (1.0 - 2.0 * t) / 6.0;
            }
            Ok(phase)
        }
        WeightProfile::LinearExponential { lambda } => Ok(lambda * x),
        WeightProfile::TruncatedGaussian { gamma, truncation_radius, mollification_radius } => {
            let rho = mollification_radius;
            let rw = truncation_radius;
            if x.abs() > rw + rho {
                // Kernel support never reaches the quadratic region.
                return Ok(gamma * rw * rw);
            }
            Ok(gamma * mollified_value(&|y| phi_truncated(rw, y), &[-rw, rw], rho, x))
        }
        WeightProfile::RegularizedConvex { gamma, a_exponent, mollification_radius } => Ok(
            gamma
                * mollified_value(
                    &|y| phi_convex(a_exponent, y),
                    &[-1.0, 1.0],
                    mollification_radius,
                    x,
                ),
        ),
    }
}

/// Outcome of a weighted norm: the value, the boundary-to-peak integrand
/// ratio, and whether the tail check passed (`tail_ratio < 1e-10`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNormReport {
    pub value: f64,
    pub tail_ratio: f64,
    pub converged: bool,
}

pub const TAIL_THRESHOLD: f64 = 1e-10;

/// Samples below `NOISE_FLOOR * max|u|` are treated as unresolved: a field
/// that has passed through FFTs carries roundoff of this order everywhere,
/// and a quadratic-exponential weight would amplify that noise past any
/// signal. The tail beyond the resolved region is handled by the shoulder
/// extrapolation below.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Least-squares fit of `ln|u| ~ c0 - r x^2` over the given samples.
fn quadratic_decay_fit(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    if samples.len() < 8 {
        return None;
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|(x, _)| x * x).sum::<f64>() / n;
    let my = samples.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|(x, _)| (x * x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = samples
        .iter()
        .map(|(x, y)| (x * x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Some((intercept, -slope)) // (c0, r)
}

/// Log of `∫_a^b exp(2 phase(x,t) + 2 c0 - 2 r x^2) dx` under the fitted
/// decay model.
fn modeled_tail_log_integral(
    profile: &WeightProfile,
    t: f64,
    c0: f64,
    r: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    let n = 1500;
    let h = (b - a) / n as f64;
    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let x = a + (i as f64 + 0.5) * h;
        let lt = 2.0 * evaluate_phase(profile, x, t)? + 2.0 * (c0 - r * x * x);
        if lt > max_term {
            max_term = lt;
        }
        terms.push(lt);
    }
    if max_term == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = terms.iter().map(|lt| (lt - max_term).exp()).sum();
    Ok(max_term + sum.ln() + h.ln())
}

/// `‖e^{phase(·,t)} field‖` by the rectangle rule over the resolved samples,
/// evaluated in log space so large phases cannot overflow intermediate sums.
///
/// Tail dominance: when the resolved region ends before the boundary, the
/// field's quadratic decay rate is fitted on the outer resolved shoulder and
/// extrapolated to the boundary. The reported `tail_ratio` compares that
/// extrapolated boundary integrand against the resolved peak, and the
/// modeled tail is added to the quadrature so slowly decaying tails are not
/// silently dropped. Without a usable shoulder the raw boundary cells are
/// used, with the noise floor substituted for unresolved samples (so the
/// check errs toward "not converged").
pub fn weighted_l2_norm(
    field: &ComplexField,
    profile: &WeightProfile,
    t: f64,
) -> Result<WeightedNormReport> {
    profile.validate()?;
    let grid = field.grid();
    let n = grid.points();
    let vals = field.values();
    let max_abs = field.max_abs();
    if max_abs == 0.0 {
        return Ok(WeightedNormReport { value: 0.0, tail_ratio: 0.0, converged: true });
    }
    let floor = max_abs * NOISE_FLOOR;
    let jl = vals.iter().position(|v| v.norm() >= floor).expect("max above floor");
    let jr = vals.iter().rposition(|v| v.norm() >= floor).expect("max above floor");

    let mut log_terms = Vec::with_capacity(jr - jl + 1);
    let mut max_term = f64::NEG_INFINITY;
    for (j, v) in vals.iter().enumerate().take(jr + 1).skip(jl) {
        let m = v.norm();
        if m < floor {
            continue;
        }
        let lt = 2.0 * evaluate_phase(profile, grid.coord(j), t)? + 2.0 * m.ln();
        if lt > max_term {
            max_term = lt;
        }
        log_terms.push(lt);
    }

    // Shoulder fit per side: outer resolved samples that sit safely above the
    // noise floor, so the fitted rate is not noise-dominated.
    let fit_floor = 30.0 * floor;
    let shoulder = |indices: &mut dyn Iterator<Item = usize>| -> Option<(f64, f64)> {
        let count_cap = (n / 5).clamp(8, 200);
        let pts: Vec<(f64, f64)> = indices
            .filter(|&j| vals[j].norm() >= fit_floor)
            .take(count_cap)
            .map(|j| (grid.coord(j), vals[j].norm().ln()))
            .collect();
        quadratic_decay_fit(&pts).filter(|&(_, r)| r.is_finite())
    };

    let x_left = grid.coord(0);
    let x_right = grid.coord(n - 1);
    let mut modeled: Vec<f64> = Vec::new();
    let mut boundary_log = f64::NEG_INFINITY;
    if jl == 0 || jr == n - 1 {
        // Resolved data reaches the boundary: judge it directly.
        for j in [0, n - 1] {
            let m = vals[j].norm();
            if m > 0.0 {
                let lt = 2.0 * evaluate_phase(profile, grid.coord(j), t)? + 2.0 * m.ln();
                boundary_log = boundary_log.max(lt);
            }
        }
    } else {
        let left_fit = shoulder(&mut (jl..=jr));
        let right_fit = shoulder(&mut (jl..=jr).rev());
        match (left_fit, right_fit) {
            (Some((c0l, rl)), Some((c0r, rr))) if rl > 0.0 && rr > 0.0 => {
                let el = 2.0 * evaluate_phase(profile, x_left, t)?
                    + 2.0 * (c0l - rl * x_left * x_left);
                let er = 2.0 * evaluate_phase(profile, x_right, t)?
                    + 2.0 * (c0r - rr * x_right * x_right);
                boundary_log = el.max(er);
                // The rectangle rule covers half a cell past the outermost
                // resolved samples; start the modeled tails there.
                let half = 0.5 * grid.spacing();
                modeled.push(modeled_tail_log_integral(
                    profile,
                    t,
                    c0l,
                    rl,
                    x_left,
                    grid.coord(jl) - half,
                )?);
                modeled.push(modeled_tail_log_integral(
                    profile,
                    t,
                    c0r,
                    rr,
                    grid.coord(jr) + half,
                    x_right,
                )?);
            }
            _ => {
                // No trustworthy decay model: substitute the noise floor for
                // the unresolved boundary samples (conservative).
                for x in [x_left, x_right] {
                    let lt = 2.0 * evaluate_phase(profile, x, t)? + 2.0 * floor.ln();
                    boundary_log = boundary_log.max(lt);
                }
            }
        }
    }

    let tail_ratio = (boundary_log - max_term).exp();
    let mut log_sq_terms: Vec<f64> = vec![
        max_term
            + log_terms
                .iter()
                .map(|lt| (lt - max_term).exp())
                .sum::<f64>()
                .ln()
            + grid.spacing().ln(),
    ];
    log_sq_terms.extend(modeled.into_iter().filter(|v| v.is_finite()));
    let peak = log_sq_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sq = peak
        + log_sq_terms
            .iter()
            .map(|v| (v - peak).exp())
            .sum::<f64>()
            .ln();
    Ok(WeightedNormReport {
        value: (0.5 * log_sq).exp(),
        tail_ratio,
        converged: tail_ratio < TAIL_THRESHOLD,
    })
}

/// Strict-mode weighted norm: errors out when the tail check fails.
pub fn weighted_l2_norm_strict(
    field: &ComplexField,
    profile: &WeightProfile,
    t: f64,
) -> Result<f64> {
    let report = weighted_l2_norm(field, profile, t)?;
    if !report.converged {
        return Err(Error::WeightedNormDivergent(format!(
            "tail ratio {:.3e} >= {TAIL_THRESHOLD:.0e}",
            report.tail_ratio
        )));
    }
    Ok(report.value)
}

/// Verifies the Gaussian averaging identity
/// `∫ e^{2 sqrt(γ) λ x - λ^2/2} dλ = sqrt(2π) e^{2 γ x^2}` by adaptive
/// quadrature at each sample point; returns the worst relative error.
pub fn gaussian_average_identity_check(gamma: f64, x_samples: &[f64]) -> Result<f64> {
    require_positive("weight", "gamma", gamma)?;
    let mut worst: f64 = 0.0;
    for &x in x_samples {
        let center = 2.0 * gamma.sqrt() * x;
        let exact = (2.0 * std::f64::consts::PI).sqrt() * (2.0 * gamma * x * x).exp();
        let lhs = adaptive_simpson(
            &|lam: f64| (2.0 * gamma.sqrt() * lam * x - 0.5 * lam * lam).exp(),
            center - 50.0,
            center + 50.0,
            1e-13 * exact,
        );
        worst = worst.max((lhs - exact).abs() / exact);
    }
    Ok(worst)
}

/// Sup of |d^4/dx^4 (theta_rho * phi_a)| on a fine grid. The fourth
/// derivative equals `theta_rho'' * phi_a''`, where `phi_a''` jumps by `-2a`
/// across |x| = 1, so the bound scales linearly in `a`.
pub fn mollified_bilaplacian_bound(a_exponent: f64, rho: f64) -> Result<f64> {
    if !(a_exponent > 0.0 && a_exponent < 1.0) {
        return Err(Error::ParameterOutOfRange("weight.a_exponent".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::ParameterOutOfRange("weight.mollification_radius".into()));
    }
    let fourth = |x: f64| -> f64 {
        let mut cuts = vec![-1.0f64, 1.0];
        for k in [-1.0, 1.0] {
            let s = (x - k) / rho;
            if s.abs() < 1.0 {
                cuts.push(s);
            }
        }
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            if w[1] - w[0] > 1e-14 {
                total += adaptive_simpson(
                    &|s| mollifier_second_derivative(s) * phi_convex_second(a_exponent, x - rho * s),
                    w[0],
                    w[1],
                    1e-13,
                );
            }
        }
        total / (rho * rho)
    };
    // By symmetry it is enough to scan x >= 0; the interesting zone is the
    // mollified annulus around |x| = 1.
    let x_max = 1.0 + rho + 1.0;
    let n = 1600;
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let x = x_max * i as f64 / n as f64;
        sup = sup.max(fourth(x).abs());
    }
    Ok(sup)
}
