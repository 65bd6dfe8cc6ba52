//! Gaussian decay-rate fitting and the two-time decay thresholds: the
//! product `αβ/(4T)` for the free Schrödinger flow (never below 1 for
//! nonzero data; equality on the extremal Gaussians) and the heat-flow
//! finiteness boundary `δ*(c) = 1/sqrt(c/(1+4c))`, always above 2.
//!
//! Uniqueness itself is not a computable number: what the experiments show
//! is that the forbidden region is an unreachable boundary.

use serde::Serialize;

use crate::analytic::{evolve_gaussian, gaussian_weighted_norm, GaussianState};
use crate::error::{Error, Result};
use crate::grid::ComplexField;

/// Best-fit Gaussian decay rate of `|u| ~ C e^{-rate x^2}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    /// RMS residual of the linear fit of `log|u|` against `x^2`.
    pub residual: f64,
    /// `|x|` range actually used.
    pub window: (f64, f64),
    /// Residual small enough that the Gaussian model is credible.
    pub gaussian_like: bool,
}

/// Threshold below which the fit flags a non-Gaussian tail.
const GAUSSIAN_RESIDUAL_FLAG: f64 = 1e-3;

/// Least-squares fit of `log|u|` against `x^2` over samples above
/// `1e-12 · max|u|` and away from the outer 10% of the domain (tail
/// truncation contaminates both).
pub fn fit_decay(field: &ComplexField) -> Result<DecayFit> {
    let grid = field.grid();
    let max = field.max_abs();
    if max == 0.0 {
        return Err(Error::InsufficientSamples { got: 0, need: 8 });
    }
    let floor = 1e-12 * max;
    let x_cut = 0.9 * grid.half_width();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut window: (f64, f64) = (f64::INFINITY, 0.0);
    for (j, v) in field.values().iter().enumerate() {
        let x = grid.coord(j);
        let m = v.norm();
        if m > floor && x.abs() < x_cut {
            pts.push((x * x, m.ln()));
            window.0 = window.0.min(x.abs());
            window.1 = window.1.max(x.abs());
        }
    }
    if pts.len() < 8 {
        return Err(Error::InsufficientSamples { got: pts.len(), need: 8 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|(x, _)| *x).sum::<f64>() / n;
    let my = pts.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        residual,
        window,
        gaussian_like: residual < GAUSSIAN_RESIDUAL_FLAG,
    })
}

/// The two fitted decay scales and their normalized product.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyProduct {
    /// Terminal decay scale `α = 1/sqrt(rate_T)`.
    pub alpha: f64,
    /// Initial decay scale `β = 1/sqrt(rate_0)`.
    pub beta: f64,
    /// `αβ/(4T)`; below 1 is the forbidden region, reachable only by the
    /// zero solution (or numerical noise).
    pub normalized_product: f64,
    pub initial_fit: DecayFit,
    pub terminal_fit: DecayFit,
}

/// Fits both time slices and forms `αβ/(4T)`.
pub fn hardy_product(u0: &ComplexField, u_t: &ComplexField, t_final: f64) -> Result<HardyProduct> {
    if !(t_final > 0.0) {
        return Err(Error::ParameterOutOfRange("hardy.T must be positive".into()));
    }
    let initial_fit = fit_decay(u0)?;
    let terminal_fit = fit_decay(u_t)?;
    if !(initial_fit.rate > 0.0 && terminal_fit.rate > 0.0) {
        return Err(Error::ParameterOutOfRange(
            "hardy.fitted rates must be positive".into(),
        ));
    }
    let beta = 1.0 / initial_fit.rate.sqrt();
    let alpha = 1.0 / terminal_fit.rate.sqrt();
    Ok(HardyProduct {
        alpha,
        beta,
        normalized_product: alpha * beta / (4.0 * t_final),
        initial_fit,
        terminal_fit,
    })
}

/// Finiteness verdict for `‖e^{x²/δ²} u(1)‖` after one unit of heat flow.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeatThresholdVerdict {
    pub delta: f64,
    pub finite: bool,
    /// The exact finiteness boundary `1/sqrt(Re c(1))`.
    pub boundary_delta: f64,
}

/// Evolves the Gaussian datum one unit of heat time and reports whether the
/// `e^{x²/δ²}`-weighted norm of the result is finite (closed-form threshold
/// `Re c(1) > 1/δ²`).
pub fn heat_threshold_experiment(c0: &GaussianState, delta: f64) -> Result<HeatThresholdVerdict> {
    if !(delta > 0.0) {
        return Err(Error::ParameterOutOfRange("hardy.delta".into()));
    }
    let evolved = evolve_gaussian(c0, 1.0, 0.0, 1.0)?;
    let finite = gaussian_weighted_norm(&evolved, 1.0 / (delta * delta))
        .finite()
        .is_some();
    Ok(HeatThresholdVerdict {
        delta,
        finite,
        boundary_delta: 1.0 / evolved.c.re.sqrt(),
    })
}

/// Locates the finiteness boundary in `δ` by bisecting the weighted-norm
/// verdict of the evolved state. Converges to `1/sqrt(Re c(1))`.
pub fn heat_boundary_scan(c0: &GaussianState, tol: f64) -> Result<f64> {
    let evolved = evolve_gaussian(c0, 1.0, 0.0, 1.0)?;
    let diverges = |delta: f64| {
        gaussian_weighted_norm(&evolved, 1.0 / (delta * delta)).is_divergent()
    };
    // The boundary always sits above 2 for heat flow; bracket it widely.
    let mut lo = 1e-3;
    let mut hi = 1e4;
    if !diverges(lo) || diverges(hi) {
        return Err(Error::ParameterOutOfRange(
            "hardy.scan bracket does not straddle the boundary".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if diverges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
