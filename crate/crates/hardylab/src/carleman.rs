//! Quadrature verification of the two moving-weight Carleman inequalities
//! (Schrödinger and parabolic) on compactly supported smooth test fields,
//! plus the cutoff construction and the admissible parameter window.
//!
//! For `ε, μ, R > 0` and smooth compactly supported `g`, with the weight
//! `W = e^{μ(x+Rt(1-t))^2 - (1+ε)R^2 t(1-t)/(16μ)}` (the parabolic variant
//! adds `R^2 t(1-t)(1-2t)/6` to the exponent):
//!
//! ```text
//! R sqrt(ε/(8μ)) ‖W g‖_{L^2(x,t)} <= ‖W (∂_t - iΔ) g‖_{L^2(x,t)}   (Schrödinger)
//! R sqrt(ε/(8μ)) ‖W g‖_{L^2(x,t)} <= ‖W (∂_t - Δ) g‖_{L^2(x,t)}   (parabolic)
//! ```
//!
//! All derivatives on the Carleman side are closed-form (bump derivatives
//! and weight gradients), never finite differences on the exponentially
//! weighted product: the weight amplifies discretization noise, and it is
//! the inequality that must be tested, not the discretization. The
//! transverse-gradient term of the commutator expansion is empty in one
//! dimension; the `|i∂_x f - R(1-2t)f/2|^2` square carries the gradient.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, SpaceTimeField};
use crate::weight::CarlemanOperator;

/// Default per-axis quadrature resolution on a bump's support (4x the
/// 64-point base resolution).
pub const DEFAULT_BUMP_RESOLUTION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlemanConfig {
    pub mu: f64,
    pub epsilon: f64,
    pub r: f64,
    pub operator: CarlemanOperator,
}

impl CarlemanConfig {
    pub fn new(mu: f64, epsilon: f64, r: f64, operator: CarlemanOperator) -> Result<Self> {
        if !(mu > 0.0 && epsilon > 0.0 && r > 0.0) {
            return Err(Error::ParameterOutOfRange(
                "carleman.mu, epsilon, r must be positive".into(),
            ));
        }
        Ok(Self { mu, epsilon, r, operator })
    }

    /// Weight exponent at `(x, t)`.
    pub fn phase(&self, x: f64, t: f64) -> f64 {
        let p = self.r * t * (1.0 - t);
        let shift = x + p;
        let mut phase = self.mu * shift * shift
            - (1.0 + self.epsilon) * self.r * self.r * t * (1.0 - t) / (16.0 * self.mu);
        if self.operator == CarlemanOperator::Parabolic {
            phase += self.r * self.r * t * (1.0 - t) * (1.0 - 2.0 * t) / 6.0;
        }
        phase
    }

    /// For uniqueness-style runs the pair `(μ, ε)` must fall inside the
    /// window for the given weight rate `γ`.
    pub fn validate_window(&self, gamma: f64) -> Result<()> {
        match parameter_window(gamma, self.epsilon)? {
            Some((lo, hi)) if self.mu > lo && self.mu <= hi => Ok(()),
            _ => Err(Error::ParameterOutOfRange(format!(
                "carleman.mu = {} outside the admissible window for gamma = {gamma}, epsilon = {}",
                self.mu, self.epsilon
            ))),
        }
    }
}

/// Admissible interval `( (1+ε)^{3/2} / (2(1-ε)^3), γ/(1+ε) ]` for `μ`, or
/// `None` when it is empty.
pub fn parameter_window(gamma: f64, epsilon: f64) -> Result<Option<(f64, f64)>> {
    if !(gamma > 0.0) {
        return Err(Error::ParameterOutOfRange("carleman.gamma".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParameterOutOfRange(
            "carleman.epsilon must lie in (0,1) for the window".into(),
        ));
    }
    let lower = (1.0 + epsilon).powf(1.5) / (2.0 * (1.0 - epsilon).powi(3));
    let upper = gamma / (1.0 + epsilon);
    Ok(if lower < upper { Some((lower, upper)) } else { None })
}

/// Minimum of the Schrödinger weight phase over the concentration region
/// `|x| <= ε(1-ε)^2 R/4`, `t ∈ [(1-ε)/2, (1+ε)/2]`, together with the
/// algebraic lower bound `R^2 (4μ^2(1-ε)^6 - (1+ε)^3) / (16μ)`. Positivity
/// of the algebraic expression forces positivity of the phase minimum.
pub fn concentration_phase_bound(mu: f64, epsilon: f64, r: f64) -> (f64, f64) {
    let cfg = CarlemanConfig { mu, epsilon, r, operator: CarlemanOperator::Schrodinger };
    let x_max = epsilon * (1.0 - epsilon).powi(2) * r / 4.0;
    let mut phase_min = f64::INFINITY;
    let n = 80;
    for i in 0..=n {
        let x = -x_max + 2.0 * x_max * i as f64 / n as f64;
        for j in 0..=n {
            let t = 0.5 * (1.0 - epsilon) + epsilon * j as f64 / n as f64;
            phase_min = phase_min.min(cfg.phase(x, t));
        }
    }
    let algebraic = r * r
        * (4.0 * mu * mu * (1.0 - epsilon).powi(6) - (1.0 + epsilon).powi(3))
        / (16.0 * mu);
    (phase_min, algebraic)
}

/// Smooth compactly supported space-time test field: a product of bump
/// profiles `e^{1 - 1/(1-s^2)}` with an optional plane-wave modulation.
/// All derivatives are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpField {
    pub center_x: f64,
    pub width_x: f64,
    pub center_t: f64,
    pub width_t: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    /// Spatial modulation wave number.
    pub wave_number: f64,
    /// Temporal modulation frequency.
    pub omega: f64,
}

fn bump_profile(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn bump_profile_d1(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - s * s;
    (-2.0 * s / (u * u)) * bump_profile(s)
}

fn bump_profile_d2(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - s * s;
    let q1 = -2.0 * s / (u * u);
    let q2 = -(2.0 + 6.0 * s * s) / (u * u * u);
    (q2 + q1 * q1) * bump_profile(s)
}

impl BumpField {
    /// `half_width` is the spatial domain bound; the support must sit
    /// strictly inside it and inside `(0, 1)` in time.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        center_x: f64,
        width_x: f64,
        center_t: f64,
        width_t: f64,
        amplitude: Complex64,
        wave_number: f64,
        omega: f64,
        half_width: f64,
    ) -> Result<Self> {
        if !(width_x > 0.0 && width_t > 0.0) {
            return Err(Error::ParameterOutOfRange(
                "carleman.bump widths must be positive".into(),
            ));
        }
        if center_x.abs() + width_x >= half_width {
            return Err(Error::SupportOutOfDomain(format!(
                "bump spatial support [{}, {}] reaches the domain bound {half_width}",
                center_x - width_x,
                center_x + width_x
            )));
        }
        if center_t - width_t <= 0.0 || center_t + width_t >= 1.0 {
            return Err(Error::SupportOutOfDomain(format!(
                "bump time support [{}, {}] must sit inside (0, 1)",
                center_t - width_t,
                center_t + width_t
            )));
        }
        Ok(Self {
            center_x,
            width_x,
            center_t,
            width_t,
            amplitude_re: amplitude.re,
            amplitude_im: amplitude.im,
            wave_number,
            omega,
        })
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }

    fn local(&self, x: f64, t: f64) -> (f64, f64) {
        ((x - self.center_x) / self.width_x, (t - self.center_t) / self.width_t)
    }

    fn modulation(&self, x: f64, t: f64) -> Complex64 {
        Complex64::new(0.0, self.wave_number * x + self.omega * t).exp()
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        let (sx, st) = self.local(x, t);
        self.amplitude() * bump_profile(sx) * bump_profile(st) * self.modulation(x, t)
    }

    /// Closed-form `∂_t g`.
    pub fn dt(&self, x: f64, t: f64) -> Complex64 {
        let (sx, st) = self.local(x, t);
        let env_dt = bump_profile(sx) * bump_profile_d1(st) / self.width_t;
        self.amplitude()
            * (env_dt + Complex64::new(0.0, self.omega) * bump_profile(sx) * bump_profile(st))
            * self.modulation(x, t)
    }

    /// Closed-form `∂_x g`.
    pub fn dx(&self, x: f64, t: f64) -> Complex64 {
        let (sx, st) = self.local(x, t);
        self.amplitude()
            * (bump_profile_d1(sx) / self.width_x
                + Complex64::new(0.0, self.wave_number) * bump_profile(sx))
            * bump_profile(st)
            * self.modulation(x, t)
    }

    /// Closed-form `Δ g`.
    pub fn laplacian(&self, x: f64, t: f64) -> Complex64 {
        let (sx, st) = self.local(x, t);
        let k = self.wave_number;
        let b = bump_profile(sx);
        let b1 = bump_profile_d1(sx) / self.width_x;
        let b2 = bump_profile_d2(sx) / (self.width_x * self.width_x);
        self.amplitude()
            * (b2 + 2.0 * Complex64::new(0.0, k) * b1 - k * k * b)
            * bump_profile(st)
            * self.modulation(x, t)
    }

    /// Samples the bump at a fixed time on a grid.
    pub fn sample_slice(&self, grid: Grid, t: f64) -> Result<ComplexField> {
        ComplexField::from_fn(grid, |x| self.value(x, t))
    }

    /// Midpoint tensor quadrature nodes over the support.
    fn quad_nodes(&self, resolution: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let nx = resolution;
        let nt = resolution;
        let hx = 2.0 * self.width_x / nx as f64;
        let ht = 2.0 * self.width_t / nt as f64;
        let xs = (0..nx)
            .map(|i| self.center_x - self.width_x + (i as f64 + 0.5) * hx)
            .collect();
        let ts = (0..nt)
            .map(|j| self.center_t - self.width_t + (j as f64 + 0.5) * ht)
            .collect();
        (xs, ts, hx * ht)
    }

    /// Separable per-axis factors for fast tensor quadrature: spatial
    /// profile with derivatives (modulation folded in) and temporal profile
    /// with its derivative.
    fn separable_factors(&self, xs: &[f64], ts: &[f64]) -> SeparableBump {
        let spatial: Vec<(Complex64, Complex64, Complex64)> = xs
            .iter()
            .map(|&x| {
                let sx = (x - self.center_x) / self.width_x;
                let k = self.wave_number;
                let modulation = Complex64::new(0.0, k * x).exp();
                let b = bump_profile(sx);
                let b1 = bump_profile_d1(sx) / self.width_x;
                let b2 = bump_profile_d2(sx) / (self.width_x * self.width_x);
                let value = self.amplitude() * b * modulation;
                let dx = self.amplitude() * (b1 + Complex64::new(0.0, k) * b) * modulation;
                let lap = self.amplitude()
                    * (b2 + 2.0 * Complex64::new(0.0, k) * b1 - k * k * b)
                    * modulation;
                (value, dx, lap)
            })
            .collect();
        let temporal: Vec<(Complex64, Complex64)> = ts
            .iter()
            .map(|&t| {
                let st = (t - self.center_t) / self.width_t;
                let modulation = Complex64::new(0.0, self.omega * t).exp();
                let b = bump_profile(st);
                let b1 = bump_profile_d1(st) / self.width_t;
                let value = Complex64::from(b) * modulation;
                let dt = (b1 + Complex64::new(0.0, self.omega) * b) * modulation;
                (value, dt)
            })
            .collect();
        SeparableBump { spatial, temporal }
    }
}

/// Cached per-axis bump factors: `g = spatial.0 * temporal.0`,
/// `∂_t g = spatial.0 * temporal.1`, `∂_x g = spatial.1 * temporal.0`,
/// `Δ g = spatial.2 * temporal.0`.
struct SeparableBump {
    spatial: Vec<(Complex64, Complex64, Complex64)>,
    temporal: Vec<(Complex64, Complex64)>,
}

/// Both sides of a Carleman inequality on a test field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CarlemanReport {
    /// `R sqrt(ε/(8μ)) ‖W g‖` (the constant is folded in).
    pub lhs: f64,
    /// `‖W (∂_t - iΔ) g‖` or `‖W (∂_t - Δ) g‖`.
    pub rhs: f64,
    /// `R sqrt(ε/(8μ))`.
    pub constant: f64,
    /// `rhs - lhs`; pass iff `margin >= -1e-8 rhs`.
    pub margin: f64,
}

impl CarlemanReport {
    pub fn pass(&self) -> bool {
        self.margin >= -1e-8 * self.rhs
    }
}

/// Evaluates both sides of the inequality by midpoint tensor quadrature on
/// the bump's own oversampled support grid.
pub fn carleman_check(
    bump: &BumpField,
    cfg: &CarlemanConfig,
    resolution: usize,
) -> Result<CarlemanReport> {
    let (xs, ts, cell) = bump.quad_nodes(resolution);
    let factors = bump.separable_factors(&xs, &ts);
    let mut lhs_sq = 0.0;
    let mut rhs_sq = 0.0;
    for (jt, &t) in ts.iter().enumerate() {
        let (tv, td) = factors.temporal[jt];
        for (jx, &x) in xs.iter().enumerate() {
            let (sv, _, slap) = factors.spatial[jx];
            let w_sq = (2.0 * cfg.phase(x, t)).exp();
            let g = sv * tv;
            let op = match cfg.operator {
                CarlemanOperator::Schrodinger => {
                    sv * td - Complex64::new(0.0, 1.0) * slap * tv
                }
                CarlemanOperator::Parabolic => sv * td - slap * tv,
            };
            lhs_sq += w_sq * g.norm_sqr();
            rhs_sq += w_sq * op.norm_sqr();
        }
    }
    lhs_sq *= cell;
    rhs_sq *= cell;
    let constant = cfg.r * (cfg.epsilon / (8.0 * cfg.mu)).sqrt();
    let lhs = constant * lhs_sq.sqrt();
    let rhs = rhs_sq.sqrt();
    Ok(CarlemanReport { lhs, rhs, constant, margin: rhs - lhs })
}

/// Termwise and direct evaluations of the commutator quadratic form on
/// `f = e^{phase} g`, with the lower-bound slack.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionReport {
    /// Sum of the completed squares.
    pub termwise: f64,
    /// `(S_t f + [S,A] f, f)` by direct operator application.
    pub direct: f64,
    /// `ε R^2/(8μ) ∫∫ |f|^2`.
    pub lower_bound_term: f64,
    /// `termwise - lower_bound_term` (a sum of squares, nonnegative).
    pub slack: f64,
    /// `|termwise - direct| / max(|termwise|, tiny)`.
    pub relative_gap: f64,
}

/// Checks the commutator expansion `(S_t f + [S,A] f, f) >= εR^2/(8μ) ∫|f|^2`
/// two ways: termwise through the completed squares and directly through the
/// second-order operator, both with analytic derivatives of `f = e^{phase} g`.
pub fn commutator_expansion_check(
    bump: &BumpField,
    cfg: &CarlemanConfig,
    resolution: usize,
) -> Result<ExpansionReport> {
    let (xs, ts, cell) = bump.quad_nodes(resolution);
    let factors = bump.separable_factors(&xs, &ts);
    let mu = cfg.mu;
    let r = cfg.r;
    let eps = cfg.epsilon;
    let mut termwise = 0.0;
    let mut direct = 0.0;
    let mut mass = 0.0;
    for (jt, &t) in ts.iter().enumerate() {
        let p = r * t * (1.0 - t);
        let one_minus_2t = 1.0 - 2.0 * t;
        let (tv, _) = factors.temporal[jt];
        for (jx, &x) in xs.iter().enumerate() {
            let shift = x + p;
            let w = cfg.phase(x, t).exp();
            let (sv, sdx, slap) = factors.spatial[jx];
            let g = sv * tv;
            let gx = sdx * tv;
            let gxx = slap * tv;
            // f = e^phase g and its spatial derivatives; the phase gradient
            // is 2μ(x+P) for both operators.
            let phx = 2.0 * mu * shift;
            let f = w * g;
            let fx = w * (phx * g + gx);
            let fxx = w * ((2.0 * mu + phx * phx) * g + 2.0 * phx * gx + gxx);
            let f_sq = f.norm_sqr();
            mass += f_sq;

            match cfg.operator {
                CarlemanOperator::Schrodinger => {
                    let centered = shift - r / (16.0 * mu * mu);
                    let grad_sq = (Complex64::new(0.0, 1.0) * fx
                        - 0.5 * r * one_minus_2t * f)
                        .norm_sqr();
                    termwise += 32.0 * mu.powi(3) * centered * centered * f_sq
                        + eps * r * r / (8.0 * mu) * f_sq
                        + 8.0 * mu * grad_sq;
                    // S_t + [S,A] = -8μΔ + 32μ^3 (x+P)^2 - 4μR(x+P)
                    //   + 2μR^2(1-2t)^2 + (1+ε)R^2/(8μ) - 8iμR(1-2t)∂_x
                    let opf = -8.0 * mu * fxx
                        + (32.0 * mu.powi(3) * shift * shift - 4.0 * mu * r * shift
                            + 2.0 * mu * r * r * one_minus_2t * one_minus_2t
                            + (1.0 + eps) * r * r / (8.0 * mu))
                            * f
                        - Complex64::new(0.0, 8.0 * mu * r * one_minus_2t) * fx;
                    direct += (opf * f.conj()).re;
                }
                CarlemanOperator::Parabolic => {
                    let centered = shift + (4.0 * mu * one_minus_2t - 1.0) * r / (16.0 * mu * mu);
                    termwise += 32.0 * mu.powi(3) * centered * centered * f_sq
                        + eps * r * r / (8.0 * mu) * f_sq
                        + 8.0 * mu * fx.norm_sqr();
                    // S_t + [S,A] = -8μΔ + 32μ^3 (x+P)^2 + 2μR^2(1-2t)^2
                    //   + 4μR(4μ(1-2t)-1)(x+P) + (2t-1)R^2 + (1+ε)R^2/(8μ)
                    let opf = -8.0 * mu * fxx
                        + (32.0 * mu.powi(3) * shift * shift
                            + 2.0 * mu * r * r * one_minus_2t * one_minus_2t
                            + 4.0 * mu * r * (4.0 * mu * one_minus_2t - 1.0) * shift
                            + (2.0 * t - 1.0) * r * r
                            + (1.0 + eps) * r * r / (8.0 * mu))
                            * f;
                    direct += (opf * f.conj()).re;
                }
            }
        }
    }
    termwise *= cell;
    direct *= cell;
    mass *= cell;
    let lower_bound_term = eps * r * r / (8.0 * mu) * mass;
    Ok(ExpansionReport {
        termwise,
        direct,
        lower_bound_term,
        slack: termwise - lower_bound_term,
        relative_gap: (termwise - direct).abs() / termwise.abs().max(1e-300),
    })
}

/// One row of a seeded inequality sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub bump_index: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub r: f64,
    pub operator: CarlemanOperator,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Deterministic seeded family of modulated bumps.
pub fn random_bumps(seed: u64, count: usize, half_width: f64) -> Vec<BumpField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let width_x = rng.gen_range(0.5..2.0);
            let center_x = rng.gen_range(-2.0..2.0);
            let width_t = rng.gen_range(0.15..0.3);
            let center_t = rng.gen_range(0.4..0.6);
            let modulus = rng.gen_range(0.5..2.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let wave_number = rng.gen_range(-3.0..3.0);
            let omega = rng.gen_range(-5.0..5.0);
            BumpField::new(
                center_x,
                width_x,
                center_t,
                width_t,
                Complex64::from_polar(modulus, phase),
                wave_number,
                omega,
                half_width,
            )
            .expect("bump ranges sit inside the domain")
        })
        .collect()
}

/// Runs the inequality over every (bump, μ, ε, R) combination; rows come
/// back in deterministic order regardless of thread count.
pub fn inequality_sweep(
    seed: u64,
    operator: CarlemanOperator,
    mus: &[f64],
    epsilons: &[f64],
    rs: &[f64],
    n_bumps: usize,
    resolution: usize,
) -> Result<Vec<SweepRow>> {
    let bumps = random_bumps(seed, n_bumps, 20.0);
    let mut combos = Vec::new();
    for (bi, bump) in bumps.iter().enumerate() {
        for &mu in mus {
            for &epsilon in epsilons {
                for &r in rs {
                    combos.push((bi, *bump, mu, epsilon, r));
                }
            }
        }
    }
    combos
        .into_par_iter()
        .map(|(bi, bump, mu, epsilon, r)| {
            let cfg = CarlemanConfig::new(mu, epsilon, r, operator)?;
            let report = carleman_check(&bump, &cfg, resolution)?;
            Ok(SweepRow {
                bump_index: bi,
                mu,
                epsilon,
                r,
                operator,
                lhs: report.lhs,
                rhs: report.rhs,
                margin: report.margin,
                pass: report.pass(),
            })
        })
        .collect()
}

/// Smooth-step transition built from `q(s) = e^{-1/s}`: 0 for `s <= 0`,
/// 1 for `s >= 1`.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let q = (-1.0 / s).exp();
        let qb = (-1.0 / (1.0 - s)).exp();
        q / (q + qb)
    }
}

fn q_fn(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn q_d1(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        q_fn(s) / (s * s)
    }
}

fn q_d2(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        q_fn(s) * (1.0 / (s * s * s * s) - 2.0 / (s * s * s))
    }
}

fn smoothstep_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let d = q_fn(s) + q_fn(1.0 - s);
    (q_d1(s) * q_fn(1.0 - s) + q_fn(s) * q_d1(1.0 - s)) / (d * d)
}

fn smoothstep_d2(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let q = q_fn(s);
    let qb = q_fn(1.0 - s);
    let d = q + qb;
    let numer = q_d1(s) * qb + q * q_d1(1.0 - s);
    let numer_d = q_d2(s) * qb - q * q_d2(1.0 - s);
    let d_d = q_d1(s) - q_d1(1.0 - s);
    (numer_d * d - 2.0 * numer * d_d) / (d * d * d)
}

/// The spatial cutoff: 1 for `|x| <= M`, 0 for `|x| >= 2M`, with analytic
/// first and second derivatives.
pub fn spatial_cutoff(m: f64, x: f64) -> (f64, f64, f64) {
    let w = (2.0 * m - x.abs()) / m;
    let sgn = if x >= 0.0 { 1.0 } else { -1.0 };
    (
        smoothstep(w),
        -sgn * smoothstep_d1(w) / m,
        smoothstep_d2(w) / (m * m),
    )
}

/// The temporal cutoff: supported in `(1/(2R), 1 - 1/(2R))`, equal to 1 on
/// `[1/R, 1 - 1/R]`, with analytic derivative.
pub fn temporal_cutoff(r_cut: f64, t: f64) -> (f64, f64) {
    let a = 2.0 * r_cut * t - 1.0;
    let b = 2.0 * r_cut * (1.0 - t) - 1.0;
    let value = smoothstep(a) * smoothstep(b);
    let deriv = 2.0 * r_cut * (smoothstep_d1(a) * smoothstep(b) - smoothstep(a) * smoothstep_d1(b));
    (value, deriv)
}

/// The compactly supported product `θ_M η_R u` together with the equation
/// defect it creates.
#[derive(Debug, Clone)]
pub struct CutoffResult {
    pub product: SpaceTimeField,
    /// `θ_M η' u - i (2 θ_M' ∂_x u + u θ_M'') η` per slice, with analytic
    /// cutoff derivatives and the spectral `∂_x u`.
    pub defect: SpaceTimeField,
}

/// Applies the space and time cutoffs to a sampled evolution.
pub fn cutoff_apply(u: &SpaceTimeField, m: f64, r_cut: f64) -> Result<CutoffResult> {
    let grid = u.grid();
    if 2.0 * m >= grid.half_width() {
        return Err(Error::SupportOutOfDomain(format!(
            "cutoff support 2M = {} reaches the domain bound {}",
            2.0 * m,
            grid.half_width()
        )));
    }
    if r_cut <= 2.0 {
        return Err(Error::SupportOutOfDomain(
            "temporal cutoff needs R_cut > 2 so the plateau exists".into(),
        ));
    }
    let times = u.times();
    if times[0] < 0.0 || times[times.len() - 1] > 1.0 {
        return Err(Error::ParameterOutOfRange(
            "carleman.cutoff expects times within [0, 1]".into(),
        ));
    }
    let mut products = Vec::with_capacity(u.len());
    let mut defects = Vec::with_capacity(u.len());
    for (i, slice) in u.slices().iter().enumerate() {
        let t = times[i];
        let (eta, eta_d) = temporal_cutoff(r_cut, t);
        let ux = crate::grid::spectral_derivative(slice)?;
        let mut prod = Vec::with_capacity(grid.points());
        let mut defect = Vec::with_capacity(grid.points());
        for j in 0..grid.points() {
            let x = grid.coord(j);
            let (theta, theta_d, theta_dd) = spatial_cutoff(m, x);
            let v = slice.values()[j];
            prod.push(theta * eta * v);
            let grad_term = 2.0 * theta_d * ux.values()[j] + v * theta_dd;
            defect.push(theta * eta_d * v - Complex64::new(0.0, 1.0) * grad_term * eta);
        }
        products.push(ComplexField::new(grid, prod)?);
        defects.push(ComplexField::new(grid, defect)?);
    }
    Ok(CutoffResult {
        product: SpaceTimeField::new(grid, times.to_vec(), products)?,
        defect: SpaceTimeField::new(grid, times.to_vec(), defects)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::GaussianState;
    use crate::grid::{l2_norm, uniform_times};
    use approx::assert_relative_eq;

    fn test_bump() -> BumpField {
        BumpField::new(
            0.3,
            1.2,
            0.5,
            0.22,
            Complex64::new(1.0, 0.0),
            1.5,
            -2.0,
            20.0,
        )
        .unwrap()
    }

    #[test]
    fn bump_normalization_and_support() {
        let b = BumpField::new(
            0.0,
            1.0,
            0.5,
            0.2,
            Complex64::new(1.0, 0.0),
            0.0,
            0.0,
            20.0,
        )
        .unwrap();
        assert_relative_eq!(b.value(0.0, 0.5).re, 1.0, max_relative = 1e-14);
        assert_eq!(b.value(1.0, 0.5), Complex64::new(0.0, 0.0));
        assert_eq!(b.value(0.5, 0.7), Complex64::new(0.0, 0.0));
        // Derivatives vanish at the support boundary.
        assert_eq!(b.dx(1.0, 0.5).norm(), 0.0);
        assert!(b.dx(1.0 - 1e-3, 0.5).norm() < 1e-35);
        assert!(b.dt(0.0, 0.7 - 1e-3).norm() < 1e-35);
    }

    #[test]
    fn bump_support_validation() {
        assert!(matches!(
            BumpField::new(19.5, 1.0, 0.5, 0.2, Complex64::new(1.0, 0.0), 0.0, 0.0, 20.0),
            Err(Error::SupportOutOfDomain(_))
        ));
        assert!(matches!(
            BumpField::new(0.0, 1.0, 0.1, 0.2, Complex64::new(1.0, 0.0), 0.0, 0.0, 20.0),
            Err(Error::SupportOutOfDomain(_))
        ));
    }

    #[test]
    fn analytic_laplacian_matches_spectral() {
        // The bump spectrum decays only root-exponentially; a grid tight
        // around the support is needed for a 1e-8 comparison.
        let b = test_bump();
        let grid = Grid::new(4.0, 2048).unwrap();
        let slice = b.sample_slice(grid, 0.52).unwrap();
        let spectral = crate::grid::spectral_laplacian(&slice).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..grid.points() {
            let exact = b.laplacian(grid.coord(j), 0.52);
            num += (spectral.values()[j] - exact).norm_sqr();
            den += exact.norm_sqr();
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-8, "relative laplacian error {rel}");
    }

    #[test]
    fn inequality_holds_on_sample_configs() {
        let b = test_bump();
        for op in [CarlemanOperator::Schrodinger, CarlemanOperator::Parabolic] {
            for r in [1.0, 5.0, 10.0] {
                let cfg = CarlemanConfig::new(1.0, 0.5, r, op).unwrap();
                let report = carleman_check(&b, &cfg, 256).unwrap();
                assert!(
                    report.pass(),
                    "margin {} for {op:?} R={r}",
                    report.margin
                );
                assert!(report.lhs > 0.0 && report.rhs > report.lhs);
            }
        }
    }

    #[test]
    fn zero_amplitude_gives_zero_sides() {
        let b = BumpField::new(
            0.0,
            1.0,
            0.5,
            0.2,
            Complex64::new(0.0, 0.0),
            0.0,
            0.0,
            20.0,
        )
        .unwrap();
        let cfg = CarlemanConfig::new(1.0, 0.5, 5.0, CarlemanOperator::Schrodinger).unwrap();
        let report = carleman_check(&b, &cfg, 64).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.rhs, 0.0);
    }

    #[test]
    fn quadrature_resolution_converged() {
        // Worst sweep corner: largest weight growth over the support.
        let b = BumpField::new(
            2.0,
            2.0,
            0.5,
            0.3,
            Complex64::new(1.0, 0.5),
            3.0,
            5.0,
            20.0,
        )
        .unwrap();
        let cfg = CarlemanConfig::new(2.0, 1.0, 10.0, CarlemanOperator::Schrodinger).unwrap();
        let coarse = carleman_check(&b, &cfg, 256).unwrap();
        let fine = carleman_check(&b, &cfg, 512).unwrap();
        assert_relative_eq!(coarse.lhs, fine.lhs, max_relative = 1e-8);
        assert_relative_eq!(coarse.rhs, fine.rhs, max_relative = 1e-8);
    }

    #[test]
    fn expansion_termwise_matches_direct() {
        let b = test_bump();
        for op in [CarlemanOperator::Schrodinger, CarlemanOperator::Parabolic] {
            let cfg = CarlemanConfig::new(1.0, 0.5, 5.0, op).unwrap();
            let report = commutator_expansion_check(&b, &cfg, 256).unwrap();
            assert!(report.relative_gap < 1e-6, "{op:?} gap {}", report.relative_gap);
            assert!(report.slack >= 0.0);
            assert!(report.termwise >= report.lower_bound_term);
        }
    }

    #[test]
    fn expansion_slack_nonnegative_as_epsilon_shrinks() {
        let b = test_bump();
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            let cfg = CarlemanConfig::new(1.0, eps, 5.0, CarlemanOperator::Schrodinger).unwrap();
            let report = commutator_expansion_check(&b, &cfg, 128).unwrap();
            assert!(report.slack >= 0.0, "slack {} at eps {eps}", report.slack);
        }
    }

    #[test]
    fn parameter_window_values() {
        // gamma = 1, small epsilon: window approaches (1/2, 1].
        let (lo, hi) = parameter_window(1.0, 1e-6).unwrap().unwrap();
        assert!((lo - 0.5).abs() < 1e-5);
        assert!((hi - 1.0).abs() < 1e-5);
        // gamma = 0.4, eps = 0.1: empty (upper 0.364 < lower 0.791).
        let w = parameter_window(0.4, 0.1).unwrap();
        assert!(w.is_none());
        let lower = (1.1f64).powf(1.5) / (2.0 * 0.9f64.powi(3));
        assert_relative_eq!(lower, 0.7913, max_relative = 1e-3);
        // eps = 0.5: lower bound 1.5^{1.5}/0.25 = 7.348; needs gamma > 11.02.
        let (lo5, _) = parameter_window(12.0, 0.5).unwrap().unwrap();
        assert_relative_eq!(lo5, 7.3485, max_relative = 1e-4);
        assert!(parameter_window(11.0, 0.5).unwrap().is_none());
        assert!(parameter_window(11.1, 0.5).unwrap().is_some());
    }

    #[test]
    fn window_collapses_at_gamma_half() {
        // gamma = 1/2 admits no epsilon; slightly above it does.
        for eps in [0.2, 0.1, 0.01, 1e-3, 1e-5] {
            assert!(parameter_window(0.5, eps).unwrap().is_none());
        }
        assert!(parameter_window(0.51, 1e-3).unwrap().is_some());
        let cfg = CarlemanConfig::new(0.505, 1e-3, 5.0, CarlemanOperator::Schrodinger).unwrap();
        assert!(cfg.validate_window(0.51).is_ok());
        assert!(cfg.validate_window(0.4).is_err());
    }

    #[test]
    fn concentration_positivity_predicate() {
        for &mu in &[0.3, 0.6, 1.0, 2.0, 4.0] {
            for &eps in &[0.05, 0.1, 0.3, 0.6] {
                let (phase_min, algebraic) = concentration_phase_bound(mu, eps, 8.0);
                if algebraic > 0.0 {
                    assert!(
                        phase_min > 0.0,
                        "positivity broken at mu={mu} eps={eps}: min {phase_min}, bound {algebraic}"
                    );
                }
            }
        }
    }

    #[test]
    fn cutoff_core_region_identity_and_defect_support() {
        let grid = Grid::new(20.0, 512).unwrap();
        let u0 = GaussianState::real(0.5).unwrap().sample(grid).unwrap();
        let times = uniform_times(0.0, 1.0, 21);
        let u = SpaceTimeField::new(grid, times, vec![u0.clone(); 21]).unwrap();
        let m = 4.0;
        let r_cut = 8.0;
        let result = cutoff_apply(&u, m, r_cut).unwrap();
        for (i, &t) in result.product.times().iter().enumerate() {
            for j in 0..grid.points() {
                let x = grid.coord(j);
                let inside = x.abs() <= m && (1.0 / r_cut..=1.0 - 1.0 / r_cut).contains(&t);
                if inside {
                    assert_eq!(result.product.slice(i).values()[j], u0.values()[j]);
                    assert_eq!(result.defect.slice(i).values()[j], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn cutoff_defect_decays_with_m() {
        let grid = Grid::new(20.0, 1024).unwrap();
        let u0 = GaussianState::real(1.0).unwrap().sample(grid).unwrap();
        let times = uniform_times(0.0, 1.0, 21);
        let u = SpaceTimeField::new(grid, times, vec![u0; 21]).unwrap();
        let norm_at = |m: f64| {
            let result = cutoff_apply(&u, m, 8.0).unwrap();
            // defect norm at the plateau time (only the gradient/annulus part)
            l2_norm(result.defect.slice(10))
        };
        let d1 = norm_at(2.0);
        let d2 = norm_at(4.0);
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!(d1 / d2 >= 1.9, "decay factor {}", d1 / d2);
    }

    #[test]
    fn cutoff_rejects_bad_supports() {
        let grid = Grid::new(20.0, 256).unwrap();
        let u0 = GaussianState::real(1.0).unwrap().sample(grid).unwrap();
        let times = uniform_times(0.0, 1.0, 5);
        let u = SpaceTimeField::new(grid, times, vec![u0; 5]).unwrap();
        assert!(matches!(
            cutoff_apply(&u, 15.0, 8.0),
            Err(Error::SupportOutOfDomain(_))
        ));
        assert!(matches!(
            cutoff_apply(&u, 4.0, 1.5),
            Err(Error::SupportOutOfDomain(_))
        ));
    }

    #[test]
    fn small_sweep_deterministic_and_passing() {
        let rows = inequality_sweep(
            42,
            CarlemanOperator::Schrodinger,
            &[1.0],
            &[0.5],
            &[1.0, 5.0],
            4,
            128,
        )
        .unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.pass));
        let again = inequality_sweep(
            42,
            CarlemanOperator::Schrodinger,
            &[1.0],
            &[0.5],
            &[1.0, 5.0],
            4,
            128,
        )
        .unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.margin.to_bits(), b.margin.to_bits());
        }
    }
}
