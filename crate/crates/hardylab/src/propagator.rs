//! Evolution engines for `∂_t u = (A+iB)(Δu + V u + F)`: exact spectral flow
//! for `V = F = 0` at any coefficient with `A >= 0`, Strang split-step flow
//! for bounded potentials, Duhamel source handling, and the heat-smoothing
//! regularization `u_ε(t) = e^{ε t H} u(t)` with `H = Δ + V₁`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    apply_multiplier, l2_norm, ComplexField, Grid, SpaceTimeField,
};
use crate::quad::{composite_simpson, simpson_weights};
use crate::weight::{weighted_l2_norm_strict, WeightProfile};

/// Default Strang splitting step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Real-valued static potential `V₁(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StaticPotential {
    Constant { value: f64 },
    /// `amplitude · e^{-rate x^2}`.
    GaussianWell { amplitude: f64, rate: f64 },
    /// Per-node samples on the experiment grid.
    Samples { values: Vec<f64> },
}

impl StaticPotential {
    pub fn sample(&self, grid: Grid) -> Result<Vec<f64>> {
        match self {
            StaticPotential::Constant { value } => Ok(vec![*value; grid.points()]),
            StaticPotential::GaussianWell { amplitude, rate } => Ok((0..grid.points())
                .map(|j| {
                    let x = grid.coord(j);
                    amplitude * (-rate * x * x).exp()
                })
                .collect()),
            StaticPotential::Samples { values } => {
                if values.len() != grid.points() {
                    return Err(Error::GridMismatch(format!(
                        "sampled potential has {} values, grid has {} points",
                        values.len(),
                        grid.points()
                    )));
                }
                Ok(values.clone())
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            StaticPotential::Constant { value } => value.abs(),
            StaticPotential::GaussianWell { amplitude, rate: _ } => amplitude.abs(),
            StaticPotential::Samples { values } => {
                values.iter().map(|v| v.abs()).fold(0.0, f64::max)
            }
        }
    }
}

/// Complex-valued time-dependent potential `V₂(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TimePotential {
    Constant { re: f64, im: f64 },
    /// `(re + i·im) · e^{-rate x^2} · cos(omega t)`.
    ModulatedGaussian { re: f64, im: f64, rate: f64, omega: f64 },
}

impl TimePotential {
    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        match *self {
            TimePotential::Constant { re, im } => Complex64::new(re, im),
            TimePotential::ModulatedGaussian { re, im, rate, omega } => {
                Complex64::new(re, im) * (-rate * x * x).exp() * (omega * t).cos()
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            TimePotential::Constant { re, im } => re.hypot(im),
            TimePotential::ModulatedGaussian { re, im, .. } => re.hypot(im),
        }
    }

    pub fn sup_im_abs(&self) -> f64 {
        match *self {
            TimePotential::Constant { im, .. } => im.abs(),
            TimePotential::ModulatedGaussian { im, .. } => im.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    #[default]
    None,
    Static { potential: StaticPotential },
    TimeDependent { potential: TimePotential },
    Sum {
        static_part: StaticPotential,
        time_part: TimePotential,
    },
}

impl PotentialSpec {
    pub fn static_part(&self) -> Option<&StaticPotential> {
        match self {
            PotentialSpec::Static { potential } => Some(potential),
            PotentialSpec::Sum { static_part, .. } => Some(static_part),
            _ => None,
        }
    }

    pub fn time_part(&self) -> Option<&TimePotential> {
        match self {
            PotentialSpec::TimeDependent { potential } => Some(potential),
            PotentialSpec::Sum { time_part, .. } => Some(time_part),
            _ => None,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.static_part().map(|p| p.sup_abs()).unwrap_or(0.0)
            + self.time_part().map(|p| p.sup_abs()).unwrap_or(0.0)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PotentialSpec::None)
    }
}

/// Separable analytic source `F(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `(re + i·im) · e^{-rate x^2} · cos(omega t)`.
    ModulatedGaussian { re: f64, im: f64, rate: f64, omega: f64 },
}

impl SourceSpec {
    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        match *self {
            SourceSpec::ModulatedGaussian { re, im, rate, omega } => {
                Complex64::new(re, im) * (-rate * x * x).exp() * (omega * t).cos()
            }
        }
    }

    pub fn sample(&self, grid: Grid, t: f64) -> Result<ComplexField> {
        ComplexField::from_fn(grid, |x| self.eval(x, t))
    }
}

/// Coefficients, potential, source and declared bounds for the flow
/// `∂_t u = (A+iB)(Δu + Vu + F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub a_coef: f64,
    pub b_coef: f64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    /// Declared sup bound on the static potential; must dominate the samples.
    #[serde(default)]
    pub m1: Option<f64>,
}

impl FlowSpec {
    pub fn free(a_coef: f64, b_coef: f64) -> Self {
        Self { a_coef, b_coef, potential: PotentialSpec::None, source: None, m1: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_coef.is_finite() && self.a_coef >= 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "propagator.A must be nonnegative, got {}",
                self.a_coef
            )));
        }
        if self.a_coef == 0.0 && self.b_coef == 0.0 {
            return Err(Error::ParameterOutOfRange(
                "propagator.(A,B) must not both vanish".into(),
            ));
        }
        if let Some(m1) = self.m1 {
            let actual = self.potential.static_part().map(|p| p.sup_abs()).unwrap_or(0.0);
            if m1 < actual {
                return Err(Error::ParameterOutOfRange(format!(
                    "propagator.m1 = {m1} is below the sampled potential bound {actual}"
                )));
            }
        }
        Ok(())
    }

    /// Declared-or-computed bound on the static potential.
    pub fn static_bound(&self) -> f64 {
        let computed = self.potential.static_part().map(|p| p.sup_abs()).unwrap_or(0.0);
        self.m1.map(|m| m.max(computed)).unwrap_or(computed)
    }

    /// Bound on the whole potential (static plus time-dependent part).
    pub fn total_bound(&self) -> f64 {
        self.static_bound() + self.potential.time_part().map(|p| p.sup_abs()).unwrap_or(0.0)
    }
}

/// `e^{-(A+iB) ξ^2 t}` applied spectrally: the exact flow for `V = F = 0`.
pub fn free_flow(u0: &ComplexField, a_coef: f64, b_coef: f64, t: f64) -> Result<ComplexField> {
    if a_coef < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "propagator.A must be nonnegative, got {a_coef}"
        )));
    }
    if a_coef > 0.0 && t < 0.0 {
        return Err(Error::BackwardDissipative { a: a_coef, t });
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let z = Complex64::new(a_coef, b_coef);
    apply_multiplier(u0, |xi| (-z * xi * xi * t).exp())
}

/// `e^{z (Δ + V₁)} u` for `Re z >= 0`: a single spectral multiplier when no
/// potential is present, Strang splitting with effective step `dt_max`
/// otherwise.
pub fn semigroup_apply(
    u: &ComplexField,
    z: Complex64,
    v1: Option<&StaticPotential>,
    dt_max: f64,
) -> Result<ComplexField> {
    if z.re < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "propagator.z must have Re >= 0, got {z}"
        )));
    }
    if z.norm() == 0.0 {
        return Ok(u.clone());
    }
    match v1 {
        None => apply_multiplier(u, |xi| (-z * xi * xi).exp()),
        Some(pot) => {
            let grid = u.grid();
            let samples = pot.sample(grid)?;
            let steps = (z.norm() / dt_max).ceil().max(1.0) as usize;
            let h = z / steps as f64;
            let kick: Vec<Complex64> =
                samples.iter().map(|v| (0.5 * h * v).exp()).collect();
            let mut cur = u.clone();
            for _ in 0..steps {
                let mut vals = cur.into_values();
                for (v, k) in vals.iter_mut().zip(&kick) {
                    *v *= k;
                }
                cur = ComplexField::new(grid, vals)?;
                cur = apply_multiplier(&cur, |xi| (-h * xi * xi).exp())?;
                let mut vals = cur.into_values();
                for (v, k) in vals.iter_mut().zip(&kick) {
                    *v *= k;
                }
                cur = ComplexField::new(grid, vals)?;
            }
            Ok(cur)
        }
    }
}

/// Relative L2 discrepancy between `e^{(z1+z2)Δ} u0` and `e^{z2Δ} e^{z1Δ} u0`.
pub fn semigroup_identity_check(u0: &ComplexField, z1: Complex64, z2: Complex64) -> Result<f64> {
    if z1.re < 0.0 || z2.re < 0.0 {
        return Err(Error::ParameterOutOfRange(
            "propagator.z1, z2 must have Re >= 0".into(),
        ));
    }
    let combined = semigroup_apply(u0, z1 + z2, None, DEFAULT_DT)?;
    let staged = semigroup_apply(&semigroup_apply(u0, z1, None, DEFAULT_DT)?, z2, None, DEFAULT_DT)?;
    let diff: f64 = combined
        .values()
        .iter()
        .zip(staged.values())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = l2_norm(&combined).max(1e-300) / combined.grid().spacing().sqrt();
    Ok(diff / scale)
}

/// Second-order Strang split-step evolution of `∂_t u = (A+iB)(Δu + Vu + F)`,
/// sampled at the requested output times. The potential kick is evaluated at
/// each substep midpoint; a source is injected symmetrically between two free
/// half-steps, keeping the scheme second order.
pub fn split_step_flow(
    u0: &ComplexField,
    spec: &FlowSpec,
    t_grid: &[f64],
    dt_max: f64,
) -> Result<SpaceTimeField> {
    spec.validate()?;
    if t_grid.is_empty() {
        return Err(Error::ParameterOutOfRange("propagator.t_grid empty".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonUniformTimeGrid("t_grid must be increasing".into()));
    }
    let grid = u0.grid();
    let z = Complex64::new(spec.a_coef, spec.b_coef);
    let v1_samples = match spec.potential.static_part() {
        Some(p) => Some(p.sample(grid)?),
        None => None,
    };
    let v2 = spec.potential.time_part();
    let coords = grid.coords();

    let norm0 = l2_norm(u0);
    let growth_rate = (spec.a_coef + spec.b_coef.abs()) * spec.total_bound();

    let mut slices = Vec::with_capacity(t_grid.len());
    let mut cur = u0.clone();
    let mut cur_t = t_grid[0];
    let mut source_l1 = 0.0;
    if cur_t != 0.0 {
        return Err(Error::ParameterOutOfRange(
            "propagator.t_grid must start at 0".into(),
        ));
    }
    slices.push(cur.clone());

    for &target in &t_grid[1..] {
        let span = target - cur_t;
        let steps = (span / dt_max).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let t_mid = cur_t + (s as f64 + 0.5) * h;
            let has_potential = v1_samples.is_some() || v2.is_some();
            let mut vals = cur.into_values();
            if has_potential {
                for (j, v) in vals.iter_mut().enumerate() {
                    let mut pot = Complex64::new(0.0, 0.0);
                    if let Some(v1) = &v1_samples {
                        pot += v1[j];
                    }
                    if let Some(v2) = v2 {
                        pot += v2.eval(coords[j], t_mid);
                    }
                    *v *= (0.5 * h * z * pot).exp();
                }
            }
            cur = ComplexField::new(grid, vals)?;
            match &spec.source {
                None => {
                    cur = apply_multiplier(&cur, |xi| (-z * xi * xi * h).exp())?;
                }
                Some(src) => {
                    cur = apply_multiplier(&cur, |xi| (-z * xi * xi * (0.5 * h)).exp())?;
                    let mut vals = cur.into_values();
                    for (j, v) in vals.iter_mut().enumerate() {
                        *v += h * z * src.eval(coords[j], t_mid);
                    }
                    cur = ComplexField::new(grid, vals)?;
                    cur = apply_multiplier(&cur, |xi| (-z * xi * xi * (0.5 * h)).exp())?;
                    source_l1 += h * l2_norm(&src.sample(grid, t_mid)?);
                }
            }
            if has_potential {
                let mut vals = cur.into_values();
                for (j, v) in vals.iter_mut().enumerate() {
                    let mut pot = Complex64::new(0.0, 0.0);
                    if let Some(v1) = &v1_samples {
                        pot += v1[j];
                    }
                    if let Some(v2) = v2 {
                        pot += v2.eval(coords[j], t_mid);
                    }
                    *v *= (0.5 * h * z * pot).exp();
                }
                cur = ComplexField::new(grid, vals)?;
            }
        }
        cur_t = target;
        let envelope =
            (growth_rate * cur_t).exp() * (norm0 + z.norm() * source_l1) * (1.0 + 1e-3);
        if l2_norm(&cur) > envelope {
            return Err(Error::UnstableStep(format!(
                "norm {} exceeds envelope {envelope} at t={cur_t}",
                l2_norm(&cur)
            )));
        }
        slices.push(cur.clone());
    }
    SpaceTimeField::new(grid, t_grid.to_vec(), slices)
}

/// Heat-regularized copy of a sampled evolution.
#[derive(Debug, Clone)]
pub struct RegularizedFlow {
    pub epsilon: f64,
    /// The evolution being regularized.
    pub base: SpaceTimeField,
    /// `u_ε(t) = e^{ε t (Δ+V₁)} u(t)` slice by slice.
    pub result: SpaceTimeField,
    /// Worst relative L2 gap between the direct construction and the
    /// composed-semigroup route `e^{(ε+i) t (Δ+V₁)} u(0)` over sampled
    /// slices. Meaningful when the base solves `∂_t u = i (Δ+V₁) u`.
    pub duhamel_residual: f64,
}

/// Applies `e^{ε t H}` to every slice, `H = Δ + V₁`.
pub fn regularize_flow(
    u: &SpaceTimeField,
    epsilon: f64,
    v1: Option<&StaticPotential>,
) -> Result<RegularizedFlow> {
    if !(epsilon > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "propagator.epsilon must be positive, got {epsilon}"
        )));
    }
    if u.is_empty() || u.times()[0] != 0.0 {
        return Err(Error::ParameterOutOfRange(
            "propagator.regularize_flow needs samples starting at t = 0".into(),
        ));
    }
    let mut slices = Vec::with_capacity(u.len());
    for (i, slice) in u.slices().iter().enumerate() {
        let z = Complex64::new(epsilon * u.times()[i], 0.0);
        slices.push(semigroup_apply(slice, z, v1, DEFAULT_DT)?);
    }
    let result = SpaceTimeField::new(u.grid(), u.times().to_vec(), slices)?;

    // Cross-check on a handful of slices: for a solution of the Schrödinger
    // flow with potential V₁, u_ε(t) must equal e^{(ε+i) t H} u(0).
    let mut residual: f64 = 0.0;
    let picks: Vec<usize> = (0..=8)
        .map(|k| k * (u.len() - 1) / 8)
        .collect();
    for &i in &picks {
        let t = u.times()[i];
        let via_zero = semigroup_apply(
            u.slice(0),
            Complex64::new(epsilon * t, t),
            v1,
            DEFAULT_DT,
        )?;
        let direct = result.slice(i);
        let diff: f64 = via_zero
            .values()
            .iter()
            .zip(direct.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = direct
            .values()
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        residual = residual.max(diff / scale);
    }
    Ok(RegularizedFlow { epsilon, base: u.clone(), result, duhamel_residual: residual })
}

/// Rebuilds `u_ε` at slice `index` through the interaction (Duhamel) integral
/// `u_ε(t) = e^{(ε+i)tH} u(0) + (ε+i) ∫_0^t e^{(ε+i)(t-s)H} F_ε(s) ds` with
/// `F_ε(s) = i/(ε+i) · e^{εsH}(V₂(s) u(s))`, and returns the relative L2 gap
/// against the direct construction `e^{εtH} u(index)`.
pub fn duhamel_interaction_check(
    u: &SpaceTimeField,
    epsilon: f64,
    v1: Option<&StaticPotential>,
    v2: &TimePotential,
    index: usize,
) -> Result<f64> {
    if index < 2 || index >= u.len() {
        return Err(Error::ParameterOutOfRange(
            "propagator.duhamel index must be >= 2 and in range".into(),
        ));
    }
    let dt = u.uniform_dt()?;
    let grid = u.grid();
    let coords = grid.coords();
    let t = u.times()[index];
    let eps_i = Complex64::new(epsilon, 1.0);
    let i_over = Complex64::new(0.0, 1.0) / eps_i;

    let weights = simpson_weights(index + 1, dt);
    let mut integral = vec![Complex64::new(0.0, 0.0); grid.points()];
    for (j, &w) in weights.iter().enumerate() {
        let s = u.times()[j];
        let mut vals: Vec<Complex64> = u
            .slice(j)
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| v * v2.eval(coords[k], s))
            .collect();
        let vu = ComplexField::new(grid, vals.clone())?;
        let f_eps = semigroup_apply(&vu, Complex64::new(epsilon * s, 0.0), v1, DEFAULT_DT)?;
        let propagated = semigroup_apply(&f_eps, eps_i * (t - s), v1, DEFAULT_DT)?;
        for (acc, v) in integral.iter_mut().zip(propagated.values()) {
            *acc += w * i_over * v;
        }
        vals.clear();
    }
    let homogeneous = semigroup_apply(u.slice(0), eps_i * t, v1, DEFAULT_DT)?;
    let rebuilt: Vec<Complex64> = homogeneous
        .values()
        .iter()
        .zip(&integral)
        .map(|(h, i)| h + eps_i * i)
        .collect();
    let direct = semigroup_apply(u.slice(index), Complex64::new(epsilon * t, 0.0), v1, DEFAULT_DT)?;
    let diff: f64 = rebuilt
        .iter()
        .zip(direct.values())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = direct
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    Ok(diff / scale)
}

/// Both sides of the weighted decay bound for a dissipative flow.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayMargin {
    /// `e^{-M_T} ‖e^{a(T) x^2} u(T)‖` with `a(t) = γA/(A + 4γ(A^2+B^2)t)`.
    pub lhs: f64,
    /// `‖e^{γ x^2} u(0)‖ + sqrt(A^2+B^2) ∫_0^T ‖e^{a(t) x^2} F(t)‖ dt`.
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative means the bound holds.
    pub margin: f64,
    pub m_t: f64,
    /// The weight rate at the final time, `a(T)`.
    pub weight_rate: f64,
}

/// Checks the a-priori weighted decay estimate for `A > 0`: the terminal
/// weighted norm at the Riccati-matched rate, damped by the potential
/// exposure `M_T`, stays below the initial weighted norm plus the weighted
/// source budget.
pub fn decay_estimate_check(
    u0: &ComplexField,
    spec: &FlowSpec,
    gamma: f64,
    t_final: f64,
    dt_max: f64,
) -> Result<DecayMargin> {
    spec.validate()?;
    if !(spec.a_coef > 0.0) {
        return Err(Error::ParameterOutOfRange(
            "propagator.decay_estimate requires A > 0".into(),
        ));
    }
    if !(gamma > 0.0) {
        return Err(Error::ParameterOutOfRange("weight.gamma".into()));
    }
    if !(t_final > 0.0 && t_final <= 1.0) {
        return Err(Error::ParameterOutOfRange(
            "propagator.T must lie in (0, 1]".into(),
        ));
    }
    let grid = u0.grid();
    let n_slices = 101;
    let times = crate::grid::uniform_times(0.0, t_final, n_slices);
    let evolution = split_step_flow(u0, spec, &times, dt_max)?;
    let rate_profile = WeightProfile::riccati_decay(gamma, spec.a_coef, spec.b_coef)?;

    // Potential exposure: ∫_0^T sup_x |A (Re V)^+ - B Im V| dt.
    let coords = grid.coords();
    let v1_samples = match spec.potential.static_part() {
        Some(p) => Some(p.sample(grid)?),
        None => None,
    };
    let exposures: Vec<f64> = times
        .iter()
        .map(|&t| {
            let mut sup: f64 = 0.0;
            for (j, &x) in coords.iter().enumerate() {
                let mut v = Complex64::new(0.0, 0.0);
                if let Some(v1) = &v1_samples {
                    v += v1[j];
                }
                if let Some(v2) = spec.potential.time_part() {
                    v += v2.eval(x, t);
                }
                let expr = spec.a_coef * v.re.max(0.0) - spec.b_coef * v.im;
                sup = sup.max(expr.abs());
            }
            sup
        })
        .collect();
    let m_t = composite_simpson(&exposures, times[1] - times[0]);

    let weight_rate = gamma * spec.a_coef
        / (spec.a_coef + 4.0 * gamma * (spec.a_coef.powi(2) + spec.b_coef.powi(2)) * t_final);

    let terminal = weighted_l2_norm_strict(
        evolution.slice(evolution.len() - 1),
        &rate_profile,
        t_final,
    )?;
    let lhs = (-m_t).exp() * terminal;

    let initial = weighted_l2_norm_strict(u0, &WeightProfile::static_gaussian(gamma)?, 0.0)?;
    let source_term = match &spec.source {
        None => 0.0,
        Some(src) => {
            let norms: Vec<f64> = times
                .iter()
                .map(|&t| {
                    let f = src.sample(grid, t)?;
                    weighted_l2_norm_strict(&f, &rate_profile, t)
                })
                .collect::<Result<_>>()?;
            spec.a_coef.hypot(spec.b_coef) * composite_simpson(&norms, times[1] - times[0])
        }
    };
    let rhs = initial + source_term;
    Ok(DecayMargin { lhs, rhs, margin: rhs - lhs, m_t, weight_rate })
}

/// Relative L2 distance between two fields on the same grid.
pub fn relative_l2_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("relative_l2_distance".into()));
    }
    let diff: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = b
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{evolve_gaussian, GaussianState};
    use crate::grid::uniform_times;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(20.0, 1024).unwrap()
    }

    fn gaussian_field(g: Grid) -> ComplexField {
        GaussianState::real(1.0).unwrap().sample(g).unwrap()
    }

    #[test]
    fn free_flow_matches_gaussian_oracle() {
        let g = grid();
        let u0 = gaussian_field(g);
        let evolved = free_flow(&u0, 0.0, 1.0, 0.3).unwrap();
        let oracle = evolve_gaussian(&GaussianState::real(1.0).unwrap(), 0.0, 1.0, 0.3)
            .unwrap()
            .sample(g)
            .unwrap();
        assert!(relative_l2_distance(&evolved, &oracle).unwrap() < 1e-9);
    }

    #[test]
    fn free_flow_identity_at_zero_time() {
        let g = grid();
        let u0 = gaussian_field(g);
        let same = free_flow(&u0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(same, u0);
    }

    #[test]
    fn free_flow_unitary_for_schrodinger() {
        let g = grid();
        let u0 = gaussian_field(g);
        let n0 = l2_norm(&u0);
        for k in 1..=10 {
            let t = 0.1 * k as f64;
            let u = free_flow(&u0, 0.0, 1.0, t).unwrap();
            assert!((l2_norm(&u) - n0).abs() < 1e-12 * n0);
        }
    }

    #[test]
    fn free_flow_rejects_backward_heat() {
        let g = grid();
        let u0 = gaussian_field(g);
        assert!(matches!(
            free_flow(&u0, 1.0, 0.0, -0.1),
            Err(Error::BackwardDissipative { .. })
        ));
    }

    #[test]
    fn free_flow_composes() {
        let g = grid();
        let u0 = gaussian_field(g);
        let one = free_flow(&free_flow(&u0, 0.3, 0.7, 0.4).unwrap(), 0.3, 0.7, 0.6).unwrap();
        let two = free_flow(&u0, 0.3, 0.7, 1.0).unwrap();
        assert!(relative_l2_distance(&one, &two).unwrap() < 1e-12);
    }

    #[test]
    fn split_step_with_no_potential_matches_free_flow() {
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec::free(0.0, 1.0);
        let times = uniform_times(0.0, 1.0, 11);
        let flow = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let exact = free_flow(&u0, 0.0, 1.0, 1.0).unwrap();
        assert!(relative_l2_distance(flow.slice(10), &exact).unwrap() < 1e-8);
    }

    #[test]
    fn constant_potential_is_global_phase() {
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::Static {
                potential: StaticPotential::Constant { value: -1.0 },
            },
            source: None,
            m1: None,
        };
        let times = uniform_times(0.0, 1.0, 6);
        let flow = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let t = 1.0;
        let reference = free_flow(&u0, 0.0, 1.0, t).unwrap();
        let phased = ComplexField::new(
            g,
            reference
                .values()
                .iter()
                .map(|v| v * Complex64::new(0.0, -t).exp())
                .collect(),
        )
        .unwrap();
        assert!(relative_l2_distance(flow.slice(5), &phased).unwrap() < 1e-8);
    }

    #[test]
    fn split_step_second_order_self_convergence() {
        let g = Grid::new(20.0, 512).unwrap();
        let u0 = gaussian_field(g);
        let spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::Static {
                potential: StaticPotential::GaussianWell { amplitude: 1.0, rate: 1.0 },
            },
            source: None,
            m1: None,
        };
        let times = [0.0, 0.5];
        let run = |dt: f64| {
            split_step_flow(&u0, &spec, &times, dt)
                .unwrap()
                .slice(1)
                .clone()
        };
        let dt = 0.02;
        let reference = run(dt / 8.0);
        let e1 = relative_l2_distance(&run(dt), &reference).unwrap();
        let e2 = relative_l2_distance(&run(dt / 2.0), &reference).unwrap();
        let ratio = e1 / e2;
        assert!(
            (3.4..=4.8).contains(&ratio),
            "halving ratio {ratio}, errors {e1} {e2}"
        );
    }

    #[test]
    fn split_step_unitary_with_real_potential() {
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::Static {
                potential: StaticPotential::GaussianWell { amplitude: -0.7, rate: 0.5 },
            },
            source: None,
            m1: None,
        };
        let times = uniform_times(0.0, 1.0, 11);
        let flow = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let n0 = l2_norm(&u0);
        for s in flow.slices() {
            assert!((l2_norm(s) - n0).abs() < 1e-10 * n0);
        }
    }

    #[test]
    fn two_sided_norm_bound_under_complex_potential() {
        let g = grid();
        let u0 = gaussian_field(g);
        let v2 = TimePotential::ModulatedGaussian { re: 0.3, im: 0.4, rate: 1.0, omega: 3.0 };
        let spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::TimeDependent { potential: v2.clone() },
            source: None,
            m1: None,
        };
        let times = uniform_times(0.0, 1.0, 11);
        let flow = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let n0 = l2_norm(&u0);
        for (i, s) in flow.slices().iter().enumerate() {
            let t = flow.times()[i];
            let bound = (v2.sup_im_abs() * t).exp();
            let n = l2_norm(s);
            assert!(n <= bound * n0 * (1.0 + 1e-6), "upper bound failed at t={t}");
            assert!(n >= n0 / bound * (1.0 - 1e-6), "lower bound failed at t={t}");
        }
    }

    #[test]
    fn semigroup_identities() {
        let g = grid();
        let u0 = gaussian_field(g);
        let cases = [
            (Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0)),
            (Complex64::new(0.1, 0.3), Complex64::new(0.05, -0.1)),
            (Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.5)),
        ];
        for (z1, z2) in cases {
            let err = semigroup_identity_check(&u0, z1, z2).unwrap();
            assert!(err < 1e-12, "residual {err} for {z1}, {z2}");
        }
        // i*0.5 + i*0.5 equals the free Schrödinger flow at t = 1.
        let staged = semigroup_apply(
            &semigroup_apply(&u0, Complex64::new(0.0, 0.5), None, 1e-3).unwrap(),
            Complex64::new(0.0, 0.5),
            None,
            1e-3,
        )
        .unwrap();
        let free = free_flow(&u0, 0.0, 1.0, 1.0).unwrap();
        assert!(relative_l2_distance(&staged, &free).unwrap() < 1e-12);
    }

    #[test]
    fn semigroup_random_pairs() {
        let g = grid();
        let u0 = gaussian_field(g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let z1 = Complex64::new(rng.gen_range(0.0..0.5), rng.gen_range(-0.5..0.5));
            let z2 = Complex64::new(rng.gen_range(0.0..0.5), rng.gen_range(-0.5..0.5));
            let err = semigroup_identity_check(&u0, z1, z2).unwrap();
            assert!(err < 1e-12, "residual {err}");
        }
    }

    #[test]
    fn regularization_small_epsilon_limit() {
        let g = grid();
        let u0 = gaussian_field(g);
        let times = uniform_times(0.0, 1.0, 21);
        let spec = FlowSpec::free(0.0, 1.0);
        let base = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let reg = regularize_flow(&base, 1e-6, None).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..base.len() {
            let d: f64 = reg
                .result
                .slice(i)
                .values()
                .iter()
                .zip(base.slice(i).values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                * g.spacing().sqrt();
            worst = worst.max(d);
        }
        assert!(worst < 1e-4, "sup-over-t distance {worst}");
        // t = 0 slice is untouched.
        assert_eq!(reg.result.slice(0), base.slice(0));
    }

    #[test]
    fn regularization_multiplier_algebra() {
        let g = grid();
        let u0 = gaussian_field(g);
        let times = uniform_times(0.0, 1.0, 21);
        let base = split_step_flow(&u0, &FlowSpec::free(0.0, 1.0), &times, 1e-3).unwrap();
        let reg = regularize_flow(&base, 0.1, None).unwrap();
        // u_ε(1) must equal the single multiplier e^{-(0.1+i) ξ^2} applied to u0.
        let expected =
            semigroup_apply(&u0, Complex64::new(0.1, 1.0), None, 1e-3).unwrap();
        let got = reg.result.slice(base.len() - 1);
        assert!(relative_l2_distance(got, &expected).unwrap() < 1e-10);
        assert!(reg.duhamel_residual < 1e-10, "residual {}", reg.duhamel_residual);
    }

    #[test]
    fn duhamel_interaction_path_agrees() {
        let g = grid();
        let u0 = gaussian_field(g);
        let v2 = TimePotential::ModulatedGaussian { re: 0.05, im: 0.05, rate: 1.0, omega: 2.0 };
        let spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::TimeDependent { potential: v2.clone() },
            source: None,
            m1: None,
        };
        let times = uniform_times(0.0, 1.0, 1001);
        let u = split_step_flow(&u0, &spec, &times, 1e-3).unwrap();
        let gap = duhamel_interaction_check(&u, 0.1, None, &v2, 1000).unwrap();
        assert!(gap < 1e-6, "duhamel gap {gap}");
        let gap_mid = duhamel_interaction_check(&u, 0.1, None, &v2, 500).unwrap();
        assert!(gap_mid < 1e-6, "duhamel gap at t=0.5 {gap_mid}");
    }

    #[test]
    fn decay_estimate_heat_case() {
        // A=1, B=0, gamma=1/2, T=1: both sides have Gaussian closed forms.
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec::free(1.0, 0.0);
        let report = decay_estimate_check(&u0, &spec, 0.5, 1.0, 1e-3).unwrap();
        assert_relative_eq!(report.weight_rate, 1.0 / 6.0, max_relative = 1e-14);
        // lhs = 5^{-1/2} (15π)^{1/4}, rhs = π^{1/4}
        let lhs_exact = (15.0 * std::f64::consts::PI).powf(0.25) / 5.0f64.sqrt();
        let rhs_exact = std::f64::consts::PI.powf(0.25);
        assert_relative_eq!(report.lhs, lhs_exact, max_relative = 1e-6);
        assert_relative_eq!(report.rhs, rhs_exact, max_relative = 1e-10);
        assert!(report.margin >= 0.0);
    }

    #[test]
    fn decay_estimate_complex_coefficient_case() {
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec::free(1.0, 1.0);
        let report = decay_estimate_check(&u0, &spec, 0.25, 0.5, 1e-3).unwrap();
        assert_relative_eq!(report.weight_rate, 0.125, max_relative = 1e-14);
        assert!(report.margin >= 0.0, "margin {}", report.margin);
    }

    #[test]
    fn decay_estimate_zero_field() {
        let g = grid();
        let u0 = ComplexField::zero(g);
        let spec = FlowSpec::free(1.0, 0.0);
        let report = decay_estimate_check(&u0, &spec, 0.5, 1.0, 1e-3).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.rhs, 0.0);
        assert_eq!(report.margin, 0.0);
    }

    #[test]
    fn decay_estimate_with_source() {
        let g = grid();
        let u0 = gaussian_field(g);
        let spec = FlowSpec {
            a_coef: 1.0,
            b_coef: 0.0,
            potential: PotentialSpec::None,
            source: Some(SourceSpec::ModulatedGaussian {
                re: 0.2,
                im: 0.1,
                rate: 1.0,
                omega: 1.0,
            }),
            m1: None,
        };
        let report = decay_estimate_check(&u0, &spec, 0.5, 1.0, 1e-3).unwrap();
        assert!(report.margin >= 0.0, "margin {}", report.margin);
        assert!(report.rhs > std::f64::consts::PI.powf(0.25));
    }

    #[test]
    fn flow_spec_validation() {
        assert!(FlowSpec::free(-1.0, 0.0).validate().is_err());
        assert!(FlowSpec::free(0.0, 0.0).validate().is_err());
        let mut spec = FlowSpec {
            a_coef: 0.0,
            b_coef: 1.0,
            potential: PotentialSpec::Static {
                potential: StaticPotential::Samples { values: vec![0.0, 2.0] },
            },
            source: None,
            m1: Some(1.0),
        };
        assert!(spec.validate().is_err());
        spec.m1 = Some(2.5);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn rng_gen_range_unbiased_by_order() {
        // ChaCha8 with a fixed seed must give a reproducible stream: the
        // deterministic-output contract of every seeded sweep rests on it.
        let mut a = ChaCha8Rng::seed_from_u64(123);
        let mut b = ChaCha8Rng::seed_from_u64(123);
        let xs: Vec<f64> = (0..8).map(|_| a.gen_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.gen_range(-1.0..1.0)).collect();
        assert_eq!(xs, ys);
    }
}
