//! Experiment runner: JSON config in, CSV tables and a JSON summary out,
//! deterministic for a fixed seed. The `HARDYLAB_SEED` environment variable
//! overrides the config seed. Exit codes: 0 all assertions pass, 1 an
//! assertion failed or an execution error named a violated invariant,
//! 2 the config failed to parse or validate.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acceptance;
use crate::analytic::GaussianState;
use crate::appell::{appell_equation_residual, appell_transform, AppellParams};
use crate::carleman::{inequality_sweep, SweepRow};
use crate::convexity::{build_trace, build_trace_with_operator, log_convexity_check, ConvexityTrace};
use crate::counterexample::{divergence_demonstration, solve_weight_ode};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, uniform_times, ComplexField, Grid, SpaceTimeField};
use crate::hardy::{hardy_product, heat_boundary_scan};
use crate::propagator::{free_flow, split_step_flow, FlowSpec};
use crate::weight::{weighted_l2_norm, CarlemanOperator, WeightProfile};

#[derive(Debug, Clone, Deserialize)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

impl GridConfig {
    fn build(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.points)
    }
}

/// Gaussian initial state `amp · e^{-c x^2}`.
#[derive(Debug, Clone, Deserialize)]
pub struct InitialState {
    pub c_re: f64,
    #[serde(default)]
    pub c_im: f64,
    #[serde(default = "one")]
    pub amp_re: f64,
    #[serde(default)]
    pub amp_im: f64,
}

fn one() -> f64 {
    1.0
}

impl InitialState {
    fn build(&self) -> Result<GaussianState> {
        GaussianState::new(
            num_complex::Complex64::new(self.c_re, self.c_im),
            num_complex::Complex64::new(self.amp_re, self.amp_im),
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct TimeRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl TimeRange {
    fn build(&self) -> Result<Vec<f64>> {
        if !(self.end > self.start) || self.count < 2 {
            return Err(Error::Config(
                "cli.times must have end > start and count >= 2".into(),
            ));
        }
        Ok(uniform_times(self.start, self.end, self.count))
    }
}

fn default_dt() -> f64 {
    1e-3
}

fn default_resolution() -> usize {
    crate::carleman::DEFAULT_BUMP_RESOLUTION
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Evolve a Gaussian datum and record norms (plus the closed-form
    /// oracle error when the flow is free).
    Evolve {
        grid: GridConfig,
        flow: FlowSpec,
        initial: InitialState,
        times: TimeRange,
        #[serde(default = "default_dt")]
        dt_max: f64,
    },
    /// Trace `H(t) = ‖e^{phase} u(t)‖²` with log-convexity diagnostics.
    Convexity {
        grid: GridConfig,
        flow: FlowSpec,
        initial: InitialState,
        times: TimeRange,
        weight: WeightProfile,
        #[serde(default)]
        operator_form: bool,
        #[serde(default = "default_dt")]
        dt_max: f64,
    },
    /// Seeded inequality sweeps over (bump, mu, epsilon, R) per operator.
    Carleman {
        operators: Vec<CarlemanOperator>,
        mus: Vec<f64>,
        epsilons: Vec<f64>,
        rs: Vec<f64>,
        bumps: usize,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    /// Weight-rate ODE plus the truncated-integral divergence table.
    Counterexample {
        t_max: f64,
        step: f64,
        r_values: Vec<f64>,
        halfwidths: Vec<f64>,
    },
    /// Decay-product experiments for Gaussian data and the heat boundary scan.
    Hardy {
        grid: GridConfig,
        rates: Vec<f64>,
        times: Vec<f64>,
        scan_rates: Vec<f64>,
    },
    /// Transform a free evolution and check its identities.
    Appell {
        grid: GridConfig,
        initial: InitialState,
        alpha: f64,
        beta: f64,
        flow: FlowSpec,
        slices: usize,
    },
    /// The full acceptance suite.
    AcceptanceSuite {},
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

fn default_seed() -> u64 {
    20260810
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ExperimentKind::Evolve { grid, flow, initial, times, dt_max }
            | ExperimentKind::Convexity { grid, flow, initial, times, dt_max, .. } => {
                grid.build()?;
                flow.validate()?;
                initial.build()?;
                times.build()?;
                if !(*dt_max > 0.0) {
                    return Err(Error::ParameterOutOfRange("cli.dt_max".into()));
                }
                if let ExperimentKind::Convexity { weight, .. } = &self.kind {
                    weight.validate()?;
                }
                Ok(())
            }
            ExperimentKind::Carleman { operators, mus, epsilons, rs, bumps, resolution } => {
                if operators.is_empty() || mus.is_empty() || epsilons.is_empty() || rs.is_empty() {
                    return Err(Error::Config("cli.carleman sweep lists must be nonempty".into()));
                }
                for &m in mus {
                    if !(m > 0.0) {
                        return Err(Error::ParameterOutOfRange("carleman.mu".into()));
                    }
                }
                for &e in epsilons {
                    if !(e > 0.0) {
                        return Err(Error::ParameterOutOfRange("carleman.epsilon".into()));
                    }
                }
                for &r in rs {
                    if !(r > 0.0) {
                        return Err(Error::ParameterOutOfRange("carleman.r".into()));
                    }
                }
                if *bumps == 0 || *resolution < 16 {
                    return Err(Error::Config(
                        "cli.carleman needs bumps >= 1 and resolution >= 16".into(),
                    ));
                }
                Ok(())
            }
            ExperimentKind::Counterexample { t_max, step, r_values, halfwidths } => {
                if !(*t_max > 0.0 && *step > 0.0) {
                    return Err(Error::ParameterOutOfRange("counterexample.t_max/step".into()));
                }
                if r_values.is_empty() || halfwidths.len() < 2 {
                    return Err(Error::Config(
                        "cli.counterexample needs r_values and at least two halfwidths".into(),
                    ));
                }
                Ok(())
            }
            ExperimentKind::Hardy { grid, rates, times, scan_rates } => {
                grid.build()?;
                if rates.is_empty() && scan_rates.is_empty() {
                    return Err(Error::Config("cli.hardy has nothing to do".into()));
                }
                for &c in rates.iter().chain(scan_rates) {
                    if !(c > 0.0) {
                        return Err(Error::ParameterOutOfRange("hardy.rate".into()));
                    }
                }
                for &t in times {
                    if !(t > 0.0) {
                        return Err(Error::ParameterOutOfRange("hardy.time".into()));
                    }
                }
                Ok(())
            }
            ExperimentKind::Appell { grid, initial, alpha, beta, flow, slices } => {
                grid.build()?;
                initial.build()?;
                flow.validate()?;
                AppellParams::new(*alpha, *beta, flow.a_coef, flow.b_coef)?;
                if *slices < 9 {
                    return Err(Error::Config("cli.appell needs at least 9 slices".into()));
                }
                Ok(())
            }
            ExperimentKind::AcceptanceSuite {} => Ok(()),
        }
    }

    fn kind_label(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Evolve { .. } => "evolve",
            ExperimentKind::Convexity { .. } => "convexity",
            ExperimentKind::Carleman { .. } => "carleman",
            ExperimentKind::Counterexample { .. } => "counterexample",
            ExperimentKind::Hardy { .. } => "hardy",
            ExperimentKind::Appell { .. } => "appell",
            ExperimentKind::AcceptanceSuite {} => "acceptance-suite",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Assertion {
    fn bounded(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), observed, bound, pass: observed <= bound }
    }
}

/// A CSV table ready to be written: `.` decimal separator, `\n` line
/// endings, header row first.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub file_name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 32 + self.header.len() + 1);
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

fn evolve_field(
    grid: Grid,
    flow: &FlowSpec,
    state: &GaussianState,
    times: &[f64],
    dt_max: f64,
) -> Result<SpaceTimeField> {
    let u0 = state.sample(grid)?;
    if flow.potential.is_none() && flow.source.is_none() {
        let slices: Vec<ComplexField> = times
            .iter()
            .map(|&t| free_flow(&u0, flow.a_coef, flow.b_coef, t))
            .collect::<Result<_>>()?;
        SpaceTimeField::new(grid, times.to_vec(), slices)
    } else {
        split_step_flow(&u0, flow, times, dt_max)
    }
}

fn run_evolve(
    name: &str,
    seed: u64,
    grid: &GridConfig,
    flow: &FlowSpec,
    initial: &InitialState,
    times: &TimeRange,
    dt_max: f64,
) -> Result<ExperimentResult> {
    let grid = grid.build()?;
    let state = initial.build()?;
    let times = times.build()?;
    let u = evolve_field(grid, flow, &state, &times, dt_max)?;

    let free = flow.potential.is_none() && flow.source.is_none();
    let mut rows = Vec::with_capacity(u.len());
    let mut worst_oracle: f64 = 0.0;
    let n0 = l2_norm(u.slice(0));
    let mut worst_norm_drift: f64 = 0.0;
    for (i, &t) in u.times().iter().enumerate() {
        let norm = l2_norm(u.slice(i));
        let oracle_err = if free {
            let oracle = crate::analytic::evolve_gaussian(&state, flow.a_coef, flow.b_coef, t)?
                .sample(grid)?;
            let e: f64 = u
                .slice(i)
                .values()
                .iter()
                .zip(oracle.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                * grid.spacing().sqrt();
            worst_oracle = worst_oracle.max(e);
            format!("{e}")
        } else {
            String::new()
        };
        worst_norm_drift = worst_norm_drift.max((norm - n0).abs() / n0.max(1e-300));
        rows.push(format!("{t},{norm},{oracle_err}"));
    }
    let mut assertions = Vec::new();
    if free {
        assertions.push(Assertion::bounded("free-flow closed-form oracle L2 error", worst_oracle, 1e-8));
    }
    let real_potential = flow.potential.time_part().is_none();
    if flow.a_coef == 0.0 && real_potential && flow.source.is_none() {
        assertions.push(Assertion::bounded("unitarity drift", worst_norm_drift, 1e-10));
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "evolve".into(),
        seed,
        assertions,
        pass,
        tables: vec![Table {
            file_name: format!("{name}_evolution.csv"),
            header: "t,norm,oracle_err".into(),
            rows,
        }],
    })
}

fn trace_table(name: &str, trace: &ConvexityTrace) -> Table {
    let dt = trace.dt();
    let mut rows = Vec::with_capacity(trace.times.len());
    for (i, &t) in trace.times.iter().enumerate() {
        let d = trace
            .d
            .as_ref()
            .map(|d| format!("{}", d[i]))
            .unwrap_or_default();
        let freq = trace
            .frequency
            .as_ref()
            .map(|f| format!("{}", f[i]))
            .unwrap_or_default();
        let d2 = if i >= 1 && i + 1 < trace.times.len() {
            format!("{}", trace.second_diff_log_h[i - 1] / (dt * dt))
        } else {
            String::new()
        };
        rows.push(format!(
            "{t},{},{},{d},{freq},{d2}",
            trace.h[i], trace.log_h[i]
        ));
    }
    Table {
        file_name: format!("{name}_trace.csv"),
        header: "t,H,logH,D,N,d2logH".into(),
        rows,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_convexity(
    name: &str,
    seed: u64,
    grid: &GridConfig,
    flow: &FlowSpec,
    initial: &InitialState,
    times: &TimeRange,
    weight: &WeightProfile,
    operator_form: bool,
    dt_max: f64,
    strict_tails: bool,
) -> Result<ExperimentResult> {
    let grid = grid.build()?;
    let state = initial.build()?;
    let times = times.build()?;
    let u = evolve_field(grid, flow, &state, &times, dt_max)?;

    let mut assertions = Vec::new();
    if !strict_tails {
        // Advisory pass: report how many slices fail the tail check instead
        // of aborting on the first one.
        let mut failed = 0usize;
        for (i, slice) in u.slices().iter().enumerate() {
            if !weighted_l2_norm(slice, weight, u.times()[i])?.converged {
                failed += 1;
            }
        }
        assertions.push(Assertion::bounded("slices failing the tail check", failed as f64, 0.0));
    }
    let trace = if operator_form {
        let gamma = match weight {
            WeightProfile::StaticGaussian { gamma } => *gamma,
            _ => {
                return Err(Error::Config(
                    "cli.convexity operator_form requires a static_gaussian weight".into(),
                ))
            }
        };
        build_trace_with_operator(&u, gamma, flow.a_coef, flow.b_coef)?
    } else {
        build_trace(&u, weight)?
    };
    let dt = trace.dt();
    let check = log_convexity_check(&trace, 0.0);
    let free_schrodinger = flow.a_coef == 0.0 && flow.potential.is_none() && flow.source.is_none();
    if free_schrodinger && matches!(weight, WeightProfile::StaticGaussian { .. }) {
        assertions.push(Assertion::bounded(
            "log-convexity second-difference violation",
            (-check.worst_second_diff).max(0.0),
            1e-7 / (dt * dt),
        ));
        assertions.push(Assertion::bounded(
            "endpoint interpolation excess",
            (-check.worst_interpolation_margin).max(0.0),
            1e-6,
        ));
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "convexity".into(),
        seed,
        assertions,
        pass,
        tables: vec![trace_table(name, &trace)],
    })
}

fn operator_label(op: CarlemanOperator) -> &'static str {
    match op {
        CarlemanOperator::Schrodinger => "schrodinger",
        CarlemanOperator::Parabolic => "parabolic",
    }
}

#[allow(clippy::too_many_arguments)]
fn run_carleman(
    name: &str,
    seed: u64,
    operators: &[CarlemanOperator],
    mus: &[f64],
    epsilons: &[f64],
    rs: &[f64],
    bumps: usize,
    resolution: usize,
) -> Result<ExperimentResult> {
    let mut assertions = Vec::new();
    let mut rows = Vec::new();
    let mut all_rows: Vec<SweepRow> = Vec::new();
    for &op in operators {
        let sweep = inequality_sweep(seed, op, mus, epsilons, rs, bumps, resolution)?;
        let worst = sweep
            .iter()
            .filter(|r| r.rhs > 0.0)
            .map(|r| -r.margin / r.rhs)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        assertions.push(Assertion::bounded(
            format!("{}: worst margin/rhs over {} checks", operator_label(op), sweep.len()),
            worst,
            1e-8,
        ));
        for r in &sweep {
            rows.push(format!(
                "{},{},{},{},{},{},{},{},{}",
                r.bump_index,
                r.mu,
                r.epsilon,
                r.r,
                operator_label(r.operator),
                r.lhs,
                r.rhs,
                r.margin,
                r.pass
            ));
        }
        all_rows.extend(sweep);
    }
    let mut tables = vec![Table {
        file_name: format!("{name}_sweep.csv"),
        header: "bump,mu,epsilon,r,operator,lhs,rhs,margin,pass".into(),
        rows,
    }];
    // Margin heat-tables over (mu, epsilon), one per R and operator: the
    // min margin across bumps.
    for &op in operators {
        for &r in rs {
            let mut heat_rows = Vec::new();
            for &mu in mus {
                let mut cells = vec![format!("{mu}")];
                for &eps in epsilons {
                    let min_margin = all_rows
                        .iter()
                        .filter(|row| {
                            row.operator == op && row.r == r && row.mu == mu && row.epsilon == eps
                        })
                        .map(|row| row.margin)
                        .fold(f64::INFINITY, f64::min);
                    cells.push(format!("{min_margin}"));
                }
                heat_rows.push(cells.join(","));
            }
            let header = std::iter::once("mu".to_string())
                .chain(epsilons.iter().map(|e| format!("eps_{e}")))
                .collect::<Vec<_>>()
                .join(",");
            tables.push(Table {
                file_name: format!("{name}_margins_{}_R{r}.csv", operator_label(op)),
                header,
                rows: heat_rows,
            });
        }
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "carleman".into(),
        seed,
        assertions,
        pass,
        tables,
    })
}

fn format_from_log(log_value: f64) -> String {
    // Renders e^{log_value} as a scientific-notation string even when the
    // value overflows f64.
    let log10 = log_value / std::f64::consts::LN_10;
    let exponent = log10.floor();
    let mantissa = 10f64.powf(log10 - exponent);
    format!("{mantissa:.6}e{}", exponent as i64)
}

fn run_counterexample(
    name: &str,
    seed: u64,
    t_max: f64,
    step: f64,
    r_values: &[f64],
    halfwidths: &[f64],
) -> Result<ExperimentResult> {
    let traj = solve_weight_ode(t_max, step)?;
    let mut assertions = Vec::new();
    assertions.push(Assertion::bounded(
        "first-integral residual",
        traj.first_integral_residual(),
        1e-6,
    ));
    assertions.push(Assertion::bounded(
        "rate-equation residual",
        traj.rate_equation_residual(),
        1e-6,
    ));

    let mut trajectory_rows = Vec::new();
    let stride = (traj.times.len() / 500).max(1);
    for i in (0..traj.times.len()).step_by(stride) {
        trajectory_rows.push(format!(
            "{},{},{}",
            traj.times[i], traj.a_values[i], traj.b_values[i]
        ));
    }
    let mut tables = vec![Table {
        file_name: format!("{name}_trajectory.csv"),
        header: "t,a,b".into(),
        rows: trajectory_rows,
    }];

    let mut divergence_rows = Vec::new();
    for &r in r_values {
        let table = divergence_demonstration(&traj, r, halfwidths)?;
        if table.center_divergent_regime {
            let last = table.rows.last().unwrap();
            assertions.push(Assertion::bounded(
                format!("R={r}: endpoint relative change at largest L"),
                last.h_minus1_rel_change.max(last.h_plus1_rel_change),
                1e-6,
            ));
            let growth_deficit = table
                .rows
                .windows(2)
                .map(|w| (w[0].half_width * w[0].half_width - (w[1].log_h0 - w[0].log_h0)).max(0.0))
                .fold(0.0, f64::max);
            assertions.push(Assertion::bounded(
                format!("R={r}: central growth deficit"),
                growth_deficit,
                0.0,
            ));
        }
        for row in &table.rows {
            divergence_rows.push(format!(
                "{},{},{},{},{},{},{}",
                row.r,
                row.half_width,
                format_from_log(row.log_h0),
                row.h_minus1,
                row.h_plus1,
                row.endpoints_converged,
                table.center_divergent_regime
            ));
        }
    }
    tables.push(Table {
        file_name: format!("{name}_divergence.csv"),
        header: "R,L,H0_truncated,H_minus1,H_plus1,endpoints_converged,center_divergent".into(),
        rows: divergence_rows,
    });
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "counterexample".into(),
        seed,
        assertions,
        pass,
        tables,
    })
}

fn run_hardy(
    name: &str,
    seed: u64,
    grid: &GridConfig,
    rates: &[f64],
    times: &[f64],
    scan_rates: &[f64],
) -> Result<ExperimentResult> {
    let grid = grid.build()?;
    let mut assertions = Vec::new();
    let mut product_rows = Vec::new();
    let mut min_product = f64::INFINITY;
    for &c in rates {
        let u0 = GaussianState::real(c)?.sample(grid)?;
        for &t in times {
            let ut = free_flow(&u0, 0.0, 1.0, t)?;
            let product = hardy_product(&u0, &ut, t)?;
            min_product = min_product.min(product.normalized_product);
            product_rows.push(format!(
                "{c},{t},{},{},{}",
                product.alpha, product.beta, product.normalized_product
            ));
        }
    }
    if !rates.is_empty() {
        assertions.push(Assertion::bounded(
            "boundary deficit (1 - min product)",
            1.0 - min_product,
            1e-3,
        ));
    }
    let mut scan_rows = Vec::new();
    let mut scan_dev: f64 = 0.0;
    for &c in scan_rates {
        let located = heat_boundary_scan(&GaussianState::real(c)?, 1e-9)?;
        let exact = 1.0 / (c / (1.0 + 4.0 * c)).sqrt();
        scan_dev = scan_dev.max((located - exact).abs());
        scan_rows.push(format!("{c},{located},{exact}"));
    }
    if !scan_rates.is_empty() {
        assertions.push(Assertion::bounded("heat boundary scan deviation", scan_dev, 1e-6));
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "hardy".into(),
        seed,
        assertions,
        pass,
        tables: vec![
            Table {
                file_name: format!("{name}_products.csv"),
                header: "c,T,alpha,beta,product".into(),
                rows: product_rows,
            },
            Table {
                file_name: format!("{name}_heat_scan.csv"),
                header: "c,located_delta,exact_delta".into(),
                rows: scan_rows,
            },
        ],
    })
}

#[allow(clippy::too_many_arguments)]
fn run_appell(
    name: &str,
    seed: u64,
    grid: &GridConfig,
    initial: &InitialState,
    alpha: f64,
    beta: f64,
    flow: &FlowSpec,
    slices: usize,
) -> Result<ExperimentResult> {
    let grid = grid.build()?;
    let state = initial.build()?;
    let times = uniform_times(0.0, 1.0, slices);
    let u = evolve_field(grid, flow, &state, &times, 1e-3)?;
    let params = AppellParams::new(alpha, beta, flow.a_coef, flow.b_coef)?;
    let result = appell_transform(&u, &params)?;
    let mut assertions = vec![Assertion::bounded(
        "plain norm identity residual",
        result.norm_identity_residual,
        1e-5,
    )];
    if flow.potential.is_none() && flow.source.is_none() && slices >= 41 {
        let resid = appell_equation_residual(&u, &params, flow)?;
        assertions.push(Assertion::bounded("transformed PDE residual", resid, 1e-3));
    }
    let mut rows = Vec::with_capacity(result.transformed.len());
    for (i, &t) in result.transformed.times().iter().enumerate() {
        rows.push(format!(
            "{t},{},{}",
            result.s_of_t[i],
            l2_norm(result.transformed.slice(i))
        ));
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "appell".into(),
        seed,
        assertions,
        pass,
        tables: vec![Table {
            file_name: format!("{name}_transform.csv"),
            header: "t,s,transformed_norm".into(),
            rows,
        }],
    })
}

fn run_acceptance(name: &str, seed: u64) -> Result<ExperimentResult> {
    let results = acceptance::run_all(seed)?;
    let mut assertions = Vec::new();
    let mut rows = Vec::new();
    for r in &results {
        for c in &r.checks {
            assertions.push(Assertion::bounded(
                format!("{}. {}: {}", r.id, r.name, c.name),
                c.observed,
                c.bound,
            ));
            rows.push(format!(
                "{},{},{},{},{},{}",
                r.id, r.name, c.name, c.observed, c.bound, c.pass
            ));
        }
    }
    let pass = assertions.iter().all(|a| a.pass);
    Ok(ExperimentResult {
        name: name.into(),
        kind: "acceptance-suite".into(),
        seed,
        assertions,
        pass,
        tables: vec![Table {
            file_name: format!("{name}_criteria.csv"),
            header: "id,criterion,check,observed,bound,pass".into(),
            rows,
        }],
    })
}

/// Executes a parsed config. `strict_tails` makes weighted-norm tail
/// failures hard errors inside the convexity experiment.
pub fn run_config(config: &ExperimentConfig, strict_tails: bool) -> Result<ExperimentResult> {
    let seed = match std::env::var("HARDYLAB_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("HARDYLAB_SEED must be a u64, got {v:?}")))?,
        Err(_) => config.seed,
    };
    match &config.kind {
        ExperimentKind::Evolve { grid, flow, initial, times, dt_max } => {
            run_evolve(&config.name, seed, grid, flow, initial, times, *dt_max)
        }
        ExperimentKind::Convexity { grid, flow, initial, times, weight, operator_form, dt_max } => {
            run_convexity(
                &config.name,
                seed,
                grid,
                flow,
                initial,
                times,
                weight,
                *operator_form,
                *dt_max,
                strict_tails,
            )
        }
        ExperimentKind::Carleman { operators, mus, epsilons, rs, bumps, resolution } => {
            run_carleman(
                &config.name,
                seed,
                operators,
                mus,
                epsilons,
                rs,
                *bumps,
                *resolution,
            )
        }
        ExperimentKind::Counterexample { t_max, step, r_values, halfwidths } => {
            run_counterexample(&config.name, seed, *t_max, *step, r_values, halfwidths)
        }
        ExperimentKind::Hardy { grid, rates, times, scan_rates } => {
            run_hardy(&config.name, seed, grid, rates, times, scan_rates)
        }
        ExperimentKind::Appell { grid, initial, alpha, beta, flow, slices } => {
            run_appell(&config.name, seed, grid, initial, *alpha, *beta, flow, *slices)
        }
        ExperimentKind::AcceptanceSuite {} => run_acceptance(&config.name, seed),
    }
}

/// JSON summary written next to the CSV tables. `runtime_ms` is the only
/// volatile field; everything else is deterministic for a fixed seed.
#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub name: &'a str,
    pub kind: &'a str,
    pub seed: u64,
    pub pass: bool,
    pub assertions: &'a [Assertion],
    pub runtime_ms: u64,
}

/// Writes every table plus the JSON summary; returns the created paths.
pub fn emit_plotdata(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    for table in &result.tables {
        let path = out_dir.join(&table.file_name);
        fs::write(&path, table.to_csv()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        written.push(path);
    }
    Ok(written)
}

/// Full run: parse, validate, execute, write outputs. Returns the process
/// exit code.
pub fn run(config_path: &Path, out_dir: &Path, threads: Option<usize>, strict_tails: bool) -> i32 {
    if let Some(n) = threads {
        // A second invocation in the same process keeps the first pool; fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let started = std::time::Instant::now();
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let config = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let result = match run_config(&config, strict_tails) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error in {} experiment {:?}: {e}", config.kind_label(), config.name);
            return 1;
        }
    };
    if let Err(e) = emit_plotdata(&result, out_dir) {
        eprintln!("error: {e}");
        return 1;
    }
    let summary = Summary {
        name: &result.name,
        kind: &result.kind,
        seed: result.seed,
        pass: result.pass,
        assertions: &result.assertions,
        runtime_ms: started.elapsed().as_millis() as u64,
    };
    let summary_path = out_dir.join(format!("{}_summary.json", result.name));
    match serde_json::to_string_pretty(&summary) {
        Ok(json) => {
            if let Err(e) = fs::write(&summary_path, json + "\n") {
                eprintln!("error: cannot write {}: {e}", summary_path.display());
                return 1;
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    }
    for a in &result.assertions {
        println!(
            "{} {} (observed {:.3e}, bound {:.3e})",
            if a.pass { "PASS" } else { "FAIL" },
            a.name,
            a.observed,
            a.bound
        );
    }
    if result.pass {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_and_out_of_range_configs() {
        assert!(matches!(
            ExperimentConfig::from_json("{not json"),
            Err(Error::Config(_))
        ));
        // Negative gamma in a weight must surface as ParameterOutOfRange.
        let bad = r#"{
            "name": "bad",
            "kind": "convexity",
            "grid": {"half_width": 20.0, "points": 1024},
            "flow": {"a_coef": 0.0, "b_coef": 1.0},
            "initial": {"c_re": 1.0},
            "times": {"start": 0.0, "end": 0.4, "count": 11},
            "weight": {"kind": "static_gaussian", "gamma": -1.0}
        }"#;
        match ExperimentConfig::from_json(bad) {
            Err(Error::ParameterOutOfRange(msg)) => assert!(msg.contains("weight.gamma")),
            other => panic!("expected ParameterOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn evolve_config_roundtrip_and_run() {
        let text = r#"{
            "name": "free",
            "kind": "evolve",
            "seed": 7,
            "grid": {"half_width": 20.0, "points": 256},
            "flow": {"a_coef": 0.0, "b_coef": 1.0},
            "initial": {"c_re": 1.0},
            "times": {"start": 0.0, "end": 1.0, "count": 6}
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let result = run_config(&config, false).unwrap();
        assert!(result.pass, "{:?}", result.assertions);
        assert_eq!(result.tables.len(), 1);
        assert!(result.tables[0].rows.len() == 6);
    }

    #[test]
    fn deterministic_summaries_for_fixed_seed() {
        let text = r#"{
            "name": "sweep",
            "kind": "carleman",
            "seed": 11,
            "operators": ["schrodinger"],
            "mus": [1.0],
            "epsilons": [0.5],
            "rs": [1.0, 5.0],
            "bumps": 3,
            "resolution": 64
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let a = run_config(&config, false).unwrap();
        let b = run_config(&config, false).unwrap();
        assert_eq!(
            a.tables[0].to_csv(),
            b.tables[0].to_csv(),
            "CSV output must be byte-identical for a fixed seed"
        );
        assert_eq!(
            serde_json::to_string(&a.assertions).unwrap(),
            serde_json::to_string(&b.assertions).unwrap()
        );
    }

    #[test]
    fn scientific_rendering_from_log_values() {
        assert_eq!(format_from_log(0.0), "1.000000e0");
        let s = format_from_log(2400.0); // e^2400 ~ 10^1042
        assert!(s.ends_with("e1042"), "{s}");
    }
}
