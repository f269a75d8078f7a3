//! Scenario files and the `deadbeat-obs` commands.
//!
//! A scenario is a JSON object:
//!
//! | field | contents |
//! |---|---|
//! | `system` | tagged by `kind`: `reactor`, `frequency`, `lti`, `scalar`, `indistinguishable` |
//! | `sim` | `t_end` (s), `h` (s), optional `x0`, `y0` |
//! | `observer` | `r` (s), `mode`, `rel_threshold`, `on_degenerate`, optional `z0`, `w0` |
//! | `sensor` | `{"kind": "clean"}` or `{"kind": "sinusoid_noise", "amplitude", "frequency"}` (rad/s) |
//! | `output` | path prefix for every file written |
//! | `sweep` | optional: `phase_points`, `phases` (rad), `windows` (s), `h` (s) |
//! | `observability` | optional: `window` (s), `nodes` for the determinant test |
//!
//! Reactor fields are those of [`ReactorParams`] (rates in 1/s, temperatures
//! in K). Frequency fields are those of [`FrequencyScenario`]. `lti` takes
//! row-major `a` (n×n), `b` (n), `c` (n×k) and `f` (k). `scalar` takes
//! polynomial coefficients in `y`. `indistinguishable` takes constant rates
//! `a1`, `a2` and `kappa`, with `c1(y) = exp(kappa y)`, `c2 = 1`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::apps::frequency::{
    freq_spec, horizon_sweep, phase_grid, phase_sweep, FrequencyScenario, SweepTable, DEFAULT_PHASE_POINTS,
};
use crate::apps::reactor::{reactor_spec, ReactorParams};
use crate::apps::scalar::ScalarPolynomials;
use crate::error::Error;
use crate::numerics::{steps_in, Grid, Matrix, Vector};
use crate::observer::{run_observer, DegeneratePolicy, EstimateTrace, ObserverConfig, ObserverMode};
use crate::plant::{corrupt, simulate_plant, sinusoid_initial_state, SensorModel, SimConfig, Trace};
use crate::system::{make_lti, InputSignal, SystemSpec};
use crate::window::{
    compute_window, determinant_condition, gram, indistinguishing_input, observability_certificate, Certificate,
    IndistinguishableSystem, IoWindow, DEFAULT_REL_THRESHOLD,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GramDegenerate { .. } => EXIT_DEGENERATE,
            Error::InvalidParams(_)
            | Error::InvalidGrid(_)
            | Error::DimensionMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::WrongOutputDimension(_)
            | Error::HypothesisFails(_) => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemConfig {
    Reactor(ReactorParams),
    Frequency(FrequencyScenario),
    Lti { a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<Vec<f64>>, f: Vec<f64> },
    Scalar(ScalarPolynomials),
    Indistinguishable { a1: f64, a2: f64, kappa: f64 },
}

impl SystemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SystemConfig::Reactor(_) => "reactor",
            SystemConfig::Frequency(_) => "frequency",
            SystemConfig::Lti { .. } => "lti",
            SystemConfig::Scalar(_) => "scalar",
            SystemConfig::Indistinguishable { .. } => "indistinguishable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSection {
    pub t_end: f64,
    pub h: f64,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverSection {
    pub r: f64,
    #[serde(default = "default_mode")]
    pub mode: ObserverMode,
    #[serde(default = "default_rel_threshold")]
    pub rel_threshold: f64,
    #[serde(default = "default_policy")]
    pub on_degenerate: DegeneratePolicy,
    #[serde(default)]
    pub z0: Option<Vec<f64>>,
    #[serde(default)]
    pub w0: Option<Vec<f64>>,
}

fn default_mode() -> ObserverMode {
    ObserverMode::ReducedOrder
}

fn default_rel_threshold() -> f64 {
    DEFAULT_REL_THRESHOLD
}

fn default_policy() -> DegeneratePolicy {
    DegeneratePolicy::HoldAndRetry
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    #[serde(default)]
    pub phase_points: Option<usize>,
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    #[serde(default)]
    pub windows: Option<Vec<f64>>,
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservabilitySection {
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub nodes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub sim: SimSection,
    #[serde(default)]
    pub observer: Option<ObserverSection>,
    #[serde(default)]
    pub sensor: Option<SensorModel>,
    pub output: String,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub observability: Option<ObservabilitySection>,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub out_prefix: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Phase,
    Horizon,
}

impl SweepMode {
    fn name(self) -> &'static str {
        match self {
            SweepMode::Phase => "phase",
            SweepMode::Horizon => "horizon",
        }
    }
}

/// A validated scenario ready to run.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub spec: SystemSpec,
    pub x0: Vector,
    pub y0: Vector,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> CliResult<ScenarioConfig> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("invalid config {}: {e}", path.display())))?;
    if let Some(h) = overrides.h {
        config.sim.h = h;
        if let Some(sweep) = config.sweep.as_mut() {
            sweep.h = Some(h);
        }
    }
    if let Some(prefix) = &overrides.out_prefix {
        config.output = prefix.clone();
    }
    Ok(config)
}

fn vector(xs: &[f64]) -> Vector {
    DVector::from_row_slice(xs)
}

fn matrix(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> CliResult<Matrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::validation(format!("system.{name} must be {nrows}x{ncols}")));
    }
    Ok(Matrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

fn build_spec(system: &SystemConfig) -> CliResult<SystemSpec> {
    Ok(match system {
        SystemConfig::Reactor(p) => reactor_spec(p)?,
        SystemConfig::Frequency(scn) => {
            scn.validate()?;
            freq_spec(false)
        }
        SystemConfig::Lti { a, b, c, f } => {
            let n = b.len();
            let k = f.len();
            make_lti(matrix("a", a, n, n)?, vector(b), matrix("c", c, n, k)?, vector(f))?
        }
        SystemConfig::Scalar(poly) => poly.system()?.spec(),
        SystemConfig::Indistinguishable { a1, a2, kappa } => {
            IndistinguishableSystem::exponential_ratio(*a1, *a2, *kappa).spec()
        }
    })
}

fn check_multiple(name: &str, value: f64, h: f64) -> CliResult<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(CliError::validation(format!("sim.h = {h} must be positive")));
    }
    match steps_in(value, h) {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(CliError::validation(format!("{name} = {value} is not a positive integer multiple of h = {h}"))),
    }
}

pub fn prepare(config: ScenarioConfig) -> CliResult<Scenario> {
    let spec = build_spec(&config.system)?;
    check_multiple("sim.t_end", config.sim.t_end, config.sim.h)?;
    if let Some(obs) = &config.observer {
        let m = check_multiple("observer.r", obs.r, config.sim.h)?;
        if m < 2 {
            return Err(CliError::validation(format!("observer.r = {} must span at least two steps", obs.r)));
        }
        if !(obs.rel_threshold > 0.0) {
            return Err(CliError::validation("observer.rel_threshold must be positive"));
        }
    }
    if let Some(sensor) = &config.sensor {
        sensor.validate()?;
    }
    let (x0, y0) = match (&config.system, &config.sim.x0, &config.sim.y0) {
        (_, Some(x0), Some(y0)) => (vector(x0), vector(y0)),
        (SystemConfig::Frequency(scn), None, None) => sinusoid_initial_state(scn.amplitude, scn.omega, scn.phase),
        _ => return Err(CliError::validation("sim.x0 and sim.y0 are required for this system")),
    };
    if x0.len() != spec.n() || y0.len() != spec.k() {
        return Err(CliError::validation(format!("sim.x0 / sim.y0 must have {} / {} components", spec.n(), spec.k())));
    }
    Ok(Scenario { config, spec, x0, y0 })
}

impl Scenario {
    fn sensor(&self) -> SensorModel {
        match (&self.config.sensor, &self.config.system) {
            (Some(s), _) => *s,
            (None, SystemConfig::Frequency(scn)) => scn.sensor(),
            (None, _) => SensorModel::Clean,
        }
    }

    fn input(&self, t_end: f64) -> CliResult<InputSignal> {
        match &self.config.system {
            SystemConfig::Indistinguishable { a1, a2, kappa } => {
                let sys = IndistinguishableSystem::exponential_ratio(*a1, *a2, *kappa);
                let grid = Grid::spanning(0.0, t_end, self.config.sim.h)?;
                Ok(indistinguishing_input(&sys, &self.x0, self.y0[0], &grid)?.signal())
            }
            _ => Ok(InputSignal::none()),
        }
    }

    fn simulate(&self, t_end: f64) -> CliResult<Trace> {
        let cfg = SimConfig { t_end, h: self.config.sim.h, x0: self.x0.clone(), y0: self.y0.clone() };
        let trace = simulate_plant(&self.spec, &self.input(t_end)?, &cfg)?;
        Ok(corrupt(&trace, &self.sensor()))
    }

    fn default_z0(&self) -> Vector {
        match &self.config.system {
            SystemConfig::Reactor(p) => vector(&[0.5 * p.c1_bar, 0.5 * p.c2_bar]),
            SystemConfig::Frequency(_) => vector(&[1.0, -1.0]),
            _ => DVector::zeros(self.spec.n()),
        }
    }
}

fn observer_config(section: &ObserverSection, h: f64) -> ObserverConfig {
    ObserverConfig {
        r: section.r,
        h,
        mode: section.mode,
        rel_threshold: section.rel_threshold,
        on_degenerate: section.on_degenerate,
    }
}

fn num(out: &mut String, v: f64) {
    let _ = write!(out, ",{v:.16e}");
}

fn header(out: &mut String, name: &str, count: usize) {
    for i in 0..count {
        let _ = write!(out, ",{name}_{i}");
    }
}

pub fn trace_csv(trace: &Trace, n: usize, k: usize, m: usize) -> String {
    let mut out = String::from("t");
    header(&mut out, "x_true", n);
    header(&mut out, "y_true", k);
    header(&mut out, "y_meas", k);
    header(&mut out, "u", m);
    out.push('\n');
    for j in 0..trace.len() {
        let _ = write!(out, "{:.16e}", trace.t[j]);
        for v in trace.x_true[j].iter().chain(&trace.y_true[j]).chain(&trace.y_meas[j]).chain(&trace.u[j]) {
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

pub fn estimate_csv(trace: &Trace, est: &EstimateTrace, n: usize, k: usize, full_order: bool) -> String {
    let mut out = String::from("t");
    header(&mut out, "x_true", n);
    header(&mut out, "y_true", k);
    header(&mut out, "y_meas", k);
    header(&mut out, "z", n);
    if full_order {
        header(&mut out, "w", k);
    }
    out.push_str(",reset_flag,degenerate_flag\n");
    for j in 0..est.len() {
        let _ = write!(out, "{:.16e}", est.t[j]);
        for v in trace.x_true[j].iter().chain(&trace.y_true[j]).chain(&trace.y_meas[j]).chain(&est.z[j]) {
            num(&mut out, *v);
        }
        if full_order {
            for v in &est.w[j] {
                num(&mut out, *v);
            }
        }
        let _ = writeln!(out, ",{},{}", u8::from(est.reset[j]), u8::from(est.degenerate[j]));
    }
    out
}

fn output_path(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub system: String,
    pub nodes: usize,
    pub resets: usize,
    pub degenerate_events: usize,
    /// Largest `max_i |z_i - x_i|` over nodes at or after the first reset.
    pub max_post_r_error: Option<f64>,
    pub final_error: f64,
    pub omega_hat: Option<f64>,
}

/// Simulate, run the observer and write `<prefix>_trace.csv`,
/// `<prefix>_estimate.csv` and `<prefix>_summary.json`.
pub fn cmd_simulate(config: ScenarioConfig) -> CliResult<SimulateSummary> {
    let scn = prepare(config)?;
    let obs = scn.config.observer.clone().ok_or_else(|| CliError::validation("observer section is required"))?;
    let h = scn.config.sim.h;
    let ocfg = observer_config(&obs, h);
    let window_steps = ocfg.window_steps()?;
    let trace = scn.simulate(scn.config.sim.t_end)?;
    let z0 = obs.z0.as_deref().map(vector).unwrap_or_else(|| scn.default_z0());
    let w0 = obs.w0.as_deref().map(vector).unwrap_or_else(|| scn.y0.clone());
    let est = run_observer(&scn.spec, &ocfg, &trace, &z0, &w0)?;

    let err = |j: usize| (&est.z[j] - &trace.x_true[j]).amax();
    let max_post_r_error = (window_steps..est.len()).map(err).reduce(f64::max);
    let last = est.len() - 1;
    let omega_hat = match scn.config.system {
        SystemConfig::Frequency(_) if est.z[last][1] < 0.0 => Some((-est.z[last][1]).sqrt()),
        _ => None,
    };
    let summary = SimulateSummary {
        system: scn.config.system.name().into(),
        nodes: est.len(),
        resets: est.reset.iter().filter(|&&r| r).count(),
        degenerate_events: est.degenerate.iter().filter(|&&d| d).count(),
        max_post_r_error,
        final_error: err(last),
        omega_hat,
    };
    let (n, k, m) = (scn.spec.n(), scn.spec.k(), scn.spec.m());
    let prefix = &scn.config.output;
    write_file(&output_path(prefix, "_trace.csv"), &trace_csv(&trace, n, k, m))?;
    let full = ocfg.mode == ObserverMode::FullOrder;
    write_file(&output_path(prefix, "_estimate.csv"), &estimate_csv(&trace, &est, n, k, full))?;
    write_json(&output_path(prefix, "_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mode: String,
    pub points: usize,
    pub h: f64,
    pub max_rel_error: f64,
    pub argmax: f64,
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("sweep_value,omega_hat,rel_error\n");
    for row in &table.rows {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", row.value, row.omega_hat, row.rel_error);
    }
    out
}

/// Frequency sweeps over the phase or the window length. Writes
/// `<prefix>_sweep_<mode>.csv` and `<prefix>_sweep_<mode>_summary.json`.
pub fn cmd_sweep(config: ScenarioConfig, mode: SweepMode) -> CliResult<(SweepTable, SweepSummary)> {
    let SystemConfig::Frequency(template) = config.system else {
        return Err(CliError::validation("sweep requires a frequency system"));
    };
    template.validate()?;
    let mut template = template;
    if let Some(sensor) = config.sensor {
        match sensor {
            SensorModel::Clean => template.noise_amplitude = 0.0,
            SensorModel::SinusoidNoise { amplitude, frequency } => {
                template.noise_amplitude = amplitude;
                template.noise_frequency = frequency;
            }
        }
    }
    let sweep = config.sweep.clone().unwrap_or_default();
    let h = sweep.h.unwrap_or_else(|| template.default_step());
    let table = match mode {
        SweepMode::Phase => {
            check_multiple("system.window", template.window, h)?;
            let phases = match (&sweep.phases, sweep.phase_points) {
                (Some(p), _) => p.clone(),
                (None, count) => phase_grid(count.unwrap_or(DEFAULT_PHASE_POINTS)),
            };
            phase_sweep(&template, &phases, h)?
        }
        SweepMode::Horizon => {
            let windows = sweep.windows.clone().ok_or_else(|| CliError::validation("sweep.windows is required"))?;
            for &r in &windows {
                check_multiple("sweep.windows", r, h)?;
            }
            horizon_sweep(&template, &windows, h)?
        }
    };
    let argmax = table
        .rows
        .iter()
        .fold(None::<(f64, f64)>, |best, r| match best {
            Some((e, _)) if e >= r.rel_error => best,
            _ => Some((r.rel_error, r.value)),
        })
        .map_or(f64::NAN, |(_, v)| v);
    let summary = SweepSummary {
        mode: mode.name().into(),
        points: table.rows.len(),
        h,
        max_rel_error: table.max_rel_error(),
        argmax,
    };
    let stem = format!("_sweep_{}", mode.name());
    write_file(&output_path(&config.output, &format!("{stem}.csv")), &sweep_csv(&table))?;
    write_json(&output_path(&config.output, &format!("{stem}_summary.json")), &summary)?;
    Ok((table, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub system: String,
    pub window: f64,
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub smallest_pivot: f64,
    pub condition_estimate: Option<f64>,
    pub rel_threshold: f64,
    pub certificate: String,
    pub min_eigenvalue: f64,
    pub null_direction: Option<Vec<f64>>,
    pub determinant_nodes: Option<Vec<usize>>,
    pub determinant: Option<f64>,
    /// Indistinguishable systems only: largest output gap between the
    /// configured initial state and a partner state under the constructed input.
    pub partner_output_gap: Option<f64>,
}

/// Simulate one window and write the Gram report to `<prefix>_gram.json`.
pub fn cmd_observability(config: ScenarioConfig) -> CliResult<ObservabilityReport> {
    let scn = prepare(config)?;
    let h = scn.config.sim.h;
    let section = scn.config.observability.clone().unwrap_or_default();
    let window_len = section.window.or(scn.config.observer.as_ref().map(|o| o.r)).unwrap_or(scn.config.sim.t_end);
    check_multiple("observability.window", window_len, h)?;
    let rel_threshold = scn.config.observer.as_ref().map_or(DEFAULT_REL_THRESHOLD, |o| o.rel_threshold);

    let trace = scn.simulate(window_len)?;
    let window = IoWindow::new(h, trace.y_meas.clone(), trace.u.clone())?;
    let wc = compute_window(&scn.spec, &window)?;
    let gs = gram(&wc);
    let cert = observability_certificate(&gs, rel_threshold);
    let (certificate, null_direction) = match &cert {
        Certificate::StronglyObservableOnWindow { .. } => ("strongly_observable".to_string(), None),
        Certificate::Degenerate { null_direction, .. } => {
            ("degenerate".to_string(), Some(null_direction.iter().copied().collect()))
        }
    };
    let determinant = match &section.nodes {
        Some(nodes) if scn.spec.k() == 1 => Some(determinant_condition(&wc, nodes)?),
        _ => None,
    };
    let partner_output_gap = match &scn.config.system {
        SystemConfig::Indistinguishable { a1, a2, kappa } => {
            let sys = IndistinguishableSystem::exponential_ratio(*a1, *a2, *kappa);
            let partner = sys.partner_state(&scn.x0, scn.y0[0], scn.x0[0] + 1.0);
            let cfg = SimConfig { t_end: window_len, h, x0: partner, y0: scn.y0.clone() };
            let other = simulate_plant(&scn.spec, &scn.input(window_len)?, &cfg)?;
            Some(trace.y_true.iter().zip(&other.y_true).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max))
        }
        _ => None,
    };
    let report = ObservabilityReport {
        system: scn.config.system.name().into(),
        window: window_len,
        h,
        eigenvalues: gs.eigenvalues(),
        trace: gs.q.trace(),
        smallest_pivot: gs.smallest_pivot,
        condition_estimate: gs.condition_estimate.is_finite().then_some(gs.condition_estimate),
        rel_threshold,
        certificate,
        min_eigenvalue: cert.min_eigenvalue(),
        null_direction,
        determinant_nodes: determinant.map(|_| section.nodes.clone().unwrap_or_default()),
        determinant,
        partner_output_gap,
    };
    write_json(&output_path(&scn.config.output, "_gram.json"), &report)?;
    Ok(report)
}

/// Print a short human-readable form of the report.
pub fn format_report(report: &ObservabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system: {}", report.system);
    let _ = writeln!(out, "window: {} s (h = {})", report.window, report.h);
    let _ = writeln!(out, "eigenvalues: {:?}", report.eigenvalues);
    let _ = writeln!(out, "smallest pivot: {:.6e}", report.smallest_pivot);
    let _ = writeln!(out, "certificate: {} (min eigenvalue {:.6e})", report.certificate, report.min_eigenvalue);
    if let Some(dir) = &report.null_direction {
        let _ = writeln!(out, "null direction: {dir:?}");
    }
    if let Some(det) = report.determinant {
        let _ =
            writeln!(out, "determinant at nodes {:?}: {det:.6e}", report.determinant_nodes.as_deref().unwrap_or(&[]));
    }
    if let Some(gap) = report.partner_output_gap {
        let _ = writeln!(out, "partner output gap: {gap:.6e}");
    }
    out
}
