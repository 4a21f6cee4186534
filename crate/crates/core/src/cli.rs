//! Command implementations behind the `sird` binary.
//!
//! Commands return values instead of printing so they can be driven
//! in-process. Exit codes: 0 success, 1 validation failure, 2 input or parse
//! error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::{
    deceased_path_oracle, expected_deceased_linear, expected_infected_linear, expected_susceptible_linear,
    infected_path_oracle, recovered_path_oracle, susceptible_path_oracle,
};
use crate::error::SirdError;
use crate::estimate::{estimate_all, load_series, EstimateResult, LoadOptions, SeriesError};
use crate::model::ModelParams;
use crate::policy::{feasibility_almost_sure, feasibility_average, ControlMode, GainFeasibility};
use crate::simulate::{
    run_trajectories, summarize, validate_ensemble, Check, CheckStatus, Compartment, EnsembleSummary, Scenario,
    Trajectory, ValidationReport, Violation, EXACT_REL_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable capping the number of simulation workers.
pub const THREADS_ENV: &str = "SIRD_THREADS";

/// Paths checked against the closed-form path oracles by [`cmd_verify`].
pub const VERIFY_ORACLE_PATHS: usize = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot parse config {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error(transparent)]
    Series(#[from] SeriesError),

    #[error(transparent)]
    Model(#[from] SirdError),

    #[error("invalid {name} = {value}: {msg}")]
    Env { name: &'static str, value: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// Scenario file: a serialized [`Scenario`] plus an optional `[output]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let config: Self =
            toml::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), msg: e.to_string() })?;
        config.scenario.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable in TOML")
    }
}

/// Runs `f` on a rayon pool sized by `SIRD_THREADS` when set. Results do not
/// depend on the pool size.
pub fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(value) => {
            let threads: usize = value.trim().parse().map_err(|_| CliError::Env {
                name: THREADS_ENV,
                value: value.clone(),
                msg: "expected a positive integer".into(),
            })?;
            if threads == 0 {
                return Err(CliError::Env { name: THREADS_ENV, value, msg: "must be at least 1".into() });
            }
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Env {
                name: THREADS_ENV,
                value,
                msg: e.to_string(),
            })?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

pub fn cmd_estimate(data: &Path, v_mean: f64, options: &LoadOptions) -> Result<EstimateResult, CliError> {
    let series = load_series(data, options)?;
    Ok(estimate_all(&series, v_mean)?)
}

pub fn cmd_select_gain(params: &ModelParams, mode: ControlMode, cap: f64) -> Result<GainFeasibility, CliError> {
    Ok(match mode {
        ControlMode::AlmostSure => feasibility_almost_sure(params, cap)?,
        ControlMode::Average => feasibility_average(params, cap)?,
    })
}

/// Closed-form overlay per compartment, where one exists for the scenario.
fn closed_form_columns(scenario: &Scenario) -> Vec<(Compartment, Vec<f64>)> {
    let (p, k, h) = (&scenario.params, scenario.policy.gain, scenario.horizon);
    [
        (Compartment::S, expected_susceptible_linear(p, k, h)),
        (Compartment::I, expected_infected_linear(p, k, h)),
        (Compartment::D, expected_deceased_linear(p, k, h)),
    ]
    .into_iter()
    .filter_map(|(c, curve)| curve.ok().map(|curve| (c, curve.values)))
    .collect()
}

pub const SUMMARY_HEADER: &str = "day,compartment,mean,stderr,min,p05,p95,max,closed_form";

/// `summary.csv`: one row per compartment and day; `closed_form` is empty
/// where no closed form applies.
pub fn summary_csv(summary: &EnsembleSummary, scenario: &Scenario) -> String {
    let overlays = closed_form_columns(scenario);
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for c in Compartment::ALL {
        let overlay = overlays.iter().find(|(oc, _)| *oc == c).map(|(_, v)| v);
        for (day, s) in summary.series(c).iter().enumerate() {
            let closed = overlay.map(|v| v[day].to_string()).unwrap_or_default();
            writeln!(
                out,
                "{day},{},{},{},{},{},{},{},{closed}",
                c.label(),
                s.mean,
                s.stderr,
                s.min,
                s.p05,
                s.p95,
                s.max
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

/// Writes every file or none: each is staged next to its target and renamed
/// only after all were written.
pub fn write_all_or_nothing(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| CliError::Write(e.error))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub validation: ValidationReport,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub summary_path: PathBuf,
    pub report_path: PathBuf,
    pub report: SimulationReport,
}

pub fn resolve_out_dir(config: &ScenarioConfig, out_dir: Option<&Path>) -> PathBuf {
    out_dir.map(Path::to_path_buf).or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}

/// Runs the ensemble and writes `summary.csv` and `report.json` into `out_dir`.
pub fn cmd_simulate(config: &ScenarioConfig, out_dir: &Path) -> Result<SimulateOutput, CliError> {
    let scenario = &config.scenario;
    scenario.validate()?;
    let summary = with_worker_pool(|| run_trajectories(scenario).map(|t| summarize(scenario.policy.gain, &t)))??;
    let report = SimulationReport {
        validation: validate_ensemble(&summary, &scenario.params, scenario.policy.gain)?,
        violations: summary.violations.clone(),
    };
    let summary_path = out_dir.join("summary.csv");
    let report_path = out_dir.join("report.json");
    let mut report_json = serde_json::to_vec_pretty(&report).expect("report serializes");
    report_json.push(b'\n');
    write_all_or_nothing(&[
        (summary_path.clone(), summary_csv(&summary, scenario).into_bytes()),
        (report_path.clone(), report_json),
    ])?;
    Ok(SimulateOutput { summary_path, report_path, report })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= EXACT_REL_TOL * a.abs().max(b.abs()).max(scale)
}

/// Magnitude of the terms each closed form sums on every day, in S, I, R, D
/// order. The infected closed form subtracts control terms from an
/// uncontrolled product that can be many orders larger than `I(k)`, so its
/// round-off scales with these magnitudes rather than with the result.
fn term_scales(params: &ModelParams, t: &Trajectory) -> [Vec<f64>; 4] {
    let n = t.draws.len();
    let (mut s, mut i, mut r, mut d) = (vec![params.s0], vec![params.i0], vec![0.0], vec![0.0]);
    for k in 0..n {
        let (draw, u) = (&t.draws[k], t.controls[k].abs());
        s.push(s[k] + draw.delta * i[k]);
        i.push(draw.growth().abs() * i[k] + draw.v * u);
        r.push(r[k] + draw.v * u);
        d.push(d[k] + draw.d_i * i[k]);
    }
    [s, i, r, d]
}

/// Compares one simulated path with the closed-form path oracles, to
/// [`EXACT_REL_TOL`] relative to the larger of the two values, `I0` and the
/// summed term magnitude. Returns the first mismatch.
pub fn oracle_mismatch(params: &ModelParams, t: &Trajectory) -> Result<Option<String>, SirdError> {
    let oracles = [
        susceptible_path_oracle(params, &t.draws, &t.controls)?,
        infected_path_oracle(params, &t.draws, &t.controls)?,
        recovered_path_oracle(&t.draws, &t.controls)?,
        deceased_path_oracle(params, &t.draws, &t.controls)?,
    ];
    let scales = term_scales(params, t);
    for (c, (values, scale)) in oracles.iter().zip(&scales).enumerate() {
        for (day, state) in t.states.iter().enumerate() {
            let simulated = [state.s, state.i, state.r, state.d][c];
            if !close(values[day], simulated, scale[day].max(params.i0)) {
                return Ok(Some(format!(
                    "{} on day {day}: oracle {} vs recursion {simulated}",
                    Compartment::ALL[c].label(),
                    values[day]
                )));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect()
    }
}

/// Runs the ensemble, the validation checks and the oracle equivalence check
/// on the first [`VERIFY_ORACLE_PATHS`] paths.
pub fn cmd_verify(config: &ScenarioConfig) -> Result<VerifyReport, CliError> {
    let scenario = &config.scenario;
    scenario.validate()?;
    let trajectories = with_worker_pool(|| run_trajectories(scenario))??;
    let summary = summarize(scenario.policy.gain, &trajectories);
    let mut checks = validate_ensemble(&summary, &scenario.params, scenario.policy.gain)?.checks;

    let mut mismatch = None;
    for t in trajectories.iter().take(VERIFY_ORACLE_PATHS) {
        if let Some(m) = oracle_mismatch(&scenario.params, t)? {
            mismatch = Some(m);
            break;
        }
    }
    let checked = trajectories.len().min(VERIFY_ORACLE_PATHS);
    checks.push(Check {
        name: "oracle_equivalence".into(),
        status: if mismatch.is_none() { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: mismatch.unwrap_or_else(|| format!("{checked} paths match the closed-form path oracles")),
    });

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(VerifyReport { passed, checks, violations: summary.violations })
}
