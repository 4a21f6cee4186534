//! Monte Carlo engine.
//!
//! A path is the recursion driven by the linear policy and one seeded draw
//! stream. Paths run in parallel on the ambient rayon pool; results are
//! collected in path order and reduced sequentially, so an ensemble summary is
//! identical for any worker count.
//!
//! Negative compartments are logged as violations rather than aborting the
//! path. Once `I` is negative the policy has nothing to treat and applies
//! `u = 0` for the rest of the path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    deceased_bound_pathwise, expected_deceased_linear, expected_infected_linear, expected_susceptible_linear,
    infected_bound_pathwise, susceptible_nonneg_horizon,
};
use crate::error::{Result, SirdError};
use crate::model::{step, ModelParams, SirdState, UncertaintyDraw};
use crate::policy::{admissible_gain_range, PolicyConfig};
use crate::sampling::{DistributionSpec, DrawStream, PriceStream, SeedSpec, UncertaintySpec};

/// Horizon used when a scenario does not specify one.
pub const DEFAULT_HORIZON: usize = 365;

/// Days at which ensemble means are compared against closed forms.
pub const CALIBRATION_DAYS: [usize; 4] = [1, 10, 50, 100];

/// Standard errors allowed between an ensemble mean and its closed form.
pub const CALIBRATION_SIGMAS: f64 = 4.0;

/// Relative tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_REL_TOL: f64 = 1e-9;

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

/// Everything needed to run an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: ModelParams,
    pub uncertainty: UncertaintySpec,
    pub policy: PolicyConfig,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub paths: usize,
    pub master_seed: u64,
    /// Price per unit of control, `p(k)`. Absent means `p ≡ 0`.
    #[serde(default)]
    pub price: Option<DistributionSpec>,
    /// Initial budget `B0`.
    #[serde(default)]
    pub initial_budget: f64,
    /// Allow a horizon past the susceptible nonnegativity window.
    #[serde(default)]
    pub allow_beyond_window: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.uncertainty.validate_against(&self.params)?;
        self.policy.validate()?;
        let bad = |msg: String| Err(SirdError::InvalidScenario(msg));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if !(self.initial_budget.is_finite() && self.initial_budget >= 0.0) {
            return bad(format!("initial budget must be nonnegative, got {}", self.initial_budget));
        }
        if let Some(price) = &self.price {
            price.validate()?;
        }
        if !self.allow_beyond_window && !susceptible_nonneg_horizon(&self.params)?.covers(self.horizon) {
            return bad(format!(
                "horizon {} exceeds the susceptible nonnegativity window {:?}; set allow_beyond_window to override",
                self.horizon,
                susceptible_nonneg_horizon(&self.params)?
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Compartment {
    S,
    I,
    R,
    D,
    B,
}

impl Compartment {
    pub const ALL: [Compartment; 5] = [Self::S, Self::I, Self::R, Self::D, Self::B];

    pub fn label(&self) -> &'static str {
        match self {
            Self::S => "S",
            Self::I => "I",
            Self::R => "R",
            Self::D => "D",
            Self::B => "B",
        }
    }
}

/// First day a compartment went negative on a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: u64,
    pub day: usize,
    pub compartment: Compartment,
    pub value: f64,
    /// Number of days the compartment was negative.
    pub days_negative: usize,
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<SirdState>,
    pub budget: Vec<f64>,
    pub draws: Vec<UncertaintyDraw>,
    pub controls: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl Trajectory {
    pub fn violated(&self) -> bool {
        !self.violations.is_empty()
    }

    fn value(&self, day: usize, c: Compartment) -> f64 {
        let s = &self.states[day];
        match c {
            Compartment::S => s.s,
            Compartment::I => s.i,
            Compartment::R => s.r,
            Compartment::D => s.d,
            Compartment::B => self.budget[day],
        }
    }
}

fn record_negatives(violations: &mut Vec<Violation>, path: u64, state: &SirdState) {
    for (c, value) in
        [(Compartment::S, state.s), (Compartment::I, state.i), (Compartment::R, state.r), (Compartment::D, state.d)]
    {
        if value >= 0.0 {
            continue;
        }
        match violations.iter_mut().find(|v| v.compartment == c) {
            Some(v) => v.days_negative += 1,
            None => violations.push(Violation { path, day: state.k, compartment: c, value, days_negative: 1 }),
        }
    }
}

/// Runs path `path_index` of `scenario`.
pub fn run_path(scenario: &Scenario, path_index: u64) -> Result<Trajectory> {
    scenario.validate()?;
    simulate_path(scenario, path_index)
}

fn simulate_path(scenario: &Scenario, path_index: u64) -> Result<Trajectory> {
    let seed = SeedSpec::new(scenario.master_seed, path_index);
    let mut draws = DrawStream::new(&scenario.uncertainty, seed)?;
    let mut prices = scenario.price.as_ref().map(|p| PriceStream::new(p, seed)).transpose()?;
    let horizon = scenario.horizon;

    let mut traj = Trajectory {
        states: Vec::with_capacity(horizon + 1),
        budget: Vec::with_capacity(horizon + 1),
        draws: Vec::with_capacity(horizon),
        controls: Vec::with_capacity(horizon),
        violations: Vec::new(),
    };
    let mut state = scenario.params.initial_state();
    let mut budget = scenario.initial_budget;
    traj.states.push(state);
    traj.budget.push(budget);

    for _ in 0..horizon {
        let draw = draws.next().expect("draw stream is endless");
        let u = if state.i >= 0.0 { scenario.policy.gain * state.i } else { 0.0 };
        let price = prices.as_mut().map_or(0.0, |p| p.next().expect("price stream is endless"));
        state = step(&state, &draw, u)?;
        budget += price * u;
        record_negatives(&mut traj.violations, path_index, &state);
        traj.states.push(state);
        traj.budget.push(budget);
        traj.draws.push(draw);
        traj.controls.push(u);
    }
    Ok(traj)
}

/// Per-day statistics of one compartment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayStats {
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub p05: f64,
    pub p95: f64,
    pub max: f64,
}

/// Checks that need every path, computed during aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathChecks {
    /// Largest `|total(k) - total(0)| / total(0)` over all paths and days.
    pub max_conservation_error: f64,
    /// Paths on which `R` decreased on some day.
    pub r_decreases: usize,
    /// Paths on which `D` decreased on some day.
    pub d_decreases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub horizon: usize,
    pub paths: usize,
    pub gain: f64,
    /// `stats[c][k]` for compartment `Compartment::ALL[c]` on day `k`.
    pub stats: Vec<Vec<DayStats>>,
    pub violations: Vec<Violation>,
    pub path_checks: PathChecks,
}

impl EnsembleSummary {
    pub fn series(&self, c: Compartment) -> &[DayStats] {
        let idx = Compartment::ALL.iter().position(|x| *x == c).expect("known compartment");
        &self.stats[idx]
    }
}

/// Nearest-rank percentile of a sorted sample.
fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    let rank = ((pct / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn day_stats(values: &mut [f64]) -> DayStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    values.sort_by(f64::total_cmp);
    DayStats {
        mean,
        stderr,
        min: values[0],
        p05: nearest_rank(values, 5.0),
        p95: nearest_rank(values, 95.0),
        max: values[values.len() - 1],
    }
}

fn path_checks(trajectories: &[Trajectory]) -> PathChecks {
    let mut checks = PathChecks { max_conservation_error: 0.0, r_decreases: 0, d_decreases: 0 };
    for t in trajectories {
        let total0 = t.states[0].total();
        for s in &t.states {
            let err = (s.total() - total0).abs() / total0.abs();
            checks.max_conservation_error = checks.max_conservation_error.max(err);
        }
        if t.states.windows(2).any(|w| w[1].r < w[0].r) {
            checks.r_decreases += 1;
        }
        if t.states.windows(2).any(|w| w[1].d < w[0].d) {
            checks.d_decreases += 1;
        }
    }
    checks
}

/// Summarizes `trajectories`, which must share one horizon.
pub fn summarize(gain: f64, trajectories: &[Trajectory]) -> EnsembleSummary {
    let horizon = trajectories[0].states.len() - 1;
    let mut column = vec![0.0; trajectories.len()];
    let stats = Compartment::ALL
        .iter()
        .map(|&c| {
            (0..=horizon)
                .map(|day| {
                    for (slot, t) in column.iter_mut().zip(trajectories) {
                        *slot = t.value(day, c);
                    }
                    day_stats(&mut column)
                })
                .collect()
        })
        .collect();
    EnsembleSummary {
        horizon,
        paths: trajectories.len(),
        gain,
        stats,
        violations: trajectories.iter().flat_map(|t| t.violations.iter().copied()).collect(),
        path_checks: path_checks(trajectories),
    }
}

/// Runs every path of `scenario` in parallel, in path order.
pub fn run_trajectories(scenario: &Scenario) -> Result<Vec<Trajectory>> {
    scenario.validate()?;
    (0..scenario.paths as u64).into_par_iter().map(|p| simulate_path(scenario, p)).collect()
}

pub fn run_ensemble(scenario: &Scenario) -> Result<EnsembleSummary> {
    Ok(summarize(scenario.policy.gain, &run_trajectories(scenario)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub gain: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check { name: name.into(), status: if ok { CheckStatus::Pass } else { CheckStatus::Fail }, detail }
}

fn not_applicable(name: &str, detail: String) -> Check {
    Check { name: name.into(), status: CheckStatus::NotApplicable, detail }
}

/// Whether every day's maximum stays at or below `bound` (up to round-off).
fn dominated(series: &[DayStats], bound: &[f64]) -> Option<(usize, f64, f64)> {
    series
        .iter()
        .zip(bound)
        .enumerate()
        .find(|(_, (s, b))| s.max > **b + EXACT_REL_TOL * b.abs().max(1.0))
        .map(|(day, (s, b))| (day, s.max, *b))
}

/// Largest calibration gap in standard errors, or the first day that fails.
fn calibrate(series: &[DayStats], expected: &[f64], days: &[usize]) -> (bool, String) {
    let mut worst = 0.0f64;
    for &day in days {
        let s = &series[day];
        let gap = (s.mean - expected[day]).abs();
        let allowed = CALIBRATION_SIGMAS * s.stderr + EXACT_REL_TOL * expected[day].abs().max(1.0);
        if gap > allowed {
            return (
                false,
                format!("day {day}: mean {} vs closed form {} (stderr {})", s.mean, expected[day], s.stderr),
            );
        }
        if s.stderr > 0.0 {
            worst = worst.max(gap / s.stderr);
        }
    }
    (true, format!("days {days:?}, largest gap {worst:.3} standard errors"))
}

/// Checks an ensemble against the conservation law, monotonicity, the
/// pathwise bounds and the closed-form expectations. Checks whose premises do
/// not hold for `gain` are reported as not applicable.
pub fn validate_ensemble(summary: &EnsembleSummary, params: &ModelParams, gain: f64) -> Result<ValidationReport> {
    params.validate()?;
    let h = summary.horizon;
    let days: Vec<usize> = CALIBRATION_DAYS
        .iter()
        .copied()
        .chain(std::iter::once(h))
        .filter(|&d| d <= h)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut checks = Vec::new();

    let pc = &summary.path_checks;
    checks.push(check(
        "conservation",
        pc.max_conservation_error <= EXACT_REL_TOL,
        format!("max relative drift {:e}", pc.max_conservation_error),
    ));
    checks.push(check(
        "nonnegative_compartments",
        summary.violations.is_empty(),
        format!("{} negative-compartment events", summary.violations.len()),
    ));
    checks.push(check(
        "monotone_recovered_deceased",
        pc.r_decreases == 0 && pc.d_decreases == 0,
        format!("{} paths with R decreasing, {} with D decreasing", pc.r_decreases, pc.d_decreases),
    ));

    let admissible = admissible_gain_range(params)?.contains(gain);
    if admissible {
        let bound = infected_bound_pathwise(params, gain, h)?;
        checks.push(match dominated(summary.series(Compartment::I), &bound) {
            None => check("infected_pathwise_bound", true, "max I below bound on every day".into()),
            Some((day, x, b)) => check("infected_pathwise_bound", false, format!("day {day}: max I {x} > {b}")),
        });
    } else {
        checks.push(not_applicable("infected_pathwise_bound", format!("gain {gain} is not admissible")));
    }

    match deceased_bound_pathwise(params, gain, h) {
        Ok(bound) => checks.push(match dominated(summary.series(Compartment::D), &bound) {
            None => check("deceased_pathwise_bound", true, "max D below bound on every day".into()),
            Some((day, x, b)) => check("deceased_pathwise_bound", false, format!("day {day}: max D {x} > {b}")),
        }),
        Err(e) => checks.push(not_applicable("deceased_pathwise_bound", e.to_string())),
    }

    let curves = [
        ("expected_infected", Compartment::I, expected_infected_linear(params, gain, h)),
        ("expected_susceptible", Compartment::S, expected_susceptible_linear(params, gain, h)),
        ("expected_deceased", Compartment::D, expected_deceased_linear(params, gain, h)),
    ];
    for (name, c, curve) in curves {
        match curve {
            Ok(curve) => {
                let (ok, detail) = calibrate(summary.series(c), &curve.values, &days);
                checks.push(check(name, ok, detail));
            }
            Err(e) => checks.push(not_applicable(name, e.to_string())),
        }
    }

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(ValidationReport { gain, passed, checks })
}
