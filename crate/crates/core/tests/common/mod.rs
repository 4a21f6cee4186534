#![allow(dead_code)]

use sird_control::{DistributionSpec, PolicyConfig, Scenario, UncertaintySpec};

pub fn uniform_spec(delta: (f64, f64), v: (f64, f64), d: (f64, f64)) -> UncertaintySpec {
    UncertaintySpec::new(
        DistributionSpec::uniform(delta.0, delta.1),
        DistributionSpec::uniform(v.0, v.1),
        DistributionSpec::uniform(d.0, d.1),
    )
}

/// Scenario whose bounds and means are implied by `uncertainty`.
pub fn scenario(
    uncertainty: UncertaintySpec,
    gain: f64,
    cap: f64,
    horizon: usize,
    paths: usize,
    seed: u64,
) -> Scenario {
    Scenario {
        params: uncertainty.implied_params(1e6, 100.0).unwrap(),
        uncertainty,
        policy: PolicyConfig::new(gain, cap).unwrap(),
        horizon,
        paths,
        master_seed: seed,
        price: None,
        initial_budget: 0.0,
        allow_beyond_window: false,
    }
}

/// Stable set: δmax < vmin(1 - dmax)/vmax with K inside the almost-sure interval.
pub fn stable_scenario(paths: usize, horizon: usize, seed: u64) -> Scenario {
    scenario(uniform_spec((0.0, 0.1), (0.4, 0.6), (0.0, 0.05)), 1.0, 1.0, horizon, paths, seed)
}

/// Calibration set with δ ~ U[0.1,0.3], v ~ U[0.1,0.2], d_I ~ U[0,0.004].
pub fn calibration_scenario(gain: f64, paths: usize, horizon: usize, seed: u64) -> Scenario {
    scenario(uniform_spec((0.1, 0.3), (0.1, 0.2), (0.0, 0.004)), gain, 2.0, horizon, paths, seed)
}

pub fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

/// Case series generated by the model under the unit-gain policy `u = I`,
/// reporting `c(k) = I(k)` and cumulative `d(k) = D(k)`.
pub fn synthetic_series(
    uncertainty: &UncertaintySpec,
    s0: f64,
    i0: f64,
    days: usize,
    seed: u64,
) -> (sird_control::CaseSeries, Vec<sird_control::UncertaintyDraw>) {
    use sird_control::model::step;
    let draws =
        sird_control::sampling::draw_sequence(uncertainty, sird_control::SeedSpec::new(seed, 0), days - 1).unwrap();
    let mut state = sird_control::SirdState { k: 0, s: s0, i: i0, r: 0.0, d: 0.0 };
    let (mut confirmed, mut deaths) = (vec![state.i], vec![state.d]);
    for d in &draws {
        state = step(&state, d, state.i).unwrap();
        confirmed.push(state.i);
        deaths.push(state.d);
    }
    let start = chrono::NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
    (sird_control::CaseSeries::from_counts(start, confirmed, deaths).unwrap(), draws)
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
