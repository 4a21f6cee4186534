//! Closed-form expectations next to the mean recursion, and path oracles next
//! to a simulated path.

use sird_control::closed_form::{
    expected_deceased_limit, expected_deceased_linear, expected_infected_linear, expected_susceptible_linear,
    infected_bound_pathwise, infected_path_oracle, susceptible_nonneg_horizon,
};
use sird_control::simulate::run_path;
use sird_control::{DistributionSpec, PolicyConfig, Scenario, UncertaintySpec};

fn main() -> sird_control::Result<()> {
    let uncertainty = UncertaintySpec::new(
        DistributionSpec::uniform(0.1, 0.3),
        DistributionSpec::uniform(0.1, 0.2),
        DistributionSpec::uniform(0.0, 0.004),
    );
    let params = uncertainty.implied_params(1e6, 100.0)?;
    let gain = 1.4;
    let horizon = 100;

    let i = expected_infected_linear(&params, gain, horizon)?;
    let s = expected_susceptible_linear(&params, gain, horizon)?;
    let d = expected_deceased_linear(&params, gain, horizon)?;
    println!("{:>4} {:>12} {:>14} {:>10}", "day", "E[I]", "E[S]", "E[D]");
    for k in [0, 1, 10, 50, 100] {
        println!("{k:>4} {:>12.4} {:>14.2} {:>10.4}", i.values[k], s.values[k], d.values[k]);
    }
    println!("E[D] limit: {:?}", expected_deceased_limit(&params, gain)?);
    println!("S stays nonnegative for {:?}", susceptible_nonneg_horizon(&params)?);
    println!("pathwise I bound on day 10: {:.2}", infected_bound_pathwise(&params, gain, 10)?[10]);

    let scenario = Scenario {
        params,
        uncertainty,
        policy: PolicyConfig::new(gain, 2.0)?,
        horizon: 50,
        paths: 1,
        master_seed: 3,
        price: None,
        initial_budget: 0.0,
        allow_beyond_window: false,
    };
    let path = run_path(&scenario, 0)?;
    let oracle = infected_path_oracle(&scenario.params, &path.draws, &path.controls)?;
    let worst = oracle
        .iter()
        .zip(&path.states)
        .map(|(o, s)| (o - s.i).abs() / s.i.abs().max(scenario.params.i0))
        .fold(0.0, f64::max);
    println!("infected oracle vs recursion over 50 days: max relative gap {worst:e}");
    Ok(())
}
