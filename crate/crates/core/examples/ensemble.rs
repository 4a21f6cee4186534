//! Monte Carlo ensemble with a priced control budget, validated against the
//! conservation law, the pathwise bounds and the closed forms.

use sird_control::simulate::{run_ensemble, validate_ensemble, Compartment};
use sird_control::{DistributionSpec, PolicyConfig, Scenario, UncertaintySpec};

fn main() -> sird_control::Result<()> {
    let uncertainty = UncertaintySpec::new(
        DistributionSpec::uniform(0.1, 0.3),
        DistributionSpec::uniform(0.1, 0.2),
        DistributionSpec::uniform(0.0, 0.004),
    );
    let scenario = Scenario {
        params: uncertainty.implied_params(1e6, 100.0)?,
        uncertainty,
        policy: PolicyConfig::new(1.4, 2.0)?,
        horizon: 120,
        paths: 2000,
        master_seed: 11,
        price: Some(DistributionSpec::uniform(0.5, 1.5)),
        initial_budget: 0.0,
        allow_beyond_window: false,
    };
    let summary = run_ensemble(&scenario)?;

    for c in [Compartment::I, Compartment::D, Compartment::B] {
        let s = &summary.series(c)[scenario.horizon];
        println!(
            "{} on day {}: mean {:.3} ± {:.3}, 5-95% [{:.3}, {:.3}]",
            c.label(),
            scenario.horizon,
            s.mean,
            s.stderr,
            s.p05,
            s.p95
        );
    }

    let report = validate_ensemble(&summary, &scenario.params, scenario.policy.gain)?;
    for check in &report.checks {
        println!("{:<30} {:?}  {}", check.name, check.status, check.detail);
    }
    println!("passed: {}", report.passed);
    Ok(())
}
