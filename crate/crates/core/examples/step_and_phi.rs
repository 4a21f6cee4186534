//! One day of the model by hand, then the transition factor over a sampled
//! sequence and its bounds.

use sird_control::model::{phi, phi_bounds, phi_expectation, reproduction_ratio, step};
use sird_control::sampling::draw_sequence;
use sird_control::{DistributionSpec, ModelParams, SeedSpec, UncertaintyDraw, UncertaintySpec};

fn main() -> sird_control::Result<()> {
    let params = ModelParams {
        s0: 1_000_000.0,
        i0: 100.0,
        delta_max: 0.3,
        d_max: 0.004,
        v_min: 0.1,
        v_max: 0.2,
        delta_mean: 0.2,
        d_mean: 0.002,
        v_mean: 0.15,
    };
    params.validate()?;

    let state = params.initial_state();
    let draw = UncertaintyDraw::new(0.25, 0.15, 0.003);
    let gain = 1.4;
    let next = step(&state, &draw, gain * state.i)?;
    println!("day 0: {state:?}");
    println!("day 1: {next:?}");
    println!("total before {} after {}", state.total(), next.total());
    println!("R0 on day 0: {:.4}", reproduction_ratio(&state, &draw, gain)?);

    let spec = UncertaintySpec::new(
        DistributionSpec::uniform(0.1, 0.3),
        DistributionSpec::uniform(0.1, 0.2),
        DistributionSpec::uniform(0.0, 0.004),
    );
    let days = 30;
    let draws = draw_sequence(&spec, SeedSpec::new(7, 0), days)?;
    let (lo, hi) = phi_bounds(&params, days, 0)?;
    println!(
        "phi over {days} days: {:.4} (bounds {lo:.4} .. {hi:.4}, mean {:.4})",
        phi(&draws),
        phi_expectation(&params, days, 0)?
    );
    Ok(())
}
