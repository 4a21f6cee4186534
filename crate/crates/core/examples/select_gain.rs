//! Gain selection in both stability modes, including an uncontrollable case
//! where the feasible interval lies beyond the resource cap.

use sird_control::policy::{feasibility_almost_sure, feasibility_average, GainFeasibility};
use sird_control::ModelParams;

fn show(label: &str, f: &GainFeasibility) {
    println!(
        "{label}: interval {:?}, capped {:?}, threshold {:.4}, proviso {}, verdict {:?}, K* = {:.4}",
        f.interval.map(|i| (i.lo, i.hi)),
        f.capped.map(|i| (i.lo, i.hi)),
        f.threshold,
        f.proviso_holds,
        f.verdict,
        f.selected_gain
    );
}

fn main() -> sird_control::Result<()> {
    let fitted = ModelParams {
        s0: 1e6,
        i0: 100.0,
        delta_max: 0.5135,
        d_max: 0.0449,
        v_min: 0.1,
        v_max: 0.2,
        delta_mean: 0.215,
        d_mean: 0.002,
        v_mean: 0.15,
    };
    show("almost sure", &feasibility_almost_sure(&fitted, 2.0)?);
    show("average", &feasibility_average(&fitted, 2.0)?);

    let stable = ModelParams {
        delta_max: 0.1,
        d_max: 0.05,
        v_min: 0.4,
        v_max: 0.6,
        delta_mean: 0.05,
        d_mean: 0.025,
        v_mean: 0.5,
        ..fitted
    };
    show("stable", &feasibility_almost_sure(&stable, 1.0)?);

    let weak = ModelParams {
        delta_max: 0.1,
        d_max: 0.01,
        v_min: 0.01,
        v_max: 0.01,
        delta_mean: 0.1,
        d_mean: 0.01,
        v_mean: 0.01,
        ..fitted
    };
    show("weak control", &feasibility_almost_sure(&weak, 1.0)?);
    Ok(())
}
