//! Runs the two shipped US 2020 scenarios and writes their summaries, the
//! same files `sird simulate` produces. Pass an output directory as the first
//! argument; defaults to a temporary directory.

use std::path::PathBuf;

use sird_control::cli::{cmd_select_gain, cmd_simulate, ScenarioConfig};
use sird_control::ControlMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let out_root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| tmp.path().to_path_buf());
    let scenarios = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");

    for (name, mode) in [("us_almost_sure", ControlMode::AlmostSure), ("us_average", ControlMode::Average)] {
        let config = ScenarioConfig::load(scenarios.join(format!("{name}.toml")))?;
        let f = cmd_select_gain(&config.scenario.params, mode, config.scenario.policy.resource_cap)?;
        println!(
            "{name}: verdict {:?}, K* = {:.4}, running with K = {}",
            f.verdict, f.selected_gain, config.scenario.policy.gain
        );
        let out = cmd_simulate(&config, &out_root.join(name))?;
        println!("  wrote {}", out.summary_path.display());
        for check in out.report.validation.failures() {
            println!("  failed {}: {}", check.name, check.detail);
        }
    }
    Ok(())
}
