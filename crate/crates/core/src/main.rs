use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sird_control::cli::{self, CliError, ScenarioConfig, EXIT_OK, EXIT_VALIDATION};
use sird_control::estimate::{DeathsColumn, LoadOptions};
use sird_control::{ControlMode, ModelParams};

#[derive(Parser)]
#[command(name = "sird", version, about = "Stochastic SIRD epidemic control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the death rate and infection rate from a case series CSV.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        /// Mean recovery-per-control rate assumed known.
        #[arg(long)]
        v_mean: f64,
        /// The deaths column holds daily counts rather than cumulative ones.
        #[arg(long)]
        daily_deaths: bool,
        /// Replace confirmed counts by their trailing sum over this many days.
        #[arg(long)]
        active_window: Option<usize>,
    },
    /// Report the stabilizing gain interval and the selected gain.
    SelectGain {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "almost-sure")]
        mode: Mode,
        /// Resource cap on the gain.
        #[arg(long)]
        cap: f64,
    },
    /// Run a Monte Carlo ensemble and write summary.csv and report.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the ensemble checks and the closed-form oracle comparison.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    AlmostSure,
    Average,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    delta_max: f64,
    #[arg(long)]
    d_max: f64,
    #[arg(long)]
    v_min: f64,
    #[arg(long)]
    v_max: f64,
    /// Defaults to --delta-max.
    #[arg(long)]
    delta_mean: Option<f64>,
    /// Defaults to --d-max.
    #[arg(long)]
    d_mean: Option<f64>,
    /// Defaults to --v-min.
    #[arg(long)]
    v_mean: Option<f64>,
    #[arg(long, default_value_t = 1e6)]
    s0: f64,
    #[arg(long, default_value_t = 100.0)]
    i0: f64,
}

impl ParamArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            s0: self.s0,
            i0: self.i0,
            delta_max: self.delta_max,
            d_max: self.d_max,
            v_min: self.v_min,
            v_max: self.v_max,
            delta_mean: self.delta_mean.unwrap_or(self.delta_max),
            d_mean: self.d_mean.unwrap_or(self.d_max),
            v_mean: self.v_mean.unwrap_or(self.v_min),
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn load(config: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut config = ScenarioConfig::load(config)?;
    if let Some(seed) = seed {
        config.scenario.master_seed = seed;
    }
    Ok(config)
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Estimate { data, v_mean, daily_deaths, active_window } => {
            let options = LoadOptions {
                deaths: if daily_deaths { DeathsColumn::Daily } else { DeathsColumn::Cumulative },
                active_window,
            };
            print_json(&cli::cmd_estimate(&data, v_mean, &options)?);
            Ok(EXIT_OK)
        }
        Command::SelectGain { params, mode, cap } => {
            let mode = match mode {
                Mode::AlmostSure => ControlMode::AlmostSure,
                Mode::Average => ControlMode::Average,
            };
            print_json(&cli::cmd_select_gain(&params.params(), mode, cap)?);
            Ok(EXIT_OK)
        }
        Command::Simulate { config, out_dir, seed } => {
            let config = load(&config, seed)?;
            let dir = cli::resolve_out_dir(&config, out_dir.as_deref());
            let output = cli::cmd_simulate(&config, &dir)?;
            eprintln!("wrote {} and {}", output.summary_path.display(), output.report_path.display());
            Ok(if output.report.validation.passed { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Verify { config, seed } => {
            let report = cli::cmd_verify(&load(&config, seed)?)?;
            if report.passed {
                eprintln!("all checks passed");
                Ok(EXIT_OK)
            } else {
                print_json(&report.failures());
                Ok(EXIT_VALIDATION)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
