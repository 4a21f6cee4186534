//! Stochastic SIRD epidemic model with a linear quarantine policy.
//!
//! The crate covers the discrete-time model and its transition factor
//! ([`model`]), seeded sampling of the uncertain rates ([`sampling`]), gain
//! selection under almost-sure and average stability ([`policy`]), closed-form
//! expectations and bounds ([`closed_form`]), Monte Carlo ensembles with
//! validation ([`simulate`]) and rate estimation from case counts
//! ([`estimate`]). [`cli`] holds the commands behind the `sird` binary.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod estimate;
pub mod model;
pub mod policy;
pub mod sampling;
pub mod simulate;

pub use error::{Result, SirdError};
pub use estimate::{CaseSeries, EstimateResult, LoadOptions};
pub use model::{ModelParams, SirdState, UncertaintyDraw};
pub use policy::{ControlMode, GainFeasibility, PolicyConfig};
pub use sampling::{DistributionSpec, SeedSpec, UncertaintySpec};
pub use simulate::{EnsembleSummary, Scenario, Trajectory};
