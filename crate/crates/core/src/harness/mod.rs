//! Command-line driver: TOML run configuration, initial data, run
//! orchestration and the files each subcommand writes.
//!
//! Every run directory receives a `manifest.json` with the configuration
//! echo, the crate version, the seed and the thread count.

mod cli;
mod config;
mod initial;
mod runs;

pub use cli::run_cli;
pub use config::{
    apply_override, BandSpec, InitialSpec, IntegratorKind, IntegratorSpec, LimitSpec, ModeSpec, NsfSpec, OutputSpec,
    ParamsSpec, Preset, RunConfig, Tolerances,
};
pub use initial::{initial_macro, load_initial, LoadedInitial};
pub use runs::{
    constants_report, energy_report_from_series, limit_config, run_constants, run_limit_study, run_nsf, run_verify_closure,
    simulate, ConstantsReport, NsfReport, NsfRow, Outcome, SeriesRow, SimulateOutput, SimulateReport, GRAM_TOLERANCE,
    NSF_DIVERGENCE_TOLERANCE,
};

use crate::closure::ClosureError;
use crate::dynamics::DynamicsError;
use crate::hydro::HydroError;
use crate::legendre_basis::BasisError;
use crate::projections::ProjectionError;
use crate::spectral_core::SpectralError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Unusable configuration or command line; exit code 2.
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Hydro(#[from] HydroError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}
