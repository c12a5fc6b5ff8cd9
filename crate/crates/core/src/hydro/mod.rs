//! Macroscopic side: moment identities of the truncated equation, the
//! Boussinesq relation, forcing terms, the reference limit solver and the
//! ε-sweep.

mod forcing;
mod limit;
mod moments;
mod nsf;

pub use forcing::{forcing_terms, ForcingSeries, ForcingSet, ForcingSource, NsfForcing, E_COEFFS, F_COEFFS, G_COEFFS};
pub use limit::{
    limit_solver_gap, limit_study, loglog_slope, run_member, summarize, sup_gap, InitialMacro, LimitChecks, LimitReport, LimitStudyConfig,
    MemberRun, PerEps, Slopes, S1_SLOPE_RANGE,
};
pub use moments::{
    boussinesq_residual, extract_moments, lift_initial, moment_residuals, remainder_moments, theta_tilde, well_prepare,
    BoussinesqForm, BoussinesqResidual, FluxWeights, MomentResiduals, IDENTITY_TOLERANCE,
};
pub use nsf::{nsf_run, nsf_step, NsfState, THETA_ADVECTION, THETA_DIFFUSION};

use crate::dynamics::DynamicsError;
use crate::projections::ProjectionError;
use crate::spectral_core::SpectralError;

#[derive(Debug, thiserror::Error)]
pub enum HydroError {
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("non-finite limit-solver state at t = {t}")]
    NonFinite { t: f64 },
    #[error("{0}")]
    InvalidInput(String),
    #[error("forcing file: {0}")]
    Forcing(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
