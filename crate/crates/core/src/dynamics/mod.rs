//! Time evolution of the band-limited kinetic equation
//!
//! ```text
//! ∂_t f = -(1/ε) Λ(v·∇_x f) - 1/(ε² ν*) L f + κ/(ε ν*) L Λ(f²) - (κ²/ν*) Λ(f³)
//! ```
//!
//! together with its steppers, the Picard fixed-point solver and the energy
//! monitor.

mod energy;
mod integrators;
mod picard;
mod rhs;

pub use energy::{energy_report, EnergyReport, TrajectoryRecord, TOL_ENERGY_REL};
pub use integrators::{capped_dt, integrate, step, step_imex, step_rk4, Integrator, RunOptions, StepObserver};
pub use picard::{picard_solve, PicardReport};
pub use rhs::{nonstiff_rhs, rhs, transport};

use serde::{Deserialize, Serialize};

use crate::projections::ProjectionError;
use crate::spectral_core::SpectralField;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("non-finite state at t = {t} after {steps} steps")]
    NonFinite { t: f64, steps: usize, last_good: Box<SpectralField> },
    #[error("Picard iteration is not contracting (successive differences {history:?})")]
    NonContracting { history: Vec<f64> },
    #[error("{0}")]
    Observer(String),
}

/// Knudsen number, relaxation scale and nonlinearity strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    pub epsilon: f64,
    pub nu_star: f64,
    pub kappa: f64,
}

impl KineticParams {
    pub fn new(epsilon: f64, nu_star: f64, kappa: f64) -> Result<Self, DynamicsError> {
        let p = Self { epsilon, nu_star, kappa };
        p.validate()?;
        Ok(p)
    }

    /// `κ = √3`, the value used in the limit system.
    pub fn with_default_kappa(epsilon: f64, nu_star: f64) -> Result<Self, DynamicsError> {
        Self::new(epsilon, nu_star, 3f64.sqrt())
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (name, v) in [("epsilon", self.epsilon), ("nu_star", self.nu_star), ("kappa", self.kappa)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Limit viscosity `ν = ν*/12`.
    pub fn nu(&self) -> f64 {
        self.nu_star / 12.0
    }

    /// Stiff relaxation rate `1/(ε² ν*)`.
    pub fn relaxation_rate(&self) -> f64 {
        1.0 / (self.epsilon * self.epsilon * self.nu_star)
    }
}

/// Closed-form solution of `f' = -(κ²/ν*) f³` for a spatially homogeneous
/// constant state.
pub fn homogeneous_solution(f0: f64, t: f64, params: &KineticParams) -> f64 {
    f0 / (1.0 + 2.0 * params.kappa * params.kappa * f0 * f0 * t / params.nu_star).sqrt()
}
