//! Band-limited Fourier representation of functions on `T^3_x × Ω_v`,
//! where `Ω = [-1/2, 1/2]^3` is treated as a periodic cell.

mod band;
pub mod bernstein;
pub mod checkpoint;
mod field;
pub(crate) mod grid;
pub mod ops;
pub mod random;

pub use band::Band;
pub use field::{divergence, gradient, SpectralField, XField};
pub use ops::{
    cutoff, cutoff_v, cutoff_x, derivative_x, inner_v, multiply_by_sawtooth, outer, product,
    square_and_cube, v_moment, x_norm, XNorm,
};

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("band radii must be positive (got N_x = {n_x}, N_v = {n_v})")]
    EmptyBand { n_x: usize, n_v: usize },
    #[error("band scaling needs eps > 0 and gamma >= 0 (got eps = {epsilon}, gamma = {gamma})")]
    InvalidScaling { epsilon: f64, gamma: f64 },
    #[error("coefficient array has length {got}, band needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("moment weight must depend on v only")]
    WeightNotVOnly,
    #[error("band mismatch: {0}")]
    BandMismatch(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
