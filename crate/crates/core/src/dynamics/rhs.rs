use super::{DynamicsError, KineticParams};
use crate::legendre_basis::BasisSet;
use crate::projections::micro_project;
use crate::spectral_core::{derivative_x, multiply_by_sawtooth, square_and_cube, SpectralField};

/// `Λ(v·∇_x f)`.
pub fn transport(f: &SpectralField) -> SpectralField {
    let band = f.band();
    let mut out = SpectralField::zeros(band);
    for j in 0..3 {
        out += &multiply_by_sawtooth(&derivative_x(f, j), j, band);
    }
    out
}

/// Everything except the linear relaxation:
/// `-(1/ε) Λ(v·∇f) + κ/(εν*) L Λ(f²) - (κ²/ν*) Λ(f³)`.
pub fn nonstiff_rhs(f: &SpectralField, params: &KineticParams, basis: &BasisSet) -> Result<SpectralField, DynamicsError> {
    let band = f.band();
    let (sq, cu) = square_and_cube(f, band);
    let lsq = micro_project(&sq, basis)?;
    let mut out = &transport(f) * (-1.0 / params.epsilon);
    out.axpy(params.kappa / (params.epsilon * params.nu_star), &lsq);
    out.axpy(-params.kappa * params.kappa / params.nu_star, &cu);
    Ok(out)
}

/// Full time derivative of the band-limited equation.
pub fn rhs(f: &SpectralField, params: &KineticParams, basis: &BasisSet) -> Result<SpectralField, DynamicsError> {
    let mut out = nonstiff_rhs(f, params, basis)?;
    let lf = micro_project(f, basis)?;
    out.axpy(-params.relaxation_rate(), &lf);
    Ok(out)
}
