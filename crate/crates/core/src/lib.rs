//! Spectral-Galerkin simulator for a band-limited kinetic equation with a
//! relaxation-plus-cubic collision operator, together with an exact oracle
//! for its moment-closure coefficients and tools for studying the
//! incompressible Navier-Stokes-Fourier limit.

pub mod closure;
pub mod dynamics;
pub mod harness;
pub mod hydro;
pub mod legendre_basis;
pub mod moment_oracle;
pub mod projections;
pub mod spectral_core;
