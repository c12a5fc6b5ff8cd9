//! Macroscopic projection `P` onto `span{e0, e1, e2}`, its complement
//! `L = I - P`, and the Helmholtz split of vector fields on the torus.

use num_complex::Complex64;
use serde::Serialize;

use crate::legendre_basis::BasisSet;
use crate::spectral_core::{outer, v_moment, Band, SpectralField, XField};

#[derive(Debug, thiserror::Error)]
pub enum ProjectionError {
    #[error("field has velocity band {field}, basis was built for {basis}")]
    BandMismatch { field: usize, basis: usize },
}

/// Density, velocity and temperature moments of a phase-space field.
///
/// `theta` is the coordinate along the unit-norm mode `e2`. The same moment
/// taken against the unnormalised weight `c2 v_ε^2 - 3 c0` is
/// [`MacroState::theta_sum`], equal to `√3 theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroState {
    pub rho: XField,
    pub u: [XField; 3],
    pub theta: XField,
}

impl MacroState {
    pub fn zeros(n_x: usize) -> Self {
        Self { rho: XField::zeros(n_x), u: std::array::from_fn(|_| XField::zeros(n_x)), theta: XField::zeros(n_x) }
    }

    pub fn x_radius(&self) -> usize {
        self.rho.x_radius()
    }

    pub fn theta_sum(&self) -> XField {
        self.theta.scale(3f64.sqrt())
    }

    /// `||ρ||^2 + |u|^2 + ||θ||^2` in `L^2`.
    pub fn l2_sq(&self) -> f64 {
        self.components().iter().map(|c| c.l2_norm().powi(2)).sum()
    }

    pub fn h1_sq(&self) -> f64 {
        self.components().iter().map(|c| c.h1_norm().powi(2)).sum()
    }

    pub fn components(&self) -> [&XField; 5] {
        [&self.rho, &self.u[0], &self.u[1], &self.u[2], &self.theta]
    }

    pub fn reality_defect(&self) -> f64 {
        self.components().iter().map(|c| c.reality_defect()).fold(0.0, f64::max)
    }
}

fn check(f: &SpectralField, basis: &BasisSet) -> Result<(), ProjectionError> {
    let n = f.band().v_halfwidth();
    if n != basis.n_v() {
        return Err(ProjectionError::BandMismatch { field: n, basis: basis.n_v() });
    }
    Ok(())
}

/// Moments of `f` against the basis.
pub fn moments(f: &SpectralField, basis: &BasisSet) -> Result<MacroState, ProjectionError> {
    check(f, basis)?;
    let b = basis.fields();
    let m = |w: &SpectralField| v_moment(f, w).expect("basis weights are v-only");
    Ok(MacroState { rho: m(&b.e0), u: [m(&b.e1[0]), m(&b.e1[1]), m(&b.e1[2])], theta: m(&b.e2) })
}

/// `ρ e0 + u·e1 + θ e2` on `band`.
pub fn reconstruct(state: &MacroState, basis: &BasisSet, band: Band) -> SpectralField {
    let b = basis.fields();
    let mut f = outer(&state.rho, &b.e0, band);
    for i in 0..3 {
        f += &outer(&state.u[i], &b.e1[i], band);
    }
    f += &outer(&state.theta, &b.e2, band);
    f
}

/// `(moments, P f)`.
pub fn macro_project(f: &SpectralField, basis: &BasisSet) -> Result<(MacroState, SpectralField), ProjectionError> {
    let state = moments(f, basis)?;
    let p = reconstruct(&state, basis, f.band());
    Ok((state, p))
}

/// `L f = f - P f`.
pub fn micro_project(f: &SpectralField, basis: &BasisSet) -> Result<SpectralField, ProjectionError> {
    let (_, p) = macro_project(f, basis)?;
    Ok(f - &p)
}

/// `exp(-τ L) f = P f + e^{-τ} L f`, exact because `L` is idempotent.
pub fn relax(f: &SpectralField, tau: f64, basis: &BasisSet) -> Result<SpectralField, ProjectionError> {
    let (_, p) = macro_project(f, basis)?;
    let mut out = f - &p;
    out = &out * (-tau).exp();
    out += &p;
    Ok(out)
}

/// Helmholtz decomposition `u = ℙu + ℚu`.
///
/// For `k ≠ 0`, `ℙu(k) = û(k) - (û(k)·k / |k|^2) k`. The mean `k = 0` is
/// divergence-free and goes to the solenoidal part.
pub fn helmholtz_project(u: &[XField; 3]) -> ([XField; 3], [XField; 3]) {
    let n_x = u[0].x_radius();
    let mut p: [XField; 3] = std::array::from_fn(|_| XField::zeros(n_x));
    let mut q: [XField; 3] = std::array::from_fn(|_| XField::zeros(n_x));
    for i in 0..u[0].coeffs().len() {
        let k = u[0].mode(i);
        if !u[0].keeps(k) {
            continue;
        }
        let uk = [u[0].get(k), u[1].get(k), u[2].get(k)];
        let k2: f64 = k.iter().map(|c| (c * c) as f64).sum();
        let proj: Complex64 = if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (0..3).map(|a| uk[a] * k[a] as f64).sum::<Complex64>() / k2
        };
        for a in 0..3 {
            let qa = proj * k[a] as f64;
            q[a].set(k, qa);
            p[a].set(k, uk[a] - qa);
        }
    }
    (p, q)
}

/// Solenoidal part only.
pub fn leray(u: &[XField; 3]) -> [XField; 3] {
    helmholtz_project(u).0
}

/// Norm diagnostics of a macro state.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitReport {
    pub total_sq: f64,
    pub macro_sq: f64,
    pub micro_sq: f64,
    pub defect: f64,
}

/// Compare `||f||^2` with `||ρ||^2 + |u|^2 + ||θ||^2 + ||L f||^2`, either in
/// `L^2` (`h1 = false`) or in the `X` norm.
pub fn orthogonal_split(f: &SpectralField, basis: &BasisSet, h1: bool) -> Result<SplitReport, ProjectionError> {
    let (state, p) = macro_project(f, basis)?;
    let l = f - &p;
    let norm = |g: &SpectralField| {
        let n = crate::spectral_core::x_norm(g);
        if h1 { n.h1 } else { n.l2 }
    };
    let total_sq = norm(f).powi(2);
    let macro_sq = if h1 { state.h1_sq() } else { state.l2_sq() };
    let micro_sq = norm(&l).powi(2);
    Ok(SplitReport { total_sq, macro_sq, micro_sq, defect: (total_sq - macro_sq - micro_sq).abs() })
}
