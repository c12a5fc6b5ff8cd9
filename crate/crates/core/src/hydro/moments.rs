use num_complex::Complex64;
use serde::Serialize;

use super::HydroError;
use crate::closure::{ClosureConstants, ClosureTensors};
use crate::dynamics::KineticParams;
use crate::legendre_basis::{sawtooth_coeff, BasisSet, Profile, Separable};
use crate::projections::{leray, macro_project, moments, MacroState};
use crate::spectral_core::{divergence, inner_v, outer, product, square_and_cube, v_moment, Band, SpectralField, XField};

/// `(ρ, u, θ)` of `f`.
pub fn extract_moments(f: &SpectralField, basis: &BasisSet) -> Result<MacroState, HydroError> {
    Ok(moments(f, basis)?)
}

/// `Λ(p(v) v)` for a one-dimensional profile `p`, by direct convolution with
/// the untruncated sawtooth.
fn times_v(p: &Profile) -> Profile {
    let k = (p.len() / 2) as i64;
    (-k..=k)
        .map(|m| {
            (-k..=k).map(|q| p[(q + k) as usize] * sawtooth_coeff(m - q)).sum::<Complex64>()
        })
        .collect()
}

/// Velocity weights of the fluxes: `Λ(v^ε_i v_j)` and `Λ(e2_sum v_j)`,
/// built from one-dimensional profiles.
#[derive(Clone, Debug)]
pub struct FluxWeights {
    pub momentum: [[SpectralField; 3]; 3],
    pub energy: [SpectralField; 3],
}

impl FluxWeights {
    pub fn new(basis: &BasisSet) -> Self {
        let n = basis.n_v();
        let saw = basis.saw_profile();
        let vsq = basis.vsq_profile();
        let one = basis.sep_e0().terms[0].1[0].clone();
        let axes = |pairs: &[(usize, &Profile)]| {
            let mut p = [one.clone(), one.clone(), one.clone()];
            for (a, q) in pairs {
                p[*a] = (*q).clone();
            }
            p
        };
        let momentum = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let profiles = if i == j { axes(&[(i, &times_v(saw))]) } else { axes(&[(i, saw), (j, saw)]) };
                Separable { terms: vec![(1.0, profiles)] }.to_field(n)
            })
        });
        let energy = std::array::from_fn(|j| {
            let mut terms = Vec::new();
            for i in 0..3 {
                let profiles = if i == j { axes(&[(i, &times_v(vsq))]) } else { axes(&[(i, vsq), (j, saw)]) };
                terms.push((basis.c2, profiles));
            }
            terms.push((-3.0 * basis.c0, axes(&[(j, saw)])));
            Separable { terms }.to_field(n)
        });
        Self { momentum, energy }
    }
}

/// `L^2` norms of the three conservation laws and of their closed forms.
///
/// ```text
/// mass      ε ∂_t ρ + div u / c1 + ε κ²/ν* <f³>
/// momentum  ε ∂_t u_i + c1 ∂_j <Λ(v^ε_i v_j) f> + ε c1 κ²/ν* <v^ε_i f³>
/// energy    ε ∂_t θ_s + ∂_j <Λ(e2_sum v_j) f> + ε κ²/ν* <e2_sum f³>
/// ```
///
/// The closed forms replace the fluxes by `∂_i(μ2 ρ + μ1 θ_s) + c1 ∂_j <A_ij L f>`
/// and `μ3 div u + c2 ∂_j <B_j L f>`. Here `θ_s` is the moment against
/// `e2_sum`. The cube is recomputed through two padded pairwise products.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct MomentResiduals {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub momentum_closed: f64,
    pub energy_closed: f64,
}

impl MomentResiduals {
    pub fn max(&self) -> f64 {
        [self.mass, self.momentum, self.energy, self.momentum_closed, self.energy_closed].into_iter().fold(0.0, f64::max)
    }
}

/// Above this, a residual indicates an implementation error.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// `f^3` through two exact pairwise products. The x-band is a Euclidean
/// ball, so `f^2` needs radius `2 N_x` (the sum of two `|n| < N_x`), while the
/// cube in `v` needs only `2 N_v - 1`.
fn cube_by_pairs(f: &SpectralField) -> SpectralField {
    let band = f.band();
    let wide = Band::new(2 * band.x_radius(), 2 * band.v_halfwidth() - 1).expect("nonempty");
    let sq = product(f, f, wide);
    product(&sq, f, band)
}

#[allow(clippy::too_many_arguments)]
pub fn moment_residuals(
    f: &SpectralField,
    rhs_f: &SpectralField,
    params: &KineticParams,
    basis: &BasisSet,
    consts: &ClosureConstants,
    tensors: &ClosureTensors,
    weights: &FluxWeights,
) -> Result<MomentResiduals, HydroError> {
    let b = basis.fields();
    let w = |g: &SpectralField, weight: &SpectralField| v_moment(g, weight).map_err(HydroError::from);
    let eps = params.epsilon;
    let damp = params.kappa * params.kappa / params.nu_star;
    let c1 = basis.c1;
    let cube = cube_by_pairs(f);

    let (state, p) = macro_project(f, basis)?;
    let lf = f - &p;
    let theta_s = w(f, &b.e2_sum)?;
    let div_u = divergence(&state.u);

    let mut mass = &w(rhs_f, &b.e0)? * eps;
    mass.axpy(1.0 / c1, &div_u);
    mass.axpy(eps * damp, &w(&cube, &b.e0)?);

    let boussinesq = {
        let mut z = &state.rho * consts.mu(2);
        z.axpy(consts.mu(1), &theta_s);
        z
    };
    let (mut mom_sq, mut closed_sq) = (0.0, 0.0);
    for i in 0..3 {
        let mut base = &w(rhs_f, &b.e1[i])? * eps;
        base.axpy(eps * c1 * damp, &w(&cube, &b.v_eps[i])?);
        let mut open = base.clone();
        let mut closed = base;
        closed += &boussinesq.derivative(i);
        for j in 0..3 {
            open.axpy(c1, &w(f, &weights.momentum[i][j])?.derivative(j));
            closed.axpy(c1, &w(&lf, &tensors.a[i][j])?.derivative(j));
        }
        mom_sq += open.l2_norm().powi(2);
        closed_sq += closed.l2_norm().powi(2);
    }

    let mut base = &w(rhs_f, &b.e2_sum)? * eps;
    base.axpy(eps * damp, &w(&cube, &b.e2_sum)?);
    let mut energy = base.clone();
    let mut energy_closed = base;
    energy_closed.axpy(consts.mu(3), &div_u);
    for j in 0..3 {
        energy += &w(f, &weights.energy[j])?.derivative(j);
        energy_closed.axpy(basis.c2, &w(&lf, &tensors.b[j])?.derivative(j));
    }

    Ok(MomentResiduals {
        mass: mass.l2_norm(),
        momentum: mom_sq.sqrt(),
        energy: energy.l2_norm(),
        momentum_closed: closed_sq.sqrt(),
        energy_closed: energy_closed.l2_norm(),
    })
}

/// `‖∇(μ2 ρ + μ1 θ_s)‖` and `‖∇(3√5 ρ + 2 θ_s)‖` in `L^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoussinesqResidual {
    pub eps_form: f64,
    pub limit_form: f64,
}

pub fn boussinesq_residual(state: &MacroState, consts: &ClosureConstants) -> BoussinesqResidual {
    let theta_s = state.theta_sum();
    let mut eps = &state.rho * consts.mu(2);
    eps.axpy(consts.mu(1), &theta_s);
    let mut lim = &state.rho * (3.0 * 5f64.sqrt());
    lim.axpy(2.0, &theta_s);
    BoussinesqResidual { eps_form: eps.grad_norm(), limit_form: lim.grad_norm() }
}

/// `θ̃ = θ_s - (2√5/5) ρ`.
pub fn theta_tilde(state: &MacroState) -> XField {
    let mut t = state.theta_sum();
    t.axpy(-2.0 * 5f64.sqrt() / 5.0, &state.rho);
    t
}

/// `Λ(ρ0 + 2√3 v·u0 + 6√5 (|v|^2 - 1/4) θ0)` on `band`.
pub fn lift_initial(rho0: &XField, u0: &[XField; 3], theta0: &XField, basis: &BasisSet, band: Band) -> SpectralField {
    let b = basis.fields();
    let mut f = outer(rho0, &b.one, band);
    for i in 0..3 {
        f += &outer(&u0[i], &(&b.v_eps[i] * (2.0 * 3f64.sqrt())), band);
    }
    f += &outer(theta0, &thermal_profile(basis), band);
    f
}

fn thermal_profile(basis: &BasisSet) -> SpectralField {
    let b = basis.fields();
    let mut w = &b.v_eps_sq * (6.0 * 5f64.sqrt());
    w.axpy(-6.0 * 5f64.sqrt() / 4.0, &b.one);
    w
}

/// Which Boussinesq relation [`well_prepare`] enforces at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoussinesqForm {
    /// `∇(3√5 ρ + 2 θ_s) = 0`.
    Limit,
    /// `∇(μ2 ρ + μ1 θ_s) = 0` with the constants of the band.
    Epsilon,
}

/// Replace `u0` by `ℙ u0` and the fluctuation of `ρ0` by the one that makes
/// the chosen Boussinesq combination constant for the lifted field.
pub fn well_prepare(
    rho0: &XField,
    u0: &[XField; 3],
    theta0: &XField,
    basis: &BasisSet,
    form: BoussinesqForm,
) -> Result<(XField, [XField; 3], XField), HydroError> {
    // θ_s of the lifted field per unit θ0
    let gain = inner_v(&thermal_profile(basis), &basis.fields().e2_sum);
    let ratio = match form {
        BoussinesqForm::Limit => 2.0 / (3.0 * 5f64.sqrt()),
        BoussinesqForm::Epsilon => {
            let k = ClosureConstants::compute(basis).map_err(|e| HydroError::InvalidInput(e.to_string()))?;
            k.mu(1) / k.mu(2)
        }
    };
    let mean = rho0.get([0, 0, 0]);
    let mut rho = theta0 * (-ratio * gain);
    let shift = mean - rho.get([0, 0, 0]);
    rho.set([0, 0, 0], rho.get([0, 0, 0]) + shift);
    Ok((rho, leray(u0), theta0.clone()))
}

/// `∫_T³ <e ℛ>` for `e` in `{e0, e1, e2}`, with
/// `ℛ = 3 (Pf)² Lf + 3 Pf (Lf)² + (Lf)³ = f³ - (Pf)³`.
pub fn remainder_moments(f: &SpectralField, basis: &BasisSet) -> Result<[f64; 5], HydroError> {
    let (_, p) = macro_project(f, basis)?;
    let (_, full) = square_and_cube(f, f.band());
    let (_, proj) = square_and_cube(&p, f.band());
    let r = &full - &proj;
    let b = basis.fields();
    let ws = [&b.e0, &b.e1[0], &b.e1[1], &b.e1[2], &b.e2];
    let mut out = [0.0; 5];
    for (o, wt) in out.iter_mut().zip(ws) {
        *o = v_moment(&r, wt)?.mean();
    }
    Ok(out)
}
