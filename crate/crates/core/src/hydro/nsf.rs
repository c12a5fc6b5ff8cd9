//! Pseudo-spectral reference solver for the limit system
//!
//! ```text
//! ∂_t u - ν Δu + ℙ(u·∇u) = ℙ f_u,                 div u = 0
//! ∂_t θ̃ - (291/133) ν Δθ̃ + (97/35) u·∇θ̃ = f_θ
//! ```
//!
//! Diffusion is integrated exactly through the integrating factor, the
//! advection and forcing by RK4 in the Lawson form. Products are computed
//! on a padded grid and truncated back to the band, so no aliasing enters.

use std::f64::consts::PI;

use super::forcing::ForcingSource;
use super::HydroError;
use crate::projections::leray;
use crate::spectral_core::{divergence, XField};

/// Diffusivity of `θ̃` relative to `ν`.
pub const THETA_DIFFUSION: f64 = 291.0 / 133.0;
/// Advection speed of `θ̃` relative to `u`.
pub const THETA_ADVECTION: f64 = 97.0 / 35.0;

#[derive(Clone, Debug, PartialEq)]
pub struct NsfState {
    pub u: [XField; 3],
    pub theta_tilde: XField,
    pub nu: f64,
}

impl NsfState {
    /// Projects `u` onto divergence-free fields.
    pub fn new(u: [XField; 3], theta_tilde: XField, nu: f64) -> Result<Self, HydroError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(HydroError::InvalidInput(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self { u: leray(&u), theta_tilde, nu })
    }

    pub fn zeros(n_x: usize, nu: f64) -> Self {
        Self { u: std::array::from_fn(|_| XField::zeros(n_x)), theta_tilde: XField::zeros(n_x), nu }
    }

    pub fn x_radius(&self) -> usize {
        self.theta_tilde.x_radius()
    }

    /// `½ ||u||^2`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.u.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>()
    }

    pub fn divergence_norm(&self) -> f64 {
        divergence(&self.u).l2_norm()
    }

    fn is_finite(&self) -> bool {
        self.u.iter().all(XField::is_finite) && self.theta_tilde.is_finite()
    }
}

type Stage = [XField; 4];

fn pack(s: &NsfState) -> Stage {
    [s.u[0].clone(), s.u[1].clone(), s.u[2].clone(), s.theta_tilde.clone()]
}

fn axpy(y: &mut Stage, a: f64, x: &Stage) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.axpy(a, xi);
    }
}

struct Factor {
    nu: f64,
}

impl Factor {
    /// `exp(τ D)` with the diffusion symbol `D = -4π²|k|² (ν, ν, ν, (291/133) ν)`.
    fn apply(&self, s: &Stage, tau: f64) -> Stage {
        std::array::from_fn(|c| {
            let d = if c == 3 { THETA_DIFFUSION * self.nu } else { self.nu };
            s[c].map_modes(|k| {
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                (-4.0 * PI * PI * k2 * d * tau).exp().into()
            })
        })
    }
}

/// `-ℙ(u·∇u) + ℙ f_u` and `-(97/35) u·∇θ̃ + f_θ`.
fn nonlinear(s: &Stage, forcing: Option<&dyn ForcingSource>, t: f64) -> Stage {
    let n = s[0].x_radius();
    let u = [&s[0], &s[1], &s[2]];
    let advect = |q: &XField| {
        let mut out = XField::zeros(n);
        for j in 0..3 {
            out += &XField::product(&[u[j], &q.derivative(j)], n);
        }
        out
    };
    let mut mom: [XField; 3] = std::array::from_fn(|i| &advect(&s[i]) * -1.0);
    let mut heat = &advect(&s[3]) * -THETA_ADVECTION;
    if let Some(src) = forcing {
        let f = src.at(t);
        for i in 0..3 {
            mom[i] += &f.u[i];
        }
        heat += &f.theta;
    }
    let mom = leray(&mom);
    let [a, b, c] = mom;
    [a, b, c, heat]
}

/// One Lawson-RK4 step from time `t`.
pub fn nsf_step(state: &NsfState, t: f64, dt: f64, forcing: Option<&dyn ForcingSource>) -> Result<NsfState, HydroError> {
    if !(dt > 0.0) {
        return Err(HydroError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let n = state.x_radius();
    let umax = state.u.iter().map(|c| c.coeffs().iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let cfl = umax * dt * 2.0 * PI * (n.saturating_sub(1)) as f64;
    if cfl > 1.0 {
        log::warn!("advective CFL number {cfl:.3} exceeds 1 at t = {t}");
    }

    let e = Factor { nu: state.nu };
    let s = pack(state);
    let h = dt;
    let k1 = nonlinear(&s, forcing, t);
    let mut y = s.clone();
    axpy(&mut y, 0.5 * h, &k1);
    let y = e.apply(&y, 0.5 * h);
    let k2 = nonlinear(&y, forcing, t + 0.5 * h);
    let mut y = e.apply(&s, 0.5 * h);
    axpy(&mut y, 0.5 * h, &k2);
    let k3 = nonlinear(&y, forcing, t + 0.5 * h);
    let mut y = e.apply(&s, h);
    axpy(&mut y, h, &e.apply(&k3, 0.5 * h));
    let k4 = nonlinear(&y, forcing, t + h);

    let mut out = e.apply(&s, h);
    axpy(&mut out, h / 6.0, &e.apply(&k1, h));
    let mut mid = k2;
    axpy(&mut mid, 1.0, &k3);
    axpy(&mut out, h / 3.0, &e.apply(&mid, 0.5 * h));
    axpy(&mut out, h / 6.0, &k4);

    let [a, b, c, th] = out;
    let next = NsfState { u: leray(&[a, b, c]), theta_tilde: th, nu: state.nu };
    if !next.is_finite() {
        return Err(HydroError::NonFinite { t: t + h });
    }
    Ok(next)
}

/// Run from `t = 0` to `t_end`, calling `observe(t, state)` after every step
/// (and once at `t = 0`).
pub fn nsf_run(
    initial: &NsfState,
    dt: f64,
    t_end: f64,
    forcing: Option<&dyn ForcingSource>,
    mut observe: impl FnMut(f64, &NsfState),
) -> Result<NsfState, HydroError> {
    let mut s = initial.clone();
    observe(0.0, &s);
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut t = 0.0;
    for k in 1..=steps {
        let h = if k == steps { t_end - t } else { dt };
        s = nsf_step(&s, t, h, forcing)?;
        t = if k == steps { t_end } else { t + h };
        observe(t, &s);
    }
    Ok(s)
}
