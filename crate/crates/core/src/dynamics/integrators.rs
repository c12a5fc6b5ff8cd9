use serde::{Deserialize, Serialize};

use super::energy::TrajectoryRecord;
use super::rhs::{nonstiff_rhs, rhs};
use super::{DynamicsError, KineticParams};
use crate::legendre_basis::BasisSet;
use crate::projections::{micro_project, moments, relax, MacroState};
use crate::spectral_core::{x_norm, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Imex,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "imex" => Ok(Self::Imex),
            "rk4" => Ok(Self::Rk4),
            other => Err(format!("unknown integrator {other:?} (expected imex or rk4)")),
        }
    }
}

fn rk4_with<F>(f: &SpectralField, dt: f64, mut g: F) -> Result<SpectralField, DynamicsError>
where
    F: FnMut(&SpectralField) -> Result<SpectralField, DynamicsError>,
{
    let k1 = g(f)?;
    let mut y = f.clone();
    y.axpy(0.5 * dt, &k1);
    let k2 = g(&y)?;
    y = f.clone();
    y.axpy(0.5 * dt, &k2);
    let k3 = g(&y)?;
    y = f.clone();
    y.axpy(dt, &k3);
    let k4 = g(&y)?;
    let mut out = f.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Classical RK4 on the full right-hand side.
///
/// Explicit in the relaxation term, so `dt` should stay well below
/// `ε² ν*`. [`integrate`] warns when it does not.
pub fn step_rk4(f: &SpectralField, dt: f64, params: &KineticParams, basis: &BasisSet) -> Result<SpectralField, DynamicsError> {
    rk4_with(f, dt, |y| rhs(y, params, basis))
}

/// Strang splitting: exact relaxation over `dt/2`, RK4 on the remaining
/// terms over `dt`, exact relaxation over `dt/2`.
pub fn step_imex(f: &SpectralField, dt: f64, params: &KineticParams, basis: &BasisSet) -> Result<SpectralField, DynamicsError> {
    let tau = 0.5 * dt * params.relaxation_rate();
    let half = relax(f, tau, basis)?;
    let moved = rk4_with(&half, dt, |y| nonstiff_rhs(y, params, basis))?;
    Ok(relax(&moved, tau, basis)?)
}

pub fn step(
    integrator: Integrator,
    f: &SpectralField,
    dt: f64,
    params: &KineticParams,
    basis: &BasisSet,
) -> Result<SpectralField, DynamicsError> {
    match integrator {
        Integrator::Imex => step_imex(f, dt, params, basis),
        Integrator::Rk4 => step_rk4(f, dt, params, basis),
    }
}

/// RK4 stays stable on the imaginary axis up to `|λ dt| ≈ 2.83`.
const RK4_IMAGINARY_BOUND: f64 = 2.8;

/// `min(requested, c ε, c dt_transport)`, where `dt_transport` keeps the
/// largest transport frequency `2π |n|_max (√3/2) / ε` inside the RK4
/// stability region.
pub fn capped_dt(requested: f64, params: &KineticParams, n_x: usize, c: f64) -> f64 {
    let kmax = (n_x.saturating_sub(1)) as f64;
    let freq = 2.0 * std::f64::consts::PI * kmax * 0.5 * 3f64.sqrt() / params.epsilon;
    let transport = if freq > 0.0 { RK4_IMAGINARY_BOUND / freq } else { f64::INFINITY };
    requested.min(c * params.epsilon).min(c * transport)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RunOptions {
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    /// Safety factor for [`capped_dt`]; `None` runs at the requested `dt`.
    pub dt_cap: Option<f64>,
    /// Keep a snapshot every this many steps (0 disables).
    pub checkpoint_every: usize,
    pub record_macro: bool,
}

impl RunOptions {
    pub fn new(integrator: Integrator, dt: f64, t_end: f64) -> Self {
        Self { integrator, dt, t_end, dt_cap: None, checkpoint_every: 0, record_macro: false }
    }
}

/// Callback invoked after every accepted step with `(step, t, f)`; step 0 is
/// the initial state.
pub trait StepObserver {
    fn observe(&mut self, step: usize, t: f64, f: &SpectralField) -> Result<(), DynamicsError>;
}

impl<F: FnMut(usize, f64, &SpectralField) -> Result<(), DynamicsError>> StepObserver for F {
    fn observe(&mut self, step: usize, t: f64, f: &SpectralField) -> Result<(), DynamicsError> {
        self(step, t, f)
    }
}

/// Advance `f0` to `t_end`, recording energy and dissipation at every step.
///
/// The final step is shortened to land exactly on `t_end`. A non-finite
/// state aborts with the last finite field attached to the error.
pub fn integrate(
    f0: &SpectralField,
    params: &KineticParams,
    basis: &BasisSet,
    opts: &RunOptions,
    observer: &mut dyn StepObserver,
) -> Result<(SpectralField, TrajectoryRecord), DynamicsError> {
    params.validate()?;
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) {
        return Err(DynamicsError::InvalidParams(format!("dt = {} and t_end = {} must be positive", opts.dt, opts.t_end)));
    }
    let n_x = f0.band().x_radius();
    let dt = match opts.dt_cap {
        Some(c) => capped_dt(opts.dt, params, n_x, c),
        None => opts.dt,
    };
    if opts.integrator == Integrator::Rk4 && dt * params.relaxation_rate() > 2.7 {
        log::warn!(
            "rk4 with dt = {dt} exceeds the relaxation stability bound (dt/(ε²ν*) = {:.3})",
            dt * params.relaxation_rate()
        );
    }

    let mut rec = TrajectoryRecord::default();
    let mut f = f0.clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    push_record(&mut rec, t, &f, basis, opts)?;
    observer.observe(0, t, &f)?;

    let n_steps = (opts.t_end / dt - 1e-9).ceil().max(0.0) as usize;
    for s in 1..=n_steps {
        let h = if s == n_steps { opts.t_end - t } else { dt };
        if h <= 0.0 {
            break;
        }
        let next = step(opts.integrator, &f, h, params, basis)?;
        if !next.is_finite() {
            return Err(DynamicsError::NonFinite { t: t + h, steps, last_good: Box::new(f) });
        }
        f = next;
        t = if s == n_steps { opts.t_end } else { t + h };
        steps = s;
        push_record(&mut rec, t, &f, basis, opts)?;
        if opts.checkpoint_every > 0 && s % opts.checkpoint_every == 0 {
            rec.checkpoints.push((t, f.clone()));
        }
        observer.observe(s, t, &f)?;
    }
    Ok((f, rec))
}

fn push_record(rec: &mut TrajectoryRecord, t: f64, f: &SpectralField, basis: &BasisSet, opts: &RunOptions) -> Result<(), DynamicsError> {
    let e = x_norm(f).h1.powi(2);
    let lf = micro_project(f, basis)?;
    let d = x_norm(&lf).h1.powi(2);
    let macro_state: Option<MacroState> = if opts.record_macro { Some(moments(f, basis)?) } else { None };
    rec.push(t, e, d, macro_state);
    Ok(())
}
