use rayon::prelude::*;
use serde::Serialize;

use super::forcing::{forcing_terms, ForcingSeries, ForcingSource, NsfForcing};
use super::nsf::{nsf_step, NsfState};
use super::moments::{boussinesq_residual, BoussinesqForm, lift_initial, moment_residuals, remainder_moments, theta_tilde, well_prepare, FluxWeights};
use super::HydroError;
use crate::closure::{build_tensors, ClosureConstants, ClosureTensors};
use crate::dynamics::{energy_report, integrate, rhs, DynamicsError, EnergyReport, Integrator, KineticParams, RunOptions};
use crate::legendre_basis::{basis_for_nv, BasisSet};
use crate::projections::{leray, moments};
use crate::spectral_core::{divergence, Band, SpectralField, XField};

/// Macroscopic initial data `(ρ0, u0, θ0)` before the lift.
#[derive(Clone, Debug)]
pub struct InitialMacro {
    pub rho: XField,
    pub u: [XField; 3],
    pub theta: XField,
}

impl InitialMacro {
    pub fn zeros(n_x: usize) -> Self {
        Self { rho: XField::zeros(n_x), u: std::array::from_fn(|_| XField::zeros(n_x)), theta: XField::zeros(n_x) }
    }

    /// `u0 = (amplitude sin(2π x2), 0, 0)`.
    pub fn single_mode_shear(n_x: usize, amplitude: f64) -> Self {
        let mut m = Self::zeros(n_x);
        m.u[0] = XField::sine(n_x, [0, 1, 0], amplitude);
        m
    }

    /// Lifted initial field, well prepared first when `form` is given.
    pub fn lift(&self, basis: &BasisSet, band: Band, form: Option<BoussinesqForm>) -> Result<SpectralField, HydroError> {
        Ok(match form {
            Some(form) => {
                let (rho, u, theta) = well_prepare(&self.rho, &self.u, &self.theta, basis, form)?;
                lift_initial(&rho, &u, &theta, basis, band)
            }
            None => lift_initial(&self.rho, &self.u, &self.theta, basis, band),
        })
    }
}

#[derive(Clone, Debug)]
pub struct LimitStudyConfig {
    pub n_x: usize,
    pub n_v: usize,
    pub nu_star: f64,
    pub kappa: f64,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    /// Diagnostics are sampled every this many steps (at least 1).
    pub record_every: usize,
    /// `None` lifts the data as given.
    pub well_prepared: Option<BoussinesqForm>,
    pub initial: InitialMacro,
}

/// One member of the sweep.
#[derive(Clone, Debug)]
pub struct MemberRun {
    pub epsilon: f64,
    /// `(∫_0^T 𝒟^2)^{1/2}`.
    pub s1: f64,
    /// `||div u||_{L^2_t H^{-1}}`.
    pub s2: f64,
    /// Boussinesq limit form at `T`.
    pub s3: f64,
    pub energy: EnergyReport,
    pub max_identity_residual: f64,
    /// `max_e |∫_0^T ∫ <e ℛ>|`.
    pub remainder: f64,
    pub times: Vec<f64>,
    pub leray_u: Vec<[XField; 3]>,
    pub forcing: ForcingSeries,
    pub initial_theta_tilde: XField,
    pub final_field: SpectralField,
}

struct Shared {
    basis: BasisSet,
    consts: ClosureConstants,
    tensors: ClosureTensors,
    weights: FluxWeights,
}

impl Shared {
    fn new(n_v: usize) -> Result<Self, HydroError> {
        let basis = basis_for_nv(n_v).map_err(|e| HydroError::InvalidInput(e.to_string()))?;
        let consts = ClosureConstants::compute(&basis).map_err(|e| HydroError::InvalidInput(e.to_string()))?;
        let tensors = build_tensors(&basis, &consts).map_err(|e| HydroError::InvalidInput(e.to_string()))?;
        let weights = FluxWeights::new(&basis);
        Ok(Self { basis, consts, tensors, weights })
    }
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1])).sum()
}

fn run_with(cfg: &LimitStudyConfig, epsilon: f64, sh: &Shared) -> Result<MemberRun, HydroError> {
    let params = KineticParams::new(epsilon, cfg.nu_star, cfg.kappa)?;
    let band = Band::new(cfg.n_x, cfg.n_v)?;
    let f0 = cfg.initial.lift(&sh.basis, band, cfg.well_prepared)?;
    let every = cfg.record_every.max(1);
    let n_steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;

    let mut times = Vec::new();
    let mut leray_u = Vec::new();
    let mut div_sq = Vec::new();
    let mut rem: Vec<[f64; 5]> = Vec::new();
    let mut forcing = ForcingSeries::default();
    let mut max_res = 0.0f64;
    let mut last_state = None;
    let mut initial_theta_tilde = XField::zeros(cfg.n_x);

    let opts = RunOptions::new(cfg.integrator, cfg.dt, cfg.t_end);
    let mut observer = |step: usize, t: f64, f: &SpectralField| -> Result<(), DynamicsError> {
        if step % every != 0 && step != n_steps {
            return Ok(());
        }
        let fail = |e: HydroError| DynamicsError::Observer(e.to_string());
        let state = moments(f, &sh.basis)?;
        let r = rhs(f, &params, &sh.basis)?;
        let res = moment_residuals(f, &r, &params, &sh.basis, &sh.consts, &sh.tensors, &sh.weights).map_err(fail)?;
        max_res = max_res.max(res.max());
        if step == 0 {
            initial_theta_tilde = theta_tilde(&state);
        }
        times.push(t);
        leray_u.push(leray(&state.u));
        div_sq.push(divergence(&state.u).hminus1_norm().powi(2));
        rem.push(remainder_moments(f, &sh.basis).map_err(fail)?);
        forcing.push(t, NsfForcing::from_set(&forcing_terms(&state, &params), &params));
        last_state = Some(state);
        Ok(())
    };
    let (final_field, rec) = integrate(&f0, &params, &sh.basis, &opts, &mut observer)?;

    let s1 = rec.cumulative_dissipation.last().copied().unwrap_or(0.0).sqrt();
    let s2 = trapezoid(&times, &div_sq).sqrt();
    let s3 = last_state.as_ref().map_or(0.0, |s| boussinesq_residual(s, &sh.consts).limit_form);
    let remainder = (0..5)
        .map(|c| trapezoid(&times, &rem.iter().map(|r| r[c]).collect::<Vec<_>>()).abs())
        .fold(0.0, f64::max);
    Ok(MemberRun {
        epsilon,
        s1,
        s2,
        s3,
        energy: energy_report(&rec, &params, None),
        max_identity_residual: max_res,
        remainder,
        times,
        leray_u,
        forcing,
        initial_theta_tilde,
        final_field,
    })
}

/// Run a single sweep member.
pub fn run_member(cfg: &LimitStudyConfig, epsilon: f64) -> Result<MemberRun, HydroError> {
    run_with(cfg, epsilon, &Shared::new(cfg.n_v)?)
}

/// `sup_k ||ℙu_ref(t_k) - ℙu^ε(t_k)||_{L^2}` over the recorded times of `run`,
/// where the reference solver starts from the member's `ℙu` and `θ̃` at
/// `t = 0` and, when `forced`, is driven by the member's recorded forcing.
///
/// Each sample interval is split into steps no longer than `max_dt`.
pub fn limit_solver_gap(run: &MemberRun, nu: f64, max_dt: f64, forced: bool) -> Result<f64, HydroError> {
    if run.times.is_empty() || !(max_dt > 0.0) {
        return Err(HydroError::InvalidInput("need recorded samples and a positive step".into()));
    }
    let source: Option<&dyn ForcingSource> = if forced { Some(&run.forcing) } else { None };
    let gap = |s: &NsfState, k: usize| (0..3).map(|i| (&s.u[i] - &run.leray_u[k][i]).l2_norm().powi(2)).sum::<f64>().sqrt();
    let mut s = NsfState::new(run.leray_u[0].clone(), run.initial_theta_tilde.clone(), nu)?;
    let mut worst = gap(&s, 0);
    for k in 1..run.times.len() {
        let (t0, t1) = (run.times[k - 1], run.times[k]);
        let n = ((t1 - t0) / max_dt - 1e-9).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        for j in 0..n {
            s = nsf_step(&s, t0 + j as f64 * h, h, source)?;
        }
        worst = worst.max(gap(&s, k));
    }
    Ok(worst)
}

/// `sup_t ||a(t) - b(t)||_{L^2}` over matching sample times.
pub fn sup_gap(a: &MemberRun, b: &MemberRun) -> f64 {
    a.leray_u
        .iter()
        .zip(&b.leray_u)
        .map(|(x, y)| (0..3).map(|i| (&x[i] - &y[i]).l2_norm().powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerEps {
    pub epsilon: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// Gap to the previous, larger ε; absent for the first member.
    pub s4: Option<f64>,
    pub energy_margin_min: f64,
    pub max_identity_residual: f64,
    pub remainder: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Slopes {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub remainder: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitChecks {
    pub s1_slope_in_range: bool,
    pub s2_decreasing: bool,
    pub s3_decreasing: bool,
    pub s4_decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub per_eps: Vec<PerEps>,
    pub slopes: Slopes,
    pub checks: LimitChecks,
    /// Non-monotone diagnostics, recorded but not fatal.
    pub flags: Vec<String>,
    pub pass: bool,
}

/// Accepted range for the log-log slope of `s1`.
pub const S1_SLOPE_RANGE: (f64, f64) = (0.8, 1.2);

/// Least-squares slope of `log y` against `log x`, ignoring non-positive
/// samples. `NaN` with fewer than two usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Run the sweep (members in parallel) and evaluate the trends.
///
/// `eps_list` must be strictly decreasing. All members share `dt` so that
/// their samples line up in time.
pub fn limit_study(cfg: &LimitStudyConfig, eps_list: &[f64]) -> Result<(LimitReport, Vec<MemberRun>), HydroError> {
    if eps_list.is_empty() || !strictly_decreasing(eps_list) {
        return Err(HydroError::InvalidInput(format!("eps_list must be nonempty and strictly decreasing, got {eps_list:?}")));
    }
    let shared = Shared::new(cfg.n_v)?;
    let runs: Vec<MemberRun> = eps_list.par_iter().map(|&e| run_with(cfg, e, &shared)).collect::<Result<_, _>>()?;
    let report = summarize(&runs);
    Ok((report, runs))
}

pub fn summarize(runs: &[MemberRun]) -> LimitReport {
    let per_eps: Vec<PerEps> = runs
        .iter()
        .enumerate()
        .map(|(k, r)| PerEps {
            epsilon: r.epsilon,
            s1: r.s1,
            s2: r.s2,
            s3: r.s3,
            s4: if k == 0 { None } else { Some(sup_gap(&runs[k - 1], r)) },
            energy_margin_min: r.energy.min_margin,
            max_identity_residual: r.max_identity_residual,
            remainder: r.remainder,
        })
        .collect();
    let eps: Vec<f64> = per_eps.iter().map(|p| p.epsilon).collect();
    let col = |f: fn(&PerEps) -> f64| per_eps.iter().map(f).collect::<Vec<f64>>();
    let (s1, s2, s3, rem) = (col(|p| p.s1), col(|p| p.s2), col(|p| p.s3), col(|p| p.remainder));
    let s4: Vec<f64> = per_eps.iter().filter_map(|p| p.s4).collect();
    let slopes = Slopes {
        s1: loglog_slope(&eps, &s1),
        s2: loglog_slope(&eps, &s2),
        s3: loglog_slope(&eps, &s3),
        s4: loglog_slope(&eps[1.min(eps.len())..], &s4),
        remainder: loglog_slope(&eps, &rem),
    };
    let checks = LimitChecks {
        s1_slope_in_range: slopes.s1 >= S1_SLOPE_RANGE.0 && slopes.s1 <= S1_SLOPE_RANGE.1,
        s2_decreasing: strictly_decreasing(&s2),
        s3_decreasing: strictly_decreasing(&s3),
        s4_decreasing: strictly_decreasing(&s4),
    };
    let mut flags = Vec::new();
    for (name, ok) in [("s2", checks.s2_decreasing), ("s3", checks.s3_decreasing), ("s4", checks.s4_decreasing)] {
        if !ok {
            flags.push(format!("{name} is not strictly decreasing across the sweep"));
        }
    }
    if !checks.s1_slope_in_range {
        flags.push(format!("s1 slope {:.3} outside [{}, {}]", slopes.s1, S1_SLOPE_RANGE.0, S1_SLOPE_RANGE.1));
    }
    let pass = checks.s1_slope_in_range && checks.s2_decreasing && checks.s3_decreasing && checks.s4_decreasing;
    LimitReport { per_eps, slopes, checks, flags, pass }
}
