use serde::Serialize;

use super::KineticParams;
use crate::projections::MacroState;
use crate::spectral_core::SpectralField;

/// Energy and dissipation history of one trajectory.
///
/// `energy_sq[k] = ℰ(f(t_k))^2` and `dissipation_sq[k] = 𝒟(f(t_k))^2`, both in
/// the `H^1_x L^2_v` norm. The running integral uses the trapezoid rule.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub energy_sq: Vec<f64>,
    pub dissipation_sq: Vec<f64>,
    pub cumulative_dissipation: Vec<f64>,
    pub macro_series: Vec<MacroState>,
    pub checkpoints: Vec<(f64, SpectralField)>,
}

impl TrajectoryRecord {
    pub fn push(&mut self, t: f64, energy_sq: f64, dissipation_sq: f64, macro_state: Option<MacroState>) {
        let cum = match (self.times.last(), self.dissipation_sq.last(), self.cumulative_dissipation.last()) {
            (Some(&t0), Some(&d0), Some(&c0)) => {
                assert!(t > t0, "trajectory times must increase ({t} after {t0})");
                c0 + 0.5 * (t - t0) * (d0 + dissipation_sq)
            }
            _ => 0.0,
        };
        self.times.push(t);
        self.energy_sq.push(energy_sq);
        self.dissipation_sq.push(dissipation_sq);
        self.cumulative_dissipation.push(cum);
        if let Some(m) = macro_state {
            self.macro_series.push(m);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `M(t_k) = ℰ(f0)^2 - ℰ(f(t_k))^2 - ∫_0^{t_k} 𝒟^2 / (ε^2 ν*)`.
    pub fn margins(&self, params: &KineticParams) -> Vec<f64> {
        let e0 = self.energy_sq.first().copied().unwrap_or(0.0);
        let rate = params.relaxation_rate();
        self.energy_sq.iter().zip(&self.cumulative_dissipation).map(|(e, c)| e0 - e - rate * c).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub initial_energy_sq: f64,
    pub tol_energy: f64,
    pub min_margin: f64,
    pub min_margin_time: f64,
    /// `max(0, -min M)`.
    pub worst_violation: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Default tolerance relative to `ℰ(f0)^2`.
pub const TOL_ENERGY_REL: f64 = 1e-8;

/// Scan the margin series; `tol` defaults to `1e-8 ℰ(f0)^2`.
pub fn energy_report(traj: &TrajectoryRecord, params: &KineticParams, tol: Option<f64>) -> EnergyReport {
    let margins = traj.margins(params);
    let e0 = traj.energy_sq.first().copied().unwrap_or(0.0);
    let tol_energy = tol.unwrap_or(TOL_ENERGY_REL * e0);
    let (mut min_margin, mut min_margin_time) = (0.0f64, 0.0);
    for (m, t) in margins.iter().zip(&traj.times) {
        if *m < min_margin {
            min_margin = *m;
            min_margin_time = *t;
        }
    }
    let violations = margins.iter().filter(|m| **m < -tol_energy).count();
    EnergyReport {
        initial_energy_sq: e0,
        tol_energy,
        min_margin,
        min_margin_time,
        worst_violation: (-min_margin).max(0.0),
        violations,
        pass: violations == 0,
    }
}
