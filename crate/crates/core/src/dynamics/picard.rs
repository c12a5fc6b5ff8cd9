use serde::Serialize;

use super::rhs::rhs;
use super::{DynamicsError, KineticParams};
use crate::legendre_basis::BasisSet;
use crate::spectral_core::{x_norm, SpectralField};

#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    #[serde(skip)]
    pub solution: SpectralField,
    pub nodes: usize,
    /// `sup_k ||g_{j+1}(s_k) - g_j(s_k)||_X` for each iteration.
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Largest ratio among iterations whose difference is above the noise floor.
    pub max_ratio: f64,
}

/// Differences below this fraction of `sup ||g||_X` are rounding noise and
/// do not enter the contraction test.
const NOISE_FLOOR: f64 = 1e-13;

/// Cumulative integral of equally spaced samples, fourth-order accurate.
///
/// Interval `[s_k, s_{k+1}]` is integrated with the cubic through samples
/// `k-1..=k+2`, shifted inward at both ends. Needs `n >= 3` intervals.
fn cumulative_weights(n: usize, k: usize) -> [(usize, f64); 4] {
    const LEFT: [f64; 4] = [9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0];
    const MID: [f64; 4] = [-1.0 / 24.0, 13.0 / 24.0, 13.0 / 24.0, -1.0 / 24.0];
    const RIGHT: [f64; 4] = [1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0];
    if k == 0 {
        [(0, LEFT[0]), (1, LEFT[1]), (2, LEFT[2]), (3, LEFT[3])]
    } else if k + 2 <= n {
        [(k - 1, MID[0]), (k, MID[1]), (k + 1, MID[2]), (k + 2, MID[3])]
    } else {
        [(k - 2, RIGHT[0]), (k - 1, RIGHT[1]), (k, RIGHT[2]), (k + 1, RIGHT[3])]
    }
}

/// Iterate `g_{j+1}(t) = f0 + ∫_0^t rhs(g_j(s)) ds` on the nodes `s_k = k h`,
/// `h = T / ceil(T / quad_dt)`, and return `g_J(T)`.
///
/// The iteration stops early once successive differences reach the noise
/// floor. A ratio of successive differences `≥ 1` after the second iteration
/// is reported as [`DynamicsError::NonContracting`].
pub fn picard_solve(
    f0: &SpectralField,
    t_end: f64,
    iterations: usize,
    quad_dt: f64,
    params: &KineticParams,
    basis: &BasisSet,
) -> Result<PicardReport, DynamicsError> {
    params.validate()?;
    if !(t_end > 0.0 && quad_dt > 0.0) {
        return Err(DynamicsError::InvalidParams(format!("T = {t_end} and quad_dt = {quad_dt} must be positive")));
    }
    let intervals = ((t_end / quad_dt) - 1e-9).ceil().max(1.0) as usize;
    let intervals = intervals.max(3);
    let h = t_end / intervals as f64;
    let mut g: Vec<SpectralField> = vec![f0.clone(); intervals + 1];

    let scale = x_norm(f0).h1.max(f64::MIN_POSITIVE);
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut max_ratio = 0.0f64;
    for _ in 0..iterations {
        let r: Vec<SpectralField> = g.iter().map(|gk| rhs(gk, params, basis)).collect::<Result<_, _>>()?;
        let mut next = Vec::with_capacity(intervals + 1);
        let mut acc = f0.clone();
        next.push(acc.clone());
        for k in 0..intervals {
            for (j, w) in cumulative_weights(intervals, k) {
                acc.axpy(h * w, &r[j]);
            }
            next.push(acc.clone());
        }
        let diff = next.iter().zip(&g).map(|(a, b)| x_norm(&(a - b)).h1).fold(0.0, f64::max);
        if !diff.is_finite() {
            return Err(DynamicsError::NonContracting { history: differences });
        }
        if let Some(&prev) = differences.last() {
            let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
            ratios.push(ratio);
            if prev > NOISE_FLOOR * scale {
                max_ratio = max_ratio.max(ratio);
                if ratio >= 1.0 && differences.len() >= 2 {
                    differences.push(diff);
                    return Err(DynamicsError::NonContracting { history: differences });
                }
            }
        }
        differences.push(diff);
        g = next;
        if diff <= NOISE_FLOOR * scale {
            break;
        }
    }
    Ok(PicardReport { solution: g.pop().expect("at least one node"), nodes: intervals + 1, differences, ratios, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::cumulative_weights;

    #[test]
    fn quadrature_is_exact_on_cubics() {
        let n = 7;
        let h = 0.3;
        let p = |s: f64| 1.0 - 2.0 * s + 0.5 * s * s + 3.0 * s * s * s;
        let int = |s: f64| s - s * s + s * s * s / 6.0 + 0.75 * s.powi(4);
        let mut acc = 0.0;
        for k in 0..n {
            for (j, w) in cumulative_weights(n, k) {
                acc += h * w * p(j as f64 * h);
            }
            assert!((acc - int((k + 1) as f64 * h)).abs() < 1e-12);
        }
    }
}
