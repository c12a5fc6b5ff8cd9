//! Bernstein-type bounds for band-limited functions on the torus.
//!
//! For `h` with modes `|n| < N` and a derivative of order `k`,
//! `||∂^α h||_{L^q} <= 2^3 (2π)^k N^{k+3} ||h||_{L^p}` whenever `p <= q`.
//! The constant is the one produced by Young's inequality and a triangle
//! bound on the differentiated Dirichlet kernel.

use serde::Serialize;

use super::XField;

/// Explicit constant `2^3 (2π)^k N^{k+3}`.
pub fn bernstein_constant(k: u32, n: usize) -> f64 {
    8.0 * (2.0 * std::f64::consts::PI).powi(k as i32) * (n as f64).powi(k as i32 + 3)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BernsteinCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluate both sides for `∂^α h` with the multi-index `alpha`, using
/// grid quadrature on `grid^3` points for the Lebesgue norms.
pub fn bernstein_check(h: &XField, alpha: [u32; 3], p: f64, q: f64, grid: usize) -> BernsteinCheck {
    assert!(p <= q, "Bernstein bound needs p <= q");
    let mut d = h.clone();
    for (axis, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            d = d.derivative(axis);
        }
    }
    let k: u32 = alpha.iter().sum();
    let lhs = d.lp_norm(q, grid);
    let rhs = bernstein_constant(k, h.x_radius()) * h.lp_norm(p, grid);
    BernsteinCheck { lhs, rhs, holds: lhs <= rhs }
}
