//! Kernel-orthogonal closure tensors and the constants that define them.
//!
//! `A = v_ε ⊗ v - (a v_ε^2 + b) I` and `B_i = v_i (v_ε^2 - c)` are fixed by
//! requiring orthogonality to `{1, v_ε, v_ε^2}`. All brackets reduce to
//! one-dimensional Plancherel sums over the analytic sawtooth and parabola
//! coefficients; no quadrature enters.

use num_complex::Complex64;
use serde::Serialize;

use crate::legendre_basis::{sawtooth_coeff, BasisSet, Profile};
use crate::spectral_core::{inner_v, multiply_by_sawtooth, SpectralField};

#[derive(Debug, thiserror::Error)]
pub enum ClosureError {
    #[error("closure system is singular (det = {0:e})")]
    Singular(f64),
    #[error("kernel orthogonality residual {residual:e} exceeds {limit:e} for {tensor}")]
    Residual { tensor: String, residual: f64, limit: f64 },
}

/// Analytic ε → 0 limits.
pub mod limits {
    pub const A: f64 = 1.0 / 3.0;
    pub const B: f64 = 0.0;
    pub const DET_D: f64 = 1.0 / 60.0;
    pub const C: f64 = 19.0 / 60.0;

    pub fn mu1() -> f64 {
        15f64.sqrt() / 45.0
    }
    pub fn mu2() -> f64 {
        3f64.sqrt() / 6.0
    }
    pub fn mu5() -> f64 {
        2.0 * 5f64.sqrt() / 5.0
    }
    pub fn c0() -> f64 {
        5f64.sqrt() / 2.0
    }
    pub fn c1() -> f64 {
        2.0 * 3f64.sqrt()
    }
    pub fn c2() -> f64 {
        6.0 * 5f64.sqrt()
    }
}

/// One-dimensional brackets behind the closure system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Brackets {
    /// `<Λ(v^2)^2>`
    pub vsq_sq: f64,
    /// `<Λ(v^2)> = 1/12`
    pub vsq_mean: f64,
    /// `<v^ε v>`
    pub saw_saw: f64,
    /// `<v^ε v Λ(v^2)>`
    pub saw_saw_vsq: f64,
}

fn conv(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn brackets(basis: &BasisSet) -> Brackets {
    let saw: &Profile = basis.saw_profile();
    let vsq: &Profile = basis.vsq_profile();
    let k = basis.n_v() as i64 - 1;
    let sq = |p: &Profile| p.iter().map(|c| c.norm_sqr()).sum::<f64>();
    // g = v^ε Λ(v^2) has modes |m| <= 2K; pair it with the full sawtooth.
    let g = conv(saw, vsq);
    let saw_saw_vsq: f64 = g
        .iter()
        .enumerate()
        .map(|(i, c)| (c * sawtooth_coeff(i as i64 - 2 * k).conj()).re)
        .sum();
    Brackets { vsq_sq: sq(vsq), vsq_mean: vsq[k as usize].re, saw_saw: sq(saw), saw_saw_vsq }
}

/// `(a, b, det D)` from the two orthogonality conditions `<A_ii, 1> = 0` and
/// `<A_ii, v_ε^2> = 0`.
pub fn compute_ab(basis: &BasisSet) -> Result<(f64, f64, f64), ClosureError> {
    let br = brackets(basis);
    let s = br.vsq_mean;
    // <(v_ε^2)^2> = 3<Λ(v^2)^2> + 6 <Λ(v^2)>^2 and <v_ε^2> = 3s.
    let d11 = 3.0 * (br.vsq_sq + 2.0 * s * s);
    let d12 = 3.0 * s;
    let d22 = 1.0;
    let det = d11 * d22 - d12 * d12;
    if det.abs() < 1e-300 {
        return Err(ClosureError::Singular(det));
    }
    let rhs1 = br.saw_saw_vsq + 2.0 * s * br.saw_saw;
    let rhs2 = br.saw_saw;
    let a = (d22 * rhs1 - d12 * rhs2) / det;
    let b = (d11 * rhs2 - d12 * rhs1) / det;
    Ok((a, b, det))
}

/// `c` from `c <v_i v_i^ε> = <v_i v_i^ε v_ε^2>`.
pub fn compute_c(basis: &BasisSet) -> f64 {
    let br = brackets(basis);
    assert!(br.saw_saw > 0.0, "<v v^ε> must be positive");
    (br.saw_saw_vsq + 2.0 * br.vsq_mean * br.saw_saw) / br.saw_saw
}

/// `μ_1 .. μ_7` (index 0 holds μ_1).
pub fn compute_mu(basis: &BasisSet, a: f64, b: f64, c: f64) -> [f64; 7] {
    let (c0, c1, c2) = (basis.c0, basis.c1, basis.c2);
    let mu1 = a * c1 / c2;
    let mu2 = c1 * (3.0 * a * c0 / c2 + b);
    let mu5 = c2 * c - 3.0 * c0;
    let mu3 = mu5 / c1;
    let mu4 = mu2 / c1 + mu1 * mu3;
    let mu6 = 1.0 / (1.0 + 2.0 * 5f64.sqrt() * mu5 / 15.0);
    let mu7 = mu2 + mu1 * mu5;
    [mu1, mu2, mu3, mu4, mu5, mu6, mu7]
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureConstants {
    pub n_v: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub a_eps: f64,
    pub b_eps: f64,
    pub det_d: f64,
    pub c_eps: f64,
    pub mu: [f64; 7],
    pub brackets: Brackets,
}

/// A computed constant next to its limit.
#[derive(Clone, Debug, Serialize)]
pub struct LimitGap {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub gap: f64,
}

impl ClosureConstants {
    pub fn compute(basis: &BasisSet) -> Result<Self, ClosureError> {
        let (a, b, det) = compute_ab(basis)?;
        let c = compute_c(basis);
        Ok(Self {
            n_v: basis.n_v(),
            c0: basis.c0,
            c1: basis.c1,
            c2: basis.c2,
            a_eps: a,
            b_eps: b,
            det_d: det,
            c_eps: c,
            mu: compute_mu(basis, a, b, c),
            brackets: brackets(basis),
        })
    }

    pub fn mu(&self, k: usize) -> f64 {
        assert!((1..=7).contains(&k), "μ index runs from 1 to 7");
        self.mu[k - 1]
    }

    /// Distance of every constant with a known limit.
    pub fn gaps(&self) -> Vec<LimitGap> {
        let row = |name, value: f64, limit: f64| LimitGap { name, value, limit, gap: (value - limit).abs() };
        vec![
            row("a", self.a_eps, limits::A),
            row("b", self.b_eps, limits::B),
            row("det_D", self.det_d, limits::DET_D),
            row("c", self.c_eps, limits::C),
            row("mu1", self.mu(1), limits::mu1()),
            row("mu2", self.mu(2), limits::mu2()),
            row("mu5", self.mu(5), limits::mu5()),
            row("c0", self.c0, limits::c0()),
            row("c1", self.c1, limits::c1()),
            row("c2", self.c2, limits::c2()),
        ]
    }
}

/// Band-limited `Λ^v(A)` and `Λ^v(B)`.
#[derive(Clone, Debug)]
pub struct ClosureTensors {
    pub a: [[SpectralField; 3]; 3],
    pub b: [SpectralField; 3],
    /// Largest `|<T, g>|` over the tensors and the kernel functions `g`.
    pub a_residual: f64,
    pub b_residual: f64,
}

pub const TENSOR_RESIDUAL_LIMIT: f64 = 1e-9;

pub fn build_tensors(basis: &BasisSet, consts: &ClosureConstants) -> Result<ClosureTensors, ClosureError> {
    let f = basis.fields();
    let vb = basis.v_band();
    let a: [[SpectralField; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut t = multiply_by_sawtooth(&f.v_eps[i], j, vb);
            if i == j {
                t.axpy(-consts.a_eps, &f.v_eps_sq);
                t.axpy(-consts.b_eps, &f.one);
            }
            t
        })
    });
    let mut shifted = f.v_eps_sq.clone();
    shifted.axpy(-consts.c_eps, &f.one);
    let b: [SpectralField; 3] = std::array::from_fn(|i| multiply_by_sawtooth(&shifted, i, vb));

    let kernel: Vec<&SpectralField> = vec![&f.one, &f.v_eps[0], &f.v_eps[1], &f.v_eps[2], &f.v_eps_sq];
    let worst = |fields: &mut dyn Iterator<Item = &SpectralField>| {
        fields
            .flat_map(|t| kernel.iter().map(move |g| inner_v(t, g).abs()))
            .fold(0.0, f64::max)
    };
    let a_residual = worst(&mut a.iter().flatten());
    let b_residual = worst(&mut b.iter());
    for (name, r) in [("A", a_residual), ("B", b_residual)] {
        if r > TENSOR_RESIDUAL_LIMIT {
            return Err(ClosureError::Residual { tensor: name.into(), residual: r, limit: TENSOR_RESIDUAL_LIMIT });
        }
    }
    Ok(ClosureTensors { a, b, a_residual, b_residual })
}
