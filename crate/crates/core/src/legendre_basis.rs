//! Cutoff Legendre functions on the velocity cell.
//!
//! With `v_i^ε = Λ(v_i)` and `Λ(v_i^2)` the basis is
//!
//! ```text
//! e0     = 1
//! e1_i   = c1 Λ(v_i)
//! e2_i   = c2 Λ(v_i^2) - c0          (each of unit norm, mean zero)
//! e2     = (e2_1 + e2_2 + e2_3) / √3  (orthonormal temperature mode)
//! ```
//!
//! Every element is a short sum of separable products `a(v1) b(v2) c(v3)`,
//! so inner products reduce to products of one-dimensional Plancherel sums.
//! Full three-dimensional coefficient arrays are only built on request.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::spectral_core::{Band, SpectralField};

/// `∫_{-1/2}^{1/2} v e^{-2πimv} dv`.
pub fn sawtooth_coeff(m: i64) -> Complex64 {
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, sign / (2.0 * PI * m as f64))
}

/// `∫_{-1/2}^{1/2} v^2 e^{-2πimv} dv`.
pub fn vsq_coeff(m: i64) -> Complex64 {
    if m == 0 {
        return Complex64::new(1.0 / 12.0, 0.0);
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(sign / (2.0 * PI * PI * (m * m) as f64), 0.0)
}

fn sum_nonzero(n_v: usize, term: impl Fn(f64) -> f64) -> f64 {
    (1..n_v as i64).map(|m| 2.0 * term(m as f64)).sum()
}

/// `<Λ(v) Λ(v)> = <Λ(v) v> = Σ_{0<|m|<N} 1/(2πm)^2`.
pub fn saw_norm_sq(n_v: usize) -> f64 {
    sum_nonzero(n_v, |m| 1.0 / (4.0 * PI * PI * m * m))
}

/// `Σ_{0<|m|<N} |F(v^2)(m)|^2 = Σ 1/(4π^4 m^4)`, the variance of `Λ(v^2)`.
pub fn vsq_var(n_v: usize) -> f64 {
    sum_nonzero(n_v, |m| 1.0 / (4.0 * PI.powi(4) * m.powi(4)))
}

/// `||Λ(v^s) - v^s||_{L^2(-1/2,1/2)}` for `s ∈ {1, 2}`.
pub fn truncation_error(s: u32, n_v: usize) -> f64 {
    let (total, kept) = match s {
        1 => (1.0 / 12.0, saw_norm_sq(n_v)),
        2 => (1.0 / 80.0, 1.0 / 144.0 + vsq_var(n_v)),
        _ => panic!("only s = 1, 2 are supported"),
    };
    (total - kept).max(0.0).sqrt()
}

/// One-dimensional coefficient profile over `m = -K..=K`.
pub type Profile = Vec<Complex64>;

/// A finite sum of separable products `s · a(v1) b(v2) c(v3)`.
#[derive(Clone, Debug)]
pub struct Separable {
    pub terms: Vec<(f64, [Profile; 3])>,
}

impl Separable {
    /// `∫ self · other dv` for real functions.
    pub fn inner(&self, other: &Separable) -> f64 {
        let mut acc = 0.0;
        for (sa, pa) in &self.terms {
            for (sb, pb) in &other.terms {
                let mut prod = Complex64::new(sa * sb, 0.0);
                for j in 0..3 {
                    prod *= pa[j].iter().zip(&pb[j]).map(|(x, y)| x * y.conj()).sum::<Complex64>();
                }
                acc += prod.re;
            }
        }
        acc
    }

    pub fn to_field(&self, n_v: usize) -> SpectralField {
        let band = Band::v_only(n_v);
        let k = n_v as i64 - 1;
        let at = |p: &Profile, m: i64| p[(m + k) as usize];
        SpectralField::from_fn(band, |_, m| {
            self.terms
                .iter()
                .map(|(s, p)| at(&p[0], m[0]) * at(&p[1], m[1]) * at(&p[2], m[2]) * *s)
                .sum()
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BasisError {
    #[error("the velocity band needs N_v >= 2 to separate v from v^2 (got {0})")]
    BandTooSmall(usize),
    #[error("normalisation system for (c0, c2) is singular")]
    Singular,
}

/// Materialised three-dimensional coefficient arrays of the basis.
#[derive(Clone, Debug)]
pub struct BasisFields {
    pub one: SpectralField,
    pub v_eps: [SpectralField; 3],
    pub vsq_eps: [SpectralField; 3],
    /// `v_ε^2 = Σ_i Λ(v_i^2)`.
    pub v_eps_sq: SpectralField,
    pub e0: SpectralField,
    pub e1: [SpectralField; 3],
    /// Unit-norm temperature mode.
    pub e2: SpectralField,
    /// `c2 v_ε^2 - 3 c0 = √3 e2`, the temperature weight in unnormalised form.
    pub e2_sum: SpectralField,
}

#[derive(Debug)]
pub struct BasisSet {
    n_v: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    saw: Profile,
    vsq: Profile,
    delta: Profile,
    fields: OnceLock<BasisFields>,
}

impl Clone for BasisSet {
    fn clone(&self) -> Self {
        let fields = OnceLock::new();
        if let Some(f) = self.fields.get() {
            let _ = fields.set(f.clone());
        }
        Self {
            n_v: self.n_v,
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            saw: self.saw.clone(),
            vsq: self.vsq.clone(),
            delta: self.delta.clone(),
            fields,
        }
    }
}

/// Build the cutoff Legendre basis on the velocity part of `band`.
pub fn build_basis(band: Band) -> Result<BasisSet, BasisError> {
    basis_for_nv(band.v_halfwidth())
}

/// Build the cutoff Legendre basis for velocity half-width `n_v`.
pub fn basis_for_nv(n_v: usize) -> Result<BasisSet, BasisError> {
    if n_v < 2 {
        return Err(BasisError::BandTooSmall(n_v));
    }
    let k = n_v as i64 - 1;
    let saw: Profile = (-k..=k).map(sawtooth_coeff).collect();
    let vsq: Profile = (-k..=k).map(vsq_coeff).collect();
    let mut delta: Profile = vec![Complex64::new(0.0, 0.0); saw.len()];
    delta[k as usize] = Complex64::new(1.0, 0.0);

    let sq = |p: &Profile| p.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let c1 = sq(&saw).powf(-0.5);

    // Mean zero: c2 <Λv^2> - c0 = 0. Unit norm: c2^2 ||Λv^2||^2 - 2 c0 c2 <Λv^2> + c0^2 = 1.
    let mean = vsq[k as usize].re;
    let norm_sq = sq(&vsq);
    let det = norm_sq - mean * mean;
    if det <= 0.0 {
        return Err(BasisError::Singular);
    }
    let c2 = det.powf(-0.5);
    let c0 = c2 * mean;

    let basis = BasisSet { n_v, c0, c1, c2, saw, vsq, delta, fields: OnceLock::new() };
    debug_assert!(basis.gram_residual() < 1e-12);
    Ok(basis)
}

impl BasisSet {
    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn v_band(&self) -> Band {
        Band::v_only(self.n_v)
    }

    pub fn saw_profile(&self) -> &Profile {
        &self.saw
    }

    pub fn vsq_profile(&self) -> &Profile {
        &self.vsq
    }

    /// `p` on `axis`, the unit profile on the other two.
    pub fn on_axis(&self, axis: usize, p: &Profile) -> [Profile; 3] {
        let mut out = [self.delta.clone(), self.delta.clone(), self.delta.clone()];
        out[axis] = p.clone();
        out
    }

    pub fn sep_e0(&self) -> Separable {
        Separable { terms: vec![(1.0, self.on_axis(0, &self.delta))] }
    }

    pub fn sep_e1(&self, i: usize) -> Separable {
        Separable { terms: vec![(self.c1, self.on_axis(i, &self.saw))] }
    }

    pub fn sep_e2(&self) -> Separable {
        let s = 1.0 / 3f64.sqrt();
        let mut terms: Vec<_> = (0..3).map(|i| (self.c2 * s, self.on_axis(i, &self.vsq))).collect();
        terms.push((-3.0 * self.c0 * s, self.on_axis(0, &self.delta)));
        Separable { terms }
    }

    /// `{e0, e1_1, e1_2, e1_3, e2}`.
    pub fn sep_basis(&self) -> [Separable; 5] {
        [self.sep_e0(), self.sep_e1(0), self.sep_e1(1), self.sep_e1(2), self.sep_e2()]
    }

    pub fn gram(&self) -> [[f64; 5]; 5] {
        let b = self.sep_basis();
        let mut g = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                g[i][j] = b[i].inner(&b[j]);
            }
        }
        g
    }

    /// `max |Gram - I|`.
    pub fn gram_residual(&self) -> f64 {
        let g = self.gram();
        let mut r: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                r = r.max((v - id).abs());
            }
        }
        r
    }

    /// Three-dimensional coefficient arrays, built on first use.
    pub fn fields(&self) -> &BasisFields {
        self.fields.get_or_init(|| {
            let n = self.n_v;
            let one = self.sep_e0().to_field(n);
            let v_eps = [0, 1, 2].map(|i| Separable { terms: vec![(1.0, self.on_axis(i, &self.saw))] }.to_field(n));
            let vsq_eps = [0, 1, 2].map(|i| Separable { terms: vec![(1.0, self.on_axis(i, &self.vsq))] }.to_field(n));
            let mut v_eps_sq = vsq_eps[0].clone();
            v_eps_sq += &vsq_eps[1];
            v_eps_sq += &vsq_eps[2];
            let e1 = [0, 1, 2].map(|i| &v_eps[i] * self.c1);
            let mut e2_sum = &v_eps_sq * self.c2;
            e2_sum.axpy(-3.0 * self.c0, &one);
            let e2 = &e2_sum * (1.0 / 3f64.sqrt());
            BasisFields { e0: one.clone(), one, v_eps, vsq_eps, v_eps_sq, e1, e2, e2_sum }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_mode_constants() {
        let b = basis_for_nv(2).unwrap();
        assert!((b.c1 - PI * 2f64.sqrt()).abs() < 1e-13);
        assert!((b.c2 - 2f64.sqrt() * PI * PI).abs() < 1e-12);
        assert!((b.c0 - b.c2 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn materialised_gram_matches_separable() {
        let b = basis_for_nv(3).unwrap();
        let f = b.fields();
        let list = [&f.e0, &f.e1[0], &f.e1[1], &f.e1[2], &f.e2];
        let g = b.gram();
        for i in 0..5 {
            for j in 0..5 {
                let direct = list[i].inner(list[j]).re;
                assert!((direct - g[i][j]).abs() < 1e-13);
            }
        }
    }
}
