use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::band::{cube_index, cube_mode};
use super::grid::{self, ZERO};
use super::{Band, SpectralError};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Fourier coefficients of a real function `f(x, v)` on the double band.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    band: Band,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(band: Band) -> Self {
        Self { band, coeffs: vec![ZERO; band.len()] }
    }

    /// The constant function `c`.
    pub fn constant(band: Band, c: f64) -> Self {
        let mut f = Self::zeros(band);
        f.set([0; 3], [0; 3], Complex64::new(c, 0.0));
        f
    }

    /// Build from raw coefficients; masked x entries are forced to zero.
    pub fn from_coeffs(band: Band, mut coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != band.len() {
            return Err(SpectralError::LengthMismatch { expected: band.len(), got: coeffs.len() });
        }
        let mask = band.x_mask();
        let vb = band.v_block();
        for (ix, keep) in mask.iter().enumerate() {
            if !keep {
                coeffs[ix * vb..(ix + 1) * vb].fill(ZERO);
            }
        }
        Ok(Self { band, coeffs })
    }

    /// Evaluate `coeff(n, m)` for every kept mode.
    pub fn from_fn(band: Band, mut coeff: impl FnMut([i64; 3], [i64; 3]) -> Complex64) -> Self {
        let mut f = Self::zeros(band);
        let vb = band.v_block();
        for ix in 0..band.x_block() {
            let n = band.x_mode(ix);
            if !band.keeps_x(n) {
                continue;
            }
            for iv in 0..vb {
                f.coeffs[ix * vb + iv] = coeff(n, band.v_mode(iv));
            }
        }
        f
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at `(n, m)`, zero outside the band.
    pub fn get(&self, n: [i64; 3], m: [i64; 3]) -> Complex64 {
        self.band.index(n, m).map_or(ZERO, |i| self.coeffs[i])
    }

    /// Set a coefficient; silently ignored outside the band.
    pub fn set(&mut self, n: [i64; 3], m: [i64; 3], value: Complex64) {
        if let Some(i) = self.band.index(n, m) {
            self.coeffs[i] = value;
        }
    }

    /// Set the coefficient at `(n, m)` and its mirror at `(-n, -m)` so the
    /// field stays real. `value` must be real when the mode is self-mirrored.
    pub fn set_real_pair(&mut self, n: [i64; 3], m: [i64; 3], value: Complex64) {
        self.set(n, m, value);
        self.set(n.map(|c| -c), m.map(|c| -c), value.conj());
    }

    /// Coefficients at `(-n, -m)`. The storage is symmetric, so this is a
    /// plain reversal.
    pub(crate) fn mirrored(&self) -> Vec<Complex64> {
        self.coeffs.iter().rev().copied().collect()
    }

    /// Real part of the represented function: `(f + conj(f)) / 2`.
    pub fn realify(&self) -> Self {
        let rev = self.mirrored();
        let coeffs = self.coeffs.iter().zip(rev).map(|(a, b)| (a + b.conj()) * 0.5).collect();
        Self { band: self.band, coeffs }
    }

    /// `max |c(n,m) - conj(c(-n,-m))|`; zero for real fields.
    pub fn reality_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.coeffs.iter().rev())
            .map(|(a, b)| (a - b.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// L^2 inner product `sum c_f conj(c_g)` over the common modes.
    pub fn inner(&self, other: &Self) -> Complex64 {
        if self.band == other.band {
            return self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        }
        let common = Band::new(
            self.band.x_radius().min(other.band.x_radius()),
            self.band.v_halfwidth().min(other.band.v_halfwidth()),
        )
        .expect("positive bands");
        let a = super::ops::cutoff(self, common);
        let b = super::ops::cutoff(other, common);
        a.inner(&b)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.band, other.band, "band mismatch");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { band: self.band, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `self += s * other` on equal bands.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.band, other.band, "band mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    /// Apply a multiplier depending on the x-mode only.
    pub fn map_x_modes(&self, mut mult: impl FnMut([i64; 3]) -> Complex64) -> Self {
        let mut out = self.clone();
        let vb = self.band.v_block();
        for ix in 0..self.band.x_block() {
            let w = mult(self.band.x_mode(ix));
            for c in &mut out.coeffs[ix * vb..(ix + 1) * vb] {
                *c *= w;
            }
        }
        out
    }

    /// Slice of v-coefficients attached to x-mode index `ix`.
    pub(crate) fn v_slice(&self, ix: usize) -> &[Complex64] {
        let vb = self.band.v_block();
        &self.coeffs[ix * vb..(ix + 1) * vb]
    }
}

macro_rules! impl_linear_ops {
    ($t:ty, $check:ident) => {
        impl Add<&$t> for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out += rhs;
                out
            }
        }
        impl Sub<&$t> for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out -= rhs;
                out
            }
        }
        impl AddAssign<&$t> for $t {
            fn add_assign(&mut self, rhs: &$t) {
                assert_eq!(self.$check, rhs.$check, "band mismatch");
                for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *a += b;
                }
            }
        }
        impl SubAssign<&$t> for $t {
            fn sub_assign(&mut self, rhs: &$t) {
                assert_eq!(self.$check, rhs.$check, "band mismatch");
                for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *a -= b;
                }
            }
        }
        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                let mut out = self.clone();
                for c in &mut out.coeffs {
                    *c *= s;
                }
                out
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
    };
}

impl_linear_ops!(SpectralField, band);
impl_linear_ops!(XField, n_x);

/// Fourier coefficients of a real function of `x` alone on the spherical
/// band `|n| < N_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct XField {
    n_x: usize,
    coeffs: Vec<Complex64>,
}

impl XField {
    pub fn zeros(n_x: usize) -> Self {
        assert!(n_x > 0, "x radius must be positive");
        Self { n_x, coeffs: vec![ZERO; (2 * n_x - 1).pow(3)] }
    }

    pub fn constant(n_x: usize, c: f64) -> Self {
        let mut f = Self::zeros(n_x);
        f.set([0; 3], Complex64::new(c, 0.0));
        f
    }

    pub fn from_coeffs(n_x: usize, mut coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        let expected = (2 * n_x - 1).pow(3);
        if coeffs.len() != expected {
            return Err(SpectralError::LengthMismatch { expected, got: coeffs.len() });
        }
        let probe = Self::zeros(n_x);
        for (i, c) in coeffs.iter_mut().enumerate() {
            if !probe.keeps(probe.mode(i)) {
                *c = ZERO;
            }
        }
        Ok(Self { n_x, coeffs })
    }

    pub fn from_fn(n_x: usize, mut coeff: impl FnMut([i64; 3]) -> Complex64) -> Self {
        let mut f = Self::zeros(n_x);
        for i in 0..f.coeffs.len() {
            let n = f.mode(i);
            if f.keeps(n) {
                f.coeffs[i] = coeff(n);
            }
        }
        f
    }

    /// `amplitude * sin(2 pi k . x)`.
    pub fn sine(n_x: usize, k: [i64; 3], amplitude: f64) -> Self {
        let mut f = Self::zeros(n_x);
        f.set(k, Complex64::new(0.0, -amplitude / 2.0));
        f.set(k.map(|c| -c), Complex64::new(0.0, amplitude / 2.0));
        f
    }

    /// `amplitude * cos(2 pi k . x)`.
    pub fn cosine(n_x: usize, k: [i64; 3], amplitude: f64) -> Self {
        let mut f = Self::zeros(n_x);
        if k == [0; 3] {
            f.set(k, Complex64::new(amplitude, 0.0));
            return f;
        }
        f.set(k, Complex64::new(amplitude / 2.0, 0.0));
        f.set(k.map(|c| -c), Complex64::new(amplitude / 2.0, 0.0));
        f
    }

    pub fn x_radius(&self) -> usize {
        self.n_x
    }

    pub(crate) fn k(&self) -> usize {
        self.n_x - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn keeps(&self, n: [i64; 3]) -> bool {
        n.iter().map(|c| c * c).sum::<i64>() < (self.n_x * self.n_x) as i64
    }

    pub fn mode(&self, i: usize) -> [i64; 3] {
        cube_mode(i, self.k())
    }

    pub fn get(&self, n: [i64; 3]) -> Complex64 {
        if !self.keeps(n) {
            return ZERO;
        }
        cube_index(n, self.k()).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, n: [i64; 3], value: Complex64) {
        if self.keeps(n) {
            if let Some(i) = cube_index(n, self.k()) {
                self.coeffs[i] = value;
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.get([0; 3]).re
    }

    pub fn realify(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.coeffs.iter().rev())
            .map(|(a, b)| (a + b.conj()) * 0.5)
            .collect();
        Self { n_x: self.n_x, coeffs }
    }

    pub fn reality_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.coeffs.iter().rev())
            .map(|(a, b)| (a - b.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Restrict or zero-extend to another radius.
    pub fn resize(&self, n_x: usize) -> Self {
        Self::from_fn(n_x, |n| self.get(n))
    }

    pub fn map_modes(&self, mut mult: impl FnMut([i64; 3]) -> Complex64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= mult(cube_mode(i, self.n_x - 1));
        }
        out
    }

    /// `d/dx_axis` with `axis` in `0..3`.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < 3, "axis must be 0, 1 or 2");
        self.map_modes(|n| Complex64::new(0.0, TWO_PI * n[axis] as f64))
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|n| Complex64::new(-TWO_PI * TWO_PI * norm2(n), 0.0))
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        self.weighted_norm(|n| 1.0 + TWO_PI * TWO_PI * norm2(n))
    }

    /// `H^{-1}` norm with the multiplier `(1 + 4 pi^2 |k|^2)^{-1/2}`.
    pub fn hminus1_norm(&self) -> f64 {
        self.weighted_norm(|n| 1.0 / (1.0 + TWO_PI * TWO_PI * norm2(n)))
    }

    /// `L^2` norm of the gradient.
    pub fn grad_norm(&self) -> f64 {
        self.weighted_norm(|n| TWO_PI * TWO_PI * norm2(n))
    }

    fn weighted_norm(&self, w: impl Fn([i64; 3]) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| w(self.mode(i)) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        let n = self.n_x.min(other.n_x);
        let (a, b) = (self.resize(n), other.resize(n));
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y.conj()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.n_x.max(other.n_x);
        let (a, b) = (self.resize(n), other.resize(n));
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        self * s
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.n_x, other.n_x, "band mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    /// Exact coefficients of the pointwise product of all factors, truncated
    /// to the radius `out`.
    pub fn product(factors: &[&XField], out: usize) -> XField {
        let ks: Vec<[usize; 3]> = factors.iter().map(|f| [f.k(); 3]).collect();
        let inputs: Vec<(&[Complex64], &[usize])> =
            factors.iter().zip(&ks).map(|(f, k)| (f.coeffs.as_slice(), k.as_slice())).collect();
        let k_out = [out - 1; 3];
        let coeffs = grid::padded_product(&inputs, &k_out);
        XField::from_coeffs(out, coeffs).expect("consistent length")
    }

    /// Values on a uniform `m^3` grid of the unit torus (real parts).
    pub fn sample(&self, m: usize) -> Vec<f64> {
        let k = [self.k(); 3];
        grid::sample(&self.coeffs, &k, &[m; 3]).into_iter().map(|c| c.re).collect()
    }

    /// Grid-quadrature `L^p` norm on an `m^3` grid (`p = inf` for the max).
    pub fn lp_norm(&self, p: f64, m: usize) -> f64 {
        grid::lp_norm(&self.coeffs, &[self.k(); 3], &[m; 3], p)
    }
}

pub(crate) fn norm2(n: [i64; 3]) -> f64 {
    n.iter().map(|c| (c * c) as f64).sum()
}

/// Divergence of a vector field.
pub fn divergence(u: &[XField; 3]) -> XField {
    let mut d = u[0].derivative(0);
    d += &u[1].derivative(1);
    d += &u[2].derivative(2);
    d
}

/// Gradient of a scalar field.
pub fn gradient(f: &XField) -> [XField; 3] {
    [f.derivative(0), f.derivative(1), f.derivative(2)]
}
