use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Finite double band of kept Fourier modes.
///
/// An x-mode `n` is kept when `|n|^2 < N_x^2` (Euclidean ball, strict) and a
/// v-mode `m` is kept when `|m_j| < N_v` for every coordinate (cube, strict).
/// Coefficients are stored densely over the cube `|n_j|, |m_j| <= N - 1` in
/// the order `(n1, n2, n3, m1, m2, m3)`; x-modes outside the ball are kept
/// as zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Band {
    n_x: usize,
    n_v: usize,
}

impl Band {
    pub fn new(n_x: usize, n_v: usize) -> Result<Self, SpectralError> {
        if n_x == 0 || n_v == 0 {
            return Err(SpectralError::EmptyBand { n_x, n_v });
        }
        Ok(Self { n_x, n_v })
    }

    /// Band of a function of `v` alone (only the x-mode 0 is kept).
    pub fn v_only(n_v: usize) -> Self {
        Self::new(1, n_v).expect("v band must be positive")
    }

    pub fn x_radius(&self) -> usize {
        self.n_x
    }

    pub fn v_halfwidth(&self) -> usize {
        self.n_v
    }

    pub fn with_v(&self, n_v: usize) -> Self {
        Self::new(self.n_x, n_v).expect("v band must be positive")
    }

    pub fn with_x(&self, n_x: usize) -> Self {
        Self::new(n_x, self.n_v).expect("x band must be positive")
    }

    pub fn is_v_only(&self) -> bool {
        self.n_x == 1
    }

    /// Largest kept `|n_j|`.
    pub fn kx(&self) -> usize {
        self.n_x - 1
    }

    /// Largest kept `|m_j|`.
    pub fn kv(&self) -> usize {
        self.n_v - 1
    }

    pub fn x_len(&self) -> usize {
        2 * self.kx() + 1
    }

    pub fn v_len(&self) -> usize {
        2 * self.kv() + 1
    }

    pub fn half_widths(&self) -> [usize; 6] {
        let (a, b) = (self.kx(), self.kv());
        [a, a, a, b, b, b]
    }

    pub fn x_block(&self) -> usize {
        self.x_len().pow(3)
    }

    pub fn v_block(&self) -> usize {
        self.v_len().pow(3)
    }

    /// Number of stored coefficients (including masked x entries).
    pub fn len(&self) -> usize {
        self.x_block() * self.v_block()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn keeps_x(&self, n: [i64; 3]) -> bool {
        let r2: i64 = n.iter().map(|c| c * c).sum();
        r2 < (self.n_x * self.n_x) as i64
    }

    pub fn keeps_v(&self, m: [i64; 3]) -> bool {
        m.iter().all(|c| c.unsigned_abs() < self.n_v as u64)
    }

    /// Linear index of the x-mode in the x-block, if it is inside the cube.
    pub fn x_index(&self, n: [i64; 3]) -> Option<usize> {
        cube_index(n, self.kx())
    }

    pub fn v_index(&self, m: [i64; 3]) -> Option<usize> {
        cube_index(m, self.kv())
    }

    /// Linear storage index of a kept mode.
    pub fn index(&self, n: [i64; 3], m: [i64; 3]) -> Option<usize> {
        if !self.keeps_x(n) {
            return None;
        }
        Some(self.x_index(n)? * self.v_block() + self.v_index(m)?)
    }

    pub fn x_mode(&self, ix: usize) -> [i64; 3] {
        cube_mode(ix, self.kx())
    }

    pub fn v_mode(&self, iv: usize) -> [i64; 3] {
        cube_mode(iv, self.kv())
    }

    /// Whether each stored x entry lies inside the spherical band.
    pub fn x_mask(&self) -> Vec<bool> {
        (0..self.x_block()).map(|ix| self.keeps_x(self.x_mode(ix))).collect()
    }

    /// Number of kept x-modes.
    pub fn x_count(&self) -> usize {
        self.x_mask().iter().filter(|&&k| k).count()
    }

    /// Smallest band containing both.
    pub fn union(&self, other: &Band) -> Band {
        Band { n_x: self.n_x.max(other.n_x), n_v: self.n_v.max(other.n_v) }
    }

    /// Band radius `ceil(1 / eps^gamma)`, the cutoff used when the band is
    /// tied to the Knudsen number.
    pub fn knudsen_scaling(epsilon: f64, gamma: f64) -> Result<Self, SpectralError> {
        if !(epsilon > 0.0 && gamma >= 0.0) {
            return Err(SpectralError::InvalidScaling { epsilon, gamma });
        }
        let r = epsilon.powf(-gamma);
        // Strict `|m| < r`: the largest admissible integer is ceil(r) - 1,
        // so N = ceil(r) keeps exactly the admissible modes.
        let n = (r - 1e-12).ceil().max(1.0) as usize;
        Self::new(n, n)
    }
}

pub(crate) fn cube_index(n: [i64; 3], k: usize) -> Option<usize> {
    let k = k as i64;
    let len = 2 * k + 1;
    let mut lin = 0i64;
    for c in n {
        if c.abs() > k {
            return None;
        }
        lin = lin * len + (c + k);
    }
    Some(lin as usize)
}

pub(crate) fn cube_mode(lin: usize, k: usize) -> [i64; 3] {
    let len = 2 * k + 1;
    let k = k as i64;
    [
        (lin / (len * len)) as i64 - k,
        ((lin / len) % len) as i64 - k,
        (lin % len) as i64 - k,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_band_keeps_full_cube_in_x() {
        let b = Band::new(2, 2).unwrap();
        assert_eq!(b.x_count(), 27);
        let b3 = Band::new(3, 2).unwrap();
        // |n|^2 < 9 excludes the eight corners (2,2,2) type and (2,2,1) type
        assert!(!b3.keeps_x([2, 2, 1]));
        assert!(b3.keeps_x([2, 1, 1]));
    }

    #[test]
    fn index_roundtrip() {
        let b = Band::new(3, 2).unwrap();
        for ix in 0..b.x_block() {
            let n = b.x_mode(ix);
            assert_eq!(b.x_index(n), Some(ix));
        }
    }

    #[test]
    fn knudsen_scaling_is_strict() {
        // 1/eps^gamma = 2 exactly: modes with |m| < 2 are kept, so N = 2
        let b = Band::knudsen_scaling(0.25, 0.5).unwrap();
        assert_eq!(b.x_radius(), 2);
        let b = Band::knudsen_scaling(0.2, 0.5).unwrap();
        assert_eq!(b.x_radius(), 3);
    }
}
