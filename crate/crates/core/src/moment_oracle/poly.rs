use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::q35::Q35;

/// `∫_Ω v^α dv` over the cell `[-1/2, 1/2]^3`.
pub fn monomial_moment(alpha: [u32; 3]) -> BigRational {
    let mut out = BigRational::one();
    for a in alpha {
        if a % 2 == 1 {
            return BigRational::zero();
        }
        // ∫ v^a dv = 2^{-a} / (a + 1)
        out *= BigRational::new(BigInt::one(), (BigInt::one() << a as usize) * BigInt::from(a + 1));
    }
    out
}

/// Polynomial in `(v1, v2, v3)` with coefficients in `Q(√3, √5)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VPolynomial {
    terms: BTreeMap<[u32; 3], Q35>,
}

impl VPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q35) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(alpha: [u32; 3], c: Q35) -> Self {
        let mut p = Self::zero();
        p.add_term(alpha, c);
        p
    }

    /// `v_i` with `i` in `0..3`.
    pub fn var(i: usize) -> Self {
        let mut a = [0; 3];
        a[i] = 1;
        Self::monomial(a, Q35::one())
    }

    /// `|v|^2`.
    pub fn speed_sq() -> Self {
        (0..3).fold(Self::zero(), |acc, i| &acc + &(&Self::var(i) * &Self::var(i)))
    }

    pub fn add_term(&mut self, alpha: [u32; 3], c: Q35) {
        let entry = self.terms.entry(alpha).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Q35)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Q35) -> Self {
        let mut out = Self::zero();
        for (a, q) in &self.terms {
            out.add_term(*a, q * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Q35::one()), |acc, _| &acc * self)
    }
}

/// `∫_Ω p dv`, exact.
pub fn poly_moment(p: &VPolynomial) -> Q35 {
    p.terms().fold(Q35::zero(), |acc, (a, c)| &acc + &c.scale(&monomial_moment(*a)))
}

impl Add for &VPolynomial {
    type Output = VPolynomial;
    fn add(self, o: &VPolynomial) -> VPolynomial {
        let mut out = self.clone();
        for (a, c) in o.terms() {
            out.add_term(*a, c.clone());
        }
        out
    }
}

impl Sub for &VPolynomial {
    type Output = VPolynomial;
    fn sub(self, o: &VPolynomial) -> VPolynomial {
        self + &(-o)
    }
}

impl Neg for &VPolynomial {
    type Output = VPolynomial;
    fn neg(self) -> VPolynomial {
        self.scale(&Q35::int(-1))
    }
}

impl Mul for &VPolynomial {
    type Output = VPolynomial;
    fn mul(self, o: &VPolynomial) -> VPolynomial {
        let mut out = VPolynomial::zero();
        for (a, c) in self.terms() {
            for (b, d) in o.terms() {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], c * d);
            }
        }
        out
    }
}

/// The limit objects of the closure.
pub mod limit {
    use super::*;

    /// `e1_i = 2√3 v_i`.
    pub fn e1(i: usize) -> VPolynomial {
        VPolynomial::var(i).scale(&Q35::sqrt3(2, 1))
    }

    /// `e2 = 6√5 (|v|^2 - 1/4)`.
    pub fn e2() -> VPolynomial {
        let shifted = &VPolynomial::speed_sq() - &VPolynomial::constant(Q35::frac(1, 4));
        shifted.scale(&Q35::sqrt5(6, 1))
    }

    /// `e2_i = 6√5 (v_i^2 - 1/12)`.
    pub fn e2_axis(i: usize) -> VPolynomial {
        let v = VPolynomial::var(i);
        (&(&v * &v) - &VPolynomial::constant(Q35::frac(1, 12))).scale(&Q35::sqrt5(6, 1))
    }

    /// `A_ij = v_i v_j - δ_ij |v|^2 / 3`.
    pub fn a(i: usize, j: usize) -> VPolynomial {
        let mut p = &VPolynomial::var(i) * &VPolynomial::var(j);
        if i == j {
            p = &p - &VPolynomial::speed_sq().scale(&Q35::frac(1, 3));
        }
        p
    }

    /// `B_i = v_i (|v|^2 - 19/60)`.
    pub fn b(i: usize) -> VPolynomial {
        &VPolynomial::var(i) * &(&VPolynomial::speed_sq() - &VPolynomial::constant(Q35::frac(19, 60)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_moments() {
        assert_eq!(monomial_moment([0, 0, 0]), BigRational::one());
        assert_eq!(monomial_moment([4, 0, 0]), BigRational::new(1.into(), 80.into()));
        assert_eq!(monomial_moment([2, 2, 0]), BigRational::new(1.into(), 144.into()));
        assert!(monomial_moment([1, 2, 0]).is_zero());
    }
}
