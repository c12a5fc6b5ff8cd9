use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact element `q1 + q3 √3 + q5 √5 + q15 √15` of `Q(√3, √5)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Q35 {
    pub q1: BigRational,
    pub q3: BigRational,
    pub q5: BigRational,
    pub q15: BigRational,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Q35 {
    pub fn new(q1: BigRational, q3: BigRational, q5: BigRational, q15: BigRational) -> Self {
        Self { q1, q3, q5, q15 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        Self { q1: q, ..Self::default() }
    }

    /// `n / d`.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    pub fn int(n: i64) -> Self {
        Self::frac(n, 1)
    }

    /// `(n / d) √3`.
    pub fn sqrt3(n: i64, d: i64) -> Self {
        Self { q3: rat(n, d), ..Self::default() }
    }

    /// `(n / d) √5`.
    pub fn sqrt5(n: i64, d: i64) -> Self {
        Self { q5: rat(n, d), ..Self::default() }
    }

    /// `(n / d) √15`.
    pub fn sqrt15(n: i64, d: i64) -> Self {
        Self { q15: rat(n, d), ..Self::default() }
    }

    pub fn is_zero(&self) -> bool {
        self.q1.is_zero() && self.q3.is_zero() && self.q5.is_zero() && self.q15.is_zero()
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self { q1: &self.q1 * r, q3: &self.q3 * r, q5: &self.q5 * r, q15: &self.q15 * r }
    }

    /// Automorphism `√3 ↦ -√3`.
    pub fn conj3(&self) -> Self {
        Self { q1: self.q1.clone(), q3: -&self.q3, q5: self.q5.clone(), q15: -&self.q15 }
    }

    /// Automorphism `√5 ↦ -√5`.
    pub fn conj5(&self) -> Self {
        Self { q1: self.q1.clone(), q3: self.q3.clone(), q5: -&self.q5, q15: -&self.q15 }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // x · σ3(x) lies in Q(√5); multiplying by its σ5-conjugate lands in Q.
        let a = self.conj3();
        let n1 = self * &a;
        let b = n1.conj5();
        let norm = (&n1 * &b).q1;
        Some((&a * &b).scale(&(BigRational::one() / norm)))
    }

    pub fn to_f64(&self) -> f64 {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        f(&self.q1) + f(&self.q3) * 3f64.sqrt() + f(&self.q5) * 5f64.sqrt() + f(&self.q15) * 15f64.sqrt()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

impl Add for &Q35 {
    type Output = Q35;
    fn add(self, o: &Q35) -> Q35 {
        Q35 { q1: &self.q1 + &o.q1, q3: &self.q3 + &o.q3, q5: &self.q5 + &o.q5, q15: &self.q15 + &o.q15 }
    }
}

impl Sub for &Q35 {
    type Output = Q35;
    fn sub(self, o: &Q35) -> Q35 {
        Q35 { q1: &self.q1 - &o.q1, q3: &self.q3 - &o.q3, q5: &self.q5 - &o.q5, q15: &self.q15 - &o.q15 }
    }
}

impl Neg for &Q35 {
    type Output = Q35;
    fn neg(self) -> Q35 {
        Q35 { q1: -&self.q1, q3: -&self.q3, q5: -&self.q5, q15: -&self.q15 }
    }
}

impl Mul for &Q35 {
    type Output = Q35;
    fn mul(self, o: &Q35) -> Q35 {
        let (a, b, c, d) = (&self.q1, &self.q3, &self.q5, &self.q15);
        let (e, f, g, h) = (&o.q1, &o.q3, &o.q5, &o.q15);
        let three = rat(3, 1);
        let five = rat(5, 1);
        let fifteen = rat(15, 1);
        Q35 {
            q1: a * e + &three * (b * f) + &five * (c * g) + &fifteen * (d * h),
            q3: a * f + b * e + &five * (c * h + d * g),
            q5: a * g + c * e + &three * (b * h + d * f),
            q15: a * h + d * e + b * g + c * f,
        }
    }
}

impl Div for &Q35 {
    type Output = Q35;
    fn div(self, o: &Q35) -> Q35 {
        self * &o.inverse().expect("division by zero in Q(√3, √5)")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Q35 {
            type Output = Q35;
            fn $m(self, o: Q35) -> Q35 {
                (&self).$m(&o)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for Q35 {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (q, root) in [(&self.q1, ""), (&self.q3, "√3"), (&self.q5, "√5"), (&self.q15, "√15")] {
            if q.is_zero() {
                continue;
            }
            let num = q.numer().abs();
            let den = q.denom();
            let sign = if q.is_negative() { "-" } else { "" };
            let body = match (root.is_empty(), num.is_one()) {
                (true, _) => num.to_string(),
                (false, true) => root.to_string(),
                (false, false) => format!("{num}{root}"),
            };
            let term = if den.is_one() { format!("{sign}{body}") } else { format!("{sign}{body}/{den}") };
            parts.push(term);
        }
        if parts.is_empty() {
            return write!(out, "0");
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => s.push_str(&format!(" - {rest}")),
                None => s.push_str(&format!(" + {p}")),
            }
        }
        write!(out, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_products() {
        let s3 = Q35::sqrt3(1, 1);
        let s5 = Q35::sqrt5(1, 1);
        assert_eq!(&s3 * &s3, Q35::int(3));
        assert_eq!(&s3 * &s5, Q35::sqrt15(1, 1));
        assert_eq!(&s3 * &Q35::sqrt15(1, 1), Q35::sqrt5(3, 1));
        assert_eq!(&s5 * &Q35::sqrt15(1, 1), Q35::sqrt3(5, 1));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Q35::sqrt5(97, 12600).to_string(), "97√5/12600");
        assert_eq!(Q35::frac(-1, 45).to_string(), "-1/45");
        assert_eq!((&Q35::frac(1, 2) - &Q35::sqrt3(1, 1)).to_string(), "1/2 - √3");
    }

    #[test]
    fn inverse_of_mixed_element() {
        let x = &(&Q35::frac(2, 3) + &Q35::sqrt5(1, 7)) + &Q35::sqrt15(-4, 5);
        assert_eq!(&x * &x.inverse().unwrap(), Q35::one());
    }
}
