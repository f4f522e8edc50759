//! Exact scalars: arbitrary-precision rationals and Gaussian rationals `a + b i`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number. Always stored reduced with a positive denominator.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(Q::new(a, b))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// Render a rational as `"p/q"` (or `"p"` when integral).
pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Q,
    pub im: Q,
}

impl GaussianRational {
    pub fn new(re: Q, im: Q) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Q) -> Self {
        GaussianRational { re, im: Q::zero() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::real(qi(v))
    }

    pub fn i() -> Self {
        GaussianRational { re: Q::zero(), im: Q::one() }
    }

    /// `(-i)^k`
    pub fn neg_i_pow(k: u32) -> Self {
        match k % 4 {
            0 => Self::from_int(1),
            1 => Self::new(Q::zero(), qi(-1)),
            2 => Self::from_int(-1),
            _ => Self::i(),
        }
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, s: &Q) -> Self {
        GaussianRational { re: &self.re * s, im: &self.im * s }
    }

    pub fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(GaussianRational { re: &self.re / &norm, im: -&self.im / &norm })
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational { re: Q::zero(), im: Q::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_int(1)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: GaussianRational) -> GaussianRational {
        GaussianRational { re: self.re + o.re, im: self.im + o.im }
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: GaussianRational) -> GaussianRational {
        &self - &o
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::real(&self.re * &o.re);
        }
        GaussianRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: GaussianRational) -> GaussianRational {
        &self * &o
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.re)),
            (true, false) => write!(f, "{}i", fmt_q(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({} {} {}i)", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_pair_product_is_real() {
        let a = GaussianRational::new(qi(1), qi(2));
        let p = &a * &a.conj();
        assert_eq!(p, GaussianRational::from_int(5));
    }

    #[test]
    fn powers_of_minus_i() {
        let mi = GaussianRational::neg_i_pow(1);
        assert_eq!(&mi * &mi, GaussianRational::neg_i_pow(2));
        assert_eq!(GaussianRational::neg_i_pow(2), GaussianRational::from_int(-1));
        assert_eq!(GaussianRational::neg_i_pow(4), GaussianRational::one());
    }

    #[test]
    fn rationals_stay_reduced() {
        let v = q(6, -4);
        assert_eq!(v.numer(), &BigInt::from(-3));
        assert_eq!(v.denom(), &BigInt::from(2));
        assert_eq!(fmt_q(&v), "-3/2");
        assert_eq!(parse_q("-3/2"), Some(v));
    }

    #[test]
    fn inverse() {
        let a = GaussianRational::new(qi(3), qi(-4));
        assert_eq!(&a * &a.inv().unwrap(), GaussianRational::one());
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(2, -1), 0);
        assert_eq!(binomial(4, 5), 0);
    }
}
