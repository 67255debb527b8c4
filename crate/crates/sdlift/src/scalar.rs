//! Exact scalars: rationals and the real quadratic field Q(√2).
//!
//! Every probability, game value and LP coefficient in this crate lives in
//! Q(√2). Rational quantities are the special case with a zero surd part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
    }
}

/// Ordered field operations used by the generic simplex.
pub trait OrderedField: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Panics on division by zero.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sign(&self) -> Ordering;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }
    fn cmp_field(&self, o: &Self) -> Ordering {
        self.sub(o).sign()
    }
}

impl OrderedField for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if Zero::is_zero(self) {
            Ordering::Equal
        } else if Signed::is_positive(self) {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Floating point with a fixed zero band, so that pivoting ignores
/// round-off residue. Results computed in this field are only trusted after
/// a tolerance-aware certificate check.
pub const F64_ZERO_BAND: f64 = 1e-9;

impl OrderedField for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        self.abs() <= F64_ZERO_BAND
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        assert!(*o != 0.0, "division by zero");
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if OrderedField::is_zero(self) {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn from_rational(r: &Rational) -> Self {
        OrderedField::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// `a + b·√2` with rational `a`, `b`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
}

impl Surd {
    pub fn new(a: Rational, b: Rational) -> Self {
        Surd { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Surd { a, b: Zero::zero() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Surd::rational(rat(n, d))
    }

    pub fn sqrt2() -> Self {
        Surd { a: Zero::zero(), b: One::one() }
    }

    pub fn is_rational(&self) -> bool {
        Zero::is_zero(&self.b)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    /// Conjugate `a − b√2`.
    pub fn conj(&self) -> Self {
        Surd { a: self.a.clone(), b: -&self.b }
    }

    pub fn abs(&self) -> Self {
        if OrderedField::is_negative(self) {
            OrderedField::neg(self)
        } else {
            self.clone()
        }
    }
}

impl Default for Surd {
    fn default() -> Self {
        <Surd as OrderedField>::zero()
    }
}

impl From<Rational> for Surd {
    fn from(a: Rational) -> Self {
        Surd::rational(a)
    }
}

impl OrderedField for Surd {
    fn zero() -> Self {
        Surd { a: Zero::zero(), b: Zero::zero() }
    }
    fn one() -> Self {
        Surd { a: One::one(), b: Zero::zero() }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn add(&self, o: &Self) -> Self {
        Surd { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn sub(&self, o: &Self) -> Self {
        Surd { a: &self.a - &o.a, b: &self.b - &o.b }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_rational() && o.is_rational() {
            return Surd::rational(&self.a * &o.a);
        }
        let two = rat_int(2);
        Surd {
            a: &self.a * &o.a + &two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
    fn div(&self, o: &Self) -> Self {
        if o.is_rational() {
            return Surd { a: &self.a / &o.a, b: &self.b / &o.a };
        }
        // x / y = x·conj(y) / (a² − 2b²); the norm is non-zero since √2 is irrational.
        let norm = &o.a * &o.a - rat_int(2) * &o.b * &o.b;
        let num = OrderedField::mul(self, &o.conj());
        Surd { a: num.a / &norm, b: num.b / &norm }
    }
    fn neg(&self) -> Self {
        Surd { a: -&self.a, b: -&self.b }
    }
    fn sign(&self) -> Ordering {
        let sa = OrderedField::sign(&self.a);
        let sb = OrderedField::sign(&self.b);
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // Opposite signs: compare a² with 2b².
                let lhs = &self.a * &self.a;
                let rhs = rat_int(2) * &self.b * &self.b;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }
    fn from_rational(r: &Rational) -> Self {
        Surd::rational(r.clone())
    }
    fn to_f64(&self) -> f64 {
        OrderedField::to_f64(&self.a) + OrderedField::to_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_field(other)
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        OrderedField::add(self, o)
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        OrderedField::sub(self, o)
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        OrderedField::mul(self, o)
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        OrderedField::neg(self)
    }
}

impl std::iter::Sum for Surd {
    fn sum<I: Iterator<Item = Surd>>(iter: I) -> Surd {
        iter.fold(<Surd as OrderedField>::zero(), |acc, x| OrderedField::add(&acc, &x))
    }
}

impl fmt::Display for Surd {
    /// `3/4`, `1/2*sqrt2`, or `7/8+1/8*sqrt2`; parsed back by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        if Zero::is_zero(&self.a) {
            return write!(f, "{}*sqrt2", self.b);
        }
        if Signed::is_negative(&self.b) {
            write!(f, "{}-{}*sqrt2", self.a, -&self.b)
        } else {
            write!(f, "{}+{}*sqrt2", self.a, self.b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an element of Q(sqrt2)")]
pub struct ParseSurdError(pub String);

impl FromStr for Surd {
    type Err = ParseSurdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseSurdError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = t.strip_suffix("*sqrt2") else {
            return parse_rational(&t).map(Surd::rational).ok_or_else(err);
        };
        // Split the rational part from the surd coefficient at the last sign
        // that is not in leading position.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        match split {
            None => {
                let b = parse_rational(body).ok_or_else(err)?;
                Ok(Surd::new(Zero::zero(), b))
            }
            Some(i) => {
                let a = parse_rational(&body[..i]).ok_or_else(err)?;
                let b = parse_rational(body[i..].trim_start_matches('+')).ok_or_else(err)?;
                Ok(Surd::new(a, b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_of_mixed_terms() {
        // 3 − 2√2 ≈ 0.17 > 0, 1 − √2 < 0.
        assert_eq!(Surd::new(rat_int(3), rat_int(-2)).sign(), Ordering::Greater);
        assert_eq!(Surd::new(rat_int(1), rat_int(-1)).sign(), Ordering::Less);
        assert_eq!(Surd::new(rat_int(-3), rat_int(2)).sign(), Ordering::Less);
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Surd::new(rat(2, 3), rat(-5, 7));
        let y = Surd::new(rat(1, 2), rat(1, 3));
        let q = OrderedField::div(&x, &y);
        assert_eq!(OrderedField::mul(&q, &y), x);
    }

    #[test]
    fn display_roundtrip() {
        for s in ["3/4", "-1/2*sqrt2", "8/9+1/18*sqrt2", "1/8-1/8*sqrt2", "0"] {
            let v: Surd = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
    }
}
