//! Exact amplitudes `(re + i·im) / √2^e` with `re`, `im` in `Z[√2]`.
//!
//! Every state and observable in the repository has entries of this form
//! (Paulis, `1/√2`, `1/2`, `(σz ± σx)/√2`). The representation is kept
//! canonical: `e` is minimal, so structural equality is numeric equality.

use crate::scalar::{rat, Rational, Surd};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// `a + b·√2` over i128. Overflow panics: the magnitudes involved are tiny
/// and an overflow signals a construction bug.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Zs {
    pub a: i128,
    pub b: i128,
}

fn ck(x: Option<i128>) -> i128 {
    x.expect("exact amplitude overflow")
}

impl Zs {
    pub const ZERO: Zs = Zs { a: 0, b: 0 };

    pub fn int(a: i128) -> Self {
        Zs { a, b: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    fn add(self, o: Zs) -> Zs {
        Zs { a: ck(self.a.checked_add(o.a)), b: ck(self.b.checked_add(o.b)) }
    }

    fn neg(self) -> Zs {
        Zs { a: -self.a, b: -self.b }
    }

    fn mul(self, o: Zs) -> Zs {
        let aa = ck(self.a.checked_mul(o.a));
        let bb = ck(ck(self.b.checked_mul(o.b)).checked_mul(2));
        let ab = ck(self.a.checked_mul(o.b));
        let ba = ck(self.b.checked_mul(o.a));
        Zs { a: ck(aa.checked_add(bb)), b: ck(ab.checked_add(ba)) }
    }

    fn times_sqrt2(self) -> Zs {
        Zs { a: ck(self.b.checked_mul(2)), b: self.a }
    }

    /// Requires `a` even.
    fn div_sqrt2(self) -> Zs {
        debug_assert!(self.a % 2 == 0);
        Zs { a: self.b, b: self.a / 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct QNum {
    re: Zs,
    im: Zs,
    e: u32,
}

impl QNum {
    pub const ZERO: QNum = QNum { re: Zs::ZERO, im: Zs::ZERO, e: 0 };
    pub const ONE: QNum = QNum { re: Zs { a: 1, b: 0 }, im: Zs::ZERO, e: 0 };

    pub fn new(re: Zs, im: Zs, e: u32) -> Self {
        QNum { re, im, e }.normalized()
    }

    pub fn int(n: i128) -> Self {
        QNum::new(Zs::int(n), Zs::ZERO, 0)
    }

    pub fn i() -> Self {
        QNum::new(Zs::ZERO, Zs::int(1), 0)
    }

    /// `1/√2`.
    pub fn inv_sqrt2() -> Self {
        QNum::new(Zs::int(1), Zs::ZERO, 1)
    }

    pub fn half() -> Self {
        QNum::new(Zs::int(1), Zs::ZERO, 2)
    }

    /// `1/√2^e`.
    pub fn inv_sqrt2_pow(e: u32) -> Self {
        QNum::new(Zs::int(1), Zs::ZERO, e)
    }

    fn normalized(mut self) -> Self {
        if self.re.is_zero() && self.im.is_zero() {
            return QNum::ZERO;
        }
        while self.e > 0 && self.re.a % 2 == 0 && self.im.a % 2 == 0 {
            self.re = self.re.div_sqrt2();
            self.im = self.im.div_sqrt2();
            self.e -= 1;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QNum { re: self.re, im: self.im.neg(), e: self.e }
    }

    fn lift(&self, e: u32) -> (Zs, Zs) {
        let (mut re, mut im) = (self.re, self.im);
        for _ in self.e..e {
            re = re.times_sqrt2();
            im = im.times_sqrt2();
        }
        (re, im)
    }

    /// Real part as an element of Q(√2); `None` if the value is not real.
    pub fn to_surd(&self) -> Option<Surd> {
        if !self.is_real() {
            return None;
        }
        let k = self.e / 2;
        let pow = |n: u32| BigInt::from(2).pow(n);
        let frac = |x: i128, n: u32| Rational::new(BigInt::from(x), pow(n));
        Some(if self.e.is_multiple_of(2) {
            Surd::new(frac(self.re.a, k), frac(self.re.b, k))
        } else {
            // (a + b√2)/(2^k √2) = b/2^k + (a/2^{k+1})√2
            Surd::new(frac(self.re.b, k), frac(self.re.a, k + 1))
        })
    }

    /// Inverse of `to_surd` for dyadic inputs; `None` when a denominator is
    /// not a power of two.
    pub fn from_surd(s: &Surd) -> Option<QNum> {
        let dyadic = |r: &Rational| -> Option<(i128, u32)> {
            let d = r.denom();
            let tz = d.trailing_zeros().unwrap_or(0) as u32;
            if d != &BigInt::from(2).pow(tz) {
                return None;
            }
            Some((r.numer().to_i128()?, tz))
        };
        let (a, ka) = dyadic(&s.a)?;
        let (b, kb) = dyadic(&s.b)?;
        let k = ka.max(kb);
        let a = a.checked_mul(1i128.checked_shl(k - ka)?)?;
        let b = b.checked_mul(1i128.checked_shl(k - kb)?)?;
        Some(QNum::new(Zs { a, b }, Zs::ZERO, 2 * k))
    }

    pub fn re_f64(&self) -> f64 {
        let s = std::f64::consts::SQRT_2;
        (self.re.a as f64 + self.re.b as f64 * s) / s.powi(self.e as i32)
    }

    pub fn im_f64(&self) -> f64 {
        let s = std::f64::consts::SQRT_2;
        (self.im.a as f64 + self.im.b as f64 * s) / s.powi(self.e as i32)
    }
}

impl Add for QNum {
    type Output = QNum;
    fn add(self, o: QNum) -> QNum {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        let e = self.e.max(o.e);
        let (r1, i1) = self.lift(e);
        let (r2, i2) = o.lift(e);
        QNum::new(r1.add(r2), i1.add(i2), e)
    }
}

impl Neg for QNum {
    type Output = QNum;
    fn neg(self) -> QNum {
        QNum { re: self.re.neg(), im: self.im.neg(), e: self.e }
    }
}

impl Sub for QNum {
    type Output = QNum;
    fn sub(self, o: QNum) -> QNum {
        self + (-o)
    }
}

impl Mul for QNum {
    type Output = QNum;
    fn mul(self, o: QNum) -> QNum {
        if self.is_zero() || o.is_zero() {
            return QNum::ZERO;
        }
        let re = self.re.mul(o.re).add(self.im.mul(o.im).neg());
        let im = self.re.mul(o.im).add(self.im.mul(o.re));
        QNum::new(re, im, self.e + o.e)
    }
}

impl fmt::Display for QNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = QNum { re: self.re, im: Zs::ZERO, e: self.e }.to_surd().expect("real");
        if self.is_real() {
            return write!(f, "{re}");
        }
        let im = QNum { re: self.im, im: Zs::ZERO, e: self.e }.to_surd().expect("real");
        write!(f, "({re})+({im})i")
    }
}

/// Convenience for tests and tables: `n/d` with `d` a power of two.
pub fn dyadic(n: i64, d: i64) -> QNum {
    QNum::from_surd(&Surd::rational(rat(n, d))).expect("dyadic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_arithmetic() {
        let h = QNum::inv_sqrt2();
        assert_eq!(h * h, QNum::half());
        assert_eq!(QNum::half() + QNum::half(), QNum::ONE);
        assert_eq!(QNum::i() * QNum::i(), QNum::int(-1));
        assert_eq!(h.to_surd().unwrap(), &Surd::from_ratio(1, 2) * &Surd::sqrt2());
    }

    #[test]
    fn surd_roundtrip() {
        for s in ["3/4", "1/8-1/8*sqrt2", "1/2*sqrt2", "-5"] {
            let v: Surd = s.parse().unwrap();
            assert_eq!(QNum::from_surd(&v).unwrap().to_surd().unwrap(), v);
        }
        assert!(QNum::from_surd(&Surd::from_ratio(1, 3)).is_none());
        assert_eq!(dyadic(3, 4).to_surd().unwrap(), Surd::from_ratio(3, 4));
    }

    #[test]
    fn canonical_form() {
        // (√2)(1/√2) built two ways compares equal.
        let a = QNum::new(Zs { a: 0, b: 1 }, Zs::ZERO, 0) * QNum::inv_sqrt2();
        assert_eq!(a, QNum::ONE);
    }
}
