//! Scalar abstraction for the numeric kernels.
//!
//! The polynomial, sparse-vector and simplex code is generic over the scalar
//! type: `Rat` (arbitrary-precision rationals) is the type every certificate
//! is stated in, `f64` backs the floating-point hint passes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed};
use std::fmt::{Debug, Display};

/// Exact rational scalar; the canonical form (coprime, positive denominator)
/// is maintained by `num-rational` on every operation.
pub type Rat = BigRational;

pub trait Scalar: Clone + Num + Signed + PartialOrd + Debug + Display {
    fn from_rat(r: &Rat) -> Self;

    /// Comparison slack for pivoting decisions. Zero for exact types.
    fn pivot_tol() -> Self;

    /// Simplex pivots between tableau reinversions for inexact types.
    fn refresh_interval() -> u64 {
        1_000
    }

    fn to_f64(&self) -> f64;

    /// True when the scalar type carries no rounding error.
    const EXACT: bool;
}

impl Scalar for Rat {
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn pivot_tol() -> Self {
        Rat::zero()
    }

    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }

    const EXACT: bool = true;
}

impl Scalar for f64 {
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }

    fn pivot_tol() -> Self {
        1e-9
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    const EXACT: bool = false;
}

impl Scalar for f32 {
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r) as f32
    }

    fn pivot_tol() -> Self {
        1e-5
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    const EXACT: bool = false;
}

use num_traits::{One, Zero};

/// Double-double float: an unevaluated sum `hi + lo` with roughly 31 decimal
/// digits of precision. Used as a second-chance hint scalar when plain f64
/// cannot separate a tiny infeasibility margin from its own rounding error.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        Dd::new(s, e + self.lo + rhs.lo)
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        Dd::new(p, e + self.hi * rhs.lo + self.lo * rhs.hi)
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r1 = self - rhs * Dd::from_f64(q1);
        let q2 = r1.hi / rhs.hi;
        let r2 = r1 - rhs * Dd::from_f64(q2);
        let q3 = r2.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }
}

impl std::ops::Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = (self / rhs).value().trunc();
        self - rhs * Dd::from_f64(q)
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd { hi: 1.0, lo: 0.0 }
    }
}

impl num_traits::Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(str: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(str, radix).map(Dd::from_f64)
    }
}

impl num_traits::Signed for Dd {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -*self
        } else {
            *self
        }
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if *self <= *other {
            Dd::zero()
        } else {
            *self - *other
        }
    }
    fn signum(&self) -> Self {
        if self.is_positive() {
            Dd::one()
        } else if self.is_negative() {
            -Dd::one()
        } else {
            Dd::zero()
        }
    }
    fn is_positive(&self) -> bool {
        self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0)
    }
    fn is_negative(&self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }
}

impl Debug for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dd({:e})", self.value())
    }
}

impl Display for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}", self.value())
    }
}

impl Scalar for Dd {
    fn from_rat(r: &Rat) -> Self {
        let hi = rat_to_f64(r);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        let lo = match Rat::from_float(hi) {
            Some(h) => rat_to_f64(&(r - h)),
            None => 0.0,
        };
        Dd::new(hi, lo)
    }

    fn pivot_tol() -> Self {
        Dd::from_f64(1e-20)
    }

    fn refresh_interval() -> u64 {
        8_000
    }

    fn to_f64(&self) -> f64 {
        self.value()
    }

    const EXACT: bool = false;
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Scale so the quotient of the leading 64-bit limbs is representable.
    let n = r.numer();
    let d = r.denom();
    if n.is_zero() {
        return 0.0;
    }
    let n_shift = (n.bits() as i64 - 63).max(0);
    let d_shift = (d.bits() as i64 - 63).max(0);
    let nf = bigint_lossy(&(n >> n_shift));
    let df = bigint_lossy(&(d >> d_shift));
    let exp = (n_shift - d_shift).clamp(-2000, 2000) as i32;
    (nf / df) * 2f64.powi(exp)
}

fn bigint_lossy(x: &BigInt) -> f64 {
    let (sign, digits) = x.to_u64_digits();
    let mut acc = 0.0f64;
    for d in digits.iter().rev() {
        acc = acc * 1.8446744073709552e19 + *d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -acc,
        _ => acc,
    }
}

/// Parse "n/d", an integer, or a plain decimal string into an exact rational.
/// Decimals convert literally (0.1753 -> 1753/10000), never through floats.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|e| format!("bad numerator {n:?}: {e}"))?;
        let d: BigInt = d.trim().parse().map_err(|e| format!("bad denominator {d:?}: {e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip: BigInt = if ip.is_empty() || ip == "-" {
            BigInt::zero()
        } else {
            ip.parse().map_err(|e| format!("bad number {s:?}: {e}"))?
        };
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let scale = BigInt::from(10u32).pow(fp.len() as u32);
        let frac: BigInt = if fp.is_empty() {
            BigInt::zero()
        } else {
            fp.parse().map_err(|e| format!("bad decimal {s:?}: {e}"))?
        };
        let mag = ip.magnitude().clone() * scale.magnitude() + frac.magnitude();
        let num = BigInt::from_biguint(
            if neg { num_bigint::Sign::Minus } else { num_bigint::Sign::Plus },
            mag,
        );
        return Ok(Rat::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Rat::from(n))
}

/// Render as "n/d" (or "n" for integers); inverse of `parse_rat` for exact IO.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimal_exact() {
        assert_eq!(parse_rat("0.1753").unwrap(), rat(1753, 10000));
        assert_eq!(parse_rat("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("2").unwrap(), rat_int(2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn round_trip_format() {
        for r in [rat(1753, 10000), rat(-1, 3), rat_int(0), rat_int(-7)] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn lossy_f64() {
        assert!((rat(1, 3).to_f64() - 1.0 / 3.0).abs() < 1e-15);
        let big = Rat::new(BigInt::from(1u8) << 200, BigInt::from(3));
        let expect = 2f64.powi(200) / 3.0;
        assert!((big.to_f64() / expect - 1.0).abs() < 1e-12);
    }
}
