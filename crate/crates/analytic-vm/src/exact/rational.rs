//! The scalar type of the machine: an always-reduced fraction of
//! arbitrary-precision integers with positive denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithOp;

/// Exact rational number. Internally a [`BigRational`], which maintains the
/// invariants we rely on: the denominator is positive and the fraction is
/// reduced, so structural equality is value equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

/// Division by an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisionByZero;

impl fmt::Display for DivisionByZero {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "division by zero")
    }
}

impl std::error::Error for DivisionByZero {}

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self, DivisionByZero> {
        if denom.is_zero() {
            return Err(DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `p / q` for machine-sized integers; panics on `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "ratio with zero denominator");
        Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// `2^exp` for a signed exponent, so `pow2(-n)` is the grid width `2^-n`.
    pub fn pow2(exp: i64) -> Self {
        let mag = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Rational(BigRational::from_integer(mag))
        } else {
            Rational(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Whether the denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        let d = self.denom().magnitude();
        match d.trailing_zeros() {
            Some(tz) => (d >> tz).is_one(),
            // trailing_zeros is None only for zero, and denominators are nonzero;
            // a denominator of 1 has tz = Some(0).
            None => false,
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    /// Sign as `-1`, `0`, or `1`.
    pub fn signum(&self) -> i8 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    /// The value as a natural number, if it is one. Used when a register
    /// holds a Gödel code.
    pub fn to_natural(&self) -> Option<BigUint> {
        if !self.is_integer() {
            return None;
        }
        match self.numer().sign() {
            Sign::Minus => None,
            _ => Some(self.numer().magnitude().clone()),
        }
    }

    pub fn from_natural(n: BigUint) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        self.numer().to_i64()
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, DivisionByZero> {
        if rhs.is_zero() {
            return Err(DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, DivisionByZero> {
        Rational::one().checked_div(self)
    }

    pub fn min(self, other: Rational) -> Rational {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if self >= other {
            self
        } else {
            other
        }
    }
}

/// Exact field arithmetic on rationals; `Div` by zero is the only failure.
pub fn rat_op(a: &Rational, b: &Rational, op: ArithOp) -> Result<Rational, DivisionByZero> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

/// Rounds `q` to the dyadic grid of width `2^-n`, toward minus infinity.
/// The result `d` satisfies `|d - q| <= 2^-n` and has denominator dividing `2^n`.
pub fn dyadic_round(q: &Rational, n: u32) -> Rational {
    let scale = BigInt::one() << n;
    let scaled = Rational(&q.0 * BigRational::from_integer(scale.clone()));
    let floored = scaled.0.floor();
    Rational(floored / BigRational::from_integer(scale))
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    /// Panics on division by zero; use [`Rational::checked_div`] where the
    /// divisor is not known to be nonzero.
    fn div(self, rhs: Rational) -> Rational {
        self.checked_div(&rhs).expect("division by zero")
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl<'a> Neg for &'a Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

/// Canonical text form `p/q` used by every file and CLI format, including
/// integers (`5/1`).
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    Empty,
    BadInteger(String),
    ZeroDenominator,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseRationalError::Empty => write!(f, "empty rational literal"),
            ParseRationalError::BadInteger(s) => write!(f, "bad integer `{s}` in rational"),
            ParseRationalError::ZeroDenominator => write!(f, "rational with zero denominator"),
        }
    }
}

impl std::error::Error for ParseRationalError {}

/// Accepts `p/q` or the integer shorthand `p`.
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let (ns, ds) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let numer: BigInt = ns
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::BadInteger(ns.trim().to_string()))?;
        let denom: BigInt = match ds {
            Some(d) => d
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::BadInteger(d.trim().to_string()))?,
            None => BigInt::one(),
        };
        if denom.is_zero() {
            return Err(ParseRationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn basic_ops() {
        assert_eq!(rat_op(&r("1/2"), &r("1/3"), ArithOp::Add).unwrap(), r("5/6"));
        assert_eq!(rat_op(&r("1/2"), &r("0"), ArithOp::Mul).unwrap(), r("0"));
        assert_eq!(rat_op(&r("1"), &r("0"), ArithOp::Div), Err(DivisionByZero));
    }

    #[test]
    fn reduction_via_independent_gcd() {
        // 2/6 + 1 = 4/3; check the reduction 2/6 -> 1/3 against num_integer's gcd.
        let sum = rat_op(&r("2/6"), &r("1"), ArithOp::Add).unwrap();
        assert_eq!(sum, r("4/3"));
        let g = num_integer::gcd(2i64, 6i64);
        assert_eq!(g, 2);
        assert_eq!(r("2/6"), Rational::ratio(2 / g, 6 / g));
    }

    #[test]
    fn dyadic_rounding() {
        // floor(1/3 * 4)/4 = 1/4 and |1/4 - 1/3| = 1/12 <= 1/4.
        assert_eq!(dyadic_round(&r("1/3"), 2), r("1/4"));
        assert_eq!(dyadic_round(&r("1/2"), 10), r("1/2"));
        // floor toward minus infinity: |-1/2 + 1/3| = 1/6 <= 1/2.
        assert_eq!(dyadic_round(&r("-1/3"), 1), r("-1/2"));
    }

    #[test]
    fn dyadic_predicate() {
        assert!(r("3/8").is_dyadic());
        assert!(r("5").is_dyadic());
        assert!(!r("1/3").is_dyadic());
    }

    #[test]
    fn display_is_always_p_over_q() {
        assert_eq!(r("5").to_string(), "5/1");
        assert_eq!(r("-2/4").to_string(), "-1/2");
    }

    #[test]
    fn natural_extraction() {
        assert_eq!(r("7").to_natural().unwrap(), 7u32.into());
        assert!(r("-7").to_natural().is_none());
        assert!(r("1/2").to_natural().is_none());
    }
}
