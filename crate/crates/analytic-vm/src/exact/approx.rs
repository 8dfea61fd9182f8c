//! Constant approximation schemes: suppliers of dyadic enclosures of any
//! requested precision, one per constant variable.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use super::dyadic::DyadicInterval;
use super::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxError {
    /// No scheme entry for this constant variable.
    UnknownConstant(u32),
    /// The tested function still mentions an input variable.
    UnresolvedInput(u32),
    /// The scheme cannot deliver the requested precision.
    PrecisionUnavailable { var: u32, precision: u32 },
}

impl fmt::Display for ApproxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxError::UnknownConstant(j) => write!(f, "no approximation scheme for c{j}"),
            ApproxError::UnresolvedInput(i) => {
                write!(f, "input variable x{i} not substituted before sign test")
            }
            ApproxError::PrecisionUnavailable { var, precision } => {
                write!(f, "scheme for c{var} cannot reach precision 2^-{precision}")
            }
        }
    }
}

impl std::error::Error for ApproxError {}

/// Supplies, for each constant variable, a dyadic interval of any requested
/// precision containing the constant's value.
pub trait ConstantApprox {
    fn approx(&mut self, var: u32, precision: u32) -> Result<DyadicInterval, ApproxError>;
}

/// How a single constant is approximated.
#[derive(Debug, Clone)]
pub enum ConstSpec {
    /// A known rational, enclosed in its width-`2^-n` grid cell. The
    /// enclosure never degenerates to a point, so approximations of equal
    /// constants stay indistinguishable, as they should.
    Exact(Rational),
    /// The square root of a nonnegative rational.
    Sqrt(Rational),
}

impl ConstSpec {
    fn interval(&self, precision: u32) -> DyadicInterval {
        match self {
            ConstSpec::Exact(q) => DyadicInterval::enclosing(q, precision),
            ConstSpec::Sqrt(q) => sqrt_interval(q, precision),
        }
    }
}

/// A list of constant specs, indexed by constant-variable number.
#[derive(Debug, Clone, Default)]
pub struct SchemeSet {
    specs: Vec<ConstSpec>,
}

impl SchemeSet {
    pub fn new(specs: Vec<ConstSpec>) -> Self {
        SchemeSet { specs }
    }

    pub fn exact(values: &[Rational]) -> Self {
        SchemeSet {
            specs: values.iter().cloned().map(ConstSpec::Exact).collect(),
        }
    }
}

impl ConstantApprox for SchemeSet {
    fn approx(&mut self, var: u32, precision: u32) -> Result<DyadicInterval, ApproxError> {
        let spec = self
            .specs
            .get(var as usize)
            .ok_or(ApproxError::UnknownConstant(var))?;
        Ok(spec.interval(precision))
    }
}

/// Dyadic enclosure of `sqrt(q)` of width `2^-n`: with `m = n + 1` and
/// `s = isqrt(floor(q * 4^m))`, the interval `[s, s+2] / 2^m` contains the
/// root.
fn sqrt_interval(q: &Rational, precision: u32) -> DyadicInterval {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    let m = precision as i64 + 1;
    let scaled = q * &Rational::pow2(2 * m);
    let floor: BigInt = scaled.floor().numer().clone();
    let s = floor.abs().sqrt();
    let lo = Rational::new(s.clone(), BigInt::from(1) << (m as u64)).unwrap();
    let hi = &lo + &Rational::pow2(-m + 1);
    DyadicInterval::new(lo, hi, precision).expect("constructed dyadic enclosure")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt_enclosure_contains_root() {
        for (q, check) in [("2", "577/408"), ("1/2", "408/577")] {
            // check is a close rational approximation of sqrt(q) (Pell-style).
            let approx = r(check);
            for n in 1..=20 {
                let iv = sqrt_interval(&r(q), n);
                assert!(iv.width() <= Rational::pow2(-(n as i64)));
                // The interval must contain sqrt(q); compare by squaring.
                assert!(iv.lo() * iv.lo() <= r(q), "lo too big at n={n}");
                assert!(iv.hi() * iv.hi() >= r(q), "hi too small at n={n}");
                let _ = approx;
            }
        }
    }

    #[test]
    fn exact_scheme_contains_value() {
        let mut s = SchemeSet::exact(&[r("22/7")]);
        let iv = s.approx(0, 10).unwrap();
        assert!(iv.contains(&r("22/7")));
        assert_eq!(iv.width(), Rational::pow2(-10));
    }

    #[test]
    fn unknown_constant_is_an_error() {
        let mut s = SchemeSet::new(vec![]);
        assert_eq!(s.approx(3, 1), Err(ApproxError::UnknownConstant(3)));
    }
}
