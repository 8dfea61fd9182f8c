//! Dyadic intervals: the certified enclosures handed out by constant
//! approximation schemes, plus the plain rational-endpoint interval
//! arithmetic used to bound polynomial values over them.

use std::fmt;

use super::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DyadicError {
    NotDyadic,
    Inverted,
    TooWide { precision: u32 },
}

impl fmt::Display for DyadicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DyadicError::NotDyadic => write!(f, "interval endpoint is not dyadic"),
            DyadicError::Inverted => write!(f, "interval has lo > hi"),
            DyadicError::TooWide { precision } => {
                write!(f, "interval wider than 2^-{precision}")
            }
        }
    }
}

impl std::error::Error for DyadicError {}

/// A closed interval `[lo, hi]` with dyadic endpoints and `hi - lo <= 2^-precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: Rational,
    hi: Rational,
    precision: u32,
}

impl DyadicInterval {
    pub fn new(lo: Rational, hi: Rational, precision: u32) -> Result<Self, DyadicError> {
        if !lo.is_dyadic() || !hi.is_dyadic() {
            return Err(DyadicError::NotDyadic);
        }
        if lo > hi {
            return Err(DyadicError::Inverted);
        }
        if &hi - &lo > Rational::pow2(-(precision as i64)) {
            return Err(DyadicError::TooWide { precision });
        }
        Ok(DyadicInterval { lo, hi, precision })
    }

    /// The grid cell `[round(q), round(q) + 2^-n]` that contains `q`.
    ///
    /// Note this is deliberately a positive-width enclosure even when `q`
    /// itself is dyadic, so that equality of two approximated constants can
    /// never be concluded from the intervals alone.
    pub fn enclosing(q: &Rational, precision: u32) -> Self {
        let lo = super::rational::dyadic_round(q, precision);
        let hi = &lo + &Rational::pow2(-(precision as i64));
        DyadicInterval { lo, hi, precision }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn as_interval(&self) -> RatInterval {
        RatInterval::new(self.lo.clone(), self.hi.clone())
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]@2^-{}", self.lo, self.hi, self.precision)
    }
}

/// Closed interval with arbitrary rational endpoints. Products of dyadic
/// intervals with rational polynomial coefficients land here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        RatInterval { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        RatInterval::point(Rational::zero())
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval::new(-&self.hi, -&self.lo)
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        let candidates = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mut lo = candidates[0].clone();
        let mut hi = candidates[0].clone();
        for c in &candidates[1..] {
            if c < &lo {
                lo = c.clone();
            }
            if c > &hi {
                hi = c.clone();
            }
        }
        RatInterval::new(lo, hi)
    }

    pub fn scale(&self, q: &Rational) -> RatInterval {
        if q.is_negative() {
            RatInterval::new(&self.hi * q, &self.lo * q)
        } else {
            RatInterval::new(&self.lo * q, &self.hi * q)
        }
    }

    pub fn pow(&self, exp: u32) -> RatInterval {
        let mut acc = RatInterval::point(Rational::one());
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    /// Sign of every point in the interval, if uniform and nonzero.
    pub fn separated_sign(&self) -> Option<i8> {
        if self.lo.signum() > 0 {
            Some(1)
        } else if self.hi.signum() < 0 {
            Some(-1)
        } else {
            None
        }
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn enclosing_contains_and_has_width() {
        let iv = DyadicInterval::enclosing(&r("1/3"), 4);
        assert!(iv.contains(&r("1/3")));
        assert_eq!(iv.width(), r("1/16"));
        assert!(iv.lo().is_dyadic() && iv.hi().is_dyadic());
    }

    #[test]
    fn invariants_checked() {
        assert!(DyadicInterval::new(r("1/3"), r("1/2"), 1).is_err());
        assert!(DyadicInterval::new(r("1/2"), r("1/4"), 1).is_err());
        assert!(DyadicInterval::new(r("0"), r("1"), 1).is_err());
        assert!(DyadicInterval::new(r("0"), r("1/2"), 1).is_ok());
    }

    #[test]
    fn interval_multiplication_covers_products() {
        let a = RatInterval::new(r("-1"), r("2"));
        let b = RatInterval::new(r("3"), r("4"));
        let p = a.mul(&b);
        assert_eq!(p.lo, r("-4"));
        assert_eq!(p.hi, r("8"));
    }

    #[test]
    fn separation() {
        assert_eq!(RatInterval::new(r("1/16"), r("1/8")).separated_sign(), Some(1));
        assert_eq!(RatInterval::new(r("-3"), r("-2")).separated_sign(), Some(-1));
        assert_eq!(RatInterval::new(r("-1"), r("1")).separated_sign(), None);
    }
}
