//! Rational functions `num/den` over input and constant variables: the
//! values the interpreter's registers hold while recording a computation
//! symbolically.
//!
//! Canonical form: `gcd(num, den) = 1`, the denominator has content 1 and a
//! positive leading coefficient, and the numerator absorbs the scalar. Two
//! structurally equal values therefore denote the same function.

use std::fmt;

use super::approx::ApproxError;
use super::approx::ConstantApprox;
use super::dyadic::RatInterval;
use super::poly::{poly_gcd, Polynomial, Var};
use super::rational::Rational;
use super::ArithOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatFunError {
    DivisionByZero,
}

impl fmt::Display for RatFunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatFunError::DivisionByZero => write!(f, "symbolic division by the zero function"),
        }
    }
}

impl std::error::Error for RatFunError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    /// The denominator vanishes at the given point.
    DenominatorZero,
    /// A variable had no assigned value.
    Unbound(Var),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DenominatorZero => write!(f, "denominator evaluates to zero"),
            EvalError::Unbound(v) => write!(f, "unbound variable {v}"),
        }
    }
}

impl std::error::Error for EvalError {}

#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::constant(Rational::one()),
            };
        }
        let g = poly_gcd(&num, &den);
        let mut num = num.divide_exact(&g).expect("gcd divides numerator");
        let mut den = den.divide_exact(&g).expect("gcd divides denominator");
        // Scale both sides by the same rational so the denominator becomes
        // primitive with positive leading coefficient.
        let mut scale = den
            .content()
            .recip()
            .expect("nonzero denominator has nonzero content");
        if den.leading_sign() < 0 {
            scale = -scale;
        }
        num = num.mul_scalar(&scale);
        den = den.mul_scalar(&scale);
        RationalFunction { num, den }
    }

    pub fn from_polys(num: Polynomial, den: Polynomial) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self::normalized(p, Polynomial::constant(Rational::one()))
    }

    pub fn scalar(q: Rational) -> Self {
        Self::polynomial(Polynomial::constant(q))
    }

    pub fn input(i: u32) -> Self {
        Self::polynomial(Polynomial::var(Var::Input(i)))
    }

    pub fn constant_var(j: u32) -> Self {
        Self::polynomial(Polynomial::var(Var::Constant(j)))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exact rational value, if the function is a constant.
    pub fn as_scalar(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        n.checked_div(&d).ok()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut vs = self.num.vars();
        for v in self.den.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        vs.sort();
        vs
    }

    pub fn add(&self, o: &RationalFunction) -> RationalFunction {
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        let den = self.den.mul(&o.den);
        Self::normalized(num, den)
    }

    pub fn sub(&self, o: &RationalFunction) -> RationalFunction {
        let num = self.num.mul(&o.den).sub(&o.num.mul(&self.den));
        let den = self.den.mul(&o.den);
        Self::normalized(num, den)
    }

    pub fn mul(&self, o: &RationalFunction) -> RationalFunction {
        Self::normalized(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RationalFunction) -> Result<RationalFunction, RatFunError> {
        if o.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(Self::normalized(
            self.num.mul(&o.den),
            self.den.mul(&o.num),
        ))
    }

    pub fn neg(&self) -> RationalFunction {
        Self::normalized(self.num.neg(), self.den.clone())
    }

    /// Full evaluation at a point.
    pub fn eval(&self, assign: &dyn Fn(Var) -> Option<Rational>) -> Result<Rational, EvalError> {
        let unbound = |p: &Polynomial| {
            p.vars()
                .into_iter()
                .find(|&v| assign(v).is_none())
        };
        if let Some(v) = unbound(&self.num).or_else(|| unbound(&self.den)) {
            return Err(EvalError::Unbound(v));
        }
        let n = self.num.eval(assign).expect("all variables bound");
        let d = self.den.eval(assign).expect("all variables bound");
        n.checked_div(&d).map_err(|_| EvalError::DenominatorZero)
    }

    /// Binds some variables to exact values, leaving the rest symbolic.
    /// Fails if the denominator collapses to the zero polynomial.
    pub fn substitute(
        &self,
        assign: &dyn Fn(Var) -> Option<Rational>,
    ) -> Result<RationalFunction, EvalError> {
        let num = self.num.substitute(assign);
        let den = self.den.substitute(assign);
        if den.is_zero() {
            return Err(EvalError::DenominatorZero);
        }
        Ok(Self::normalized(num, den))
    }
}

/// Exact symbolic field arithmetic; canonical form is restored after every
/// operation, so e.g. `(x+1)/(x-1) * (x-1)` comes back as `x+1`.
pub fn ratfun_op(
    a: &RationalFunction,
    b: &RationalFunction,
    op: ArithOp,
) -> Result<RationalFunction, RatFunError> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b)?,
    })
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant() == Some(Rational::one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Outcome of an interval sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicSign {
    Sign(i8),
    /// Zero could not be separated from the value at the precision cap; the
    /// caller may escalate to an oracle that knows the constants exactly.
    Undecided,
}

/// Decides the sign of `f`, whose free variables must all be constant
/// variables covered by `scheme`, by refining dyadic enclosures until the
/// numerator and denominator separate from zero or `max_precision` is hit.
pub fn symbolic_test(
    f: &RationalFunction,
    scheme: &mut dyn ConstantApprox,
    max_precision: u32,
) -> Result<SymbolicSign, ApproxError> {
    if f.is_zero() {
        return Ok(SymbolicSign::Sign(0));
    }
    if let Some(q) = f.as_scalar() {
        return Ok(SymbolicSign::Sign(q.signum()));
    }
    for v in f.vars() {
        if let Var::Input(i) = v {
            return Err(ApproxError::UnresolvedInput(i));
        }
    }
    for precision in 1..=max_precision {
        let mut boxes: Vec<(u32, RatInterval)> = Vec::new();
        for v in f.vars() {
            if let Var::Constant(j) = v {
                boxes.push((j, scheme.approx(j, precision)?.as_interval()));
            }
        }
        let lookup = |v: Var| -> Option<RatInterval> {
            match v {
                Var::Constant(j) => boxes.iter().find(|&&(k, _)| k == j).map(|(_, iv)| iv.clone()),
                Var::Input(_) => None,
            }
        };
        let num_iv = f.numerator().eval_interval(&lookup).expect("constants boxed");
        if num_iv.is_exactly_zero() {
            return Ok(SymbolicSign::Sign(0));
        }
        let den_iv = f.denominator().eval_interval(&lookup).expect("constants boxed");
        if let (Some(sn), Some(sd)) = (num_iv.separated_sign(), den_iv.separated_sign()) {
            return Ok(SymbolicSign::Sign(sn * sd));
        }
    }
    Ok(SymbolicSign::Undecided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::approx::{ConstSpec, SchemeSet};

    fn x(i: u32) -> RationalFunction {
        RationalFunction::input(i)
    }

    fn c(j: u32) -> RationalFunction {
        RationalFunction::constant_var(j)
    }

    fn k(s: &str) -> RationalFunction {
        RationalFunction::scalar(s.parse().unwrap())
    }

    #[test]
    fn self_cancellation() {
        assert!(ratfun_op(&x(1), &x(1), ArithOp::Sub).unwrap().is_zero());
    }

    #[test]
    fn monomial_product() {
        let p = ratfun_op(&x(1), &c(1), ArithOp::Mul).unwrap();
        assert_eq!(p.to_string(), "x1*c1");
    }

    #[test]
    fn cancellation_through_gcd() {
        // (x1+1)/(x1-1) * (x1-1) = x1+1, checked structurally and at
        // random rational points away from the singularity.
        let a = x(1).add(&k("1")).div(&x(1).sub(&k("1"))).unwrap();
        let b = x(1).sub(&k("1"));
        let prod = ratfun_op(&a, &b, ArithOp::Mul).unwrap();
        assert_eq!(prod, x(1).add(&k("1")));
        for p in [2i64, 3, -4, 7, 10] {
            let at = |v: Var| match v {
                Var::Input(1) => Some(Rational::from_int(p)),
                _ => None,
            };
            let lhs = a.eval(&at).unwrap() * b.eval(&at).unwrap();
            assert_eq!(lhs, prod.eval(&at).unwrap());
        }
    }

    #[test]
    fn division_by_zero_function() {
        assert_eq!(
            ratfun_op(&x(0), &k("0"), ArithOp::Div),
            Err(RatFunError::DivisionByZero)
        );
    }

    #[test]
    fn canonical_form_makes_equality_structural() {
        // 2x/2 and x agree structurally after normalization.
        let two_x = x(0).mul(&k("2"));
        let halved = two_x.div(&k("2")).unwrap();
        assert_eq!(halved, x(0));
        // (x^2-1)/(x-1) normalizes to x+1.
        let f = x(0).mul(&x(0)).sub(&k("1")).div(&x(0).sub(&k("1"))).unwrap();
        assert_eq!(f, x(0).add(&k("1")));
    }

    #[test]
    fn sign_of_sqrt_half_minus_half() {
        // c0 ~ sqrt(1/2) = 0.7071...; c0 - 1/2 separates from zero quickly.
        let mut scheme = SchemeSet::new(vec![ConstSpec::Sqrt("1/2".parse().unwrap())]);
        let f = c(0).sub(&k("1/2"));
        assert_eq!(symbolic_test(&f, &mut scheme, 4).unwrap(), SymbolicSign::Sign(1));
    }

    #[test]
    fn structural_zero_is_immediate() {
        let mut scheme = SchemeSet::new(vec![]);
        assert_eq!(
            symbolic_test(&k("0"), &mut scheme, 1).unwrap(),
            SymbolicSign::Sign(0)
        );
    }

    #[test]
    fn distinct_names_for_equal_values_stay_undecided() {
        // c0 and c1 both approximate 1/3; the enclosures always overlap, so
        // c0 - c1 can never be signed from approximations alone.
        let spec = vec![
            ConstSpec::Exact("1/3".parse().unwrap()),
            ConstSpec::Exact("1/3".parse().unwrap()),
        ];
        let mut scheme = SchemeSet::new(spec);
        let f = c(0).sub(&c(1));
        assert_eq!(
            symbolic_test(&f, &mut scheme, 32).unwrap(),
            SymbolicSign::Undecided
        );
    }
}
