//! Exact scalar arithmetic: arbitrary-precision rationals, dyadic
//! intervals, and multivariate rational functions.
//!
//! Everything in this module is immutable after construction and safe to
//! share across threads. There is intentionally no floating point anywhere:
//! the interpreter's comparisons must be decided exactly.

mod approx;
mod dyadic;
mod poly;
mod ratfun;
mod rational;

pub use approx::{ApproxError, ConstantApprox, ConstSpec, SchemeSet};
pub use dyadic::{DyadicError, DyadicInterval, RatInterval};
pub use poly::{Monomial, Polynomial, Var};
pub use ratfun::{
    ratfun_op, symbolic_test, EvalError, RatFunError, RationalFunction, SymbolicSign,
};
pub use rational::{dyadic_round, rat_op, DivisionByZero, ParseRationalError, Rational};

/// The four field operations shared by the scalar and symbolic layers and by
/// the machine's arithmetic opcodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}
