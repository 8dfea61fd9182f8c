//! The two value domains the interpreter runs over: exact rationals, and
//! rational functions of input variables and approximated constants.

use std::collections::BTreeMap;

use super::trace::{TestKind, TraceTest};
use super::AbortReason;
use crate::exact::{
    rat_op, ratfun_op, symbolic_test, ArithOp, Rational, RationalFunction,
    SchemeSet, SymbolicSign, Var,
};

/// Scalar operations the step function needs, abstracted over the value
/// type. Implementations decide equality and order tests; in the symbolic
/// domain that is where approximation and escalation happen.
pub trait Semantics {
    type Value: Clone + std::fmt::Debug;

    fn zero(&self) -> Self::Value;
    fn from_bool(&self, b: bool) -> Self::Value;
    fn input_dim(&self) -> usize;
    fn input_value(&mut self, position: usize) -> Self::Value;
    fn constant(&mut self, slot: u32, value: &Rational) -> Self::Value;
    fn arith(
        &mut self,
        op: ArithOp,
        a: &Self::Value,
        b: &Self::Value,
    ) -> Result<Self::Value, AbortReason>;
    fn test(&mut self, kind: TestKind, a: &Self::Value, b: &Self::Value)
        -> Result<bool, AbortReason>;
    fn trace_record(&self, kind: TestKind, a: &Self::Value, b: &Self::Value) -> TraceTest;
    /// Exact rational view of a value, for oracle query marshalling.
    fn numeric_view(&self, v: &Self::Value) -> Result<Rational, AbortReason>;
    fn supports_queries(&self) -> bool;
}

/// Plain exact-rational execution.
pub struct NumericSemantics {
    input: Vec<Rational>,
}

impl NumericSemantics {
    pub fn new(input: Vec<Rational>) -> Self {
        NumericSemantics { input }
    }
}

impl Semantics for NumericSemantics {
    type Value = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn from_bool(&self, b: bool) -> Rational {
        if b {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    fn input_dim(&self) -> usize {
        self.input.len()
    }

    fn input_value(&mut self, position: usize) -> Rational {
        self.input[position].clone()
    }

    fn constant(&mut self, _slot: u32, value: &Rational) -> Rational {
        value.clone()
    }

    fn arith(&mut self, op: ArithOp, a: &Rational, b: &Rational) -> Result<Rational, AbortReason> {
        rat_op(a, b, op).map_err(|_| AbortReason::DivisionByZero)
    }

    fn test(&mut self, kind: TestKind, a: &Rational, b: &Rational) -> Result<bool, AbortReason> {
        Ok(match kind {
            TestKind::Eq => a == b,
            TestKind::Lt => a < b,
        })
    }

    fn trace_record(&self, _kind: TestKind, a: &Rational, b: &Rational) -> TraceTest {
        TraceTest::Numeric { lhs: a.clone(), rhs: b.clone() }
    }

    fn numeric_view(&self, v: &Rational) -> Result<Rational, AbortReason> {
        Ok(v.clone())
    }

    fn supports_queries(&self) -> bool {
        true
    }
}

/// How an undecided symbolic comparison is resolved.
#[derive(Debug, Clone)]
pub enum ZeroEscalation {
    /// Abort the run with `UndecidedComparison`. This is the honest default:
    /// deciding equality of approximated constants needs outside help.
    None,
    /// Exact values for the symbolic constants, standing in for the halting
    /// oracle: they decide "is the tested function zero?", after which a
    /// nonzero sign is recovered by further interval refinement.
    ExactValues(Vec<Rational>),
}

/// Configuration of a symbolic-constant run.
#[derive(Debug, Clone)]
pub struct SymbolicConfig {
    /// Exact rational inputs. They enter the recorded functions as input
    /// variables but are substituted before any sign decision.
    pub input_values: Vec<Rational>,
    /// Constant-table slots to treat as symbolic constants, mapped to
    /// constant-variable indices.
    pub symbolic_slots: BTreeMap<u32, u32>,
    /// Approximation scheme for the constant variables.
    pub scheme: SchemeSet,
    /// Escalation route for comparisons the scheme cannot decide.
    pub escalation: ZeroEscalation,
    /// Refinement cap for ordinary sign tests.
    pub max_precision: u32,
}

impl SymbolicConfig {
    pub fn new(input_values: Vec<Rational>, scheme: SchemeSet) -> Self {
        SymbolicConfig {
            input_values,
            symbolic_slots: BTreeMap::new(),
            scheme,
            escalation: ZeroEscalation::None,
            max_precision: 64,
        }
    }

    pub fn symbolic_slot(mut self, slot: u32, var: u32) -> Self {
        self.symbolic_slots.insert(slot, var);
        self
    }

    pub fn with_escalation(mut self, e: ZeroEscalation) -> Self {
        self.escalation = e;
        self
    }

    pub fn with_max_precision(mut self, p: u32) -> Self {
        self.max_precision = p;
        self
    }
}

pub struct SymbolicSemantics {
    config: SymbolicConfig,
}

impl SymbolicSemantics {
    pub fn new(config: SymbolicConfig) -> Self {
        SymbolicSemantics { config }
    }

    /// Substitutes the exact inputs, leaving constants symbolic.
    fn at_inputs(&self, f: &RationalFunction) -> Result<RationalFunction, AbortReason> {
        let inputs = &self.config.input_values;
        f.substitute(&|v| match v {
            Var::Input(i) => inputs.get(i as usize).cloned(),
            Var::Constant(_) => None,
        })
        .map_err(|_| AbortReason::DivisionByZero)
    }

    /// Sign of `f` at the true constants: interval refinement first, then
    /// the configured escalation.
    fn decide_sign(&mut self, f: &RationalFunction) -> Result<i8, AbortReason> {
        let at_point = self.at_inputs(f)?;
        match symbolic_test(&at_point, &mut self.config.scheme, self.config.max_precision)
            .map_err(|e| AbortReason::ApproximationFailure(e.to_string()))?
        {
            SymbolicSign::Sign(s) => return Ok(s),
            SymbolicSign::Undecided => {}
        }
        match &self.config.escalation {
            ZeroEscalation::None => {
                Err(AbortReason::UndecidedComparison(at_point.to_string()))
            }
            ZeroEscalation::ExactValues(values) => {
                let values = values.clone();
                let exact = at_point
                    .eval(&|v| match v {
                        Var::Constant(j) => values.get(j as usize).cloned(),
                        Var::Input(_) => None,
                    })
                    .map_err(|_| AbortReason::DivisionByZero)?;
                if exact.is_zero() {
                    return Ok(0);
                }
                // The value is known nonzero; refinement must separate
                // eventually. The cap is generous slack, not a tolerance.
                let cap = self.config.max_precision.saturating_mul(16).saturating_add(256);
                for precision in self.config.max_precision + 1..=cap {
                    match symbolic_test(&at_point, &mut self.config.scheme, precision)
                        .map_err(|e| AbortReason::ApproximationFailure(e.to_string()))?
                    {
                        SymbolicSign::Sign(s) => return Ok(s),
                        SymbolicSign::Undecided => {}
                    }
                }
                Err(AbortReason::ApproximationFailure(format!(
                    "sign of nonzero value {at_point} not separated by 2^-{cap}"
                )))
            }
        }
    }
}

impl Semantics for SymbolicSemantics {
    type Value = RationalFunction;

    fn zero(&self) -> RationalFunction {
        RationalFunction::scalar(Rational::zero())
    }

    fn from_bool(&self, b: bool) -> RationalFunction {
        RationalFunction::scalar(if b { Rational::one() } else { Rational::zero() })
    }

    fn input_dim(&self) -> usize {
        self.config.input_values.len()
    }

    fn input_value(&mut self, position: usize) -> RationalFunction {
        RationalFunction::input(position as u32)
    }

    fn constant(&mut self, slot: u32, value: &Rational) -> RationalFunction {
        match self.config.symbolic_slots.get(&slot) {
            Some(&var) => RationalFunction::constant_var(var),
            None => RationalFunction::scalar(value.clone()),
        }
    }

    fn arith(
        &mut self,
        op: ArithOp,
        a: &RationalFunction,
        b: &RationalFunction,
    ) -> Result<RationalFunction, AbortReason> {
        if op == ArithOp::Div {
            // Division must be singular exactly when the numeric run would
            // divide by zero, i.e. when the divisor vanishes at the true
            // point, not merely as a function.
            if self.decide_sign(b)? == 0 {
                return Err(AbortReason::DivisionByZero);
            }
        }
        ratfun_op(a, b, op).map_err(|_| AbortReason::DivisionByZero)
    }

    fn test(
        &mut self,
        kind: TestKind,
        a: &RationalFunction,
        b: &RationalFunction,
    ) -> Result<bool, AbortReason> {
        let diff = a.sub(b);
        let sign = self.decide_sign(&diff)?;
        Ok(match kind {
            TestKind::Eq => sign == 0,
            TestKind::Lt => sign < 0,
        })
    }

    fn trace_record(
        &self,
        _kind: TestKind,
        a: &RationalFunction,
        b: &RationalFunction,
    ) -> TraceTest {
        TraceTest::Symbolic { diff: a.sub(b) }
    }

    fn numeric_view(&self, _v: &RationalFunction) -> Result<Rational, AbortReason> {
        Err(AbortReason::QueryInSymbolicMode)
    }

    fn supports_queries(&self) -> bool {
        false
    }
}
