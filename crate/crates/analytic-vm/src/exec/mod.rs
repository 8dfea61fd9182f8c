//! Step semantics and the three run modes: terminating runs, strongly
//! analytic streams, and weakly analytic streams, plus path-trace recording
//! and symbolic-constant execution.
//!
//! Divergence is only ever approximated by step budgets: a
//! [`RunOutcome::Diverged`] means "no termination within the budget", never
//! a proof of divergence. Runs that hit a singular step (division by an
//! exact zero, an unanswerable oracle query, an undecidable symbolic
//! comparison) end in a distinguished [`RunOutcome::Aborted`] which
//! semidecision-style callers treat like divergence.

mod semantics;
mod stream;
mod trace;

pub use semantics::{
    NumericSemantics, Semantics, SymbolicConfig, SymbolicSemantics, ZeroEscalation,
};
pub use stream::{
    parse_jsonl_stream, stream_to_jsonl, OutputStream, StreamMode, StreamParseError,
    StrongValidation, ValidateError,
};
pub use trace::{BranchRecord, PathTrace, TestKind, TraceTest};

use std::collections::BTreeMap;
use std::fmt;

use crate::exact::{ArithOp, Rational, RationalFunction};
use crate::machine::{DimSpec, Instruction, Program, QuerySource};
use crate::oracle::OracleQuery;

/// Output vectors wider than this abort the run; a runaway dimension would
/// otherwise materialize unbounded amounts of zeros.
pub const MAX_OUTPUT_DIM: u64 = 1 << 16;

/// Why a run aborted. Aborts are treated as divergence for semidecision
/// purposes but stay distinguishable in every report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    DivisionByZero,
    /// Symbolic mode only: a comparison stayed undecided at the precision
    /// cap and no escalation route was configured.
    UndecidedComparison(String),
    /// A `QRY` executed with no oracle attached.
    OracleUnavailable,
    /// The oracle refused the query (unknown table entry, undecodable code).
    OracleFailed(String),
    /// A `QRY` code operand was not a natural number.
    InvalidQueryCode,
    QueryInSymbolicMode,
    NegativeAddress(i64),
    NegativeCount(i64),
    DimensionTooLarge(u64),
    IndexOverflow,
    ApproximationFailure(String),
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::DivisionByZero => write!(f, "division by zero"),
            AbortReason::UndecidedComparison(d) => {
                write!(f, "comparison undecided at precision cap: {d}")
            }
            AbortReason::OracleUnavailable => write!(f, "oracle query with no oracle attached"),
            AbortReason::OracleFailed(m) => write!(f, "oracle failed: {m}"),
            AbortReason::InvalidQueryCode => write!(f, "query code is not a natural number"),
            AbortReason::QueryInSymbolicMode => write!(f, "oracle query in symbolic mode"),
            AbortReason::NegativeAddress(a) => write!(f, "indirect access at negative index {a}"),
            AbortReason::NegativeCount(n) => write!(f, "negative count {n}"),
            AbortReason::DimensionTooLarge(d) => write!(f, "output dimension {d} too large"),
            AbortReason::IndexOverflow => write!(f, "index register overflow"),
            AbortReason::ApproximationFailure(m) => write!(f, "approximation failure: {m}"),
        }
    }
}

/// Answers halting queries for `QRY` instructions. Implemented by
/// [`crate::oracle::OracleSession`]; [`NoOracle`] refuses everything.
pub trait QueryAnswerer {
    fn answer(&mut self, query: &OracleQuery) -> Result<bool, String>;
}

/// Refuses every query, so `QRY` aborts the run.
pub struct NoOracle;

impl QueryAnswerer for NoOracle {
    fn answer(&mut self, _query: &OracleQuery) -> Result<bool, String> {
        Err("no oracle attached".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
    Aborted(AbortReason),
}

/// Full machine state. Registers are materialized sparsely; untouched
/// registers read as zero. Owned by exactly one execution context.
#[derive(Debug, Clone)]
pub struct Configuration<V> {
    pub pc: u32,
    real: BTreeMap<u64, V>,
    index: BTreeMap<u32, i64>,
    pub steps_taken: u64,
    pub output_log: Vec<Vec<V>>,
    pub status: Status,
}

impl<V: Clone> Configuration<V> {
    fn new() -> Self {
        Configuration {
            pc: 0,
            real: BTreeMap::new(),
            index: BTreeMap::new(),
            steps_taken: 0,
            output_log: Vec::new(),
            status: Status::Running,
        }
    }

    pub fn real_reg(&self, idx: u64, zero: &V) -> V {
        self.real.get(&idx).cloned().unwrap_or_else(|| zero.clone())
    }

    /// Borrowing read; untouched registers fall back to the given zero.
    fn real_ref<'a>(&'a self, idx: u64, zero: &'a V) -> &'a V {
        self.real.get(&idx).unwrap_or(zero)
    }

    pub fn index_reg(&self, idx: u32) -> i64 {
        self.index.get(&idx).copied().unwrap_or(0)
    }

    fn set_real(&mut self, idx: u64, v: V) {
        self.real.insert(idx, v);
    }

    fn set_index(&mut self, idx: u32, v: i64) {
        self.index.insert(idx, v);
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Advanced,
    /// An output vector was appended to the log.
    Output,
    Halted,
    Aborted,
}

/// One running machine: a program, a value semantics, and a configuration.
pub struct Execution<'p, S: Semantics> {
    program: &'p Program,
    pub semantics: S,
    pub config: Configuration<S::Value>,
    trace: Option<PathTrace>,
}

impl<'p, S: Semantics> Execution<'p, S> {
    pub fn new(program: &'p Program, mut semantics: S) -> Self {
        let mut config = Configuration::new();
        let dim = semantics.input_dim();
        for i in 0..dim {
            let v = semantics.input_value(i);
            config.set_real(i as u64, v);
        }
        // The input dimension is provided in index register 0 at start.
        config.set_index(0, dim as i64);
        Execution { program, semantics, config, trace: None }
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(PathTrace::default());
    }

    pub fn take_trace(&mut self) -> PathTrace {
        self.trace.take().unwrap_or_default()
    }

    pub fn program(&self) -> &Program {
        self.program
    }

    fn abort(&mut self, reason: AbortReason) -> StepEvent {
        self.config.status = Status::Aborted(reason);
        StepEvent::Aborted
    }

    /// Applies exactly one instruction. Calling `step` on a machine that is
    /// not running returns the terminal event again without effect.
    pub fn step(&mut self, oracle: &mut dyn QueryAnswerer) -> StepEvent {
        match self.config.status {
            Status::Running => {}
            Status::Halted => return StepEvent::Halted,
            Status::Aborted(_) => return StepEvent::Aborted,
        }
        let pc = self.config.pc;
        let ins = self.program.instructions()[pc as usize];
        self.config.steps_taken += 1;

        macro_rules! try_or_abort {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(reason) => return self.abort(reason),
                }
            };
        }

        let zero = self.semantics.zero();
        match ins {
            Instruction::Add { dst, src }
            | Instruction::Sub { dst, src }
            | Instruction::Mul { dst, src }
            | Instruction::Div { dst, src } => {
                let op = match ins {
                    Instruction::Add { .. } => ArithOp::Add,
                    Instruction::Sub { .. } => ArithOp::Sub,
                    Instruction::Mul { .. } => ArithOp::Mul,
                    _ => ArithOp::Div,
                };
                let a = self.config.real_ref(dst as u64, &zero);
                let b = self.config.real_ref(src as u64, &zero);
                let v = try_or_abort!(self.semantics.arith(op, a, b));
                self.config.set_real(dst as u64, v);
                self.config.pc += 1;
            }
            Instruction::SetConst { dst, slot } => {
                let q = &self.program.constants()[slot as usize];
                let v = self.semantics.constant(slot, q);
                self.config.set_real(dst as u64, v);
                self.config.pc += 1;
            }
            Instruction::CopyReal { dst, src } => {
                let v = self.config.real_reg(src as u64, &zero);
                self.config.set_real(dst as u64, v);
                self.config.pc += 1;
            }
            Instruction::SetIndex { dst, value } => {
                self.config.set_index(dst, value);
                self.config.pc += 1;
            }
            Instruction::CopyIndex { dst, src } => {
                let v = self.config.index_reg(src);
                self.config.set_index(dst, v);
                self.config.pc += 1;
            }
            Instruction::IncIndex { reg } => {
                let v = self.config.index_reg(reg);
                match v.checked_add(1) {
                    Some(v) => self.config.set_index(reg, v),
                    None => return self.abort(AbortReason::IndexOverflow),
                }
                self.config.pc += 1;
            }
            Instruction::DecIndex { reg } => {
                let v = self.config.index_reg(reg);
                match v.checked_sub(1) {
                    Some(v) => self.config.set_index(reg, v),
                    None => return self.abort(AbortReason::IndexOverflow),
                }
                self.config.pc += 1;
            }
            Instruction::LoadIndirect { dst, addr } => {
                let at = self.config.index_reg(addr);
                if at < 0 {
                    return self.abort(AbortReason::NegativeAddress(at));
                }
                let v = self.config.real_reg(at as u64, &zero);
                self.config.set_real(dst as u64, v);
                self.config.pc += 1;
            }
            Instruction::StoreIndirect { src, addr } => {
                let at = self.config.index_reg(addr);
                if at < 0 {
                    return self.abort(AbortReason::NegativeAddress(at));
                }
                let v = self.config.real_reg(src as u64, &zero);
                self.config.set_real(at as u64, v);
                self.config.pc += 1;
            }
            Instruction::JumpEq { lhs, rhs, target } => {
                return self.branch(TestKind::Eq, lhs, rhs, target);
            }
            Instruction::JumpLt { lhs, rhs, target } => {
                return self.branch(TestKind::Lt, lhs, rhs, target);
            }
            Instruction::Jump { target } => {
                self.config.pc = target;
            }
            Instruction::Output(spec) => {
                let dim = match spec {
                    DimSpec::Fixed(n) => n,
                    DimSpec::FromIndex(i) => {
                        let v = self.config.index_reg(i);
                        if v < 0 {
                            return self.abort(AbortReason::NegativeCount(v));
                        }
                        v as u64
                    }
                };
                if dim > MAX_OUTPUT_DIM {
                    return self.abort(AbortReason::DimensionTooLarge(dim));
                }
                let vec: Vec<S::Value> =
                    (0..dim).map(|k| self.config.real_reg(k, &zero)).collect();
                self.config.output_log.push(vec);
                self.config.pc += 1;
                return StepEvent::Output;
            }
            Instruction::Halt => {
                self.config.status = Status::Halted;
                return StepEvent::Halted;
            }
            Instruction::Query { code, base, len } => {
                if !self.semantics.supports_queries() {
                    return self.abort(AbortReason::QueryInSymbolicMode);
                }
                let code_nat = match code {
                    QuerySource::ConstSlot(s) => {
                        self.program.constants()[s as usize].to_natural()
                    }
                    QuerySource::Register(r) => {
                        let v = self.config.real_reg(r as u64, &zero);
                        let q = try_or_abort!(self.semantics.numeric_view(&v));
                        q.to_natural()
                    }
                };
                let code_nat = match code_nat {
                    Some(n) => n,
                    None => return self.abort(AbortReason::InvalidQueryCode),
                };
                let count = self.config.index_reg(len);
                if count < 0 {
                    return self.abort(AbortReason::NegativeCount(count));
                }
                let mut input = Vec::with_capacity(count as usize);
                for k in 0..count as u64 {
                    let v = self.config.real_reg(base as u64 + k, &zero);
                    input.push(try_or_abort!(self.semantics.numeric_view(&v)));
                }
                let query = OracleQuery {
                    machine_code: crate::machine::GoedelCode::from_natural(code_nat),
                    input,
                };
                let answer = match oracle.answer(&query) {
                    Ok(b) => b,
                    Err(msg) => return self.abort(AbortReason::OracleFailed(msg)),
                };
                let v = self.semantics.from_bool(answer);
                self.config.set_real(0, v);
                self.config.pc += 1;
            }
        }
        StepEvent::Advanced
    }

    fn branch(&mut self, kind: TestKind, lhs: u32, rhs: u32, target: u32) -> StepEvent {
        let zero = self.semantics.zero();
        let a = self.config.real_ref(lhs as u64, &zero);
        let b = self.config.real_ref(rhs as u64, &zero);
        let record = self
            .trace
            .is_some()
            .then(|| self.semantics.trace_record(kind, a, b));
        let taken = match self.semantics.test(kind, a, b) {
            Ok(t) => t,
            Err(reason) => return self.abort(reason),
        };
        if let (Some(trace), Some(test)) = (&mut self.trace, record) {
            trace.branches.push(BranchRecord { pc: self.config.pc, kind, taken, test });
        }
        self.config.pc = if taken { target } else { self.config.pc + 1 };
        StepEvent::Advanced
    }

    /// Runs until halt, abort, the step budget is exhausted, or (when
    /// `max_outputs` is set) that many output vectors exist.
    pub fn run(
        &mut self,
        budget: u64,
        max_outputs: Option<usize>,
        oracle: &mut dyn QueryAnswerer,
    ) -> Status {
        let mut remaining = budget;
        while remaining > 0 {
            if let Some(cap) = max_outputs {
                if self.config.output_log.len() >= cap {
                    break;
                }
            }
            match self.step(oracle) {
                StepEvent::Advanced | StepEvent::Output => {}
                StepEvent::Halted | StepEvent::Aborted => break,
            }
            remaining -= 1;
        }
        self.config.status.clone()
    }
}

/// Result of a terminating-mode run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// `HALT` was reached; carries the last output vector (empty if the
    /// program never emitted one).
    Terminated(Vec<Rational>),
    /// The step budget ran out with the machine still running.
    Diverged { budget: u64 },
    /// A singular step ended the run; treated as divergence by
    /// semidecision-style callers.
    Aborted { reason: AbortReason, steps: u64 },
    /// A stream-mode run; produced by the driver layer.
    StreamProduced(OutputStream),
}

impl RunOutcome {
    pub fn terminated(&self) -> bool {
        matches!(self, RunOutcome::Terminated(_))
    }
}

/// Terminating run under the given step budget (which must be positive).
pub fn run_bss(program: &Program, input: &[Rational], budget: u64) -> RunOutcome {
    run_bss_with(program, input, budget, &mut NoOracle)
}

pub fn run_bss_with(
    program: &Program,
    input: &[Rational],
    budget: u64,
    oracle: &mut dyn QueryAnswerer,
) -> RunOutcome {
    assert!(budget >= 1, "budget must be at least 1");
    let mut exec = Execution::new(program, NumericSemantics::new(input.to_vec()));
    match exec.run(budget, None, oracle) {
        Status::Halted => {
            RunOutcome::Terminated(exec.config.output_log.last().cloned().unwrap_or_default())
        }
        Status::Running => RunOutcome::Diverged { budget },
        Status::Aborted(reason) => RunOutcome::Aborted { reason, steps: exec.config.steps_taken },
    }
}

fn run_stream(
    program: &Program,
    input: &[Rational],
    mode: StreamMode,
    count: usize,
    budget: u64,
    oracle: &mut dyn QueryAnswerer,
) -> OutputStream {
    assert!(count >= 1, "count must be at least 1");
    assert!(budget >= 1, "budget must be at least 1");
    let mut exec = Execution::new(program, NumericSemantics::new(input.to_vec()));
    let status = exec.run(budget, Some(count), oracle);
    let exhausted = matches!(status, Status::Running) && exec.config.output_log.len() < count;
    OutputStream {
        mode,
        vectors: exec.config.output_log,
        exhausted_budget: exhausted,
        abort: match status {
            Status::Aborted(reason) => Some(reason),
            _ => None,
        },
    }
}

/// Collects the first `count` vectors of a strongly analytic run. The
/// executor does not itself certify the stream; see [`validate_strong`].
pub fn run_strong(program: &Program, input: &[Rational], count: usize, budget: u64) -> OutputStream {
    run_strong_with(program, input, count, budget, &mut NoOracle)
}

pub fn run_strong_with(
    program: &Program,
    input: &[Rational],
    count: usize,
    budget: u64,
    oracle: &mut dyn QueryAnswerer,
) -> OutputStream {
    run_stream(program, input, StreamMode::Strong, count, budget, oracle)
}

/// Weak-mode run: same collection mechanics, no pairwise contract.
/// Convergence is a semantic property probed by tests, never certified here.
pub fn run_weak(program: &Program, input: &[Rational], count: usize, budget: u64) -> OutputStream {
    run_weak_with(program, input, count, budget, &mut NoOracle)
}

pub fn run_weak_with(
    program: &Program,
    input: &[Rational],
    count: usize,
    budget: u64,
    oracle: &mut dyn QueryAnswerer,
) -> OutputStream {
    run_stream(program, input, StreamMode::Weak, count, budget, oracle)
}

/// Runs numerically and records every branch decision with the exact values
/// tested.
pub fn record_path(program: &Program, input: &[Rational], budget: u64) -> PathTrace {
    assert!(budget >= 1, "budget must be at least 1");
    let mut exec = Execution::new(program, NumericSemantics::new(input.to_vec()));
    exec.enable_trace();
    exec.run(budget, None, &mut NoOracle);
    exec.take_trace()
}

/// Outcome of a symbolic-mode run: the registers held rational functions of
/// the input variables and the declared symbolic constants.
#[derive(Debug, Clone)]
pub struct SymbolicRun {
    pub trace: PathTrace,
    pub status: Status,
    pub outputs: Vec<Vec<RationalFunction>>,
    pub steps_taken: u64,
}

/// Runs in symbolic-constant mode, recording the rational function tested at
/// every branch.
pub fn run_symbolic(program: &Program, config: SymbolicConfig, budget: u64) -> SymbolicRun {
    assert!(budget >= 1, "budget must be at least 1");
    let mut exec = Execution::new(program, SymbolicSemantics::new(config));
    exec.enable_trace();
    let status = exec.run(budget, None, &mut NoOracle);
    SymbolicRun {
        trace: exec.take_trace(),
        status,
        outputs: exec.config.output_log.clone(),
        steps_taken: exec.config.steps_taken,
    }
}

/// Checks the pairwise strong-stream condition
/// `||y_n - y_m|| <= 2^-n + 2^-m` together with dimension agreement over the
/// first `upto` entries, reporting the lexicographically first violation.
pub fn validate_strong(
    stream: &OutputStream,
    upto: usize,
) -> Result<StrongValidation, ValidateError> {
    stream::validate_strong_impl(stream, upto)
}

#[cfg(test)]
mod tests;
