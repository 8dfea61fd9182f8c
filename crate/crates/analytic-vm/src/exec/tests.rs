use super::*;
use crate::exact::{ConstSpec, SchemeSet, Var};
use crate::machine::parse_program;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn rs(list: &[&str]) -> Vec<Rational> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn arithmetic_step() {
    let p = parse_program("main:\n  ADD r0 r1\n  HALT").unwrap();
    let mut exec = Execution::new(&p, NumericSemantics::new(rs(&["1/2", "1/3"])));
    assert_eq!(exec.step(&mut NoOracle), StepEvent::Advanced);
    assert_eq!(exec.config.real_reg(0, &Rational::zero()), r("5/6"));
    assert_eq!(exec.config.pc, 1);
}

#[test]
fn equality_branch_taken_on_exact_equality() {
    let p = parse_program("main:\n  JEQ r0 r1 done\n  HALT\ndone:\n  OUT 1\n  HALT").unwrap();
    let out = run_bss(&p, &rs(&["2/7", "2/7"]), 100);
    assert_eq!(out, RunOutcome::Terminated(vec![r("2/7")]));
    // Different values fall through to the bare HALT.
    let out = run_bss(&p, &rs(&["2/7", "3/7"]), 100);
    assert_eq!(out, RunOutcome::Terminated(vec![]));
}

#[test]
fn division_by_exact_zero_aborts() {
    let p = parse_program("main:\n  DIV r0 r1\n  HALT").unwrap();
    match run_bss(&p, &rs(&["1", "0"]), 100) {
        RunOutcome::Aborted { reason: AbortReason::DivisionByZero, .. } => {}
        other => panic!("expected division abort, got {other:?}"),
    }
}

#[test]
fn echo_program_terminates_with_input() {
    let p = parse_program("main:\n  OUT 1\n  HALT").unwrap();
    assert_eq!(run_bss(&p, &rs(&["5"]), 10), RunOutcome::Terminated(vec![r("5")]));
}

#[test]
fn explicit_loop_diverges_at_budget() {
    let p = parse_program("loop:\n  JMP loop").unwrap();
    assert_eq!(run_bss(&p, &rs(&["1"]), 100), RunOutcome::Diverged { budget: 100 });
}

#[test]
fn input_dimension_lands_in_index_zero() {
    // OUT i0 emits a vector of dimension d = number of inputs.
    let p = parse_program("main:\n  OUT i0\n  HALT").unwrap();
    let out = run_bss(&p, &rs(&["3", "4", "5"]), 10);
    assert_eq!(out, RunOutcome::Terminated(rs(&["3", "4", "5"])));
}

#[test]
fn indirect_addressing_roundtrip() {
    // R[i1] := r0; r2 := R[i1]
    let src = "main:\n  MOVI i1 7\n  STOREI r0 i1\n  LOADI r2 i1\n  SUB r2 r0\n  OUT 3\n  HALT";
    let p = parse_program(src).unwrap();
    let out = run_bss(&p, &rs(&["9/5"]), 50);
    assert_eq!(out, RunOutcome::Terminated(rs(&["9/5", "0", "0"])));
}

#[test]
fn budget_prefix_monotonicity() {
    // Emits 1, 2, 3, ... forever.
    let src = ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  OUT 1\n  JMP loop\n";
    let p = parse_program(src).unwrap();
    let small = run_weak(&p, &[], 5, 100);
    let large = run_weak(&p, &[], 5, 1000);
    assert!(small.vectors.len() <= large.vectors.len());
    assert_eq!(small.vectors[..], large.vectors[..small.vectors.len()]);
}

#[test]
fn determinism_step_for_step() {
    let src = ".const c0 = 1/3\nmain:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  JLT r0 r2 loop\n  OUT 2\n  HALT";
    let p = parse_program(src).unwrap();
    let input = rs(&["-5", "0", "2"]);
    let t1 = record_path(&p, &input, 10_000);
    let t2 = record_path(&p, &input, 10_000);
    assert_eq!(t1, t2);
    assert!(!t1.is_empty());
}

#[test]
fn stream_collection_stops_at_count() {
    let src = ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  OUT 1\n  JMP loop\n";
    let p = parse_program(src).unwrap();
    let s = run_strong(&p, &[], 4, 100_000);
    assert_eq!(s.vectors.len(), 4);
    assert!(!s.exhausted_budget);
    assert_eq!(s.scalar(3), Some(&r("4")));
}

#[test]
fn empty_output_stream_sets_exhausted_budget() {
    let p = parse_program("loop:\n  JMP loop").unwrap();
    let s = run_weak(&p, &[], 3, 50);
    assert!(s.vectors.is_empty());
    assert!(s.exhausted_budget);
}

#[test]
fn validate_strong_examples() {
    let mk = |vals: &[&str]| {
        OutputStream::from_vectors(StreamMode::Strong, vals.iter().map(|v| rs(&[v])).collect())
    };
    // 1/2, 1/4, 1/8, 1/16: all six pairs checked by hand, e.g.
    // |y1 - y4| = 7/16 <= 2^-1 + 2^-4 = 9/16.
    let s = mk(&["1/2", "1/4", "1/8", "1/16"]);
    assert_eq!(validate_strong(&s, 4).unwrap(), StrongValidation::Valid);
    // 1, 1/2, 1/4, 1/8 fails first at the (1,3) pair:
    // |1 - 1/4| = 3/4 > 2^-1 + 2^-3 = 5/8 (the (1,2) pair still passes).
    let s = mk(&["1", "1/2", "1/4", "1/8"]);
    assert_eq!(validate_strong(&s, 2).unwrap(), StrongValidation::Valid);
    assert_eq!(validate_strong(&s, 4).unwrap(), StrongValidation::Violation { n: 1, m: 3 });
    // (0, 1) grossly violates |y1 - y2| <= 2^-1 + 2^-2.
    let s = mk(&["0", "1"]);
    assert_eq!(validate_strong(&s, 2).unwrap(), StrongValidation::Violation { n: 1, m: 2 });
    // Identical vectors are always valid.
    let s = mk(&["3/7", "3/7", "3/7"]);
    assert_eq!(validate_strong(&s, 3).unwrap(), StrongValidation::Valid);
    // Asking for more entries than the stream has is a caller error.
    assert!(validate_strong(&s, 5).is_err());
}

#[test]
fn validate_strong_flags_dimension_mismatch() {
    let s = OutputStream::from_vectors(
        StreamMode::Strong,
        vec![rs(&["0"]), rs(&["0", "0"])],
    );
    assert_eq!(validate_strong(&s, 2).unwrap(), StrongValidation::Violation { n: 1, m: 2 });
}

// chi_[0,1): outputs 1 iff 0 <= x < 1, else 0.
fn chi_unit_interval() -> crate::machine::Program {
    let src = "\
.const c0 = 0
.const c1 = 1
chi:
  SETC r1 c0
  SETC r2 c1
  JLT r0 r1 no
  JLT r0 r2 yes
no:
  SETC r0 c0
  OUT 1
  HALT
yes:
  SETC r0 c1
  OUT 1
  HALT
";
    parse_program(src).unwrap()
}

#[test]
fn record_path_on_characteristic_function() {
    let p = chi_unit_interval();
    let trace = record_path(&p, &rs(&["1/2"]), 100);
    assert_eq!(trace.len(), 2);
    // First comparison: x against 0 (not taken), second: x against 1 (taken).
    assert_eq!(
        trace.branches[0].test,
        TraceTest::Numeric { lhs: r("1/2"), rhs: r("0") }
    );
    assert!(!trace.branches[0].taken);
    assert_eq!(
        trace.branches[1].test,
        TraceTest::Numeric { lhs: r("1/2"), rhs: r("1") }
    );
    assert!(trace.branches[1].taken);
}

#[test]
fn straight_line_program_has_empty_trace() {
    let p = parse_program("main:\n  ADD r0 r1\n  OUT 1\n  HALT").unwrap();
    assert!(record_path(&p, &rs(&["1", "2"]), 100).is_empty());
}

#[test]
fn symbolic_trace_records_tested_function() {
    // Two inputs; tests x1 < c0 where constant slot 0 is symbolic.
    let src = ".const c0 = 1/2\nmain:\n  SETC r2 c0\n  JLT r1 r2 done\ndone:\n  HALT";
    let p = parse_program(src).unwrap();
    let scheme = SchemeSet::new(vec![ConstSpec::Sqrt(r("1/2"))]);
    let cfg = SymbolicConfig::new(rs(&["0", "1/4"]), scheme).symbolic_slot(0, 0);
    let run = run_symbolic(&p, cfg, 100);
    assert_eq!(run.status, Status::Halted);
    assert_eq!(run.trace.len(), 1);
    match &run.trace.branches[0].test {
        TraceTest::Symbolic { diff } => assert_eq!(diff.to_string(), "x1 - c0"),
        other => panic!("expected symbolic record, got {other:?}"),
    }
    // x1 = 1/4 < sqrt(1/2) ~ 0.707, so the branch is taken.
    assert!(run.trace.branches[0].taken);
}

#[test]
fn symbolic_undecided_comparison_aborts_without_escalation() {
    // c0 == c1 where both approximate the same value: undecidable from
    // enclosures alone.
    let src = ".const c0 = 1/3\n.const c1 = 1/3\nmain:\n  SETC r0 c0\n  SETC r1 c1\n  JEQ r0 r1 done\ndone:\n  HALT";
    let p = parse_program(src).unwrap();
    let scheme = SchemeSet::exact(&[r("1/3"), r("1/3")]);
    let cfg = SymbolicConfig::new(vec![], scheme)
        .symbolic_slot(0, 0)
        .symbolic_slot(1, 1)
        .with_max_precision(24);
    let run = run_symbolic(&p, cfg, 100);
    match run.status {
        Status::Aborted(AbortReason::UndecidedComparison(_)) => {}
        other => panic!("expected undecided-comparison abort, got {other:?}"),
    }
}

#[test]
fn symbolic_escalation_decides_equality() {
    let src = ".const c0 = 1/3\n.const c1 = 1/3\nmain:\n  SETC r0 c0\n  SETC r1 c1\n  JEQ r0 r1 eq\n  HALT\neq:\n  OUT 1\n  HALT";
    let p = parse_program(src).unwrap();
    let scheme = SchemeSet::exact(&[r("1/3"), r("1/3")]);
    let cfg = SymbolicConfig::new(vec![], scheme)
        .symbolic_slot(0, 0)
        .symbolic_slot(1, 1)
        .with_max_precision(8)
        .with_escalation(ZeroEscalation::ExactValues(rs(&["1/3", "1/3"])));
    let run = run_symbolic(&p, cfg, 100);
    assert_eq!(run.status, Status::Halted);
    assert!(run.trace.branches[0].taken);
    assert_eq!(run.outputs.len(), 1);
}

#[test]
fn numeric_and_symbolic_traces_agree_on_rational_constants() {
    // A little loop: r0 starts at x0, adds c0 until r0 >= c1.
    let src = "\
.const c0 = 1/3
.const c1 = 2
main:
  SETC r1 c0
  SETC r2 c1
loop:
  ADD r0 r1
  JLT r0 r2 loop
  OUT 1
  HALT
";
    let p = parse_program(src).unwrap();
    let input = rs(&["1/7"]);
    let constants = rs(&["1/3", "2"]);

    let numeric = record_path(&p, &input, 10_000);

    let scheme = SchemeSet::exact(&constants);
    let cfg = SymbolicConfig::new(input.clone(), scheme)
        .symbolic_slot(0, 0)
        .symbolic_slot(1, 1)
        .with_max_precision(16)
        .with_escalation(ZeroEscalation::ExactValues(constants.clone()));
    let symbolic = run_symbolic(&p, cfg, 10_000);

    assert_eq!(symbolic.status, Status::Halted);
    assert_eq!(numeric.len(), symbolic.trace.len());
    for (nb, sb) in numeric.branches.iter().zip(&symbolic.trace.branches) {
        assert_eq!(nb.pc, sb.pc);
        assert_eq!(nb.taken, sb.taken);
        // Evaluating the recorded function at the inputs and true constants
        // reproduces the numeric test value lhs - rhs.
        let (lhs, rhs) = match &nb.test {
            TraceTest::Numeric { lhs, rhs } => (lhs.clone(), rhs.clone()),
            _ => unreachable!(),
        };
        let diff = match &sb.test {
            TraceTest::Symbolic { diff } => diff,
            _ => unreachable!(),
        };
        let val = diff
            .eval(&|v| match v {
                Var::Input(i) => input.get(i as usize).cloned(),
                Var::Constant(j) => constants.get(j as usize).cloned(),
            })
            .unwrap();
        assert_eq!(val, &lhs - &rhs);
    }
}

#[test]
fn jsonl_roundtrip_and_determinism() {
    let s = OutputStream::from_vectors(
        StreamMode::Strong,
        vec![rs(&["1/2", "-3/4"]), rs(&["0", "5"])],
    );
    let text = stream_to_jsonl(&s);
    assert_eq!(
        text,
        "{\"n\":1,\"dim\":2,\"values\":[\"1/2\",\"-3/4\"]}\n{\"n\":2,\"dim\":2,\"values\":[\"0/1\",\"5/1\"]}\n"
    );
    let parsed = parse_jsonl_stream(&text, StreamMode::Strong).unwrap();
    assert_eq!(parsed.vectors, s.vectors);
    // Byte determinism across repeated dumps.
    assert_eq!(text, stream_to_jsonl(&parsed));
}

#[test]
fn out_with_dynamic_dimension_from_index_register() {
    let src = "main:\n  MOVI i2 2\n  OUT i2\n  HALT";
    let p = parse_program(src).unwrap();
    let out = run_bss(&p, &rs(&["1/2", "1/3", "1/4"]), 10);
    assert_eq!(out, RunOutcome::Terminated(rs(&["1/2", "1/3"])));
}

#[test]
fn query_without_oracle_aborts() {
    let src = ".const c0 = 5\nmain:\n  MOVI i1 0\n  QRY c0 r0 i1\n  HALT";
    let p = parse_program(src).unwrap();
    match run_bss(&p, &[], 10) {
        RunOutcome::Aborted { reason: AbortReason::OracleFailed(_), .. } => {}
        other => panic!("expected oracle abort, got {other:?}"),
    }
}
