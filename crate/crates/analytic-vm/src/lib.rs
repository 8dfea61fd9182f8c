//! An exact-arithmetic virtual machine for real-RAM register programs.
//!
//! The machine model is a register machine over the reals: arithmetic
//! (`+`, `-`, `*`, `/`) and comparisons (`=`, `<`) are exact, registers hold
//! arbitrary-precision rationals, and indirect addressing goes through
//! integer-valued index registers. On top of the single step semantics the
//! crate provides three run modes:
//!
//! * **BSS** — ordinary terminating runs; the output is the last emitted
//!   vector ([`exec::run_bss`]).
//! * **Strong** — infinite output streams where the `n`-th vector is within
//!   `2^-n` of the limit ([`exec::run_strong`], [`exec::validate_strong`]).
//! * **Weak** — output streams that are only required to converge
//!   ([`exec::run_weak`]).
//!
//! Around the interpreter sit:
//!
//! * [`exact`] — arbitrary-precision rationals, dyadic intervals, and
//!   multivariate rational functions used for symbolic path recording;
//! * [`machine`] — the program representation, a line-oriented assembler,
//!   and Gödel coding of programs into single natural numbers;
//! * [`oracle`] — budgeted and table-backed answering of halting queries
//!   issued by the `QRY` instruction;
//! * [`transforms`] — machine-to-machine constructions (limit-lemma
//!   directions, epigraph evaluation, the Cauchy transform, quantifier
//!   reduction generators, composition with moduli of continuity);
//! * [`stdlib`] — a library of example programs shipped as `.bss` assembly;
//! * [`driver`] — the plumbing behind the `analytic-vm` command-line tool.
//!
//! Each major capability has a runnable example under `examples/`.

pub mod driver;
pub mod exact;
pub mod exec;
pub mod machine;
pub mod oracle;
pub mod stdlib;
pub mod transforms;

pub use exact::{ArithOp, DyadicInterval, Rational, RationalFunction};
