//! Path traces: the ordered record of branch decisions a run took, with the
//! exact values (numeric mode) or rational functions (symbolic mode) that
//! each test examined. Replaying the decisions on the same input reproduces
//! the same configuration sequence, which is how determinism is probed.

use crate::exact::{Rational, RationalFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Eq,
    Lt,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Eq => "JEQ",
            TestKind::Lt => "JLT",
        }
    }
}

/// What a branch actually compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceTest {
    /// Numeric mode: both operand values.
    Numeric { lhs: Rational, rhs: Rational },
    /// Symbolic mode: the tested function `lhs - rhs`, kept as a function of
    /// the input variables and symbolic constants.
    Symbolic { diff: RationalFunction },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchRecord {
    /// Instruction index of the test.
    pub pc: u32,
    pub kind: TestKind,
    pub taken: bool,
    pub test: TraceTest,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathTrace {
    pub branches: Vec<BranchRecord>,
}

impl PathTrace {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// The decision bits alone, in order.
    pub fn decisions(&self) -> Vec<bool> {
        self.branches.iter().map(|b| b.taken).collect()
    }
}
