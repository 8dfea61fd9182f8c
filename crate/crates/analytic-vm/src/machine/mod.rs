//! Program representation: the instruction set, static validation, the
//! line-oriented assembly format, Gödel coding, and a builder for
//! generating programs from Rust.
//!
//! Registers come in two families: real registers `r<k>` holding exact
//! rationals, and integer index registers `i<k>` used for indirect
//! addressing, output dimensions, and query lengths. Tests (`JEQ`, `JLT`)
//! compare real registers only.

mod asm;
pub(crate) mod godel;
mod parse;

pub use asm::{Asm, Cond, Target};
pub use godel::{decode_machine, encode_machine, DecodeError, GoedelCode};
pub use parse::{parse_program, print_program, ParseError};

use std::fmt;

use crate::exact::Rational;

/// Where an output vector's dimension comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimSpec {
    /// A fixed dimension written in the instruction.
    Fixed(u64),
    /// Read from an index register when the instruction executes.
    FromIndex(u32),
}

/// Where a query instruction finds the machine code to ask about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuerySource {
    /// A constant-table slot holding the code as a natural number.
    ConstSlot(u32),
    /// A real register holding the code as a natural number.
    Register(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    /// `ADD r<dst> r<src>`: `r[dst] += r[src]`; likewise SUB/MUL/DIV.
    Add { dst: u32, src: u32 },
    Sub { dst: u32, src: u32 },
    Mul { dst: u32, src: u32 },
    Div { dst: u32, src: u32 },
    /// `SETC r<dst> c<slot>`: load a program constant.
    SetConst { dst: u32, slot: u32 },
    /// `MOVR r<dst> r<src>`: copy a real register.
    CopyReal { dst: u32, src: u32 },
    /// `MOVI i<dst> <imm>`: set an index register to a literal integer.
    SetIndex { dst: u32, value: i64 },
    /// `MOVI i<dst> i<src>`: copy an index register.
    CopyIndex { dst: u32, src: u32 },
    /// `INCI i<reg>` / `DECI i<reg>`: adjust an index register by one.
    IncIndex { reg: u32 },
    DecIndex { reg: u32 },
    /// `LOADI r<dst> i<addr>`: `r[dst] = R[i[addr]]` (indirect read).
    LoadIndirect { dst: u32, addr: u32 },
    /// `STOREI r<src> i<addr>`: `R[i[addr]] = r[src]` (indirect write).
    StoreIndirect { src: u32, addr: u32 },
    /// `JEQ r<lhs> r<rhs> <target>`: jump on exact equality.
    JumpEq { lhs: u32, rhs: u32, target: u32 },
    /// `JLT r<lhs> r<rhs> <target>`: jump on exact `lhs < rhs`.
    JumpLt { lhs: u32, rhs: u32, target: u32 },
    Jump { target: u32 },
    /// `OUT <n>` or `OUT i<k>`: emit `(r0, .., r(n-1))` as one output vector.
    Output(DimSpec),
    Halt,
    /// `QRY <code> r<base> i<len>`: ask the oracle whether the machine coded
    /// by `<code>` halts on input `(r[base], .., r[base+len-1])`; the answer
    /// is written to `r0` as `0` or `1`.
    Query { code: QuerySource, base: u32, len: u32 },
}

impl Instruction {
    /// Jump target, for instructions that have one.
    pub fn target(&self) -> Option<u32> {
        match *self {
            Instruction::JumpEq { target, .. }
            | Instruction::JumpLt { target, .. }
            | Instruction::Jump { target } => Some(target),
            _ => None,
        }
    }

    pub fn opcode_name(&self) -> &'static str {
        match self {
            Instruction::Add { .. } => "ADD",
            Instruction::Sub { .. } => "SUB",
            Instruction::Mul { .. } => "MUL",
            Instruction::Div { .. } => "DIV",
            Instruction::SetConst { .. } => "SETC",
            Instruction::CopyReal { .. } => "MOVR",
            Instruction::SetIndex { .. } | Instruction::CopyIndex { .. } => "MOVI",
            Instruction::IncIndex { .. } => "INCI",
            Instruction::DecIndex { .. } => "DECI",
            Instruction::LoadIndirect { .. } => "LOADI",
            Instruction::StoreIndirect { .. } => "STOREI",
            Instruction::JumpEq { .. } => "JEQ",
            Instruction::JumpLt { .. } => "JLT",
            Instruction::Jump { .. } => "JMP",
            Instruction::Output(_) => "OUT",
            Instruction::Halt => "HALT",
            Instruction::Query { .. } => "QRY",
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::Add { dst, src } => write!(f, "ADD r{dst} r{src}"),
            Instruction::Sub { dst, src } => write!(f, "SUB r{dst} r{src}"),
            Instruction::Mul { dst, src } => write!(f, "MUL r{dst} r{src}"),
            Instruction::Div { dst, src } => write!(f, "DIV r{dst} r{src}"),
            Instruction::SetConst { dst, slot } => write!(f, "SETC r{dst} c{slot}"),
            Instruction::CopyReal { dst, src } => write!(f, "MOVR r{dst} r{src}"),
            Instruction::SetIndex { dst, value } => write!(f, "MOVI i{dst} {value}"),
            Instruction::CopyIndex { dst, src } => write!(f, "MOVI i{dst} i{src}"),
            Instruction::IncIndex { reg } => write!(f, "INCI i{reg}"),
            Instruction::DecIndex { reg } => write!(f, "DECI i{reg}"),
            Instruction::LoadIndirect { dst, addr } => write!(f, "LOADI r{dst} i{addr}"),
            Instruction::StoreIndirect { src, addr } => write!(f, "STOREI r{src} i{addr}"),
            Instruction::JumpEq { lhs, rhs, target } => write!(f, "JEQ r{lhs} r{rhs} {target}"),
            Instruction::JumpLt { lhs, rhs, target } => write!(f, "JLT r{lhs} r{rhs} {target}"),
            Instruction::Jump { target } => write!(f, "JMP {target}"),
            Instruction::Output(DimSpec::Fixed(n)) => write!(f, "OUT {n}"),
            Instruction::Output(DimSpec::FromIndex(i)) => write!(f, "OUT i{i}"),
            Instruction::Halt => write!(f, "HALT"),
            Instruction::Query { code, base, len } => {
                match code {
                    QuerySource::ConstSlot(s) => write!(f, "QRY c{s} r{base} i{len}"),
                    QuerySource::Register(r) => write!(f, "QRY r{r} r{base} i{len}"),
                }
            }
        }
    }
}

/// A validated program: a nonempty instruction list plus a table of rational
/// constants. Immutable after construction and safe to share between
/// concurrent executions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    name: String,
    instructions: Vec<Instruction>,
    constants: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramError {
    Empty,
    BadName(String),
    TargetOutOfRange { at: usize, target: u32 },
    ConstOutOfRange { at: usize, slot: u32 },
}

impl fmt::Display for ProgramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramError::Empty => write!(f, "program has no instructions"),
            ProgramError::BadName(n) => write!(f, "invalid program name `{n}`"),
            ProgramError::TargetOutOfRange { at, target } => {
                write!(f, "instruction {at}: jump target {target} out of range")
            }
            ProgramError::ConstOutOfRange { at, slot } => {
                write!(f, "instruction {at}: constant c{slot} not declared")
            }
        }
    }
}

impl std::error::Error for ProgramError {}

pub(crate) fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Program {
    pub fn new(
        name: impl Into<String>,
        instructions: Vec<Instruction>,
        constants: Vec<Rational>,
    ) -> Result<Self, ProgramError> {
        let name = name.into();
        if !is_valid_name(&name) {
            return Err(ProgramError::BadName(name));
        }
        if instructions.is_empty() {
            return Err(ProgramError::Empty);
        }
        let len = instructions.len() as u32;
        for (at, ins) in instructions.iter().enumerate() {
            if let Some(t) = ins.target() {
                if t >= len {
                    return Err(ProgramError::TargetOutOfRange { at, target: t });
                }
            }
            let slot = match *ins {
                Instruction::SetConst { slot, .. } => Some(slot),
                Instruction::Query { code: QuerySource::ConstSlot(s), .. } => Some(s),
                _ => None,
            };
            if let Some(s) = slot {
                if s as usize >= constants.len() {
                    return Err(ProgramError::ConstOutOfRange { at, slot: s });
                }
            }
        }
        Ok(Program { name, instructions, constants })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn constants(&self) -> &[Rational] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Canonical assembly text; `parse_program` inverts this exactly.
    pub fn to_text(&self) -> String {
        print_program(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_targets() {
        let err = Program::new(
            "main",
            vec![Instruction::Jump { target: 99 }],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, ProgramError::TargetOutOfRange { at: 0, target: 99 });
    }

    #[test]
    fn validation_rejects_missing_constants() {
        let err = Program::new(
            "main",
            vec![Instruction::SetConst { dst: 0, slot: 2 }, Instruction::Halt],
            vec![Rational::one()],
        )
        .unwrap_err();
        assert_eq!(err, ProgramError::ConstOutOfRange { at: 0, slot: 2 });
    }

    #[test]
    fn validation_rejects_empty_and_bad_names() {
        assert_eq!(Program::new("main", vec![], vec![]).unwrap_err(), ProgramError::Empty);
        assert!(matches!(
            Program::new("7up", vec![Instruction::Halt], vec![]),
            Err(ProgramError::BadName(_))
        ));
    }
}
