//! The line-oriented assembly format.
//!
//! ```text
//! # comment
//! .const c0 = 3/4          constants, in order, before any instruction
//! main:                    a label; the first label names the program
//!   SETC r1 c0
//! loop:
//!   ADD r0 r1
//!   JLT r0 r1 loop         jump targets are labels or instruction indices
//!   OUT 1
//!   HALT
//! ```
//!
//! Files are UTF-8 with extension `.bss`. `print_program` emits a canonical
//! form that `parse_program` maps back to the identical [`Program`].

use std::collections::HashMap;
use std::fmt;

use super::{is_valid_name, DimSpec, Instruction, Program, ProgramError, QuerySource};
use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Malformed token or line; positions are 1-based.
    Syntax { line: usize, col: usize, msg: String },
    /// Structurally fine but referentially invalid (bad register, target, or
    /// constant reference).
    Validation { line: Option<usize>, msg: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, col, msg } => {
                write!(f, "syntax error at line {line}, column {col}: {msg}")
            }
            ParseError::Validation { line: Some(line), msg } => {
                write!(f, "validation error at line {line}: {msg}")
            }
            ParseError::Validation { line: None, msg } => write!(f, "validation error: {msg}"),
        }
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    fn validation(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Validation { line: Some(line), msg: msg.into() }
    }
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token { text: &body[s..i], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &body[s..], col: s + 1 });
    }
    tokens
}

/// Pending instruction: targets may still be symbolic.
enum PendingTarget {
    Abs(u32),
    Label(String, usize, usize), // name, line, col
}

enum Pending {
    Ready(Instruction),
    JumpEq { lhs: u32, rhs: u32, target: PendingTarget },
    JumpLt { lhs: u32, rhs: u32, target: PendingTarget },
    Jump { target: PendingTarget },
}

fn parse_reg(tok: &Token<'_>, family: char, line: usize) -> Result<u32, ParseError> {
    let text = tok.text;
    if let Some(rest) = text.strip_prefix(family) {
        if let Ok(n) = rest.parse::<u32>() {
            return Ok(n);
        }
    }
    Err(ParseError::syntax(
        line,
        tok.col,
        format!("expected {family}-register, found `{text}`"),
    ))
}

fn parse_imm(tok: &Token<'_>, line: usize) -> Result<i64, ParseError> {
    tok.text.parse::<i64>().map_err(|_| {
        ParseError::syntax(line, tok.col, format!("expected integer, found `{}`", tok.text))
    })
}

fn parse_target(tok: &Token<'_>, line: usize) -> Result<PendingTarget, ParseError> {
    if let Ok(n) = tok.text.parse::<u32>() {
        return Ok(PendingTarget::Abs(n));
    }
    if is_valid_name(tok.text) {
        return Ok(PendingTarget::Label(tok.text.to_string(), line, tok.col));
    }
    Err(ParseError::syntax(
        line,
        tok.col,
        format!("expected label or instruction index, found `{}`", tok.text),
    ))
}

fn expect_arity(tokens: &[Token<'_>], n: usize, line: usize) -> Result<(), ParseError> {
    if tokens.len() - 1 != n {
        return Err(ParseError::syntax(
            line,
            tokens[0].col,
            format!(
                "{} takes {} operand{}, found {}",
                tokens[0].text,
                n,
                if n == 1 { "" } else { "s" },
                tokens.len() - 1
            ),
        ));
    }
    Ok(())
}

/// Parses assembly text into a validated [`Program`].
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut constants: Vec<Rational> = Vec::new();
    let mut pending: Vec<(Pending, usize)> = Vec::new();
    let mut labels: HashMap<String, u32> = HashMap::new();
    let mut name: Option<String> = None;
    let mut saw_instruction = false;

    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let head = &tokens[0];

        if head.text == ".const" {
            if saw_instruction {
                return Err(ParseError::syntax(
                    line,
                    head.col,
                    "constant declarations must precede instructions",
                ));
            }
            // .const c<k> = <rational>
            if tokens.len() != 4 || tokens[2].text != "=" {
                return Err(ParseError::syntax(
                    line,
                    head.col,
                    "expected `.const c<k> = <p/q>`",
                ));
            }
            let slot = parse_reg(&tokens[1], 'c', line)?;
            if slot as usize != constants.len() {
                return Err(ParseError::validation(
                    line,
                    format!("constant c{slot} declared out of order (expected c{})", constants.len()),
                ));
            }
            let value: Rational = tokens[3].text.parse().map_err(|e| {
                ParseError::syntax(line, tokens[3].col, format!("bad rational: {e}"))
            })?;
            constants.push(value);
            continue;
        }

        if let Some(label) = head.text.strip_suffix(':') {
            if tokens.len() != 1 {
                return Err(ParseError::syntax(
                    line,
                    tokens[1].col,
                    "label lines hold nothing but the label",
                ));
            }
            if !is_valid_name(label) {
                return Err(ParseError::syntax(line, head.col, format!("invalid label `{label}`")));
            }
            let at = pending.len() as u32;
            if labels.insert(label.to_string(), at).is_some() {
                return Err(ParseError::validation(line, format!("duplicate label `{label}`")));
            }
            if name.is_none() {
                name = Some(label.to_string());
            }
            continue;
        }

        saw_instruction = true;
        let ins = match head.text {
            "ADD" | "SUB" | "MUL" | "DIV" | "MOVR" => {
                expect_arity(&tokens, 2, line)?;
                let dst = parse_reg(&tokens[1], 'r', line)?;
                let src = parse_reg(&tokens[2], 'r', line)?;
                Pending::Ready(match head.text {
                    "ADD" => Instruction::Add { dst, src },
                    "SUB" => Instruction::Sub { dst, src },
                    "MUL" => Instruction::Mul { dst, src },
                    "DIV" => Instruction::Div { dst, src },
                    _ => Instruction::CopyReal { dst, src },
                })
            }
            "SETC" => {
                expect_arity(&tokens, 2, line)?;
                let dst = parse_reg(&tokens[1], 'r', line)?;
                let slot = parse_reg(&tokens[2], 'c', line)?;
                Pending::Ready(Instruction::SetConst { dst, slot })
            }
            "MOVI" => {
                expect_arity(&tokens, 2, line)?;
                let dst = parse_reg(&tokens[1], 'i', line)?;
                if tokens[2].text.starts_with('i') {
                    let src = parse_reg(&tokens[2], 'i', line)?;
                    Pending::Ready(Instruction::CopyIndex { dst, src })
                } else {
                    let value = parse_imm(&tokens[2], line)?;
                    Pending::Ready(Instruction::SetIndex { dst, value })
                }
            }
            "INCI" | "DECI" => {
                expect_arity(&tokens, 1, line)?;
                let reg = parse_reg(&tokens[1], 'i', line)?;
                Pending::Ready(if head.text == "INCI" {
                    Instruction::IncIndex { reg }
                } else {
                    Instruction::DecIndex { reg }
                })
            }
            "LOADI" => {
                expect_arity(&tokens, 2, line)?;
                let dst = parse_reg(&tokens[1], 'r', line)?;
                let addr = parse_reg(&tokens[2], 'i', line)?;
                Pending::Ready(Instruction::LoadIndirect { dst, addr })
            }
            "STOREI" => {
                expect_arity(&tokens, 2, line)?;
                let src = parse_reg(&tokens[1], 'r', line)?;
                let addr = parse_reg(&tokens[2], 'i', line)?;
                Pending::Ready(Instruction::StoreIndirect { src, addr })
            }
            "JEQ" | "JLT" => {
                expect_arity(&tokens, 3, line)?;
                let lhs = parse_reg(&tokens[1], 'r', line)?;
                let rhs = parse_reg(&tokens[2], 'r', line)?;
                let target = parse_target(&tokens[3], line)?;
                if head.text == "JEQ" {
                    Pending::JumpEq { lhs, rhs, target }
                } else {
                    Pending::JumpLt { lhs, rhs, target }
                }
            }
            "JMP" => {
                expect_arity(&tokens, 1, line)?;
                Pending::Jump { target: parse_target(&tokens[1], line)? }
            }
            "OUT" => {
                expect_arity(&tokens, 1, line)?;
                if tokens[1].text.starts_with('i') {
                    let reg = parse_reg(&tokens[1], 'i', line)?;
                    Pending::Ready(Instruction::Output(DimSpec::FromIndex(reg)))
                } else {
                    let n = tokens[1].text.parse::<u64>().map_err(|_| {
                        ParseError::syntax(
                            line,
                            tokens[1].col,
                            format!("expected dimension or i-register, found `{}`", tokens[1].text),
                        )
                    })?;
                    Pending::Ready(Instruction::Output(DimSpec::Fixed(n)))
                }
            }
            "HALT" => {
                expect_arity(&tokens, 0, line)?;
                Pending::Ready(Instruction::Halt)
            }
            "QRY" => {
                expect_arity(&tokens, 3, line)?;
                let code = if tokens[1].text.starts_with('c') {
                    QuerySource::ConstSlot(parse_reg(&tokens[1], 'c', line)?)
                } else {
                    QuerySource::Register(parse_reg(&tokens[1], 'r', line)?)
                };
                let base = parse_reg(&tokens[2], 'r', line)?;
                let len = parse_reg(&tokens[3], 'i', line)?;
                Pending::Ready(Instruction::Query { code, base, len })
            }
            other => {
                return Err(ParseError::syntax(line, head.col, format!("unknown opcode `{other}`")));
            }
        };
        pending.push((ins, line));
    }

    let resolve = |t: PendingTarget| -> Result<u32, ParseError> {
        match t {
            PendingTarget::Abs(n) => Ok(n),
            PendingTarget::Label(name, line, _col) => labels.get(&name).copied().ok_or_else(|| {
                ParseError::validation(line, format!("unknown label `{name}`"))
            }),
        }
    };

    let mut instructions = Vec::with_capacity(pending.len());
    let mut lines = Vec::with_capacity(pending.len());
    for (p, line) in pending {
        lines.push(line);
        instructions.push(match p {
            Pending::Ready(i) => i,
            Pending::JumpEq { lhs, rhs, target } => {
                Instruction::JumpEq { lhs, rhs, target: resolve(target)? }
            }
            Pending::JumpLt { lhs, rhs, target } => {
                Instruction::JumpLt { lhs, rhs, target: resolve(target)? }
            }
            Pending::Jump { target } => Instruction::Jump { target: resolve(target)? },
        });
    }

    // A program is named by the first label when it marks instruction 0.
    let name = match name {
        Some(n) if labels.get(&n) == Some(&0) => n,
        _ => "main".to_string(),
    };

    Program::new(name, instructions, constants).map_err(|e| match e {
        ProgramError::TargetOutOfRange { at, .. } | ProgramError::ConstOutOfRange { at, .. } => {
            ParseError::validation(lines.get(at).copied().unwrap_or(0), e.to_string())
        }
        other => ParseError::Validation { line: None, msg: other.to_string() },
    })
}

/// Canonical assembly text: constants first, the program name labelling
/// instruction 0, generated labels `L<k>` for the remaining jump targets.
pub fn print_program(p: &Program) -> String {
    use std::collections::BTreeSet;
    let mut targets: BTreeSet<u32> = BTreeSet::new();
    for ins in p.instructions() {
        if let Some(t) = ins.target() {
            targets.insert(t);
        }
    }
    let mut label_of: HashMap<u32, String> = HashMap::new();
    label_of.insert(0, p.name().to_string());
    let mut next = 1u32;
    for &t in &targets {
        if t == 0 {
            continue;
        }
        loop {
            let candidate = format!("L{next}");
            next += 1;
            if candidate != p.name() {
                label_of.insert(t, candidate);
                break;
            }
        }
    }

    let mut out = String::new();
    for (k, c) in p.constants().iter().enumerate() {
        out.push_str(&format!(".const c{k} = {c}\n"));
    }
    for (idx, ins) in p.instructions().iter().enumerate() {
        let idx = idx as u32;
        if idx == 0 || targets.contains(&idx) {
            out.push_str(&format!("{}:\n", label_of[&idx]));
        }
        let rendered = match *ins {
            Instruction::JumpEq { lhs, rhs, target } => {
                format!("JEQ r{lhs} r{rhs} {}", label_of[&target])
            }
            Instruction::JumpLt { lhs, rhs, target } => {
                format!("JLT r{lhs} r{rhs} {}", label_of[&target])
            }
            Instruction::Jump { target } => format!("JMP {}", label_of[&target]),
            ref other => other.to_string(),
        };
        out.push_str("  ");
        out.push_str(&rendered);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_program("main:\n  OUT 1\n  HALT").unwrap();
        assert_eq!(p.name(), "main");
        assert_eq!(p.len(), 2);
        assert!(p.constants().is_empty());
    }

    #[test]
    fn out_of_range_target_is_validation_error() {
        let err = parse_program("main:\n  JMP 99\n  HALT\n  HALT").unwrap_err();
        assert!(matches!(err, ParseError::Validation { .. }), "{err}");
    }

    #[test]
    fn unknown_opcode_is_syntax_error_with_position() {
        let err = parse_program("main:\n  FROB r1\n").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn constants_parse_and_must_be_ordered() {
        let src = ".const c0 = 1/2\n.const c1 = -3/4\nmain:\n  SETC r0 c1\n  HALT\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.constants()[1], "-3/4".parse().unwrap());
        let bad = ".const c1 = 1/2\nmain:\n  HALT\n";
        assert!(parse_program(bad).is_err());
    }

    #[test]
    fn const_after_instruction_rejected() {
        let src = "main:\n  HALT\n.const c0 = 1/2\n";
        assert!(matches!(parse_program(src), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn labels_and_absolute_targets_agree() {
        let with_label = "main:\n  MOVI i0 0\nloop:\n  INCI i0\n  JMP loop\n";
        let with_abs = "main:\n  MOVI i0 0\n  INCI i0\n  JMP 1\n";
        let a = parse_program(with_label).unwrap();
        let b = parse_program(with_abs).unwrap();
        assert_eq!(a.instructions(), b.instructions());
    }

    #[test]
    fn roundtrip_is_identity() {
        let src = ".const c0 = 22/7\nstart:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  JLT r0 r1 loop\n  JEQ r0 r1 start\n  OUT i0\n  QRY c0 r4 i2\n  HALT\n";
        let p = parse_program(src).unwrap();
        let text = print_program(&p);
        let q = parse_program(&text).unwrap();
        assert_eq!(p, q);
        // And the canonical form is a fixed point.
        assert_eq!(text, print_program(&q));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let src = "# leading comment\n\nmain:\n  OUT 1  # emit r0\n  HALT\n";
        assert_eq!(parse_program(src).unwrap().len(), 2);
    }
}
