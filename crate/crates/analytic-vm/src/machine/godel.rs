//! Gödel coding: a bijection between valid programs and a set of natural
//! numbers, so whole machines can travel through registers, constant
//! tables, and oracle queries.
//!
//! A program serializes to a self-delimiting byte string
//!
//! ```text
//! varint(|name|) name  varint(#instr) varint(#const)  instr*  const*  0x01
//! ```
//!
//! read as a natural number in base 256 (least-significant byte first) and
//! offset by 1, so 0 is never a code. Varints are base-128 with a
//! continuation bit and must be canonical; signed quantities carry an
//! explicit sign byte. The trailing `0x01` keeps the most significant byte
//! nonzero, which makes the numeric interpretation lossless.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{DimSpec, Instruction, Program, QuerySource};
use crate::exact::Rational;

// Opcode bytes, shared with the in-assembly decoder of the universal
// simulator; renumbering breaks every shipped simulator program.
pub(crate) mod opcode {
    pub const ADD: u8 = 1;
    pub const SUB: u8 = 2;
    pub const MUL: u8 = 3;
    pub const DIV: u8 = 4;
    pub const SETC: u8 = 5;
    pub const MOVR: u8 = 6;
    pub const MOVI_IMM: u8 = 7;
    pub const MOVI_REG: u8 = 8;
    pub const INCI: u8 = 9;
    pub const DECI: u8 = 10;
    pub const LOADI: u8 = 11;
    pub const STOREI: u8 = 12;
    pub const JEQ: u8 = 13;
    pub const JLT: u8 = 14;
    pub const JMP: u8 = 15;
    pub const OUT_IMM: u8 = 16;
    pub const OUT_REG: u8 = 17;
    pub const HALT: u8 = 18;
    pub const QRY_CONST: u8 = 19;
    pub const QRY_REG: u8 = 20;
}

/// A program's code: a positive natural number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoedelCode(BigUint);

impl GoedelCode {
    pub fn from_natural(n: BigUint) -> Self {
        GoedelCode(n)
    }

    pub fn as_natural(&self) -> &BigUint {
        &self.0
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_natural(self.0.clone())
    }
}

/// Codes print as lowercase hex.
impl fmt::Display for GoedelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl FromStr for GoedelCode {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BigUint::parse_bytes(s.trim().as_bytes(), 16)
            .map(GoedelCode)
            .ok_or(DecodeError::BadHex)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    /// 0 is reserved and never a code.
    Reserved,
    BadHex,
    UnexpectedEnd,
    NonCanonicalVarint,
    ValueTooLarge,
    BadSignByte(u8),
    BadOpcode(u8),
    MissingTerminator,
    TrailingBytes,
    BadName,
    ZeroDenominator,
    Invalid(String),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Reserved => write!(f, "0 is not a program code"),
            DecodeError::BadHex => write!(f, "not a hexadecimal number"),
            DecodeError::UnexpectedEnd => write!(f, "code ends inside a field"),
            DecodeError::NonCanonicalVarint => write!(f, "non-canonical varint"),
            DecodeError::ValueTooLarge => write!(f, "field value out of range"),
            DecodeError::BadSignByte(b) => write!(f, "bad sign byte {b}"),
            DecodeError::BadOpcode(b) => write!(f, "bad opcode byte {b}"),
            DecodeError::MissingTerminator => write!(f, "missing terminator byte"),
            DecodeError::TrailingBytes => write!(f, "trailing bytes after terminator"),
            DecodeError::BadName => write!(f, "program name is not valid"),
            DecodeError::ZeroDenominator => write!(f, "constant with zero denominator"),
            DecodeError::Invalid(msg) => write!(f, "invalid program: {msg}"),
        }
    }
}

impl std::error::Error for DecodeError {}

fn push_varint_u64(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let chunk = (v & 0x7f) as u8;
        v >>= 7;
        if v > 0 {
            out.push(chunk | 0x80);
        } else {
            out.push(chunk);
            break;
        }
    }
}

fn push_varint_big(out: &mut Vec<u8>, v: &BigUint) {
    let mut v = v.clone();
    let mask = BigUint::from(0x7fu8);
    loop {
        let chunk = (&v & &mask).to_u8().expect("7-bit chunk");
        v >>= 7u32;
        if v.is_zero() {
            out.push(chunk);
            break;
        }
        out.push(chunk | 0x80);
    }
}

fn push_signed_big(out: &mut Vec<u8>, negative: bool, magnitude: &BigUint) {
    out.push(negative as u8);
    push_varint_big(out, magnitude);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn byte(&mut self) -> Result<u8, DecodeError> {
        let b = *self.bytes.get(self.pos).ok_or(DecodeError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(b)
    }

    fn varint_big(&mut self) -> Result<BigUint, DecodeError> {
        let mut acc = BigUint::zero();
        let mut shift = 0u32;
        let mut chunks = 0usize;
        loop {
            let b = self.byte()?;
            let chunk = b & 0x7f;
            acc |= BigUint::from(chunk) << shift;
            shift += 7;
            chunks += 1;
            if b & 0x80 == 0 {
                if chunk == 0 && chunks > 1 {
                    return Err(DecodeError::NonCanonicalVarint);
                }
                return Ok(acc);
            }
        }
    }

    fn varint_u64(&mut self) -> Result<u64, DecodeError> {
        self.varint_big()?.to_u64().ok_or(DecodeError::ValueTooLarge)
    }

    fn varint_u32(&mut self) -> Result<u32, DecodeError> {
        u32::try_from(self.varint_u64()?).map_err(|_| DecodeError::ValueTooLarge)
    }

    fn sign(&mut self) -> Result<bool, DecodeError> {
        match self.byte()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(DecodeError::BadSignByte(b)),
        }
    }
}

fn instruction_bytes(out: &mut Vec<u8>, ins: &Instruction) {
    use opcode::*;
    match *ins {
        Instruction::Add { dst, src } => {
            out.push(ADD);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::Sub { dst, src } => {
            out.push(SUB);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::Mul { dst, src } => {
            out.push(MUL);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::Div { dst, src } => {
            out.push(DIV);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::SetConst { dst, slot } => {
            out.push(SETC);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, slot as u64);
        }
        Instruction::CopyReal { dst, src } => {
            out.push(MOVR);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::SetIndex { dst, value } => {
            out.push(MOVI_IMM);
            push_varint_u64(out, dst as u64);
            out.push((value < 0) as u8);
            push_varint_u64(out, value.unsigned_abs());
        }
        Instruction::CopyIndex { dst, src } => {
            out.push(MOVI_REG);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, src as u64);
        }
        Instruction::IncIndex { reg } => {
            out.push(INCI);
            push_varint_u64(out, reg as u64);
        }
        Instruction::DecIndex { reg } => {
            out.push(DECI);
            push_varint_u64(out, reg as u64);
        }
        Instruction::LoadIndirect { dst, addr } => {
            out.push(LOADI);
            push_varint_u64(out, dst as u64);
            push_varint_u64(out, addr as u64);
        }
        Instruction::StoreIndirect { src, addr } => {
            out.push(STOREI);
            push_varint_u64(out, src as u64);
            push_varint_u64(out, addr as u64);
        }
        Instruction::JumpEq { lhs, rhs, target } => {
            out.push(JEQ);
            push_varint_u64(out, lhs as u64);
            push_varint_u64(out, rhs as u64);
            push_varint_u64(out, target as u64);
        }
        Instruction::JumpLt { lhs, rhs, target } => {
            out.push(JLT);
            push_varint_u64(out, lhs as u64);
            push_varint_u64(out, rhs as u64);
            push_varint_u64(out, target as u64);
        }
        Instruction::Jump { target } => {
            out.push(JMP);
            push_varint_u64(out, target as u64);
        }
        Instruction::Output(DimSpec::Fixed(n)) => {
            out.push(OUT_IMM);
            push_varint_u64(out, n);
        }
        Instruction::Output(DimSpec::FromIndex(i)) => {
            out.push(OUT_REG);
            push_varint_u64(out, i as u64);
        }
        Instruction::Halt => out.push(HALT),
        Instruction::Query { code, base, len } => {
            match code {
                QuerySource::ConstSlot(s) => {
                    out.push(QRY_CONST);
                    push_varint_u64(out, s as u64);
                }
                QuerySource::Register(r) => {
                    out.push(QRY_REG);
                    push_varint_u64(out, r as u64);
                }
            }
            push_varint_u64(out, base as u64);
            push_varint_u64(out, len as u64);
        }
    }
}

pub(crate) fn program_bytes(p: &Program) -> Vec<u8> {
    let mut out = Vec::new();
    push_varint_u64(&mut out, p.name().len() as u64);
    out.extend_from_slice(p.name().as_bytes());
    push_varint_u64(&mut out, p.instructions().len() as u64);
    push_varint_u64(&mut out, p.constants().len() as u64);
    for ins in p.instructions() {
        instruction_bytes(&mut out, ins);
    }
    for c in p.constants() {
        push_signed_big(&mut out, c.numer().sign() == num_bigint::Sign::Minus, c.numer().magnitude());
        push_varint_big(&mut out, c.denom().magnitude());
    }
    out.push(0x01);
    out
}

/// Encodes a program into its Gödel code.
pub fn encode_machine(p: &Program) -> GoedelCode {
    let bytes = program_bytes(p);
    GoedelCode(BigUint::from_bytes_le(&bytes) + BigUint::one())
}

/// Decodes a Gödel code, rejecting everything that is not the code of a
/// valid program.
pub fn decode_machine(g: &GoedelCode) -> Result<Program, DecodeError> {
    if g.0.is_zero() {
        return Err(DecodeError::Reserved);
    }
    let n = &g.0 - BigUint::one();
    let bytes = if n.is_zero() { Vec::new() } else { n.to_bytes_le() };
    let mut r = Reader { bytes: &bytes, pos: 0 };

    let name_len = r.varint_u64()? as usize;
    if r.pos + name_len > bytes.len() {
        return Err(DecodeError::UnexpectedEnd);
    }
    let name = std::str::from_utf8(&bytes[r.pos..r.pos + name_len])
        .map_err(|_| DecodeError::BadName)?
        .to_string();
    r.pos += name_len;

    let n_instr = r.varint_u64()? as usize;
    let n_const = r.varint_u64()? as usize;

    let mut instructions = Vec::with_capacity(n_instr.min(1 << 16));
    for _ in 0..n_instr {
        use opcode::*;
        let op = r.byte()?;
        let ins = match op {
            ADD => Instruction::Add { dst: r.varint_u32()?, src: r.varint_u32()? },
            SUB => Instruction::Sub { dst: r.varint_u32()?, src: r.varint_u32()? },
            MUL => Instruction::Mul { dst: r.varint_u32()?, src: r.varint_u32()? },
            DIV => Instruction::Div { dst: r.varint_u32()?, src: r.varint_u32()? },
            SETC => Instruction::SetConst { dst: r.varint_u32()?, slot: r.varint_u32()? },
            MOVR => Instruction::CopyReal { dst: r.varint_u32()?, src: r.varint_u32()? },
            MOVI_IMM => {
                let dst = r.varint_u32()?;
                let neg = r.sign()?;
                let mag = r.varint_u64()?;
                if neg && mag == 0 {
                    // Negative zero would give two codes for one program.
                    return Err(DecodeError::NonCanonicalVarint);
                }
                let value = if neg {
                    if mag > 1u64 << 63 {
                        return Err(DecodeError::ValueTooLarge);
                    }
                    (mag as i128).checked_neg().and_then(|v| i64::try_from(v).ok())
                } else {
                    i64::try_from(mag).ok()
                }
                .ok_or(DecodeError::ValueTooLarge)?;
                Instruction::SetIndex { dst, value }
            }
            MOVI_REG => Instruction::CopyIndex { dst: r.varint_u32()?, src: r.varint_u32()? },
            INCI => Instruction::IncIndex { reg: r.varint_u32()? },
            DECI => Instruction::DecIndex { reg: r.varint_u32()? },
            LOADI => Instruction::LoadIndirect { dst: r.varint_u32()?, addr: r.varint_u32()? },
            STOREI => Instruction::StoreIndirect { src: r.varint_u32()?, addr: r.varint_u32()? },
            JEQ => Instruction::JumpEq {
                lhs: r.varint_u32()?,
                rhs: r.varint_u32()?,
                target: r.varint_u32()?,
            },
            JLT => Instruction::JumpLt {
                lhs: r.varint_u32()?,
                rhs: r.varint_u32()?,
                target: r.varint_u32()?,
            },
            JMP => Instruction::Jump { target: r.varint_u32()? },
            OUT_IMM => Instruction::Output(DimSpec::Fixed(r.varint_u64()?)),
            OUT_REG => Instruction::Output(DimSpec::FromIndex(r.varint_u32()?)),
            HALT => Instruction::Halt,
            QRY_CONST => Instruction::Query {
                code: QuerySource::ConstSlot(r.varint_u32()?),
                base: r.varint_u32()?,
                len: r.varint_u32()?,
            },
            QRY_REG => Instruction::Query {
                code: QuerySource::Register(r.varint_u32()?),
                base: r.varint_u32()?,
                len: r.varint_u32()?,
            },
            other => return Err(DecodeError::BadOpcode(other)),
        };
        instructions.push(ins);
    }

    let mut constants = Vec::with_capacity(n_const.min(1 << 16));
    for _ in 0..n_const {
        let neg = r.sign()?;
        let numer = r.varint_big()?;
        let denom = r.varint_big()?;
        if denom.is_zero() {
            return Err(DecodeError::ZeroDenominator);
        }
        if neg && numer.is_zero() {
            return Err(DecodeError::NonCanonicalVarint);
        }
        let mut num = num_bigint::BigInt::from(numer.clone());
        if neg {
            num = -num;
        }
        let value = Rational::new(num, num_bigint::BigInt::from(denom.clone()))
            .map_err(|_| DecodeError::ZeroDenominator)?;
        // Constants serialize reduced; an unreduced fraction would give a
        // second code for the same program.
        if value.numer().magnitude() != &numer || value.denom().magnitude() != &denom {
            return Err(DecodeError::NonCanonicalVarint);
        }
        constants.push(value);
    }

    if r.byte()? != 0x01 {
        return Err(DecodeError::MissingTerminator);
    }
    if r.pos != bytes.len() {
        return Err(DecodeError::TrailingBytes);
    }

    Program::new(name, instructions, constants).map_err(|e| DecodeError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_program;

    #[test]
    fn roundtrip_trivial_program() {
        let p = parse_program("main:\n  OUT 1\n  HALT").unwrap();
        let code = encode_machine(&p);
        let q = decode_machine(&code).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn zero_is_reserved() {
        let err = decode_machine(&GoedelCode::from_natural(BigUint::zero())).unwrap_err();
        assert_eq!(err, DecodeError::Reserved);
    }

    #[test]
    fn small_numbers_are_not_codes() {
        for n in 1u32..50 {
            assert!(decode_machine(&GoedelCode::from_natural(BigUint::from(n))).is_err());
        }
    }

    #[test]
    fn roundtrip_with_all_instruction_forms() {
        let src = "\
.const c0 = -355/113
.const c1 = 0/1
prog:
  SETC r1 c0
  MOVR r2 r1
  MOVI i1 -9
  MOVI i2 i1
  INCI i2
  DECI i1
  LOADI r3 i2
  STOREI r3 i1
loop:
  ADD r0 r1
  SUB r0 r2
  MUL r1 r2
  DIV r2 r1
  JEQ r0 r1 loop
  JLT r1 r0 end
  JMP loop
  OUT 2
  OUT i1
  QRY c1 r0 i1
  QRY r3 r0 i2
end:
  HALT
";
        let p = parse_program(src).unwrap();
        let q = decode_machine(&encode_machine(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn hex_display_roundtrip() {
        let p = parse_program("main:\n  HALT").unwrap();
        let code = encode_machine(&p);
        let parsed: GoedelCode = code.to_string().parse().unwrap();
        assert_eq!(code, parsed);
    }
}
