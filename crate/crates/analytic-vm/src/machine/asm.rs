//! Programmatic program construction: label bookkeeping, constant-table
//! interning, and one emitter method per instruction form. The generated
//! library programs and every machine-to-machine transformer are built
//! through this type.

use std::collections::HashMap;

use super::{DimSpec, Instruction, Program, QuerySource};
use crate::exact::Rational;

/// A jump destination: either an absolute instruction index or a label that
/// resolves when the program is finished.
#[derive(Debug, Clone)]
pub enum Target {
    Abs(u32),
    Label(String),
}

impl From<u32> for Target {
    fn from(n: u32) -> Self {
        Target::Abs(n)
    }
}

impl From<&str> for Target {
    fn from(s: &str) -> Self {
        Target::Label(s.to_string())
    }
}

impl From<String> for Target {
    fn from(s: String) -> Self {
        Target::Label(s)
    }
}

impl From<&String> for Target {
    fn from(s: &String) -> Self {
        Target::Label(s.clone())
    }
}

enum Slot {
    Done(Instruction),
    Eq { lhs: u32, rhs: u32, t: Target },
    Lt { lhs: u32, rhs: u32, t: Target },
    Jmp { t: Target },
}

/// Comparison for the structured-control helpers, over real registers.
#[derive(Debug, Clone, Copy)]
pub enum Cond {
    Lt(u32, u32),
    Ge(u32, u32),
    Eq(u32, u32),
    Ne(u32, u32),
}

/// Builder state. Label or constant misuse is a bug in the generator, so
/// resolution failures panic rather than returning errors.
#[derive(Default)]
pub struct Asm {
    slots: Vec<Slot>,
    labels: HashMap<String, u32>,
    consts: Vec<Rational>,
    fresh: u32,
}

impl Asm {
    pub fn new() -> Self {
        Asm::default()
    }

    /// Current instruction index: where the next emitted instruction lands.
    pub fn here(&self) -> u32 {
        self.slots.len() as u32
    }

    /// Binds `name` to the next instruction.
    pub fn label(&mut self, name: &str) {
        let prev = self.labels.insert(name.to_string(), self.here());
        assert!(prev.is_none(), "duplicate label `{name}`");
    }

    /// A label name guaranteed unused; bind it later with [`Asm::label`].
    pub fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}_{}", self.fresh)
    }

    /// Interns a constant, reusing an existing slot for equal values.
    pub fn konst(&mut self, q: Rational) -> u32 {
        if let Some(pos) = self.consts.iter().position(|c| c == &q) {
            return pos as u32;
        }
        self.consts.push(q);
        (self.consts.len() - 1) as u32
    }

    pub fn add(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::Add { dst, src }));
    }

    pub fn sub(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::Sub { dst, src }));
    }

    pub fn mul(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::Mul { dst, src }));
    }

    pub fn div(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::Div { dst, src }));
    }

    pub fn setc(&mut self, dst: u32, slot: u32) {
        assert!((slot as usize) < self.consts.len(), "constant c{slot} not interned");
        self.slots.push(Slot::Done(Instruction::SetConst { dst, slot }));
    }

    /// Loads a constant value, interning it as needed.
    pub fn set_const_value(&mut self, dst: u32, q: Rational) {
        let slot = self.konst(q);
        self.setc(dst, slot);
    }

    pub fn movr(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::CopyReal { dst, src }));
    }

    pub fn movi(&mut self, dst: u32, value: i64) {
        self.slots.push(Slot::Done(Instruction::SetIndex { dst, value }));
    }

    pub fn movi_reg(&mut self, dst: u32, src: u32) {
        self.slots.push(Slot::Done(Instruction::CopyIndex { dst, src }));
    }

    pub fn inci(&mut self, reg: u32) {
        self.slots.push(Slot::Done(Instruction::IncIndex { reg }));
    }

    pub fn deci(&mut self, reg: u32) {
        self.slots.push(Slot::Done(Instruction::DecIndex { reg }));
    }

    pub fn loadi(&mut self, dst: u32, addr: u32) {
        self.slots.push(Slot::Done(Instruction::LoadIndirect { dst, addr }));
    }

    pub fn storei(&mut self, src: u32, addr: u32) {
        self.slots.push(Slot::Done(Instruction::StoreIndirect { src, addr }));
    }

    pub fn jeq(&mut self, lhs: u32, rhs: u32, t: impl Into<Target>) {
        self.slots.push(Slot::Eq { lhs, rhs, t: t.into() });
    }

    pub fn jlt(&mut self, lhs: u32, rhs: u32, t: impl Into<Target>) {
        self.slots.push(Slot::Lt { lhs, rhs, t: t.into() });
    }

    pub fn jmp(&mut self, t: impl Into<Target>) {
        self.slots.push(Slot::Jmp { t: t.into() });
    }

    pub fn out_imm(&mut self, dim: u64) {
        self.slots.push(Slot::Done(Instruction::Output(DimSpec::Fixed(dim))));
    }

    pub fn out_reg(&mut self, ireg: u32) {
        self.slots.push(Slot::Done(Instruction::Output(DimSpec::FromIndex(ireg))));
    }

    pub fn halt(&mut self) {
        self.slots.push(Slot::Done(Instruction::Halt));
    }

    pub fn qry_const(&mut self, slot: u32, base: u32, len: u32) {
        assert!((slot as usize) < self.consts.len(), "constant c{slot} not interned");
        self.slots.push(Slot::Done(Instruction::Query {
            code: QuerySource::ConstSlot(slot),
            base,
            len,
        }));
    }

    pub fn qry_reg(&mut self, reg: u32, base: u32, len: u32) {
        self.slots.push(Slot::Done(Instruction::Query {
            code: QuerySource::Register(reg),
            base,
            len,
        }));
    }

    /// Structured two-way branch on a register comparison.
    pub fn if_else(
        &mut self,
        cond: Cond,
        then: impl FnOnce(&mut Self),
        els: impl FnOnce(&mut Self),
    ) {
        let taken = self.fresh("br");
        let join = self.fresh("brj");
        // JLT/JEQ are the machine's only tests; >= and != put the taken
        // branch on the fallthrough side.
        let swapped = match cond {
            Cond::Lt(x, y) => {
                self.jlt(x, y, taken.as_str());
                false
            }
            Cond::Eq(x, y) => {
                self.jeq(x, y, taken.as_str());
                false
            }
            Cond::Ge(x, y) => {
                self.jlt(x, y, taken.as_str());
                true
            }
            Cond::Ne(x, y) => {
                self.jeq(x, y, taken.as_str());
                true
            }
        };
        if swapped {
            then(self);
            self.jmp(join.as_str());
            self.label(&taken);
            els(self);
        } else {
            els(self);
            self.jmp(join.as_str());
            self.label(&taken);
            then(self);
        }
        self.label(&join);
    }

    pub fn if_then(&mut self, cond: Cond, then: impl FnOnce(&mut Self)) {
        self.if_else(cond, then, |_| {});
    }

    /// `while cond { body }`.
    pub fn while_do(&mut self, cond: Cond, body: impl FnOnce(&mut Self)) {
        let top = self.fresh("wh");
        let done = self.fresh("whd");
        self.label(&top);
        match cond {
            Cond::Lt(x, y) => {
                let b = self.fresh("whb");
                self.jlt(x, y, b.as_str());
                self.jmp(done.as_str());
                self.label(&b);
            }
            Cond::Eq(x, y) => {
                let b = self.fresh("whb");
                self.jeq(x, y, b.as_str());
                self.jmp(done.as_str());
                self.label(&b);
            }
            Cond::Ge(x, y) => {
                self.jlt(x, y, done.as_str());
            }
            Cond::Ne(x, y) => {
                self.jeq(x, y, done.as_str());
            }
        }
        body(self);
        self.jmp(top.as_str());
        self.label(&done);
    }

    /// An endless loop; the body receives the top label for explicit
    /// continues (exits jump to labels of their own).
    pub fn forever(&mut self, body: impl FnOnce(&mut Self, &str)) {
        let top = self.fresh("fv");
        self.label(&top);
        body(self, &top);
        self.jmp(top.as_str());
    }

    /// Resolves labels and validates; panics on generator bugs (unknown
    /// labels, invalid references).
    pub fn finish(self, name: &str) -> Program {
        let resolve = |t: &Target| -> u32 {
            match t {
                Target::Abs(n) => *n,
                Target::Label(l) => *self
                    .labels
                    .get(l)
                    .unwrap_or_else(|| panic!("unresolved label `{l}`")),
            }
        };
        let instructions = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Done(i) => *i,
                Slot::Eq { lhs, rhs, t } => Instruction::JumpEq {
                    lhs: *lhs,
                    rhs: *rhs,
                    target: resolve(t),
                },
                Slot::Lt { lhs, rhs, t } => Instruction::JumpLt {
                    lhs: *lhs,
                    rhs: *rhs,
                    target: resolve(t),
                },
                Slot::Jmp { t } => Instruction::Jump { target: resolve(t) },
            })
            .collect();
        Program::new(name, instructions, self.consts)
            .unwrap_or_else(|e| panic!("generated program invalid: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_program;

    #[test]
    fn builder_matches_parsed_text() {
        let mut a = Asm::new();
        let half = a.konst("1/2".parse().unwrap());
        a.setc(1, half);
        a.label("loop");
        a.add(0, 1);
        a.jlt(0, 1, "loop");
        a.out_imm(1);
        a.halt();
        let built = a.finish("demo");

        let parsed = parse_program(
            ".const c0 = 1/2\ndemo:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  JLT r0 r1 loop\n  OUT 1\n  HALT\n",
        )
        .unwrap();
        assert_eq!(built, parsed);
    }

    #[test]
    fn constants_are_interned() {
        let mut a = Asm::new();
        let s1 = a.konst("2/4".parse().unwrap());
        let s2 = a.konst("1/2".parse().unwrap());
        assert_eq!(s1, s2);
    }

    #[test]
    #[should_panic(expected = "unresolved label")]
    fn unresolved_label_panics() {
        let mut a = Asm::new();
        a.jmp("nowhere");
        let _ = a.finish("main");
    }
}
