//! Universal simulation in the machine's own assembly.
//!
//! The generators here emit program fragments that decode a Gödel code held
//! in a register and interpret the decoded machine instruction by
//! instruction, all with ordinary arithmetic, comparisons, and indirect
//! addressing. Wrapper generators plug behavior into the simulation through
//! hooks (what to do on a simulated output, halt, or oracle query), which is
//! how the library's universal machines and the limit-lemma transformers are
//! all built from one interpreter.
//!
//! Layout: every emitted interpreter instance owns disjoint regions of the
//! register file (decoded program, constant table, scratch, and two frame
//! regions for the simulated machine's real and index registers). Frames are
//! never cleared; re-running the simulated machine bumps the frame pointers
//! past the high-water mark of the previous run, so stale state is simply
//! never addressed again.
//!
//! Desk-scale limits, documented rather than enforced: the host input
//! dimension must stay below the first scratch bank (90 registers) and
//! simulated output vectors are capped at 32 entries.

use crate::exact::Rational;
use crate::machine::godel::opcode;
use crate::machine::{Asm, GoedelCode, Program};

// Scalar scratch offsets, relative to `SimLayout::scalar`.
pub const S_CODE: u32 = 0; // code number; becomes the byte-string value
pub const S_BYTE: u32 = 1;
pub const S_VAL: u32 = 2;
pub const S_SCALE: u32 = 3;
pub const S_TMP: u32 = 4;
pub const S_TMP2: u32 = 5;
pub const S_TMP3: u32 = 6;
pub const S_SPC: u32 = 7; // simulated program counter
pub const S_OP: u32 = 8;
pub const S_A: u32 = 9;
pub const S_B: u32 = 10;
pub const S_C: u32 = 11;
pub const S_LEN: u32 = 12; // byte length of the code string
pub const S_ICOUNT: u32 = 13;
pub const S_CCOUNT: u32 = 14;
pub const S_HW: u32 = 15; // frame high-water (real)
pub const S_IHW: u32 = 16; // frame high-water (index)
pub const S_BUDGET: u32 = 17;
pub const S_OUTDIM: u32 = 18;
pub const S_QCODE: u32 = 19;
pub const S_QLEN: u32 = 20;
pub const S_PCPOS: u32 = 21; // which record the program cursor points at
pub const S_J: u32 = 22;
pub const S_D: u32 = 23;
pub const S_W: u32 = 24;
/// First of several scalar slots reserved for hooks and drivers
/// (`S_HOOK..S_HOOK+15`).
pub const S_HOOK: u32 = 25;

// Index register offsets, relative to `SimLayout::iregs`.
pub const I_CUR: u32 = 0;
pub const I_PC: u32 = 1;
pub const I_ADDR: u32 = 2;
pub const I_FRAME: u32 = 3;
pub const I_IFRAME: u32 = 4;
pub const I_OUT: u32 = 5;
pub const I_SCRATCH: u32 = 6;
pub const I_HOOK: u32 = 7;

/// A bank of small constants preloaded into real registers, shared by every
/// interpreter instance in a program.
#[derive(Debug, Clone, Copy)]
pub struct ConstBank {
    base: u32,
}

impl ConstBank {
    /// Emits the loads; uses `base .. base+24`.
    pub fn emit(asm: &mut Asm, base: u32) -> ConstBank {
        for k in 0..=20i64 {
            asm.set_const_value(base + k as u32, Rational::from_int(k));
        }
        asm.set_const_value(base + 21, Rational::ratio(1, 2));
        asm.set_const_value(base + 22, Rational::from_int(128));
        asm.set_const_value(base + 23, Rational::from_int(256));
        ConstBank { base }
    }

    pub fn int(&self, k: u64) -> u32 {
        assert!(k <= 20, "constant bank holds 0..=20");
        self.base + k as u32
    }

    pub fn zero(&self) -> u32 {
        self.base
    }

    pub fn one(&self) -> u32 {
        self.base + 1
    }

    pub fn half(&self) -> u32 {
        self.base + 21
    }

    pub fn c128(&self) -> u32 {
        self.base + 22
    }

    pub fn c256(&self) -> u32 {
        self.base + 23
    }
}

/// Region assignment for one interpreter instance.
#[derive(Debug, Clone)]
pub struct SimLayout {
    pub tag: String,
    pub scalar: u32,
    pub iregs: u32,
    pub prog_area: i64,
    pub const_area: i64,
    pub byte_area: i64,
    pub power_area: i64,
    pub out_buf: i64,
    pub qry_buf: i64,
    pub input_save: i64,
    pub frame_init: i64,
    pub iframe_init: i64,
    pub bank: ConstBank,
}

impl SimLayout {
    /// The primary instance of a program.
    pub fn outer(bank: ConstBank) -> SimLayout {
        SimLayout {
            tag: "sim".to_string(),
            scalar: 100,
            iregs: 10,
            prog_area: 1_000,
            const_area: 3_000,
            byte_area: 4_000,
            power_area: 6_000,
            out_buf: 8_000,
            qry_buf: 8_200,
            input_save: 8_400,
            frame_init: 100_000_000,
            iframe_init: 200_000_000,
            bank,
        }
    }

    /// A second, disjoint instance for nested simulation.
    pub fn inner(bank: ConstBank) -> SimLayout {
        SimLayout {
            tag: "inz".to_string(),
            scalar: 400,
            iregs: 30,
            prog_area: 40_000,
            const_area: 43_000,
            byte_area: 44_000,
            power_area: 46_000,
            out_buf: 48_000,
            qry_buf: 48_200,
            input_save: 48_400,
            frame_init: 300_000_000,
            iframe_init: 400_000_000,
            bank,
        }
    }

    /// Scalar scratch register at offset `off`.
    pub fn s(&self, off: u32) -> u32 {
        self.scalar + off
    }

    /// Index register at offset `off`.
    pub fn i(&self, off: u32) -> u32 {
        self.iregs + off
    }
}

/// `dst_ireg := base_ireg + value`, counting the (nonnegative integer) value
/// held in scalar `value_off` down to zero. Clobbers `S_TMP3`.
pub fn emit_ireg_offset(asm: &mut Asm, l: &SimLayout, dst_ireg: u32, base_ireg: u32, value_off: u32) {
    let top = asm.fresh(&format!("{}_off", l.tag));
    let done = asm.fresh(&format!("{}_offd", l.tag));
    asm.movi_reg(l.i(dst_ireg), l.i(base_ireg));
    asm.movr(l.s(S_TMP3), l.s(value_off));
    asm.label(&top);
    asm.jeq(l.s(S_TMP3), l.bank.zero(), done.as_str());
    asm.inci(l.i(dst_ireg));
    asm.sub(l.s(S_TMP3), l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
}

/// `sHW := max(sHW, value)` for frame high-water upkeep.
fn emit_hw_update(asm: &mut Asm, l: &SimLayout, hw_off: u32, value_off: u32) {
    let skip = asm.fresh(&format!("{}_hw", l.tag));
    let upd = asm.fresh(&format!("{}_hwu", l.tag));
    asm.jlt(l.s(hw_off), l.s(value_off), upd.as_str());
    asm.jmp(skip.as_str());
    asm.label(&upd);
    asm.movr(l.s(hw_off), l.s(value_off));
    asm.label(&skip);
}

/// Positions `I_ADDR` at the simulated real register `value` (relative to
/// the current frame) and updates the high-water mark.
fn emit_frame_addr(asm: &mut Asm, l: &SimLayout, value_off: u32) {
    emit_hw_update(asm, l, S_HW, value_off);
    emit_ireg_offset(asm, l, I_ADDR, I_FRAME, value_off);
}

/// Same for the simulated index register frame.
fn emit_iframe_addr(asm: &mut Asm, l: &SimLayout, value_off: u32) {
    emit_hw_update(asm, l, S_IHW, value_off);
    emit_ireg_offset(asm, l, I_ADDR, I_IFRAME, value_off);
}

/// Discovers the host input dimension (index register 0 has no read path,
/// so it is recovered by writing a sentinel through it and scanning for the
/// aliased cell, verifying each hit by rewriting). Leaves the dimension in
/// scalar `dst_off` and restores the scratch cell beyond the input to zero.
pub fn emit_discover_dim(asm: &mut Asm, l: &SimLayout, dst_off: u32) {
    let restart = asm.fresh(&format!("{}_dd_restart", l.tag));
    let scan = asm.fresh(&format!("{}_dd_scan", l.tag));
    let cand = asm.fresh(&format!("{}_dd_cand", l.tag));
    let next = asm.fresh(&format!("{}_dd_next", l.tag));
    let done = asm.fresh(&format!("{}_dd_done", l.tag));
    // Sentinel starts at 1/3 and moves by 1 per retry; inputs are fixed, so
    // at most d+1 retries find a sentinel value colliding with no input.
    asm.set_const_value(l.s(S_TMP), Rational::ratio(1, 3));
    asm.label(&restart);
    asm.storei(l.s(S_TMP), 0); // R[d] := sentinel (through i0)
    asm.movi(l.i(I_CUR), 0);
    asm.movr(l.s(dst_off), l.bank.zero());
    asm.label(&scan);
    asm.loadi(l.s(S_TMP2), l.i(I_CUR));
    asm.jeq(l.s(S_TMP2), l.s(S_TMP), cand.as_str());
    asm.jmp(next.as_str());
    asm.label(&cand);
    // Candidate: rewrite through i0 and re-read through the cursor.
    asm.add(l.s(S_TMP), l.bank.one());
    asm.storei(l.s(S_TMP), 0);
    asm.loadi(l.s(S_TMP2), l.i(I_CUR));
    asm.jeq(l.s(S_TMP2), l.s(S_TMP), done.as_str());
    // False positive: an input equals the old sentinel. Retry with the new.
    asm.jmp(restart.as_str());
    asm.label(&next);
    asm.inci(l.i(I_CUR));
    asm.add(l.s(dst_off), l.bank.one());
    asm.jmp(scan.as_str());
    asm.label(&done);
    asm.storei(l.bank.zero(), 0); // restore R[d] = 0
}

/// Copies host registers `r<src_start> ..` (`count` of them, from scalar
/// `count_off`) into the input-save area.
pub fn emit_save_inputs(asm: &mut Asm, l: &SimLayout, src_start: i64, count_off: u32) {
    let top = asm.fresh(&format!("{}_sv", l.tag));
    let done = asm.fresh(&format!("{}_svd", l.tag));
    asm.movi(l.i(I_CUR), src_start);
    asm.movi(l.i(I_SCRATCH), l.input_save);
    asm.movr(l.s(S_TMP), l.s(count_off));
    asm.label(&top);
    asm.jeq(l.s(S_TMP), l.bank.zero(), done.as_str());
    asm.loadi(l.s(S_TMP2), l.i(I_CUR));
    asm.storei(l.s(S_TMP2), l.i(I_SCRATCH));
    asm.inci(l.i(I_CUR));
    asm.inci(l.i(I_SCRATCH));
    asm.sub(l.s(S_TMP), l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
}

/// Reads one byte at the cursor into `S_BYTE`.
fn emit_read_byte(asm: &mut Asm, l: &SimLayout) {
    asm.loadi(l.s(S_BYTE), l.i(I_CUR));
    asm.inci(l.i(I_CUR));
}

/// Reads a varint at the cursor into `S_VAL` (arbitrary precision).
fn emit_read_varint(asm: &mut Asm, l: &SimLayout) {
    let top = asm.fresh(&format!("{}_vi", l.tag));
    let fin = asm.fresh(&format!("{}_vif", l.tag));
    asm.movr(l.s(S_VAL), l.bank.zero());
    asm.movr(l.s(S_SCALE), l.bank.one());
    asm.label(&top);
    emit_read_byte(asm, l);
    asm.jlt(l.s(S_BYTE), l.bank.c128(), fin.as_str());
    // Continuation chunk: strip the bit, accumulate, scale by 128.
    asm.sub(l.s(S_BYTE), l.bank.c128());
    asm.movr(l.s(S_TMP), l.s(S_BYTE));
    asm.mul(l.s(S_TMP), l.s(S_SCALE));
    asm.add(l.s(S_VAL), l.s(S_TMP));
    asm.mul(l.s(S_SCALE), l.bank.c128());
    asm.jmp(top.as_str());
    asm.label(&fin);
    asm.movr(l.s(S_TMP), l.s(S_BYTE));
    asm.mul(l.s(S_TMP), l.s(S_SCALE));
    asm.add(l.s(S_VAL), l.s(S_TMP));
}

/// Decodes the code number in `S_CODE` into the instance's program and
/// constant areas. Jumps to `<tag>_stuck` (emitted by the interpreter) on a
/// structurally invalid code.
pub fn emit_decode(asm: &mut Asm, l: &SimLayout) {
    let stuck = format!("{}_stuck", l.tag);

    // B := code - 1; B = 0 (empty byte string) is invalid.
    asm.sub(l.s(S_CODE), l.bank.one());
    asm.jlt(l.s(S_CODE), l.bank.one(), stuck.as_str());

    // Powers of 256 up to the first one exceeding B; S_LEN counts bytes.
    let pow_top = asm.fresh(&format!("{}_pw", l.tag));
    let pow_done = asm.fresh(&format!("{}_pwd", l.tag));
    asm.movi(l.i(I_CUR), l.power_area);
    asm.movr(l.s(S_TMP), l.bank.one());
    asm.storei(l.s(S_TMP), l.i(I_CUR));
    asm.movr(l.s(S_LEN), l.bank.zero());
    asm.label(&pow_top);
    asm.loadi(l.s(S_TMP), l.i(I_CUR));
    asm.jlt(l.s(S_CODE), l.s(S_TMP), pow_done.as_str());
    asm.movr(l.s(S_TMP2), l.s(S_TMP));
    asm.mul(l.s(S_TMP2), l.bank.c256());
    asm.inci(l.i(I_CUR));
    asm.storei(l.s(S_TMP2), l.i(I_CUR));
    asm.add(l.s(S_LEN), l.bank.one());
    asm.jmp(pow_top.as_str());
    asm.label(&pow_done);

    // Extract bytes most-significant first, storing them in serialization
    // order by walking the byte cursor down from position L-1.
    // I_CUR sits at P[L]; I_ADDR walks to byte_area + L - 1.
    asm.movi(l.i(I_ADDR), l.byte_area);
    asm.movr(l.s(S_J), l.s(S_LEN));
    asm.sub(l.s(S_J), l.bank.one());
    {
        let top = asm.fresh(&format!("{}_bp", l.tag));
        let done = asm.fresh(&format!("{}_bpd", l.tag));
        asm.label(&top);
        asm.jeq(l.s(S_J), l.bank.zero(), done.as_str());
        asm.inci(l.i(I_ADDR));
        asm.sub(l.s(S_J), l.bank.one());
        asm.jmp(top.as_str());
        asm.label(&done);
    }
    asm.movr(l.s(S_J), l.s(S_LEN));
    let byte_top = asm.fresh(&format!("{}_by", l.tag));
    let byte_done = asm.fresh(&format!("{}_byd", l.tag));
    asm.label(&byte_top);
    asm.jeq(l.s(S_J), l.bank.zero(), byte_done.as_str());
    asm.sub(l.s(S_J), l.bank.one());
    asm.deci(l.i(I_CUR)); // P[j]
    asm.loadi(l.s(S_D), l.i(I_CUR));
    // D := P[j] * 128, then peel 8 bits of floor(B / P[j]).
    for _ in 0..7 {
        asm.add(l.s(S_D), l.s(S_D));
    }
    asm.movr(l.s(S_W), l.bank.c128());
    asm.movr(l.s(S_BYTE), l.bank.zero());
    let bit_top = asm.fresh(&format!("{}_bit", l.tag));
    let bit_skip = asm.fresh(&format!("{}_bsk", l.tag));
    let bit_done = asm.fresh(&format!("{}_btd", l.tag));
    asm.label(&bit_top);
    asm.jlt(l.s(S_CODE), l.s(S_D), bit_skip.as_str());
    asm.sub(l.s(S_CODE), l.s(S_D));
    asm.add(l.s(S_BYTE), l.s(S_W));
    asm.label(&bit_skip);
    asm.mul(l.s(S_D), l.bank.half());
    asm.mul(l.s(S_W), l.bank.half());
    asm.jlt(l.s(S_W), l.bank.one(), bit_done.as_str());
    asm.jmp(bit_top.as_str());
    asm.label(&bit_done);
    asm.storei(l.s(S_BYTE), l.i(I_ADDR));
    asm.deci(l.i(I_ADDR));
    asm.jmp(byte_top.as_str());
    asm.label(&byte_done);

    // Sequential field parse.
    asm.movi(l.i(I_CUR), l.byte_area);
    // Skip the name: varint length, then that many bytes.
    emit_read_varint(asm, l);
    {
        let top = asm.fresh(&format!("{}_nm", l.tag));
        let done = asm.fresh(&format!("{}_nmd", l.tag));
        asm.label(&top);
        asm.jeq(l.s(S_VAL), l.bank.zero(), done.as_str());
        asm.inci(l.i(I_CUR));
        asm.sub(l.s(S_VAL), l.bank.one());
        asm.jmp(top.as_str());
        asm.label(&done);
    }
    emit_read_varint(asm, l);
    asm.movr(l.s(S_ICOUNT), l.s(S_VAL));
    // An instructionless code is invalid.
    asm.jlt(l.s(S_ICOUNT), l.bank.one(), stuck.as_str());
    emit_read_varint(asm, l);
    asm.movr(l.s(S_CCOUNT), l.s(S_VAL));

    // Instruction records: [opcode, a, b, c] at prog_area + 4k.
    asm.movi(l.i(I_SCRATCH), l.prog_area);
    asm.movr(l.s(S_J), l.s(S_ICOUNT));
    let ins_top = asm.fresh(&format!("{}_in", l.tag));
    let ins_done = asm.fresh(&format!("{}_ind", l.tag));
    asm.label(&ins_top);
    asm.jeq(l.s(S_J), l.bank.zero(), ins_done.as_str());
    asm.sub(l.s(S_J), l.bank.one());
    emit_read_byte(asm, l);
    asm.movr(l.s(S_OP), l.s(S_BYTE));
    asm.movr(l.s(S_A), l.bank.zero());
    asm.movr(l.s(S_B), l.bank.zero());
    asm.movr(l.s(S_C), l.bank.zero());
    let store = asm.fresh(&format!("{}_ist", l.tag));
    // Operand counts per opcode.
    let two_ops = [
        opcode::ADD,
        opcode::SUB,
        opcode::MUL,
        opcode::DIV,
        opcode::SETC,
        opcode::MOVR,
        opcode::MOVI_REG,
        opcode::LOADI,
        opcode::STOREI,
    ];
    let one_op = [opcode::INCI, opcode::DECI, opcode::JMP, opcode::OUT_IMM, opcode::OUT_REG];
    let three_ops = [opcode::JEQ, opcode::JLT, opcode::QRY_CONST, opcode::QRY_REG];
    let lbl_two = asm.fresh(&format!("{}_i2", l.tag));
    let lbl_one = asm.fresh(&format!("{}_i1", l.tag));
    let lbl_three = asm.fresh(&format!("{}_i3", l.tag));
    let lbl_movi = asm.fresh(&format!("{}_imv", l.tag));
    for op in two_ops {
        asm.jeq(l.s(S_OP), l.bank.int(op as u64), lbl_two.as_str());
    }
    for op in one_op {
        asm.jeq(l.s(S_OP), l.bank.int(op as u64), lbl_one.as_str());
    }
    for op in three_ops {
        asm.jeq(l.s(S_OP), l.bank.int(op as u64), lbl_three.as_str());
    }
    asm.jeq(l.s(S_OP), l.bank.int(opcode::MOVI_IMM as u64), lbl_movi.as_str());
    asm.jeq(l.s(S_OP), l.bank.int(opcode::HALT as u64), store.as_str());
    asm.jmp(stuck.as_str()); // unknown opcode
    asm.label(&lbl_three);
    emit_read_varint(asm, l);
    asm.movr(l.s(S_A), l.s(S_VAL));
    emit_read_varint(asm, l);
    asm.movr(l.s(S_B), l.s(S_VAL));
    emit_read_varint(asm, l);
    asm.movr(l.s(S_C), l.s(S_VAL));
    asm.jmp(store.as_str());
    asm.label(&lbl_two);
    emit_read_varint(asm, l);
    asm.movr(l.s(S_A), l.s(S_VAL));
    emit_read_varint(asm, l);
    asm.movr(l.s(S_B), l.s(S_VAL));
    asm.jmp(store.as_str());
    asm.label(&lbl_one);
    emit_read_varint(asm, l);
    asm.movr(l.s(S_A), l.s(S_VAL));
    asm.jmp(store.as_str());
    asm.label(&lbl_movi);
    // dst varint, sign byte, magnitude varint; B holds the signed value.
    emit_read_varint(asm, l);
    asm.movr(l.s(S_A), l.s(S_VAL));
    emit_read_byte(asm, l);
    asm.movr(l.s(S_W), l.s(S_BYTE)); // sign survives the magnitude varint
    emit_read_varint(asm, l);
    asm.movr(l.s(S_B), l.s(S_VAL));
    {
        let nonneg = asm.fresh(&format!("{}_imp", l.tag));
        asm.jeq(l.s(S_W), l.bank.zero(), nonneg.as_str());
        asm.movr(l.s(S_TMP), l.bank.zero());
        asm.sub(l.s(S_TMP), l.s(S_B));
        asm.movr(l.s(S_B), l.s(S_TMP));
        asm.label(&nonneg);
    }
    asm.jmp(store.as_str());
    asm.label(&store);
    asm.storei(l.s(S_OP), l.i(I_SCRATCH));
    asm.inci(l.i(I_SCRATCH));
    asm.storei(l.s(S_A), l.i(I_SCRATCH));
    asm.inci(l.i(I_SCRATCH));
    asm.storei(l.s(S_B), l.i(I_SCRATCH));
    asm.inci(l.i(I_SCRATCH));
    asm.storei(l.s(S_C), l.i(I_SCRATCH));
    asm.inci(l.i(I_SCRATCH));
    asm.jmp(ins_top.as_str());
    asm.label(&ins_done);

    // Constant table: sign byte, numerator varint, denominator varint.
    asm.movi(l.i(I_SCRATCH), l.const_area);
    asm.movr(l.s(S_J), l.s(S_CCOUNT));
    let con_top = asm.fresh(&format!("{}_cn", l.tag));
    let con_done = asm.fresh(&format!("{}_cnd", l.tag));
    asm.label(&con_top);
    asm.jeq(l.s(S_J), l.bank.zero(), con_done.as_str());
    asm.sub(l.s(S_J), l.bank.one());
    emit_read_byte(asm, l);
    asm.movr(l.s(S_W), l.s(S_BYTE)); // sign; the varint reader is about to
    emit_read_varint(asm, l); // clobber S_BYTE and S_TMP
    asm.movr(l.s(S_D), l.s(S_VAL)); // numerator
    emit_read_varint(asm, l); // denominator in S_VAL
    asm.jeq(l.s(S_VAL), l.bank.zero(), stuck.as_str());
    asm.div(l.s(S_D), l.s(S_VAL));
    {
        let nonneg = asm.fresh(&format!("{}_cs", l.tag));
        asm.jeq(l.s(S_W), l.bank.zero(), nonneg.as_str());
        asm.movr(l.s(S_TMP), l.bank.zero());
        asm.sub(l.s(S_TMP), l.s(S_D));
        asm.movr(l.s(S_D), l.s(S_TMP));
        asm.label(&nonneg);
    }
    asm.storei(l.s(S_D), l.i(I_SCRATCH));
    asm.inci(l.i(I_SCRATCH));
    asm.jmp(con_top.as_str());
    asm.label(&con_done);

    // Terminator byte must be exactly 1.
    emit_read_byte(asm, l);
    let tok = asm.fresh(&format!("{}_tok", l.tag));
    asm.jeq(l.s(S_BYTE), l.bank.one(), tok.as_str());
    asm.jmp(stuck.as_str());
    asm.label(&tok);
}

/// Labels a driver needs to re-enter or reason about an emitted interpreter.
#[derive(Debug, Clone)]
pub struct SimBlock {
    /// Jump here to execute the next simulated instruction.
    pub fetch: String,
    /// The divergence sink: an infinite loop.
    pub stuck: String,
}

/// Behavior injected into the interpreter. Each closure emits code at the
/// corresponding point; fall-through resumes the simulation. The simulated
/// output vector sits at `out_buf` with its width in `S_OUTDIM`; a query's
/// code value is in `S_QCODE`, its inputs at `qry_buf` with width `S_QLEN`.
pub struct SimHooks<'h> {
    pub on_output: Hook<'h>,
    /// Emitted when the simulated machine halts; falling through diverges.
    pub on_halt: Hook<'h>,
    /// Emitted for a simulated `QRY`; must leave the answer in the simulated
    /// `r0` (see [`emit_write_sim_r0`]) or jump away. `None` treats a query
    /// like a singular step.
    pub on_qry: Option<Hook<'h>>,
    /// Emitted at the top of every fetch.
    pub on_step: Option<Hook<'h>>,
    /// When set, `S_BUDGET` is decremented per simulated step; hitting zero
    /// jumps to this label instead of fetching.
    pub budget_exhausted: Option<String>,
    /// When set, the divergence sink forwards to this label instead of
    /// looping, so drivers can treat "the simulation went singular" as an
    /// answer (for nested simulations: "does not halt").
    pub stuck_override: Option<String>,
}

pub type Hook<'h> = Box<dyn FnMut(&mut Asm, &SimLayout) + 'h>;

impl<'h> SimHooks<'h> {
    /// Ignore outputs, diverge on halt, treat queries as singular.
    pub fn silent() -> Self {
        SimHooks {
            on_output: Box::new(|_, _| {}),
            on_halt: Box::new(|_, _| {}),
            on_qry: None,
            on_step: None,
            budget_exhausted: None,
            stuck_override: None,
        }
    }
}

/// Initializes the interpreter state: frame pointers at their initial
/// regions, simulated pc at instruction 0, program cursor parked.
pub fn emit_interp_init(asm: &mut Asm, l: &SimLayout) {
    asm.movi(l.i(I_FRAME), l.frame_init);
    asm.movi(l.i(I_IFRAME), l.iframe_init);
    asm.movi(l.i(I_PC), l.prog_area);
    asm.movr(l.s(S_PCPOS), l.bank.zero());
    asm.movr(l.s(S_SPC), l.bank.zero());
    asm.movr(l.s(S_HW), l.bank.zero());
    asm.movr(l.s(S_IHW), l.bank.zero());
}

/// Starts a fresh run of the already-decoded machine: bumps both frame
/// pointers past the previous run's high-water marks (fresh frames read as
/// zero) and resets the simulated pc.
pub fn emit_reset_run(asm: &mut Asm, l: &SimLayout) {
    // Advance I_FRAME by S_HW + 1 and I_IFRAME by S_IHW + 1.
    for (hw, frame) in [(S_HW, I_FRAME), (S_IHW, I_IFRAME)] {
        let top = asm.fresh(&format!("{}_rr", l.tag));
        let done = asm.fresh(&format!("{}_rrd", l.tag));
        asm.movr(l.s(S_TMP), l.s(hw));
        asm.add(l.s(S_TMP), l.bank.one());
        asm.label(&top);
        asm.jeq(l.s(S_TMP), l.bank.zero(), done.as_str());
        asm.inci(l.i(frame));
        asm.sub(l.s(S_TMP), l.bank.one());
        asm.jmp(top.as_str());
        asm.label(&done);
    }
    asm.movi(l.i(I_PC), l.prog_area);
    asm.movr(l.s(S_PCPOS), l.bank.zero());
    asm.movr(l.s(S_SPC), l.bank.zero());
    asm.movr(l.s(S_HW), l.bank.zero());
    asm.movr(l.s(S_IHW), l.bank.zero());
}

/// Copies `count` saved inputs (from the input-save area) into the current
/// frame's registers 0.. and sets the simulated index register 0 to `count`.
pub fn emit_feed_saved_inputs(asm: &mut Asm, l: &SimLayout, count_off: u32) {
    let top = asm.fresh(&format!("{}_fd", l.tag));
    let done = asm.fresh(&format!("{}_fdd", l.tag));
    asm.movi(l.i(I_CUR), l.input_save);
    asm.movi_reg(l.i(I_ADDR), l.i(I_FRAME));
    asm.movr(l.s(S_TMP), l.s(count_off));
    asm.label(&top);
    asm.jeq(l.s(S_TMP), l.bank.zero(), done.as_str());
    asm.loadi(l.s(S_TMP2), l.i(I_CUR));
    asm.storei(l.s(S_TMP2), l.i(I_ADDR));
    asm.inci(l.i(I_CUR));
    asm.inci(l.i(I_ADDR));
    asm.sub(l.s(S_TMP), l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
    // High-water covers the inputs.
    emit_hw_update(asm, l, S_HW, count_off);
    // Simulated i0 := count.
    asm.movi_reg(l.i(I_ADDR), l.i(I_IFRAME));
    asm.storei(l.s(count_off), l.i(I_ADDR));
}

/// Writes the scalar at `val_off` into the simulated machine's `r0`.
pub fn emit_write_sim_r0(asm: &mut Asm, l: &SimLayout, val_off: u32) {
    asm.movi_reg(l.i(I_ADDR), l.i(I_FRAME));
    asm.storei(l.s(val_off), l.i(I_ADDR));
}

/// Emits the interpreter loop. Control falls into the fetch label, so this
/// is placed where simulation should begin; the returned labels let drivers
/// resume the loop after hook code. The `<tag>_stuck` divergence sink is
/// emitted here, after the dispatch handlers.
pub fn emit_interp(asm: &mut Asm, l: &SimLayout, hooks: &mut SimHooks<'_>) -> SimBlock {
    let fetch = format!("{}_fetch", l.tag);
    let stuck = format!("{}_stuck", l.tag);
    let dispatch = asm.fresh(&format!("{}_dsp", l.tag));

    asm.label(&fetch);
    if let Some(on_step) = &mut hooks.on_step {
        on_step(asm, l);
    }
    if let Some(out_label) = hooks.budget_exhausted.clone() {
        let go = asm.fresh(&format!("{}_bud", l.tag));
        asm.jlt(l.bank.zero(), l.s(S_BUDGET), go.as_str());
        asm.jmp(out_label.as_str());
        asm.label(&go);
        asm.sub(l.s(S_BUDGET), l.bank.one());
    }
    // Position I_PC at prog_area + 4 * S_SPC by walking the delta.
    {
        let pos = asm.fresh(&format!("{}_pos", l.tag));
        let up = asm.fresh(&format!("{}_posu", l.tag));
        let down = asm.fresh(&format!("{}_posd", l.tag));
        asm.label(&pos);
        asm.jeq(l.s(S_PCPOS), l.s(S_SPC), dispatch.as_str());
        asm.jlt(l.s(S_PCPOS), l.s(S_SPC), up.as_str());
        asm.jmp(down.as_str());
        asm.label(&up);
        for _ in 0..4 {
            asm.inci(l.i(I_PC));
        }
        asm.add(l.s(S_PCPOS), l.bank.one());
        asm.jmp(pos.as_str());
        asm.label(&down);
        for _ in 0..4 {
            asm.deci(l.i(I_PC));
        }
        asm.sub(l.s(S_PCPOS), l.bank.one());
        asm.jmp(pos.as_str());
    }
    asm.label(&dispatch);
    asm.movi_reg(l.i(I_CUR), l.i(I_PC));
    asm.loadi(l.s(S_OP), l.i(I_CUR));
    asm.inci(l.i(I_CUR));
    asm.loadi(l.s(S_A), l.i(I_CUR));
    asm.inci(l.i(I_CUR));
    asm.loadi(l.s(S_B), l.i(I_CUR));
    asm.inci(l.i(I_CUR));
    asm.loadi(l.s(S_C), l.i(I_CUR));

    // Handler labels.
    let h_arith = asm.fresh(&format!("{}_ha", l.tag)); // ADD..DIV share with op re-test
    let h_setc = asm.fresh(&format!("{}_hsc", l.tag));
    let h_movr = asm.fresh(&format!("{}_hmr", l.tag));
    let h_movi_imm = asm.fresh(&format!("{}_hmi", l.tag));
    let h_movi_reg = asm.fresh(&format!("{}_hmg", l.tag));
    let h_inci = asm.fresh(&format!("{}_hin", l.tag));
    let h_deci = asm.fresh(&format!("{}_hde", l.tag));
    let h_loadi = asm.fresh(&format!("{}_hld", l.tag));
    let h_storei = asm.fresh(&format!("{}_hst", l.tag));
    let h_jeq = asm.fresh(&format!("{}_hje", l.tag));
    let h_jlt = asm.fresh(&format!("{}_hjl", l.tag));
    let h_jmp = asm.fresh(&format!("{}_hjm", l.tag));
    let h_out_imm = asm.fresh(&format!("{}_hoi", l.tag));
    let h_out_reg = asm.fresh(&format!("{}_hor", l.tag));
    let h_halt = asm.fresh(&format!("{}_hh", l.tag));
    let h_qry_c = asm.fresh(&format!("{}_hqc", l.tag));
    let h_qry_r = asm.fresh(&format!("{}_hqr", l.tag));
    let advance = asm.fresh(&format!("{}_adv", l.tag));

    for (op, lbl) in [
        (opcode::ADD, &h_arith),
        (opcode::SUB, &h_arith),
        (opcode::MUL, &h_arith),
        (opcode::DIV, &h_arith),
        (opcode::LOADI, &h_loadi),
        (opcode::STOREI, &h_storei),
        (opcode::JEQ, &h_jeq),
        (opcode::JLT, &h_jlt),
        (opcode::JMP, &h_jmp),
        (opcode::SETC, &h_setc),
        (opcode::MOVR, &h_movr),
        (opcode::MOVI_IMM, &h_movi_imm),
        (opcode::MOVI_REG, &h_movi_reg),
        (opcode::INCI, &h_inci),
        (opcode::DECI, &h_deci),
        (opcode::OUT_IMM, &h_out_imm),
        (opcode::OUT_REG, &h_out_reg),
        (opcode::HALT, &h_halt),
        (opcode::QRY_CONST, &h_qry_c),
        (opcode::QRY_REG, &h_qry_r),
    ] {
        asm.jeq(l.s(S_OP), l.bank.int(op as u64), lbl.as_str());
    }
    asm.jmp(stuck.as_str()); // undecodable opcode: diverge

    // Arithmetic: r[a] := r[a] op r[b].
    asm.label(&h_arith);
    emit_frame_addr(asm, l, S_B);
    asm.loadi(l.s(S_TMP2), l.i(I_ADDR));
    emit_frame_addr(asm, l, S_A);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    {
        let do_sub = asm.fresh(&format!("{}_asu", l.tag));
        let do_mul = asm.fresh(&format!("{}_amu", l.tag));
        let do_div = asm.fresh(&format!("{}_adi", l.tag));
        let done = asm.fresh(&format!("{}_adn", l.tag));
        asm.jeq(l.s(S_OP), l.bank.int(opcode::SUB as u64), do_sub.as_str());
        asm.jeq(l.s(S_OP), l.bank.int(opcode::MUL as u64), do_mul.as_str());
        asm.jeq(l.s(S_OP), l.bank.int(opcode::DIV as u64), do_div.as_str());
        asm.add(l.s(S_TMP), l.s(S_TMP2));
        asm.jmp(done.as_str());
        asm.label(&do_sub);
        asm.sub(l.s(S_TMP), l.s(S_TMP2));
        asm.jmp(done.as_str());
        asm.label(&do_mul);
        asm.mul(l.s(S_TMP), l.s(S_TMP2));
        asm.jmp(done.as_str());
        asm.label(&do_div);
        // A simulated division by zero is the simulated machine's singular
        // step; the simulation itself must survive it as "diverged".
        asm.jeq(l.s(S_TMP2), l.bank.zero(), stuck.as_str());
        asm.div(l.s(S_TMP), l.s(S_TMP2));
        asm.label(&done);
    }
    asm.storei(l.s(S_TMP), l.i(I_ADDR)); // I_ADDR still at r[a]
    asm.jmp(advance.as_str());

    // SETC: r[a] := constants[b].
    asm.label(&h_setc);
    asm.movi(l.i(I_CUR), l.const_area);
    emit_ireg_offset_from_area(asm, l, I_CUR, S_B);
    asm.loadi(l.s(S_TMP), l.i(I_CUR));
    emit_frame_addr(asm, l, S_A);
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // MOVR: r[a] := r[b].
    asm.label(&h_movr);
    emit_frame_addr(asm, l, S_B);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    emit_frame_addr(asm, l, S_A);
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // MOVI imm: i[a] := b (b already signed).
    asm.label(&h_movi_imm);
    emit_iframe_addr(asm, l, S_A);
    asm.storei(l.s(S_B), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // MOVI reg: i[a] := i[b].
    asm.label(&h_movi_reg);
    emit_iframe_addr(asm, l, S_B);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    emit_iframe_addr(asm, l, S_A);
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // INCI / DECI on the simulated index register a.
    asm.label(&h_inci);
    emit_iframe_addr(asm, l, S_A);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    asm.add(l.s(S_TMP), l.bank.one());
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());
    asm.label(&h_deci);
    emit_iframe_addr(asm, l, S_A);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    asm.sub(l.s(S_TMP), l.bank.one());
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // LOADI: r[a] := R[i[b]]; negative simulated addresses are singular.
    asm.label(&h_loadi);
    emit_iframe_addr(asm, l, S_B);
    asm.loadi(l.s(S_TMP2), l.i(I_ADDR)); // simulated address
    asm.jlt(l.s(S_TMP2), l.bank.zero(), stuck.as_str());
    emit_hw_update(asm, l, S_HW, S_TMP2);
    emit_ireg_offset(asm, l, I_ADDR, I_FRAME, S_TMP2);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    emit_frame_addr(asm, l, S_A);
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // STOREI: R[i[b]] := r[a].
    asm.label(&h_storei);
    emit_frame_addr(asm, l, S_A);
    asm.loadi(l.s(S_TMP), l.i(I_ADDR));
    emit_iframe_addr(asm, l, S_B);
    asm.loadi(l.s(S_TMP2), l.i(I_ADDR));
    asm.jlt(l.s(S_TMP2), l.bank.zero(), stuck.as_str());
    emit_hw_update(asm, l, S_HW, S_TMP2);
    emit_ireg_offset(asm, l, I_ADDR, I_FRAME, S_TMP2);
    asm.storei(l.s(S_TMP), l.i(I_ADDR));
    asm.jmp(advance.as_str());

    // JEQ / JLT on simulated real registers a, b with target c.
    for (lbl, is_eq) in [(&h_jeq, true), (&h_jlt, false)] {
        asm.label(lbl);
        emit_frame_addr(asm, l, S_A);
        asm.loadi(l.s(S_TMP), l.i(I_ADDR));
        emit_frame_addr(asm, l, S_B);
        asm.loadi(l.s(S_TMP2), l.i(I_ADDR));
        let taken = asm.fresh(&format!("{}_tk", l.tag));
        if is_eq {
            asm.jeq(l.s(S_TMP), l.s(S_TMP2), taken.as_str());
        } else {
            asm.jlt(l.s(S_TMP), l.s(S_TMP2), taken.as_str());
        }
        asm.jmp(advance.as_str());
        asm.label(&taken);
        asm.movr(l.s(S_SPC), l.s(S_C));
        asm.jmp(fetch.as_str());
    }

    // JMP: spc := a.
    asm.label(&h_jmp);
    asm.movr(l.s(S_SPC), l.s(S_A));
    asm.jmp(fetch.as_str());

    // OUT with immediate or register dimension: gather the vector, call the
    // hook, continue.
    let out_common = asm.fresh(&format!("{}_outc", l.tag));
    asm.label(&h_out_imm);
    asm.movr(l.s(S_OUTDIM), l.s(S_A));
    asm.jmp(out_common.as_str());
    asm.label(&h_out_reg);
    emit_iframe_addr(asm, l, S_A);
    asm.loadi(l.s(S_OUTDIM), l.i(I_ADDR));
    asm.jlt(l.s(S_OUTDIM), l.bank.zero(), stuck.as_str());
    asm.label(&out_common);
    // Cap: simulated output vectors wider than 32 are singular here (hooks
    // may copy them into low host registers).
    asm.movr(l.s(S_TMP), l.bank.int(16));
    asm.mul(l.s(S_TMP), l.bank.int(2));
    asm.jlt(l.s(S_TMP), l.s(S_OUTDIM), stuck.as_str());
    {
        let top = asm.fresh(&format!("{}_og", l.tag));
        let done = asm.fresh(&format!("{}_ogd", l.tag));
        asm.movi(l.i(I_OUT), l.out_buf);
        asm.movi_reg(l.i(I_ADDR), l.i(I_FRAME));
        asm.movr(l.s(S_TMP), l.s(S_OUTDIM));
        asm.label(&top);
        asm.jeq(l.s(S_TMP), l.bank.zero(), done.as_str());
        asm.loadi(l.s(S_TMP2), l.i(I_ADDR));
        asm.storei(l.s(S_TMP2), l.i(I_OUT));
        asm.inci(l.i(I_ADDR));
        asm.inci(l.i(I_OUT));
        asm.sub(l.s(S_TMP), l.bank.one());
        asm.jmp(top.as_str());
        asm.label(&done);
    }
    // Outputs of dimension d read registers 0..d-1.
    {
        let skip = asm.fresh(&format!("{}_ohw", l.tag));
        asm.jeq(l.s(S_OUTDIM), l.bank.zero(), skip.as_str());
        asm.movr(l.s(S_TMP), l.s(S_OUTDIM));
        asm.sub(l.s(S_TMP), l.bank.one());
        emit_hw_update(asm, l, S_HW, S_TMP);
        asm.label(&skip);
    }
    (hooks.on_output)(asm, l);
    asm.jmp(advance.as_str());

    // HALT.
    asm.label(&h_halt);
    (hooks.on_halt)(asm, l);
    asm.jmp(stuck.as_str());

    // QRY: code from the simulated constant table or a simulated register,
    // inputs gathered to qry_buf.
    let qry_common = asm.fresh(&format!("{}_qc", l.tag));
    asm.label(&h_qry_c);
    asm.movi(l.i(I_CUR), l.const_area);
    emit_ireg_offset_from_area(asm, l, I_CUR, S_A);
    asm.loadi(l.s(S_QCODE), l.i(I_CUR));
    asm.jmp(qry_common.as_str());
    asm.label(&h_qry_r);
    emit_frame_addr(asm, l, S_A);
    asm.loadi(l.s(S_QCODE), l.i(I_ADDR));
    asm.label(&qry_common);
    match &mut hooks.on_qry {
        None => {
            asm.jmp(stuck.as_str());
        }
        Some(hook) => {
            // Length from simulated index register c.
            emit_iframe_addr(asm, l, S_C);
            asm.loadi(l.s(S_QLEN), l.i(I_ADDR));
            asm.jlt(l.s(S_QLEN), l.bank.zero(), stuck.as_str());
            asm.movr(l.s(S_TMP), l.bank.int(16));
            asm.mul(l.s(S_TMP), l.bank.int(2));
            asm.jlt(l.s(S_TMP), l.s(S_QLEN), stuck.as_str());
            // Gather r[b .. b+len) to qry_buf.
            let top = asm.fresh(&format!("{}_qg", l.tag));
            let done = asm.fresh(&format!("{}_qgd", l.tag));
            emit_frame_addr(asm, l, S_B);
            asm.movi(l.i(I_OUT), l.qry_buf);
            asm.movr(l.s(S_TMP), l.s(S_QLEN));
            asm.label(&top);
            asm.jeq(l.s(S_TMP), l.bank.zero(), done.as_str());
            asm.loadi(l.s(S_TMP2), l.i(I_ADDR));
            asm.storei(l.s(S_TMP2), l.i(I_OUT));
            asm.inci(l.i(I_ADDR));
            asm.inci(l.i(I_OUT));
            asm.sub(l.s(S_TMP), l.bank.one());
            asm.jmp(top.as_str());
            asm.label(&done);
            // Reading r[b .. b+len) touches up to b+len-1.
            {
                let skip = asm.fresh(&format!("{}_qhw", l.tag));
                asm.jeq(l.s(S_QLEN), l.bank.zero(), skip.as_str());
                asm.movr(l.s(S_TMP), l.s(S_B));
                asm.add(l.s(S_TMP), l.s(S_QLEN));
                asm.sub(l.s(S_TMP), l.bank.one());
                emit_hw_update(asm, l, S_HW, S_TMP);
                asm.label(&skip);
            }
            hook(asm, l);
        }
    }
    asm.jmp(advance.as_str());

    // Fall-through advance: spc += 1; back to fetch.
    asm.label(&advance);
    asm.add(l.s(S_SPC), l.bank.one());
    asm.jmp(fetch.as_str());

    // The divergence sink.
    asm.label(&stuck);
    match &hooks.stuck_override {
        Some(target) => asm.jmp(target.as_str()),
        None => asm.jmp(stuck.as_str()),
    }

    SimBlock { fetch, stuck }
}

/// Advances `ireg` (already at an area base) by the nonnegative integer in
/// scalar `value_off`. Clobbers `S_TMP3`.
fn emit_ireg_offset_from_area(asm: &mut Asm, l: &SimLayout, ireg: u32, value_off: u32) {
    let top = asm.fresh(&format!("{}_ao", l.tag));
    let done = asm.fresh(&format!("{}_aod", l.tag));
    asm.movr(l.s(S_TMP3), l.s(value_off));
    asm.label(&top);
    asm.jeq(l.s(S_TMP3), l.bank.zero(), done.as_str());
    asm.inci(l.i(ireg));
    asm.sub(l.s(S_TMP3), l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
}

/// Emits the standard front matter of a universal wrapper whose input is
/// `(code, x..)`: constant bank, dimension discovery, input save, decode of
/// the code from `r0`, interpreter init, and feeding `x` to the simulated
/// machine. Returns the scalar offset holding the simulated input count.
fn emit_standard_prologue_code_in_r0(asm: &mut Asm, l: &SimLayout) -> u32 {
    let x_count = S_HOOK + 14;
    emit_discover_dim(asm, l, x_count);
    asm.sub(l.s(x_count), l.bank.one()); // inputs beyond the code
    asm.movi(l.i(I_CUR), 0);
    asm.loadi(l.s(S_CODE), l.i(I_CUR)); // code from r0
    emit_save_inputs(asm, l, 1, x_count);
    emit_decode(asm, l);
    emit_interp_init(asm, l);
    emit_feed_saved_inputs(asm, l, x_count);
    x_count
}

/// Simulates the machine coded in `r0` on inputs `(r1, ..)` and halts with
/// output `1` exactly when the simulated machine halts.
pub fn halting_flag() -> Program {
    let mut asm = Asm::new();
    let bank = ConstBank::emit(&mut asm, 50);
    let l = SimLayout::outer(bank);
    emit_standard_prologue_code_in_r0(&mut asm, &l);
    let mut hooks = SimHooks::silent();
    hooks.on_halt = Box::new(|asm: &mut Asm, l: &SimLayout| {
        asm.movi(l.i(I_CUR), 0);
        asm.storei(l.bank.one(), l.i(I_CUR)); // r0 := 1
        asm.out_imm(1);
        asm.halt();
    });
    emit_interp(&mut asm, &l, &mut hooks);
    asm.finish("halting_flag")
}

/// Simulates the machine coded in `r0` on `(r1, ..)`, emitting `1` at every
/// simulated step; if the simulated machine halts, switches to alternating
/// `0, 1, 0, 1, ...`. The stream converges (to 1) exactly when the simulated
/// machine never halts.
pub fn cohalting_flag() -> Program {
    let mut asm = Asm::new();
    let bank = ConstBank::emit(&mut asm, 50);
    let l = SimLayout::outer(bank);
    emit_standard_prologue_code_in_r0(&mut asm, &l);
    let mut hooks = SimHooks::silent();
    hooks.on_step = Some(Box::new(|asm: &mut Asm, l: &SimLayout| {
        asm.movi(l.i(I_CUR), 0);
        asm.storei(l.bank.one(), l.i(I_CUR));
        asm.out_imm(1);
    }));
    hooks.on_halt = Box::new(|asm: &mut Asm, l: &SimLayout| {
        let top = asm.fresh("alt");
        asm.label(&top);
        asm.movi(l.i(I_CUR), 0);
        asm.storei(l.bank.zero(), l.i(I_CUR));
        asm.out_imm(1);
        asm.storei(l.bank.one(), l.i(I_CUR));
        asm.out_imm(1);
        asm.jmp(top.as_str());
    });
    emit_interp(&mut asm, &l, &mut hooks);
    asm.finish("cohalting_flag")
}

/// Simulates the machine with the given code (placed in the constant table)
/// on inputs `(r1, ..)` — `r0` holds a norm bound `n` — and halts exactly
/// when a simulated output vector has 1-norm strictly exceeding `n`. Runs
/// forever otherwise, including when the simulated machine halts.
pub fn norm_exceedance_searcher(code: &GoedelCode) -> Program {
    let mut asm = Asm::new();
    let bank = ConstBank::emit(&mut asm, 50);
    let l = SimLayout::outer(bank);
    let bound = l.s(S_HOOK); // the norm bound, kept in a scratch scalar
    let code_slot = asm.konst(code.to_rational());

    let x_count = S_HOOK + 14;
    emit_discover_dim(&mut asm, &l, x_count);
    asm.sub(l.s(x_count), l.bank.one());
    asm.movi(l.i(I_CUR), 0);
    asm.loadi(bound, l.i(I_CUR)); // r0 = bound n
    emit_save_inputs(&mut asm, &l, 1, x_count);
    asm.setc(l.s(S_CODE), code_slot);
    emit_decode(&mut asm, &l);
    emit_interp_init(&mut asm, &l);
    emit_feed_saved_inputs(&mut asm, &l, x_count);

    let mut hooks = SimHooks::silent();
    hooks.on_output = Box::new(move |asm: &mut Asm, l: &SimLayout| {
        emit_out_buf_norm1(asm, l, S_HOOK + 1);
        // Halt exactly when the norm strictly exceeds the bound.
        let exceed = asm.fresh("nx_exceed");
        let cont = asm.fresh("nx_cont");
        asm.jlt(bound, l.s(S_HOOK + 1), exceed.as_str());
        asm.jmp(cont.as_str());
        asm.label(&exceed);
        asm.halt();
        asm.label(&cont);
    });
    emit_interp(&mut asm, &l, &mut hooks);
    asm.finish("norm_searcher")
}

/// Computes the 1-norm of the gathered output vector (at `out_buf`, width
/// `S_OUTDIM`) into scalar `acc_off`. Clobbers `S_HOOK+12`, `S_HOOK+13`,
/// and `I_HOOK`.
pub fn emit_out_buf_norm1(asm: &mut Asm, l: &SimLayout, acc_off: u32) {
    let acc = l.s(acc_off);
    let cnt = l.s(S_HOOK + 12);
    let cur = l.s(S_HOOK + 13);
    let top = asm.fresh("norm_top");
    let neg = asm.fresh("norm_neg");
    let next = asm.fresh("norm_next");
    let done = asm.fresh("norm_done");
    asm.movr(acc, l.bank.zero());
    asm.movr(cnt, l.s(S_OUTDIM));
    asm.movi(l.i(I_HOOK), l.out_buf);
    asm.label(&top);
    asm.jeq(cnt, l.bank.zero(), done.as_str());
    asm.loadi(cur, l.i(I_HOOK));
    asm.jlt(cur, l.bank.zero(), neg.as_str());
    asm.add(acc, cur);
    asm.jmp(next.as_str());
    asm.label(&neg);
    asm.sub(acc, cur);
    asm.label(&next);
    asm.inci(l.i(I_HOOK));
    asm.sub(cnt, l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
}

/// Simulates the machine with the given code (in the constant table) on the
/// full host input vector, re-emitting every simulated output and halting
/// when the simulated machine halts. The output stream equals the coded
/// machine's own stream entry for entry.
pub fn reemitter(code: &GoedelCode) -> Program {
    let mut asm = Asm::new();
    let bank = ConstBank::emit(&mut asm, 50);
    let l = SimLayout::outer(bank);
    let code_slot = asm.konst(code.to_rational());

    let x_count = S_HOOK + 14;
    emit_discover_dim(&mut asm, &l, x_count);
    emit_save_inputs(&mut asm, &l, 0, x_count);
    asm.setc(l.s(S_CODE), code_slot);
    emit_decode(&mut asm, &l);
    emit_interp_init(&mut asm, &l);
    emit_feed_saved_inputs(&mut asm, &l, x_count);

    let mut hooks = SimHooks::silent();
    hooks.on_output = Box::new(emit_reemit_output);
    hooks.on_halt = Box::new(|asm: &mut Asm, _l: &SimLayout| {
        asm.halt();
    });
    emit_interp(&mut asm, &l, &mut hooks);
    asm.finish("reemitter")
}

/// Re-emits the gathered output vector as a host output: copies `out_buf`
/// into host registers `r0..` and executes `OUT` with the simulated width.
/// Clobbers `S_HOOK+12` and the low host registers.
pub fn emit_reemit_output(asm: &mut Asm, l: &SimLayout) {
    let cnt = l.s(S_HOOK + 12);
    let tmp = l.s(S_HOOK + 13);
    let top = asm.fresh("re_top");
    let done = asm.fresh("re_done");
    asm.movi(l.i(I_HOOK), l.out_buf);
    asm.movi(l.i(I_OUT), 0);
    asm.movr(cnt, l.s(S_OUTDIM));
    asm.label(&top);
    asm.jeq(cnt, l.bank.zero(), done.as_str());
    asm.loadi(tmp, l.i(I_HOOK));
    asm.storei(tmp, l.i(I_OUT));
    asm.inci(l.i(I_HOOK));
    asm.inci(l.i(I_OUT));
    asm.sub(cnt, l.bank.one());
    asm.jmp(top.as_str());
    asm.label(&done);
    // Width into a host index register by counting.
    let wtop = asm.fresh("re_wtop");
    let wdone = asm.fresh("re_wdone");
    asm.movi(l.i(I_OUT), 0);
    asm.movr(cnt, l.s(S_OUTDIM));
    asm.label(&wtop);
    asm.jeq(cnt, l.bank.zero(), wdone.as_str());
    asm.inci(l.i(I_OUT));
    asm.sub(cnt, l.bank.one());
    asm.jmp(wtop.as_str());
    asm.label(&wdone);
    asm.out_reg(l.i(I_OUT));
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_bss, run_strong, RunOutcome};
    use crate::machine::{encode_machine, parse_program};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn rs(list: &[&str]) -> Vec<Rational> {
        list.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn halting_flag_accepts_halting_machine() {
        let target = parse_program("main:\n  OUT 1\n  HALT").unwrap();
        let code = encode_machine(&target);
        let flag = halting_flag();
        let mut input = vec![code.to_rational()];
        input.push(r("5"));
        match run_bss(&flag, &input, 200_000) {
            RunOutcome::Terminated(v) => assert_eq!(v, rs(&["1"])),
            other => panic!("expected termination, got {other:?}"),
        }
    }

    #[test]
    fn halting_flag_diverges_on_loop() {
        let target = parse_program("loop:\n  JMP loop").unwrap();
        let code = encode_machine(&target);
        let flag = halting_flag();
        let outcome = run_bss(&flag, &[code.to_rational()], 200_000);
        assert!(matches!(outcome, RunOutcome::Diverged { .. }), "{outcome:?}");
    }

    #[test]
    fn simulated_division_by_zero_diverges_the_simulation() {
        let target = parse_program("main:\n  DIV r0 r1\n  HALT").unwrap();
        let code = encode_machine(&target);
        let flag = halting_flag();
        // r1 of the simulated machine is zero: the simulated step is
        // singular, so the simulation must run forever, not abort.
        let outcome = run_bss(&flag, &[code.to_rational(), r("3")], 200_000);
        assert!(matches!(outcome, RunOutcome::Diverged { .. }), "{outcome:?}");
    }

    #[test]
    fn cohalting_flag_emits_ones_then_alternates() {
        let halting = parse_program("main:\n  HALT").unwrap();
        let code = encode_machine(&halting);
        let flag = cohalting_flag();
        let s = run_strong(&flag, &[code.to_rational()], 12, 2_000_000);
        assert_eq!(s.vectors.len(), 12);
        // Tail alternates 0, 1 after the simulated halt (in some phase).
        let scalars: Vec<Rational> = s.vectors.iter().map(|v| v[0].clone()).collect();
        let tail = &scalars[scalars.len() - 4..];
        for w in tail.windows(2) {
            assert_ne!(w[0], w[1], "tail must alternate: {tail:?}");
        }
        assert!(tail.iter().all(|v| v == &r("0") || v == &r("1")));
        // A looping machine gives all ones.
        let looping = parse_program("loop:\n  JMP loop").unwrap();
        let s = run_strong(&flag, &[encode_machine(&looping).to_rational()], 8, 2_000_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("1")));
    }

    // The strongest check of the interpreter: for a battery of small
    // machines, the reemitter driven by the machine's code must reproduce
    // the direct output stream exactly.
    #[test]
    fn reemitter_matches_direct_execution() {
        let cases: Vec<(&str, Vec<Vec<Rational>>)> = vec![
            (
                // Arithmetic and copies.
                ".const c0 = 22/7\nmain:\n  SETC r1 c0\n  ADD r0 r1\n  MUL r0 r0\n  MOVR r2 r0\n  SUB r2 r1\n  OUT 3\n  HALT",
                vec![rs(&["1/3"])],
            ),
            (
                // A loop emitting partial sums 1, 3/2, 7/4, ... (5 entries).
                ".const c0 = 1\n.const c1 = 1/2\n.const c2 = 5\nmain:\n  SETC r1 c0\n  SETC r2 c1\n  SETC r3 c2\n  MOVR r4 r1\nloop:\n  ADD r0 r4\n  OUT 1\n  MUL r4 r2\n  SETC r5 c0\n  ADD r6 r5\n  JLT r6 r3 loop\n  HALT",
                vec![vec![]],
            ),
            (
                // Indirect addressing: write input to R[7], read it back.
                "main:\n  MOVI i1 7\n  STOREI r0 i1\n  LOADI r2 i1\n  MOVR r0 r2\n  OUT 1\n  HALT",
                vec![rs(&["9/4"])],
            ),
            (
                // Index register dance plus OUT with register dimension.
                "main:\n  MOVI i1 3\n  MOVI i2 i1\n  DECI i2\n  INCI i1\n  OUT i2\n  HALT",
                vec![rs(&["1/2", "2/3", "-5"])],
            ),
            (
                // Branching both ways.
                ".const c0 = 1\nmain:\n  JLT r0 r1 less\n  SETC r2 c0\n  OUT 3\n  HALT\nless:\n  OUT 2\n  HALT",
                vec![rs(&["2", "1"]), rs(&["1", "2"])],
            ),
        ];
        for (src, inputs) in cases {
            let target = parse_program(src).unwrap();
            let code = encode_machine(&target);
            let sim = reemitter(&code);
            for input in inputs {
                let direct = run_strong(&target, &input, 64, 100_000);
                let simulated = run_strong(&sim, &input, 64, 20_000_000);
                assert_eq!(
                    direct.vectors, simulated.vectors,
                    "stream mismatch for {src:?} on {input:?}"
                );
                assert_eq!(direct.exhausted_budget, false);
                assert_eq!(simulated.exhausted_budget, false);
            }
        }
    }

    #[test]
    fn norm_searcher_halts_exactly_on_exceedance() {
        // Emits 1, 2, 3, ...: exceeds any bound eventually.
        let growing = parse_program(
            ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  ADD r0 r1\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let searcher = norm_exceedance_searcher(&encode_machine(&growing));
        for n in ["1", "3"] {
            let outcome = run_bss(&searcher, &rs(&[n]), 4_000_000);
            assert!(outcome.terminated(), "bound {n}: {outcome:?}");
        }
        // Constant 1s never exceed bound 1 (strictness), so no halt.
        let ones = parse_program(
            ".const c0 = 1\nmain:\n  SETC r0 c0\nloop:\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let searcher = norm_exceedance_searcher(&encode_machine(&ones));
        let outcome = run_bss(&searcher, &rs(&["1"]), 500_000);
        assert!(matches!(outcome, RunOutcome::Diverged { .. }), "{outcome:?}");
        // A machine that halts with no output: the searcher runs forever.
        let silent = parse_program("main:\n  HALT").unwrap();
        let searcher = norm_exceedance_searcher(&encode_machine(&silent));
        let outcome = run_bss(&searcher, &rs(&["1"]), 200_000);
        assert!(matches!(outcome, RunOutcome::Diverged { .. }), "{outcome:?}");
    }

    #[test]
    fn negative_values_count_in_the_norm() {
        // Emits -1, -2, -3, ...
        let falling = parse_program(
            ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  SUB r0 r1\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let searcher = norm_exceedance_searcher(&encode_machine(&falling));
        let outcome = run_bss(&searcher, &rs(&["2"]), 4_000_000);
        assert!(outcome.terminated(), "{outcome:?}");
    }
}
