//! Quantifier-reduction generators: machines whose output boundedness or
//! convergence mirrors the truth of an integer-quantified formula over a
//! decidable relation, plus the rectangle-enumeration machine that reduces
//! membership in a countable union of closed sets to boundedness.

use crate::exact::Rational;
use crate::machine::{encode_machine, Asm, Cond, Program};

use super::unisim::{self, ConstBank, SimHooks, SimLayout, I_CUR, S_CODE, S_HOOK, S_OUTDIM};

const D_BASE: u32 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantifierShape {
    /// Exists-forall: `∃y ∀z: (x, y, z) ∈ W`.
    Sigma2,
    /// Exists-forall-exists: `∃u ∀v ∃w: (x, u, v, w) ∈ W`.
    Sigma3,
}

/// A total decider for the relation behind a quantified formula: the
/// program must halt on every tested tuple (integer arguments are passed as
/// rationals with denominator 1) and its last output's first entry is the
/// 0/1 decision.
#[derive(Debug, Clone)]
pub struct DeciderSpec {
    pub program: Program,
    pub shape: QuantifierShape,
}

impl DeciderSpec {
    pub fn sigma2(program: Program) -> Self {
        DeciderSpec { program, shape: QuantifierShape::Sigma2 }
    }

    pub fn sigma3(program: Program) -> Self {
        DeciderSpec { program, shape: QuantifierShape::Sigma3 }
    }
}

fn k_consts(a: &mut Asm) -> (u32, u32, u32) {
    let (zero, one, half) = (690, 691, 693);
    a.set_const_value(zero, Rational::zero());
    a.set_const_value(one, Rational::one());
    a.set_const_value(half, Rational::ratio(1, 2));
    (zero, one, half)
}

/// Emits the shared decider-invocation machinery: decoding the relation
/// program once and a callable block that runs it on the saved input plus
/// `extra` appended arguments, leaving the 0/1 decision in `dec`.
///
/// The returned label starts the block; the block expects the extra
/// argument values already stored after the saved inputs and the total
/// count in the layout's feed scalar, and jumps to `done` with the decision
/// in `dec` when the decider halts.
struct DeciderCall {
    entry: String,
    done: String,
}

fn emit_decider_call(
    a: &mut Asm,
    l: &SimLayout,
    dec: u32,
    zero: u32,
    one: u32,
) -> DeciderCall {
    let entry = a.fresh("wcall");
    let done = a.fresh("wdone");
    let skip = a.fresh("wskip");
    a.jmp(skip.as_str());
    a.label(&entry);
    unisim::emit_reset_run(a, l);
    unisim::emit_feed_saved_inputs(a, l, S_HOOK + 15);
    a.movr(dec, zero);
    let mut hooks = SimHooks::silent();
    let stuck_name = format!("{}_stuck", l.tag);
    hooks.on_output = Box::new({
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            // The decision is the last scalar output before the halt.
            a.if_then(Cond::Ne(l.s(S_OUTDIM), one), |a| a.jmp(stuck_name.as_str()));
            a.movi(l.i(I_CUR), l.out_buf);
            a.loadi(dec, l.i(I_CUR));
        }
    });
    hooks.on_halt = Box::new({
        let done = done.clone();
        move |a: &mut Asm, _l: &SimLayout| {
            a.jmp(done.as_str());
        }
    });
    unisim::emit_interp(a, l, &mut hooks);
    a.label(&skip);
    DeciderCall { entry, done }
}

/// Writes `value_reg` into the input-save area at position `pos_reg` (both
/// scalars), for appending quantifier arguments after the saved `x`.
fn emit_store_extra_input(a: &mut Asm, l: &SimLayout, pos_reg: u32, value_reg: u32, one: u32) {
    let scratch = l.s(S_HOOK + 13);
    a.movi(l.i(I_CUR), l.input_save);
    a.movr(scratch, pos_reg);
    a.while_do(Cond::Ge(scratch, one), |a| {
        a.inci(l.i(I_CUR));
        a.sub(scratch, one);
    });
    a.storei(value_reg, l.i(I_CUR));
}

/// Boundedness generator: the emitted machine searches, for
/// `y = 1, 2, ...`, a `z` with `(x, y, z)` outside the relation; each found
/// `z` prints `y` and restarts with `y + 1`, while a `y` whose inner search
/// never ends produces no further output. The output sequence is bounded
/// exactly when `∃y ∀z: (x, y, z) ∈ W` holds (a finite sequence counts as
/// bounded).
pub fn sigma2_to_boundedness(w: &DeciderSpec) -> Program {
    assert_eq!(w.shape, QuantifierShape::Sigma2, "needs a two-quantifier decider");
    let code = encode_machine(&w.program);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, _half) = k_consts(&mut a);
    let code_slot = a.konst(code.to_rational());

    let xcnt = S_HOOK + 14;
    let feed_cnt = S_HOOK + 15;
    let y = D_BASE;
    let z = D_BASE + 1;
    let dec = D_BASE + 2;
    let pos = D_BASE + 3;

    unisim::emit_discover_dim(&mut a, &l, xcnt);
    unisim::emit_save_inputs(&mut a, &l, 0, xcnt);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);
    let call = emit_decider_call(&mut a, &l, dec, zero, one);

    a.movr(y, one);
    let loop_y = a.fresh("s2_y");
    let loop_z = a.fresh("s2_z");
    a.label(&loop_y);
    a.movr(z, one);
    a.label(&loop_z);
    // Append y and z after the saved x and invoke the decider.
    a.movr(pos, l.s(xcnt));
    emit_store_extra_input(&mut a, &l, pos, y, one);
    a.add(pos, one);
    emit_store_extra_input(&mut a, &l, pos, z, one);
    a.movr(l.s(feed_cnt), l.s(xcnt));
    a.add(l.s(feed_cnt), one);
    a.add(l.s(feed_cnt), one);
    a.jmp(call.entry.as_str());
    a.label(&call.done);
    a.if_else(
        Cond::Eq(dec, zero),
        |a| {
            // (x, y, z) outside the relation: print y, restart with y + 1.
            a.movr(0, y);
            a.out_imm(1);
            a.add(y, one);
            a.jmp(loop_y.as_str());
        },
        |a| {
            a.add(z, one);
            a.jmp(loop_z.as_str());
        },
    );
    a.finish("sigma2_boundedness")
}

/// Non-convergence generator: dovetails, for each `u`, the subprocess
/// "for `w = 1, 2, ...` print `0`; when `(x, u, v, w)` is in the relation
/// print `2^-u`, bump `v`, restart `w`". The merged stream emits `2^-u`
/// beyond every index exactly when `∃u ∀v ∃w` holds, and converges to `0`
/// otherwise. Subprocess `u` advances one step whenever the diagonal weight
/// reaches it, so every subprocess runs infinitely often.
pub fn sigma3_to_nonconvergence(w: &DeciderSpec) -> Program {
    assert_eq!(w.shape, QuantifierShape::Sigma3, "needs a three-quantifier decider");
    const STATE: i64 = 14_000; // per-u records [v, w, 2^-u], stride 3
    let code = encode_machine(&w.program);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, half) = k_consts(&mut a);
    let code_slot = a.konst(code.to_rational());

    let xcnt = S_HOOK + 14;
    let feed_cnt = S_HOOK + 15;
    let t = D_BASE;
    let u = D_BASE + 1;
    let v = D_BASE + 2;
    let wreg = D_BASE + 3;
    let val = D_BASE + 4;
    let dec = D_BASE + 5;
    let pos = D_BASE + 6;
    let scratch = D_BASE + 7;

    unisim::emit_discover_dim(&mut a, &l, xcnt);
    unisim::emit_save_inputs(&mut a, &l, 0, xcnt);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);
    let call = emit_decider_call(&mut a, &l, dec, zero, one);

    // Positions the scratch cursor at the record for the current u.
    let seek_state = |a: &mut Asm, l: &SimLayout, u: u32, scratch: u32, one: u32| {
        a.movi(l.i(unisim::I_SCRATCH), STATE);
        a.movr(scratch, u);
        a.sub(scratch, one);
        a.while_do(Cond::Ge(scratch, one), |a| {
            for _ in 0..3 {
                a.inci(l.i(unisim::I_SCRATCH));
            }
            a.sub(scratch, one);
        });
    };

    a.movr(t, one);
    a.add(t, one);
    let loop_t = a.fresh("s3_t");
    let loop_u = a.fresh("s3_u");
    let after_u = a.fresh("s3_after");
    a.label(&loop_t);
    a.movr(u, one);
    a.label(&loop_u);
    // Load (v, w, val); v = 0 means this subprocess has not started yet.
    seek_state(&mut a, &l, u, scratch, one);
    a.loadi(v, l.i(unisim::I_SCRATCH));
    a.inci(l.i(unisim::I_SCRATCH));
    a.loadi(wreg, l.i(unisim::I_SCRATCH));
    a.inci(l.i(unisim::I_SCRATCH));
    a.loadi(val, l.i(unisim::I_SCRATCH));
    a.if_then(Cond::Eq(v, zero), |a| {
        a.movr(v, one);
        a.movr(wreg, one);
        a.movr(val, one);
        a.movr(scratch, u);
        a.while_do(Cond::Ge(scratch, one), |a| {
            a.mul(val, half);
            a.sub(scratch, one);
        });
    });
    // One subprocess step: a zero first, then the membership test.
    a.movr(0, zero);
    a.out_imm(1);
    a.movr(pos, l.s(xcnt));
    emit_store_extra_input(&mut a, &l, pos, u, one);
    a.add(pos, one);
    emit_store_extra_input(&mut a, &l, pos, v, one);
    a.add(pos, one);
    emit_store_extra_input(&mut a, &l, pos, wreg, one);
    a.movr(l.s(feed_cnt), l.s(xcnt));
    for _ in 0..3 {
        a.add(l.s(feed_cnt), one);
    }
    a.jmp(call.entry.as_str());
    a.label(&call.done);
    a.if_else(
        Cond::Eq(dec, one),
        |a| {
            a.movr(0, val);
            a.out_imm(1);
            a.add(v, one);
            a.movr(wreg, one);
        },
        |a| {
            a.add(wreg, one);
        },
    );
    // Store the state back and advance the diagonal.
    seek_state(&mut a, &l, u, scratch, one);
    a.storei(v, l.i(unisim::I_SCRATCH));
    a.inci(l.i(unisim::I_SCRATCH));
    a.storei(wreg, l.i(unisim::I_SCRATCH));
    a.inci(l.i(unisim::I_SCRATCH));
    a.storei(val, l.i(unisim::I_SCRATCH));
    a.add(u, one);
    a.if_then(Cond::Lt(u, t), |a| a.jmp(loop_u.as_str()));
    a.label(&after_u);
    a.add(t, one);
    a.jmp(loop_t.as_str());
    a.finish("sigma3_nonconvergence")
}

/// An open axis-aligned rectangle with rational corners.
#[derive(Debug, Clone)]
pub struct Rectangle {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

/// For each stage `j`, the rectangles whose union is the complement of the
/// `j`-th closed set. A finite list stands in for the enumeration: the
/// emitted machine recycles it forever, so membership behavior is exact as
/// long as every needed witness rectangle is listed.
#[derive(Debug, Clone)]
pub struct RectangleFamily {
    pub dim: usize,
    pub stages: Vec<Vec<Rectangle>>,
}

/// The weak semidecision generator: at stage `j` the machine scans the
/// `j`-th rectangle list, printing the stage number after every containment
/// check, and advances to stage `j + 1` once a rectangle contains `x`. The
/// output stays bounded exactly when `x` lies in one of the closed sets
/// (it then never escapes that stage); past the last declared stage the
/// machine prints ever-growing stage numbers.
pub fn sigma2_to_weak_semidecision(family: &RectangleFamily) -> Program {
    let mut a = Asm::new();
    let (zero, one, _half) = k_consts(&mut a);
    let _ = zero;
    let stage_val = D_BASE;
    let cmp = D_BASE + 1;

    let beyond = a.fresh("rect_beyond");
    let stage_labels: Vec<String> =
        (0..family.stages.len()).map(|j| a.fresh(&format!("stage{}", j + 1))).collect();
    for (j, rects) in family.stages.iter().enumerate() {
        a.label(&stage_labels[j]);
        a.set_const_value(stage_val, Rational::from_int(j as i64 + 1));
        let next: &str = if j + 1 < family.stages.len() { &stage_labels[j + 1] } else { &beyond };
        let cycle = a.fresh(&format!("cycle{}", j + 1));
        a.label(&cycle);
        for rect in rects {
            assert_eq!(rect.lo.len(), family.dim);
            assert_eq!(rect.hi.len(), family.dim);
            let miss = a.fresh("miss");
            for (i, (lo, hi)) in rect.lo.iter().zip(&rect.hi).enumerate() {
                // Inside means lo_i < x_i < hi_i, strictly.
                let lo_ok = a.fresh("lo_ok");
                a.set_const_value(cmp, lo.clone());
                a.jlt(cmp, i as u32, lo_ok.as_str());
                a.jmp(miss.as_str());
                a.label(&lo_ok);
                let hi_ok = a.fresh("hi_ok");
                a.set_const_value(cmp, hi.clone());
                a.jlt(i as u32, cmp, hi_ok.as_str());
                a.jmp(miss.as_str());
                a.label(&hi_ok);
            }
            // Contained: report this check, then move to the next stage.
            a.movr(0, stage_val);
            a.out_imm(1);
            a.jmp(next);
            a.label(&miss);
            a.movr(0, stage_val);
            a.out_imm(1);
        }
        if rects.is_empty() {
            // The whole space is the closed set: the stage never ends.
            a.movr(0, stage_val);
            a.out_imm(1);
        }
        a.jmp(cycle.as_str());
    }
    if family.stages.is_empty() {
        a.jmp(beyond.as_str());
    }
    // Past the declared stages: every number is reached and printed.
    a.label(&beyond);
    a.movr(cmp, Rational::from_int(family.stages.len() as i64 + 1).into_raw_reg(&mut a));
    a.finish("unreachable")
}

trait IntoRawReg {
    fn into_raw_reg(self, a: &mut Asm) -> u32;
}
