//! The limit-lemma constructions and their relatives: turning weak machines
//! into strong oracle machines and back, the characteristic-function
//! bridge, and the Cauchy transform. Every transformer emits a real program
//! in the assembly language; the two limit-lemma directions embed the
//! target's Gödel code in the emitted constant table and drive the
//! universal simulator on it.
//!
//! These constructions handle scalar output streams (a simulated output of
//! any other width is treated as a singular step).

use crate::exact::Rational;
use crate::machine::{encode_machine, Asm, Cond, Program};

use super::unisim::{
    self, ConstBank, SimHooks, SimLayout, I_CUR, I_OUT, I_SCRATCH, S_BUDGET, S_CODE, S_HOOK,
    S_OUTDIM, S_QCODE, S_QLEN, S_SPC,
};

// Register conventions shared by the drivers in this module: driver state
// lives in r600.., well clear of both interpreter instances' banks, and
// driver record areas start at 10_000, between the outer instance's fixed
// areas and the inner instance's.
const YREC: i64 = 10_000;
const D_BASE: u32 = 600;

fn k_consts(a: &mut Asm) -> (u32, u32, u32, u32) {
    let (zero, one, two, half) = (690, 691, 692, 693);
    a.set_const_value(zero, Rational::zero());
    a.set_const_value(one, Rational::one());
    a.set_const_value(two, Rational::from_int(2));
    a.set_const_value(half, Rational::ratio(1, 2));
    (zero, one, two, half)
}

/// `dst_ireg := area + value` by counting down a copy of the scalar value.
fn emit_area_addr(a: &mut Asm, area: i64, dst_ireg: u32, value_reg: u32, scratch: u32, zero: u32, one: u32) {
    a.movi(dst_ireg, area);
    a.movr(scratch, value_reg);
    a.while_do(Cond::Ge(scratch, one), |a| {
        a.inci(dst_ireg);
        a.sub(scratch, one);
    });
    let _ = zero;
}

/// Requires the gathered simulated output to be scalar, diverting to the
/// sink otherwise.
fn emit_require_scalar_output(a: &mut Asm, l: &SimLayout, one: u32, stuck: &str) {
    a.if_then(Cond::Ne(l.s(S_OUTDIM), one), |a| {
        a.jmp(stuck);
    });
}

/// Runs the coded characteristic-function machine until its second output
/// and decides membership from it: `1` when `y_2 > 1/2`, else `0`. The
/// second entry of a strong stream for a 0/1 value pins the value down.
pub fn strong_charfn_to_decider(p: &Program) -> Program {
    let code = encode_machine(p);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, two, half) = k_consts(&mut a);
    let cnt = D_BASE;
    let code_slot = a.konst(code.to_rational());

    unisim::emit_discover_dim(&mut a, &l, S_HOOK + 14);
    unisim::emit_save_inputs(&mut a, &l, 0, S_HOOK + 14);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);
    unisim::emit_feed_saved_inputs(&mut a, &l, S_HOOK + 14);
    a.movr(cnt, zero);

    let decide = "decide".to_string();
    let stuck_name = format!("{}_stuck", l.tag);
    let mut hooks = SimHooks::silent();
    hooks.on_output = Box::new({
        let decide = decide.clone();
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            emit_require_scalar_output(a, l, one, &stuck_name);
            a.add(cnt, one);
            a.movi(l.i(I_CUR), l.out_buf);
            a.loadi(l.s(S_HOOK), l.i(I_CUR));
            a.if_then(Cond::Ge(cnt, two), |a| {
                a.jmp(decide.as_str());
            });
        }
    });
    emit_interp(&mut a, &l, &mut hooks);
    a.label(&decide);
    a.if_else(
        Cond::Lt(half, l.s(S_HOOK)),
        |a| {
            a.movr(0, one);
        },
        |a| {
            a.movr(0, zero);
        },
    );
    a.out_imm(1);
    a.halt();
    a.finish("charfn_decider")
}

// Local alias so the builders in this module read uniformly.
fn emit_interp(a: &mut Asm, l: &SimLayout, hooks: &mut SimHooks<'_>) -> unisim::SimBlock {
    unisim::emit_interp(a, l, hooks)
}

/// Replays the coded machine's scalar outputs and emits `|y_n - y_m|` in
/// diagonal pairing order (all pairs of total weight `n + m`, ordered by
/// first coordinate): the transformed stream converges to zero exactly when
/// the original stream is Cauchy. Halts when the original halts.
pub fn cauchy_transform(p: &Program) -> Program {
    let code = encode_machine(p);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, _two, _half) = k_consts(&mut a);
    let code_slot = a.konst(code.to_rational());
    // Driver registers.
    let count = D_BASE; // outputs seen so far
    let n_walk = D_BASE + 1;
    let lo_val = D_BASE + 2;
    let hi_val = D_BASE + 3;
    let diff = D_BASE + 4;
    let scratch = D_BASE + 5;

    unisim::emit_discover_dim(&mut a, &l, S_HOOK + 14);
    unisim::emit_save_inputs(&mut a, &l, 0, S_HOOK + 14);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);
    unisim::emit_feed_saved_inputs(&mut a, &l, S_HOOK + 14);
    a.movr(count, zero);

    let stuck_name = format!("{}_stuck", l.tag);
    let mut hooks = SimHooks::silent();
    hooks.on_halt = Box::new(|a: &mut Asm, _l: &SimLayout| {
        a.halt();
    });
    hooks.on_output = Box::new({
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            emit_require_scalar_output(a, l, one, &stuck_name);
            // Store y_j at YREC + j.
            a.add(count, one);
            a.movi(l.i(I_CUR), l.out_buf);
            a.loadi(scratch, l.i(I_CUR));
            emit_area_addr(a, YREC, l.i(I_OUT), count, l.s(S_HOOK + 13), zero, one);
            a.storei(scratch, l.i(I_OUT));
            // Drain the diagonal n + m = j + 1: pairs (1, j) .. (j, 1),
            // walked with two cursors meeting in the middle.
            emit_area_addr(a, YREC + 1, l.i(I_SCRATCH), zero, l.s(S_HOOK + 13), zero, one);
            emit_area_addr(a, YREC, l.i(I_OUT), count, l.s(S_HOOK + 13), zero, one);
            a.movr(n_walk, count);
            a.while_do(Cond::Ge(n_walk, one), |a| {
                a.loadi(lo_val, l.i(I_SCRATCH));
                a.loadi(hi_val, l.i(I_OUT));
                a.movr(diff, lo_val);
                a.sub(diff, hi_val);
                a.if_then(Cond::Lt(diff, zero), |a| {
                    a.movr(scratch, zero);
                    a.sub(scratch, diff);
                    a.movr(diff, scratch);
                });
                a.movr(0, diff);
                a.out_imm(1);
                a.inci(l.i(I_SCRATCH));
                a.deci(l.i(I_OUT));
                a.sub(n_walk, one);
            });
        }
    });
    emit_interp(&mut a, &l, &mut hooks);
    a.finish("cauchy_transform")
}

/// The counterexample searcher behind [`weak_to_strong`]: on input
/// `(K, k, x..)` it simulates the coded machine on `x` and halts exactly
/// when it finds an index `m > K` with `|y_K - y_m| > 2^-k + 2^-m`. If no
/// counterexample exists (in particular when the stream is finite), it runs
/// forever. Certifying "no counterexample" forces `y_K` within `2^-k` of
/// the limit, so the certified subsequence is pairwise strongly valid.
pub fn weak_to_strong_searcher(p: &Program) -> Program {
    let code = encode_machine(p);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, _two, half) = k_consts(&mut a);
    let code_slot = a.konst(code.to_rational());

    let big_k = D_BASE; // index K under test
    let pw_k = D_BASE + 1; // 2^-k
    let count = D_BASE + 2; // outputs seen
    let pw_out = D_BASE + 3; // 2^-count
    let y_k = D_BASE + 4; // y_K once known
    let have_yk = D_BASE + 5; // 0/1 flag
    let y_m = D_BASE + 8;
    let diff = D_BASE + 9;
    let bound = D_BASE + 10;
    let scratch = D_BASE + 11;

    // Input layout: r0 = K, r1 = k, r2.. = x.
    unisim::emit_discover_dim(&mut a, &l, S_HOOK + 14);
    a.sub(l.s(S_HOOK + 14), one);
    a.sub(l.s(S_HOOK + 14), one);
    a.movi(l.i(I_CUR), 0);
    a.loadi(big_k, l.i(I_CUR));
    a.inci(l.i(I_CUR));
    a.loadi(scratch, l.i(I_CUR)); // k
    a.movr(pw_k, one);
    a.while_do(Cond::Ge(scratch, one), |a| {
        a.mul(pw_k, half);
        a.sub(scratch, one);
    });
    unisim::emit_save_inputs(&mut a, &l, 2, S_HOOK + 14);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);
    unisim::emit_feed_saved_inputs(&mut a, &l, S_HOOK + 14);
    a.movr(count, zero);
    a.movr(pw_out, one);
    a.movr(have_yk, zero);

    let found = "found".to_string();
    let stuck_name = format!("{}_stuck", l.tag);
    let mut hooks = SimHooks::silent();
    hooks.on_output = Box::new({
        let found = found.clone();
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            emit_require_scalar_output(a, l, one, &stuck_name);
            a.add(count, one);
            a.mul(pw_out, half);
            a.movi(l.i(I_CUR), l.out_buf);
            a.loadi(scratch, l.i(I_CUR));
            a.if_then(Cond::Eq(count, big_k), |a| {
                a.movr(y_k, scratch);
                a.movr(have_yk, one);
            });
            // Each output beyond K forms a candidate pair (K, count).
            a.if_then(Cond::Eq(have_yk, one), |a| {
                a.if_then(Cond::Lt(big_k, count), |a| {
                    a.movr(diff, y_k);
                    a.sub(diff, scratch);
                    a.if_then(Cond::Lt(diff, zero), |a| {
                        a.movr(y_m, zero);
                        a.sub(y_m, diff);
                        a.movr(diff, y_m);
                    });
                    a.movr(bound, pw_k);
                    a.add(bound, pw_out);
                    a.if_then(Cond::Lt(bound, diff), |a| a.jmp(found.as_str()));
                });
            });
        }
    });
    emit_interp(&mut a, &l, &mut hooks);
    a.label(&found);
    a.halt();
    a.finish("weak_to_strong_searcher")
}

/// Limit lemma, backward direction: from a weakly analytic machine to a
/// strongly analytic machine with halting-set queries. For `k = 1, 2, ...`
/// the emitted machine searches for an index `K` such that the oracle
/// certifies "no counterexample to `|y_K - y_m| <= 2^-k + 2^-m` exists"
/// (asking whether the counterexample searcher halts on `(K, k, x)`), then
/// simulates the original machine far enough to print that `y_K`. A finite
/// input stream yields finite output.
pub fn weak_to_strong(p: &Program) -> Program {
    let searcher_code = encode_machine(&weak_to_strong_searcher(p));
    let code = encode_machine(p);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let l = SimLayout::outer(bank);
    let (zero, one, _two, _half) = k_consts(&mut a);
    let code_slot = a.konst(code.to_rational());
    let searcher_slot = a.konst(searcher_code.to_rational());

    let big_k = D_BASE;
    let small_k = D_BASE + 1;
    let count = D_BASE + 2;
    let scratch = D_BASE + 3;

    unisim::emit_discover_dim(&mut a, &l, S_HOOK + 14);
    unisim::emit_save_inputs(&mut a, &l, 0, S_HOOK + 14);
    a.setc(l.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &l);
    unisim::emit_interp_init(&mut a, &l);

    a.movr(small_k, one);
    let loop_k = "loop_k".to_string();
    let loop_cap = "loop_cap".to_string();
    let certified = "certified".to_string();
    let emitted = "emitted".to_string();
    a.label(&loop_k);
    a.movr(big_k, one);
    a.label(&loop_cap);
    {
        // Query input (K, k, x..) assembled in r1..; answer lands in r0.
        a.movr(1, big_k);
        a.movr(2, small_k);
        a.movi(l.i(I_CUR), 3);
        a.movi(l.i(I_SCRATCH), l.input_save);
        a.movr(scratch, l.s(S_HOOK + 14));
        a.while_do(Cond::Ge(scratch, one), |a| {
            a.loadi(l.s(S_HOOK + 13), l.i(I_SCRATCH));
            a.storei(l.s(S_HOOK + 13), l.i(I_CUR));
            a.inci(l.i(I_CUR));
            a.inci(l.i(I_SCRATCH));
            a.sub(scratch, one);
        });
        // Length 2 + |x| into an index register by counting.
        a.movr(scratch, l.s(S_HOOK + 14));
        a.add(scratch, one);
        a.add(scratch, one);
        a.movi(l.i(I_OUT), 0);
        a.while_do(Cond::Ge(scratch, one), |a| {
            a.inci(l.i(I_OUT));
            a.sub(scratch, one);
        });
        a.qry_const(searcher_slot, 1, l.i(I_OUT));
        a.jeq(0, zero, certified.as_str());
        a.add(big_k, one);
        a.jmp(loop_cap.as_str());
    }
    a.label(&certified);
    // Simulate the weak machine until its K-th output and print it.
    unisim::emit_reset_run(&mut a, &l);
    unisim::emit_feed_saved_inputs(&mut a, &l, S_HOOK + 14);
    a.movr(count, zero);
    let stuck_name = format!("{}_stuck", l.tag);
    let mut hooks = SimHooks::silent();
    hooks.on_output = Box::new({
        let emitted = emitted.clone();
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            emit_require_scalar_output(a, l, one, &stuck_name);
            a.add(count, one);
            a.if_then(Cond::Eq(count, big_k), |a| {
                a.movi(l.i(I_CUR), l.out_buf);
                a.loadi(scratch, l.i(I_CUR));
                a.movr(0, scratch);
                a.out_imm(1);
                a.jmp(emitted.as_str());
            });
        }
    });
    emit_interp(&mut a, &l, &mut hooks);
    a.label(&emitted);
    a.add(small_k, one);
    a.jmp(loop_k.as_str());
    a.finish("weak_to_strong")
}

/// Limit lemma, forward direction: simulates a strongly analytic oracle
/// machine as a weakly analytic machine with no oracle. At level
/// `n = 1, 2, ...` the coded machine is rerun from scratch with every
/// oracle query answered by a nested bounded simulation (budget `m`,
/// starting at `n`); if the collected outputs `y_1 .. y_n` violate the
/// pairwise strong condition, or fewer than `n` outputs appear within the
/// step budget, `m` is doubled and the level retried. Each level emits one
/// value, and from the level where every relevant query is answered
/// correctly onward the emitted values coincide with the true stream.
pub fn strong_oracle_to_weak(p: &Program) -> Program {
    let code = encode_machine(p);
    let mut a = Asm::new();
    let bank = ConstBank::emit(&mut a, 50);
    let outer = SimLayout::outer(bank);
    let inner = SimLayout::inner(bank);
    let (zero, one, two, half) = k_consts(&mut a);
    let sixty_four = 694;
    a.set_const_value(sixty_four, Rational::from_int(64));
    let code_slot = a.konst(code.to_rational());

    let level = D_BASE; // n
    let m_budget = D_BASE + 1; // query-simulation budget m
    let ycount = D_BASE + 2;
    let i_walk = D_BASE + 3;
    let j_walk = D_BASE + 4;
    let pw_i = D_BASE + 5;
    let pw_j = D_BASE + 6;
    let y_i = D_BASE + 7;
    let y_j = D_BASE + 8;
    let diff = D_BASE + 9;
    let bound = D_BASE + 10;
    let scratch = D_BASE + 11;
    let ans = D_BASE + 12;

    unisim::emit_discover_dim(&mut a, &outer, S_HOOK + 14);
    unisim::emit_save_inputs(&mut a, &outer, 0, S_HOOK + 14);
    a.setc(outer.s(S_CODE), code_slot);
    unisim::emit_decode(&mut a, &outer);
    unisim::emit_interp_init(&mut a, &outer);
    unisim::emit_interp_init(&mut a, &inner);

    a.movr(level, one);
    a.movr(m_budget, one);
    let level_top = "level_top".to_string();
    let retry = "retry".to_string();
    let collected = "collected".to_string();
    let violated = "violated".to_string();
    let inner_entry = "inner_entry".to_string();
    let inner_no = "inner_no".to_string();
    let inner_yes = "inner_yes".to_string();
    let resume_outer = "resume_outer".to_string();
    let outer_fetch = format!("{}_fetch", outer.tag);

    a.label(&level_top);
    a.if_then(Cond::Lt(m_budget, level), |a| a.movr(m_budget, level));
    a.label(&retry);
    unisim::emit_reset_run(&mut a, &outer);
    unisim::emit_feed_saved_inputs(&mut a, &outer, S_HOOK + 14);
    a.movr(ycount, zero);
    // The outer run is bounded too (a wrong assumption can loop the
    // simulated machine, and growing m is the only way out), but gets a
    // generous factor so that the query budget m, not the outer step
    // budget, is what tracks the level.
    a.movr(outer.s(S_BUDGET), m_budget);
    a.mul(outer.s(S_BUDGET), sixty_four);
    a.jmp(outer_fetch.as_str());

    // Outer interpreter with its hooks.
    let stuck_name = format!("{}_stuck", outer.tag);
    let mut outer_hooks = SimHooks::silent();
    outer_hooks.budget_exhausted = Some(collected.clone());
    outer_hooks.on_halt = Box::new({
        let collected = collected.clone();
        move |a: &mut Asm, _l: &SimLayout| {
            a.jmp(collected.as_str());
        }
    });
    outer_hooks.on_output = Box::new({
        let collected = collected.clone();
        let stuck_name = stuck_name.clone();
        move |a: &mut Asm, l: &SimLayout| {
            emit_require_scalar_output(a, l, one, &stuck_name);
            a.add(ycount, one);
            a.movi(l.i(I_CUR), l.out_buf);
            a.loadi(scratch, l.i(I_CUR));
            emit_area_addr(a, YREC, l.i(I_OUT), ycount, l.s(S_HOOK + 13), zero, one);
            a.storei(scratch, l.i(I_OUT));
            a.if_then(Cond::Ge(ycount, level), |a| a.jmp(collected.as_str()));
        }
    });
    outer_hooks.on_qry = Some(Box::new({
        let inner_entry = inner_entry.clone();
        let inner = inner.clone();
        move |a: &mut Asm, l: &SimLayout| {
            // Hand the query to the nested simulator: code, inputs, count.
            a.movr(inner.s(S_CODE), l.s(S_QCODE));
            a.movr(inner.s(S_HOOK + 14), l.s(S_QLEN));
            a.movi(l.i(I_CUR), l.qry_buf);
            a.movi(l.i(I_SCRATCH), inner.input_save);
            a.movr(scratch, l.s(S_QLEN));
            a.while_do(Cond::Ge(scratch, one), |a| {
                a.loadi(l.s(S_HOOK + 13), l.i(I_CUR));
                a.storei(l.s(S_HOOK + 13), l.i(I_SCRATCH));
                a.inci(l.i(I_CUR));
                a.inci(l.i(I_SCRATCH));
                a.sub(scratch, one);
            });
            a.jmp(inner_entry.as_str());
        }
    }));
    emit_interp(&mut a, &outer, &mut outer_hooks);

    // Nested bounded simulation of one queried machine. Structural failures
    // of the queried code (or its own queries) count as "does not halt".
    a.label(&inner_entry);
    unisim::emit_reset_run(&mut a, &inner);
    // A structurally invalid query code sends the decoder to the inner
    // sink, which forwards to inner_no ("does not halt").
    unisim::emit_decode(&mut a, &inner);
    unisim::emit_feed_saved_inputs(&mut a, &inner, S_HOOK + 14);
    a.movr(inner.s(S_BUDGET), m_budget);
    let mut inner_hooks = SimHooks::silent();
    inner_hooks.budget_exhausted = Some(inner_no.clone());
    inner_hooks.stuck_override = Some(inner_no.clone());
    inner_hooks.on_halt = Box::new({
        let inner_yes = inner_yes.clone();
        move |a: &mut Asm, _l: &SimLayout| {
            a.jmp(inner_yes.as_str());
        }
    });
    emit_interp(&mut a, &inner, &mut inner_hooks);
    a.label(&inner_no);
    a.movr(ans, zero);
    a.jmp(resume_outer.as_str());
    a.label(&inner_yes);
    a.movr(ans, one);
    a.label(&resume_outer);
    // Stage the answer in the outer scratch bank, write it to the simulated
    // r0, step past the query instruction, and resume the outer run.
    a.movr(outer.s(S_HOOK), ans);
    unisim::emit_write_sim_r0(&mut a, &outer, S_HOOK);
    a.add(outer.s(S_SPC), one);
    a.jmp(outer_fetch.as_str());

    // Level collection: enough outputs and the pairwise condition, else
    // retry with doubled m.
    a.label(&collected);
    a.if_then(Cond::Lt(ycount, level), |a| a.jmp(violated.as_str()));
    a.movr(i_walk, zero);
    a.movr(pw_i, one);
    a.while_do(Cond::Lt(i_walk, level), |a| {
        a.add(i_walk, one);
        a.mul(pw_i, half);
        a.movr(j_walk, i_walk);
        a.movr(pw_j, pw_i);
        a.while_do(Cond::Lt(j_walk, level), |a| {
            a.add(j_walk, one);
            a.mul(pw_j, half);
            emit_area_addr(a, YREC, outer.i(I_OUT), i_walk, scratch, zero, one);
            a.loadi(y_i, outer.i(I_OUT));
            emit_area_addr(a, YREC, outer.i(I_OUT), j_walk, scratch, zero, one);
            a.loadi(y_j, outer.i(I_OUT));
            a.movr(diff, y_i);
            a.sub(diff, y_j);
            a.if_then(Cond::Lt(diff, zero), |a| {
                a.movr(y_i, zero);
                a.sub(y_i, diff);
                a.movr(diff, y_i);
            });
            a.movr(bound, pw_i);
            a.add(bound, pw_j);
            a.if_then(Cond::Lt(bound, diff), |a| a.jmp(violated.as_str()));
        });
    });
    // Emit y_level and advance.
    emit_area_addr(&mut a, YREC, outer.i(I_OUT), level, scratch, zero, one);
    a.loadi(0, outer.i(I_OUT));
    a.out_imm(1);
    a.add(level, one);
    a.jmp(level_top.as_str());

    a.label(&violated);
    a.mul(m_budget, two);
    a.jmp(retry.as_str());

    a.finish("strong_oracle_to_weak")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_bss, run_strong, run_weak_with, validate_strong, RunOutcome, StrongValidation};
    use crate::machine::parse_program;
    use crate::oracle::{OracleQuery, OracleSession};
    use std::collections::BTreeMap;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// chi_[0,1) as a strong printer: emits the characteristic value forever.
    fn chi_unit_printer() -> Program {
        parse_program(
            ".const c0 = 0\n.const c1 = 1\nchi:\n  SETC r1 c0\n  SETC r2 c1\n  JLT r0 r1 no\n  JLT r0 r2 yes\nno:\n  MOVR r0 r1\n  JMP emit\nyes:\n  MOVR r0 r2\nemit:\n  OUT 1\n  JMP emit",
        )
        .unwrap()
    }

    #[test]
    fn charfn_decider_examples() {
        let decider = strong_charfn_to_decider(&chi_unit_printer());
        for (x, want) in [("1/2", "1"), ("3/2", "0"), ("-1", "0"), ("0", "1")] {
            match run_bss(&decider, &[r(x)], 3_000_000) {
                RunOutcome::Terminated(v) => assert_eq!(v, vec![r(want)], "x = {x}"),
                other => panic!("decider diverged on {x}: {other:?}"),
            }
        }
        // A printer whose second entry is 7/8 decides membership: within
        // 1/4 of the characteristic value forces it to be 1.
        let printer = parse_program(
            ".const c0 = 7/8\nmain:\n  SETC r0 c0\nloop:\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let decider = strong_charfn_to_decider(&printer);
        match run_bss(&decider, &[r("0")], 3_000_000) {
            RunOutcome::Terminated(v) => assert_eq!(v, vec![r("1")]),
            other => panic!("{other:?}"),
        }
    }

    /// Emits 1/1, 1/2, 1/3, ... forever.
    fn harmonic_printer() -> Program {
        parse_program(
            ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  ADD r3 r1\n  SETC r0 c0\n  DIV r0 r3\n  OUT 1\n  JMP loop",
        )
        .unwrap()
    }

    /// Emits -1, 1, -1, 1, ...
    fn alternating_printer() -> Program {
        parse_program(
            ".const c0 = -1\n.const c1 = -1\nmain:\n  SETC r1 c0\n  SETC r0 c1\nloop:\n  MUL r0 r1\n  OUT 1\n  JMP loop",
        )
        .unwrap()
    }

    #[test]
    fn cauchy_transform_on_harmonic_sequence() {
        let t = cauchy_transform(&harmonic_printer());
        let s = run_strong(&t, &[], 20, 20_000_000);
        assert_eq!(s.vectors.len(), 20);
        // First 20 entries in diagonal order: pairs (1,1), (1,2), (2,1), ...
        let mut expect = Vec::new();
        'outer: for d in 2.. {
            for n in 1..d {
                let m = d - n;
                let yn = Rational::one().checked_div(&Rational::from_int(n)).unwrap();
                let ym = Rational::one().checked_div(&Rational::from_int(m)).unwrap();
                expect.push((&yn - &ym).abs());
                if expect.len() == 20 {
                    break 'outer;
                }
            }
        }
        let got: Vec<Rational> = s.vectors.iter().map(|v| v[0].clone()).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn cauchy_transform_classifies() {
        // Constant stream: all zero differences.
        let constant = parse_program(
            ".const c0 = 5\nmain:\n  SETC r0 c0\nloop:\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let t = cauchy_transform(&constant);
        let s = run_strong(&t, &[], 30, 20_000_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("0")));
        // Alternating stream: the value 2 keeps appearing.
        let t = cauchy_transform(&alternating_printer());
        let s = run_strong(&t, &[], 60, 20_000_000);
        let twos = s.vectors.iter().filter(|v| v[0] == r("2")).count();
        assert!(twos >= 10, "expected recurring 2s, saw {twos}");
    }

    /// Emits 1, 1/2, 1/4, ... (geometric toward 0).
    fn geometric_printer() -> Program {
        parse_program(
            ".const c0 = 1\n.const c1 = 1/2\nmain:\n  SETC r0 c0\n  SETC r1 c1\nloop:\n  OUT 1\n  MUL r0 r1\n  JMP loop",
        )
        .unwrap()
    }

    #[test]
    fn searcher_halts_exactly_on_counterexamples() {
        let searcher = weak_to_strong_searcher(&geometric_printer());
        // (K, k) = (1, 1): y_1 = 1 and y_3 = 1/4 differ by 3/4 > 1/2 + 1/8.
        let out = run_bss(&searcher, &[r("1"), r("1")], 20_000_000);
        assert!(out.terminated(), "{out:?}");
        // (K, k) = (2, 1): for m > 2, |y_2 - y_m| = 1/2 - 2^(1-m) stays
        // within 1/2 + 2^-m, so the searcher must not halt. (The budget is
        // moderate: the simulated registers hold 2^-m, whose bit size grows
        // with every simulated output.)
        let out = run_bss(&searcher, &[r("2"), r("1")], 300_000);
        assert!(matches!(out, RunOutcome::Diverged { .. }), "{out:?}");
    }

    /// Ground truth for the geometric stream y_i = 2^(1-i): does some
    /// m > K witness |y_K - y_m| > 2^-k + 2^-m? Checked exactly for
    /// m <= K + 200 plus the limit criterion |y_K - 0| > 2^-k (a large
    /// enough m then works).
    fn geometric_counterexample_exists(big_k: u64, k: u64) -> bool {
        let y = |i: u64| Rational::pow2(1 - (i as i64));
        let yk = y(big_k);
        for m in big_k + 1..=big_k + 200 {
            let bound = &Rational::pow2(-(k as i64)) + &Rational::pow2(-(m as i64));
            if (&yk - &y(m)).abs() > bound {
                return true;
            }
        }
        yk > Rational::pow2(-(k as i64))
    }

    fn table_for(
        searcher: &Program,
        truth: impl Fn(u64, u64) -> bool,
        k_max: u64,
        cap_max: u64,
    ) -> BTreeMap<OracleQuery, bool> {
        let code = encode_machine(searcher);
        let mut map = BTreeMap::new();
        for k in 1..=k_max {
            for cap in 1..=cap_max {
                map.insert(
                    OracleQuery {
                        machine_code: code.clone(),
                        input: vec![Rational::from_int(cap as i64), Rational::from_int(k as i64)],
                    },
                    truth(cap, k),
                );
            }
        }
        map
    }

    #[test]
    fn weak_to_strong_geometric_under_table_policy() {
        let p = geometric_printer();
        let searcher = weak_to_strong_searcher(&p);
        let table = table_for(&searcher, geometric_counterexample_exists, 12, 64);
        let mut session = OracleSession::table(table);
        let t = weak_to_strong(&p);
        let s = run_weak_with(&t, &[], 10, 50_000_000, &mut session);
        assert_eq!(s.vectors.len(), 10, "abort={:?}", s.abort);
        // The certified subsequence is strongly valid and converges to 0.
        let as_strong = crate::exec::OutputStream {
            mode: crate::exec::StreamMode::Strong,
            vectors: s.vectors.clone(),
            exhausted_budget: false,
            abort: None,
        };
        assert_eq!(validate_strong(&as_strong, 10).unwrap(), StrongValidation::Valid);
        for (i, v) in s.vectors.iter().enumerate() {
            assert!(v[0].abs() <= Rational::pow2(-(i as i64 + 1)), "entry {i}: {:?}", v[0]);
        }
    }

    #[test]
    fn weak_to_strong_nonconvergent_stream_yields_no_output() {
        // 0, 1, 0, 1, ...: every K has a counterexample for k = 1, so no
        // index is ever certified and the emitted machine never prints.
        let p = parse_program(
            ".const c0 = 1\nmain:\n  SETC r1 c0\nloop:\n  OUT 1\n  MOVR r2 r1\n  SUB r2 r0\n  MOVR r0 r2\n  JMP loop",
        )
        .unwrap();
        let searcher = weak_to_strong_searcher(&p);
        let truth = |_cap: u64, _k: u64| true;
        let table = table_for(&searcher, truth, 4, 2_000);
        let mut session = OracleSession::table(table);
        let t = weak_to_strong(&p);
        // The budget keeps the K search well inside the declared table.
        let s = run_weak_with(&t, &[], 3, 30_000, &mut session);
        assert!(s.vectors.is_empty(), "{:?}", s.vectors);
        assert!(s.exhausted_budget);
        assert!(s.abort.is_none(), "{:?}", s.abort);
    }

    fn oracle_machine(queried: &Program) -> Program {
        let code = encode_machine(queried);
        let src = format!(
            ".const c0 = {}\n.const c1 = 1\n.const c2 = 0\nmain:\n  MOVI i1 0\n  QRY c0 r5 i1\n  SETC r1 c1\n  JEQ r0 r1 ones\nzeros:\n  SETC r0 c2\n  OUT 1\n  JMP zeros\nones:\n  SETC r0 c1\n  OUT 1\n  JMP ones",
            code.to_rational()
        );
        parse_program(&src).unwrap()
    }

    #[test]
    fn strong_oracle_to_weak_three_machines() {
        let halting = parse_program("main:\n  HALT").unwrap();
        let looping = parse_program("loop:\n  JMP loop").unwrap();

        // (a) Queries a machine that halts immediately: the nested budget
        // answers true from level 1, so the whole stream is the ideal 1s.
        let p = oracle_machine(&halting);
        let w = strong_oracle_to_weak(&p);
        let s = run_strong(&w, &[], 10, 50_000_000);
        assert_eq!(s.vectors.len(), 10, "abort={:?}", s.abort);
        assert!(s.vectors.iter().all(|v| v[0] == r("1")), "{:?}", s.vectors);

        // (b) Queries a machine that never halts: assumptions stay negative
        // forever and the stream equals the all-negative run (zeros).
        let p = oracle_machine(&looping);
        let w = strong_oracle_to_weak(&p);
        let s = run_strong(&w, &[], 10, 50_000_000);
        assert_eq!(s.vectors.len(), 10, "abort={:?}", s.abort);
        assert!(s.vectors.iter().all(|v| v[0] == r("0")), "{:?}", s.vectors);

        // (c) No queries at all: the weak output equals the machine's own.
        let p = parse_program(
            ".const c0 = 1/2\nmain:\n  SETC r0 c0\nloop:\n  OUT 1\n  JMP loop",
        )
        .unwrap();
        let w = strong_oracle_to_weak(&p);
        let s = run_strong(&w, &[], 8, 50_000_000);
        let direct = run_strong(&p, &[], 8, 1_000);
        assert_eq!(s.vectors, direct.vectors);
    }

    #[test]
    fn strong_oracle_to_weak_stabilizes_at_slow_halting_level() {
        // The queried machine halts on its 7th step (6 INCIs then HALT), so
        // the nested budget first sees the halt at m = 7: levels 1..6 emit
        // the all-negative value 0, level 7 onward the true value 1.
        let slow = parse_program(
            "main:\n  INCI i1\n  INCI i1\n  INCI i1\n  INCI i1\n  INCI i1\n  INCI i1\n  HALT",
        )
        .unwrap();
        let p = oracle_machine(&slow);
        let w = strong_oracle_to_weak(&p);
        let s = run_strong(&w, &[], 10, 100_000_000);
        assert_eq!(s.vectors.len(), 10, "abort={:?}", s.abort);
        let scalars: Vec<Rational> = s.vectors.iter().map(|v| v[0].clone()).collect();
        for (i, v) in scalars.iter().enumerate() {
            let expect = if i + 1 < 7 { r("0") } else { r("1") };
            assert_eq!(v, &expect, "level {}", i + 1);
        }
    }
}
