//! The library of shipped example machines, each with its documented
//! contract. Entries are generated by builders in this module, written out
//! as `.bss` assembly under the crate's `stdlib/` directory, and
//! discoverable by name through the CLI (`stdlib:<name>`).

use crate::exact::Rational;
use crate::exec::StreamMode;
use crate::machine::{Asm, Cond, Program};
use crate::transforms::unisim;

/// Intended run mode of a library entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryMode {
    Bss,
    Strong,
    Weak,
}

impl EntryMode {
    pub fn stream_mode(self) -> StreamMode {
        match self {
            EntryMode::Bss => StreamMode::Bss,
            EntryMode::Strong => StreamMode::Strong,
            EntryMode::Weak => StreamMode::Weak,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntryMode::Bss => "bss",
            EntryMode::Strong => "strong",
            EntryMode::Weak => "weak",
        }
    }
}

/// One shipped machine: the program, its intended mode, a contract note,
/// and a few curated input vectors exercised by tests.
pub struct StdlibEntry {
    pub name: &'static str,
    pub mode: EntryMode,
    pub note: &'static str,
    pub program: Program,
    pub curated_inputs: Vec<Vec<Rational>>,
}

fn rs(list: &[&str]) -> Vec<Rational> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

// Shared scratch-register conventions for the hand-built machines: inputs
// arrive in r0.., working registers start at r10, interned constants are
// loaded into r30.. at startup.

struct K {
    zero: u32,
    one: u32,
    two: u32,
    half: u32,
}

impl K {
    fn emit(a: &mut Asm) -> K {
        let k = K { zero: 30, one: 31, two: 32, half: 33 };
        a.set_const_value(k.zero, Rational::zero());
        a.set_const_value(k.one, Rational::one());
        a.set_const_value(k.two, Rational::from_int(2));
        a.set_const_value(k.half, Rational::ratio(1, 2));
        k
    }
}

/// `dst := -dst` through a scratch register.
fn emit_negate(a: &mut Asm, dst: u32, scratch: u32, zero: u32) {
    a.movr(scratch, zero);
    a.sub(scratch, dst);
    a.movr(dst, scratch);
}

/// Splits `val` (consumed) into sign bit, integer part, and fraction.
fn emit_decompose(a: &mut Asm, k: &K, val: u32, sign: u32, int_part: u32, frac: u32, scratch: u32) {
    a.movr(sign, k.zero);
    a.movr(int_part, k.zero);
    a.movr(frac, val);
    a.if_then(Cond::Lt(frac, k.zero), |a| {
        a.movr(sign, k.one);
        emit_negate(a, frac, scratch, k.zero);
    });
    a.while_do(Cond::Ge(frac, k.one), |a| {
        a.sub(frac, k.one);
        a.add(int_part, k.one);
    });
}

/// Extracts the next binary digit of `frac` (in `[0,1)`): sets the carry by
/// branching, doubling `frac` and, on a one-digit, adding `weight` to `acc`.
fn emit_binary_digit(a: &mut Asm, k: &K, frac: u32, acc: u32, weight: u32) {
    a.if_else(
        Cond::Ge(frac, k.half),
        |a| {
            a.mul(frac, k.two);
            a.sub(frac, k.one);
            a.add(acc, weight);
        },
        |a| {
            a.mul(frac, k.two);
        },
    );
}

/// Pairing: encodes `(x, y)` into one real, strongly. On `[0,1)^2` the two
/// binary expansions interleave directly (the second argument's digits take
/// the odd positions); signs and integer parts are packed into an integer
/// header added on top, keeping the map injective on the whole plane.
pub fn build_pair() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let four = 34;
    a.set_const_value(four, Rational::from_int(4));
    let (sx, ix, fx) = (10, 11, 12);
    let (sy, iy, fy) = (13, 14, 15);
    let (acc, pw, t, t2) = (16, 17, 18, 19);

    emit_decompose(&mut a, &k, 0, sx, ix, fx, t);
    emit_decompose(&mut a, &k, 1, sy, iy, fy, t);

    // Header: 0 on [0,1)^2, else 1 + sx + 2*sy + 4*cantor(ix, iy).
    a.movr(acc, k.zero);
    a.movr(t, sx);
    a.add(t, sy);
    a.add(t, ix);
    a.add(t, iy);
    a.if_then(Cond::Ne(t, k.zero), |a| {
        a.movr(t, ix);
        a.add(t, iy); // s = ix + iy
        a.movr(t2, t);
        a.add(t2, k.one);
        a.mul(t, t2);
        a.mul(t, k.half); // s(s+1)/2
        a.add(t, iy); // cantor(ix, iy)
        a.mul(t, four);
        a.add(t, sx);
        a.movr(t2, sy);
        a.mul(t2, k.two);
        a.add(t, t2);
        a.add(t, k.one);
        a.movr(acc, t);
    });

    a.movr(pw, k.one);
    a.forever(|a, _| {
        // Odd positions carry the second argument's digits.
        a.mul(pw, k.half);
        emit_binary_digit(a, &k, fy, acc, pw);
        a.movr(0, acc);
        a.out_imm(1);
        a.mul(pw, k.half);
        emit_binary_digit(a, &k, fx, acc, pw);
        a.movr(0, acc);
        a.out_imm(1);
    });
    a.finish("pair")
}

/// Inverse of [`build_pair`]: decodes `z` into a stream of `(x, y)` pairs.
pub fn build_unpair() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let three = 34;
    a.set_const_value(three, Rational::from_int(3));
    let (hdr, w) = (10, 11);
    let (sx, ix, sy, iy) = (12, 13, 14, 15);
    let (fxa, fya, pwx, pwy) = (16, 17, 18, 19);
    let (t, t2, tri, cnt) = (20, 21, 22, 23);

    a.movr(w, 0);
    // Negative arguments are outside the pairing's range; diverge honestly.
    let reject = a.fresh("up_reject");
    a.jlt(w, k.zero, reject.as_str());
    a.movr(hdr, k.zero);
    a.while_do(Cond::Ge(w, k.one), |a| {
        a.sub(w, k.one);
        a.add(hdr, k.one);
    });
    // Unpack the header: 0 means both coordinates were in [0,1).
    a.movr(sx, k.zero);
    a.movr(sy, k.zero);
    a.movr(ix, k.zero);
    a.movr(iy, k.zero);
    a.if_then(Cond::Ne(hdr, k.zero), |a| {
        a.sub(hdr, k.one);
        // sx := hdr mod 2 by repeated subtraction; hdr := (hdr - sx)/2.
        a.movr(t, hdr);
        a.while_do(Cond::Ge(t, k.two), |a| a.sub(t, k.two));
        a.movr(sx, t);
        a.sub(hdr, sx);
        a.mul(hdr, k.half);
        a.movr(t, hdr);
        a.while_do(Cond::Ge(t, k.two), |a| a.sub(t, k.two));
        a.movr(sy, t);
        a.sub(hdr, sy);
        a.mul(hdr, k.half); // hdr = cantor(ix, iy)
        // Invert the pairing: largest s with s(s+1)/2 <= hdr, then peel.
        a.movr(t, k.zero); // s
        a.movr(tri, k.zero); // s(s+1)/2
        let top = a.fresh("up_cantor");
        let done = a.fresh("up_cantor_done");
        a.label(&top);
        a.movr(t2, tri);
        a.add(t2, t);
        a.add(t2, k.one); // T(s+1)
        a.jlt(hdr, t2, done.as_str());
        a.add(t, k.one);
        a.movr(tri, t2);
        a.jmp(top.as_str());
        a.label(&done);
        a.movr(iy, hdr);
        a.sub(iy, tri);
        a.movr(ix, t);
        a.sub(ix, iy);
    });

    a.movr(fxa, k.zero);
    a.movr(fya, k.zero);
    a.movr(pwx, k.one);
    a.movr(pwy, k.one);
    a.movr(cnt, k.zero);
    a.set_const_value(t2, Rational::from_int(3)); // reuse t2 as the constant 3
    a.forever(|a, _| {
        a.mul(pwy, k.half);
        emit_binary_digit(a, &k, w, fya, pwy);
        a.mul(pwx, k.half);
        emit_binary_digit(a, &k, w, fxa, pwx);
        a.add(cnt, k.one);
        // After n+2 digit pairs both coordinates are known to 2^-(n+2), so
        // the 1-norm error of the emitted pair is within 2^-n.
        a.if_then(Cond::Ge(cnt, t2), |a| {
            a.movr(0, ix);
            a.add(0, fxa);
            a.if_then(Cond::Eq(sx, k.one), |a| emit_negate(a, 0, t, k.zero));
            a.movr(1, iy);
            a.add(1, fya);
            a.if_then(Cond::Eq(sy, k.one), |a| emit_negate(a, 1, t, k.zero));
            a.out_imm(2);
        });
    });
    a.label(&reject);
    a.jmp(reject.as_str());
    a.finish("unpair")
}

/// Distance to the middle-thirds set, strongly: walks the ternary expansion;
/// while every digit stays in {0, 2} the point may lie in the set and the
/// distance is at most `3^-level`, and the first digit 1 pins the point
/// inside a removed gap whose endpoints give the distance exactly.
pub fn build_cantor_dist() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let third = 34;
    let twothirds = 35;
    let three = 36;
    a.set_const_value(third, Rational::ratio(1, 3));
    a.set_const_value(twothirds, Rational::ratio(2, 3));
    a.set_const_value(three, Rational::from_int(3));
    let (f, pw, val, t) = (10, 11, 12, 13);

    let exact = a.fresh("cd_exact");
    // Off [0, 1]: the distance is the distance to the nearest endpoint.
    a.if_then(Cond::Lt(0, k.zero), |a| {
        a.movr(val, k.zero);
        a.sub(val, 0);
        a.jmp(exact.as_str());
    });
    a.if_then(Cond::Lt(k.one, 0), |a| {
        a.movr(val, 0);
        a.sub(val, k.one);
        a.jmp(exact.as_str());
    });
    a.if_then(Cond::Eq(0, k.one), |a| {
        a.movr(val, k.zero);
        a.jmp(exact.as_str());
    });

    a.movr(f, 0);
    a.movr(pw, k.one);
    a.forever(|a, _| {
        a.mul(pw, third);
        a.if_else(
            Cond::Lt(f, third),
            |a| {
                a.mul(f, three);
            },
            |a| {
                a.if_else(
                    Cond::Lt(f, twothirds),
                    |a| {
                        // Digit 1: strictly inside the level gap unless the
                        // remainder is exactly zero (the left endpoint).
                        a.mul(f, three);
                        a.sub(f, k.one);
                        a.if_then(Cond::Eq(f, k.zero), |a| {
                            a.movr(val, k.zero);
                            a.jmp(exact.as_str());
                        });
                        a.if_else(
                            Cond::Lt(f, k.half),
                            |a| {
                                a.movr(val, pw);
                                a.mul(val, f);
                            },
                            |a| {
                                a.movr(t, k.one);
                                a.sub(t, f);
                                a.movr(val, pw);
                                a.mul(val, t);
                            },
                        );
                        a.jmp(exact.as_str());
                    },
                    |a| {
                        a.mul(f, three);
                        a.sub(f, k.two);
                    },
                );
            },
        );
        // Still possibly in the set: 0 is within 3^-level of the distance.
        a.movr(0, k.zero);
        a.out_imm(1);
    });
    a.label(&exact);
    a.forever(|a, _| {
        a.movr(0, val);
        a.out_imm(1);
    });
    a.finish("cantor_dist")
}

/// The popcorn function, strongly: `q = 1, 2, ...` testing whether `q*x` is
/// an integer by keeping `q*frac(x) mod 1` incrementally; outputs are paced
/// so the `n`-th one is correct within `2^-n` (no divisor up to `2^n` found
/// means the value is below `2^-n`).
pub fn build_thomae() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let (xf, rem, q, m, val, t) = (10, 11, 12, 13, 14, 15);

    a.movr(xf, 0);
    a.if_then(Cond::Lt(xf, k.zero), |a| emit_negate(a, xf, t, k.zero));
    a.while_do(Cond::Ge(xf, k.one), |a| a.sub(xf, k.one));
    a.movr(rem, k.zero);
    a.movr(q, k.zero);
    a.movr(m, k.one);
    let exact = a.fresh("th_exact");
    a.forever(|a, _| {
        a.mul(m, k.two);
        a.while_do(Cond::Lt(q, m), |a| {
            a.add(q, k.one);
            a.add(rem, xf);
            a.if_then(Cond::Ge(rem, k.one), |a| a.sub(rem, k.one));
            a.if_then(Cond::Eq(rem, k.zero), |a| {
                a.movr(val, k.one);
                a.div(val, q);
                a.jmp(exact.as_str());
            });
        });
        a.movr(0, k.zero);
        a.out_imm(1);
    });
    a.label(&exact);
    a.forever(|a, _| {
        a.movr(0, val);
        a.out_imm(1);
    });
    a.finish("thomae")
}

/// Emits the body of a diagonal enumeration of all fractions `±(t-s)/s`,
/// calling `on_candidate(asm, cand_reg)` for every candidate (each value of
/// each sign; zero appears for both signs).
fn emit_rational_enumeration(
    a: &mut Asm,
    k: &K,
    regs: (u32, u32, u32, u32),
    mut on_candidate: impl FnMut(&mut Asm, u32),
) {
    let (t_diag, s, cand, neg) = regs;
    a.movr(t_diag, k.one);
    a.forever(|a, _| {
        a.movr(s, k.one);
        a.while_do(Cond::Ge(t_diag, s), |a| {
            a.movr(cand, t_diag);
            a.sub(cand, s);
            a.div(cand, s);
            on_candidate(a, cand);
            a.movr(neg, k.zero);
            a.sub(neg, cand);
            on_candidate(a, neg);
            a.add(s, k.one);
        });
        a.add(t_diag, k.one);
    });
}

/// Halts exactly on rational inputs (within budget): enumerates all
/// fractions and compares exactly.
pub fn build_rational_semidecide() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let done = a.fresh("rs_done");
    emit_rational_enumeration(&mut a, &k, (10, 11, 12, 13), |a, cand| {
        a.jeq(cand, 0, done.as_str());
    });
    a.label(&done);
    a.halt();
    a.finish("rational_semidecide")
}

/// Decides membership in `[0, 1)`, always halting with the characteristic
/// value in a 1-dimensional output.
pub fn build_char_unit_interval() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let no = a.fresh("ci_no");
    let yes = a.fresh("ci_yes");
    a.jlt(0, k.zero, no.as_str());
    a.jlt(0, k.one, yes.as_str());
    a.label(&no);
    a.movr(0, k.zero);
    a.out_imm(1);
    a.halt();
    a.label(&yes);
    a.movr(0, k.one);
    a.out_imm(1);
    a.halt();
    a.finish("char_unit_interval")
}

/// The two-phase domain gadget: searches (silently) for `x` among the
/// rationals, then enumerates rationals emitting `2^-n` per candidate until
/// one equals `y`, halting there. On all-rational inputs this always ends
/// in a finite stream; the convergent case needs an unreachable second
/// argument, which exact numeric inputs cannot supply.
pub fn build_q_cross_irrational() -> Program {
    let mut a = Asm::new();
    let k = K::emit(&mut a);
    let phase2 = a.fresh("qx_phase2");
    emit_rational_enumeration(&mut a, &k, (10, 11, 12, 13), |a, cand| {
        a.jeq(cand, 0, phase2.as_str());
    });
    // The enumeration never falls through; phase 2 restarts it for y.
    a.label(&phase2);
    let pw = 14;
    let stop = a.fresh("qx_stop");
    a.movr(pw, k.one);
    emit_rational_enumeration(&mut a, &k, (15, 16, 17, 18), |a, cand| {
        a.mul(pw, k.half);
        a.movr(0, pw);
        a.out_imm(1);
        a.jeq(cand, 1, stop.as_str());
    });
    a.label(&stop);
    a.halt();
    a.finish("q_cross_irrational")
}

/// All shipped entries, freshly built.
pub fn entries() -> Vec<StdlibEntry> {
    vec![
        StdlibEntry {
            name: "pair",
            mode: EntryMode::Strong,
            note: "stream converges to an injective pairing of (x, y); on [0,1)^2 it is \
                   the plain interleaving of binary expansions",
            program: build_pair(),
            curated_inputs: vec![
                rs(&["1/2", "1/4"]),
                rs(&["0", "0"]),
                rs(&["3/5", "1/7"]),
                rs(&["-3/2", "7/3"]),
            ],
        },
        StdlibEntry {
            name: "unpair",
            mode: EntryMode::Strong,
            note: "inverse of pair: stream of 2-vectors converging to the encoded (x, y)",
            program: build_unpair(),
            curated_inputs: vec![rs(&["3/8"]), rs(&["0"])],
        },
        StdlibEntry {
            name: "cantor_dist",
            mode: EntryMode::Strong,
            note: "stream converges to the distance from x to the middle-thirds set, \
                   n-th entry within 2^-n",
            program: build_cantor_dist(),
            curated_inputs: vec![rs(&["1/2"]), rs(&["0"]), rs(&["1/4"]), rs(&["2/9"])],
        },
        StdlibEntry {
            name: "thomae",
            mode: EntryMode::Strong,
            note: "stream converges to 1/q on reduced p/q (and 1 at 0), stationary once \
                   the denominator is found",
            program: build_thomae(),
            curated_inputs: vec![rs(&["1/3"]), rs(&["0"]), rs(&["4/6"]), rs(&["22/7"])],
        },
        StdlibEntry {
            name: "rational_semidecide",
            mode: EntryMode::Bss,
            note: "halts exactly on rational inputs; on exact numeric inputs every run \
                   eventually halts, budgets separate near from far witnesses",
            program: build_rational_semidecide(),
            curated_inputs: vec![rs(&["3/7"]), rs(&["22/7"])],
        },
        StdlibEntry {
            name: "char_unit_interval",
            mode: EntryMode::Bss,
            note: "always halts with the characteristic value of [0, 1)",
            program: build_char_unit_interval(),
            curated_inputs: vec![rs(&["0"]), rs(&["1"]), rs(&["1/2"]), rs(&["-1"])],
        },
        StdlibEntry {
            name: "halting_flag",
            mode: EntryMode::Bss,
            note: "universal machine: on (code, x..) halts with 1 exactly when the \
                   coded machine halts on x",
            program: unisim::halting_flag(),
            curated_inputs: vec![],
        },
        StdlibEntry {
            name: "cohalting_flag",
            mode: EntryMode::Strong,
            note: "on (code, x..): all-ones stream (convergent) when the coded machine \
                   never halts; switches to alternating 0/1 once it halts",
            program: unisim::cohalting_flag(),
            curated_inputs: vec![],
        },
        StdlibEntry {
            name: "q_cross_irrational",
            mode: EntryMode::Strong,
            note: "domain gadget for Q x (R \\ Q); numeric runs can only exercise the \
                   rational side, where the stream is always finite",
            program: build_q_cross_irrational(),
            curated_inputs: vec![rs(&["1/2", "39/41"])],
        },
    ]
}

/// Looks up one entry by name.
pub fn find(name: &str) -> Option<StdlibEntry> {
    entries().into_iter().find(|e| e.name == name)
}

/// Entry names in shipping order.
pub fn names() -> Vec<&'static str> {
    entries().iter().map(|e| e.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dyadic_round, Rational};
    use crate::exec::{run_bss, run_strong, validate_strong, RunOutcome, StrongValidation};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn pair_core_interleaving_values() {
        let pair = build_pair();
        // (1/2, 1/4) -> 3/8; the 8-entry prefix converges with 2^-n error.
        let s = run_strong(&pair, &rs(&["1/2", "1/4"]), 8, 10_000);
        let limit = r("3/8");
        for (i, v) in s.vectors.iter().enumerate() {
            let err = (&v[0] - &limit).abs();
            assert!(err <= Rational::pow2(-(i as i64 + 1)), "entry {i} err {err}");
        }
        assert_eq!(s.vectors.last().unwrap()[0], limit);
        // (0, 0) -> 0.
        let s = run_strong(&pair, &rs(&["0", "0"]), 5, 10_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("0")));
    }

    #[test]
    fn pair_streams_validate() {
        let pair = build_pair();
        for input in [rs(&["3/5", "1/7"]), rs(&["-3/2", "7/3"]), rs(&["9/7", "-22/7"])] {
            let s = run_strong(&pair, &input, 50, 100_000);
            assert_eq!(validate_strong(&s, 50).unwrap(), StrongValidation::Valid, "{input:?}");
        }
    }

    /// Independent oracle for the pairing limit: exact bit interleaving on
    /// rationals, truncated at `bits` interleaved digits.
    pub(crate) fn pairing_oracle(x: &Rational, y: &Rational, bits: u32) -> Rational {
        fn decompose(v: &Rational) -> (bool, Rational, Rational) {
            let neg = v.is_negative();
            let abs = v.abs();
            let int = abs.floor();
            (neg, int.clone(), &abs - &int)
        }
        let (sx, ix, fx) = decompose(x);
        let (sy, iy, fy) = decompose(y);
        let header = if !sx && !sy && ix.is_zero() && iy.is_zero() {
            Rational::zero()
        } else {
            let s = &ix + &iy;
            let q = &(&s * &(&s + &Rational::one())) * &Rational::ratio(1, 2) + &iy;
            &(&q * &Rational::from_int(4))
                + &Rational::from_int(sx as i64 + 2 * (sy as i64) + 1)
        };
        let mut acc = header;
        let mut fx = fx;
        let mut fy = fy;
        let half = Rational::ratio(1, 2);
        for m in 1..=bits {
            let (src, _other) = if m % 2 == 1 { (&mut fy, &mut fx) } else { (&mut fx, &mut fy) };
            let bit = *src >= half;
            *src = &*src + &*src;
            if bit {
                *src = &*src - &Rational::one();
                acc = &acc + &Rational::pow2(-(m as i64));
            }
        }
        acc
    }

    #[test]
    fn pair_matches_bit_interleaving_oracle() {
        let pair = build_pair();
        for (x, y) in [("1/2", "1/4"), ("3/5", "1/7"), ("-3/2", "7/3"), ("0", "5/9")] {
            let s = run_strong(&pair, &rs(&[x, y]), 40, 200_000);
            let oracle = pairing_oracle(&r(x), &r(y), 40);
            let got = &s.vectors[39][0];
            assert_eq!(got, &oracle, "pair({x}, {y}) 40-bit prefix");
        }
    }

    #[test]
    fn unpair_inverts_pair() {
        let unpair = build_unpair();
        for (x, y) in [("3/5", "1/7"), ("1/2", "1/4"), ("-3/2", "7/3"), ("2", "-9/8")] {
            let z = pairing_oracle(&r(x), &r(y), 64);
            let s = run_strong(&unpair, &[z], 30, 2_000_000);
            let last = s.vectors.last().unwrap();
            let ex = (&last[0] - &r(x)).abs();
            let ey = (&last[1] - &r(y)).abs();
            assert!(ex <= Rational::pow2(-30), "x error {ex}");
            assert!(ey <= Rational::pow2(-30), "y error {ey}");
        }
    }

    #[test]
    fn cantor_dist_examples() {
        let cd = build_cantor_dist();
        // 1/2 sits in the central gap: distance 1/6, exact from entry 1.
        let s = run_strong(&cd, &rs(&["1/2"]), 5, 10_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("1/6")));
        // 0 and 1/4 are in the set: all outputs 0.
        for x in ["0", "1/4"] {
            let s = run_strong(&cd, &rs(&[x]), 5, 10_000);
            assert!(s.vectors.iter().all(|v| v[0] == r("0")), "{x}");
        }
        // Outside [0, 1].
        let s = run_strong(&cd, &rs(&["-2/3"]), 3, 10_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("2/3")));
        let s = run_strong(&cd, &rs(&["3/2"]), 3, 10_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("1/2")));
    }

    #[test]
    fn thomae_examples() {
        let th = build_thomae();
        // 1/3: first entry 0 (no divisor <= 2), then stationary 1/3.
        let s = run_strong(&th, &rs(&["1/3"]), 6, 10_000);
        let scalars: Vec<_> = s.vectors.iter().map(|v| v[0].clone()).collect();
        assert_eq!(scalars[0], r("0"));
        assert!(scalars[1..].iter().all(|v| v == &r("1/3")));
        // h(0) = 1 from the start.
        let s = run_strong(&th, &rs(&["0"]), 4, 10_000);
        assert!(s.vectors.iter().all(|v| v[0] == r("1")));
        // 4/6 reduces to 2/3: value 1/3.
        let s = run_strong(&th, &rs(&["4/6"]), 6, 10_000);
        assert_eq!(s.vectors.last().unwrap()[0], r("1/3"));
        // Negative argument.
        let s = run_strong(&th, &rs(&["-22/7"]), 8, 10_000);
        assert_eq!(s.vectors.last().unwrap()[0], r("1/7"));
    }

    #[test]
    fn rational_semidecide_halts_on_witness() {
        let p = build_rational_semidecide();
        assert!(run_bss(&p, &rs(&["3/7"]), 100_000).terminated());
        assert!(run_bss(&p, &rs(&["22/7"]), 1_000_000).terminated());
        assert!(run_bss(&p, &rs(&["0"]), 1_000).terminated());
        assert!(run_bss(&p, &rs(&["-5/3"]), 100_000).terminated());
    }

    #[test]
    fn char_unit_interval_decides() {
        let p = build_char_unit_interval();
        for (x, want) in [("0", "1"), ("1/2", "1"), ("1", "0"), ("-1", "0"), ("3/2", "0")] {
            match run_bss(&p, &rs(&[x]), 1_000) {
                RunOutcome::Terminated(v) => assert_eq!(v, rs(&[want]), "chi({x})"),
                other => panic!("chi({x}) did not halt: {other:?}"),
            }
        }
    }

    #[test]
    fn q_cross_irrational_rational_side() {
        let p = build_q_cross_irrational();
        // x found quickly; stream emits decreasing powers of two and halts
        // when the y-enumeration reaches 39/41 (far enough for 50 entries).
        let s = run_strong(&p, &rs(&["1/2", "39/41"]), 50, 2_000_000);
        assert_eq!(s.vectors.len(), 50);
        assert_eq!(validate_strong(&s, 50).unwrap(), StrongValidation::Valid);
        assert_eq!(s.vectors[0][0], r("1/2"));
        // And with a nearby y the stream is finite: the run halts.
        let out = run_bss(&p, &rs(&["1/2", "1"]), 2_000_000);
        assert!(out.terminated());
    }

    #[test]
    fn every_entry_parses_and_roundtrips() {
        for e in entries() {
            let text = e.program.to_text();
            let parsed = crate::machine::parse_program(&text).unwrap();
            assert_eq!(parsed, e.program, "{}", e.name);
        }
    }

    #[test]
    fn dyadic_round_helper_used_by_grid_tests() {
        // Sanity link between the pairing grid and dyadic rounding: rounding
        // the oracle value to 40 bits never moves it by more than 2^-40.
        let z = pairing_oracle(&r("3/5"), &r("1/7"), 64);
        let rounded = dyadic_round(&z, 40);
        assert!((&z - &rounded).abs() <= Rational::pow2(-40));
    }
}
