//! Randomised invariant checks over a million events each. They panic on
//! the first violation.

use std::collections::VecDeque;

use coresim::config::CoreConfig;
use coresim::golden::Program;
use coresim::harness::{run_workload, RunOptions, Workload};
use coresim::isa::reg::*;
use coresim::isa::{Op, Reg, RegFile};
use coresim::ooo::{PReg, RenameState};
use coresim::predictors::{BimodalBht, DirectionPredict, HybridBht, HybridGeometry, Ras, TwoLevelBht};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EVENTS: usize = 1_000_000;

/// Branch pcs drawn from a small hot set so tables see heavy reuse.
fn branch_events(seed: u64) -> impl Iterator<Item = (u64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pcs: Vec<u64> = (0..300)
        .map(|_| 0x8000_0000 + 2 * rng.gen_range(0..1u64 << 16))
        .collect();
    (0..EVENTS).map(move |_| (pcs[rng.gen_range(0..pcs.len())], rng.gen_bool(0.6)))
}

pub fn counters_stay_two_bit() {
    let mut bi = BimodalBht::new(128);
    let mut two = TwoLevelBht::new(128, 3);
    let mut hy = HybridBht::new(HybridGeometry::default());
    for (i, (pc, t)) in branch_events(1).enumerate() {
        bi.predict(pc);
        two.predict(pc);
        hy.predict(pc);
        bi.update(pc, t);
        two.update(pc, t);
        hy.update(pc, t);
        if i % 100_000 == 0 || i == EVENTS - 1 {
            assert!(bi.counters().iter().all(|&c| c <= 3));
            assert!(two.patterns().iter().all(|&c| c <= 3));
            assert!(two.histories().iter().all(|&h| h < 1 << 3));
            assert!(hy.counters().all(|c| c <= 3));
            assert!(hy.global_history() < 1 << HybridGeometry::default().global_history_bits);
        }
    }
}

pub fn physical_registers_are_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut r = RenameState::new(96, 64);
    // Old mappings of in-flight writers, released in program order.
    let mut pending: VecDeque<PReg> = VecDeque::new();
    for i in 0..EVENTS {
        let rename = rng.gen_bool(0.55) || pending.is_empty();
        if rename {
            let fp = rng.gen_bool(0.3);
            let n = rng.gen_range(1..32u8);
            let dest = if fp { Reg::fp(n) } else { Reg::int(n) };
            let srcs = [Reg::int(rng.gen_range(0..32)), Reg::fp(rng.gen_range(0..32))];
            match r.rename(srcs.into_iter(), Some(dest)) {
                Ok(out) => pending.push_back(out.old.expect("writer has an old mapping")),
                Err(e) => {
                    assert_eq!(r.free_count(e.0), 0);
                    r.release(pending.pop_front().unwrap());
                }
            }
        } else {
            r.release(pending.pop_front().unwrap());
        }
        let free = r.free_count(RegFile::Int) + r.free_count(RegFile::Fp);
        assert_eq!(free + pending.len() + 64, 96 + 64);
        if i % 1000 == 0 {
            r.check_conservation(pending.iter()).unwrap();
        }
    }
    r.check_conservation(pending.iter()).unwrap();
}

pub fn ras_matches_bounded_stack() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let depth = 8;
    let mut ras = Ras::new(depth);
    let mut model: VecDeque<u64> = VecDeque::new();
    for _ in 0..EVENTS {
        if rng.gen_bool(0.52) {
            let a: u64 = rng.gen();
            ras.push(a);
            if model.len() == depth {
                model.pop_front();
            }
            model.push_back(a);
        } else {
            assert_eq!(ras.peek(), model.back().copied());
            assert_eq!(ras.pop(), model.pop_back());
        }
        assert_eq!(ras.len(), model.len());
    }
}

/// A seeded random mix of ALU, multiply, divide, memory and short forward
/// branches, looped until about a million instructions retire.
fn random_mix(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regs = [T0, T1, T2, T3, T4, T5, A0, A1, A2, A3];
    let body: Vec<(u8, u8, u8, u8, i64)> = (0..400)
        .map(|_| {
            let pick = |r: &mut ChaCha8Rng| regs[r.gen_range(0..regs.len())];
            (
                rng.gen_range(0..100),
                pick(&mut rng),
                pick(&mut rng),
                pick(&mut rng),
                rng.gen_range(0..256) * 8,
            )
        })
        .collect();
    super::looped(2_400, move |a| {
        for &(kind, rd, rs1, rs2, off) in &body {
            match kind {
                0..=44 => a.r(Op::Add, rd, rs1, rs2)?,
                45..=54 => a.i(Op::Xori, rd, rs1, off & 0x7ff)?,
                55..=61 => a.r(Op::Mul, rd, rs1, rs2)?,
                62..=63 => a.r(Op::Divu, rd, rs1, rs2)?,
                64..=79 => a.i(Op::Ld, rd, S2, off)?,
                80..=89 => a.s(Op::Sd, rs2, S2, off)?,
                _ => {
                    let skip = a.new_label();
                    a.branch(Op::Blt, rs1, rs2, skip)?;
                    a.i(Op::Addi, rd, rd, 1)?;
                    a.bind(skip);
                }
            }
        }
        Ok(())
    })
}

/// Golden stream of the random mix, about a million instructions.
pub fn random_mix_workload() -> Workload {
    let w = super::workload("random_mix", &random_mix(4), 3_000_000);
    assert!(w.stream.len() >= EVENTS, "{} instructions", w.stream.len());
    w
}

pub fn ooo_occupancy_bounds_hold(w: &Workload) {
    let opts = RunOptions {
        check_invariants: true,
        ..RunOptions::default()
    };
    let m = run_workload(&CoreConfig::c910(), w, opts).unwrap();
    assert!(m.peak_rob_entries <= 64);
    assert!(m.peak_in_flight <= 192);
    assert!(m.rob_histogram.len() <= 65);
    assert_eq!(m.retired, w.stream.len() as u64);
}
