//! Hand-oracled programs and small model-probing streams shared by the
//! integration tests and the acceptance target.
#![allow(dead_code)]

use coresim::golden::{self, GoldenRun, Program, Segment};
use coresim::harness::Workload;
use coresim::isa::reg::*;
use coresim::isa::{Assembler, InstrDesc, IsaError, Op};
use coresim::workloads::{generate, KernelKind, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod invariants;

pub const CODE: u64 = 0x8000_0000;
pub const DATA: u64 = 0x8010_0000;
pub const OUT: u64 = 0x8018_0000;
pub const STACK: u64 = 0x8020_0000;

type Check = Box<dyn Fn(&GoldenRun) -> Result<(), String> + Send + Sync>;

pub struct Case {
    pub name: String,
    pub program: Program,
    pub budget: u64,
    pub check: Check,
}

impl Case {
    pub fn run(&self) -> Result<GoldenRun, String> {
        let r = golden::run(&self.program, self.budget).map_err(|e| format!("{}: {e}", self.name))?;
        (self.check)(&r).map_err(|e| format!("{}: {e}", self.name))?;
        Ok(r)
    }
}

pub fn assemble(f: impl FnOnce(&mut Assembler) -> Result<(), IsaError>, data: Vec<Segment>) -> Program {
    let mut a = Assembler::new(CODE);
    f(&mut a).expect("assemble");
    Program::new(CODE, a.finish().expect("labels"), data).expect("layout")
}

fn case(
    name: &str,
    program: Program,
    budget: u64,
    check: impl Fn(&GoldenRun) -> Result<(), String> + Send + Sync + 'static,
) -> Case {
    Case {
        name: name.to_string(),
        program,
        budget,
        check: Box::new(check),
    }
}

fn want_x(r: &GoldenRun, reg: u8, want: u64) -> Result<(), String> {
    let got = r.state.x[reg as usize];
    if got == want {
        Ok(())
    } else {
        Err(format!("x{reg} = {got:#x}, expected {want:#x}"))
    }
}

fn want_words(r: &GoldenRun, addr: u64, want: &[u64]) -> Result<(), String> {
    for (i, &w) in want.iter().enumerate() {
        let a = addr + 8 * i as u64;
        let got = r.state.mem.read(a, 8);
        if got != w {
            return Err(format!("mem[{a:#x}] = {got:#x}, expected {w:#x} (word {i})"));
        }
    }
    Ok(())
}

fn seg(addr: u64, words: &[u64]) -> Segment {
    Segment {
        addr,
        bytes: words.iter().flat_map(|w| w.to_le_bytes()).collect(),
    }
}

fn fib(n: u64) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        let t = a.wrapping_add(b);
        a = b;
        b = t;
    }
    a
}

fn fib_iter(n: u64) -> Case {
    let p = assemble(
        |a| {
            a.li(A0, 0)?;
            a.li(A1, 1)?;
            a.li(T0, n as i64)?;
            let top = a.here();
            let done = a.new_label();
            a.branch(Op::Beq, T0, ZERO, done)?;
            a.r(Op::Add, T1, A0, A1)?;
            a.mv(A0, A1)?;
            a.mv(A1, T1)?;
            a.i(Op::Addi, T0, T0, -1)?;
            a.j(top)?;
            a.bind(done);
            a.halt()
        },
        vec![],
    );
    case(&format!("fib_iter_{n}"), p, 10 * n + 20, move |r| want_x(r, A0, fib(n)))
}

fn fib_rec(n: u64) -> Case {
    let p = assemble(
        |a| {
            let f = a.new_label();
            a.li(SP, STACK as i64)?;
            a.li(A0, n as i64)?;
            a.call(f)?;
            a.mv(S1, A0)?;
            a.halt()?;
            a.bind(f);
            let base = a.new_label();
            a.i(Op::Addi, T0, ZERO, 2)?;
            a.branch(Op::Blt, A0, T0, base)?;
            a.i(Op::Addi, SP, SP, -24)?;
            a.s(Op::Sd, RA, SP, 0)?;
            a.s(Op::Sd, A0, SP, 8)?;
            a.i(Op::Addi, A0, A0, -1)?;
            a.call(f)?;
            a.s(Op::Sd, A0, SP, 16)?;
            a.i(Op::Ld, A0, SP, 8)?;
            a.i(Op::Addi, A0, A0, -2)?;
            a.call(f)?;
            a.i(Op::Ld, T1, SP, 16)?;
            a.r(Op::Add, A0, A0, T1)?;
            a.i(Op::Ld, RA, SP, 0)?;
            a.i(Op::Addi, SP, SP, 24)?;
            a.bind(base);
            a.ret()
        },
        vec![],
    );
    case(&format!("fib_rec_{n}"), p, 1_000_000, move |r| {
        want_x(r, S1, fib(n))?;
        want_x(r, SP, STACK)
    })
}

fn kernel(name: &str, spec: KernelSpec) -> Case {
    let k = generate(&spec).expect("kernel");
    let program = k.program.clone();
    let budget = k.budget;
    case(name, program, budget, move |r| {
        k.verify(&r.state).map_err(|e| e.to_string())
    })
}

fn empty_loop(iters: u64) -> Case {
    let p = assemble(
        |a| {
            a.li(T0, iters as i64)?;
            let top = a.here();
            a.i(Op::Addi, T0, T0, -1)?;
            a.nop()?;
            a.branch(Op::Bne, T0, ZERO, top)?;
            a.halt()
        },
        vec![],
    );
    // li + 3 per trip + the two-instruction halt.
    let want = 1 + 3 * iters + 2;
    case("empty_loop", p, want + 1, move |r| {
        want_x(r, T0, 0)?;
        if r.stream.len() as u64 != want {
            return Err(format!("retired {}, expected {want}", r.stream.len()));
        }
        Ok(())
    })
}

fn branch_ladder(n: u64) -> Case {
    let p = assemble(
        |a| {
            a.li(T0, 0)?;
            a.li(T1, n as i64)?;
            a.li(T3, 3)?;
            a.li(T4, 1)?;
            a.li(S2, 0)?;
            a.li(S3, 0)?;
            a.li(S4, 0)?;
            let top = a.here();
            let (l1, l2, next) = (a.new_label(), a.new_label(), a.new_label());
            a.r(Op::Rem, T2, T0, T3)?;
            a.branch(Op::Bne, T2, ZERO, l1)?;
            a.i(Op::Addi, S2, S2, 1)?;
            a.j(next)?;
            a.bind(l1);
            a.branch(Op::Bne, T2, T4, l2)?;
            a.i(Op::Addi, S3, S3, 2)?;
            a.j(next)?;
            a.bind(l2);
            a.r(Op::Add, S4, S4, T0)?;
            a.bind(next);
            a.i(Op::Addi, T0, T0, 1)?;
            a.branch(Op::Blt, T0, T1, top)?;
            a.halt()
        },
        vec![],
    );
    let (mut s2, mut s3, mut s4) = (0u64, 0u64, 0u64);
    for i in 0..n {
        match i % 3 {
            0 => s2 += 1,
            1 => s3 += 2,
            _ => s4 += i,
        }
    }
    case("branch_ladder", p, 20 * n + 50, move |r| {
        want_x(r, S2, s2)?;
        want_x(r, S3, s3)?;
        want_x(r, S4, s4)
    })
}

const MULDIV_OPS: [Op; 13] = [
    Op::Mul,
    Op::Mulh,
    Op::Mulhu,
    Op::Mulhsu,
    Op::Div,
    Op::Divu,
    Op::Rem,
    Op::Remu,
    Op::Mulw,
    Op::Divw,
    Op::Divuw,
    Op::Remw,
    Op::Remuw,
];

fn sext32(v: u32) -> u64 {
    v as i32 as i64 as u64
}

/// Host reference for the M extension, written from the ISA manual's tables.
fn muldiv_ref(op: Op, a: u64, b: u64) -> u64 {
    let (sa, sb) = (a as i64, b as i64);
    let (wa, wb) = (a as u32, b as u32);
    let (swa, swb) = (wa as i32, wb as i32);
    match op {
        Op::Mul => a.wrapping_mul(b),
        Op::Mulh => ((sa as i128 * sb as i128) >> 64) as u64,
        Op::Mulhu => ((a as u128 * b as u128) >> 64) as u64,
        Op::Mulhsu => ((sa as i128 * b as i128) >> 64) as u64,
        Op::Div if b == 0 => u64::MAX,
        Op::Div => sa.wrapping_div(sb) as u64,
        Op::Divu if b == 0 => u64::MAX,
        Op::Divu => a / b,
        Op::Rem if b == 0 => a,
        Op::Rem => sa.wrapping_rem(sb) as u64,
        Op::Remu if b == 0 => a,
        Op::Remu => a % b,
        Op::Mulw => sext32(wa.wrapping_mul(wb)),
        Op::Divw if wb == 0 => u64::MAX,
        Op::Divw => sext32(swa.wrapping_div(swb) as u32),
        Op::Divuw if wb == 0 => u64::MAX,
        Op::Divuw => sext32(wa / wb),
        Op::Remw if wb == 0 => sext32(wa),
        Op::Remw => sext32(swa.wrapping_rem(swb) as u32),
        Op::Remuw if wb == 0 => sext32(wa),
        Op::Remuw => sext32(wa % wb),
        _ => unreachable!(),
    }
}

fn muldiv() -> Case {
    let pairs: Vec<(u64, u64)> = vec![
        ((-7_000_000_000_123i64) as u64, 12345),
        (i64::MIN as u64, u64::MAX),
        (17, 0),
        ((-17i64) as u64, 5),
        (u64::MAX, 3),
        (0x8000_0000, 0xffff_ffff),
        (0x1234_5678_9abc_def0, 0x0fed_cba9_8765_4321),
    ];
    let ps = pairs.clone();
    let p = assemble(
        move |a| {
            a.li(S4, OUT as i64)?;
            let mut off = 0;
            for &(x, y) in &ps {
                a.li(S2, x as i64)?;
                a.li(S3, y as i64)?;
                for op in MULDIV_OPS {
                    a.r(op, T0, S2, S3)?;
                    a.s(Op::Sd, T0, S4, off)?;
                    off += 8;
                }
            }
            a.halt()
        },
        vec![],
    );
    let want: Vec<u64> = pairs
        .iter()
        .flat_map(|&(x, y)| MULDIV_OPS.iter().map(move |&op| muldiv_ref(op, x, y)))
        .collect();
    case("mul_div_edges", p, 1000, move |r| want_words(r, OUT, &want))
}

fn loads() -> Case {
    let bytes: Vec<u8> = vec![
        0x80, 0xff, 0x7f, 0x01, 0x34, 0x92, 0xcd, 0xab, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88,
    ];
    let list: Vec<(Op, i64)> = vec![
        (Op::Lb, 0),
        (Op::Lb, 2),
        (Op::Lbu, 0),
        (Op::Lh, 0),
        (Op::Lh, 2),
        (Op::Lhu, 0),
        (Op::Lhu, 6),
        (Op::Lw, 0),
        (Op::Lw, 4),
        (Op::Lwu, 4),
        (Op::Lw, 8),
        (Op::Ld, 0),
        (Op::Ld, 8),
    ];
    let l2 = list.clone();
    let p = assemble(
        move |a| {
            a.li(S2, DATA as i64)?;
            a.li(S4, OUT as i64)?;
            for (i, &(op, off)) in l2.iter().enumerate() {
                a.i(op, T0, S2, off)?;
                a.s(Op::Sd, T0, S4, 8 * i as i64)?;
            }
            a.halt()
        },
        vec![Segment {
            addr: DATA,
            bytes: bytes.clone(),
        }],
    );
    let b = |o: i64, n: usize| -> u64 {
        let mut v = [0u8; 8];
        v[..n].copy_from_slice(&bytes[o as usize..o as usize + n]);
        u64::from_le_bytes(v)
    };
    let want: Vec<u64> = list
        .iter()
        .map(|&(op, o)| match op {
            Op::Lb => b(o, 1) as u8 as i8 as i64 as u64,
            Op::Lbu => b(o, 1),
            Op::Lh => b(o, 2) as u16 as i16 as i64 as u64,
            Op::Lhu => b(o, 2),
            Op::Lw => b(o, 4) as u32 as i32 as i64 as u64,
            Op::Lwu => b(o, 4),
            _ => b(o, 8),
        })
        .collect();
    case("load_extension", p, 200, move |r| want_words(r, OUT, &want))
}

const SHIFT_OPS: [Op; 12] = [
    Op::Sll,
    Op::Srl,
    Op::Sra,
    Op::Sllw,
    Op::Srlw,
    Op::Sraw,
    Op::Addw,
    Op::Subw,
    Op::Slt,
    Op::Sltu,
    Op::Sub,
    Op::Xor,
];

fn shift_ref(op: Op, a: u64, b: u64) -> u64 {
    let sh = (b & 63) as u32;
    let shw = (b & 31) as u32;
    match op {
        Op::Sll => a << sh,
        Op::Srl => a >> sh,
        Op::Sra => ((a as i64) >> sh) as u64,
        Op::Sllw => sext32((a as u32) << shw),
        Op::Srlw => sext32((a as u32) >> shw),
        Op::Sraw => ((a as i32) >> shw) as i64 as u64,
        Op::Addw => sext32((a as u32).wrapping_add(b as u32)),
        Op::Subw => sext32((a as u32).wrapping_sub(b as u32)),
        Op::Slt => ((a as i64) < (b as i64)) as u64,
        Op::Sltu => (a < b) as u64,
        Op::Sub => a.wrapping_sub(b),
        Op::Xor => a ^ b,
        _ => unreachable!(),
    }
}

fn shifts() -> Case {
    let vals: Vec<u64> = vec![
        0x8000_0000_0000_0001,
        0x7fff_ffff,
        (-5i64) as u64,
        0x0000_0001_8000_0000,
    ];
    let amts: Vec<u64> = vec![0, 1, 31, 32, 63, 65];
    let (v2, s2) = (vals.clone(), amts.clone());
    let p = assemble(
        move |a| {
            a.li(S4, OUT as i64)?;
            for &x in &v2 {
                a.li(S2, x as i64)?;
                for &y in &s2 {
                    a.li(S3, y as i64)?;
                    for op in SHIFT_OPS {
                        a.r(op, T0, S2, S3)?;
                        a.s(Op::Sd, T0, S4, 0)?;
                        a.i(Op::Addi, S4, S4, 8)?;
                    }
                }
                for (op, imm) in [
                    (Op::Slli, 63),
                    (Op::Srai, 1),
                    (Op::Srli, 60),
                    (Op::Slliw, 31),
                    (Op::Sraiw, 31),
                    (Op::Srliw, 1),
                    (Op::Addiw, -1),
                ] {
                    a.i(op, T0, S2, imm)?;
                    a.s(Op::Sd, T0, S4, 0)?;
                    a.i(Op::Addi, S4, S4, 8)?;
                }
            }
            a.halt()
        },
        vec![],
    );
    let mut want = Vec::new();
    for &x in &vals {
        for &y in &amts {
            for op in SHIFT_OPS {
                want.push(shift_ref(op, x, y));
            }
        }
        want.push(x << 63);
        want.push(((x as i64) >> 1) as u64);
        want.push(x >> 60);
        want.push(sext32((x as u32) << 31));
        want.push(((x as i32) >> 31) as i64 as u64);
        want.push(sext32((x as u32) >> 1));
        want.push(sext32((x as u32).wrapping_sub(1)));
    }
    case("shifts_and_word_ops", p, 2000, move |r| want_words(r, OUT, &want))
}

fn compressed() -> Case {
    let c = |op, rd, rs1, rs2, imm| InstrDesc::new(op, rd, rs1, rs2, imm).compressed();
    let p = assemble(
        move |a| {
            a.emit(c(Op::Addi, S0, ZERO, 0, 10))?;
            a.emit(c(Op::Addi, S1, ZERO, 0, 0))?;
            let top = a.pc();
            a.emit(c(Op::Add, S1, S1, S0, 0))?;
            a.emit(c(Op::Addi, S0, S0, 0, -1))?;
            let here = a.pc();
            a.emit(c(Op::Bne, 0, S0, ZERO, top as i64 - here as i64))?;
            a.emit(c(Op::Add, A0, ZERO, S1, 0))?;
            a.li(A2, DATA as i64)?;
            a.emit(c(Op::Sd, 0, A2, A0, 8))?;
            a.emit(c(Op::Ld, A3, A2, 0, 8))?;
            a.emit(c(Op::Sw, 0, A2, A0, 16))?;
            a.emit(c(Op::Lw, A4, A2, 0, 16))?;
            // c.j over a c.li that must not execute.
            a.emit(c(Op::Jal, ZERO, 0, 0, 4))?;
            a.emit(c(Op::Addi, A5, ZERO, 0, 31))?;
            a.emit(c(Op::Beq, 0, A5, ZERO, 4))?;
            a.emit(c(Op::Addi, A5, ZERO, 0, 7))?;
            a.emit(c(Op::Addi, A1, ZERO, 0, -3))?;
            a.halt()
        },
        vec![],
    );
    case("compressed_forms", p, 200, |r| {
        want_x(r, S0, 0)?;
        want_x(r, S1, 55)?;
        want_x(r, A0, 55)?;
        want_x(r, A3, 55)?;
        want_x(r, A4, 55)?;
        want_x(r, A5, 0)?;
        want_x(r, A1, (-3i64) as u64)?;
        let short = r.stream.iter().filter(|x| x.instr.is_compressed()).count();
        // Two setup ops, 3 per trip over 10 trips, then 8 more.
        if short != 2 + 30 + 8 {
            return Err(format!("{short} compressed instructions retired"));
        }
        Ok(())
    })
}

fn bubble_sort(n: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<u64> = (0..n).map(|_| rng.gen_range(-1000i64..1000) as u64).collect();
    let p = assemble(
        move |a| {
            a.li(S2, DATA as i64)?;
            let outer = a.here();
            a.li(T0, 0)?;
            a.mv(T1, S2)?;
            a.li(T2, n as i64 - 1)?;
            let inner = a.here();
            let keep = a.new_label();
            a.i(Op::Ld, T3, T1, 0)?;
            a.i(Op::Ld, T4, T1, 8)?;
            a.branch(Op::Bge, T4, T3, keep)?;
            a.s(Op::Sd, T4, T1, 0)?;
            a.s(Op::Sd, T3, T1, 8)?;
            a.li(T0, 1)?;
            a.bind(keep);
            a.i(Op::Addi, T1, T1, 8)?;
            a.i(Op::Addi, T2, T2, -1)?;
            a.branch(Op::Bne, T2, ZERO, inner)?;
            a.branch(Op::Bne, T0, ZERO, outer)?;
            a.halt()
        },
        vec![seg(DATA, &vals)],
    );
    let mut sorted: Vec<i64> = vals.iter().map(|&v| v as i64).collect();
    sorted.sort();
    let want: Vec<u64> = sorted.into_iter().map(|v| v as u64).collect();
    case("bubble_sort", p, 20 * (n * n) as u64 + 1000, move |r| {
        want_words(r, DATA, &want)
    })
}

fn fp_ops() -> Case {
    let p = assemble(
        |a| {
            a.li(S2, DATA as i64)?;
            a.li(T0, 7)?;
            a.emit(InstrDesc::new(Op::FcvtDL, 1, T0, 0, 0))?;
            a.li(T1, -3)?;
            a.emit(InstrDesc::new(Op::FcvtDL, 2, T1, 0, 0))?;
            a.r(Op::FaddD, 3, 1, 2)?;
            a.r(Op::FsubD, 4, 1, 2)?;
            a.r(Op::FmulD, 5, 1, 2)?;
            a.r(Op::FdivD, 6, 1, 2)?;
            a.fma(7, 6, 2, 3)?;
            a.emit(InstrDesc::new(Op::FcvtLD, T2, 6, 0, 0))?;
            a.emit(InstrDesc::new(Op::FmvXD, S3, 6, 0, 0))?;
            a.i(Op::Fld, 8, S2, 0)?;
            a.r(Op::FmulD, 9, 8, 8)?;
            a.s(Op::Fsd, 9, S2, 8)?;
            a.emit(InstrDesc::new(Op::FmvDX, 10, S3, 0, 0))?;
            a.r(Op::FdivD, 11, 10, 8)?;
            a.emit(InstrDesc::new(Op::FcvtLD, T3, 11, 0, 0))?;
            a.halt()
        },
        vec![seg(DATA, &[2.5f64.to_bits()])],
    );
    case("fp_ops", p, 100, |r| {
        let (x, y) = (7.0f64, -3.0f64);
        let q = x / y;
        let checks = [
            (3, x + y),
            (4, x - y),
            (5, x * y),
            (6, q),
            (7, q.mul_add(y, x + y)),
            (8, 2.5),
            (9, 6.25),
            (11, q / 2.5),
        ];
        for (f, v) in checks {
            if r.state.f[f] != v.to_bits() {
                return Err(format!("f{f} = {}, expected {v}", r.state.fpr(f)));
            }
        }
        want_x(r, T2, (-2i64) as u64)?;
        want_x(r, S3, q.to_bits())?;
        want_x(r, T3, (q / 2.5).round_ties_even() as i64 as u64)?;
        want_words(r, DATA + 8, &[6.25f64.to_bits()])
    })
}

fn byte_memcpy(len: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
    let p = assemble(
        move |a| {
            a.li(S2, DATA as i64)?;
            a.li(S3, OUT as i64)?;
            a.li(T0, len as i64)?;
            let top = a.here();
            a.i(Op::Lbu, T1, S2, 0)?;
            a.s(Op::Sb, T1, S3, 0)?;
            a.i(Op::Addi, S2, S2, 1)?;
            a.i(Op::Addi, S3, S3, 1)?;
            a.i(Op::Addi, T0, T0, -1)?;
            a.branch(Op::Bne, T0, ZERO, top)?;
            a.halt()
        },
        vec![Segment {
            addr: DATA,
            bytes: src.clone(),
        }],
    );
    case("byte_memcpy", p, 10 * len as u64 + 20, move |r| {
        let got = r.state.mem.read_bytes(OUT, len);
        if got != src {
            return Err("destination differs from source".into());
        }
        // One byte past the end stays untouched.
        if r.state.mem.read_u8(OUT + len as u64) != 0 {
            return Err("copy overran".into());
        }
        Ok(())
    })
}

fn gcd_ref(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd() -> Case {
    let pairs = [(1071u64, 462u64), ((3 * 7) << 40, (7 * 11) << 35), (17, 5), (0, 9)];
    let p = assemble(
        move |a| {
            a.li(S4, OUT as i64)?;
            for (i, &(x, y)) in pairs.iter().enumerate() {
                a.li(T0, x as i64)?;
                a.li(T1, y as i64)?;
                let top = a.here();
                let done = a.new_label();
                a.branch(Op::Beq, T1, ZERO, done)?;
                a.r(Op::Remu, T2, T0, T1)?;
                a.mv(T0, T1)?;
                a.mv(T1, T2)?;
                a.j(top)?;
                a.bind(done);
                a.s(Op::Sd, T0, S4, 8 * i as i64)?;
            }
            a.halt()
        },
        vec![],
    );
    let want: Vec<u64> = pairs.iter().map(|&(x, y)| gcd_ref(x, y)).collect();
    case("gcd", p, 1000, move |r| want_words(r, OUT, &want))
}

fn upper_and_jumps() -> Case {
    let p = assemble(
        |a| {
            a.emit(InstrDesc::new(Op::Auipc, T0, 0, 0, 0))?;
            a.emit(InstrDesc::new(Op::Lui, T1, 0, 0, 0x12345 << 12))?;
            a.emit(InstrDesc::new(Op::Lui, T2, 0, 0, i32::MIN as i64))?;
            a.emit(InstrDesc::new(Op::Auipc, T3, 0, 0, 0))?;
            a.i(Op::Addi, T3, T3, 12)?;
            a.emit(InstrDesc::new(Op::Jalr, RA, T3, 0, 4))?;
            a.li(A5, 99)?;
            a.li(A6, 5)?;
            a.halt()
        },
        vec![],
    );
    case("lui_auipc_jalr", p, 50, |r| {
        want_x(r, T0, CODE)?;
        want_x(r, T1, 0x1234_5000)?;
        want_x(r, T2, 0xffff_ffff_8000_0000)?;
        want_x(r, RA, CODE + 24)?;
        want_x(r, A5, 0)?;
        want_x(r, A6, 5)
    })
}

fn store_widths() -> Case {
    let p = assemble(
        |a| {
            a.li(S2, OUT as i64)?;
            a.li(T0, 0x1122_3344_5566_7788)?;
            a.s(Op::Sd, T0, S2, 0)?;
            a.li(T1, -1)?;
            a.s(Op::Sb, T1, S2, 1)?;
            a.s(Op::Sh, T1, S2, 4)?;
            a.s(Op::Sw, ZERO, S2, 8)?;
            a.s(Op::Sw, T1, S2, 12)?;
            a.i(Op::Ld, A0, S2, 0)?;
            a.i(Op::Ld, A1, S2, 8)?;
            a.halt()
        },
        vec![],
    );
    case("store_widths", p, 50, |r| {
        want_x(r, A0, 0x1122_ffff_5566_ff88)?;
        want_x(r, A1, 0xffff_ffff_0000_0000)
    })
}

/// Every hand-oracled golden program.
pub fn oracle_cases() -> Vec<Case> {
    let mut v = vec![
        fib_iter(1),
        fib_iter(10),
        fib_iter(50),
        fib_iter(93),
        fib_iter(200),
        fib_rec(12),
        kernel("matmul_n8", KernelSpec::new(KernelKind::MatmulInt).with_size(8)),
        kernel(
            "matmul_n4",
            KernelSpec::new(KernelKind::MatmulInt).with_size(4).with_seed(9),
        ),
        kernel("seqcopy_4k", KernelSpec::new(KernelKind::Seqcopy).with_size(4096)),
        kernel("sgcopy_4k", KernelSpec::new(KernelKind::Sgcopy).with_size(4096)),
        kernel("branchy_2k", KernelSpec::new(KernelKind::Branchy).with_size(2000)),
        kernel("fp_nbody_8", KernelSpec::new(KernelKind::FpNbodyLike).with_size(8)),
        kernel(
            "dependency_chain_1k",
            KernelSpec::new(KernelKind::DependencyChain).with_size(1000),
        ),
        kernel(
            "independent_alu_1k",
            KernelSpec::new(KernelKind::IndependentAlu).with_size(1000),
        ),
        empty_loop(100),
        branch_ladder(100),
        muldiv(),
        loads(),
        shifts(),
        compressed(),
        bubble_sort(16, 3),
        fp_ops(),
        byte_memcpy(100, 4),
        gcd(),
        upper_and_jumps(),
        store_widths(),
    ];
    let mut identity = KernelSpec::new(KernelKind::Sgcopy).with_size(4096);
    identity.identity_index = true;
    v.push(kernel("sgcopy_identity_4k", identity));
    v
}

/// Wraps a program's golden run as a workload every model can replay.
pub fn workload(name: &str, program: &Program, budget: u64) -> Workload {
    let run = golden::run(program, budget).expect("golden run");
    Workload {
        name: name.to_string(),
        kernel: None,
        final_digest: run.state.mem.digest(),
        image: program.image(),
        stream: run.stream,
        copy_bytes: None,
    }
}

/// `trips` loop iterations of `body`, followed by halt.
pub fn looped(trips: u64, body: impl Fn(&mut Assembler) -> Result<(), IsaError>) -> Program {
    assemble(
        |a| {
            a.li(S2, DATA as i64)?;
            a.li(S3, 3)?;
            a.li(S4, 5)?;
            a.li(S5, trips as i64)?;
            let top = a.here();
            body(a)?;
            a.i(Op::Addi, S5, S5, -1)?;
            a.branch(Op::Bne, S5, ZERO, top)?;
            a.halt()
        },
        vec![seg(DATA, &[1.5f64.to_bits(), 2.0f64.to_bits(), 0, 0])],
    )
}

/// Back-to-back writes of one register by a slow and a fast producer.
pub fn waw_dense(trips: u64) -> Program {
    looped(trips, |a| {
        for r in [T0, T1, T2, T3, T4, T5] {
            a.r(Op::Mul, r, S3, S4)?;
            a.i(Op::Addi, r, S4, 1)?;
        }
        Ok(())
    })
}

/// Pairs of ALU ops where the second consumes the first, and each pair
/// consumes the one before it. Without a cascaded ALU every op waits.
pub fn dependent_pairs(trips: u64) -> Program {
    looped(trips, |a| {
        for _ in 0..6 {
            a.r(Op::Add, T0, T1, S3)?;
            a.r(Op::Add, T1, T0, S4)?;
        }
        Ok(())
    })
}

/// Independent FP arithmetic interleaved with FP stores.
pub fn fp_store_mix(trips: u64) -> Program {
    looped(trips, |a| {
        a.i(Op::Fld, 1, S2, 0)?;
        a.i(Op::Fld, 2, S2, 8)?;
        for k in 0..4 {
            a.r(Op::FaddD, 3 + k, 1, 2)?;
            a.s(Op::Fsd, 1, S2, 16 + 8 * (k as i64 % 2))?;
            a.r(Op::FmulD, 8 + k, 1, 2)?;
            a.s(Op::Fsd, 2, S2, 16)?;
        }
        Ok(())
    })
}

/// A divide at the head of each trip, followed by enough independent ALU
/// work to fill several compacted ROB entries behind it.
pub fn div_headed_alu(trips: u64) -> Program {
    looped(trips, |a| {
        a.r(Op::Div, T6, S4, S3)?;
        let regs = [T0, T1, T2, T3, T4, T5, A0, A1, A2, A3, A4, A5];
        for i in 0..36 {
            let r = regs[i % regs.len()];
            a.i(Op::Addi, r, S3, i as i64)?;
        }
        Ok(())
    })
}

/// Loads alternating between two addresses that agree in bits [11:0] and
/// differ in bits [14:12], then one store to each.
pub fn vipt_alternation(trips: u64) -> Program {
    const A: u64 = 0x8040_0000;
    const B: u64 = A + 0x5000;
    assemble(
        |a| {
            a.li(S2, A as i64)?;
            a.li(S3, B as i64)?;
            a.li(S5, trips as i64)?;
            let top = a.here();
            a.i(Op::Ld, T0, S2, 0)?;
            a.i(Op::Ld, T1, S3, 0)?;
            a.i(Op::Addi, S5, S5, -1)?;
            a.branch(Op::Bne, S5, ZERO, top)?;
            a.li(T2, 0x5a5a)?;
            a.s(Op::Sd, T2, S2, 0)?;
            a.s(Op::Sd, T2, S3, 8)?;
            a.halt()
        },
        vec![seg(A, &[11]), seg(B, &[22])],
    )
}
