use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expect, Kernel, KernelKind, KernelSpec, WorkloadError, CODE_BASE};
use crate::golden::{Program, Segment};
use crate::isa::reg::*;
use crate::isa::{Assembler, InstrDesc, IsaError, Op};

/// Base address of data region `k`. Regions are 1 MiB apart plus a small
/// stagger so that their lines fall in different L1 sets.
pub(crate) fn region(k: u64) -> u64 {
    0x8100_0000 + k * 0x10_0000 + k * 0x2040
}

fn words(v: &[u64]) -> Vec<u8> {
    v.iter().flat_map(|w| w.to_le_bytes()).collect()
}

fn program(a: Assembler, data: Vec<Segment>) -> Result<Program, WorkloadError> {
    let code = a.finish()?;
    Program::new(CODE_BASE, code, data).map_err(|e| WorkloadError::Build(e.to_string()))
}

pub(super) fn matmul_int(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let n = spec.size;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a: Vec<u64> = (0..n * n).map(|_| rng.gen_range(-100i64..=100) as u64).collect();
    let b: Vec<u64> = (0..n * n).map(|_| rng.gen_range(-100i64..=100) as u64).collect();
    let mut c = vec![0u64; (n * n) as usize];
    for i in 0..n as usize {
        for j in 0..n as usize {
            let mut s = 0u64;
            for k in 0..n as usize {
                s = s.wrapping_add(a[i * n as usize + k].wrapping_mul(b[k * n as usize + j]));
            }
            c[i * n as usize + j] = s;
        }
    }
    let (ra, rb, rc) = (region(0), region(1), region(2));
    let row = (n * 8) as i64;

    let mut m = Assembler::new(CODE_BASE);
    m.li(S0, ra as i64)?;
    m.li(S1, rb as i64)?;
    m.li(S2, rc as i64)?;
    m.li(S3, row)?;
    m.mv(S5, S0)?;
    m.mv(S7, S2)?;
    m.li(S8, (ra + n * n * 8) as i64)?;
    let outer = m.here();
    m.li(S6, 0)?;
    m.r(Op::Add, S9, S5, S3)?;
    let mid = m.here();
    m.mv(T3, S5)?;
    m.r(Op::Add, T4, S1, S6)?;
    m.li(T5, 0)?;
    m.li(A7, 0)?;
    // Inner product unrolled twice with two accumulators and software
    // pipelined: each trip multiplies the pair loaded by the previous one.
    m.i(Op::Ld, T0, T3, 0)?;
    m.i(Op::Ld, T1, T4, 0)?;
    m.r(Op::Add, A6, T4, S3)?;
    m.i(Op::Ld, A4, T3, 8)?;
    m.i(Op::Ld, A5, A6, 0)?;
    m.r(Op::Add, T4, A6, S3)?;
    m.i(Op::Addi, T3, T3, 16)?;
    let inner = m.here();
    m.r(Op::Mul, T2, T0, T1)?;
    m.i(Op::Ld, T0, T3, 0)?;
    m.r(Op::Mul, A3, A4, A5)?;
    m.i(Op::Ld, T1, T4, 0)?;
    m.r(Op::Add, A6, T4, S3)?;
    m.i(Op::Ld, A4, T3, 8)?;
    m.i(Op::Addi, T3, T3, 16)?;
    m.i(Op::Ld, A5, A6, 0)?;
    m.r(Op::Add, T4, A6, S3)?;
    m.r(Op::Add, T5, T5, T2)?;
    m.r(Op::Add, A7, A7, A3)?;
    m.branch(Op::Bne, T3, S9, inner)?;
    m.r(Op::Mul, T2, T0, T1)?;
    m.r(Op::Mul, A3, A4, A5)?;
    m.r(Op::Add, T5, T5, T2)?;
    m.r(Op::Add, A7, A7, A3)?;
    m.r(Op::Add, T5, T5, A7)?;
    m.s(Op::Sd, T5, S7, 0)?;
    m.i(Op::Addi, S7, S7, 8)?;
    m.i(Op::Addi, S6, S6, 8)?;
    m.branch(Op::Bne, S6, S3, mid)?;
    m.mv(S5, S9)?;
    m.branch(Op::Bne, S5, S8, outer)?;
    m.halt()?;

    let data = vec![
        Segment {
            addr: ra,
            bytes: words(&a),
        },
        Segment {
            addr: rb,
            bytes: words(&b),
        },
    ];
    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, data)?,
        budget: n * n * (n * 6 + 24) + n * 4 + 1000,
        expect: Expect {
            memory: vec![(rc, words(&c))],
            regs: vec![],
        },
        copy_bytes: None,
        site_outcomes: vec![],
    })
}

fn random_bytes(seed: u64, len: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![0u8; len as usize];
    rng.fill(&mut v[..]);
    // Keep every word nonzero so copies are visible in the digest.
    for w in v.chunks_mut(8) {
        w[0] |= 1;
    }
    v
}

pub(super) fn seqcopy(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let bytes = spec.size;
    let src = random_bytes(spec.seed, bytes);
    let (rs, rd) = (region(0), region(4));
    let regs = [T0, T1, T2, T3, T4, T5, T6, S2];

    let mut m = Assembler::new(CODE_BASE);
    m.li(A0, rs as i64)?;
    m.li(A1, rd as i64)?;
    m.li(A2, (rs + bytes) as i64)?;
    let top = m.here();
    for (k, &r) in regs.iter().enumerate() {
        m.i(Op::Ld, r, A0, 8 * k as i64)?;
    }
    for (k, &r) in regs.iter().enumerate() {
        m.s(Op::Sd, r, A1, 8 * k as i64)?;
    }
    m.i(Op::Addi, A0, A0, 64)?;
    m.i(Op::Addi, A1, A1, 64)?;
    m.branch(Op::Bne, A0, A2, top)?;
    m.halt()?;

    Ok(Kernel {
        spec: spec.clone(),
        program: program(
            m,
            vec![Segment {
                addr: rs,
                bytes: src.clone(),
            }],
        )?,
        budget: bytes / 64 * 19 + 1000,
        expect: Expect {
            memory: vec![(rd, src)],
            regs: vec![],
        },
        copy_bytes: Some(bytes),
        site_outcomes: vec![],
    })
}

fn permutation(rng: &mut ChaCha8Rng, n: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (0..n).collect();
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

pub(super) fn sgcopy(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let bytes = spec.size;
    let elems = (bytes / 8) as u32;
    let src = random_bytes(spec.seed, bytes);
    let (gather, scatter) = if spec.identity_index {
        ((0..elems).collect::<Vec<_>>(), (0..elems).collect::<Vec<_>>())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5ca7_7e12);
        (permutation(&mut rng, elems), permutation(&mut rng, elems))
    };
    let mut dst = vec![0u8; bytes as usize];
    for i in 0..elems as usize {
        let (g, s) = (gather[i] as usize * 8, scatter[i] as usize * 8);
        dst[s..s + 8].copy_from_slice(&src[g..g + 8]);
    }
    let le = |v: &[u32]| -> Vec<u8> { v.iter().flat_map(|x| x.to_le_bytes()).collect() };
    let (rg, rsc, rs, rd) = (region(0), region(1), region(2), region(4));

    let mut m = Assembler::new(CODE_BASE);
    m.li(A0, rg as i64)?;
    m.li(A1, rsc as i64)?;
    m.li(A2, rs as i64)?;
    m.li(A3, rd as i64)?;
    m.li(A4, (rg + 4 * elems as u64) as i64)?;
    let g = [T0, T1, T2, T3];
    let s = [T4, T5, T6, S2];
    let d = [S3, S4, S5, S6];
    let top = m.here();
    for k in 0..4 {
        m.i(Op::Lwu, g[k], A0, 4 * k as i64)?;
        m.i(Op::Lwu, s[k], A1, 4 * k as i64)?;
    }
    for k in 0..4 {
        m.i(Op::Slli, g[k], g[k], 3)?;
        m.r(Op::Add, g[k], g[k], A2)?;
        m.i(Op::Slli, s[k], s[k], 3)?;
        m.r(Op::Add, s[k], s[k], A3)?;
    }
    for k in 0..4 {
        m.i(Op::Ld, d[k], g[k], 0)?;
    }
    for k in 0..4 {
        m.s(Op::Sd, d[k], s[k], 0)?;
    }
    m.i(Op::Addi, A0, A0, 16)?;
    m.i(Op::Addi, A1, A1, 16)?;
    m.branch(Op::Bne, A0, A4, top)?;
    m.halt()?;

    let data = vec![
        Segment {
            addr: rg,
            bytes: le(&gather),
        },
        Segment {
            addr: rsc,
            bytes: le(&scatter),
        },
        Segment { addr: rs, bytes: src },
    ];
    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, data)?,
        budget: elems as u64 / 4 * 35 + 1000,
        expect: Expect {
            memory: vec![(rd, dst)],
            regs: vec![],
        },
        copy_bytes: Some(bytes),
        site_outcomes: vec![],
    })
}

/// Iterations over which each branch site repeats one short pattern.
const SEGMENT_ITERS: u64 = 256;
pub(crate) const BRANCH_SITES: u64 = 4;

/// All outcome patterns of period 1 to 3, as (period, bits).
fn patterns() -> Vec<Vec<bool>> {
    let mut v = Vec::new();
    for p in 1..=3u32 {
        for bits in 0..(1u32 << p) {
            v.push((0..p).map(|i| bits >> i & 1 == 1).collect());
        }
    }
    v
}

/// Outcome table, `iters * BRANCH_SITES` entries in execution order.
/// Each site repeats a pattern of period at most 3 for a segment of
/// iterations; patterns are drawn with taken probability `rate` and
/// steered so the running taken count stays close to `rate`.
fn branch_outcomes(seed: u64, iters: u64, rate: f64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pats = patterns();
    let frac = |p: &[bool]| p.iter().filter(|&&b| b).count() as f64 / p.len() as f64;
    let mut out = vec![false; (iters * BRANCH_SITES) as usize];
    let mut taken = 0.0f64;
    let mut total = 0.0f64;
    let mut seg = 0;
    while seg < iters {
        let len = SEGMENT_ITERS.min(iters - seg);
        for site in 0..BRANCH_SITES {
            let p = rng.gen_range(1..=3usize);
            let mut pat: Vec<bool> = (0..p).map(|_| rng.gen_bool(rate)).collect();
            let deficit = rate * (total + len as f64) - (taken + frac(&pat) * len as f64);
            if deficit.abs() > 0.25 * len as f64 {
                // Replace with the pattern that best closes the gap.
                let need = (rate * (total + len as f64) - taken) / len as f64;
                pat = pats
                    .iter()
                    .filter(|q| q.len() == p || p == 1)
                    .min_by(|a, b| (frac(a) - need).abs().total_cmp(&(frac(b) - need).abs()))
                    .cloned()
                    .expect("nonempty catalog");
            }
            for it in 0..len {
                let t = pat[(it % pat.len() as u64) as usize];
                out[((seg + it) * BRANCH_SITES + site) as usize] = t;
                taken += t as u8 as f64;
            }
            total += len as f64;
        }
        seg += len;
    }
    out
}

pub(super) fn branchy(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let iters = spec.size / BRANCH_SITES;
    let outcomes = branch_outcomes(spec.seed, iters, spec.taken_rate);
    // A zero byte means the site's `beqz` is taken.
    let table: Vec<u8> = outcomes.iter().map(|&t| if t { 0 } else { 1 }).collect();
    let mut counts = [0u64; BRANCH_SITES as usize];
    for (i, &t) in outcomes.iter().enumerate() {
        if !t {
            counts[i % BRANCH_SITES as usize] += 1;
        }
    }
    let rt = region(0);
    let acc = [S2, S3, S4, S5];

    let mut m = Assembler::new(CODE_BASE);
    m.li(A0, rt as i64)?;
    m.li(A1, (rt + iters * BRANCH_SITES) as i64)?;
    for &r in &acc {
        m.li(r, 0)?;
    }
    let top = m.here();
    for (k, &r) in acc.iter().enumerate() {
        let skip = m.new_label();
        m.i(Op::Lbu, T0, A0, k as i64)?;
        m.branch(Op::Beq, T0, ZERO, skip)?;
        m.i(Op::Addi, r, r, 1)?;
        m.r(Op::Xor, T1, T1, r)?;
        m.bind(skip);
    }
    m.i(Op::Addi, A0, A0, BRANCH_SITES as i64)?;
    m.branch(Op::Bne, A0, A1, top)?;
    m.halt()?;

    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, vec![Segment { addr: rt, bytes: table }])?,
        budget: iters * 20 + 1000,
        expect: Expect {
            memory: vec![],
            regs: acc.iter().zip(counts).map(|(&r, c)| (r, c)).collect(),
        },
        copy_bytes: None,
        site_outcomes: outcomes,
    })
}

pub(super) const NBODY_STEPS: u64 = 16;

pub(super) fn fp_nbody_like(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let n = spec.size as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v = vec![0.0f64; n];
    let mass: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..2.0)).collect();
    let dt = 0.001f64;
    let init_x = x.clone();
    for _ in 0..NBODY_STEPS {
        for i in 0..n {
            let mut a = 0.0f64;
            for j in 0..n {
                a = mass[j].mul_add(x[j] - x[i], a);
            }
            a /= mass[i];
            v[i] = a.mul_add(dt, v[i]);
        }
        for i in 0..n {
            x[i] = v[i].mul_add(dt, x[i]);
        }
    }
    let f64s = |v: &[f64]| words(&v.iter().map(|f| f.to_bits()).collect::<Vec<_>>());
    let (rx, rv, rm, rk) = (region(0), region(1), region(2), region(3));

    let mut m = Assembler::new(CODE_BASE);
    let fr = |n: u8| n;
    m.li(A0, rx as i64)?;
    m.li(A1, rv as i64)?;
    m.li(A2, rm as i64)?;
    m.li(A3, (n * 8) as i64)?;
    m.li(T6, rk as i64)?;
    m.i(Op::Fld, fr(10), T6, 0)?;
    m.li(S0, NBODY_STEPS as i64)?;
    let step = m.here();
    m.li(S1, 0)?;
    let body = m.here();
    m.r(Op::Add, T0, A0, S1)?;
    m.i(Op::Fld, fr(0), T0, 0)?;
    m.emit(InstrDesc::new(Op::FmvDX, fr(4), ZERO, 0, 0))?;
    m.mv(T1, A0)?;
    m.mv(T2, A2)?;
    m.r(Op::Add, T3, A0, A3)?;
    let inner = m.here();
    m.i(Op::Fld, fr(1), T1, 0)?;
    m.i(Op::Fld, fr(2), T2, 0)?;
    m.r(Op::FsubD, fr(3), fr(1), fr(0))?;
    m.i(Op::Addi, T1, T1, 8)?;
    m.i(Op::Addi, T2, T2, 8)?;
    m.fma(fr(4), fr(2), fr(3), fr(4))?;
    m.branch(Op::Bne, T1, T3, inner)?;
    m.r(Op::Add, T4, A2, S1)?;
    m.i(Op::Fld, fr(5), T4, 0)?;
    m.r(Op::FdivD, fr(4), fr(4), fr(5))?;
    m.r(Op::Add, T5, A1, S1)?;
    m.i(Op::Fld, fr(6), T5, 0)?;
    m.fma(fr(6), fr(4), fr(10), fr(6))?;
    m.s(Op::Fsd, fr(6), T5, 0)?;
    m.i(Op::Addi, S1, S1, 8)?;
    m.branch(Op::Bne, S1, A3, body)?;
    m.li(S1, 0)?;
    let upd = m.here();
    m.r(Op::Add, T0, A0, S1)?;
    m.r(Op::Add, T5, A1, S1)?;
    m.i(Op::Fld, fr(0), T0, 0)?;
    m.i(Op::Fld, fr(6), T5, 0)?;
    m.fma(fr(0), fr(6), fr(10), fr(0))?;
    m.s(Op::Fsd, fr(0), T0, 0)?;
    m.i(Op::Addi, S1, S1, 8)?;
    m.branch(Op::Bne, S1, A3, upd)?;
    m.i(Op::Addi, S0, S0, -1)?;
    m.branch(Op::Bne, S0, ZERO, step)?;
    m.halt()?;

    let data = vec![
        Segment {
            addr: rx,
            bytes: f64s(&init_x),
        },
        Segment {
            addr: rm,
            bytes: f64s(&mass),
        },
        Segment {
            addr: rk,
            bytes: f64s(&[dt]),
        },
    ];
    let n = n as u64;
    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, data)?,
        budget: NBODY_STEPS * (n * n * 7 + n * 30 + 8) + 1000,
        expect: Expect {
            memory: vec![(rx, f64s(&x)), (rv, f64s(&v))],
            regs: vec![],
        },
        copy_bytes: None,
        site_outcomes: vec![],
    })
}

/// Instructions per loop body in the ALU stream kernels.
pub(super) const ALU_BODY: u64 = 500;

pub(super) fn dependency_chain(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let iters = spec.size / ALU_BODY;
    let mut m = Assembler::new(CODE_BASE);
    m.li(A0, 0)?;
    m.li(S0, iters as i64)?;
    let top = m.here();
    m.i(Op::Addi, S0, S0, -1)?;
    for _ in 0..ALU_BODY {
        m.i(Op::Addi, A0, A0, 1)?;
    }
    m.branch(Op::Bne, S0, ZERO, top)?;
    m.halt()?;
    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, vec![])?,
        budget: iters * (ALU_BODY + 2) + 1000,
        expect: Expect {
            memory: vec![],
            regs: vec![(A0, iters * ALU_BODY)],
        },
        copy_bytes: None,
        site_outcomes: vec![],
    })
}

pub(super) fn independent_alu(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    let iters = spec.size / ALU_BODY;
    let regs = [T0, T1, T2, T3, T4, T5, T6, S2, S3, S4, S5, S6];
    let mut m = Assembler::new(CODE_BASE);
    for &r in &regs {
        m.li(r, 0)?;
    }
    m.li(S0, iters as i64)?;
    let top = m.here();
    m.i(Op::Addi, S0, S0, -1)?;
    let mut expect = vec![0u64; regs.len()];
    for k in 0..ALU_BODY as usize {
        let r = k % regs.len();
        m.i(Op::Addi, regs[r], regs[r], r as i64 + 1)?;
        expect[r] += (r as u64 + 1) * iters;
    }
    m.branch(Op::Bne, S0, ZERO, top)?;
    m.halt()?;
    Ok(Kernel {
        spec: spec.clone(),
        program: program(m, vec![])?,
        budget: iters * (ALU_BODY + 2) + 1000,
        expect: Expect {
            memory: vec![],
            regs: regs.iter().copied().zip(expect).collect(),
        },
        copy_bytes: None,
        site_outcomes: vec![],
    })
}

impl From<IsaError> for WorkloadError {
    fn from(e: IsaError) -> WorkloadError {
        WorkloadError::Build(e.to_string())
    }
}

pub(super) fn build(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    match spec.kind {
        KernelKind::MatmulInt => matmul_int(spec),
        KernelKind::Seqcopy => seqcopy(spec),
        KernelKind::Sgcopy => sgcopy(spec),
        KernelKind::Branchy => branchy(spec),
        KernelKind::FpNbodyLike => fp_nbody_like(spec),
        KernelKind::DependencyChain => dependency_chain(spec),
        KernelKind::IndependentAlu => independent_alu(spec),
    }
}
