use super::{ArchState, ExecError, MemAccess, MemKind, Program, RetireRecord};
use crate::isa::{decode, Instr, IsaError, Op};

fn sext32(v: u64) -> u64 {
    v as u32 as i32 as i64 as u64
}

fn fetch(state: &ArchState) -> Result<Instr, ExecError> {
    let pc = state.pc;
    if !pc.is_multiple_of(2) {
        return Err(ExecError::MisalignedAccess { pc, vaddr: pc });
    }
    let raw = state.mem.read(pc, 4) as u32;
    decode(raw, state.subset).map_err(|e| match e {
        IsaError::IllegalInstruction => ExecError::IllegalInstruction { pc },
        _ => ExecError::UnsupportedEncoding {
            pc,
            raw: if raw & 3 == 3 { raw } else { raw & 0xffff },
        },
    })
}

fn div_signed(a: i64, b: i64) -> i64 {
    if b == 0 {
        -1
    } else {
        a.wrapping_div(b)
    }
}

fn rem_signed(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        a.wrapping_rem(b)
    }
}

fn div_unsigned(a: u64, b: u64) -> u64 {
    a.checked_div(b).unwrap_or(u64::MAX)
}

fn rem_unsigned(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        a % b
    }
}

/// Executes one instruction and returns its retire record.
pub fn step(state: &mut ArchState) -> Result<RetireRecord, ExecError> {
    if state.halted {
        return Err(ExecError::Halted);
    }
    let instr = fetch(state)?;
    let pc = state.pc;
    let x = |r: u8| state.x[r as usize];
    let rs1 = x(instr.rs1);
    let rs2 = x(instr.rs2);
    let imm = instr.imm;
    let fall = pc.wrapping_add(instr.width as u64);
    let mut next_pc = fall;
    let mut rd_val: Option<u64> = None;
    let mut fd_val: Option<f64> = None;
    let mut fd_bits: Option<u64> = None;
    let mut mem = None;

    let f = |r: u8| f64::from_bits(state.f[r as usize]);
    let addr = rs1.wrapping_add(imm as u64);

    match instr.op {
        Op::Lui => rd_val = Some(imm as u64),
        Op::Auipc => rd_val = Some(pc.wrapping_add(imm as u64)),
        Op::Jal => {
            rd_val = Some(fall);
            next_pc = pc.wrapping_add(imm as u64);
        }
        Op::Jalr => {
            rd_val = Some(fall);
            next_pc = addr & !1;
        }
        Op::Beq | Op::Bne | Op::Blt | Op::Bge | Op::Bltu | Op::Bgeu => {
            let take = match instr.op {
                Op::Beq => rs1 == rs2,
                Op::Bne => rs1 != rs2,
                Op::Blt => (rs1 as i64) < (rs2 as i64),
                Op::Bge => (rs1 as i64) >= (rs2 as i64),
                Op::Bltu => rs1 < rs2,
                _ => rs1 >= rs2,
            };
            if take {
                next_pc = pc.wrapping_add(imm as u64);
            }
        }
        Op::Lb | Op::Lh | Op::Lw | Op::Ld | Op::Lbu | Op::Lhu | Op::Lwu | Op::Fld => {
            let bytes = instr.op.mem_bytes().unwrap_or(8);
            if addr % bytes as u64 != 0 {
                return Err(ExecError::MisalignedAccess { pc, vaddr: addr });
            }
            let raw = state.mem.read(addr, bytes);
            let v = match instr.op {
                Op::Lb => raw as u8 as i8 as i64 as u64,
                Op::Lh => raw as u16 as i16 as i64 as u64,
                Op::Lw => sext32(raw),
                _ => raw,
            };
            if instr.op == Op::Fld {
                fd_bits = Some(v);
            } else {
                rd_val = Some(v);
            }
            mem = Some(MemAccess {
                vaddr: addr,
                bytes,
                kind: MemKind::Load,
                data: 0,
            });
        }
        Op::Sb | Op::Sh | Op::Sw | Op::Sd | Op::Fsd => {
            let bytes = instr.op.mem_bytes().unwrap_or(8);
            if addr % bytes as u64 != 0 {
                return Err(ExecError::MisalignedAccess { pc, vaddr: addr });
            }
            let v = if instr.op == Op::Fsd {
                state.f[instr.rs2 as usize]
            } else {
                rs2
            };
            let data = if bytes == 8 { v } else { v & ((1u64 << (8 * bytes)) - 1) };
            state.mem.write(addr, bytes, data);
            mem = Some(MemAccess {
                vaddr: addr,
                bytes,
                kind: MemKind::Store,
                data,
            });
        }
        Op::Addi => rd_val = Some(rs1.wrapping_add(imm as u64)),
        Op::Slti => rd_val = Some(((rs1 as i64) < imm) as u64),
        Op::Sltiu => rd_val = Some((rs1 < imm as u64) as u64),
        Op::Xori => rd_val = Some(rs1 ^ imm as u64),
        Op::Ori => rd_val = Some(rs1 | imm as u64),
        Op::Andi => rd_val = Some(rs1 & imm as u64),
        Op::Slli => rd_val = Some(rs1 << (imm & 63)),
        Op::Srli => rd_val = Some(rs1 >> (imm & 63)),
        Op::Srai => rd_val = Some(((rs1 as i64) >> (imm & 63)) as u64),
        Op::Add => rd_val = Some(rs1.wrapping_add(rs2)),
        Op::Sub => rd_val = Some(rs1.wrapping_sub(rs2)),
        Op::Sll => rd_val = Some(rs1 << (rs2 & 63)),
        Op::Slt => rd_val = Some(((rs1 as i64) < (rs2 as i64)) as u64),
        Op::Sltu => rd_val = Some((rs1 < rs2) as u64),
        Op::Xor => rd_val = Some(rs1 ^ rs2),
        Op::Srl => rd_val = Some(rs1 >> (rs2 & 63)),
        Op::Sra => rd_val = Some(((rs1 as i64) >> (rs2 & 63)) as u64),
        Op::Or => rd_val = Some(rs1 | rs2),
        Op::And => rd_val = Some(rs1 & rs2),
        Op::Addiw => rd_val = Some(sext32(rs1.wrapping_add(imm as u64))),
        Op::Slliw => rd_val = Some(sext32(((rs1 as u32) << (imm & 31)) as u64)),
        Op::Srliw => rd_val = Some(sext32(((rs1 as u32) >> (imm & 31)) as u64)),
        Op::Sraiw => rd_val = Some(((rs1 as i32) >> (imm & 31)) as i64 as u64),
        Op::Addw => rd_val = Some(sext32(rs1.wrapping_add(rs2))),
        Op::Subw => rd_val = Some(sext32(rs1.wrapping_sub(rs2))),
        Op::Sllw => rd_val = Some(sext32(((rs1 as u32) << (rs2 & 31)) as u64)),
        Op::Srlw => rd_val = Some(sext32(((rs1 as u32) >> (rs2 & 31)) as u64)),
        Op::Sraw => rd_val = Some(((rs1 as i32) >> (rs2 & 31)) as i64 as u64),
        Op::Fence | Op::Ebreak => {}
        Op::Ecall => {
            if state.x[17] == 0 {
                state.halted = true;
            }
        }
        // Cycle, time and instret all read the retired count: the golden
        // model has no notion of time.
        Op::Csrrs => rd_val = Some(state.retired),
        Op::Mul => rd_val = Some(rs1.wrapping_mul(rs2)),
        Op::Mulh => rd_val = Some(((rs1 as i64 as i128 * rs2 as i64 as i128) >> 64) as u64),
        Op::Mulhsu => rd_val = Some(((rs1 as i64 as i128 * rs2 as i128) >> 64) as u64),
        Op::Mulhu => rd_val = Some(((rs1 as u128 * rs2 as u128) >> 64) as u64),
        Op::Div => rd_val = Some(div_signed(rs1 as i64, rs2 as i64) as u64),
        Op::Divu => rd_val = Some(div_unsigned(rs1, rs2)),
        Op::Rem => rd_val = Some(rem_signed(rs1 as i64, rs2 as i64) as u64),
        Op::Remu => rd_val = Some(rem_unsigned(rs1, rs2)),
        Op::Mulw => rd_val = Some(sext32(rs1.wrapping_mul(rs2))),
        Op::Divw => rd_val = Some(div_signed(rs1 as i32 as i64, rs2 as i32 as i64) as i32 as i64 as u64),
        Op::Divuw => rd_val = Some(sext32(div_unsigned(rs1 as u32 as u64, rs2 as u32 as u64))),
        Op::Remw => rd_val = Some(rem_signed(rs1 as i32 as i64, rs2 as i32 as i64) as i32 as i64 as u64),
        Op::Remuw => rd_val = Some(sext32(rem_unsigned(rs1 as u32 as u64, rs2 as u32 as u64))),
        Op::FaddD => fd_val = Some(f(instr.rs1) + f(instr.rs2)),
        Op::FsubD => fd_val = Some(f(instr.rs1) - f(instr.rs2)),
        Op::FmulD => fd_val = Some(f(instr.rs1) * f(instr.rs2)),
        Op::FdivD => fd_val = Some(f(instr.rs1) / f(instr.rs2)),
        Op::FmaddD => fd_val = Some(f(instr.rs1).mul_add(f(instr.rs2), f(instr.rs3))),
        Op::FmvXD => rd_val = Some(state.f[instr.rs1 as usize]),
        Op::FmvDX => fd_bits = Some(rs1),
        Op::FcvtDL => fd_val = Some(rs1 as i64 as f64),
        Op::FcvtLD => rd_val = Some(f(instr.rs1).round_ties_even() as i64 as u64),
    }

    if let Some(v) = rd_val {
        if instr.rd != 0 {
            state.x[instr.rd as usize] = v;
        }
    }
    if let Some(v) = fd_val {
        state.f[instr.rd as usize] = v.to_bits();
    }
    if let Some(v) = fd_bits {
        state.f[instr.rd as usize] = v;
    }

    let rec = RetireRecord::new(state.retired, pc, next_pc, instr, mem);
    state.pc = next_pc;
    state.retired += 1;
    Ok(rec)
}

/// Result of a completed golden run.
#[derive(Debug, Clone)]
pub struct GoldenRun {
    pub state: ArchState,
    pub stream: Vec<RetireRecord>,
}

/// A run that stopped before the halt convention; carries the partial run.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: ExecError,
    pub partial: GoldenRun,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} instructions", self.error, self.partial.stream.len())
    }
}

impl std::error::Error for RunFailure {}

/// Runs `program` until `ecall` with a7 == 0 or until `max_instrs` have retired.
pub fn run(program: &Program, max_instrs: u64) -> Result<GoldenRun, Box<RunFailure>> {
    let mut state = ArchState::new(program);
    let mut stream = Vec::new();
    while !state.halted {
        if state.retired >= max_instrs {
            return Err(Box::new(RunFailure {
                error: ExecError::InstructionBudgetExceeded(max_instrs),
                partial: GoldenRun { state, stream },
            }));
        }
        match step(&mut state) {
            Ok(r) => stream.push(r),
            Err(error) => {
                return Err(Box::new(RunFailure {
                    error,
                    partial: GoldenRun { state, stream },
                }))
            }
        }
    }
    Ok(GoldenRun { state, stream })
}
