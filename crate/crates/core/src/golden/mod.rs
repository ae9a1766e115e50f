//! Functional (golden) model.
//!
//! Executes a program to completion and produces the committed instruction
//! stream. The timing models replay that stream; wrong-path instructions are
//! never executed.

mod exec;
mod loader;
mod memory;

pub use exec::{run, step, GoldenRun, RunFailure};
pub use loader::{format_flat_binary, parse_flat_binary, LoadError};
pub use memory::{Fnv, Memory, PAGE_BYTES};

use crate::isa::{Instr, IsaSubset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("illegal instruction at pc {pc:#x}")]
    IllegalInstruction { pc: u64 },
    #[error("unsupported encoding {raw:#010x} at pc {pc:#x}")]
    UnsupportedEncoding { pc: u64, raw: u32 },
    #[error("misaligned access to {vaddr:#x} at pc {pc:#x}")]
    MisalignedAccess { pc: u64, vaddr: u64 },
    #[error("instruction budget of {0} exceeded")]
    InstructionBudgetExceeded(u64),
    #[error("step on a halted machine")]
    Halted,
}

/// Architectural state of one hart.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchState {
    pub pc: u64,
    pub x: [u64; 32],
    /// Raw bit patterns of the FP registers.
    pub f: [u64; 32],
    pub mem: Memory,
    pub retired: u64,
    pub halted: bool,
    pub subset: IsaSubset,
}

impl ArchState {
    pub fn new(program: &Program) -> ArchState {
        ArchState {
            pc: program.entry,
            x: [0; 32],
            f: [0; 32],
            mem: program.image(),
            retired: 0,
            halted: false,
            subset: IsaSubset::FULL,
        }
    }

    pub fn fpr(&self, n: usize) -> f64 {
        f64::from_bits(self.f[n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemKind {
    Load,
    Store,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemAccess {
    pub vaddr: u64,
    pub bytes: u8,
    pub kind: MemKind,
    /// Value written by a store (low `bytes` bytes); zero for loads.
    pub data: u64,
}

/// One committed dynamic instruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetireRecord {
    pub seq: u64,
    pub pc: u64,
    pub next_pc: u64,
    pub instr: Instr,
    pub is_branch: bool,
    pub is_jump: bool,
    pub is_call: bool,
    pub is_return: bool,
    /// Conditional branch resolved taken, or any jump.
    pub taken: bool,
    pub mem: Option<MemAccess>,
}

impl RetireRecord {
    pub fn new(seq: u64, pc: u64, next_pc: u64, instr: Instr, mem: Option<MemAccess>) -> RetireRecord {
        let is_branch = instr.op.is_branch();
        let is_jump = instr.op.is_jump();
        RetireRecord {
            seq,
            pc,
            next_pc,
            instr,
            is_branch,
            is_jump,
            is_call: instr.is_call(),
            is_return: instr.is_return(),
            taken: is_jump || (is_branch && next_pc != pc.wrapping_add(instr.width as u64)),
            mem,
        }
    }

    pub fn is_control(&self) -> bool {
        self.is_branch || self.is_jump
    }

    pub fn fallthrough(&self) -> u64 {
        self.pc.wrapping_add(self.instr.width as u64)
    }

    /// Small hash of the stored value, zero for non-stores.
    pub fn store_data_digest(&self) -> u64 {
        match self.mem {
            Some(MemAccess {
                kind: MemKind::Store,
                data,
                bytes,
                ..
            }) => {
                let mut h = Fnv::new();
                h.write(&data.to_le_bytes()[..bytes as usize]);
                h.finish() & 0xffff
            }
            _ => 0,
        }
    }
}

/// Replays the store records of a stream on top of `mem`.
pub fn apply_stores(mem: &mut Memory, stream: &[RetireRecord]) {
    for r in stream {
        if let Some(MemAccess {
            kind: MemKind::Store,
            vaddr,
            bytes,
            data,
        }) = r.mem
        {
            mem.write(vaddr, bytes, data);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub addr: u64,
    pub bytes: Vec<u8>,
}

/// A loadable bare-metal program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub base: u64,
    pub code: Vec<u8>,
    pub data: Vec<Segment>,
    pub entry: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("entry {entry:#x} outside code [{base:#x}, {end:#x})")]
    EntryOutsideCode { entry: u64, base: u64, end: u64 },
    #[error("segments at {a:#x} and {b:#x} overlap")]
    Overlap { a: u64, b: u64 },
}

impl Program {
    pub fn new(base: u64, code: Vec<u8>, data: Vec<Segment>) -> Result<Program, ProgramError> {
        let p = Program {
            base,
            code,
            data,
            entry: base,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let end = self.base + self.code.len() as u64;
        if self.entry < self.base || self.entry >= end {
            return Err(ProgramError::EntryOutsideCode {
                entry: self.entry,
                base: self.base,
                end,
            });
        }
        let mut spans: Vec<(u64, u64)> = std::iter::once((self.base, end))
            .chain(self.data.iter().map(|s| (s.addr, s.addr + s.bytes.len() as u64)))
            .filter(|(a, b)| a < b)
            .collect();
        spans.sort();
        for w in spans.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(ProgramError::Overlap { a: w[0].0, b: w[1].0 });
            }
        }
        Ok(())
    }

    /// Initial memory image.
    pub fn image(&self) -> Memory {
        let mut m = Memory::new();
        m.write_bytes(self.base, &self.code);
        for s in &self.data {
            m.write_bytes(s.addr, &s.bytes);
        }
        m
    }
}
