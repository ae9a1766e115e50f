//! RV64 instruction subset: decoding, classification and a small assembler.
//!
//! The supported subset is RV64I + M, the compressed forms the assembler
//! emits, and a minimal slice of D (loads/stores, add/sub/mul/div, fused
//! multiply-add, moves and integer conversions).

mod asm;
mod decode;
mod encode;

pub use asm::{Assembler, Label};
pub use decode::decode;
pub use encode::{encode, InstrDesc};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// ABI register numbers used by the workload generators.
pub mod reg {
    pub const ZERO: u8 = 0;
    pub const RA: u8 = 1;
    pub const SP: u8 = 2;
    pub const GP: u8 = 3;
    pub const TP: u8 = 4;
    pub const T0: u8 = 5;
    pub const T1: u8 = 6;
    pub const T2: u8 = 7;
    pub const S0: u8 = 8;
    pub const S1: u8 = 9;
    pub const A0: u8 = 10;
    pub const A1: u8 = 11;
    pub const A2: u8 = 12;
    pub const A3: u8 = 13;
    pub const A4: u8 = 14;
    pub const A5: u8 = 15;
    pub const A6: u8 = 16;
    pub const A7: u8 = 17;
    pub const S2: u8 = 18;
    pub const S3: u8 = 19;
    pub const S4: u8 = 20;
    pub const S5: u8 = 21;
    pub const S6: u8 = 22;
    pub const S7: u8 = 23;
    pub const S8: u8 = 24;
    pub const S9: u8 = 25;
    pub const S10: u8 = 26;
    pub const S11: u8 = 27;
    pub const T3: u8 = 28;
    pub const T4: u8 = 29;
    pub const T5: u8 = 30;
    pub const T6: u8 = 31;
}

/// CSR numbers readable through `csrrs rd, csr, x0`.
pub const CSR_CYCLE: u16 = 0xC00;
pub const CSR_TIME: u16 = 0xC01;
pub const CSR_INSTRET: u16 = 0xC02;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("unsupported encoding {0:#010x}")]
    UnsupportedEncoding(u32),
    #[error("illegal instruction (all-zero word)")]
    IllegalInstruction,
    #[error("operand {operand} out of range: {value}")]
    OperandOutOfRange { operand: &'static str, value: i64 },
    #[error("unsupported mnemonic {0}")]
    UnsupportedMnemonic(String),
    #[error("undefined label {0}")]
    UndefinedLabel(usize),
}

/// Functional-unit class. Every timing model routes instructions by this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FuClass {
    Alu,
    Mul,
    Div,
    Bru,
    Load,
    Store,
    FpAlu,
    FpMul,
    FpDiv,
    FpLoad,
    FpStore,
    Csr,
    System,
}

impl FuClass {
    pub const ALL: [FuClass; 13] = [
        FuClass::Alu,
        FuClass::Mul,
        FuClass::Div,
        FuClass::Bru,
        FuClass::Load,
        FuClass::Store,
        FuClass::FpAlu,
        FuClass::FpMul,
        FuClass::FpDiv,
        FuClass::FpLoad,
        FuClass::FpStore,
        FuClass::Csr,
        FuClass::System,
    ];

    pub fn is_mem(self) -> bool {
        matches!(
            self,
            FuClass::Load | FuClass::Store | FuClass::FpLoad | FuClass::FpStore
        )
    }

    pub fn is_load(self) -> bool {
        matches!(self, FuClass::Load | FuClass::FpLoad)
    }

    pub fn is_store(self) -> bool {
        matches!(self, FuClass::Store | FuClass::FpStore)
    }

    /// Operations executed by the floating-point unit proper (not FP loads/stores).
    pub fn is_fpu(self) -> bool {
        matches!(self, FuClass::FpAlu | FuClass::FpMul | FuClass::FpDiv)
    }
}

/// Register file an operand lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegFile {
    Int,
    Fp,
}

/// Unified architectural register name: 0..=31 integer, 32..=63 floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(pub u8);

impl Reg {
    pub fn int(n: u8) -> Reg {
        Reg(n & 31)
    }

    pub fn fp(n: u8) -> Reg {
        Reg(32 + (n & 31))
    }

    pub fn file(self) -> RegFile {
        if self.0 < 32 {
            RegFile::Int
        } else {
            RegFile::Fp
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Operand layout of an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    R,
    I,
    S,
    B,
    U,
    J,
    R4,
    /// I-type shift with a 6-bit (or 5-bit for *W) shift amount.
    Shift,
    /// OP-FP with a fixed rs2 selector (moves and conversions).
    FpUnary,
    Csr,
    Sys,
}

macro_rules! ops {
    ($($name:ident => $mn:literal, $class:ident, $fmt:ident;)*) => {
        /// Every supported operation (compressed forms decode to their expansions).
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Op { $($name),* }

        impl Op {
            pub const ALL: &'static [Op] = &[$(Op::$name),*];

            pub fn mnemonic(self) -> &'static str {
                match self { $(Op::$name => $mn),* }
            }

            pub fn fu_class(self) -> FuClass {
                match self { $(Op::$name => FuClass::$class),* }
            }

            pub fn format(self) -> Format {
                match self { $(Op::$name => Format::$fmt),* }
            }

            pub fn from_mnemonic(s: &str) -> Result<Op, IsaError> {
                match s.to_ascii_lowercase().as_str() {
                    $($mn => Ok(Op::$name),)*
                    _ => Err(IsaError::UnsupportedMnemonic(s.to_string())),
                }
            }
        }
    };
}

ops! {
    Lui => "lui", Alu, U;
    Auipc => "auipc", Alu, U;
    Jal => "jal", Bru, J;
    Jalr => "jalr", Bru, I;
    Beq => "beq", Bru, B;
    Bne => "bne", Bru, B;
    Blt => "blt", Bru, B;
    Bge => "bge", Bru, B;
    Bltu => "bltu", Bru, B;
    Bgeu => "bgeu", Bru, B;
    Lb => "lb", Load, I;
    Lh => "lh", Load, I;
    Lw => "lw", Load, I;
    Ld => "ld", Load, I;
    Lbu => "lbu", Load, I;
    Lhu => "lhu", Load, I;
    Lwu => "lwu", Load, I;
    Sb => "sb", Store, S;
    Sh => "sh", Store, S;
    Sw => "sw", Store, S;
    Sd => "sd", Store, S;
    Addi => "addi", Alu, I;
    Slti => "slti", Alu, I;
    Sltiu => "sltiu", Alu, I;
    Xori => "xori", Alu, I;
    Ori => "ori", Alu, I;
    Andi => "andi", Alu, I;
    Slli => "slli", Alu, Shift;
    Srli => "srli", Alu, Shift;
    Srai => "srai", Alu, Shift;
    Add => "add", Alu, R;
    Sub => "sub", Alu, R;
    Sll => "sll", Alu, R;
    Slt => "slt", Alu, R;
    Sltu => "sltu", Alu, R;
    Xor => "xor", Alu, R;
    Srl => "srl", Alu, R;
    Sra => "sra", Alu, R;
    Or => "or", Alu, R;
    And => "and", Alu, R;
    Addiw => "addiw", Alu, I;
    Slliw => "slliw", Alu, Shift;
    Srliw => "srliw", Alu, Shift;
    Sraiw => "sraiw", Alu, Shift;
    Addw => "addw", Alu, R;
    Subw => "subw", Alu, R;
    Sllw => "sllw", Alu, R;
    Srlw => "srlw", Alu, R;
    Sraw => "sraw", Alu, R;
    Fence => "fence", System, Sys;
    Ecall => "ecall", System, Sys;
    Ebreak => "ebreak", System, Sys;
    Csrrs => "csrrs", Csr, Csr;
    Mul => "mul", Mul, R;
    Mulh => "mulh", Mul, R;
    Mulhsu => "mulhsu", Mul, R;
    Mulhu => "mulhu", Mul, R;
    Div => "div", Div, R;
    Divu => "divu", Div, R;
    Rem => "rem", Div, R;
    Remu => "remu", Div, R;
    Mulw => "mulw", Mul, R;
    Divw => "divw", Div, R;
    Divuw => "divuw", Div, R;
    Remw => "remw", Div, R;
    Remuw => "remuw", Div, R;
    Fld => "fld", FpLoad, I;
    Fsd => "fsd", FpStore, S;
    FaddD => "fadd.d", FpAlu, R;
    FsubD => "fsub.d", FpAlu, R;
    FmulD => "fmul.d", FpMul, R;
    FdivD => "fdiv.d", FpDiv, R;
    FmaddD => "fmadd.d", FpMul, R4;
    FmvXD => "fmv.x.d", FpAlu, FpUnary;
    FmvDX => "fmv.d.x", FpAlu, FpUnary;
    FcvtDL => "fcvt.d.l", FpAlu, FpUnary;
    FcvtLD => "fcvt.l.d", FpAlu, FpUnary;
}

impl Op {
    pub fn is_branch(self) -> bool {
        matches!(self, Op::Beq | Op::Bne | Op::Blt | Op::Bge | Op::Bltu | Op::Bgeu)
    }

    pub fn is_jump(self) -> bool {
        matches!(self, Op::Jal | Op::Jalr)
    }

    /// Access size in bytes for loads and stores.
    pub fn mem_bytes(self) -> Option<u8> {
        Some(match self {
            Op::Lb | Op::Lbu | Op::Sb => 1,
            Op::Lh | Op::Lhu | Op::Sh => 2,
            Op::Lw | Op::Lwu | Op::Sw => 4,
            Op::Ld | Op::Sd | Op::Fld | Op::Fsd => 8,
            _ => return None,
        })
    }

    /// Register files of (rd, rs1, rs2, rs3); `None` where the field is unused.
    pub fn operand_files(self) -> [Option<RegFile>; 4] {
        use RegFile::{Fp, Int};
        match self {
            Op::Lui | Op::Auipc | Op::Jal => [Some(Int), None, None, None],
            Op::Fence | Op::Ecall | Op::Ebreak => [None; 4],
            Op::Csrrs => [Some(Int), Some(Int), None, None],
            Op::Fld => [Some(Fp), Some(Int), None, None],
            Op::Fsd => [None, Some(Int), Some(Fp), None],
            Op::FaddD | Op::FsubD | Op::FmulD | Op::FdivD => [Some(Fp), Some(Fp), Some(Fp), None],
            Op::FmaddD => [Some(Fp), Some(Fp), Some(Fp), Some(Fp)],
            Op::FmvXD | Op::FcvtLD => [Some(Int), Some(Fp), None, None],
            Op::FmvDX | Op::FcvtDL => [Some(Fp), Some(Int), None, None],
            op => match op.format() {
                Format::R => [Some(Int), Some(Int), Some(Int), None],
                Format::I | Format::Shift => [Some(Int), Some(Int), None, None],
                Format::S | Format::B => [None, Some(Int), Some(Int), None],
                _ => [None; 4],
            },
        }
    }
}

/// Which extensions the decoder accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsaSubset {
    i: bool,
    m: bool,
    c: bool,
    d: bool,
}

impl IsaSubset {
    /// Everything this crate supports.
    pub const FULL: IsaSubset = IsaSubset {
        i: true,
        m: true,
        c: true,
        d: true,
    };

    pub const RV64I: IsaSubset = IsaSubset {
        i: true,
        m: false,
        c: false,
        d: false,
    };

    /// Builds a subset; M, C and D all require I.
    pub fn new(i: bool, m: bool, c: bool, d: bool) -> Option<IsaSubset> {
        if !i && (m || c || d) {
            return None;
        }
        Some(IsaSubset { i, m, c, d })
    }

    pub fn has_i(&self) -> bool {
        self.i
    }
    pub fn has_m(&self) -> bool {
        self.m
    }
    pub fn has_c(&self) -> bool {
        self.c
    }
    pub fn has_d(&self) -> bool {
        self.d
    }

    pub(crate) fn allows(&self, op: Op) -> bool {
        match op.fu_class() {
            FuClass::Mul | FuClass::Div => self.m,
            FuClass::FpAlu | FuClass::FpMul | FuClass::FpDiv | FuClass::FpLoad | FuClass::FpStore => self.d,
            _ => self.i,
        }
    }
}

impl Default for IsaSubset {
    fn default() -> Self {
        IsaSubset::FULL
    }
}

/// A decoded instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instr {
    /// Encoding as fetched; compressed encodings occupy the low 16 bits.
    pub raw: u32,
    pub op: Op,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub rs3: u8,
    pub imm: i64,
    pub fu_class: FuClass,
    /// Size in bytes: 2 for compressed encodings, 4 otherwise.
    pub width: u8,
}

impl Instr {
    pub fn is_compressed(&self) -> bool {
        self.width == 2
    }

    fn reg(&self, file: Option<RegFile>, n: u8) -> Option<Reg> {
        match file? {
            RegFile::Int if n == 0 => None,
            RegFile::Int => Some(Reg::int(n)),
            RegFile::Fp => Some(Reg::fp(n)),
        }
    }

    /// Destination register, `None` for x0 or no destination.
    pub fn dest(&self) -> Option<Reg> {
        let files = self.op.operand_files();
        self.reg(files[0], self.rd)
    }

    /// Source registers excluding x0.
    pub fn sources(&self) -> impl Iterator<Item = Reg> + '_ {
        let files = self.op.operand_files();
        [
            self.reg(files[1], self.rs1),
            self.reg(files[2], self.rs2),
            self.reg(files[3], self.rs3),
        ]
        .into_iter()
        .flatten()
    }

    /// `rd ∈ {x1, x5}` on a jump: the link-register convention for calls.
    pub fn is_call(&self) -> bool {
        self.op.is_jump() && (self.rd == 1 || self.rd == 5)
    }

    /// `jalr x0, rs1` with `rs1 ∈ {x1, x5}`: the return hint.
    pub fn is_return(&self) -> bool {
        self.op == Op::Jalr && self.rd == 0 && (self.rs1 == 1 || self.rs1 == 5)
    }

    pub fn is_control(&self) -> bool {
        self.op.is_branch() || self.op.is_jump()
    }
}

/// Functional-unit class of a decoded instruction.
pub fn classify(instr: &Instr) -> FuClass {
    instr.op.fu_class()
}
