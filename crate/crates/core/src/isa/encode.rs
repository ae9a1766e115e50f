use super::{Format, Instr, IsaError, Op, CSR_CYCLE, CSR_INSTRET, CSR_TIME};

/// Semantic description of an instruction to encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstrDesc {
    pub op: Op,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub rs3: u8,
    pub imm: i64,
    /// Request the 16-bit form. Fails if the operands do not fit one.
    pub compressed: bool,
}

impl InstrDesc {
    pub fn new(op: Op, rd: u8, rs1: u8, rs2: u8, imm: i64) -> InstrDesc {
        InstrDesc {
            op,
            rd,
            rs1,
            rs2,
            rs3: 0,
            imm,
            compressed: false,
        }
    }

    pub fn compressed(mut self) -> InstrDesc {
        self.compressed = true;
        self
    }
}

impl From<&Instr> for InstrDesc {
    fn from(i: &Instr) -> InstrDesc {
        InstrDesc {
            op: i.op,
            rd: i.rd,
            rs1: i.rs1,
            rs2: i.rs2,
            rs3: i.rs3,
            imm: i.imm,
            compressed: i.is_compressed(),
        }
    }
}

fn out_of_range(operand: &'static str, value: i64) -> IsaError {
    IsaError::OperandOutOfRange { operand, value }
}

fn check_reg(name: &'static str, r: u8) -> Result<u32, IsaError> {
    if r > 31 {
        return Err(out_of_range(name, r as i64));
    }
    Ok(r as u32)
}

fn check_imm(imm: i64, bits: u32, align: i64) -> Result<i64, IsaError> {
    let lo = -(1i64 << (bits - 1));
    let hi = (1i64 << (bits - 1)) - 1;
    if imm < lo || imm > hi || imm % align != 0 {
        return Err(out_of_range("imm", imm));
    }
    Ok(imm)
}

/// Encodes an instruction. Compressed encodings are returned in the low 16 bits.
pub fn encode(d: &InstrDesc) -> Result<u32, IsaError> {
    let rd = check_reg("rd", d.rd)?;
    let rs1 = check_reg("rs1", d.rs1)?;
    let rs2 = check_reg("rs2", d.rs2)?;
    let rs3 = check_reg("rs3", d.rs3)?;
    if d.compressed {
        return encode_compressed(d).map(|h| h as u32);
    }
    let op = d.op;
    let (opcode, f3, f7): (u32, u32, u32) = match op {
        Op::Lui => (0x37, 0, 0),
        Op::Auipc => (0x17, 0, 0),
        Op::Jal => (0x6f, 0, 0),
        Op::Jalr => (0x67, 0, 0),
        Op::Beq => (0x63, 0, 0),
        Op::Bne => (0x63, 1, 0),
        Op::Blt => (0x63, 4, 0),
        Op::Bge => (0x63, 5, 0),
        Op::Bltu => (0x63, 6, 0),
        Op::Bgeu => (0x63, 7, 0),
        Op::Lb => (0x03, 0, 0),
        Op::Lh => (0x03, 1, 0),
        Op::Lw => (0x03, 2, 0),
        Op::Ld => (0x03, 3, 0),
        Op::Lbu => (0x03, 4, 0),
        Op::Lhu => (0x03, 5, 0),
        Op::Lwu => (0x03, 6, 0),
        Op::Sb => (0x23, 0, 0),
        Op::Sh => (0x23, 1, 0),
        Op::Sw => (0x23, 2, 0),
        Op::Sd => (0x23, 3, 0),
        Op::Addi => (0x13, 0, 0),
        Op::Slti => (0x13, 2, 0),
        Op::Sltiu => (0x13, 3, 0),
        Op::Xori => (0x13, 4, 0),
        Op::Ori => (0x13, 6, 0),
        Op::Andi => (0x13, 7, 0),
        Op::Slli => (0x13, 1, 0),
        Op::Srli => (0x13, 5, 0),
        Op::Srai => (0x13, 5, 0x20),
        Op::Add => (0x33, 0, 0),
        Op::Sub => (0x33, 0, 0x20),
        Op::Sll => (0x33, 1, 0),
        Op::Slt => (0x33, 2, 0),
        Op::Sltu => (0x33, 3, 0),
        Op::Xor => (0x33, 4, 0),
        Op::Srl => (0x33, 5, 0),
        Op::Sra => (0x33, 5, 0x20),
        Op::Or => (0x33, 6, 0),
        Op::And => (0x33, 7, 0),
        Op::Addiw => (0x1b, 0, 0),
        Op::Slliw => (0x1b, 1, 0),
        Op::Srliw => (0x1b, 5, 0),
        Op::Sraiw => (0x1b, 5, 0x20),
        Op::Addw => (0x3b, 0, 0),
        Op::Subw => (0x3b, 0, 0x20),
        Op::Sllw => (0x3b, 1, 0),
        Op::Srlw => (0x3b, 5, 0),
        Op::Sraw => (0x3b, 5, 0x20),
        Op::Fence => return Ok(0x0ff0_000f),
        Op::Ecall => return Ok(0x0000_0073),
        Op::Ebreak => return Ok(0x0010_0073),
        Op::Csrrs => (0x73, 2, 0),
        Op::Mul => (0x33, 0, 1),
        Op::Mulh => (0x33, 1, 1),
        Op::Mulhsu => (0x33, 2, 1),
        Op::Mulhu => (0x33, 3, 1),
        Op::Div => (0x33, 4, 1),
        Op::Divu => (0x33, 5, 1),
        Op::Rem => (0x33, 6, 1),
        Op::Remu => (0x33, 7, 1),
        Op::Mulw => (0x3b, 0, 1),
        Op::Divw => (0x3b, 4, 1),
        Op::Divuw => (0x3b, 5, 1),
        Op::Remw => (0x3b, 6, 1),
        Op::Remuw => (0x3b, 7, 1),
        Op::Fld => (0x07, 3, 0),
        Op::Fsd => (0x27, 3, 0),
        // Arithmetic FP ops use the dynamic rounding mode.
        Op::FaddD => (0x53, 7, 0x01),
        Op::FsubD => (0x53, 7, 0x05),
        Op::FmulD => (0x53, 7, 0x09),
        Op::FdivD => (0x53, 7, 0x0d),
        Op::FmaddD => (0x43, 7, 0),
        Op::FmvXD => (0x53, 0, 0x71),
        Op::FmvDX => (0x53, 0, 0x79),
        Op::FcvtDL => (0x53, 7, 0x69),
        Op::FcvtLD => (0x53, 7, 0x61),
    };
    let base = opcode | (f3 << 12);
    let word = match op.format() {
        Format::R => base | (rd << 7) | (rs1 << 15) | (rs2 << 20) | (f7 << 25),
        Format::R4 => base | (rd << 7) | (rs1 << 15) | (rs2 << 20) | (1 << 25) | (rs3 << 27),
        Format::FpUnary => {
            let sel = if matches!(op, Op::FcvtDL | Op::FcvtLD) { 2 } else { 0 };
            base | (rd << 7) | (rs1 << 15) | (sel << 20) | (f7 << 25)
        }
        Format::I => {
            let imm = check_imm(d.imm, 12, 1)? as u32;
            base | (rd << 7) | (rs1 << 15) | (imm << 20)
        }
        Format::Shift => {
            let max = if opcode == 0x1b { 31 } else { 63 };
            if !(0..=max).contains(&d.imm) {
                return Err(out_of_range("shamt", d.imm));
            }
            base | (rd << 7) | (rs1 << 15) | ((d.imm as u32) << 20) | (f7 << 25)
        }
        Format::S => {
            let imm = check_imm(d.imm, 12, 1)? as u32;
            base | ((imm & 0x1f) << 7) | (rs1 << 15) | (rs2 << 20) | (((imm >> 5) & 0x7f) << 25)
        }
        Format::B => {
            let imm = check_imm(d.imm, 13, 2)? as u32;
            base | (((imm >> 11) & 1) << 7)
                | (((imm >> 1) & 0xf) << 8)
                | (rs1 << 15)
                | (rs2 << 20)
                | (((imm >> 5) & 0x3f) << 25)
                | (((imm >> 12) & 1) << 31)
        }
        Format::U => {
            if d.imm % 4096 != 0 || d.imm < i32::MIN as i64 || d.imm > i32::MAX as i64 {
                return Err(out_of_range("imm", d.imm));
            }
            base | (rd << 7) | (d.imm as u32 & 0xffff_f000)
        }
        Format::J => {
            let imm = check_imm(d.imm, 21, 2)? as u32;
            base | (rd << 7)
                | (((imm >> 12) & 0xff) << 12)
                | (((imm >> 11) & 1) << 20)
                | (((imm >> 1) & 0x3ff) << 21)
                | (((imm >> 20) & 1) << 31)
        }
        Format::Csr => {
            let csr = d.imm as u16;
            if d.imm < 0 || !matches!(csr, CSR_CYCLE | CSR_TIME | CSR_INSTRET) || d.imm > 0xfff {
                return Err(out_of_range("csr", d.imm));
            }
            if rs1 != 0 {
                return Err(out_of_range("rs1", rs1 as i64));
            }
            base | (rd << 7) | ((csr as u32) << 20)
        }
        Format::Sys => base,
    };
    Ok(word)
}

fn creg(name: &'static str, r: u8) -> Result<u16, IsaError> {
    if (8..=15).contains(&r) {
        Ok((r - 8) as u16)
    } else {
        Err(out_of_range(name, r as i64))
    }
}

fn no_compressed_form(d: &InstrDesc) -> IsaError {
    IsaError::UnsupportedMnemonic(format!("c.{}", d.op.mnemonic()))
}

fn encode_compressed(d: &InstrDesc) -> Result<u16, IsaError> {
    let rd = d.rd as u16;
    let rs1 = d.rs1 as u16;
    let rs2 = d.rs2 as u16;
    let imm6 = |imm: i64| -> Result<u16, IsaError> {
        let v = check_imm(imm, 6, 1)? as u16;
        Ok(((v >> 5) & 1) << 12 | (v & 0x1f) << 2)
    };
    match d.op {
        // c.li
        Op::Addi if d.rs1 == 0 => Ok(0x4001 | (rd << 7) | imm6(d.imm)?),
        // c.addi
        Op::Addi if d.rs1 == d.rd => Ok(0x0001 | (rd << 7) | imm6(d.imm)?),
        // c.mv
        Op::Add if d.rs1 == 0 && d.rd != 0 && d.rs2 != 0 => Ok(0x8002 | (rd << 7) | (rs2 << 2)),
        // c.add
        Op::Add if d.rs1 == d.rd && d.rd != 0 && d.rs2 != 0 => Ok(0x9002 | (rd << 7) | (rs2 << 2)),
        Op::Lw | Op::Sw => {
            let (funct, data) = if d.op == Op::Lw {
                (0x4000, creg("rd", d.rd)?)
            } else {
                (0xc000, creg("rs2", d.rs2)?)
            };
            let base = creg("rs1", d.rs1)?;
            if !(0..=124).contains(&d.imm) || d.imm % 4 != 0 {
                return Err(out_of_range("imm", d.imm));
            }
            let off = d.imm as u16;
            Ok(funct
                | (((off >> 3) & 7) << 10)
                | (base << 7)
                | (((off >> 2) & 1) << 6)
                | (((off >> 6) & 1) << 5)
                | (data << 2))
        }
        Op::Ld | Op::Sd => {
            let (funct, data) = if d.op == Op::Ld {
                (0x6000, creg("rd", d.rd)?)
            } else {
                (0xe000, creg("rs2", d.rs2)?)
            };
            let base = creg("rs1", d.rs1)?;
            if !(0..=248).contains(&d.imm) || d.imm % 8 != 0 {
                return Err(out_of_range("imm", d.imm));
            }
            let off = d.imm as u16;
            Ok(funct | (((off >> 3) & 7) << 10) | (base << 7) | (((off >> 6) & 3) << 5) | (data << 2))
        }
        Op::Beq | Op::Bne if d.rs2 == 0 => {
            let base = creg("rs1", d.rs1)?;
            let v = check_imm(d.imm, 9, 2)? as u16;
            let funct = if d.op == Op::Beq { 0xc001 } else { 0xe001 };
            Ok(funct
                | (((v >> 8) & 1) << 12)
                | (((v >> 3) & 3) << 10)
                | (base << 7)
                | (((v >> 6) & 3) << 5)
                | (((v >> 1) & 3) << 3)
                | (((v >> 5) & 1) << 2))
        }
        Op::Jal if d.rd == 0 => {
            let v = check_imm(d.imm, 12, 2)? as u16;
            Ok(0xa001
                | (((v >> 11) & 1) << 12)
                | (((v >> 4) & 1) << 11)
                | (((v >> 8) & 3) << 9)
                | (((v >> 10) & 1) << 8)
                | (((v >> 6) & 1) << 7)
                | (((v >> 7) & 1) << 6)
                | (((v >> 1) & 7) << 3)
                | (((v >> 5) & 1) << 2))
        }
        Op::Jalr if d.imm == 0 && d.rs1 != 0 && (d.rd == 0 || d.rd == 1) => {
            let link = if d.rd == 1 { 1 << 12 } else { 0 };
            Ok(0x8002 | link | (rs1 << 7))
        }
        _ => Err(no_compressed_form(d)),
    }
}
