use super::{encode, reg, InstrDesc, IsaError, Op};

/// Forward-referenceable code position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label(usize);

#[derive(Debug, Clone, Copy)]
enum Fixup {
    Branch { at: usize, desc: InstrDesc, label: Label },
    Jal { at: usize, desc: InstrDesc, label: Label },
}

/// Minimal assembler used to build workload programs.
///
/// Instructions are appended in order; branch and jump targets may refer to
/// labels bound later. `finish` resolves all fixups.
#[derive(Debug, Clone)]
pub struct Assembler {
    base: u64,
    code: Vec<u8>,
    labels: Vec<Option<usize>>,
    fixups: Vec<Fixup>,
}

impl Assembler {
    pub fn new(base: u64) -> Assembler {
        Assembler {
            base,
            code: Vec::new(),
            labels: Vec::new(),
            fixups: Vec::new(),
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Address of the next emitted instruction.
    pub fn pc(&self) -> u64 {
        self.base + self.code.len() as u64
    }

    pub fn new_label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, label: Label) {
        self.labels[label.0] = Some(self.code.len());
    }

    /// Creates a label bound at the current position.
    pub fn here(&mut self) -> Label {
        let l = self.new_label();
        self.bind(l);
        l
    }

    /// Pads with `addi x0, x0, 0` until the next instruction is `align`-byte aligned.
    pub fn align(&mut self, align: u64) -> Result<(), IsaError> {
        while !self.pc().is_multiple_of(align) {
            if self.pc() % 4 == 2 {
                self.emit(InstrDesc::new(Op::Addi, 0, 0, 0, 0).compressed())?;
            } else {
                self.emit(InstrDesc::new(Op::Addi, 0, 0, 0, 0))?;
            }
        }
        Ok(())
    }

    pub fn emit(&mut self, d: InstrDesc) -> Result<(), IsaError> {
        let raw = encode(&d)?;
        if d.compressed {
            self.code.extend_from_slice(&(raw as u16).to_le_bytes());
        } else {
            self.code.extend_from_slice(&raw.to_le_bytes());
        }
        Ok(())
    }

    pub fn r(&mut self, op: Op, rd: u8, rs1: u8, rs2: u8) -> Result<(), IsaError> {
        self.emit(InstrDesc::new(op, rd, rs1, rs2, 0))
    }

    pub fn i(&mut self, op: Op, rd: u8, rs1: u8, imm: i64) -> Result<(), IsaError> {
        self.emit(InstrDesc::new(op, rd, rs1, 0, imm))
    }

    /// Store: `op rs2, imm(rs1)`.
    pub fn s(&mut self, op: Op, rs2: u8, rs1: u8, imm: i64) -> Result<(), IsaError> {
        self.emit(InstrDesc::new(op, 0, rs1, rs2, imm))
    }

    pub fn fma(&mut self, rd: u8, rs1: u8, rs2: u8, rs3: u8) -> Result<(), IsaError> {
        let mut d = InstrDesc::new(Op::FmaddD, rd, rs1, rs2, 0);
        d.rs3 = rs3;
        self.emit(d)
    }

    pub fn branch(&mut self, op: Op, rs1: u8, rs2: u8, target: Label) -> Result<(), IsaError> {
        let desc = InstrDesc::new(op, 0, rs1, rs2, 0);
        self.fixups.push(Fixup::Branch {
            at: self.code.len(),
            desc,
            label: target,
        });
        self.emit(desc)
    }

    pub fn jal(&mut self, rd: u8, target: Label) -> Result<(), IsaError> {
        let desc = InstrDesc::new(Op::Jal, rd, 0, 0, 0);
        self.fixups.push(Fixup::Jal {
            at: self.code.len(),
            desc,
            label: target,
        });
        self.emit(desc)
    }

    pub fn j(&mut self, target: Label) -> Result<(), IsaError> {
        self.jal(reg::ZERO, target)
    }

    pub fn call(&mut self, target: Label) -> Result<(), IsaError> {
        self.jal(reg::RA, target)
    }

    pub fn ret(&mut self) -> Result<(), IsaError> {
        self.i(Op::Jalr, reg::ZERO, reg::RA, 0)
    }

    pub fn mv(&mut self, rd: u8, rs: u8) -> Result<(), IsaError> {
        self.i(Op::Addi, rd, rs, 0)
    }

    pub fn nop(&mut self) -> Result<(), IsaError> {
        self.i(Op::Addi, 0, 0, 0)
    }

    /// Loads an arbitrary 64-bit constant.
    pub fn li(&mut self, rd: u8, value: i64) -> Result<(), IsaError> {
        if (-2048..2048).contains(&value) {
            return self.i(Op::Addi, rd, reg::ZERO, value);
        }
        if value >= i32::MIN as i64 && value <= i32::MAX as i64 {
            let lo = (value << 52) >> 52;
            let hi = value - lo;
            if hi <= i32::MAX as i64 {
                self.emit(InstrDesc::new(Op::Lui, rd, 0, 0, (hi as i32) as i64))?;
                if lo != 0 {
                    self.i(Op::Addiw, rd, rd, lo)?;
                }
                return Ok(());
            }
        }
        // Build the upper part recursively, then shift in 11-bit chunks.
        let lo = (value << 53) >> 53;
        let rest = (value - lo) >> 11;
        self.li(rd, rest)?;
        self.i(Op::Slli, rd, rd, 11)?;
        if lo != 0 {
            self.i(Op::Addi, rd, rd, lo)?;
        }
        Ok(())
    }

    /// Halt convention: `ecall` with a7 == 0.
    pub fn halt(&mut self) -> Result<(), IsaError> {
        self.i(Op::Addi, reg::A7, reg::ZERO, 0)?;
        self.emit(InstrDesc::new(Op::Ecall, 0, 0, 0, 0))
    }

    /// Resolves label references and returns the code bytes.
    pub fn finish(mut self) -> Result<Vec<u8>, IsaError> {
        for fix in std::mem::take(&mut self.fixups) {
            let (at, mut desc, label) = match fix {
                Fixup::Branch { at, desc, label } | Fixup::Jal { at, desc, label } => (at, desc, label),
            };
            let target = self.labels[label.0].ok_or(IsaError::UndefinedLabel(label.0))?;
            desc.imm = target as i64 - at as i64;
            let raw = encode(&desc)?;
            self.code[at..at + 4].copy_from_slice(&raw.to_le_bytes());
        }
        Ok(self.code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{decode, IsaSubset};

    fn words(code: &[u8]) -> Vec<u32> {
        code.chunks(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect()
    }

    #[test]
    fn backward_and_forward_labels() {
        let mut a = Assembler::new(0x1000);
        let top = a.here();
        let out = a.new_label();
        a.branch(Op::Beq, 1, 2, out).unwrap();
        a.j(top).unwrap();
        a.bind(out);
        a.nop().unwrap();
        let w = words(&a.finish().unwrap());
        let beq = decode(w[0], IsaSubset::FULL).unwrap();
        let j = decode(w[1], IsaSubset::FULL).unwrap();
        assert_eq!(beq.imm, 8);
        assert_eq!(j.imm, -4);
    }

    #[test]
    fn unbound_label_is_an_error() {
        let mut a = Assembler::new(0);
        let l = a.new_label();
        a.j(l).unwrap();
        assert_eq!(a.finish(), Err(IsaError::UndefinedLabel(0)));
    }
}
