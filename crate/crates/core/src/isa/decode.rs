use super::{Instr, IsaError, IsaSubset, Op, CSR_CYCLE, CSR_INSTRET, CSR_TIME};

fn bits(w: u32, hi: u32, lo: u32) -> u32 {
    (w >> lo) & ((1u32 << (hi - lo + 1)) - 1)
}

fn sext(v: u64, width: u32) -> i64 {
    let shift = 64 - width;
    ((v << shift) as i64) >> shift
}

fn imm_i(w: u32) -> i64 {
    (w as i32 >> 20) as i64
}

fn imm_s(w: u32) -> i64 {
    sext(((bits(w, 31, 25) << 5) | bits(w, 11, 7)) as u64, 12)
}

fn imm_b(w: u32) -> i64 {
    let v = (bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) | (bits(w, 30, 25) << 5) | (bits(w, 11, 8) << 1);
    sext(v as u64, 13)
}

fn imm_u(w: u32) -> i64 {
    (w & 0xffff_f000) as i32 as i64
}

fn imm_j(w: u32) -> i64 {
    let v = (bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) | (bits(w, 20, 20) << 11) | (bits(w, 30, 21) << 1);
    sext(v as u64, 21)
}

struct Fields {
    op: Op,
    rd: u32,
    rs1: u32,
    rs2: u32,
    rs3: u32,
    imm: i64,
}

impl Fields {
    fn new(op: Op, rd: u32, rs1: u32, rs2: u32, imm: i64) -> Fields {
        Fields {
            op,
            rd,
            rs1,
            rs2,
            rs3: 0,
            imm,
        }
    }
}

/// Decodes one instruction.
///
/// If the low two bits of `raw` are not `0b11` only the low 16 bits are
/// inspected and the result carries `width == 2`.
pub fn decode(raw: u32, subset: IsaSubset) -> Result<Instr, IsaError> {
    if raw & 0xffff == 0 {
        return Err(IsaError::IllegalInstruction);
    }
    let (f, raw, width) = if raw & 3 != 3 {
        if !subset.has_c() {
            return Err(IsaError::UnsupportedEncoding(raw & 0xffff));
        }
        let half = raw & 0xffff;
        (decode_compressed(half)?, half, 2u8)
    } else {
        (decode_full(raw)?, raw, 4u8)
    };
    if !subset.allows(f.op) {
        return Err(IsaError::UnsupportedEncoding(raw));
    }
    Ok(Instr {
        raw,
        op: f.op,
        rd: f.rd as u8,
        rs1: f.rs1 as u8,
        rs2: f.rs2 as u8,
        rs3: f.rs3 as u8,
        imm: f.imm,
        fu_class: f.op.fu_class(),
        width,
    })
}

fn decode_full(w: u32) -> Result<Fields, IsaError> {
    let unsupported = || IsaError::UnsupportedEncoding(w);
    let opcode = bits(w, 6, 0);
    let rd = bits(w, 11, 7);
    let rs1 = bits(w, 19, 15);
    let rs2 = bits(w, 24, 20);
    let f3 = bits(w, 14, 12);
    let f7 = bits(w, 31, 25);

    let f = match opcode {
        0x37 => Fields::new(Op::Lui, rd, 0, 0, imm_u(w)),
        0x17 => Fields::new(Op::Auipc, rd, 0, 0, imm_u(w)),
        0x6f => Fields::new(Op::Jal, rd, 0, 0, imm_j(w)),
        0x67 if f3 == 0 => Fields::new(Op::Jalr, rd, rs1, 0, imm_i(w)),
        0x63 => {
            let op = match f3 {
                0 => Op::Beq,
                1 => Op::Bne,
                4 => Op::Blt,
                5 => Op::Bge,
                6 => Op::Bltu,
                7 => Op::Bgeu,
                _ => return Err(unsupported()),
            };
            Fields::new(op, 0, rs1, rs2, imm_b(w))
        }
        0x03 => {
            let op = match f3 {
                0 => Op::Lb,
                1 => Op::Lh,
                2 => Op::Lw,
                3 => Op::Ld,
                4 => Op::Lbu,
                5 => Op::Lhu,
                6 => Op::Lwu,
                _ => return Err(unsupported()),
            };
            Fields::new(op, rd, rs1, 0, imm_i(w))
        }
        0x23 => {
            let op = match f3 {
                0 => Op::Sb,
                1 => Op::Sh,
                2 => Op::Sw,
                3 => Op::Sd,
                _ => return Err(unsupported()),
            };
            Fields::new(op, 0, rs1, rs2, imm_s(w))
        }
        0x13 => {
            let shamt = bits(w, 25, 20) as i64;
            let f6 = bits(w, 31, 26);
            match f3 {
                0 => Fields::new(Op::Addi, rd, rs1, 0, imm_i(w)),
                2 => Fields::new(Op::Slti, rd, rs1, 0, imm_i(w)),
                3 => Fields::new(Op::Sltiu, rd, rs1, 0, imm_i(w)),
                4 => Fields::new(Op::Xori, rd, rs1, 0, imm_i(w)),
                6 => Fields::new(Op::Ori, rd, rs1, 0, imm_i(w)),
                7 => Fields::new(Op::Andi, rd, rs1, 0, imm_i(w)),
                1 if f6 == 0 => Fields::new(Op::Slli, rd, rs1, 0, shamt),
                5 if f6 == 0 => Fields::new(Op::Srli, rd, rs1, 0, shamt),
                5 if f6 == 0x10 => Fields::new(Op::Srai, rd, rs1, 0, shamt),
                _ => return Err(unsupported()),
            }
        }
        0x1b => {
            let shamt = bits(w, 24, 20) as i64;
            match (f3, f7) {
                (0, _) => Fields::new(Op::Addiw, rd, rs1, 0, imm_i(w)),
                (1, 0) => Fields::new(Op::Slliw, rd, rs1, 0, shamt),
                (5, 0) => Fields::new(Op::Srliw, rd, rs1, 0, shamt),
                (5, 0x20) => Fields::new(Op::Sraiw, rd, rs1, 0, shamt),
                _ => return Err(unsupported()),
            }
        }
        0x33 => {
            let op = match (f7, f3) {
                (0, 0) => Op::Add,
                (0x20, 0) => Op::Sub,
                (0, 1) => Op::Sll,
                (0, 2) => Op::Slt,
                (0, 3) => Op::Sltu,
                (0, 4) => Op::Xor,
                (0, 5) => Op::Srl,
                (0x20, 5) => Op::Sra,
                (0, 6) => Op::Or,
                (0, 7) => Op::And,
                (1, 0) => Op::Mul,
                (1, 1) => Op::Mulh,
                (1, 2) => Op::Mulhsu,
                (1, 3) => Op::Mulhu,
                (1, 4) => Op::Div,
                (1, 5) => Op::Divu,
                (1, 6) => Op::Rem,
                (1, 7) => Op::Remu,
                _ => return Err(unsupported()),
            };
            Fields::new(op, rd, rs1, rs2, 0)
        }
        0x3b => {
            let op = match (f7, f3) {
                (0, 0) => Op::Addw,
                (0x20, 0) => Op::Subw,
                (0, 1) => Op::Sllw,
                (0, 5) => Op::Srlw,
                (0x20, 5) => Op::Sraw,
                (1, 0) => Op::Mulw,
                (1, 4) => Op::Divw,
                (1, 5) => Op::Divuw,
                (1, 6) => Op::Remw,
                (1, 7) => Op::Remuw,
                _ => return Err(unsupported()),
            };
            Fields::new(op, rd, rs1, rs2, 0)
        }
        0x0f if f3 == 0 => Fields::new(Op::Fence, 0, 0, 0, 0),
        0x73 => match (w, f3) {
            (0x0000_0073, _) => Fields::new(Op::Ecall, 0, 0, 0, 0),
            (0x0010_0073, _) => Fields::new(Op::Ebreak, 0, 0, 0, 0),
            (_, 2) if rs1 == 0 => {
                let csr = bits(w, 31, 20) as u16;
                if !matches!(csr, CSR_CYCLE | CSR_TIME | CSR_INSTRET) {
                    return Err(unsupported());
                }
                Fields::new(Op::Csrrs, rd, 0, 0, csr as i64)
            }
            _ => return Err(unsupported()),
        },
        0x07 if f3 == 3 => Fields::new(Op::Fld, rd, rs1, 0, imm_i(w)),
        0x27 if f3 == 3 => Fields::new(Op::Fsd, 0, rs1, rs2, imm_s(w)),
        0x43 if bits(w, 26, 25) == 1 => Fields {
            op: Op::FmaddD,
            rd,
            rs1,
            rs2,
            rs3: bits(w, 31, 27),
            imm: 0,
        },
        0x53 => {
            let op = match (f7, rs2, f3) {
                (0x01, _, _) => Op::FaddD,
                (0x05, _, _) => Op::FsubD,
                (0x09, _, _) => Op::FmulD,
                (0x0d, _, _) => Op::FdivD,
                (0x71, 0, 0) => Op::FmvXD,
                (0x79, 0, 0) => Op::FmvDX,
                (0x69, 2, _) => Op::FcvtDL,
                (0x61, 2, _) => Op::FcvtLD,
                _ => return Err(unsupported()),
            };
            let rs2 = if op.format() == super::Format::FpUnary { 0 } else { rs2 };
            Fields::new(op, rd, rs1, rs2, 0)
        }
        _ => return Err(unsupported()),
    };
    Ok(f)
}

fn decode_compressed(h: u32) -> Result<Fields, IsaError> {
    let unsupported = || IsaError::UnsupportedEncoding(h);
    let quadrant = h & 3;
    let f3 = bits(h, 15, 13);
    let rd_full = bits(h, 11, 7);
    let rs2_full = bits(h, 6, 2);
    let rs1_p = bits(h, 9, 7) + 8;
    let r_p = bits(h, 4, 2) + 8;

    let f = match (quadrant, f3) {
        (0, 2) => {
            let off = (bits(h, 12, 10) << 3) | (bits(h, 6, 6) << 2) | (bits(h, 5, 5) << 6);
            Fields::new(Op::Lw, r_p, rs1_p, 0, off as i64)
        }
        (0, 3) => {
            let off = (bits(h, 12, 10) << 3) | (bits(h, 6, 5) << 6);
            Fields::new(Op::Ld, r_p, rs1_p, 0, off as i64)
        }
        (0, 6) => {
            let off = (bits(h, 12, 10) << 3) | (bits(h, 6, 6) << 2) | (bits(h, 5, 5) << 6);
            Fields::new(Op::Sw, 0, rs1_p, r_p, off as i64)
        }
        (0, 7) => {
            let off = (bits(h, 12, 10) << 3) | (bits(h, 6, 5) << 6);
            Fields::new(Op::Sd, 0, rs1_p, r_p, off as i64)
        }
        (1, 0) => {
            let imm = sext(((bits(h, 12, 12) << 5) | rs2_full) as u64, 6);
            Fields::new(Op::Addi, rd_full, rd_full, 0, imm)
        }
        (1, 2) => {
            let imm = sext(((bits(h, 12, 12) << 5) | rs2_full) as u64, 6);
            Fields::new(Op::Addi, rd_full, 0, 0, imm)
        }
        (1, 5) => {
            let v = (bits(h, 12, 12) << 11)
                | (bits(h, 11, 11) << 4)
                | (bits(h, 10, 9) << 8)
                | (bits(h, 8, 8) << 10)
                | (bits(h, 7, 7) << 6)
                | (bits(h, 6, 6) << 7)
                | (bits(h, 5, 3) << 1)
                | (bits(h, 2, 2) << 5);
            Fields::new(Op::Jal, 0, 0, 0, sext(v as u64, 12))
        }
        (1, 6) | (1, 7) => {
            let v = (bits(h, 12, 12) << 8)
                | (bits(h, 11, 10) << 3)
                | (bits(h, 6, 5) << 6)
                | (bits(h, 4, 3) << 1)
                | (bits(h, 2, 2) << 5);
            let op = if f3 == 6 { Op::Beq } else { Op::Bne };
            Fields::new(op, 0, rs1_p, 0, sext(v as u64, 9))
        }
        (2, 4) => {
            let b12 = bits(h, 12, 12);
            match (b12, rd_full, rs2_full) {
                (0, 0, 0) => return Err(unsupported()),
                (0, rs1, 0) => Fields::new(Op::Jalr, 0, rs1, 0, 0),
                (0, rd, rs2) => Fields::new(Op::Add, rd, 0, rs2, 0),
                (1, 0, 0) => return Err(unsupported()),
                (1, rs1, 0) => Fields::new(Op::Jalr, 1, rs1, 0, 0),
                (_, rd, rs2) => Fields::new(Op::Add, rd, rd, rs2, 0),
            }
        }
        _ => return Err(unsupported()),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::FuClass;

    fn d(raw: u32) -> Instr {
        decode(raw, IsaSubset::FULL).unwrap()
    }

    fn fields(i: &Instr) -> (Op, u8, u8, u8, u8, i64) {
        (i.op, i.rd, i.rs1, i.rs2, i.rs3, i.imm)
    }

    #[test]
    fn canonical_nop() {
        let i = d(0x0000_0013);
        assert_eq!(fields(&i), (Op::Addi, 0, 0, 0, 0, 0));
        assert_eq!(i.fu_class, FuClass::Alu);
        assert_eq!(i.width, 4);
        assert!(!i.is_compressed());
    }

    #[test]
    fn mul_example() {
        // mul a1, a1, a2
        let i = d(0x02c5_85b3);
        assert_eq!(fields(&i), (Op::Mul, 11, 11, 12, 0, 0));
        assert_eq!(i.fu_class, FuClass::Mul);
    }

    #[test]
    fn compressed_li_zero() {
        let i = d(0x4501);
        assert_eq!(fields(&i), (Op::Addi, 10, 0, 0, 0, 0));
        assert_eq!(i.width, 2);
        assert!(i.is_compressed());
        assert_eq!(i.raw, 0x4501);
    }

    #[test]
    fn all_zero_is_illegal() {
        assert_eq!(decode(0, IsaSubset::FULL), Err(IsaError::IllegalInstruction));
    }

    #[test]
    fn subset_gates_extensions() {
        assert_eq!(
            decode(0x02c5_85b3, IsaSubset::RV64I),
            Err(IsaError::UnsupportedEncoding(0x02c5_85b3))
        );
        assert_eq!(
            decode(0x4501, IsaSubset::RV64I),
            Err(IsaError::UnsupportedEncoding(0x4501))
        );
        assert!(decode(0x0000_0013, IsaSubset::RV64I).is_ok());
    }

    #[test]
    fn rejects_unsupported() {
        // csrrw x0, mstatus, x1
        assert!(matches!(
            decode(0x3000_9073, IsaSubset::FULL),
            Err(IsaError::UnsupportedEncoding(_))
        ));
        // fadd.s
        assert!(decode(0x0073_72d3, IsaSubset::FULL).is_err());
        // c.addiw is outside the supported compressed set
        assert!(decode(0x2505, IsaSubset::FULL).is_err());
    }

    /// Encoded word and the expected (op, rd, rs1, rs2, rs3, imm).
    type Vector = (u32, (Op, u8, u8, u8, u8, i64));

    // Words produced by clang --target=riscv64 -march=rv64gc from the
    // assembly in the comment of each row.
    #[test]
    fn reference_assembler_vectors() {
        let cases: &[Vector] = &[
            (0x0050_0093, (Op::Addi, 1, 0, 0, 0, 5)),           // addi x1, x0, 5
            (0xfe20_8ee3, (Op::Beq, 0, 1, 2, 0, -4)),           // beq x1, x2, -4
            (0x0062_90e3, (Op::Bne, 0, 5, 6, 0, 2048)),         // bne x5, x6, 2048
            (0x8083_c063, (Op::Blt, 0, 7, 8, 0, -4096)),        // blt x7, x8, -4096
            (0x4000_00ef, (Op::Jal, 1, 0, 0, 0, 1024)),         // jal x1, 1024
            (0xffff_f06f, (Op::Jal, 0, 0, 0, 0, -2)),           // jal x0, -2
            (0x0000_8067, (Op::Jalr, 0, 1, 0, 0, 0)),           // jalr x0, 0(x1)
            (0xff43_02e7, (Op::Jalr, 5, 6, 0, 0, -12)),         // jalr x5, -12(x6)
            (0x1234_5537, (Op::Lui, 10, 0, 0, 0, 0x1234_5000)), // lui x10, 0x12345
            (0xffff_f597, (Op::Auipc, 11, 0, 0, 0, -4096)),     // auipc x11, 0xfffff
            (0xff86_b603, (Op::Ld, 12, 13, 0, 0, -8)),          // ld x12, -8(x13)
            (0x7ff7_a703, (Op::Lw, 14, 15, 0, 0, 2047)),        // lw x14, 2047(x15)
            (0x0008_c803, (Op::Lbu, 16, 17, 0, 0, 0)),          // lbu x16, 0(x17)
            (0x8129_b023, (Op::Sd, 0, 19, 18, 0, -2048)),       // sd x18, -2048(x19)
            (0x014a_81a3, (Op::Sb, 0, 21, 20, 0, 3)),           // sb x20, 3(x21)
            (0x418b_8b33, (Op::Sub, 22, 23, 24, 0, 0)),         // sub x22, x23, x24
            (0x41bd_5cb3, (Op::Sra, 25, 26, 27, 0, 0)),         // sra x25, x26, x27
            (0x43fe_de13, (Op::Srai, 28, 29, 0, 0, 63)),        // srai x28, x29, 63
            (0x001f_9f13, (Op::Slli, 30, 31, 0, 0, 1)),         // slli x30, x31, 1
            (0xfff1_009b, (Op::Addiw, 1, 2, 0, 0, -1)),         // addiw x1, x2, -1
            (0x41f2_519b, (Op::Sraiw, 3, 4, 0, 0, 31)),         // sraiw x3, x4, 31
            (0x4073_02bb, (Op::Subw, 5, 6, 7, 0, 0)),           // subw x5, x6, x7
            (0x02a4_b433, (Op::Mulhu, 8, 9, 10, 0, 0)),         // mulhu x8, x9, x10
            (0x02d6_55b3, (Op::Divu, 11, 12, 13, 0, 0)),        // divu x11, x12, x13
            (0x0307_e73b, (Op::Remw, 14, 15, 16, 0, 0)),        // remw x14, x15, x16
            (0x0101_3087, (Op::Fld, 1, 2, 0, 0, 16)),           // fld f1, 16(x2)
            (0xfe32_3827, (Op::Fsd, 0, 4, 3, 0, -16)),          // fsd f3, -16(x4)
            (0x0273_72d3, (Op::FaddD, 5, 6, 7, 0, 0)),          // fadd.d f5, f6, f7
            (0x0aa4_f453, (Op::FsubD, 8, 9, 10, 0, 0)),         // fsub.d f8, f9, f10
            (0x12d6_75d3, (Op::FmulD, 11, 12, 13, 0, 0)),       // fmul.d f11, f12, f13
            (0x1b07_f753, (Op::FdivD, 14, 15, 16, 0, 0)),       // fdiv.d f14, f15, f16
            (0xa339_78c3, (Op::FmaddD, 17, 18, 19, 20, 0)),     // fmadd.d f17, f18, f19, f20
            (0xe20b_0ad3, (Op::FmvXD, 21, 22, 0, 0, 0)),        // fmv.x.d x21, f22
            (0xf20c_0bd3, (Op::FmvDX, 23, 24, 0, 0, 0)),        // fmv.d.x f23, x24
            (0xd22d_7cd3, (Op::FcvtDL, 25, 26, 0, 0, 0)),       // fcvt.d.l f25, x26
            (0xc22e_7dd3, (Op::FcvtLD, 27, 28, 0, 0, 0)),       // fcvt.l.d x27, f28
            (0xc000_22f3, (Op::Csrrs, 5, 0, 0, 0, 0xc00)),      // csrrs x5, cycle, x0
            (0xc020_2373, (Op::Csrrs, 6, 0, 0, 0, 0xc02)),      // csrrs x6, instret, x0
            (0x0000_0073, (Op::Ecall, 0, 0, 0, 0, 0)),          // ecall
        ];
        for &(raw, expect) in cases {
            let i = d(raw);
            assert_eq!(fields(&i), expect, "raw {raw:#010x}");
            assert_eq!(i.width, 4);
        }
    }

    #[test]
    fn reference_compressed_vectors() {
        let cases: &[Vector] = &[
            (0x4501, (Op::Addi, 10, 0, 0, 0, 0)),   // c.li a0, 0
            (0x5281, (Op::Addi, 5, 0, 0, 0, -32)),  // c.li x5, -32
            (0x8426, (Op::Add, 8, 0, 9, 0, 0)),     // c.mv x8, x9
            (0x952e, (Op::Add, 10, 10, 11, 0, 0)),  // c.add x10, x11
            (0x167d, (Op::Addi, 12, 12, 0, 0, -1)), // c.addi x12, -1
            (0x40c0, (Op::Lw, 8, 9, 0, 0, 4)),      // c.lw x8, 4(x9)
            (0x7de8, (Op::Ld, 10, 11, 0, 0, 248)),  // c.ld x10, 248(x11)
            (0xdef0, (Op::Sw, 0, 13, 12, 0, 124)),  // c.sw x12, 124(x13)
            (0xe798, (Op::Sd, 0, 15, 14, 0, 8)),    // c.sd x14, 8(x15)
            (0xd001, (Op::Beq, 0, 8, 0, 0, -256)),  // c.beqz x8, -256
            (0xecfd, (Op::Bne, 0, 9, 0, 0, 254)),   // c.bnez x9, 254
            (0xb001, (Op::Jal, 0, 0, 0, 0, -2048)), // c.j -2048
            (0x8082, (Op::Jalr, 0, 1, 0, 0, 0)),    // c.jr x1
            (0x9282, (Op::Jalr, 1, 5, 0, 0, 0)),    // c.jalr x5
            (0x0001, (Op::Addi, 0, 0, 0, 0, 0)),    // c.nop
        ];
        for &(raw, expect) in cases {
            let i = d(raw);
            assert_eq!(fields(&i), expect, "raw {raw:#06x}");
            assert_eq!(i.width, 2);
        }
    }

    #[test]
    fn compressed_upper_half_is_ignored() {
        let i = d(0xdead_4501);
        assert_eq!(i.raw, 0x4501);
        assert_eq!(i.op, Op::Addi);
    }
}
