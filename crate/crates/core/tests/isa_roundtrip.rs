use coresim::isa::{decode, encode, Format, InstrDesc, IsaSubset, Op};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PER_MNEMONIC: usize = 1000;

fn imm(op: Op, rng: &mut ChaCha8Rng) -> i64 {
    match op.format() {
        Format::I | Format::S => rng.gen_range(-2048..=2047),
        Format::B => rng.gen_range(-2048i64..=2047) * 2,
        Format::J => rng.gen_range(-(1i64 << 19)..(1 << 19)) * 2,
        Format::U => rng.gen_range(-(1i64 << 19)..(1 << 19)) << 12,
        Format::Shift if matches!(op, Op::Slliw | Op::Srliw | Op::Sraiw) => rng.gen_range(0..32),
        Format::Shift => rng.gen_range(0..64),
        Format::Csr => [0xc00, 0xc01, 0xc02][rng.gen_range(0..3)],
        _ => 0,
    }
}

fn random_desc(op: Op, rng: &mut ChaCha8Rng) -> InstrDesc {
    let files = op.operand_files();
    let mut reg = |used: bool| if used { rng.gen_range(0..32u8) } else { 0 };
    let mut d = InstrDesc::new(op, reg(files[0].is_some()), 0, 0, 0);
    d.rs1 = reg(files[1].is_some() && op.format() != Format::Csr);
    d.rs2 = reg(files[2].is_some());
    d.rs3 = reg(files[3].is_some());
    d.imm = imm(op, rng);
    d
}

#[test]
fn every_mnemonic_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x15a);
    for &op in Op::ALL {
        for _ in 0..PER_MNEMONIC {
            let d = random_desc(op, &mut rng);
            let raw = encode(&d).unwrap_or_else(|e| panic!("{d:?}: {e}"));
            let i = decode(raw, IsaSubset::FULL).unwrap_or_else(|e| panic!("{raw:#010x}: {e}"));
            assert_eq!(InstrDesc::from(&i), d, "{} {raw:#010x}", op.mnemonic());
            assert_eq!(i.fu_class, op.fu_class());
            assert_eq!(Op::from_mnemonic(op.mnemonic()).unwrap(), op);
        }
    }
}

#[test]
fn compressed_forms_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let creg = |r: &mut ChaCha8Rng| r.gen_range(8..16u8);
    for _ in 0..PER_MNEMONIC {
        let nz = rng.gen_range(1..32u8);
        let cases = [
            InstrDesc::new(Op::Addi, nz, 0, 0, rng.gen_range(-32..32)),
            InstrDesc::new(Op::Addi, nz, nz, 0, rng.gen_range(-32..32)),
            InstrDesc::new(Op::Add, nz, 0, rng.gen_range(1..32), 0),
            InstrDesc::new(Op::Add, nz, nz, rng.gen_range(1..32), 0),
            InstrDesc::new(Op::Lw, creg(&mut rng), creg(&mut rng), 0, rng.gen_range(0..32) * 4),
            InstrDesc::new(Op::Sd, 0, creg(&mut rng), creg(&mut rng), rng.gen_range(0..32) * 8),
            InstrDesc::new(Op::Bne, 0, creg(&mut rng), 0, rng.gen_range(-128..128) * 2),
            InstrDesc::new(Op::Jal, 0, 0, 0, rng.gen_range(-1024..1024) * 2),
        ];
        for d in cases {
            let d = d.compressed();
            let raw = encode(&d).unwrap_or_else(|e| panic!("{d:?}: {e}"));
            assert!(raw <= 0xffff);
            let i = decode(raw, IsaSubset::FULL).unwrap();
            assert!(i.is_compressed());
            assert_eq!(InstrDesc::from(&i), d);
        }
    }
}

#[test]
fn subset_without_c_rejects_compressed() {
    let raw = encode(&InstrDesc::new(Op::Addi, 10, 0, 0, 1).compressed()).unwrap();
    assert!(decode(raw, IsaSubset::RV64I).is_err());
    let mul = encode(&InstrDesc::new(Op::Mul, 1, 2, 3, 0)).unwrap();
    assert!(decode(mul, IsaSubset::RV64I).is_err());
    assert!(decode(0, IsaSubset::FULL).is_err());
}
