//! Text trace of a committed stream.
//!
//! One record per line, hex fields:
//! `seq pc raw next_pc [M vaddr bytes S|L [data]]`. `#` starts a comment.
//! The optional store value lets a reloaded trace reproduce the final
//! memory image.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::golden::{MemAccess, MemKind, RetireRecord};
use crate::isa::{decode, IsaSubset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent control flow at seq {seq}: {msg}")]
    InconsistentControlFlow { seq: u64, msg: String },
    #[error("cannot read trace: {0}")]
    Io(String),
}

fn hex(line: usize, field: &str, s: Option<&str>) -> Result<u64, TraceError> {
    let s = s.ok_or_else(|| TraceError::Parse {
        line,
        msg: format!("missing {field}"),
    })?;
    let t = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(t, 16).map_err(|e| TraceError::Parse {
        line,
        msg: format!("bad {field} {s:?}: {e}"),
    })
}

pub fn parse_trace(text: &str) -> Result<Vec<RetireRecord>, TraceError> {
    let mut out: Vec<RetireRecord> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw_line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut f = body.split_whitespace();
        let seq = hex(line, "seq", f.next())?;
        let pc = hex(line, "pc", f.next())?;
        let raw = hex(line, "raw", f.next())?;
        let next_pc = hex(line, "next_pc", f.next())?;
        let raw = u32::try_from(raw).map_err(|_| TraceError::Parse {
            line,
            msg: format!("raw {raw:#x} wider than 32 bits"),
        })?;
        let instr = decode(raw, IsaSubset::FULL).map_err(|e| TraceError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let mem = match f.next() {
            None => None,
            Some("M") => {
                let vaddr = hex(line, "vaddr", f.next())?;
                let bytes = hex(line, "bytes", f.next())? as u8;
                let kind = match f.next() {
                    Some("S") => MemKind::Store,
                    Some("L") => MemKind::Load,
                    other => {
                        return Err(TraceError::Parse {
                            line,
                            msg: format!("expected S or L, got {other:?}"),
                        })
                    }
                };
                let data = match f.next() {
                    Some(d) => hex(line, "data", Some(d))?,
                    None => 0,
                };
                Some(MemAccess {
                    vaddr,
                    bytes,
                    kind,
                    data,
                })
            }
            Some(tok) => {
                return Err(TraceError::Parse {
                    line,
                    msg: format!("unexpected field {tok:?}"),
                })
            }
        };
        if let Some(tok) = f.next() {
            return Err(TraceError::Parse {
                line,
                msg: format!("trailing field {tok:?}"),
            });
        }
        if seq != out.len() as u64 {
            return Err(TraceError::Parse {
                line,
                msg: format!("seq {seq} out of order, expected {}", out.len()),
            });
        }
        match (instr.op.mem_bytes(), &mem) {
            (Some(b), Some(m)) if b != m.bytes || instr.fu_class.is_store() != (m.kind == MemKind::Store) => {
                return Err(TraceError::Parse {
                    line,
                    msg: format!("memory field disagrees with {}", instr.op.mnemonic()),
                })
            }
            (Some(_), None) => {
                return Err(TraceError::Parse {
                    line,
                    msg: format!("{} needs an M field", instr.op.mnemonic()),
                })
            }
            (None, Some(_)) => {
                return Err(TraceError::Parse {
                    line,
                    msg: format!("{} does not access memory", instr.op.mnemonic()),
                })
            }
            _ => {}
        }
        let rec = RetireRecord::new(seq, pc, next_pc, instr, mem);
        if !rec.is_control() && next_pc != rec.fallthrough() {
            return Err(TraceError::InconsistentControlFlow {
                seq,
                msg: format!("next_pc {next_pc:#x} after non-control {:#x}", pc),
            });
        }
        if let Some(prev) = out.last() {
            if prev.next_pc != pc {
                return Err(TraceError::InconsistentControlFlow {
                    seq,
                    msg: format!("pc {pc:#x} does not follow next_pc {:#x}", prev.next_pc),
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn format_trace(stream: &[RetireRecord]) -> String {
    let mut s = String::with_capacity(stream.len() * 32);
    s.push_str("# seq pc raw next_pc [M vaddr bytes S|L [data]]\n");
    for r in stream {
        let _ = write!(s, "{:x} {:x} {:x} {:x}", r.seq, r.pc, r.instr.raw, r.next_pc);
        if let Some(m) = r.mem {
            match m.kind {
                MemKind::Load => {
                    let _ = write!(s, " M {:x} {:x} L", m.vaddr, m.bytes);
                }
                MemKind::Store => {
                    let _ = write!(s, " M {:x} {:x} S {:x}", m.vaddr, m.bytes, m.data);
                }
            }
        }
        s.push('\n');
    }
    s
}

pub fn load_trace(path: &Path) -> Result<Vec<RetireRecord>, TraceError> {
    let text = std::fs::read_to_string(path).map_err(|e| TraceError::Io(format!("{}: {e}", path.display())))?;
    parse_trace(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taken_branch_and_target() {
        // beq x0, x0, +8
        let t = "0 1000 463 1008\n1 1008 13 100c\n";
        let s = parse_trace(t).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s[0].taken);
    }

    #[test]
    fn non_branch_jump_is_rejected() {
        let t = "0 1000 13 1008\n";
        assert!(matches!(
            parse_trace(t),
            Err(TraceError::InconsistentControlFlow { seq: 0, .. })
        ));
    }

    #[test]
    fn bad_hex_names_line() {
        let t = "# header\n0 1000 13 1004\n1 zz 13 1008\n";
        assert!(matches!(parse_trace(t), Err(TraceError::Parse { line: 3, .. })));
    }

    #[test]
    fn load_without_address_is_rejected() {
        // ld x1, 0(x2)
        let t = "0 1000 13083 1004\n";
        assert!(matches!(parse_trace(t), Err(TraceError::Parse { line: 1, .. })));
    }
}
