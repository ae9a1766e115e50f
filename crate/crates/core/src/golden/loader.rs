use super::{Program, ProgramError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

fn parse_hex(s: &str) -> Option<u64> {
    u64::from_str_radix(s.trim_start_matches("0x").trim_start_matches("0X"), 16).ok()
}

/// Parses the flat-binary text format:
///
/// ```text
/// base=80000000 entry=80000000
/// 13 05 a0 00 93 08 00 00
/// 73 00 00 00
/// ```
///
/// Hex byte pairs may be separated by any whitespace or run together.
/// Lines starting with `#` are ignored.
pub fn parse_flat_binary(text: &str) -> Result<Program, LoadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(LoadError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut base = None;
    let mut entry = None;
    for tok in header.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| LoadError::Parse {
            line: hline,
            msg: format!("bad header token `{tok}`"),
        })?;
        let v = parse_hex(v).ok_or_else(|| LoadError::Parse {
            line: hline,
            msg: format!("bad hex `{v}`"),
        })?;
        match k {
            "base" => base = Some(v),
            "entry" => entry = Some(v),
            _ => {
                return Err(LoadError::Parse {
                    line: hline,
                    msg: format!("unknown header key `{k}`"),
                })
            }
        }
    }
    let base = base.ok_or(LoadError::Parse {
        line: hline,
        msg: "header lacks base=".into(),
    })?;
    let entry = entry.unwrap_or(base);

    let mut code = Vec::new();
    for (ln, line) in lines {
        let digits: String = line.split_whitespace().collect();
        if !digits.len().is_multiple_of(2) {
            return Err(LoadError::Parse {
                line: ln,
                msg: "odd number of hex digits".into(),
            });
        }
        for pair in digits.as_bytes().chunks(2) {
            let s = std::str::from_utf8(pair).unwrap_or("");
            let b = u8::from_str_radix(s, 16).map_err(|_| LoadError::Parse {
                line: ln,
                msg: format!("bad hex byte `{s}`"),
            })?;
            code.push(b);
        }
    }
    let p = Program {
        base,
        code,
        data: vec![],
        entry,
    };
    p.validate()?;
    Ok(p)
}

/// Inverse of [`parse_flat_binary`] for code-only programs.
pub fn format_flat_binary(p: &Program) -> String {
    let mut out = format!("base={:x} entry={:x}\n", p.base, p.entry);
    for chunk in p.code.chunks(16) {
        let line: Vec<String> = chunk.iter().map(|b| format!("{b:02x}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::run;

    #[test]
    fn loads_and_runs() {
        // li a0, 10 ; li a7, 0 ; ecall
        let text = "# demo\nbase=80000000 entry=80000000\n13 05 a0 00 93 08 00 00\n73000000\n";
        let p = parse_flat_binary(text).unwrap();
        assert_eq!(p.base, 0x8000_0000);
        assert_eq!(p.code.len(), 12);
        let r = run(&p, 10).unwrap();
        assert_eq!(r.state.x[10], 10);
        assert_eq!(parse_flat_binary(&format_flat_binary(&p)).unwrap(), p);
    }

    #[test]
    fn errors_name_the_line() {
        assert!(matches!(
            parse_flat_binary("base=0\n13 0"),
            Err(LoadError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_flat_binary("entry=4\n13000000"),
            Err(LoadError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_flat_binary("base=0 entry=40\n13000000"),
            Err(LoadError::Program(_))
        ));
    }
}
