use super::DirectionPredict;
use crate::golden::RetireRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictorError {
    #[error("empty branch stream")]
    EmptyStream,
    #[error("branch trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One resolved conditional branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchEvent {
    pub pc: u64,
    pub taken: bool,
    pub target: u64,
}

impl BranchEvent {
    pub fn from_record(r: &RetireRecord) -> Option<BranchEvent> {
        r.is_branch.then(|| BranchEvent {
            pc: r.pc,
            taken: r.taken,
            target: r.pc.wrapping_add(r.instr.imm as u64),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub branches: u64,
    pub mispredicts: u64,
    /// Counts after the warmup prefix.
    pub steady_branches: u64,
    pub steady_mispredicts: u64,
}

impl EvalStats {
    pub fn rate(&self) -> f64 {
        ratio(self.mispredicts, self.branches)
    }

    pub fn steady_rate(&self) -> f64 {
        ratio(self.steady_mispredicts, self.steady_branches)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs `events` through `p` in order, predicting before each update.
pub fn evaluate<P: DirectionPredict + ?Sized>(events: &[BranchEvent], p: &mut P, warmup: usize) -> EvalStats {
    let mut s = EvalStats::default();
    for (i, e) in events.iter().enumerate() {
        let wrong = p.predict(e.pc) != e.taken;
        s.branches += 1;
        s.mispredicts += wrong as u64;
        if i >= warmup {
            s.steady_branches += 1;
            s.steady_mispredicts += wrong as u64;
        }
        p.update(e.pc, e.taken);
    }
    s
}

/// Fraction of mispredicted directions over the whole stream.
pub fn mispredict_rate<P: DirectionPredict + ?Sized>(events: &[BranchEvent], p: &mut P) -> Result<f64, PredictorError> {
    if events.is_empty() {
        return Err(PredictorError::EmptyStream);
    }
    Ok(evaluate(events, p, 0).rate())
}

/// Parses `<pc-hex> <T|N> <target-hex>` lines; `#` starts a comment.
pub fn parse_branch_trace(text: &str) -> Result<Vec<BranchEvent>, PredictorError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| PredictorError::Parse { line: i + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err(format!("expected 3 fields, got {}", toks.len())));
        }
        let hex =
            |s: &str| u64::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|_| err(format!("bad hex `{s}`")));
        let taken = match toks[1] {
            "T" | "t" => true,
            "N" | "n" => false,
            o => return Err(err(format!("outcome must be T or N, got `{o}`"))),
        };
        out.push(BranchEvent {
            pc: hex(toks[0])?,
            taken,
            target: hex(toks[2])?,
        });
    }
    Ok(out)
}

pub fn format_branch_trace(events: &[BranchEvent]) -> String {
    events
        .iter()
        .map(|e| format!("{:x} {} {:x}\n", e.pc, if e.taken { 'T' } else { 'N' }, e.target))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::{BimodalBht, TwoLevelBht};

    fn stream(pattern: &[bool], n: usize) -> Vec<BranchEvent> {
        (0..n)
            .map(|i| BranchEvent {
                pc: 0x400,
                taken: pattern[i % pattern.len()],
                target: 0x300,
            })
            .collect()
    }

    #[test]
    fn alternating_on_bimodal_from_weakly_taken() {
        // WT -T-> ST (right), ST -N-> WT (wrong): exactly half wrong.
        let mut b = BimodalBht::with_initial(128, 2);
        let s = evaluate(&stream(&[true, false], 1000), &mut b, 0);
        assert_eq!(s.mispredicts, 500);
    }

    #[test]
    fn alternating_on_two_level_converges() {
        let mut p = TwoLevelBht::new(128, 3);
        let s = evaluate(&stream(&[true, false], 1000), &mut p, 16);
        assert_eq!(s.steady_mispredicts, 0);
    }

    #[test]
    fn all_taken_only_warmup_misses() {
        let ev = stream(&[true], 1000);
        let mut b = BimodalBht::new(128);
        let mut t = TwoLevelBht::new(128, 3);
        // Bimodal: one miss (1 -> 2). Two-level: history 000 (1 miss),
        // 001, 011 (1 miss each), then 111 (1 miss) before saturating.
        assert_eq!(evaluate(&ev, &mut b, 0).mispredicts, 1);
        assert_eq!(evaluate(&ev, &mut t, 0).mispredicts, 4);
    }

    #[test]
    fn empty_stream_is_an_error() {
        let mut b = BimodalBht::new(128);
        assert_eq!(mispredict_rate(&[], &mut b), Err(PredictorError::EmptyStream));
    }

    #[test]
    fn trace_parse_round_trip() {
        let ev = stream(&[true, false, false], 7);
        assert_eq!(parse_branch_trace(&format_branch_trace(&ev)).unwrap(), ev);
        assert!(matches!(
            parse_branch_trace("400 X 300\n"),
            Err(PredictorError::Parse { line: 1, .. })
        ));
    }
}
