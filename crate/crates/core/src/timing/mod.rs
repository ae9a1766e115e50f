//! Pieces shared by the in-order and out-of-order timing models: functional
//! unit latencies, the fetch front end, stall accounting and run results.

mod frontend;

pub use frontend::{FetchState, Fetched, Frontend, FrontendConfig};

use crate::golden::{Fnv, RetireRecord};
use crate::isa::FuClass;
use crate::memhier::MemError;
use crate::predictors::PredictorStats;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("stream mismatch at seq {seq}: {msg}")]
    StreamMismatch { seq: u64, msg: String },
    #[error(transparent)]
    Mem(#[from] MemError),
    #[error("invalid core configuration: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("no forward progress for {0} cycles")]
    Deadlock(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuLatencies {
    pub alu: u32,
    pub bru: u32,
    pub mul: u32,
    pub div: u32,
    pub fp_alu: u32,
    pub fp_mul: u32,
    pub fp_div: u32,
    pub csr: u32,
}

impl Default for FuLatencies {
    fn default() -> FuLatencies {
        FuLatencies {
            alu: 1,
            bru: 1,
            mul: 3,
            div: 20,
            fp_alu: 4,
            fp_mul: 4,
            fp_div: 16,
            csr: 1,
        }
    }
}

impl FuLatencies {
    /// Execution latency of non-memory classes. Memory classes return 1;
    /// their real latency comes from the hierarchy.
    pub fn latency(&self, fu: FuClass) -> u32 {
        match fu {
            FuClass::Alu => self.alu,
            FuClass::Bru => self.bru,
            FuClass::Mul => self.mul,
            FuClass::Div => self.div,
            FuClass::FpAlu => self.fp_alu,
            FuClass::FpMul => self.fp_mul,
            FuClass::FpDiv => self.fp_div,
            FuClass::Csr | FuClass::System => self.csr,
            FuClass::Load | FuClass::Store | FuClass::FpLoad | FuClass::FpStore => 1,
        }
    }

    pub fn pipelined(fu: FuClass) -> bool {
        !matches!(fu, FuClass::Div | FuClass::FpDiv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallCause {
    FetchStarve,
    RawDependency,
    WawDependency,
    StructuralFu,
    StructuralWbPort,
    ScoreboardFull,
    LsuFull,
    MispredictRedirect,
    CacheMiss,
    RobFull,
    RenameStall,
}

impl StallCause {
    pub const ALL: [StallCause; 11] = [
        StallCause::FetchStarve,
        StallCause::RawDependency,
        StallCause::WawDependency,
        StallCause::StructuralFu,
        StallCause::StructuralWbPort,
        StallCause::ScoreboardFull,
        StallCause::LsuFull,
        StallCause::MispredictRedirect,
        StallCause::CacheMiss,
        StallCause::RobFull,
        StallCause::RenameStall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StallCause::FetchStarve => "fetch_starve",
            StallCause::RawDependency => "raw_dependency",
            StallCause::WawDependency => "waw_dependency",
            StallCause::StructuralFu => "structural_fu",
            StallCause::StructuralWbPort => "structural_wb_port",
            StallCause::ScoreboardFull => "scoreboard_full",
            StallCause::LsuFull => "lsu_full",
            StallCause::MispredictRedirect => "mispredict_redirect",
            StallCause::CacheMiss => "cache_miss",
            StallCause::RobFull => "rob_full",
            StallCause::RenameStall => "rename_stall",
        }
    }
}

/// One attribution per cycle: `busy` when the issue (in-order) or dispatch
/// (out-of-order) stage made progress, otherwise the blocking cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallBreakdown {
    pub busy: u64,
    pub fetch_starve: u64,
    pub raw_dependency: u64,
    pub waw_dependency: u64,
    pub structural_fu: u64,
    pub structural_wb_port: u64,
    pub scoreboard_full: u64,
    pub lsu_full: u64,
    pub mispredict_redirect: u64,
    pub cache_miss: u64,
    pub rob_full: u64,
    pub rename_stall: u64,
}

impl StallBreakdown {
    pub fn add(&mut self, cause: StallCause) {
        *self.slot(cause) += 1;
    }

    fn slot(&mut self, cause: StallCause) -> &mut u64 {
        match cause {
            StallCause::FetchStarve => &mut self.fetch_starve,
            StallCause::RawDependency => &mut self.raw_dependency,
            StallCause::WawDependency => &mut self.waw_dependency,
            StallCause::StructuralFu => &mut self.structural_fu,
            StallCause::StructuralWbPort => &mut self.structural_wb_port,
            StallCause::ScoreboardFull => &mut self.scoreboard_full,
            StallCause::LsuFull => &mut self.lsu_full,
            StallCause::MispredictRedirect => &mut self.mispredict_redirect,
            StallCause::CacheMiss => &mut self.cache_miss,
            StallCause::RobFull => &mut self.rob_full,
            StallCause::RenameStall => &mut self.rename_stall,
        }
    }

    pub fn get(&self, cause: StallCause) -> u64 {
        let mut c = *self;
        *c.slot(cause)
    }

    pub fn total(&self) -> u64 {
        self.busy + StallCause::ALL.iter().map(|&c| self.get(c)).sum::<u64>()
    }
}

/// One instruction issued to a functional unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueEvent {
    pub cycle: u64,
    pub seq: u64,
    pub fu: FuClass,
}

/// Raw output of one timing-model run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoreRun {
    pub cycles: u64,
    pub retired: u64,
    pub stalls: StallBreakdown,
    pub predictor: PredictorStats,
    pub loop_buffer_supplied: u64,
    pub peak_retire: u64,
    /// `retire_histogram[n]` counts cycles that retired `n` instructions.
    pub retire_histogram: Vec<u64>,
    /// ROB entries occupied, sampled every cycle (out-of-order only).
    pub rob_histogram: Vec<u64>,
    pub peak_rob_entries: u64,
    pub peak_in_flight: u64,
    pub rename_stalls: u64,
    /// Digest of the committed `(seq, pc)` sequence.
    pub commit_digest: u64,
    pub issue_log: Option<Vec<IssueEvent>>,
}

impl CoreRun {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.retired as f64 / self.cycles as f64
        }
    }

    pub(crate) fn count_retire(&mut self, n: usize) {
        if self.retire_histogram.len() <= n {
            self.retire_histogram.resize(n + 1, 0);
        }
        self.retire_histogram[n] += 1;
        self.peak_retire = self.peak_retire.max(n as u64);
    }
}

/// Incremental digest of committed records, comparable with
/// [`stream_digest`].
#[derive(Debug, Clone, Default)]
pub struct CommitDigest {
    h: Fnv,
    next: u64,
}

impl CommitDigest {
    pub fn commit(&mut self, r: &RetireRecord) -> Result<(), SimError> {
        if r.seq != self.next {
            return Err(SimError::StreamMismatch {
                seq: r.seq,
                msg: format!("committed out of order, expected seq {}", self.next),
            });
        }
        self.next += 1;
        self.h.write_u64(r.seq);
        self.h.write_u64(r.pc);
        Ok(())
    }

    pub fn committed(&self) -> u64 {
        self.next
    }

    pub fn finish(&self) -> u64 {
        self.h.finish()
    }
}

/// Digest of a whole golden stream, as committed in order.
pub fn stream_digest(stream: &[RetireRecord]) -> u64 {
    let mut d = CommitDigest::default();
    for r in stream {
        d.h.write_u64(r.seq);
        d.h.write_u64(r.pc);
    }
    d.finish()
}

/// Checks sequence numbering and control-flow continuity.
pub fn check_stream(stream: &[RetireRecord]) -> Result<(), SimError> {
    for (i, r) in stream.iter().enumerate() {
        if r.seq != i as u64 {
            return Err(SimError::StreamMismatch {
                seq: r.seq,
                msg: format!("expected seq {i}"),
            });
        }
        if i > 0 && stream[i - 1].next_pc != r.pc {
            return Err(SimError::StreamMismatch {
                seq: r.seq,
                msg: format!("pc {:#x} does not follow next_pc {:#x}", r.pc, stream[i - 1].next_pc),
            });
        }
    }
    Ok(())
}

/// Cycles without a commit after which a model reports a deadlock.
pub(crate) const DEADLOCK_CYCLES: u64 = 100_000;
