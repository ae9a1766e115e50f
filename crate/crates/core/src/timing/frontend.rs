use std::collections::VecDeque;

use super::SimError;
use crate::golden::RetireRecord;
use crate::memhier::{AccessKind, Hierarchy};
use crate::predictors::PredictorSuite;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontendConfig {
    pub fetch_bytes: u32,
    pub buffer_entries: usize,
    /// Cycles lost between a mispredicted branch executing and the first
    /// correct-path instruction becoming issuable.
    pub mispredict_penalty: u32,
}

/// A fetched instruction waiting in the instruction buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fetched {
    pub idx: usize,
    /// First cycle the instruction may leave the buffer.
    pub ready: u64,
    pub mispredicted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchState {
    Running,
    /// Waiting for a mispredicted branch to resolve, or refilling after it.
    Redirect,
    IcacheMiss,
    Exhausted,
}

/// Execute-first fetch: walks the golden stream, consults the predictors at
/// fetch and stops behind a mispredicted control transfer until the core
/// reports its resolution. No wrong-path instructions are fetched.
#[derive(Debug, Clone)]
pub struct Frontend {
    cfg: FrontendConfig,
    next: usize,
    pub buffer: VecDeque<Fetched>,
    stall_until: u64,
    stall_reason: FetchState,
    waiting: Option<usize>,
    line: Option<u64>,
}

impl Frontend {
    pub fn new(cfg: FrontendConfig) -> Frontend {
        Frontend {
            cfg,
            next: 0,
            buffer: VecDeque::with_capacity(cfg.buffer_entries),
            stall_until: 0,
            stall_reason: FetchState::Running,
            waiting: None,
            line: None,
        }
    }

    pub fn fetched(&self) -> usize {
        self.next
    }

    /// Why the buffer may be empty at `now`.
    pub fn state(&self, now: u64, len: usize) -> FetchState {
        if self.waiting.is_some() {
            FetchState::Redirect
        } else if now < self.stall_until {
            self.stall_reason
        } else if self.next >= len {
            FetchState::Exhausted
        } else {
            FetchState::Running
        }
    }

    /// Head of the buffer if it may leave at `now`.
    pub fn peek(&self, now: u64, k: usize) -> Option<Fetched> {
        self.buffer.get(k).copied().filter(|f| f.ready <= now)
    }

    pub fn pop(&mut self) -> Option<Fetched> {
        self.buffer.pop_front()
    }

    /// Reports that mispredicted control transfer `idx` executed at `cycle`.
    pub fn resolve(&mut self, idx: usize, cycle: u64) {
        if self.waiting == Some(idx) {
            self.waiting = None;
            self.stall_until = cycle + self.cfg.mispredict_penalty as u64;
            self.stall_reason = FetchState::Redirect;
            self.line = None;
        }
    }

    /// One fetch cycle.
    pub fn cycle(
        &mut self,
        now: u64,
        stream: &[RetireRecord],
        suite: &mut PredictorSuite,
        mem: &mut Hierarchy,
    ) -> Result<(), SimError> {
        if self.waiting.is_some() || now < self.stall_until {
            return Ok(());
        }
        let line_bytes = mem.config().l1i.line;
        let hit = mem.hit_latency(AccessKind::Ifetch) as u64;
        let mut budget = self.cfg.fetch_bytes;
        while self.buffer.len() < self.cfg.buffer_entries && self.next < stream.len() {
            let rec = &stream[self.next];
            let w = rec.instr.width as u32;
            if w > budget {
                break;
            }
            let from_loop = suite.loop_buffer.as_ref().is_some_and(|lb| lb.supplies(rec.pc));
            let line = rec.pc / line_bytes;
            if !from_loop && self.line != Some(line) {
                match mem.access_at(now, rec.pc, AccessKind::Ifetch, 2)? {
                    None => {
                        self.stall_until = now + 1;
                        self.stall_reason = FetchState::IcacheMiss;
                        break;
                    }
                    Some(r) => {
                        self.line = Some(line);
                        if r.latency as u64 > hit {
                            self.stall_until = now + r.latency as u64 - hit;
                            self.stall_reason = FetchState::IcacheMiss;
                            break;
                        }
                    }
                }
            }
            suite.loop_buffer_fetch(rec);
            budget -= w;
            let idx = self.next;
            self.next += 1;
            let mut f = Fetched {
                idx,
                ready: now + 1,
                mispredicted: false,
            };
            if rec.is_control() {
                let res = suite.resolve(rec);
                if res.mispredicted {
                    f.mispredicted = true;
                    self.waiting = Some(idx);
                    self.buffer.push_back(f);
                    break;
                }
                if rec.taken {
                    if res.bubble > 0 {
                        self.stall_until = now + 1 + res.bubble as u64;
                        self.stall_reason = FetchState::Running;
                    }
                    self.buffer.push_back(f);
                    break;
                }
            }
            self.buffer.push_back(f);
        }
        Ok(())
    }
}
