//! Cache hierarchy shared by all core models: split L1 instruction/data
//! caches, a unified LLC and an ideal main memory over a 64-bit bus.
//! Translation is the identity; only VIPT index speculation is modeled.

mod cache;

pub use cache::{Cache, CacheConfig, CacheStats, Indexing, LineOutcome, Replacement};

use crate::golden::{MemAccess, MemKind, Memory, RetireRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("access of {size} bytes at {vaddr:#x} crosses a cache line")]
    UnalignedLineCrossing { vaddr: u64, size: u64 },
    #[error("bad cache geometry: {0}")]
    BadGeometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    Ifetch,
    Load,
    Store,
}

impl From<MemKind> for AccessKind {
    fn from(k: MemKind) -> AccessKind {
        match k {
            MemKind::Load => AccessKind::Load,
            MemKind::Store => AccessKind::Store,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    L1Hit,
    LlcHit,
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemResponse {
    pub latency: u32,
    pub level: Level,
    pub retried: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    /// `hit_latency` is the fetch hit latency.
    pub l1i: CacheConfig,
    /// `hit_latency` is the load-use hit latency.
    pub l1d: CacheConfig,
    /// `hit_latency` is the LLC base latency.
    pub llc: CacheConfig,
    pub store_hit_latency: u32,
    /// LLC-miss path base latency.
    pub memory_latency: u32,
    pub retry_penalty: u32,
    pub bus_bytes: u64,
    /// Outstanding data-side line misses.
    pub mshrs: usize,
}

impl HierarchyConfig {
    pub fn new(l1d_indexing: Indexing, mshrs: usize) -> HierarchyConfig {
        HierarchyConfig {
            l1i: CacheConfig::default(),
            l1d: CacheConfig {
                indexing: l1d_indexing,
                hit_latency: 2,
                ..CacheConfig::default()
            },
            llc: CacheConfig {
                size: 512 * 1024,
                ways: 8,
                line: 64,
                indexing: Indexing::Pipt,
                hit_latency: 8,
                replacement: Replacement::TreePlru,
            },
            store_hit_latency: 1,
            memory_latency: 10,
            retry_penalty: 2,
            bus_bytes: 8,
            mshrs,
        }
    }
}

impl Default for HierarchyConfig {
    fn default() -> HierarchyConfig {
        HierarchyConfig::new(Indexing::Pipt, 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyStats {
    pub l1i: CacheStats,
    pub l1d: CacheStats,
    pub llc: CacheStats,
    pub memory_reads: u64,
    pub memory_writebacks: u64,
    pub peak_outstanding_misses: u64,
}

/// Outstanding line misses. Accesses to a line with a pending fill merge
/// into it instead of allocating a new entry.
#[derive(Debug, Clone)]
pub struct MissTracker {
    capacity: usize,
    pending: Vec<(u64, u64, Level)>,
    pub peak: usize,
}

impl MissTracker {
    pub fn new(capacity: usize) -> MissTracker {
        MissTracker {
            capacity: capacity.max(1),
            pending: Vec::new(),
            peak: 0,
        }
    }

    fn prune(&mut self, now: u64) {
        self.pending.retain(|&(_, ready, _)| ready > now);
    }

    pub fn outstanding(&mut self, now: u64) -> usize {
        self.prune(now);
        self.pending.len()
    }

    fn lookup(&self, line: u64) -> Option<(u64, Level)> {
        self.pending.iter().find(|p| p.0 == line).map(|p| (p.1, p.2))
    }

    fn insert(&mut self, line: u64, ready: u64, level: Level) {
        self.pending.push((line, ready, level));
        self.peak = self.peak.max(self.pending.len());
    }

    fn clear(&mut self) {
        self.pending.clear();
    }
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    cfg: HierarchyConfig,
    pub l1i: Cache,
    pub l1d: Cache,
    pub llc: Cache,
    /// Page-crossing index bits of the last non-aborted data access.
    index_pred: Option<u64>,
    dmiss: MissTracker,
    imiss: MissTracker,
    memory_reads: u64,
    memory_writebacks: u64,
    backing: Memory,
}

impl Hierarchy {
    pub fn new(cfg: HierarchyConfig, image: Memory) -> Result<Hierarchy, MemError> {
        Ok(Hierarchy {
            cfg,
            l1i: Cache::new(cfg.l1i)?,
            l1d: Cache::new(cfg.l1d)?,
            llc: Cache::new(cfg.llc)?,
            index_pred: None,
            dmiss: MissTracker::new(cfg.mshrs),
            imiss: MissTracker::new(1),
            memory_reads: 0,
            memory_writebacks: 0,
            backing: image,
        })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.cfg
    }

    pub fn hit_latency(&self, kind: AccessKind) -> u32 {
        match kind {
            AccessKind::Ifetch => self.cfg.l1i.hit_latency,
            AccessKind::Load => self.cfg.l1d.hit_latency,
            AccessKind::Store => self.cfg.store_hit_latency,
        }
    }

    /// Cycles to deliver a line from `level`: base latency plus one cycle
    /// per additional bus beat. An L1 hit is the load-use hit latency.
    pub fn line_fill_latency(&self, level: Level) -> u32 {
        let beats = (self.cfg.l1d.line / self.cfg.bus_bytes.max(1)) as u32;
        match level {
            Level::L1Hit => self.cfg.l1d.hit_latency,
            Level::LlcHit => self.cfg.llc.hit_latency + beats - 1,
            Level::Memory => self.cfg.memory_latency + beats - 1,
        }
    }

    fn check_span(&self, vaddr: u64, size: u64, line: u64) -> Result<(), MemError> {
        if size == 0 || vaddr / line != (vaddr + size - 1) / line {
            return Err(MemError::UnalignedLineCrossing { vaddr, size });
        }
        Ok(())
    }

    /// Untimed access: updates tags, statistics and the index predictor.
    pub fn access(&mut self, vaddr: u64, kind: AccessKind, size: u64) -> Result<MemResponse, MemError> {
        let paddr = vaddr;
        let ifetch = kind == AccessKind::Ifetch;
        let cfg = if ifetch { self.cfg.l1i } else { self.cfg.l1d };
        self.check_span(vaddr, size, cfg.line)?;

        let mut retried = false;
        if !ifetch && cfg.indexing == Indexing::ViptSpeculative && cfg.speculated_bits() > 0 {
            let bits = (paddr >> 12) & ((1 << cfg.speculated_bits()) - 1);
            if self.index_pred.is_some_and(|p| p != bits) {
                retried = true;
                self.l1d.stats.retries += 1;
            }
            self.index_pred = Some(bits);
        }

        let write = kind == AccessKind::Store;
        let l1 = if ifetch { &mut self.l1i } else { &mut self.l1d };
        let out = l1.access(paddr, write);
        let level = if out.hit {
            Level::L1Hit
        } else {
            if let Some(victim) = out.writeback {
                if self.llc.fill(victim, true).writeback.is_some() {
                    self.memory_writebacks += 1;
                }
            }
            let llc = self.llc.access(paddr, false);
            if llc.writeback.is_some() {
                self.memory_writebacks += 1;
            }
            if llc.hit {
                Level::LlcHit
            } else {
                self.memory_reads += 1;
                Level::Memory
            }
        };
        let mut latency = self.hit_latency(kind);
        if level != Level::L1Hit {
            latency += self.line_fill_latency(level);
        }
        if retried {
            latency += self.cfg.retry_penalty;
        }
        Ok(MemResponse {
            latency,
            level,
            retried,
        })
    }

    /// Timed access issued at cycle `now`. Returns `None`, with no state
    /// change, when a new miss would exceed the outstanding-miss limit.
    pub fn access_at(
        &mut self,
        now: u64,
        vaddr: u64,
        kind: AccessKind,
        size: u64,
    ) -> Result<Option<MemResponse>, MemError> {
        let ifetch = kind == AccessKind::Ifetch;
        let line_bytes = if ifetch { self.cfg.l1i.line } else { self.cfg.l1d.line };
        self.check_span(vaddr, size, line_bytes)?;
        let line = vaddr / line_bytes;
        let tracker = if ifetch { &mut self.imiss } else { &mut self.dmiss };
        tracker.prune(now);
        if let Some((ready, level)) = tracker.lookup(line) {
            let mut r = self.access(vaddr, kind, size)?;
            r.latency = r.latency.max((ready - now) as u32);
            r.level = r.level.max(level);
            return Ok(Some(r));
        }
        let resident = if ifetch {
            self.l1i.probe(vaddr)
        } else {
            self.l1d.probe(vaddr)
        };
        if !resident && tracker.pending.len() >= tracker.capacity {
            return Ok(None);
        }
        let r = self.access(vaddr, kind, size)?;
        if r.level != Level::L1Hit {
            let tracker = if ifetch { &mut self.imiss } else { &mut self.dmiss };
            tracker.insert(line, now + r.latency as u64, r.level);
        }
        Ok(Some(r))
    }

    /// Outstanding data-side misses at `now`.
    pub fn outstanding_misses(&mut self, now: u64) -> usize {
        self.dmiss.outstanding(now)
    }

    /// Applies a retired store to the functional backing memory.
    pub fn commit_store(&mut self, m: &MemAccess) {
        if m.kind == MemKind::Store {
            self.backing.write(m.vaddr, m.bytes, m.data);
        }
    }

    pub fn memory(&self) -> &Memory {
        &self.backing
    }

    /// Touches every line the stream fetches or accesses, then clears
    /// statistics and outstanding misses.
    pub fn warm(&mut self, stream: &[RetireRecord]) -> Result<(), MemError> {
        let line = self.cfg.l1i.line;
        let mut last = u64::MAX;
        for r in stream {
            if r.pc / line != last {
                last = r.pc / line;
                self.access(r.pc, AccessKind::Ifetch, 2)?;
            }
            if let Some(m) = &r.mem {
                self.access(m.vaddr, m.kind.into(), m.bytes as u64)?;
            }
        }
        self.reset_stats();
        Ok(())
    }

    pub fn reset_stats(&mut self) {
        self.l1i.reset_stats();
        self.l1d.reset_stats();
        self.llc.reset_stats();
        self.memory_reads = 0;
        self.memory_writebacks = 0;
        self.dmiss.clear();
        self.imiss.clear();
        self.dmiss.peak = 0;
    }

    pub fn stats(&self) -> HierarchyStats {
        HierarchyStats {
            l1i: self.l1i.stats,
            l1d: self.l1d.stats,
            llc: self.llc.stats,
            memory_reads: self.memory_reads,
            memory_writebacks: self.memory_writebacks,
            peak_outstanding_misses: self.dmiss.peak as u64,
        }
    }
}
