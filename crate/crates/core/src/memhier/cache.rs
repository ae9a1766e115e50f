use serde::{Deserialize, Serialize};

use super::MemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    /// Index bits above the page offset are speculated from the previous
    /// translation and the access is retried on a mismatch.
    ViptSpeculative,
    Pipt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    Lru,
    TreePlru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub size: u64,
    pub ways: u32,
    pub line: u64,
    pub indexing: Indexing,
    pub hit_latency: u32,
    pub replacement: Replacement,
}

impl Default for CacheConfig {
    fn default() -> CacheConfig {
        CacheConfig {
            size: 64 * 1024,
            ways: 2,
            line: 64,
            indexing: Indexing::Pipt,
            hit_latency: 1,
            replacement: Replacement::Lru,
        }
    }
}

impl CacheConfig {
    pub fn sets(&self) -> u64 {
        self.size / (self.ways as u64 * self.line)
    }

    pub fn validate(&self) -> Result<(), MemError> {
        let bad = |msg: &str| Err(MemError::BadGeometry(msg.to_string()));
        if self.ways == 0 || self.line < 8 || !self.line.is_power_of_two() {
            return bad("line must be a power of two >= 8 and ways > 0");
        }
        if !self.size.is_multiple_of(self.ways as u64 * self.line) || !self.sets().is_power_of_two() {
            return bad("size / (ways * line) must be a power of two");
        }
        if self.replacement == Replacement::TreePlru && !self.ways.is_power_of_two() {
            return bad("tree PLRU needs a power-of-two way count");
        }
        Ok(())
    }

    pub fn offset_bits(&self) -> u32 {
        self.line.trailing_zeros()
    }

    pub fn index_bits(&self) -> u32 {
        self.sets().trailing_zeros()
    }

    /// Set-index bits that lie above the 4 KiB page offset.
    pub fn speculated_bits(&self) -> u32 {
        (self.offset_bits() + self.index_bits()).saturating_sub(12)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub writebacks: u64,
    pub retries: u64,
}

impl CacheStats {
    pub fn miss_rate(&self) -> f64 {
        if self.accesses == 0 {
            0.0
        } else {
            self.misses as f64 / self.accesses as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Way {
    valid: bool,
    dirty: bool,
    tag: u64,
    stamp: u64,
}

/// Result of a line-granular lookup-and-allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineOutcome {
    pub hit: bool,
    /// Line address of a dirty victim that must be written back.
    pub writeback: Option<u64>,
}

/// Tag store of one set-associative write-back, write-allocate cache.
#[derive(Debug, Clone)]
pub struct Cache {
    cfg: CacheConfig,
    ways: Vec<Way>,
    plru: Vec<u64>,
    clock: u64,
    pub stats: CacheStats,
}

impl Cache {
    pub fn new(cfg: CacheConfig) -> Result<Cache, MemError> {
        cfg.validate()?;
        let sets = cfg.sets() as usize;
        Ok(Cache {
            cfg,
            ways: vec![Way::default(); sets * cfg.ways as usize],
            plru: vec![0; sets],
            clock: 0,
            stats: CacheStats::default(),
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.cfg
    }

    pub fn set_index(&self, addr: u64) -> usize {
        ((addr >> self.cfg.offset_bits()) & (self.cfg.sets() - 1)) as usize
    }

    fn tag(&self, addr: u64) -> u64 {
        addr >> (self.cfg.offset_bits() + self.cfg.index_bits())
    }

    fn set(&self, set: usize) -> std::ops::Range<usize> {
        let w = self.cfg.ways as usize;
        set * w..(set + 1) * w
    }

    /// True if the line holding `addr` is resident. No state change.
    pub fn probe(&self, addr: u64) -> bool {
        let tag = self.tag(addr);
        self.ways[self.set(self.set_index(addr))]
            .iter()
            .any(|w| w.valid && w.tag == tag)
    }

    fn touch(&mut self, set: usize, way: usize) {
        self.clock += 1;
        let base = set * self.cfg.ways as usize;
        self.ways[base + way].stamp = self.clock;
        if self.cfg.replacement == Replacement::TreePlru {
            // Point every node on the path away from `way`.
            let levels = self.cfg.ways.trailing_zeros();
            let mut node = 1usize;
            let bits = &mut self.plru[set];
            for l in (0..levels).rev() {
                let right = (way >> l) & 1 == 1;
                if right {
                    *bits &= !(1 << node);
                } else {
                    *bits |= 1 << node;
                }
                node = node * 2 + right as usize;
            }
        }
    }

    fn victim(&self, set: usize) -> usize {
        let r = self.set(set);
        let ways = &self.ways[r];
        if let Some(i) = ways.iter().position(|w| !w.valid) {
            return i;
        }
        match self.cfg.replacement {
            Replacement::Lru => (0..ways.len()).min_by_key(|&i| ways[i].stamp).unwrap_or(0),
            Replacement::TreePlru => {
                let levels = self.cfg.ways.trailing_zeros();
                let bits = self.plru[set];
                let mut node = 1usize;
                let mut way = 0usize;
                for _ in 0..levels {
                    let right = bits >> node & 1 == 1;
                    way = way * 2 + right as usize;
                    node = node * 2 + right as usize;
                }
                way
            }
        }
    }

    /// Counted access: looks up `addr`, allocating on a miss.
    pub fn access(&mut self, addr: u64, write: bool) -> LineOutcome {
        self.stats.accesses += 1;
        let out = self.fill(addr, write);
        if out.hit {
            self.stats.hits += 1;
        } else {
            self.stats.misses += 1;
        }
        out
    }

    /// Uncounted lookup-and-allocate, used for write-backs arriving from an
    /// upper level.
    pub fn fill(&mut self, addr: u64, write: bool) -> LineOutcome {
        let set = self.set_index(addr);
        let tag = self.tag(addr);
        let r = self.set(set);
        if let Some(i) = self.ways[r.clone()].iter().position(|w| w.valid && w.tag == tag) {
            self.ways[r.start + i].dirty |= write;
            self.touch(set, i);
            return LineOutcome {
                hit: true,
                writeback: None,
            };
        }
        let v = self.victim(set);
        let old = self.ways[r.start + v];
        let mut writeback = None;
        if old.valid {
            self.stats.evictions += 1;
            if old.dirty {
                self.stats.writebacks += 1;
                let shift = self.cfg.offset_bits() + self.cfg.index_bits();
                writeback = Some((old.tag << shift) | ((set as u64) << self.cfg.offset_bits()));
            }
        }
        self.ways[r.start + v] = Way {
            valid: true,
            dirty: write,
            tag,
            stamp: 0,
        };
        self.touch(set, v);
        LineOutcome { hit: false, writeback }
    }

    pub fn reset_stats(&mut self) {
        self.stats = CacheStats::default();
    }

    /// Number of valid lines.
    pub fn occupancy(&self) -> usize {
        self.ways.iter().filter(|w| w.valid).count()
    }
}
