use crate::golden::Fnv;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtbReplacement {
    Lru,
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BtbConfig {
    pub entries: usize,
    pub ways: usize,
    pub replacement: BtbReplacement,
}

impl BtbConfig {
    pub fn direct_mapped(entries: usize) -> BtbConfig {
        BtbConfig {
            entries,
            ways: 1,
            replacement: BtbReplacement::RoundRobin,
        }
    }

    pub fn fully_associative(entries: usize) -> BtbConfig {
        BtbConfig {
            entries,
            ways: entries,
            replacement: BtbReplacement::Lru,
        }
    }

    pub fn set_associative(entries: usize, ways: usize) -> BtbConfig {
        BtbConfig {
            entries,
            ways,
            replacement: BtbReplacement::RoundRobin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
struct BtbEntry {
    valid: bool,
    tag: u64,
    target: u64,
    stamp: u64,
}

/// Branch target buffer tagged by the full PC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Btb {
    cfg: BtbConfig,
    sets: usize,
    entries: Vec<BtbEntry>,
    rr: Vec<usize>,
    clock: u64,
}

impl Btb {
    pub fn new(cfg: BtbConfig) -> Btb {
        assert!(cfg.ways > 0 && cfg.entries.is_multiple_of(cfg.ways), "bad BTB geometry");
        let sets = cfg.entries / cfg.ways;
        assert!(sets.is_power_of_two(), "BTB set count must be a power of two");
        Btb {
            cfg,
            sets,
            entries: vec![BtbEntry::default(); cfg.entries],
            rr: vec![0; sets],
            clock: 0,
        }
    }

    pub fn config(&self) -> BtbConfig {
        self.cfg
    }

    fn set_range(&self, pc: u64) -> std::ops::Range<usize> {
        let set = ((pc >> 1) as usize) & (self.sets - 1);
        set * self.cfg.ways..(set + 1) * self.cfg.ways
    }

    pub fn lookup(&self, pc: u64) -> Option<u64> {
        self.entries[self.set_range(pc)]
            .iter()
            .find(|e| e.valid && e.tag == pc)
            .map(|e| e.target)
    }

    /// Installs or refreshes the target for `pc`.
    pub fn install(&mut self, pc: u64, target: u64) {
        self.clock += 1;
        let range = self.set_range(pc);
        let set = range.start / self.cfg.ways;
        let clock = self.clock;
        let ways = &mut self.entries[range];
        if let Some(e) = ways.iter_mut().find(|e| e.valid && e.tag == pc) {
            e.target = target;
            e.stamp = clock;
            return;
        }
        let victim = match ways.iter().position(|e| !e.valid) {
            Some(i) => i,
            None => match self.cfg.replacement {
                BtbReplacement::Lru => ways
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, e)| e.stamp)
                    .map(|(i, _)| i)
                    .unwrap_or(0),
                BtbReplacement::RoundRobin => {
                    let v = self.rr[set];
                    self.rr[set] = (v + 1) % self.cfg.ways;
                    v
                }
            },
        };
        ways[victim] = BtbEntry {
            valid: true,
            tag: pc,
            target,
            stamp: clock,
        };
    }

    pub fn occupancy(&self) -> usize {
        self.entries.iter().filter(|e| e.valid).count()
    }

    pub fn capacity(&self) -> usize {
        self.cfg.entries
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for e in &self.entries {
            h.write(&[e.valid as u8]);
            h.write_u64(e.tag);
            h.write_u64(e.target);
            h.write_u64(e.stamp);
        }
        for r in &self.rr {
            h.write_u64(*r as u64);
        }
        h.finish()
    }
}
