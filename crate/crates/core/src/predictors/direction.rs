use crate::golden::Fnv;
use serde::{Deserialize, Serialize};

/// Direction predictor interface shared by all BHT organisations.
pub trait DirectionPredict {
    /// Pure lookup.
    fn predict(&self, pc: u64) -> bool;
    fn update(&mut self, pc: u64, taken: bool);
    /// Hash of the full internal state.
    fn digest(&self) -> u64;
}

/// Weakly not-taken.
pub const COUNTER_INIT: u8 = 1;

/// Two-bit saturating counter step.
pub fn saturate(counter: u8, taken: bool) -> u8 {
    if taken {
        (counter + 1).min(3)
    } else {
        counter.saturating_sub(1)
    }
}

fn bht_index(pc: u64, entries: usize) -> usize {
    ((pc >> 2) as usize) & (entries - 1)
}

fn check_pow2(n: usize, what: &str) {
    assert!(n.is_power_of_two(), "{what} must be a power of two, got {n}");
}

/// Table of 2-bit counters indexed by the low PC bits above bit 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimodalBht {
    counters: Vec<u8>,
}

impl BimodalBht {
    pub fn new(entries: usize) -> BimodalBht {
        BimodalBht::with_initial(entries, COUNTER_INIT)
    }

    pub fn with_initial(entries: usize, init: u8) -> BimodalBht {
        check_pow2(entries, "BHT entries");
        BimodalBht {
            counters: vec![init.min(3); entries],
        }
    }

    pub fn entries(&self) -> usize {
        self.counters.len()
    }

    pub fn counter(&self, pc: u64) -> u8 {
        self.counters[bht_index(pc, self.counters.len())]
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }
}

impl DirectionPredict for BimodalBht {
    fn predict(&self, pc: u64) -> bool {
        self.counter(pc) >= 2
    }

    fn update(&mut self, pc: u64, taken: bool) {
        let i = bht_index(pc, self.counters.len());
        self.counters[i] = saturate(self.counters[i], taken);
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(&self.counters);
        h.finish()
    }
}

/// Per-entry private history register selecting one of that entry's own
/// pattern counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoLevelBht {
    history_bits: u32,
    histories: Vec<u16>,
    patterns: Vec<u8>,
}

impl TwoLevelBht {
    pub fn new(entries: usize, history_bits: u32) -> TwoLevelBht {
        check_pow2(entries, "two-level entries");
        assert!((1..=12).contains(&history_bits), "history width out of range");
        TwoLevelBht {
            history_bits,
            histories: vec![0; entries],
            patterns: vec![COUNTER_INIT; entries << history_bits],
        }
    }

    pub fn entries(&self) -> usize {
        self.histories.len()
    }

    pub fn history_bits(&self) -> u32 {
        self.history_bits
    }

    pub fn history(&self, pc: u64) -> u16 {
        self.histories[bht_index(pc, self.histories.len())]
    }

    fn slot(&self, pc: u64) -> (usize, usize) {
        let e = bht_index(pc, self.histories.len());
        (e, (e << self.history_bits) | self.histories[e] as usize)
    }

    pub fn patterns(&self) -> &[u8] {
        &self.patterns
    }

    pub fn histories(&self) -> &[u16] {
        &self.histories
    }
}

impl DirectionPredict for TwoLevelBht {
    fn predict(&self, pc: u64) -> bool {
        let (_, s) = self.slot(pc);
        self.patterns[s] >= 2
    }

    fn update(&mut self, pc: u64, taken: bool) {
        let (e, s) = self.slot(pc);
        self.patterns[s] = saturate(self.patterns[s], taken);
        let mask = (1u16 << self.history_bits) - 1;
        self.histories[e] = ((self.histories[e] << 1) | taken as u16) & mask;
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for v in &self.histories {
            h.write(&v.to_le_bytes());
        }
        h.write(&self.patterns);
        h.finish()
    }
}

/// Geometry of [`HybridBht`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridGeometry {
    pub global_history_bits: u32,
    pub local_entries: usize,
    pub local_history_bits: u32,
    pub chooser_entries: usize,
}

impl Default for HybridGeometry {
    fn default() -> Self {
        HybridGeometry {
            global_history_bits: 12,
            local_entries: 1024,
            local_history_bits: 8,
            chooser_entries: 1024,
        }
    }
}

/// Tournament of a gshare-style global component and a private-history
/// local component, arbitrated by a per-PC chooser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridBht {
    ghr: u64,
    ghr_bits: u32,
    global: Vec<u8>,
    local: TwoLevelBht,
    /// >= 2 selects the global component.
    chooser: Vec<u8>,
}

impl HybridBht {
    pub fn new(g: HybridGeometry) -> HybridBht {
        check_pow2(g.chooser_entries, "chooser entries");
        assert!((1..=20).contains(&g.global_history_bits));
        HybridBht {
            ghr: 0,
            ghr_bits: g.global_history_bits,
            global: vec![COUNTER_INIT; 1 << g.global_history_bits],
            local: TwoLevelBht::new(g.local_entries, g.local_history_bits),
            chooser: vec![COUNTER_INIT; g.chooser_entries],
        }
    }

    fn global_index(&self, pc: u64) -> usize {
        (((pc >> 2) ^ self.ghr) as usize) & (self.global.len() - 1)
    }

    fn chooser_index(&self, pc: u64) -> usize {
        bht_index(pc, self.chooser.len())
    }

    pub fn global_history(&self) -> u64 {
        self.ghr
    }

    /// Returns (global prediction, local prediction, chose global).
    pub fn components(&self, pc: u64) -> (bool, bool, bool) {
        let g = self.global[self.global_index(pc)] >= 2;
        let l = self.local.predict(pc);
        (g, l, self.chooser[self.chooser_index(pc)] >= 2)
    }

    pub fn counters(&self) -> impl Iterator<Item = u8> + '_ {
        self.global
            .iter()
            .chain(self.local.patterns().iter())
            .chain(self.chooser.iter())
            .copied()
    }
}

impl DirectionPredict for HybridBht {
    fn predict(&self, pc: u64) -> bool {
        let (g, l, use_global) = self.components(pc);
        if use_global {
            g
        } else {
            l
        }
    }

    fn update(&mut self, pc: u64, taken: bool) {
        let (g, l, _) = self.components(pc);
        if g != l {
            let c = self.chooser_index(pc);
            self.chooser[c] = saturate(self.chooser[c], g == taken);
        }
        let gi = self.global_index(pc);
        self.global[gi] = saturate(self.global[gi], taken);
        self.local.update(pc, taken);
        self.ghr = ((self.ghr << 1) | taken as u64) & ((1u64 << self.ghr_bits) - 1);
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.ghr);
        h.write(&self.global);
        h.write_u64(self.local.digest());
        h.write(&self.chooser);
        h.finish()
    }
}

/// Direction predictor selected by configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionPredictor {
    Bimodal(BimodalBht),
    TwoLevel(TwoLevelBht),
    Hybrid(HybridBht),
}

impl DirectionPredict for DirectionPredictor {
    fn predict(&self, pc: u64) -> bool {
        match self {
            DirectionPredictor::Bimodal(p) => p.predict(pc),
            DirectionPredictor::TwoLevel(p) => p.predict(pc),
            DirectionPredictor::Hybrid(p) => p.predict(pc),
        }
    }

    fn update(&mut self, pc: u64, taken: bool) {
        match self {
            DirectionPredictor::Bimodal(p) => p.update(pc, taken),
            DirectionPredictor::TwoLevel(p) => p.update(pc, taken),
            DirectionPredictor::Hybrid(p) => p.update(pc, taken),
        }
    }

    fn digest(&self) -> u64 {
        match self {
            DirectionPredictor::Bimodal(p) => p.digest(),
            DirectionPredictor::TwoLevel(p) => p.digest(),
            DirectionPredictor::Hybrid(p) => p.digest(),
        }
    }
}
