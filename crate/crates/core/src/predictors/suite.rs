use super::{
    BimodalBht, Btb, BtbConfig, DirectionPredict, DirectionPredictor, HybridBht, HybridGeometry, LoopBuffer, Ras,
    TwoLevelBht,
};
use crate::golden::{Fnv, RetireRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionKind {
    Bimodal { entries: usize },
    TwoLevel { entries: usize, history_bits: u32 },
    Hybrid(HybridGeometry),
}

impl DirectionKind {
    pub fn build(&self) -> DirectionPredictor {
        match *self {
            DirectionKind::Bimodal { entries } => DirectionPredictor::Bimodal(BimodalBht::new(entries)),
            DirectionKind::TwoLevel { entries, history_bits } => {
                DirectionPredictor::TwoLevel(TwoLevelBht::new(entries, history_bits))
            }
            DirectionKind::Hybrid(g) => DirectionPredictor::Hybrid(HybridBht::new(g)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub direction: DirectionKind,
    pub btb: BtbConfig,
    /// Small zero-bubble BTB consulted before `btb`.
    pub l0_btb: Option<BtbConfig>,
    pub ras_depth: usize,
    pub loop_buffer: Option<usize>,
    /// Fetch bubble when only the main BTB (not L0) supplies a taken target.
    pub l1_btb_bubble: u32,
}

impl PredictorConfig {
    /// 128-entry bimodal BHT, 32-entry direct-mapped BTB, 2-entry RAS.
    pub fn cva6() -> PredictorConfig {
        PredictorConfig {
            direction: DirectionKind::Bimodal { entries: 128 },
            btb: BtbConfig::direct_mapped(32),
            l0_btb: None,
            ras_depth: 2,
            loop_buffer: None,
            l1_btb_bubble: 0,
        }
    }

    /// As [`PredictorConfig::cva6`] with the 128-entry, 3-bit private-history BHT.
    pub fn cva6s_plus() -> PredictorConfig {
        PredictorConfig {
            direction: DirectionKind::TwoLevel {
                entries: 128,
                history_bits: 3,
            },
            ..PredictorConfig::cva6()
        }
    }

    pub fn c910() -> PredictorConfig {
        PredictorConfig {
            direction: DirectionKind::Hybrid(HybridGeometry::default()),
            btb: BtbConfig::set_associative(4096, 4),
            l0_btb: Some(BtbConfig::fully_associative(16)),
            ras_depth: 12,
            loop_buffer: Some(16),
            l1_btb_bubble: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredSource {
    None,
    L0Btb,
    L1Btb,
    Ras,
}

/// Pure front-end prediction for a fetch address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub taken: bool,
    pub target: Option<u64>,
    pub source: PredSource,
}

/// Outcome of predicting and then training on one control transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchResolution {
    pub predicted_taken: bool,
    pub predicted_target: Option<u64>,
    pub source: PredSource,
    pub mispredicted: bool,
    /// Fetch bubble on a correct taken prediction.
    pub bubble: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorStats {
    pub control_transfers: u64,
    pub mispredicts: u64,
    pub cond_branches: u64,
    pub cond_mispredicts: u64,
    pub returns: u64,
    pub return_mispredicts: u64,
    pub btb_hits: u64,
    pub btb_misses: u64,
    pub l0_hits: u64,
}

/// All front-end prediction state of one core.
#[derive(Debug, Clone)]
pub struct PredictorSuite {
    cfg: PredictorConfig,
    pub direction: DirectionPredictor,
    pub l0: Option<Btb>,
    pub btb: Btb,
    pub ras: Ras,
    pub loop_buffer: Option<LoopBuffer>,
    stats: PredictorStats,
}

impl PredictorSuite {
    pub fn new(cfg: PredictorConfig) -> PredictorSuite {
        PredictorSuite {
            cfg,
            direction: cfg.direction.build(),
            l0: cfg.l0_btb.map(Btb::new),
            btb: Btb::new(cfg.btb),
            ras: Ras::new(cfg.ras_depth),
            loop_buffer: cfg.loop_buffer.map(LoopBuffer::new),
            stats: PredictorStats::default(),
        }
    }

    pub fn config(&self) -> &PredictorConfig {
        &self.cfg
    }

    pub fn stats(&self) -> PredictorStats {
        self.stats
    }

    fn btb_lookup(&self, pc: u64) -> (Option<u64>, PredSource) {
        if let Some(t) = self.l0.as_ref().and_then(|l0| l0.lookup(pc)) {
            return (Some(t), PredSource::L0Btb);
        }
        match self.btb.lookup(pc) {
            Some(t) => (Some(t), PredSource::L1Btb),
            None => (None, PredSource::None),
        }
    }

    /// Direction plus BTB target for `pc`. Does not consult the RAS, whose
    /// use depends on decode.
    pub fn predict(&self, pc: u64) -> Prediction {
        let (target, source) = self.btb_lookup(pc);
        Prediction {
            taken: self.direction.predict(pc),
            target,
            source,
        }
    }

    /// Predicts `rec` with the current state, then trains on its outcome.
    pub fn resolve(&mut self, rec: &RetireRecord) -> BranchResolution {
        debug_assert!(rec.is_control());
        let (mut target, mut source) = self.btb_lookup(rec.pc);
        if rec.is_return {
            if let Some(t) = self.ras.pop() {
                target = Some(t);
                source = PredSource::Ras;
            }
        }
        let predicted_taken = if rec.is_branch {
            self.direction.predict(rec.pc) && target.is_some()
        } else {
            target.is_some()
        };
        let correct = if rec.taken {
            predicted_taken && target == Some(rec.next_pc)
        } else {
            !predicted_taken
        };
        let bubble = if correct && rec.taken && source == PredSource::L1Btb {
            self.cfg.l1_btb_bubble
        } else {
            0
        };

        let s = &mut self.stats;
        s.control_transfers += 1;
        s.mispredicts += !correct as u64;
        if rec.is_branch {
            s.cond_branches += 1;
            s.cond_mispredicts += !correct as u64;
        }
        if rec.is_return {
            s.returns += 1;
            s.return_mispredicts += !correct as u64;
        }
        if rec.taken {
            match source {
                PredSource::L0Btb => {
                    s.btb_hits += 1;
                    s.l0_hits += 1;
                }
                PredSource::L1Btb => s.btb_hits += 1,
                PredSource::None => s.btb_misses += 1,
                PredSource::Ras => {}
            }
        }

        if rec.is_branch {
            self.direction.update(rec.pc, rec.taken);
        }
        if rec.taken {
            self.btb.install(rec.pc, rec.next_pc);
            if let Some(l0) = self.l0.as_mut() {
                l0.install(rec.pc, rec.next_pc);
            }
        }
        if rec.is_call {
            self.ras.push(rec.fallthrough());
        }

        BranchResolution {
            predicted_taken,
            predicted_target: target,
            source,
            mispredicted: !correct,
            bubble,
        }
    }

    /// Feeds one fetched instruction to the loop buffer; returns whether it
    /// was supplied from the buffer (no instruction-cache access needed).
    pub fn loop_buffer_fetch(&mut self, rec: &RetireRecord) -> bool {
        match self.loop_buffer.as_mut() {
            Some(lb) => {
                let hit = lb.supplies(rec.pc);
                lb.observe(rec.pc, rec.next_pc, rec.is_control(), rec.taken);
                hit
            }
            None => false,
        }
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.direction.digest());
        h.write_u64(self.btb.digest());
        if let Some(l0) = &self.l0 {
            h.write_u64(l0.digest());
        }
        h.write_u64(self.ras.digest());
        h.finish()
    }
}
