//! Core configurations and the three built-in presets.

use crate::memhier::{HierarchyConfig, Indexing};
use crate::predictors::PredictorConfig;
use crate::timing::{FrontendConfig, FuLatencies, SimError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreKind {
    InOrder,
    OutOfOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InOrderConfig {
    pub issue_width: usize,
    pub commit_width: usize,
    pub scoreboard_entries: usize,
    pub n_alu: usize,
    pub n_mul: usize,
    pub n_div: usize,
    pub n_bru: usize,
    pub n_fpu: usize,
    pub load_q: usize,
    pub store_q: usize,
    pub renaming_enabled: bool,
    pub alu_forwarding_enabled: bool,
    pub fpu_dual_issue_enabled: bool,
    /// The second ALU writes back through the FPU's port.
    pub shared_wb_port: bool,
}

impl InOrderConfig {
    pub fn cva6() -> InOrderConfig {
        InOrderConfig {
            issue_width: 1,
            commit_width: 2,
            scoreboard_entries: 8,
            n_alu: 1,
            n_mul: 1,
            n_div: 1,
            n_bru: 1,
            n_fpu: 1,
            load_q: 2,
            store_q: 4,
            renaming_enabled: false,
            alu_forwarding_enabled: false,
            fpu_dual_issue_enabled: false,
            shared_wb_port: false,
        }
    }

    pub fn cva6s_plus() -> InOrderConfig {
        InOrderConfig {
            issue_width: 2,
            n_alu: 2,
            renaming_enabled: true,
            alu_forwarding_enabled: true,
            fpu_dual_issue_enabled: true,
            shared_wb_port: true,
            ..InOrderConfig::cva6()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OooConfig {
    pub decode_width: usize,
    pub retire_entries_per_cycle: usize,
    pub pipeline_depth: u32,
    pub rob_entries: usize,
    pub compaction_max: usize,
    pub phys_int_regs: usize,
    pub phys_fp_regs: usize,
    pub n_alu: usize,
    pub n_fpu: usize,
    pub n_mul: usize,
    pub n_div: usize,
    pub n_bru: usize,
    pub lsu_ports: usize,
    pub load_q: usize,
    pub store_q: usize,
}

impl OooConfig {
    pub fn c910() -> OooConfig {
        OooConfig {
            decode_width: 3,
            retire_entries_per_cycle: 3,
            pipeline_depth: 12,
            rob_entries: 64,
            compaction_max: 3,
            phys_int_regs: 96,
            phys_fp_regs: 64,
            n_alu: 2,
            n_fpu: 2,
            n_mul: 1,
            n_div: 1,
            n_bru: 1,
            lsu_ports: 2,
            load_q: 16,
            store_q: 12,
        }
    }
}

/// Everything needed to instantiate one core model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreConfig {
    pub name: String,
    pub kind: CoreKind,
    pub frontend: FrontendConfig,
    pub latencies: FuLatencies,
    pub predictor: PredictorConfig,
    pub memory: HierarchyConfig,
    /// Used when `kind` is `in_order`.
    pub inorder: InOrderConfig,
    /// Used when `kind` is `out_of_order`.
    pub ooo: OooConfig,
}

pub const PRESETS: [&str; 3] = ["cva6", "cva6s+", "c910"];

impl CoreConfig {
    pub fn preset(name: &str) -> Option<CoreConfig> {
        match name {
            "cva6" => Some(CoreConfig::cva6()),
            "cva6s+" => Some(CoreConfig::cva6s_plus()),
            "c910" => Some(CoreConfig::c910()),
            _ => None,
        }
    }

    pub fn cva6() -> CoreConfig {
        CoreConfig {
            name: "cva6".into(),
            kind: CoreKind::InOrder,
            frontend: FrontendConfig {
                fetch_bytes: 4,
                buffer_entries: 8,
                mispredict_penalty: 5,
            },
            latencies: FuLatencies::default(),
            predictor: PredictorConfig::cva6(),
            memory: HierarchyConfig::new(Indexing::ViptSpeculative, 1),
            inorder: InOrderConfig::cva6(),
            ooo: OooConfig::c910(),
        }
    }

    pub fn cva6s_plus() -> CoreConfig {
        let base = CoreConfig::cva6();
        CoreConfig {
            name: "cva6s+".into(),
            frontend: FrontendConfig {
                fetch_bytes: 8,
                ..base.frontend
            },
            predictor: PredictorConfig::cva6s_plus(),
            inorder: InOrderConfig::cva6s_plus(),
            ..base
        }
    }

    pub fn c910() -> CoreConfig {
        CoreConfig {
            name: "c910".into(),
            kind: CoreKind::OutOfOrder,
            frontend: FrontendConfig {
                fetch_bytes: 16,
                buffer_entries: 16,
                mispredict_penalty: 11,
            },
            latencies: FuLatencies::default(),
            predictor: PredictorConfig::c910(),
            memory: HierarchyConfig::new(Indexing::Pipt, 8),
            inorder: InOrderConfig::cva6(),
            ooo: OooConfig::c910(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.frontend.fetch_bytes < 4 || self.frontend.buffer_entries == 0 {
            return bad("frontend.fetch_bytes must be >= 4 and buffer_entries > 0");
        }
        let p = &self.predictor;
        if p.ras_depth == 0 || p.btb.entries == 0 || p.btb.ways == 0 || !p.btb.entries.is_multiple_of(p.btb.ways) {
            return bad("predictor geometry must be nonzero with entries divisible by ways");
        }
        match self.kind {
            CoreKind::InOrder => {
                let c = &self.inorder;
                if !(1..=2).contains(&c.issue_width) {
                    return bad("inorder.issue_width must be 1 or 2");
                }
                if c.commit_width == 0 || c.scoreboard_entries == 0 || c.load_q == 0 || c.store_q == 0 {
                    return bad("inorder widths and queue sizes must be positive");
                }
                if c.n_alu == 0 || c.n_alu > 2 || c.n_mul == 0 || c.n_div == 0 || c.n_bru == 0 || c.n_fpu == 0 {
                    return bad("inorder unit counts must be positive (at most 2 ALUs)");
                }
            }
            CoreKind::OutOfOrder => {
                let c = &self.ooo;
                if c.decode_width == 0 || c.retire_entries_per_cycle == 0 || c.rob_entries == 0 {
                    return bad("ooo widths and rob_entries must be positive");
                }
                if c.compaction_max == 0 || c.lsu_ports == 0 || c.load_q == 0 || c.store_q == 0 {
                    return bad("ooo compaction, LSU ports and queues must be positive");
                }
                if c.phys_int_regs <= 32 || c.phys_fp_regs <= 32 {
                    return bad("ooo physical register files must exceed 32 entries");
                }
                if c.n_alu == 0 || c.n_fpu == 0 || c.n_mul == 0 || c.n_div == 0 || c.n_bru == 0 {
                    return bad("ooo unit counts must be positive");
                }
            }
        }
        Ok(())
    }
}
