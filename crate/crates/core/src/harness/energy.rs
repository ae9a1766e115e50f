//! Activity-count energy estimate. The weights are placeholders, not
//! calibrated to any process: the output only ranks configurations by
//! how much work they do.

use serde::{Deserialize, Serialize};

/// Event counts collected from one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityCounts {
    pub cycles: u64,
    pub fetched: u64,
    pub decoded: u64,
    pub alu_ops: u64,
    pub mul_ops: u64,
    pub div_ops: u64,
    pub fp_ops: u64,
    pub l1_accesses: u64,
    pub llc_accesses: u64,
    pub mem_accesses: u64,
    pub rob_writes: u64,
    pub renames: u64,
}

/// Energy per event, in arbitrary picojoule-like units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWeights {
    pub fetch: f64,
    pub decode: f64,
    pub alu_op: f64,
    pub mul_op: f64,
    pub div_op: f64,
    pub fp_op: f64,
    pub l1_access: f64,
    pub llc_access: f64,
    pub mem_access: f64,
    pub rob_write: f64,
    pub rename: f64,
    pub leakage_per_cycle: f64,
}

impl Default for EnergyWeights {
    fn default() -> EnergyWeights {
        EnergyWeights {
            fetch: 1.0,
            decode: 0.5,
            alu_op: 0.5,
            mul_op: 2.0,
            div_op: 8.0,
            fp_op: 3.0,
            l1_access: 5.0,
            llc_access: 20.0,
            mem_access: 100.0,
            rob_write: 0.8,
            rename: 0.6,
            leakage_per_cycle: 2.0,
        }
    }
}

impl EnergyWeights {
    pub fn zero() -> EnergyWeights {
        EnergyWeights {
            fetch: 0.0,
            decode: 0.0,
            alu_op: 0.0,
            mul_op: 0.0,
            div_op: 0.0,
            fp_op: 0.0,
            l1_access: 0.0,
            llc_access: 0.0,
            mem_access: 0.0,
            rob_write: 0.0,
            rename: 0.0,
            leakage_per_cycle: 0.0,
        }
    }

    fn terms(&self) -> [(&'static str, f64); 12] {
        [
            ("fetch", self.fetch),
            ("decode", self.decode),
            ("alu", self.alu_op),
            ("mul", self.mul_op),
            ("div", self.div_op),
            ("fpu", self.fp_op),
            ("l1", self.l1_access),
            ("llc", self.llc_access),
            ("memory", self.mem_access),
            ("rob", self.rob_write),
            ("rename", self.rename),
            ("leakage", self.leakage_per_cycle),
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.terms().iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            Some((name, w)) => Err(format!("energy weight `{name}` = {w} must be finite and non-negative")),
            None => Ok(()),
        }
    }

    /// Every weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> EnergyWeights {
        EnergyWeights {
            fetch: self.fetch * k,
            decode: self.decode * k,
            alu_op: self.alu_op * k,
            mul_op: self.mul_op * k,
            div_op: self.div_op * k,
            fp_op: self.fp_op * k,
            l1_access: self.l1_access * k,
            llc_access: self.llc_access * k,
            mem_access: self.mem_access * k,
            rob_write: self.rob_write * k,
            rename: self.rename * k,
            leakage_per_cycle: self.leakage_per_cycle * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerm {
    pub unit: String,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub total: f64,
    pub breakdown: Vec<EnergyTerm>,
}

/// Linear combination of event counts plus leakage times cycles. The
/// total is the in-order sum of the breakdown.
pub fn estimate_energy(a: &ActivityCounts, w: &EnergyWeights) -> EnergyEstimate {
    let counts = [
        a.fetched,
        a.decoded,
        a.alu_ops,
        a.mul_ops,
        a.div_ops,
        a.fp_ops,
        a.l1_accesses,
        a.llc_accesses,
        a.mem_accesses,
        a.rob_writes,
        a.renames,
        a.cycles,
    ];
    let breakdown: Vec<EnergyTerm> = w
        .terms()
        .iter()
        .zip(counts)
        .map(|(&(unit, wt), n)| EnergyTerm {
            unit: unit.to_string(),
            energy: wt * n as f64,
        })
        .collect();
    let total = breakdown.iter().map(|t| t.energy).sum();
    EnergyEstimate { total, breakdown }
}
