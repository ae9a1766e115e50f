//! Built-in microkernels and trace ingestion.
//!
//! Each kernel is emitted with the internal assembler and carries the
//! architectural results a host-side computation expects, so a golden run
//! can be checked without trusting the simulator.

mod kernels;
mod trace;

pub use trace::{format_trace, load_trace, parse_trace, TraceError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::golden::{ArchState, Program};

/// Load address of every kernel's code.
pub const CODE_BASE: u64 = 0x8000_0000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("{param} = {value} out of range ({range})")]
    ParameterOutOfRange {
        param: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("unknown kernel {0:?}")]
    UnknownKernel(String),
    #[error("kernel build failed: {0}")]
    Build(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    MatmulInt,
    Seqcopy,
    Sgcopy,
    Branchy,
    FpNbodyLike,
    DependencyChain,
    IndependentAlu,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] = [
        KernelKind::MatmulInt,
        KernelKind::Seqcopy,
        KernelKind::Sgcopy,
        KernelKind::Branchy,
        KernelKind::FpNbodyLike,
        KernelKind::DependencyChain,
        KernelKind::IndependentAlu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::MatmulInt => "matmul_int",
            KernelKind::Seqcopy => "seqcopy",
            KernelKind::Sgcopy => "sgcopy",
            KernelKind::Branchy => "branchy",
            KernelKind::FpNbodyLike => "fp_nbody_like",
            KernelKind::DependencyChain => "dependency_chain",
            KernelKind::IndependentAlu => "independent_alu",
        }
    }

    pub fn from_name(s: &str) -> Result<KernelKind, WorkloadError> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| WorkloadError::UnknownKernel(s.to_string()))
    }

    /// What `size` counts for this kernel.
    pub fn size_unit(self) -> &'static str {
        match self {
            KernelKind::MatmulInt => "matrix dimension N",
            KernelKind::Seqcopy | KernelKind::Sgcopy => "bytes copied",
            KernelKind::Branchy => "dynamic data-dependent branches",
            KernelKind::FpNbodyLike => "bodies",
            KernelKind::DependencyChain | KernelKind::IndependentAlu => "ALU operations",
        }
    }

    pub fn default_size(self) -> u64 {
        match self {
            KernelKind::MatmulInt => 32,
            KernelKind::Seqcopy | KernelKind::Sgcopy => 256 * 1024,
            KernelKind::Branchy => 100_000,
            KernelKind::FpNbodyLike => 64,
            KernelKind::DependencyChain | KernelKind::IndependentAlu => 10_000,
        }
    }

    /// Inclusive size range and required step.
    fn size_range(self) -> (u64, u64, u64, &'static str) {
        match self {
            KernelKind::MatmulInt => (4, 128, 2, "4..=128, even"),
            KernelKind::Seqcopy | KernelKind::Sgcopy => (64, 64 << 20, 64, "64..=64Mi, multiple of 64"),
            KernelKind::Branchy => (4, 10_000_000, 4, "4..=10M, multiple of 4"),
            KernelKind::FpNbodyLike => (1, 512, 1, "1..=512"),
            KernelKind::DependencyChain | KernelKind::IndependentAlu => {
                (500, 10_000_000, 500, "500..=10M, multiple of 500")
            }
        }
    }

    pub fn is_copy(self) -> bool {
        matches!(self, KernelKind::Seqcopy | KernelKind::Sgcopy)
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Meaning depends on `kind`, see [`KernelKind::size_unit`].
    pub size: u64,
    pub seed: u64,
    /// Requested taken fraction for `branchy`.
    pub taken_rate: f64,
    /// `sgcopy` with identity index arrays.
    pub identity_index: bool,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> KernelSpec {
        KernelSpec {
            kind,
            size: kind.default_size(),
            seed: 1,
            taken_rate: 0.5,
            identity_index: false,
        }
    }

    pub fn with_size(mut self, size: u64) -> KernelSpec {
        self.size = size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> KernelSpec {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let (lo, hi, step, range) = self.kind.size_range();
        if self.size < lo || self.size > hi || !self.size.is_multiple_of(step) {
            return Err(WorkloadError::ParameterOutOfRange {
                param: "size",
                value: self.size.to_string(),
                range,
            });
        }
        if !(0.0..=1.0).contains(&self.taken_rate) {
            return Err(WorkloadError::ParameterOutOfRange {
                param: "taken_rate",
                value: self.taken_rate.to_string(),
                range: "0..=1",
            });
        }
        Ok(())
    }
}

/// Architectural results the host expects after the kernel halts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expect {
    pub memory: Vec<(u64, Vec<u8>)>,
    /// Integer register number and value.
    pub regs: Vec<(u8, u64)>,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub spec: KernelSpec,
    pub program: Program,
    /// Upper bound on dynamic instructions until halt.
    pub budget: u64,
    pub expect: Expect,
    /// Bytes moved, for copy kernels.
    pub copy_bytes: Option<u64>,
    /// Outcome of each data-dependent branch in execution order (`branchy`).
    pub site_outcomes: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleMismatch {
    #[error("x{reg} = {got:#x}, expected {want:#x}")]
    Register { reg: u8, got: u64, want: u64 },
    #[error("memory at {addr:#x} differs from expected")]
    Memory { addr: u64 },
}

impl Kernel {
    /// Compares the final state of a golden run with the host-side oracle.
    pub fn verify(&self, state: &ArchState) -> Result<(), OracleMismatch> {
        for &(reg, want) in &self.expect.regs {
            let got = state.x[reg as usize];
            if got != want {
                return Err(OracleMismatch::Register { reg, got, want });
            }
        }
        for (addr, bytes) in &self.expect.memory {
            let got = state.mem.read_bytes(*addr, bytes.len());
            if let Some(off) = got.iter().zip(bytes).position(|(a, b)| a != b) {
                return Err(OracleMismatch::Memory {
                    addr: addr + off as u64,
                });
            }
        }
        Ok(())
    }

    /// Fraction of data-dependent branches taken.
    pub fn taken_fraction(&self) -> Option<f64> {
        if self.site_outcomes.is_empty() {
            return None;
        }
        let t = self.site_outcomes.iter().filter(|&&b| b).count();
        Some(t as f64 / self.site_outcomes.len() as f64)
    }
}

pub fn generate(spec: &KernelSpec) -> Result<Kernel, WorkloadError> {
    spec.validate()?;
    kernels::build(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;

    fn check(spec: KernelSpec) -> golden::GoldenRun {
        let k = generate(&spec).unwrap();
        let run = golden::run(&k.program, k.budget).unwrap();
        k.verify(&run.state).unwrap();
        run
    }

    #[test]
    fn every_kernel_matches_its_oracle() {
        for kind in KernelKind::ALL {
            let size = match kind {
                KernelKind::MatmulInt => 8,
                KernelKind::Seqcopy | KernelKind::Sgcopy => 4096,
                KernelKind::Branchy => 2000,
                KernelKind::FpNbodyLike => 8,
                _ => 1500,
            };
            check(KernelSpec::new(kind).with_size(size));
        }
    }

    #[test]
    fn identity_sgcopy_equals_seqcopy() {
        let seq = check(KernelSpec::new(KernelKind::Seqcopy).with_size(8192));
        let mut sg = KernelSpec::new(KernelKind::Sgcopy).with_size(8192);
        sg.identity_index = true;
        let sg = check(sg);
        let dst = kernels::region(4);
        assert_eq!(sg.state.mem.read_bytes(dst, 8192), seq.state.mem.read_bytes(dst, 8192));
    }

    #[test]
    fn branchy_is_reproducible() {
        let s = KernelSpec::new(KernelKind::Branchy).with_size(4000).with_seed(9);
        assert_eq!(generate(&s).unwrap().site_outcomes, generate(&s).unwrap().site_outcomes);
        let other = generate(&s.clone().with_seed(10)).unwrap().site_outcomes;
        assert_ne!(generate(&s).unwrap().site_outcomes, other);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let e = generate(&KernelSpec::new(KernelKind::MatmulInt).with_size(0)).unwrap_err();
        assert!(matches!(e, WorkloadError::ParameterOutOfRange { param: "size", .. }));
        let e = generate(&KernelSpec::new(KernelKind::Seqcopy).with_size(100)).unwrap_err();
        assert!(matches!(e, WorkloadError::ParameterOutOfRange { .. }));
    }

    #[test]
    fn names_round_trip() {
        for k in KernelKind::ALL {
            assert_eq!(KernelKind::from_name(k.name()), Ok(k));
        }
        assert!(KernelKind::from_name("nbody").is_err());
    }

    #[test]
    fn golden_stream_survives_trace_round_trip() {
        let run = check(KernelSpec::new(KernelKind::Sgcopy).with_size(1024));
        let text = format_trace(&run.stream);
        assert_eq!(parse_trace(&text).unwrap(), run.stream);
    }
}
