//! Runs workloads on core models and turns the results into reports.

mod configfile;
mod energy;
mod report;

pub use configfile::{apply_override, load_config, parse_config, preset_names, resolve_core, ConfigError};
pub use energy::{estimate_energy, ActivityCounts, EnergyEstimate, EnergyTerm, EnergyWeights};
pub use report::{csv_header, format_csv, format_json, format_table, Format, SweepReport, CSV_SCHEMA_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CoreConfig, CoreKind};
use crate::golden::{self, apply_stores, Memory, RetireRecord};
use crate::isa::FuClass;
use crate::memhier::{CacheStats, Hierarchy, HierarchyStats};
use crate::timing::{stream_digest, CoreRun, SimError, StallBreakdown};
use crate::workloads::{generate, KernelKind, KernelSpec, TraceError, WorkloadError};
use crate::{inorder, ooo};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("golden run failed: {0}")]
    Golden(String),
    #[error("kernel result differs from host oracle: {0}")]
    Oracle(String),
    #[error("{core}: {source}")]
    Sim { core: String, source: SimError },
}

impl HarnessError {
    /// Process exit status: 2 for configuration and usage errors, 1 for
    /// failures while simulating.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Workload(WorkloadError::ParameterOutOfRange { .. } | WorkloadError::UnknownKernel(_)) => 2,
            HarnessError::Sim {
                source: SimError::Config(_),
                ..
            } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Cap on golden instructions; kernels default to their own budget.
    pub max_instrs: Option<u64>,
    /// Touch every line first so the run sees warm caches.
    pub warm: bool,
    pub issue_log: bool,
    pub check_invariants: bool,
}

/// A golden stream with its initial memory, shared by every core.
#[derive(Debug, Clone)]
pub struct Workload {
    pub name: String,
    pub kernel: Option<KernelKind>,
    pub stream: Vec<RetireRecord>,
    pub image: Memory,
    /// Memory digest every model must end with.
    pub final_digest: u64,
    pub copy_bytes: Option<u64>,
}

impl Workload {
    /// Generates `spec`, runs it on the golden model and checks the result
    /// against the kernel's host-side oracle.
    pub fn from_kernel(spec: &KernelSpec, max_instrs: Option<u64>) -> Result<Workload, HarnessError> {
        let k = generate(spec)?;
        let budget = max_instrs.unwrap_or(k.budget);
        let run = golden::run(&k.program, budget).map_err(|e| HarnessError::Golden(e.to_string()))?;
        k.verify(&run.state).map_err(|e| HarnessError::Oracle(e.to_string()))?;
        Ok(Workload {
            name: spec.kind.name().to_string(),
            kernel: Some(spec.kind),
            final_digest: run.state.mem.digest(),
            image: k.program.image(),
            stream: run.stream,
            copy_bytes: k.copy_bytes,
        })
    }

    /// Wraps an externally captured stream. Memory starts empty; stores in
    /// the trace define the final image.
    pub fn from_trace(name: &str, stream: Vec<RetireRecord>) -> Workload {
        let image = Memory::new();
        let mut fin = image.clone();
        apply_stores(&mut fin, &stream);
        Workload {
            name: name.to_string(),
            kernel: None,
            final_digest: fin.digest(),
            image,
            stream,
            copy_bytes: None,
        }
    }
}

/// Result of replaying one workload on one core, before aggregation.
#[derive(Debug, Clone)]
pub struct CoreResult {
    pub run: CoreRun,
    pub mem: HierarchyStats,
    pub memory_digest: u64,
}

/// Replays `w` on `cfg` and checks lockstep with the golden run: same
/// committed sequence, same final memory.
pub fn simulate_core(cfg: &CoreConfig, w: &Workload, opts: RunOptions) -> Result<CoreResult, HarnessError> {
    let err = |source| HarnessError::Sim {
        core: cfg.name.clone(),
        source,
    };
    cfg.validate().map_err(err)?;
    let mut mem = Hierarchy::new(cfg.memory, w.image.clone()).map_err(|e| err(e.into()))?;
    if opts.warm {
        mem.warm(&w.stream).map_err(|e| err(e.into()))?;
    }
    let run = match cfg.kind {
        CoreKind::InOrder => inorder::simulate(
            cfg,
            &w.stream,
            &mut mem,
            inorder::SimOptions {
                issue_log: opts.issue_log,
            },
        ),
        CoreKind::OutOfOrder => ooo::simulate(
            cfg,
            &w.stream,
            &mut mem,
            ooo::SimOptions {
                issue_log: opts.issue_log,
                check_invariants: opts.check_invariants,
            },
        ),
    }
    .map_err(err)?;
    if run.retired != w.stream.len() as u64 || run.commit_digest != stream_digest(&w.stream) {
        return Err(err(SimError::Invariant(
            "committed sequence differs from the golden stream".into(),
        )));
    }
    let memory_digest = mem.memory().digest();
    if memory_digest != w.final_digest {
        return Err(err(SimError::Invariant(
            "final memory differs from the golden run".into(),
        )));
    }
    Ok(CoreResult {
        run,
        mem: mem.stats(),
        memory_digest,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchMetrics {
    pub count: u64,
    pub mispredicts: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheMetrics {
    pub accesses: u64,
    pub misses: u64,
    pub writebacks: u64,
    pub miss_rate: f64,
}

impl From<CacheStats> for CacheMetrics {
    fn from(s: CacheStats) -> CacheMetrics {
        CacheMetrics {
            accesses: s.accesses,
            misses: s.misses,
            writebacks: s.writebacks,
            miss_rate: s.miss_rate(),
        }
    }
}

/// Everything reported for one (core, workload) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub core: String,
    pub kernel: String,
    pub cycles: u64,
    pub retired: u64,
    pub ipc: f64,
    pub branch: BranchMetrics,
    pub icache: CacheMetrics,
    pub dcache: CacheMetrics,
    pub llc: CacheMetrics,
    pub vipt_retries: u64,
    pub memory_reads: u64,
    pub memory_writebacks: u64,
    pub stalls: StallBreakdown,
    pub peak_retire: u64,
    pub retire_histogram: Vec<u64>,
    pub rob_histogram: Vec<u64>,
    pub peak_rob_entries: u64,
    pub peak_in_flight: u64,
    pub rename_stalls: u64,
    pub loop_buffer_supplied: u64,
    /// Bytes read plus bytes written per cycle (copy kernels).
    pub bandwidth: Option<f64>,
    /// `bandwidth` relative to the reference core of a sweep.
    pub bandwidth_normalized: Option<f64>,
    pub commit_digest: String,
    pub memory_digest: String,
    pub activity: ActivityCounts,
}

impl RunMetrics {
    pub fn new(cfg: &CoreConfig, w: &Workload, r: &CoreResult) -> RunMetrics {
        let run = &r.run;
        let p = &run.predictor;
        let mut a = ActivityCounts {
            cycles: run.cycles,
            fetched: run.retired,
            decoded: run.retired,
            ..ActivityCounts::default()
        };
        let renames = cfg.kind == CoreKind::OutOfOrder || cfg.inorder.renaming_enabled;
        for rec in &w.stream {
            match rec.instr.fu_class {
                FuClass::Alu | FuClass::Bru | FuClass::Csr | FuClass::System => a.alu_ops += 1,
                FuClass::Mul => a.mul_ops += 1,
                FuClass::Div => a.div_ops += 1,
                FuClass::FpAlu | FuClass::FpMul | FuClass::FpDiv => a.fp_ops += 1,
                _ => {}
            }
            if renames && rec.instr.dest().is_some() {
                a.renames += 1;
            }
        }
        if cfg.kind == CoreKind::OutOfOrder {
            a.rob_writes = run.retired;
        }
        a.l1_accesses = r.mem.l1i.accesses + r.mem.l1d.accesses;
        a.llc_accesses = r.mem.llc.accesses;
        a.mem_accesses = r.mem.memory_reads + r.mem.memory_writebacks;
        let bandwidth = w.copy_bytes.map(|b| 2.0 * b as f64 / run.cycles.max(1) as f64);
        RunMetrics {
            core: cfg.name.clone(),
            kernel: w.name.clone(),
            cycles: run.cycles,
            retired: run.retired,
            ipc: run.ipc(),
            branch: BranchMetrics {
                count: p.control_transfers,
                mispredicts: p.mispredicts,
                rate: if p.control_transfers == 0 {
                    0.0
                } else {
                    p.mispredicts as f64 / p.control_transfers as f64
                },
            },
            icache: r.mem.l1i.into(),
            dcache: r.mem.l1d.into(),
            llc: r.mem.llc.into(),
            vipt_retries: r.mem.l1d.retries,
            memory_reads: r.mem.memory_reads,
            memory_writebacks: r.mem.memory_writebacks,
            stalls: run.stalls,
            peak_retire: run.peak_retire,
            retire_histogram: run.retire_histogram.clone(),
            rob_histogram: run.rob_histogram.clone(),
            peak_rob_entries: run.peak_rob_entries,
            peak_in_flight: run.peak_in_flight,
            rename_stalls: run.rename_stalls,
            loop_buffer_supplied: run.loop_buffer_supplied,
            bandwidth,
            bandwidth_normalized: None,
            commit_digest: format!("{:016x}", run.commit_digest),
            memory_digest: format!("{:016x}", r.memory_digest),
            activity: a,
        }
    }

    pub fn energy(&self, w: &EnergyWeights) -> EnergyEstimate {
        estimate_energy(&self.activity, w)
    }
}

/// One core on one prepared workload.
pub fn run_workload(cfg: &CoreConfig, w: &Workload, opts: RunOptions) -> Result<RunMetrics, HarnessError> {
    let r = simulate_core(cfg, w, opts)?;
    Ok(RunMetrics::new(cfg, w, &r))
}

/// One core on one kernel.
pub fn run_kernel(cfg: &CoreConfig, spec: &KernelSpec, opts: RunOptions) -> Result<RunMetrics, HarnessError> {
    let w = Workload::from_kernel(spec, opts.max_instrs)?;
    run_workload(cfg, &w, opts)
}

/// Name of the core that copy-kernel bandwidth is normalised to.
pub const REFERENCE_CORE: &str = "cva6";

/// Runs every (core, kernel) pair, in parallel, and returns rows in
/// kernel-major order. Copy-kernel bandwidth is normalised to
/// [`REFERENCE_CORE`] if it is in the sweep, else to the first core.
pub fn sweep(cores: &[CoreConfig], kernels: &[KernelSpec], opts: RunOptions) -> Result<Vec<RunMetrics>, HarnessError> {
    if cores.is_empty() || kernels.is_empty() {
        return Err(ConfigError::Usage("sweep needs at least one core and one kernel".into()).into());
    }
    let workloads: Vec<Workload> = kernels
        .par_iter()
        .map(|k| Workload::from_kernel(k, opts.max_instrs))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(&Workload, &CoreConfig)> = workloads
        .iter()
        .flat_map(|w| cores.iter().map(move |c| (w, c)))
        .collect();
    let mut rows: Vec<RunMetrics> = pairs
        .par_iter()
        .map(|(w, c)| run_workload(c, w, opts))
        .collect::<Result<_, _>>()?;
    let reference = cores.iter().position(|c| c.name == REFERENCE_CORE).unwrap_or(0);
    for chunk in rows.chunks_mut(cores.len()) {
        let base = chunk[reference].bandwidth;
        for r in chunk.iter_mut() {
            r.bandwidth_normalized = match (r.bandwidth, base) {
                (Some(b), Some(b0)) if b0 > 0.0 => Some(b / b0),
                _ => None,
            };
        }
    }
    Ok(rows)
}
