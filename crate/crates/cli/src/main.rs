use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coresim::config::{CoreConfig, PRESETS};
use coresim::harness::{
    format_csv, format_json, format_table, load_config, resolve_core, run_workload, sweep, HarnessError, RunOptions,
    SweepReport, Workload, CSV_SCHEMA_VERSION,
};
use coresim::predictors::{evaluate, parse_branch_trace, BranchEvent, EvalStats};
use coresim::workloads::{format_trace, load_trace, KernelKind, KernelSpec};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "coresim",
    version,
    about = "RISC-V core timing models: cva6, cva6s+ and c910"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one kernel or trace on one core.
    Run(RunArgs),
    /// Simulate every (core, kernel) pair and tabulate.
    Sweep(SweepArgs),
    /// Evaluate the direction predictors on a branch trace or kernel.
    BpEval(BpArgs),
    /// Write a kernel's golden stream as a trace file.
    TraceDump(DumpArgs),
    /// List the built-in kernels.
    ListKernels,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct KernelArgs {
    /// Size parameter; see `list-kernels` for its unit per kernel.
    #[arg(long)]
    size: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Taken fraction for the branchy kernel.
    #[arg(long, default_value_t = 0.5)]
    taken_rate: f64,
}

impl KernelArgs {
    fn spec(&self, kind: KernelKind) -> KernelSpec {
        let mut s = KernelSpec::new(kind).with_seed(self.seed);
        if let Some(n) = self.size {
            s.size = n;
        }
        s.taken_rate = self.taken_rate;
        s
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "cva6")]
    core: String,
    /// Config file defining or patching cores.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
    kernel: Option<String>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    k: KernelArgs,
    #[arg(long)]
    max_instrs: Option<u64>,
    /// Pre-load caches with every line the run touches.
    #[arg(long)]
    warm: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// Cores to compare (comma separated). Defaults to all presets.
    #[arg(long, value_delimiter = ',')]
    core: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernels to run (comma separated). Defaults to all kernels.
    #[arg(long, value_delimiter = ',')]
    kernel: Vec<String>,
    #[command(flatten)]
    k: KernelArgs,
    #[arg(long)]
    max_instrs: Option<u64>,
    #[arg(long)]
    warm: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Table)]
    format: OutFormat,
}

#[derive(Args)]
struct BpArgs {
    /// Branch trace: `<pc-hex> <T|N> <target-hex>` per line.
    #[arg(long, conflicts_with = "kernel", required_unless_present = "kernel")]
    trace: Option<PathBuf>,
    /// Use the conditional branches of a kernel's golden run instead.
    #[arg(long)]
    kernel: Option<String>,
    #[command(flatten)]
    k: KernelArgs,
    /// Cores whose direction predictor to evaluate. Defaults to all presets.
    #[arg(long, value_delimiter = ',')]
    core: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Branches excluded from the steady-state rate.
    #[arg(long, default_value_t = 16)]
    warmup: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Table)]
    format: OutFormat,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    kernel: String,
    #[command(flatten)]
    k: KernelArgs,
    #[arg(long)]
    max_instrs: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Failure {
        Failure {
            code: e.exit_code() as u8,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn sim_failure(msg: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        msg: msg.into(),
    }
}

fn configs(path: &Option<PathBuf>) -> Result<Vec<CoreConfig>, Failure> {
    match path {
        Some(p) => load_config(p).map_err(|e| HarnessError::from(e).into()),
        None => Ok(Vec::new()),
    }
}

fn kernel(name: &str) -> Result<KernelKind, Failure> {
    KernelKind::from_name(name).map_err(|e| HarnessError::from(e).into())
}

fn core_list(names: &[String], defined: &[CoreConfig]) -> Result<Vec<CoreConfig>, Failure> {
    if names.is_empty() {
        return Ok(PRESETS.iter().map(|n| CoreConfig::preset(n).expect("preset")).collect());
    }
    names
        .iter()
        .map(|n| resolve_core(n, defined).map_err(|e| HarnessError::from(e).into()))
        .collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn trace_name(p: &Path) -> String {
    p.file_stem()
        .map_or("trace".into(), |s| s.to_string_lossy().into_owned())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let defined = configs(&a.config)?;
    let cfg = resolve_core(&a.core, &defined).map_err(HarnessError::from)?;
    let opts = RunOptions {
        max_instrs: a.max_instrs,
        warm: a.warm,
        ..RunOptions::default()
    };
    let w = match (&a.kernel, &a.trace) {
        (Some(k), _) => Workload::from_kernel(&a.k.spec(kernel(k)?), a.max_instrs)?,
        (None, Some(t)) => {
            let mut s = load_trace(t).map_err(|e| match e {
                coresim::workloads::TraceError::Io(m) => usage(m),
                e => HarnessError::from(e).into(),
            })?;
            if let Some(m) = a.max_instrs {
                s.truncate(m as usize);
            }
            Workload::from_trace(&trace_name(t), s)
        }
        (None, None) => return Err(usage("give --kernel or --trace")),
    };
    let m = run_workload(&cfg, &w, opts)?;
    let text = match a.format {
        OutFormat::Json => format_json(&m),
        OutFormat::Csv => format_csv(std::slice::from_ref(&m)),
        OutFormat::Table => format_table(std::slice::from_ref(&m)),
    };
    emit(&a.out, &text)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let defined = configs(&a.config)?;
    let cores = core_list(&a.core, &defined)?;
    let kinds: Vec<KernelKind> = if a.kernel.is_empty() {
        KernelKind::ALL.to_vec()
    } else {
        a.kernel.iter().map(|k| kernel(k)).collect::<Result<_, _>>()?
    };
    let specs: Vec<KernelSpec> = kinds.into_iter().map(|k| a.k.spec(k)).collect();
    let opts = RunOptions {
        max_instrs: a.max_instrs,
        warm: a.warm,
        ..RunOptions::default()
    };
    let rows = sweep(&cores, &specs, opts)?;
    let text = match a.format {
        OutFormat::Json => format_json(&SweepReport {
            schema_version: CSV_SCHEMA_VERSION,
            runs: rows,
        }),
        OutFormat::Csv => format_csv(&rows),
        OutFormat::Table => format_table(&rows),
    };
    emit(&a.out, &text)
}

#[derive(Serialize)]
struct BpRow {
    core: String,
    predictor: String,
    #[serde(flatten)]
    stats: EvalStats,
    rate: f64,
    steady_rate: f64,
}

fn cmd_bp_eval(a: BpArgs) -> Result<(), Failure> {
    let defined = configs(&a.config)?;
    let cores = core_list(&a.core, &defined)?;
    let events: Vec<BranchEvent> = match (&a.trace, &a.kernel) {
        (Some(t), _) => {
            let text = std::fs::read_to_string(t).map_err(|e| usage(format!("cannot read {}: {e}", t.display())))?;
            parse_branch_trace(&text).map_err(|e| usage(e.to_string()))?
        }
        (None, Some(k)) => {
            let w = Workload::from_kernel(&a.k.spec(kernel(k)?), None)?;
            w.stream.iter().filter_map(BranchEvent::from_record).collect()
        }
        (None, None) => return Err(usage("give --trace or --kernel")),
    };
    if events.is_empty() {
        return Err(sim_failure("no conditional branches to evaluate"));
    }
    let rows: Vec<BpRow> = cores
        .iter()
        .map(|c| {
            let mut p = c.predictor.direction.build();
            let stats = evaluate(&events, &mut p, a.warmup);
            BpRow {
                core: c.name.clone(),
                predictor: serde_json::to_value(c.predictor.direction).expect("serialise")["kind"]
                    .as_str()
                    .unwrap_or("?")
                    .to_string(),
                rate: stats.rate(),
                steady_rate: stats.steady_rate(),
                stats,
            }
        })
        .collect();
    let text = match a.format {
        OutFormat::Json => format_json(&rows),
        OutFormat::Csv | OutFormat::Table => {
            let sep = if matches!(a.format, OutFormat::Csv) { "," } else { "  " };
            let mut s = ["core", "predictor", "branches", "mispredicts", "rate", "steady_rate"].join(sep);
            s.push('\n');
            for r in &rows {
                s.push_str(
                    &[
                        r.core.clone(),
                        r.predictor.clone(),
                        r.stats.branches.to_string(),
                        r.stats.mispredicts.to_string(),
                        format!("{:.4}", r.rate),
                        format!("{:.4}", r.steady_rate),
                    ]
                    .join(sep),
                );
                s.push('\n');
            }
            s
        }
    };
    emit(&a.out, &text)
}

fn cmd_trace_dump(a: DumpArgs) -> Result<(), Failure> {
    let w = Workload::from_kernel(&a.k.spec(kernel(&a.kernel)?), a.max_instrs)?;
    emit(&a.out, &format_trace(&w.stream))
}

fn cmd_list() -> Result<(), Failure> {
    let mut s = String::new();
    for k in KernelKind::ALL {
        s.push_str(&format!(
            "{:<18} size = {} (default {})\n",
            k.name(),
            k.size_unit(),
            k.default_size()
        ));
    }
    emit(&None, &s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::BpEval(a) => cmd_bp_eval(a),
        Cmd::TraceDump(a) => cmd_trace_dump(a),
        Cmd::ListKernels => cmd_list(),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
