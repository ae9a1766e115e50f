use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunMetrics;
use crate::timing::StallCause;

/// Bumped whenever the CSV column set changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown format `{s}` (json, csv, table)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub runs: Vec<RunMetrics>,
}

pub fn format_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("metrics serialise");
    s.push('\n');
    s
}

const FIXED: [&str; 28] = [
    "schema",
    "core",
    "kernel",
    "cycles",
    "retired",
    "ipc",
    "branch_count",
    "branch_mispredicts",
    "branch_rate",
    "icache_accesses",
    "icache_misses",
    "icache_miss_rate",
    "dcache_accesses",
    "dcache_misses",
    "dcache_miss_rate",
    "llc_accesses",
    "llc_misses",
    "llc_miss_rate",
    "vipt_retries",
    "memory_reads",
    "memory_writebacks",
    "peak_retire",
    "peak_rob_entries",
    "peak_in_flight",
    "rename_stalls",
    "loop_buffer_supplied",
    "bandwidth_bytes_per_cycle",
    "bandwidth_normalized",
];

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    h.push("stall_busy".into());
    h.extend(StallCause::ALL.iter().map(|c| format!("stall_{}", c.as_str())));
    h
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

fn csv_row(m: &RunMetrics) -> Vec<String> {
    let mut r = vec![
        CSV_SCHEMA_VERSION.to_string(),
        m.core.clone(),
        m.kernel.clone(),
        m.cycles.to_string(),
        m.retired.to_string(),
        format!("{:.6}", m.ipc),
        m.branch.count.to_string(),
        m.branch.mispredicts.to_string(),
        format!("{:.6}", m.branch.rate),
        m.icache.accesses.to_string(),
        m.icache.misses.to_string(),
        format!("{:.6}", m.icache.miss_rate),
        m.dcache.accesses.to_string(),
        m.dcache.misses.to_string(),
        format!("{:.6}", m.dcache.miss_rate),
        m.llc.accesses.to_string(),
        m.llc.misses.to_string(),
        format!("{:.6}", m.llc.miss_rate),
        m.vipt_retries.to_string(),
        m.memory_reads.to_string(),
        m.memory_writebacks.to_string(),
        m.peak_retire.to_string(),
        m.peak_rob_entries.to_string(),
        m.peak_in_flight.to_string(),
        m.rename_stalls.to_string(),
        m.loop_buffer_supplied.to_string(),
        opt(m.bandwidth),
        opt(m.bandwidth_normalized),
        m.stalls.busy.to_string(),
    ];
    r.extend(StallCause::ALL.iter().map(|&c| m.stalls.get(c).to_string()));
    r
}

pub fn format_csv(rows: &[RunMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header()).expect("write to memory");
    for m in rows {
        w.write_record(csv_row(m)).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn format_table(rows: &[RunMetrics]) -> String {
    let head = [
        "core", "kernel", "cycles", "retired", "ipc", "br_miss", "l1d_miss", "peak_ret", "bw", "bw_norm",
    ];
    let body: Vec<[String; 10]> = rows
        .iter()
        .map(|m| {
            [
                m.core.clone(),
                m.kernel.clone(),
                m.cycles.to_string(),
                m.retired.to_string(),
                format!("{:.3}", m.ipc),
                format!("{:.4}", m.branch.rate),
                format!("{:.4}", m.dcache.miss_rate),
                m.peak_retire.to_string(),
                m.bandwidth.map_or("-".into(), |b| format!("{b:.3}")),
                m.bandwidth_normalized.map_or("-".into(), |b| format!("{b:.3}")),
            ]
        })
        .collect();
    let mut width: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let mut first = true;
        for (c, w) in cells.zip(&width) {
            if !first {
                s.push_str("  ");
            }
            if first {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "{c:>w$}");
            }
            first = false;
        }
        s.push('\n');
    };
    line(&mut s, &mut head.iter().copied());
    for r in &body {
        line(&mut s, &mut r.iter().map(String::as_str));
    }
    s
}
