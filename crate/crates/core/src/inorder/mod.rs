//! Six-stage in-order timing model, scalar or dual issue, replaying the
//! golden retirement stream.

use std::collections::VecDeque;

use crate::config::{CoreConfig, CoreKind, InOrderConfig};
use crate::golden::{MemKind, RetireRecord};
use crate::isa::{FuClass, Instr, Reg};
use crate::memhier::{AccessKind, Hierarchy};
use crate::predictors::PredictorSuite;
use crate::timing::{
    check_stream, CommitDigest, CoreRun, FetchState, Frontend, IssueEvent, SimError, StallCause, DEADLOCK_CYCLES,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairReason {
    Legal,
    FpStoreFpuConflict,
    FpuDualIssueDisabled,
    StructuralFu,
    StructuralWbPort,
    Raw,
    Waw,
}

impl PairReason {
    pub fn as_str(self) -> &'static str {
        match self {
            PairReason::Legal => "legal",
            PairReason::FpStoreFpuConflict => "fp_store_fpu_conflict",
            PairReason::FpuDualIssueDisabled => "fpu_dual_issue_disabled",
            PairReason::StructuralFu => "structural_fu",
            PairReason::StructuralWbPort => "structural_wb_port",
            PairReason::Raw => "raw",
            PairReason::Waw => "waw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDecision {
    pub legal: bool,
    pub reason: PairReason,
}

/// Machine state consulted by [`issue_pair_legal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairContext {
    pub n_alu: usize,
    pub renaming: bool,
    pub alu_forwarding: bool,
    pub fpu_dual_issue: bool,
    /// The second instruction's writeback cycle is already taken on the
    /// port it would use.
    pub second_wb_conflict: bool,
}

impl PairContext {
    pub fn from_config(c: &InOrderConfig) -> PairContext {
        PairContext {
            n_alu: c.n_alu,
            renaming: c.renaming_enabled,
            alu_forwarding: c.alu_forwarding_enabled,
            fpu_dual_issue: c.fpu_dual_issue_enabled,
            second_wb_conflict: false,
        }
    }
}

fn is_fp(fu: FuClass) -> bool {
    fu.is_fpu() || matches!(fu, FuClass::FpLoad | FuClass::FpStore)
}

/// Whether `second` may issue in the same cycle as, and behind, `first`.
pub fn issue_pair_legal(first: &Instr, second: &Instr, ctx: &PairContext) -> PairDecision {
    let verdict = |reason| PairDecision {
        legal: reason == PairReason::Legal,
        reason,
    };
    let (a, b) = (first.fu_class, second.fu_class);
    if (a == FuClass::FpStore && b.is_fpu()) || (b == FuClass::FpStore && a.is_fpu()) {
        return verdict(PairReason::FpStoreFpuConflict);
    }
    if !ctx.fpu_dual_issue && (is_fp(a) || is_fp(b)) {
        return verdict(PairReason::FpuDualIssueDisabled);
    }
    let unit = |f: FuClass| match f {
        FuClass::FpAlu | FuClass::FpMul | FuClass::FpDiv => FuClass::FpAlu,
        FuClass::Load | FuClass::FpLoad => FuClass::Load,
        FuClass::Store | FuClass::FpStore => FuClass::Store,
        f => f,
    };
    if a == FuClass::System || b == FuClass::System {
        return verdict(PairReason::StructuralFu);
    }
    if unit(a) == unit(b) && !(a == FuClass::Alu && ctx.n_alu >= 2) {
        return verdict(PairReason::StructuralFu);
    }
    if let Some(d) = first.dest() {
        if second.sources().any(|s| s == d) && !(ctx.alu_forwarding && a == FuClass::Alu && b == FuClass::Alu) {
            return verdict(PairReason::Raw);
        }
        if !ctx.renaming && second.dest() == Some(d) {
            return verdict(PairReason::Waw);
        }
    }
    if ctx.second_wb_conflict {
        return verdict(PairReason::StructuralWbPort);
    }
    verdict(PairReason::Legal)
}

/// Predicts and trains on one control transfer; returns the redirect
/// penalty it costs.
pub fn apply_branch(rec: &RetireRecord, suite: &mut PredictorSuite, mispredict_penalty: u32) -> u32 {
    if suite.resolve(rec).mispredicted {
        mispredict_penalty
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub issue_log: bool,
}

#[derive(Debug, Clone, Copy)]
struct SbEntry {
    idx: usize,
    ready: u64,
}

#[derive(Debug, Clone, Copy)]
struct StoreEntry {
    idx: usize,
    addr: u64,
    bytes: u8,
    committed: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Used {
    alu: usize,
    mul: usize,
    div: usize,
    bru: usize,
    fpu: usize,
    load: usize,
    store: usize,
    csr: usize,
}

struct Issued {
    ready: u64,
}

struct Machine<'a> {
    cfg: &'a CoreConfig,
    io: &'a InOrderConfig,
    stream: &'a [RetireRecord],
    sb: VecDeque<SbEntry>,
    reg_ready: [u64; 64],
    div_busy: u64,
    fpdiv_busy: u64,
    loads: VecDeque<u64>,
    sq: VecDeque<StoreEntry>,
    shared_wb: VecDeque<u64>,
}

impl Machine<'_> {
    fn wb_conflict(&self, fu: FuClass, alu2: bool, now: u64) -> bool {
        if !self.io.shared_wb_port {
            return false;
        }
        let uses_shared = fu.is_fpu() || (fu == FuClass::Alu && alu2);
        uses_shared && self.shared_wb.contains(&(now + self.cfg.latencies.latency(fu) as u64))
    }

    /// Resource and dependency checks for one instruction; on success the
    /// instruction is issued and its state updated.
    fn try_issue(
        &mut self,
        now: u64,
        idx: usize,
        used: &mut Used,
        forwarded: Option<Reg>,
        mem: &mut Hierarchy,
    ) -> Result<Issued, StallCause> {
        let rec = &self.stream[idx];
        let ins = &rec.instr;
        let fu = ins.fu_class;
        let io = self.io;
        if fu == FuClass::System && !self.sb.is_empty() {
            return Err(StallCause::StructuralFu);
        }
        if self.sb.len() >= io.scoreboard_entries {
            return Err(StallCause::ScoreboardFull);
        }
        for s in ins.sources() {
            if self.reg_ready[s.index()] > now && forwarded != Some(s) {
                return Err(StallCause::RawDependency);
            }
        }
        if let Some(d) = ins.dest() {
            if !io.renaming_enabled && self.reg_ready[d.index()] > now {
                return Err(StallCause::WawDependency);
            }
        }
        let free = match fu {
            FuClass::Alu => used.alu < io.n_alu,
            FuClass::Mul => used.mul < io.n_mul,
            FuClass::Div => used.div < io.n_div && self.div_busy <= now,
            FuClass::Bru => used.bru < io.n_bru,
            FuClass::FpAlu | FuClass::FpMul => used.fpu < io.n_fpu,
            FuClass::FpDiv => used.fpu < io.n_fpu && self.fpdiv_busy <= now,
            FuClass::Load | FuClass::FpLoad => used.load < 1,
            FuClass::Store | FuClass::FpStore => used.store < 1,
            FuClass::Csr | FuClass::System => used.csr < 1,
        };
        if !free {
            return Err(StallCause::StructuralFu);
        }
        let alu2 = fu == FuClass::Alu && used.alu == 1;
        if self.wb_conflict(fu, alu2, now) {
            return Err(StallCause::StructuralWbPort);
        }

        self.loads.retain(|&r| r > now);
        let lat = self.cfg.latencies.latency(fu) as u64;
        let mut ready = now + lat;
        if let Some(m) = &rec.mem {
            match m.kind {
                MemKind::Load => {
                    if self.loads.len() >= io.load_q {
                        return Err(StallCause::LsuFull);
                    }
                    let (lo, hi) = (m.vaddr, m.vaddr + m.bytes as u64);
                    let older = self
                        .sq
                        .iter()
                        .rev()
                        .find(|s| s.addr < hi && lo < s.addr + s.bytes as u64);
                    ready = match older {
                        Some(s) if s.addr == m.vaddr && s.bytes == m.bytes => {
                            now + mem.hit_latency(AccessKind::Load) as u64
                        }
                        Some(_) => return Err(StallCause::RawDependency),
                        None => match mem.access_at(now, m.vaddr, AccessKind::Load, m.bytes as u64) {
                            Ok(Some(r)) => now + r.latency as u64,
                            Ok(None) => return Err(StallCause::CacheMiss),
                            Err(e) => unreachable!("checked before simulation: {e}"),
                        },
                    };
                    self.loads.push_back(ready);
                }
                MemKind::Store => {
                    if self.sq.len() >= io.store_q {
                        return Err(StallCause::LsuFull);
                    }
                    self.sq.push_back(StoreEntry {
                        idx,
                        addr: m.vaddr,
                        bytes: m.bytes,
                        committed: false,
                    });
                    ready = now + mem.hit_latency(AccessKind::Store) as u64;
                }
            }
        }

        match fu {
            FuClass::Alu => used.alu += 1,
            FuClass::Mul => used.mul += 1,
            FuClass::Div => {
                used.div += 1;
                self.div_busy = ready;
            }
            FuClass::Bru => used.bru += 1,
            FuClass::FpAlu | FuClass::FpMul => used.fpu += 1,
            FuClass::FpDiv => {
                used.fpu += 1;
                self.fpdiv_busy = ready;
            }
            FuClass::Load | FuClass::FpLoad => used.load += 1,
            FuClass::Store | FuClass::FpStore => used.store += 1,
            FuClass::Csr | FuClass::System => used.csr += 1,
        }
        if io.shared_wb_port && (fu.is_fpu() || alu2) {
            self.shared_wb.push_back(ready);
        }
        if let Some(d) = ins.dest() {
            self.reg_ready[d.index()] = ready;
        }
        self.sb.push_back(SbEntry { idx, ready });
        Ok(Issued { ready })
    }
}

fn frontend_cause(s: FetchState) -> StallCause {
    match s {
        FetchState::Redirect => StallCause::MispredictRedirect,
        FetchState::IcacheMiss => StallCause::CacheMiss,
        FetchState::Running | FetchState::Exhausted => StallCause::FetchStarve,
    }
}

/// Replays `stream` on the in-order model described by `cfg`.
pub fn simulate(
    cfg: &CoreConfig,
    stream: &[RetireRecord],
    mem: &mut Hierarchy,
    opts: SimOptions,
) -> Result<CoreRun, SimError> {
    if cfg.kind != CoreKind::InOrder {
        return Err(SimError::Config(format!("core `{}` is not in-order", cfg.name)));
    }
    cfg.validate()?;
    check_stream(stream)?;
    // Line-crossing accesses are contract violations; catch them up front
    // so that a stall is never mistaken for one.
    for r in stream {
        if let Some(m) = &r.mem {
            let line = mem.config().l1d.line;
            if m.vaddr / line != (m.vaddr + m.bytes as u64 - 1) / line {
                return Err(crate::memhier::MemError::UnalignedLineCrossing {
                    vaddr: m.vaddr,
                    size: m.bytes as u64,
                }
                .into());
            }
        }
    }
    let io = &cfg.inorder;
    let mut suite = PredictorSuite::new(cfg.predictor);
    let mut fe = Frontend::new(cfg.frontend);
    let mut m = Machine {
        cfg,
        io,
        stream,
        sb: VecDeque::new(),
        reg_ready: [0; 64],
        div_busy: 0,
        fpdiv_busy: 0,
        loads: VecDeque::new(),
        sq: VecDeque::new(),
        shared_wb: VecDeque::new(),
    };
    let mut run = CoreRun {
        issue_log: opts.issue_log.then(Vec::new),
        ..CoreRun::default()
    };
    let mut digest = CommitDigest::default();
    let pair_ctx = PairContext::from_config(io);
    let mut last_commit = 0u64;
    let mut now = 0u64;

    while (digest.committed() as usize) < stream.len() {
        // Commit.
        let mut n = 0;
        while n < io.commit_width {
            match m.sb.front() {
                Some(e) if e.ready <= now => {
                    let e = m.sb.pop_front().unwrap();
                    let rec = &stream[e.idx];
                    digest.commit(rec)?;
                    if let Some(acc) = rec.mem.filter(|a| a.kind == MemKind::Store) {
                        if let Some(s) = m.sq.iter_mut().find(|s| s.idx == e.idx) {
                            s.committed = true;
                        }
                        mem.commit_store(&acc);
                    }
                    n += 1;
                }
                _ => break,
            }
        }
        run.count_retire(n);
        if n > 0 {
            last_commit = now;
        }

        // Store drain, one per cycle.
        if let Some(s) = m.sq.front().copied().filter(|s| s.committed) {
            if mem.access_at(now, s.addr, AccessKind::Store, s.bytes as u64)?.is_some() {
                m.sq.pop_front();
            }
        }
        while m.shared_wb.front().is_some_and(|&c| c < now) {
            m.shared_wb.pop_front();
        }

        // Issue.
        let mut used = Used::default();
        let mut first: Option<Instr> = None;
        let mut outcome: Option<StallCause> = None;
        for slot in 0..io.issue_width {
            let Some(f) = fe.peek(now, 0) else {
                if slot == 0 {
                    outcome = Some(frontend_cause(fe.state(now, stream.len())));
                }
                break;
            };
            let ins = stream[f.idx].instr;
            let mut forwarded = None;
            if let Some(a) = &first {
                let mut ctx = pair_ctx;
                ctx.second_wb_conflict =
                    m.wb_conflict(ins.fu_class, ins.fu_class == FuClass::Alu && used.alu == 1, now);
                let d = issue_pair_legal(a, &ins, &ctx);
                if !d.legal {
                    break;
                }
                if a.fu_class == FuClass::Alu && ins.fu_class == FuClass::Alu {
                    forwarded = a.dest();
                }
            }
            match m.try_issue(now, f.idx, &mut used, forwarded, mem) {
                Ok(iss) => {
                    fe.pop();
                    if f.mispredicted {
                        fe.resolve(f.idx, iss.ready.max(now + 1) - 1);
                    }
                    if let Some(log) = run.issue_log.as_mut() {
                        log.push(IssueEvent {
                            cycle: now,
                            seq: stream[f.idx].seq,
                            fu: ins.fu_class,
                        });
                    }
                    first = Some(ins);
                }
                Err(cause) => {
                    if slot == 0 {
                        outcome = Some(cause);
                    }
                    break;
                }
            }
        }
        match outcome {
            None => run.stalls.busy += 1,
            Some(c) => run.stalls.add(c),
        }

        fe.cycle(now, stream, &mut suite, mem)?;
        now += 1;
        if now - last_commit > DEADLOCK_CYCLES {
            return Err(SimError::Deadlock(DEADLOCK_CYCLES));
        }
    }

    run.cycles = now;
    run.retired = digest.committed();
    run.commit_digest = digest.finish();
    run.predictor = suite.stats();
    run.loop_buffer_supplied = suite.loop_buffer.as_ref().map_or(0, |l| l.supplied);
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{decode, encode, InstrDesc, IsaSubset, Op};

    fn ins(op: Op, rd: u8, rs1: u8, rs2: u8) -> Instr {
        let raw = encode(&InstrDesc::new(op, rd, rs1, rs2, 0)).unwrap();
        decode(raw, IsaSubset::FULL).unwrap()
    }

    fn ctx() -> PairContext {
        PairContext::from_config(&InOrderConfig::cva6s_plus())
    }

    #[test]
    fn forwarded_alu_pair_is_legal() {
        let a = ins(Op::Add, 5, 6, 7);
        let b = ins(Op::Add, 8, 5, 5);
        assert!(issue_pair_legal(&a, &b, &ctx()).legal);
        let no_fwd = PairContext {
            alu_forwarding: false,
            ..ctx()
        };
        assert_eq!(issue_pair_legal(&a, &b, &no_fwd).reason, PairReason::Raw);
    }

    #[test]
    fn fp_store_with_fpu_op_is_illegal() {
        let st = ins(Op::Fsd, 0, 10, 3);
        let fa = ins(Op::FaddD, 1, 2, 4);
        let d = issue_pair_legal(&st, &fa, &ctx());
        assert!(!d.legal);
        assert_eq!(d.reason.as_str(), "fp_store_fpu_conflict");
        assert_eq!(
            issue_pair_legal(&fa, &st, &ctx()).reason,
            PairReason::FpStoreFpuConflict
        );
        // An FP op beside an integer op is fine.
        assert!(issue_pair_legal(&ins(Op::Add, 5, 6, 7), &fa, &ctx()).legal);
    }

    #[test]
    fn shared_writeback_port_conflict() {
        let a = ins(Op::Add, 5, 6, 7);
        let b = ins(Op::Add, 8, 9, 10);
        let c = PairContext {
            second_wb_conflict: true,
            ..ctx()
        };
        assert_eq!(issue_pair_legal(&a, &b, &c).reason, PairReason::StructuralWbPort);
    }

    #[test]
    fn single_units_do_not_pair() {
        let m1 = ins(Op::Mul, 5, 6, 7);
        let m2 = ins(Op::Mul, 8, 9, 10);
        assert_eq!(issue_pair_legal(&m1, &m2, &ctx()).reason, PairReason::StructuralFu);
        let w = PairContext {
            renaming: false,
            ..ctx()
        };
        let a = ins(Op::Add, 5, 6, 7);
        let b = ins(Op::Mul, 5, 9, 10);
        assert_eq!(issue_pair_legal(&a, &b, &w).reason, PairReason::Waw);
        assert!(issue_pair_legal(&a, &b, &ctx()).legal);
    }
}
