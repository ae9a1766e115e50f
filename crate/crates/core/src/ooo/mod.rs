//! Out-of-order timing model with a compacting ROB, register renaming,
//! per-class functional units and a dual-ported load/store unit.

mod rename;

pub use rename::{FreeListEmpty, PReg, RenameState, Renamed};

use std::collections::VecDeque;

use crate::config::{CoreConfig, CoreKind, OooConfig};
use crate::golden::{MemKind, RetireRecord};
use crate::isa::{FuClass, RegFile};
use crate::memhier::{AccessKind, Hierarchy, MemError};
use crate::predictors::PredictorSuite;
use crate::timing::{
    check_stream, CommitDigest, CoreRun, FetchState, Frontend, IssueEvent, SimError, StallCause, DEADLOCK_CYCLES,
};

/// True if `rec` must be the last instruction of its ROB entry.
pub fn closes_entry(rec: &RetireRecord) -> bool {
    rec.is_control() || matches!(rec.instr.fu_class, FuClass::Div | FuClass::FpDiv)
}

/// Greedy packing of consecutive records into ROB entries of at most
/// `max` instructions. Returns the sequence numbers of each entry.
pub fn compact(records: &[RetireRecord], max: usize) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut open = false;
    for r in records {
        if !open {
            out.push(Vec::with_capacity(max));
        }
        let e = out.last_mut().expect("pushed above");
        e.push(r.seq);
        open = e.len() < max && !closes_entry(r);
    }
    out
}

/// Number of instructions retired from completed head entries, given
/// per-entry `(size, complete)` in program order.
pub fn retire_cycle(entries: &[(usize, bool)], retire_entries: usize) -> usize {
    entries
        .iter()
        .take(retire_entries)
        .take_while(|e| e.1)
        .map(|e| e.0)
        .sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub issue_log: bool,
    /// Check register conservation and occupancy bounds every cycle.
    pub check_invariants: bool,
}

#[derive(Debug, Clone, Copy)]
struct RobEntry {
    start: usize,
    len: usize,
    dispatched: u64,
    closed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    renamed: Renamed,
    dispatched: u64,
    issued: bool,
    done: u64,
}

#[derive(Debug, Clone, Copy)]
struct StoreEntry {
    idx: usize,
    addr: u64,
    bytes: u8,
    issued: bool,
    committed: bool,
}

struct Units {
    alu: usize,
    bru: usize,
    mul: usize,
    csr: usize,
    lsu: usize,
    fpu: usize,
}

struct Core<'a> {
    oc: &'a OooConfig,
    cfg: &'a CoreConfig,
    stream: &'a [RetireRecord],
    rob: VecDeque<RobEntry>,
    /// In-flight instructions; `window[0]` is stream index `head`.
    window: VecDeque<Slot>,
    head: usize,
    unissued: Vec<usize>,
    rename: RenameState,
    ready_int: Vec<u64>,
    ready_fp: Vec<u64>,
    div_busy: Vec<u64>,
    fpu_busy: Vec<u64>,
    loads_in_flight: usize,
    sq: VecDeque<StoreEntry>,
}

const NOT_READY: u64 = u64::MAX;

impl Core<'_> {
    fn preg_ready(&self, p: PReg) -> u64 {
        match p.file {
            RegFile::Int => self.ready_int[p.n as usize],
            RegFile::Fp => self.ready_fp[p.n as usize],
        }
    }

    fn set_ready(&mut self, p: PReg, c: u64) {
        match p.file {
            RegFile::Int => self.ready_int[p.n as usize] = c,
            RegFile::Fp => self.ready_fp[p.n as usize] = c,
        }
    }

    fn slot(&self, idx: usize) -> &Slot {
        &self.window[idx - self.head]
    }

    /// Rename and allocate one fetched instruction.
    fn dispatch(&mut self, idx: usize, now: u64) -> Result<(), StallCause> {
        let rec = &self.stream[idx];
        let oc = self.oc;
        let joins_tail = self
            .rob
            .back()
            .is_some_and(|e| !e.closed && e.len < oc.compaction_max && e.dispatched == now);
        if !joins_tail && self.rob.len() >= oc.rob_entries {
            return Err(StallCause::RobFull);
        }
        if !self.rename.can_rename(rec.instr.dest()) {
            return Err(StallCause::RenameStall);
        }
        match rec.mem.map(|m| m.kind) {
            Some(MemKind::Load) if self.loads_in_flight >= oc.load_q => return Err(StallCause::LsuFull),
            Some(MemKind::Store) if self.sq.len() >= oc.store_q => return Err(StallCause::LsuFull),
            _ => {}
        }
        let renamed = self
            .rename
            .rename(rec.instr.sources(), rec.instr.dest())
            .expect("free list checked above");
        if let Some(d) = renamed.dest {
            self.set_ready(d, NOT_READY);
        }
        match rec.mem {
            Some(m) if m.kind == MemKind::Load => self.loads_in_flight += 1,
            Some(m) => self.sq.push_back(StoreEntry {
                idx,
                addr: m.vaddr,
                bytes: m.bytes,
                issued: false,
                committed: false,
            }),
            None => {}
        }
        if joins_tail {
            let e = self.rob.back_mut().expect("checked above");
            e.len += 1;
            e.closed = closes_entry(rec);
        } else {
            self.rob.push_back(RobEntry {
                start: idx,
                len: 1,
                dispatched: now,
                closed: closes_entry(rec),
            });
        }
        self.window.push_back(Slot {
            renamed,
            dispatched: now,
            issued: false,
            done: NOT_READY,
        });
        self.unissued.push(idx);
        Ok(())
    }

    /// Serialising instructions wait until everything older has executed.
    fn older_done(&self, idx: usize, now: u64) -> bool {
        self.window.iter().take(idx - self.head).all(|s| s.done <= now)
    }

    /// Memory-ordering check for a load; `Ok(Some(lat))` forwards from a
    /// store, `Ok(None)` goes to the cache, `Err(())` waits.
    fn load_order(&self, idx: usize, addr: u64, bytes: u8, now: u64) -> Result<Option<u64>, ()> {
        let (lo, hi) = (addr, addr + bytes as u64);
        let mut hit = None;
        for s in self.sq.iter().filter(|s| s.idx < idx) {
            if !s.issued {
                return Err(());
            }
            if s.addr < hi && lo < s.addr + s.bytes as u64 {
                hit = Some(*s);
            }
        }
        match hit {
            None => Ok(None),
            // A retired store has left the window but may still be draining.
            Some(s) if s.addr == addr && s.bytes == bytes && (s.committed || self.slot(s.idx).done <= now) => {
                Ok(Some(0))
            }
            // Partial overlap: merge with the cache line once the store has
            // executed. Waiting for the drain instead deadlocks when both sit
            // in one compacted entry.
            Some(s) if s.committed || self.slot(s.idx).done <= now => Ok(None),
            Some(_) => Err(()),
        }
    }

    fn issue(&mut self, now: u64, mem: &mut Hierarchy, fe: &mut Frontend, log: &mut Option<Vec<IssueEvent>>) {
        let oc = self.oc;
        let mut u = Units {
            alu: 0,
            bru: 0,
            mul: 0,
            csr: 0,
            lsu: 0,
            fpu: 0,
        };
        let fpu_free = self.fpu_busy.iter().filter(|&&b| b <= now).count();
        let mut k = 0;
        while k < self.unissued.len() {
            let idx = self.unissued[k];
            let s = *self.slot(idx);
            let rec = &self.stream[idx];
            let fu = rec.instr.fu_class;
            let ready = s.dispatched < now && s.renamed.srcs.iter().flatten().all(|&p| self.preg_ready(p) <= now);
            if !ready {
                k += 1;
                continue;
            }
            let lat = self.cfg.latencies.latency(fu) as u64;
            let done = match fu {
                FuClass::Alu if u.alu < oc.n_alu => {
                    u.alu += 1;
                    Some(now + lat)
                }
                FuClass::Bru if u.bru < oc.n_bru => {
                    u.bru += 1;
                    Some(now + lat)
                }
                FuClass::Mul if u.mul < oc.n_mul => {
                    u.mul += 1;
                    Some(now + lat)
                }
                FuClass::Div => self.div_busy.iter().position(|&b| b <= now).map(|i| {
                    self.div_busy[i] = now + lat;
                    now + lat
                }),
                FuClass::FpAlu | FuClass::FpMul if u.fpu < fpu_free => {
                    u.fpu += 1;
                    Some(now + lat)
                }
                FuClass::FpDiv if u.fpu < fpu_free => self.fpu_busy.iter().position(|&b| b <= now).map(|i| {
                    u.fpu += 1;
                    self.fpu_busy[i] = now + lat;
                    now + lat
                }),
                FuClass::Csr | FuClass::System if u.csr == 0 && self.older_done(idx, now) => {
                    u.csr += 1;
                    Some(now + lat)
                }
                FuClass::Store | FuClass::FpStore if u.lsu < oc.lsu_ports => {
                    u.lsu += 1;
                    if let Some(e) = self.sq.iter_mut().find(|e| e.idx == idx) {
                        e.issued = true;
                    }
                    Some(now + mem.hit_latency(AccessKind::Store) as u64)
                }
                FuClass::Load | FuClass::FpLoad if u.lsu < oc.lsu_ports => {
                    let m = rec.mem.expect("load carries an access");
                    match self.load_order(idx, m.vaddr, m.bytes, now) {
                        Err(()) => None,
                        Ok(Some(_)) => {
                            u.lsu += 1;
                            Some(now + mem.hit_latency(AccessKind::Load) as u64)
                        }
                        Ok(None) => match mem.access_at(now, m.vaddr, AccessKind::Load, m.bytes as u64) {
                            Ok(Some(r)) => {
                                u.lsu += 1;
                                Some(now + r.latency as u64)
                            }
                            Ok(None) => None,
                            Err(e) => unreachable!("checked before simulation: {e}"),
                        },
                    }
                }
                _ => None,
            };
            let Some(done) = done else {
                k += 1;
                continue;
            };
            self.unissued.remove(k);
            let s = &mut self.window[idx - self.head];
            s.issued = true;
            s.done = done;
            if let Some(d) = s.renamed.dest {
                self.set_ready(d, done);
            }
            if rec.is_control() {
                fe.resolve(idx, done.max(now + 1) - 1);
            }
            if let Some(l) = log.as_mut() {
                l.push(IssueEvent {
                    cycle: now,
                    seq: rec.seq,
                    fu,
                });
            }
        }
    }

    /// Retires up to `retire_entries_per_cycle` completed head entries.
    fn retire(&mut self, now: u64, mem: &mut Hierarchy, digest: &mut CommitDigest) -> Result<usize, SimError> {
        let mut n = 0;
        for _ in 0..self.oc.retire_entries_per_cycle {
            let Some(&e) = self.rob.front() else { break };
            let complete = (e.start..e.start + e.len).all(|i| self.slot(i).done <= now);
            if !complete || (!e.closed && e.dispatched == now) {
                break;
            }
            self.rob.pop_front();
            for i in e.start..e.start + e.len {
                debug_assert_eq!(i, self.head);
                let s = self.window.pop_front().expect("slot present");
                self.head += 1;
                let rec = &self.stream[i];
                digest.commit(rec)?;
                if let Some(old) = s.renamed.old {
                    self.rename.release(old);
                }
                match rec.mem {
                    Some(m) if m.kind == MemKind::Load => self.loads_in_flight -= 1,
                    Some(m) => {
                        if let Some(q) = self.sq.iter_mut().find(|q| q.idx == i) {
                            q.committed = true;
                        }
                        mem.commit_store(&m);
                    }
                    None => {}
                }
                n += 1;
            }
        }
        Ok(n)
    }

    fn check(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invariant(m));
        if self.rob.len() > self.oc.rob_entries {
            return bad(format!("ROB holds {} entries", self.rob.len()));
        }
        if self.window.len() > self.oc.rob_entries * self.oc.compaction_max {
            return bad(format!("{} instructions in flight", self.window.len()));
        }
        if self.rob.iter().map(|e| e.len).sum::<usize>() != self.window.len() {
            return bad("ROB slots disagree with the in-flight window".into());
        }
        self.rename
            .check_conservation(self.window.iter().filter_map(|s| s.renamed.old.as_ref()))
            .map_err(SimError::Invariant)
    }
}

fn frontend_cause(s: FetchState) -> StallCause {
    match s {
        FetchState::Redirect => StallCause::MispredictRedirect,
        FetchState::IcacheMiss => StallCause::CacheMiss,
        FetchState::Running | FetchState::Exhausted => StallCause::FetchStarve,
    }
}

/// Replays `stream` on the out-of-order model described by `cfg`.
pub fn simulate(
    cfg: &CoreConfig,
    stream: &[RetireRecord],
    mem: &mut Hierarchy,
    opts: SimOptions,
) -> Result<CoreRun, SimError> {
    if cfg.kind != CoreKind::OutOfOrder {
        return Err(SimError::Config(format!("core `{}` is not out-of-order", cfg.name)));
    }
    cfg.validate()?;
    check_stream(stream)?;
    let line = mem.config().l1d.line;
    for r in stream {
        if let Some(m) = &r.mem {
            if m.vaddr / line != (m.vaddr + m.bytes as u64 - 1) / line {
                return Err(MemError::UnalignedLineCrossing {
                    vaddr: m.vaddr,
                    size: m.bytes as u64,
                }
                .into());
            }
        }
    }
    let oc = &cfg.ooo;
    let mut core = Core {
        oc,
        cfg,
        stream,
        rob: VecDeque::with_capacity(oc.rob_entries),
        window: VecDeque::new(),
        head: 0,
        unissued: Vec::new(),
        rename: RenameState::new(oc.phys_int_regs, oc.phys_fp_regs),
        ready_int: vec![0; oc.phys_int_regs],
        ready_fp: vec![0; oc.phys_fp_regs],
        div_busy: vec![0; oc.n_div],
        fpu_busy: vec![0; oc.n_fpu],
        loads_in_flight: 0,
        sq: VecDeque::new(),
    };
    let mut suite = PredictorSuite::new(cfg.predictor);
    let mut fe = Frontend::new(cfg.frontend);
    let mut run = CoreRun {
        issue_log: opts.issue_log.then(Vec::new),
        rob_histogram: vec![0; oc.rob_entries + 1],
        ..CoreRun::default()
    };
    let mut digest = CommitDigest::default();
    let mut now = 0u64;
    let mut last_commit = 0u64;

    while (digest.committed() as usize) < stream.len() {
        let n = core.retire(now, mem, &mut digest)?;
        run.count_retire(n);
        if n > 0 {
            last_commit = now;
        }

        if let Some(s) = core.sq.front().copied().filter(|s| s.committed) {
            if mem.access_at(now, s.addr, AccessKind::Store, s.bytes as u64)?.is_some() {
                core.sq.pop_front();
            }
        }

        core.issue(now, mem, &mut fe, &mut run.issue_log);

        let mut dispatched = 0;
        let mut cause = None;
        while dispatched < oc.decode_width {
            let Some(f) = fe.peek(now, 0) else {
                if dispatched == 0 {
                    cause = Some(frontend_cause(fe.state(now, stream.len())));
                }
                break;
            };
            match core.dispatch(f.idx, now) {
                Ok(()) => {
                    fe.pop();
                    dispatched += 1;
                }
                Err(c) => {
                    if c == StallCause::RenameStall {
                        run.rename_stalls += 1;
                    }
                    if dispatched == 0 {
                        cause = Some(c);
                    }
                    break;
                }
            }
        }
        match cause {
            None => run.stalls.busy += 1,
            Some(c) => run.stalls.add(c),
        }

        run.rob_histogram[core.rob.len()] += 1;
        run.peak_rob_entries = run.peak_rob_entries.max(core.rob.len() as u64);
        run.peak_in_flight = run.peak_in_flight.max(core.window.len() as u64);
        if opts.check_invariants {
            core.check()?;
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

    fn rec(seq: u64, op: Op, taken: bool) -> RetireRecord {
        let raw = encode(&InstrDesc::new(op, 5, 6, 7, if op.is_branch() { 64 } else { 0 })).unwrap();
        let instr = decode(raw, IsaSubset::FULL).unwrap();
        let pc = 0x1000 + 4 * seq;
        let next = if taken { pc + 64 } else { pc + 4 };
        RetireRecord::new(seq, pc, next, instr, None)
    }

    #[test]
    fn compaction_examples() {
        let six: Vec<_> = (0..6).map(|i| rec(i, Op::Add, false)).collect();
        assert_eq!(compact(&six, 3), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let br = vec![rec(0, Op::Add, false), rec(1, Op::Beq, true), rec(2, Op::Add, false)];
        let sizes: Vec<usize> = compact(&br, 3).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 1]);
        assert_eq!(compact(&six[..1], 3), vec![vec![0]]);
        let div = vec![rec(0, Op::Div, false), rec(1, Op::Add, false)];
        assert_eq!(compact(&div, 3).len(), 2);
    }

    #[test]
    fn retire_cycle_examples() {
        assert_eq!(retire_cycle(&[(3, true), (3, true), (3, true), (3, true)], 3), 9);
        assert_eq!(retire_cycle(&[(3, false), (3, true), (3, true)], 3), 0);
        assert_eq!(retire_cycle(&[(3, true), (1, true), (2, false)], 3), 4);
    }
}
