use std::collections::VecDeque;

use crate::isa::{Reg, RegFile};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PReg {
    pub file: RegFile,
    pub n: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{0:?} free list empty")]
pub struct FreeListEmpty(pub RegFile);

/// Result of renaming one instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Renamed {
    pub srcs: [Option<PReg>; 3],
    pub dest: Option<PReg>,
    /// Previous mapping of the destination, released when this
    /// instruction retires.
    pub old: Option<PReg>,
}

#[derive(Debug, Clone)]
struct File {
    map: [u16; 32],
    free: VecDeque<u16>,
    total: usize,
}

impl File {
    fn new(total: usize) -> File {
        let mut map = [0u16; 32];
        for (i, m) in map.iter_mut().enumerate() {
            *m = i as u16;
        }
        File {
            map,
            free: (32..total as u16).collect(),
            total,
        }
    }
}

/// Architectural-to-physical register maps with free lists. The 32
/// architectural registers of each file start mapped to p0..p31.
#[derive(Debug, Clone)]
pub struct RenameState {
    int: File,
    fp: File,
}

impl RenameState {
    pub fn new(phys_int: usize, phys_fp: usize) -> RenameState {
        assert!(phys_int > 32 && phys_fp > 32, "physical files must exceed 32 registers");
        RenameState {
            int: File::new(phys_int),
            fp: File::new(phys_fp),
        }
    }

    fn file(&self, f: RegFile) -> &File {
        match f {
            RegFile::Int => &self.int,
            RegFile::Fp => &self.fp,
        }
    }

    fn file_mut(&mut self, f: RegFile) -> &mut File {
        match f {
            RegFile::Int => &mut self.int,
            RegFile::Fp => &mut self.fp,
        }
    }

    pub fn lookup(&self, r: Reg) -> PReg {
        let f = r.file();
        PReg {
            file: f,
            n: self.file(f).map[r.index() % 32],
        }
    }

    pub fn free_count(&self, f: RegFile) -> usize {
        self.file(f).free.len()
    }

    pub fn capacity(&self, f: RegFile) -> usize {
        self.file(f).total
    }

    /// Whether a writer to `dest` can be renamed now.
    pub fn can_rename(&self, dest: Option<Reg>) -> bool {
        dest.is_none_or(|d| self.free_count(d.file()) > 0)
    }

    /// Renames sources against the current map, then allocates `dest`.
    /// x0 never reaches here: [`crate::isa::Instr::dest`] omits it.
    pub fn rename(&mut self, srcs: impl Iterator<Item = Reg>, dest: Option<Reg>) -> Result<Renamed, FreeListEmpty> {
        if let Some(d) = dest {
            if self.free_count(d.file()) == 0 {
                return Err(FreeListEmpty(d.file()));
            }
        }
        let mut out = Renamed {
            srcs: [None; 3],
            dest: None,
            old: None,
        };
        for (slot, s) in out.srcs.iter_mut().zip(srcs) {
            *slot = Some(self.lookup(s));
        }
        if let Some(d) = dest {
            let f = d.file();
            let file = self.file_mut(f);
            let n = file.free.pop_front().expect("checked above");
            let old = std::mem::replace(&mut file.map[d.index() % 32], n);
            out.dest = Some(PReg { file: f, n });
            out.old = Some(PReg { file: f, n: old });
        }
        Ok(out)
    }

    /// Returns a superseded mapping to the free list.
    pub fn release(&mut self, p: PReg) {
        self.file_mut(p.file).free.push_back(p.n);
    }

    /// Checks that mapped, pending-release and free registers partition
    /// each file exactly. `pending` lists old mappings held by in-flight
    /// writers.
    pub fn check_conservation<'a>(&self, pending: impl Iterator<Item = &'a PReg>) -> Result<(), String> {
        let mut seen = [vec![false; self.int.total], vec![false; self.fp.total]];
        let mut mark = |f: RegFile, n: u16, what: &str| -> Result<(), String> {
            let v = &mut seen[(f == RegFile::Fp) as usize];
            match v.get_mut(n as usize) {
                Some(b) if !*b => {
                    *b = true;
                    Ok(())
                }
                Some(_) => Err(format!("{f:?} p{n} counted twice ({what})")),
                None => Err(format!("{f:?} p{n} out of range ({what})")),
            }
        };
        for (f, file) in [(RegFile::Int, &self.int), (RegFile::Fp, &self.fp)] {
            for &n in &file.map {
                mark(f, n, "mapped")?;
            }
            for &n in &file.free {
                mark(f, n, "free")?;
            }
        }
        for p in pending {
            mark(p.file, p.n, "pending")?;
        }
        for (f, v) in [RegFile::Int, RegFile::Fp].iter().zip(&seen) {
            if let Some(n) = v.iter().position(|b| !b) {
                return Err(format!("{f:?} p{n} leaked"));
            }
        }
        Ok(())
    }
}
