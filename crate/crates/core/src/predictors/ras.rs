use crate::golden::Fnv;
use serde::{Deserialize, Serialize};

/// Circular return address stack. Overflow overwrites the oldest entry;
/// popping an empty stack reports a miss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ras {
    slots: Vec<u64>,
    top: usize,
    len: usize,
}

impl Ras {
    pub fn new(depth: usize) -> Ras {
        assert!(depth > 0, "RAS depth must be positive");
        Ras {
            slots: vec![0; depth],
            top: 0,
            len: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, addr: u64) {
        self.slots[self.top] = addr;
        self.top = (self.top + 1) % self.slots.len();
        self.len = (self.len + 1).min(self.slots.len());
    }

    pub fn pop(&mut self) -> Option<u64> {
        if self.len == 0 {
            return None;
        }
        self.top = (self.top + self.slots.len() - 1) % self.slots.len();
        self.len -= 1;
        Some(self.slots[self.top])
    }

    pub fn peek(&self) -> Option<u64> {
        if self.len == 0 {
            return None;
        }
        Some(self.slots[(self.top + self.slots.len() - 1) % self.slots.len()])
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for s in &self.slots {
            h.write_u64(*s);
        }
        h.write_u64(self.top as u64);
        h.write_u64(self.len as u64);
        h.finish()
    }
}
