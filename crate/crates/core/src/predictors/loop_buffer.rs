use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum State {
    Idle,
    /// Saw one taken backward branch closing a small body.
    Capturing {
        branch_pc: u64,
        target: u64,
    },
    /// Body captured; fetch is served from the buffer.
    Active {
        branch_pc: u64,
        target: u64,
    },
}

/// Small-loop buffer. It only affects fetch: while active, instructions of
/// the captured body are supplied without an instruction-cache access.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBuffer {
    capacity: usize,
    state: State,
    /// Instructions observed since the capture target.
    body_len: usize,
    pub supplied: u64,
    pub activations: u64,
}

impl LoopBuffer {
    pub fn new(capacity: usize) -> LoopBuffer {
        LoopBuffer {
            capacity,
            state: State::Idle,
            body_len: 0,
            supplied: 0,
            activations: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_active(&self) -> bool {
        matches!(self.state, State::Active { .. })
    }

    /// True if `pc` is served from the buffer.
    pub fn supplies(&self, pc: u64) -> bool {
        match self.state {
            State::Active { branch_pc, target } => pc >= target && pc <= branch_pc,
            _ => false,
        }
    }

    /// Advances the capture state machine with one fetched instruction.
    pub fn observe(&mut self, pc: u64, next_pc: u64, is_control: bool, taken: bool) {
        if self.supplies(pc) {
            self.supplied += 1;
        }
        self.body_len += 1;
        if !is_control {
            return;
        }
        let backward_taken = taken && next_pc <= pc;
        self.state = match self.state {
            State::Active { branch_pc, target } | State::Capturing { branch_pc, target }
                if pc == branch_pc && taken && next_pc == target && self.body_len <= self.capacity =>
            {
                if matches!(self.state, State::Capturing { .. }) {
                    self.activations += 1;
                }
                State::Active { branch_pc, target }
            }
            // Not-taken branches inside the body keep the loop intact.
            State::Active { branch_pc, target } | State::Capturing { branch_pc, target }
                if !taken && pc >= target && pc < branch_pc =>
            {
                return;
            }
            _ if backward_taken && pc - next_pc < self.capacity as u64 * 4 => State::Capturing {
                branch_pc: pc,
                target: next_pc,
            },
            _ => State::Idle,
        };
        self.body_len = 0;
    }
}
