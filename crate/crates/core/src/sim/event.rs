//! Deterministic event queue: a min-heap ordered by (time, sequence).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Simulator event kinds. Indices refer to the engine's interned tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A pre-existing file materializes at the CAC and its placements are scheduled.
    FileProduced { file: u32 },
    /// Arrival tick for a region: one job is created and the next tick scheduled.
    JobSubmitted { region: u32 },
    /// One database query of a job's chain is answered.
    DbQuery { job: u32, remaining: u32 },
    /// A job's database chain is done; its file fetches begin.
    JobDataPhase { job: u32 },
    /// A network transfer delivered its last byte.
    TransferComplete { transfer: u32 },
    /// A tape staging request finished reading off tape.
    StageComplete { stage: u32 },
    /// A job's compute phase finished; its CPU slot frees.
    JobCompleted { job: u32 },
}

#[derive(Debug, Clone, Copy)]
pub struct Scheduled {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.time.total_cmp(&other.time) == Ordering::Equal && self.seq == other.seq
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest (time, seq) first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Event queue enforcing causality: nothing schedules into the past.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, now: f64, time: f64, kind: EventKind) {
        debug_assert!(time.is_finite(), "event time must be finite");
        debug_assert!(
            time >= now,
            "event scheduled into the past: {time} < {now} ({kind:?})"
        );
        self.seq += 1;
        self.heap.push(Scheduled {
            time,
            seq: self.seq,
            kind,
        });
    }

    pub fn pop(&mut self) -> Option<Scheduled> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
