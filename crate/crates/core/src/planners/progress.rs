use std::sync::atomic::{fence, AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// One periodic observation of a running planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressSample {
    /// Seconds since run start, from the supervisor clock.
    pub t: f64,
    pub best_cost: Option<f64>,
    pub iterations: u64,
}

/// Consistent view of the planner counters at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Snapshot {
    pub best_cost: Option<f64>,
    pub iterations: u64,
    pub graph_states: u64,
    pub edges: u64,
}

impl Snapshot {
    pub fn memory_estimate(&self) -> u64 {
        memory_estimate(self.graph_states, self.edges)
    }
}

/// Bytes per stored state: three `f64` coordinates.
pub const STATE_BYTES: u64 = 24;
pub const NODE_OVERHEAD_BYTES: u64 = 64;
pub const EDGE_BYTES: u64 = 32;

/// Byte-accounting model for planner data structures.
pub fn memory_estimate(nodes: u64, edges: u64) -> u64 {
    (STATE_BYTES + NODE_OVERHEAD_BYTES) * nodes + EDGE_BYTES * edges
}

const ABSENT_BITS: u64 = u64::MAX;

/// Single-writer snapshot cell. The planner publishes after each iteration;
/// readers (progress collector, memory watchdog) get an O(1) consistent copy
/// and never observe a half-written update.
#[derive(Debug)]
pub struct ProgressCell {
    seq: AtomicU64,
    best_cost: AtomicU64,
    iterations: AtomicU64,
    graph_states: AtomicU64,
    edges: AtomicU64,
}

impl Default for ProgressCell {
    fn default() -> Self {
        ProgressCell {
            seq: AtomicU64::new(0),
            best_cost: AtomicU64::new(ABSENT_BITS),
            iterations: AtomicU64::new(0),
            graph_states: AtomicU64::new(0),
            edges: AtomicU64::new(0),
        }
    }
}

impl ProgressCell {
    pub fn publish(&self, snap: Snapshot) {
        let s = self.seq.load(Ordering::Relaxed);
        self.seq.store(s.wrapping_add(1), Ordering::Relaxed);
        fence(Ordering::Release);
        self.best_cost
            .store(snap.best_cost.map_or(ABSENT_BITS, f64::to_bits), Ordering::Relaxed);
        self.iterations.store(snap.iterations, Ordering::Relaxed);
        self.graph_states.store(snap.graph_states, Ordering::Relaxed);
        self.edges.store(snap.edges, Ordering::Relaxed);
        self.seq.store(s.wrapping_add(2), Ordering::Release);
    }

    pub fn read(&self) -> Snapshot {
        loop {
            let s1 = self.seq.load(Ordering::Acquire);
            if s1 % 2 == 1 {
                std::hint::spin_loop();
                continue;
            }
            let bits = self.best_cost.load(Ordering::Relaxed);
            let snap = Snapshot {
                best_cost: (bits != ABSENT_BITS).then(|| f64::from_bits(bits)),
                iterations: self.iterations.load(Ordering::Relaxed),
                graph_states: self.graph_states.load(Ordering::Relaxed),
                edges: self.edges.load(Ordering::Relaxed),
            };
            fence(Ordering::Acquire);
            if self.seq.load(Ordering::Relaxed) == s1 {
                return snap;
            }
        }
    }
}

/// Shared handle through which a planner publishes its progress.
pub type ProgressSink = Arc<ProgressCell>;

pub fn new_sink() -> ProgressSink {
    Arc::new(ProgressCell::default())
}
