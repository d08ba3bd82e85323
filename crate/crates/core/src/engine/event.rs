use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::model::JobId;
use crate::time::TimePoint;

/// Kinds of queued simulation events, in same-instant processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Completion,
    /// A live job reached its deadline under abort-on-miss.
    Deadline,
    QuantumExpiry,
    Arrival,
    LatencyElapsed,
    Reconfigure,
}

impl EventKind {
    pub fn rank(self) -> u8 {
        match self {
            EventKind::Completion => 0,
            EventKind::Deadline => 1,
            EventKind::QuantumExpiry => 2,
            EventKind::Arrival => 3,
            EventKind::LatencyElapsed => 4,
            EventKind::Reconfigure => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: TimePoint,
    pub kind: EventKind,
    pub job: Option<JobId>,
    pub seq: u64,
    /// CPU epoch the event was scheduled under; CPU-driven events from an
    /// older epoch are stale.
    pub epoch: u64,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.kind.rank(), self.seq).cmp(&(other.time, other.kind.rank(), other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of events ordered by `(time, kind rank, seq)`.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: TimePoint, kind: EventKind, job: Option<JobId>, epoch: u64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { time, kind, job, seq, epoch }));
    }

    pub fn peek(&self) -> Option<&Event> {
        self.heap.peek().map(|Reverse(e)| e)
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_instant_order_follows_kind_rank_then_seq() {
        let mut q = EventQueue::new();
        q.push(TimePoint(5), EventKind::Arrival, Some(1), 0);
        q.push(TimePoint(5), EventKind::QuantumExpiry, Some(0), 0);
        q.push(TimePoint(5), EventKind::Arrival, Some(0), 0);
        q.push(TimePoint(5), EventKind::Completion, Some(2), 0);
        q.push(TimePoint(4), EventKind::Reconfigure, None, 0);
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|e| (e.time.0, e.kind, e.job)).collect();
        assert_eq!(
            order,
            vec![
                (4, EventKind::Reconfigure, None),
                (5, EventKind::Completion, Some(2)),
                (5, EventKind::QuantumExpiry, Some(0)),
                (5, EventKind::Arrival, Some(1)),
                (5, EventKind::Arrival, Some(0)),
            ]
        );
    }
}
