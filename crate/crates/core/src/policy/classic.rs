//! FCFS, round-robin and preemptive EDF.

use std::collections::VecDeque;

use crate::engine::{Decision, Policy, SchedView};
use crate::model::{JobId, JobState};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

/// Round-robin settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RrConfig {
    pub quantum: TimeDelta,
}

impl Default for RrConfig {
    fn default() -> Self {
        RrConfig { quantum: TimeDelta(1000) }
    }
}

/// Nearest deadline first; ties by earlier arrival, then lower id.
pub fn edf_select<'a, V: Scalar>(ready: impl IntoIterator<Item = &'a JobState<V>>, _now: TimePoint) -> Option<JobId> {
    ready.into_iter().min_by_key(|j| j.edf_key()).map(JobState::id)
}

/// Earliest arrival first; ties by lower id.
pub fn fcfs_select<'a, V: Scalar>(ready: impl IntoIterator<Item = &'a JobState<V>>, _now: TimePoint) -> Option<JobId> {
    ready.into_iter().min_by_key(|j| (j.spec.arrival, j.id())).map(JobState::id)
}

/// Preemptive earliest-deadline-first. Never aborts.
#[derive(Debug, Default, Clone)]
pub struct Edf;

impl<V: Scalar> Policy<V> for Edf {
    fn name(&self) -> &'static str {
        "edf"
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        match edf_select(view.ready_jobs(), view.now) {
            Some(j) => Decision::run(j),
            None => Decision::idle(),
        }
    }
}

/// Non-preemptive first-come first-served.
#[derive(Debug, Default, Clone)]
pub struct Fcfs;

impl<V: Scalar> Policy<V> for Fcfs {
    fn name(&self) -> &'static str {
        "fcfs"
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        // Arrival order makes the running job the minimum, so this never preempts.
        match fcfs_select(view.ready_jobs(), view.now) {
            Some(j) => Decision::run(j),
            None => Decision::idle(),
        }
    }
}

/// Cyclic FIFO with a fixed quantum; expired jobs go to the tail.
#[derive(Debug, Clone)]
pub struct RoundRobin {
    cfg: RrConfig,
    fifo: VecDeque<JobId>,
}

impl RoundRobin {
    pub fn new(cfg: RrConfig) -> Self {
        assert!(cfg.quantum.ticks() >= 1, "round-robin quantum must be at least one tick");
        RoundRobin { cfg, fifo: VecDeque::new() }
    }

    fn remove(&mut self, job: JobId) {
        self.fifo.retain(|&j| j != job);
    }
}

/// Head of the round-robin FIFO and the slice to grant it.
pub fn rr_select<V: Scalar>(
    fifo: &VecDeque<JobId>,
    view: &SchedView<'_, V>,
    q: RrConfig,
) -> Option<(JobId, TimeDelta)> {
    let head = *fifo.front()?;
    let slice = match (view.current, view.slice_left) {
        (Some(c), Some(left)) if c == head => left,
        _ => q.quantum,
    };
    Some((head, slice))
}

impl<V: Scalar> Policy<V> for RoundRobin {
    fn name(&self) -> &'static str {
        "rr"
    }

    fn on_arrival(&mut self, job: JobId, _view: &SchedView<'_, V>) -> crate::engine::Admission {
        self.fifo.push_back(job);
        crate::engine::Admission::Accepted
    }

    fn on_completion(&mut self, job: JobId, _view: &SchedView<'_, V>) {
        self.remove(job);
    }

    fn on_abort(&mut self, job: JobId, _view: &SchedView<'_, V>) {
        self.remove(job);
    }

    fn on_quantum_expiry(&mut self, job: JobId, _view: &SchedView<'_, V>) {
        self.remove(job);
        self.fifo.push_back(job);
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        match rr_select(&self.fifo, view, self.cfg) {
            Some((job, slice)) => Decision::slice(job, slice),
            None => Decision::idle(),
        }
    }
}
