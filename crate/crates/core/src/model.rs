//! Tasks, workloads, job lifecycle and run configuration.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::nmlfq::NmlfqConfig;
use crate::policy::classic::RrConfig;
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

/// Dense job identifier; also the index of the job in its workload.
pub type JobId = usize;

/// Immutable description of one one-shot aperiodic job.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec<V> {
    pub id: JobId,
    pub arrival: TimePoint,
    /// Total CPU demand.
    pub burst: TimeDelta,
    /// Absolute deadline.
    pub deadline: TimePoint,
    /// Benefit accrued iff the job completes by its deadline.
    pub value: V,
}

impl<V: Scalar> TaskSpec<V> {
    /// A task with unit value.
    pub fn new(id: JobId, arrival: u64, burst: u64, deadline: u64) -> Self {
        TaskSpec {
            id,
            arrival: TimePoint(arrival),
            burst: TimeDelta(burst),
            deadline: TimePoint(deadline),
            value: V::one(),
        }
    }

    pub fn with_value(mut self, value: V) -> Self {
        self.value = value;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JobStatus {
    NotArrived,
    Ready,
    Running,
    Completed,
    Aborted,
}

impl JobStatus {
    /// Arrived, admitted and not yet finished.
    pub fn is_live(self) -> bool {
        matches!(self, JobStatus::Ready | JobStatus::Running)
    }
}

/// Runtime record of one job, owned by a single simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct JobState<V> {
    pub spec: TaskSpec<V>,
    pub remaining: TimeDelta,
    pub status: JobStatus,
    pub first_dispatch: Option<TimePoint>,
    pub completion: Option<TimePoint>,
    pub last_enqueue: TimePoint,
}

impl<V: Scalar> JobState<V> {
    pub fn new(spec: TaskSpec<V>) -> Self {
        JobState {
            remaining: spec.burst,
            last_enqueue: spec.arrival,
            spec,
            status: JobStatus::NotArrived,
            first_dispatch: None,
            completion: None,
        }
    }

    pub fn id(&self) -> JobId {
        self.spec.id
    }

    pub fn deadline(&self) -> TimePoint {
        self.spec.deadline
    }

    pub fn executed(&self) -> TimeDelta {
        self.spec.burst - self.remaining
    }

    /// Completed no later than the deadline.
    pub fn met_deadline(&self) -> bool {
        self.status == JobStatus::Completed && self.completion.is_some_and(|c| c <= self.spec.deadline)
    }

    /// The EDF tie-break key: deadline, then arrival, then id.
    pub fn edf_key(&self) -> (TimePoint, TimePoint, JobId) {
        (self.spec.deadline, self.spec.arrival, self.spec.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("job {id} is not live ({status:?})")]
pub struct NotLive {
    pub id: JobId,
    pub status: JobStatus,
}

/// `deadline - now - remaining` in ticks; negative once the deadline is unreachable.
pub fn slack<V: Scalar>(job: &JobState<V>, now: TimePoint) -> Result<i64, NotLive> {
    if !job.status.is_live() {
        return Err(NotLive { id: job.id(), status: job.status });
    }
    Ok(job.spec.deadline.signed_diff(now) - job.remaining.ticks() as i64)
}

/// An ordered, validated-on-demand list of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload<V> {
    pub name: String,
    pub seed: Option<u64>,
    pub tasks: Vec<TaskSpec<V>>,
}

impl<V: Scalar> Workload<V> {
    pub fn new(name: impl Into<String>, tasks: Vec<TaskSpec<V>>) -> Self {
        Workload { name: name.into(), seed: None, tasks }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// The task with the given id (ids are dense, but the list is arrival-sorted).
    pub fn task(&self, id: JobId) -> Option<&TaskSpec<V>> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn total_burst(&self) -> TimeDelta {
        self.tasks.iter().map(|t| t.burst).sum()
    }
}

/// Names of the rules checked by [`validate_workload`].
pub mod rule {
    pub const BURST: &str = "burst >= 1";
    pub const DEADLINE: &str = "deadline > arrival";
    pub const VALUE: &str = "value >= 0";
    pub const UNIQUE_ID: &str = "unique id";
    pub const DENSE_ID: &str = "dense id";
    pub const SORTED: &str = "sorted by (arrival, id)";
    pub const NON_EMPTY: &str = "non-empty";
}

/// One broken workload rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: Option<JobId>,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            Some(id) => write!(f, "task {id}: {}", self.rule),
            None => write!(f, "workload: {}", self.rule),
        }
    }
}

/// Every rule breach in `w`; empty when the workload is valid.
pub fn validate_workload<V: Scalar>(w: &Workload<V>) -> Vec<Violation> {
    let mut out = Vec::new();
    if w.tasks.is_empty() {
        out.push(Violation { id: None, rule: rule::NON_EMPTY });
        return out;
    }
    let mut seen = BTreeSet::new();
    for t in &w.tasks {
        if t.burst.ticks() < 1 {
            out.push(Violation { id: Some(t.id), rule: rule::BURST });
        }
        if t.deadline <= t.arrival {
            out.push(Violation { id: Some(t.id), rule: rule::DEADLINE });
        }
        if t.value < V::zero() {
            out.push(Violation { id: Some(t.id), rule: rule::VALUE });
        }
        if !seen.insert(t.id) {
            out.push(Violation { id: Some(t.id), rule: rule::UNIQUE_ID });
        }
    }
    for t in &w.tasks {
        if t.id >= w.tasks.len() {
            out.push(Violation { id: Some(t.id), rule: rule::DENSE_ID });
        }
    }
    for pair in w.tasks.windows(2) {
        if (pair[1].arrival, pair[1].id) < (pair[0].arrival, pair[0].id) {
            out.push(Violation { id: Some(pair[1].id), rule: rule::SORTED });
        }
    }
    out
}

/// Per-run simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<V> {
    /// Non-task time inserted before a job that differs from the last one to run.
    pub dispatch_latency: TimeDelta,
    pub context_switch_cost: TimeDelta,
    /// Abort live jobs at their deadline instant. `None` uses the policy's default.
    pub abort_on_miss: Option<bool>,
    pub rr: RrConfig,
    pub nmlfq: NmlfqConfig<V>,
    pub horizon: Option<TimePoint>,
}

impl<V: Scalar> Default for SimConfig<V> {
    fn default() -> Self {
        SimConfig {
            dispatch_latency: TimeDelta::ZERO,
            context_switch_cost: TimeDelta::ZERO,
            abort_on_miss: None,
            rr: RrConfig::default(),
            nmlfq: NmlfqConfig::default(),
            horizon: None,
        }
    }
}

impl<V: Scalar> SimConfig<V> {
    pub fn with_dispatch_latency(mut self, ticks: u64) -> Self {
        self.dispatch_latency = TimeDelta(ticks);
        self
    }

    /// Ticks of non-task time inserted on every switch to a different job.
    pub fn switch_overhead(&self) -> TimeDelta {
        self.dispatch_latency + self.context_switch_cost
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn w(tasks: Vec<TaskSpec<Rational>>) -> Workload<Rational> {
        Workload::new("t", tasks)
    }

    #[test]
    fn minimal_workload_is_valid() {
        assert!(validate_workload(&w(vec![TaskSpec::new(0, 0, 1, 1)])).is_empty());
    }

    #[test]
    fn zero_burst_is_flagged() {
        let tasks = (0..5).map(|i| TaskSpec::new(i, i as u64, if i == 3 { 0 } else { 5 }, 100)).collect();
        assert_eq!(validate_workload(&w(tasks)), vec![Violation { id: Some(3), rule: rule::BURST }]);
    }

    #[test]
    fn duplicate_id_is_flagged() {
        let tasks = vec![
            TaskSpec::new(0, 0, 1, 10),
            TaskSpec::new(1, 1, 1, 10),
            TaskSpec::new(2, 2, 1, 10),
            TaskSpec::new(2, 3, 1, 10),
        ];
        let v = validate_workload(&w(tasks));
        assert!(v.contains(&Violation { id: Some(2), rule: rule::UNIQUE_ID }));
    }

    #[test]
    fn other_rules() {
        let neg = TaskSpec::new(0, 5, 1, 5).with_value(Rational::from_i64(-1));
        let v = validate_workload(&w(vec![neg, TaskSpec::new(7, 0, 1, 3)]));
        assert!(v.contains(&Violation { id: Some(0), rule: rule::DEADLINE }));
        assert!(v.contains(&Violation { id: Some(0), rule: rule::VALUE }));
        assert!(v.contains(&Violation { id: Some(7), rule: rule::DENSE_ID }));
        assert!(v.contains(&Violation { id: Some(7), rule: rule::SORTED }));
        assert_eq!(validate_workload(&w(vec![])), vec![Violation { id: None, rule: rule::NON_EMPTY }]);
    }

    fn live(deadline: u64, remaining: u64) -> JobState<Rational> {
        let mut j = JobState::new(TaskSpec::new(0, 0, remaining.max(1), deadline));
        j.remaining = TimeDelta(remaining);
        j.status = JobStatus::Ready;
        j
    }

    #[test]
    fn slack_examples() {
        assert_eq!(slack(&live(3000, 3000), TimePoint(0)), Ok(0));
        assert_eq!(slack(&live(3000, 3000), TimePoint(1000)), Ok(-1000));
        assert_eq!(slack(&live(10000, 3000), TimePoint(2000)), Ok(5000));
    }

    #[test]
    fn slack_requires_live_job() {
        let j = JobState::<Rational>::new(TaskSpec::new(0, 0, 10, 100));
        assert!(slack(&j, TimePoint(0)).is_err());
    }

    proptest! {
        #[test]
        fn slack_is_antitone(dl in 1u64..100_000, rem in 1u64..50_000, now in 0u64..50_000, step in 1u64..1000) {
            let a = slack(&live(dl, rem), TimePoint(now)).unwrap();
            prop_assert!(slack(&live(dl, rem), TimePoint(now + step)).unwrap() < a);
            prop_assert!(slack(&live(dl, rem + step), TimePoint(now)).unwrap() < a);
        }
    }
}
