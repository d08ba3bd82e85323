use crate::model::{JobId, JobState};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

/// What a policy sees at a callback.
pub struct SchedView<'a, V> {
    pub now: TimePoint,
    /// All jobs of the run, indexed by id.
    pub jobs: &'a [JobState<V>],
    /// Live jobs (ready or running), ascending id.
    pub ready: &'a [JobId],
    /// The job holding the CPU, whether executing or still inside its dispatch window.
    pub current: Option<JobId>,
    /// Ticks left in the current job's slice; `None` means unbounded.
    pub slice_left: Option<TimeDelta>,
}

impl<'a, V: Scalar> SchedView<'a, V> {
    pub fn job(&self, id: JobId) -> &'a JobState<V> {
        &self.jobs[id]
    }

    pub fn ready_jobs(&self) -> impl Iterator<Item = &'a JobState<V>> + '_ {
        self.ready.iter().map(|&id| &self.jobs[id])
    }

    pub fn is_ready(&self, id: JobId) -> bool {
        self.ready.binary_search(&id).is_ok()
    }
}

/// Outcome of a scheduling decision.
///
/// Selecting the job that already holds the CPU continues it; `quantum`
/// then replaces its remaining slice. Selecting any other job dispatches it
/// with a fresh slice of `quantum` (unbounded when `None`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decision {
    pub job: Option<JobId>,
    pub quantum: Option<TimeDelta>,
    pub aborts: Vec<JobId>,
}

impl Decision {
    pub fn idle() -> Self {
        Decision::default()
    }

    pub fn run(job: JobId) -> Self {
        Decision { job: Some(job), ..Decision::default() }
    }

    pub fn slice(job: JobId, quantum: TimeDelta) -> Self {
        Decision { job: Some(job), quantum: Some(quantum), aborts: Vec::new() }
    }

    pub fn with_aborts(mut self, aborts: Vec<JobId>) -> Self {
        self.aborts = aborts;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admission {
    Accepted,
    Rejected(String),
}

/// A uniprocessor scheduling policy driven by the engine.
///
/// Callbacks are invoked in event order; `select` is invoked once at every
/// scheduling point, after all events at that instant have been delivered.
pub trait Policy<V: Scalar> {
    fn name(&self) -> &'static str;

    /// Whether late jobs are aborted at their deadline unless the config overrides it.
    fn aborts_on_miss(&self) -> bool {
        false
    }

    fn on_arrival(&mut self, _job: JobId, _view: &SchedView<'_, V>) -> Admission {
        Admission::Accepted
    }

    fn on_completion(&mut self, _job: JobId, _view: &SchedView<'_, V>) {}

    fn on_quantum_expiry(&mut self, _job: JobId, _view: &SchedView<'_, V>) {}

    /// The job left the system unfinished (deadline abort or policy abort).
    fn on_abort(&mut self, _job: JobId, _view: &SchedView<'_, V>) {}

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision;

    /// Queue level of a job, for policies that have levels.
    fn level_of(&self, _job: JobId) -> Option<usize> {
        None
    }

    fn level_count(&self) -> Option<usize> {
        None
    }
}

impl<V: Scalar, P: Policy<V> + ?Sized> Policy<V> for Box<P> {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn aborts_on_miss(&self) -> bool {
        (**self).aborts_on_miss()
    }
    fn on_arrival(&mut self, job: JobId, view: &SchedView<'_, V>) -> Admission {
        (**self).on_arrival(job, view)
    }
    fn on_completion(&mut self, job: JobId, view: &SchedView<'_, V>) {
        (**self).on_completion(job, view)
    }
    fn on_quantum_expiry(&mut self, job: JobId, view: &SchedView<'_, V>) {
        (**self).on_quantum_expiry(job, view)
    }
    fn on_abort(&mut self, job: JobId, view: &SchedView<'_, V>) {
        (**self).on_abort(job, view)
    }
    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        (**self).select(view)
    }
    fn level_of(&self, job: JobId) -> Option<usize> {
        (**self).level_of(job)
    }
    fn level_count(&self) -> Option<usize> {
        (**self).level_count()
    }
}
