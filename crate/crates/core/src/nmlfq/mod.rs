//! Dynamic multi-level feedback queue.
//!
//! New arrivals enter level 0, which is kept in deadline order. A job that
//! uses up its quantum drops one level; a job that waits too long climbs
//! one level; a job whose slack falls below `urgency_factor * remaining`
//! jumps straight to level 0. The level count and quanta are recomputed from
//! the ready population at every arrival and departure.
//!
//! In planning mode an arrival is admitted only if the admitted set stays
//! feasible, and dispatch never spends more time on a non-EDF choice than
//! the admitted set's slack allows, so every admitted job meets its deadline
//! when there is no dispatch latency.

mod config;
mod table;

use crate::engine::{Admission, Decision, Policy, SchedView};
use crate::model::{slack, JobId, JobState};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

pub use config::{reconfigure, AdmissionMode, Levels, NmlfqConfig};
pub use table::{Entry, ReadyTable, TableError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmitDecision {
    Accepted,
    Rejected(String),
}

/// Processor-demand test from `now`: every job of `admitted ∪ {job}` can
/// finish by its deadline when the set runs in deadline order.
pub fn planning_admit<V: Scalar>(
    admitted: &[&JobState<V>],
    job: &JobState<V>,
    now: TimePoint,
    cfg: &NmlfqConfig<V>,
) -> AdmitDecision {
    if cfg.admission == AdmissionMode::AcceptAll {
        return AdmitDecision::Accepted;
    }
    let mut set: Vec<&JobState<V>> = admitted.iter().copied().filter(|j| j.id() != job.id()).collect();
    set.push(job);
    set.sort_by_key(|j| j.edf_key());
    let mut demand = 0u64;
    for j in &set {
        demand += j.remaining.ticks();
        let window = j.spec.deadline.ticks().saturating_sub(now.ticks());
        if demand > window {
            return AdmitDecision::Rejected(format!(
                "demand {demand} exceeds window {window} up to deadline {}",
                j.spec.deadline
            ));
        }
    }
    AdmitDecision::Accepted
}

/// How long `candidate` may run before some admitted job would lose its
/// guarantee: the least slack over the deadline-ordered prefixes that do
/// not contain it. `None` when unbounded (the candidate is the EDF head).
pub fn planning_budget<V: Scalar>(admitted: &[&JobState<V>], candidate: JobId, now: TimePoint) -> Option<i64> {
    let mut set: Vec<&JobState<V>> = admitted.to_vec();
    set.sort_by_key(|j| j.edf_key());
    let mut cumulative = 0i64;
    let mut budget: Option<i64> = None;
    for j in set {
        if j.id() == candidate {
            break;
        }
        cumulative += j.remaining.ticks() as i64;
        let s = j.spec.deadline.signed_diff(now) - cumulative;
        budget = Some(budget.map_or(s, |b| b.min(s)));
    }
    budget
}

/// Urgency promotion and aging, then the dispatch choice: the head of the
/// highest non-empty level, except that `current` keeps the CPU unless
/// some job sits on a strictly higher level.
pub fn nmlfq_select<V: Scalar>(
    table: &mut ReadyTable,
    jobs: &[JobState<V>],
    current: Option<JobId>,
    now: TimePoint,
    cfg: &NmlfqConfig<V>,
) -> Result<(JobId, usize), TableError> {
    if table.is_empty() {
        return Err(TableError::EmptyTable);
    }
    let members: Vec<JobId> = table.jobs().collect();
    for &id in &members {
        let job = &jobs[id];
        if let Ok(s) = slack(job, now) {
            let bound = cfg.urgency_factor.clone() * V::from_u64(job.remaining.ticks());
            if V::from_i64(s) < bound && table.level_of(id) != Some(0) {
                table.add_at_front(job, now);
            }
        }
    }
    let threshold = cfg.aging_threshold_for(table.level_count());
    for &id in &members {
        if Some(id) == current {
            continue;
        }
        let entry = *table.entry(id).expect("member");
        if entry.level > 0 && now.since(entry.last_enqueue).is_ok_and(|w| w >= threshold) {
            if entry.level == 1 {
                table.add_at_front(&jobs[id], now);
            } else {
                table.move_to(id, entry.level - 1, now);
            }
        }
    }
    match current.and_then(|c| table.level_of(c).map(|l| (c, l))) {
        Some((c, lc)) => match table.head_excluding(c) {
            Some((h, lh)) if lh < lc => Ok((h, lh)),
            _ => Ok((c, lc)),
        },
        None => Ok(table.head().expect("non-empty")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Grant {
    job: JobId,
    quantum: TimeDelta,
    remaining_at_grant: TimeDelta,
}

/// The dynamic multi-level feedback queue policy.
#[derive(Debug, Clone)]
pub struct Nmlfq<V> {
    cfg: NmlfqConfig<V>,
    table: ReadyTable,
    levels: Levels,
    grant: Option<Grant>,
}

impl<V: Scalar> Nmlfq<V> {
    pub fn new(cfg: NmlfqConfig<V>) -> Self {
        cfg.validate().expect("invalid NMLFQ configuration");
        let levels = reconfigure(0, &cfg);
        Nmlfq { table: ReadyTable::new(levels.count), levels, cfg, grant: None }
    }

    pub fn table(&self) -> &ReadyTable {
        &self.table
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    fn reconfigure(&mut self) {
        self.levels = reconfigure(self.table.len(), &self.cfg);
        self.table.resize(self.levels.count);
    }

    fn depart(&mut self, job: JobId) {
        self.table.remove(job);
        if self.grant.is_some_and(|g| g.job == job) {
            self.grant = None;
        }
        self.reconfigure();
    }

    fn quantum_of(&self, job: JobId) -> TimeDelta {
        self.levels.quanta[self.table.level_of(job).expect("member")]
    }

    /// Slice left on the current grant if `job` holds it, else a fresh quantum.
    fn slice_for(&self, job: JobId, jobs: &[JobState<V>], current: Option<JobId>) -> (TimeDelta, bool) {
        match self.grant {
            Some(g) if g.job == job && current == Some(job) => {
                let used = g.remaining_at_grant - jobs[job].remaining;
                (g.quantum.saturating_sub(used).max(TimeDelta(1)), false)
            }
            _ => (self.quantum_of(job), true),
        }
    }

    fn admitted<'a>(&self, jobs: &'a [JobState<V>]) -> Vec<&'a JobState<V>> {
        self.table.jobs().map(|id| &jobs[id]).collect()
    }
}

impl<V: Scalar> Policy<V> for Nmlfq<V> {
    fn name(&self) -> &'static str {
        "nmlfq"
    }

    fn on_arrival(&mut self, job: JobId, view: &SchedView<'_, V>) -> Admission {
        let state = view.job(job);
        if let AdmitDecision::Rejected(reason) = planning_admit(&self.admitted(view.jobs), state, view.now, &self.cfg) {
            return Admission::Rejected(reason);
        }
        self.table.insert_into_pqueue(state, view.now).expect("arrivals are unique");
        self.reconfigure();
        Admission::Accepted
    }

    fn on_completion(&mut self, job: JobId, _view: &SchedView<'_, V>) {
        self.depart(job);
    }

    fn on_abort(&mut self, job: JobId, _view: &SchedView<'_, V>) {
        self.depart(job);
    }

    fn on_quantum_expiry(&mut self, job: JobId, view: &SchedView<'_, V>) {
        let exhausted = match self.grant.take() {
            Some(g) if g.job == job => g.remaining_at_grant - view.job(job).remaining >= g.quantum,
            _ => true,
        };
        // A slice cut short by the planning budget is not a used-up quantum.
        if exhausted {
            if let Some(level) = self.table.level_of(job) {
                let bottom = self.table.level_count() - 1;
                self.table.move_to(job, (level + 1).min(bottom), view.now);
            }
        }
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        let current = view.current.filter(|&c| self.table.contains(c));
        let Ok((mut job, _)) = nmlfq_select(&mut self.table, view.jobs, current, view.now, &self.cfg) else {
            return Decision::idle();
        };
        let (mut slice, mut fresh) = self.slice_for(job, view.jobs, current);
        if self.cfg.admission == AdmissionMode::Planning {
            let admitted = self.admitted(view.jobs);
            match planning_budget(&admitted, job, view.now) {
                Some(b) if b <= 0 => {
                    job = admitted.iter().min_by_key(|j| j.edf_key()).expect("non-empty").id();
                    (slice, fresh) = self.slice_for(job, view.jobs, current);
                }
                Some(b) => slice = slice.min(TimeDelta(b as u64)),
                None => {}
            }
        }
        if fresh {
            self.grant =
                Some(Grant { job, quantum: self.quantum_of(job), remaining_at_grant: view.job(job).remaining });
        }
        Decision::slice(job, slice)
    }

    fn level_of(&self, job: JobId) -> Option<usize> {
        self.table.level_of(job)
    }

    fn level_count(&self) -> Option<usize> {
        Some(self.levels.count)
    }
}
