//! Value-density best-effort policies: DASA (without dependencies) and LBESA.
//!
//! Both build a tentative deadline-ordered schedule from the ready jobs and
//! dispatch its earliest-deadline member. They differ in how an overloaded
//! schedule is trimmed: DASA grows it greedily from the highest value
//! density and refuses insertions that break feasibility, LBESA starts from
//! every ready job and sheds the lowest value density until feasible.
//! Under underload both reduce to EDF.

use std::cmp::Ordering;

use crate::engine::{Decision, Policy, SchedView};
use crate::model::{JobId, JobState};
use crate::policy::classic::edf_select;
use crate::scalar::Scalar;
use crate::time::TimePoint;

/// Potential value density of one ready job.
#[derive(Debug, Clone, PartialEq)]
pub struct PvdEntry<V> {
    pub job: JobId,
    /// `value / remaining`.
    pub pvd: V,
    pub deadline: TimePoint,
}

impl<V: Scalar> PvdEntry<V> {
    pub fn of(job: &JobState<V>) -> Self {
        debug_assert!(!job.remaining.is_zero());
        PvdEntry {
            job: job.id(),
            pvd: job.spec.value.clone() / V::from_u64(job.remaining.ticks()),
            deadline: job.spec.deadline,
        }
    }
}

/// A deadline-ordered candidate schedule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TentativeSchedule {
    pub jobs: Vec<JobId>,
    pub feasible: bool,
}

/// Whether running `jobs` back to back from `now`, in the given
/// (deadline) order, finishes each one by its deadline.
pub fn feasible<V: Scalar>(jobs: &[&JobState<V>], now: TimePoint) -> bool {
    let mut finish = now.ticks();
    for j in jobs {
        finish += j.remaining.ticks();
        if finish > j.spec.deadline.ticks() {
            return false;
        }
    }
    true
}

fn by_deadline<V: Scalar>(a: &JobState<V>, b: &JobState<V>) -> Ordering {
    a.edf_key().cmp(&b.edf_key())
}

/// Jobs that can no longer gain value: their deadline is not in the future.
fn expired<V: Scalar>(ready: &[&JobState<V>], now: TimePoint) -> Vec<JobId> {
    ready.iter().filter(|j| j.spec.deadline <= now).map(|j| j.id()).collect()
}

/// Builds the DASA tentative schedule from the non-expired ready jobs.
pub fn dasa_schedule<V: Scalar>(ready: &[&JobState<V>], now: TimePoint) -> TentativeSchedule {
    let mut candidates: Vec<(&JobState<V>, PvdEntry<V>)> =
        ready.iter().filter(|j| j.spec.deadline > now).map(|&j| (j, PvdEntry::of(j))).collect();
    // Descending density; ties by earlier deadline, then lower id.
    candidates.sort_by(|(a, pa), (b, pb)| {
        pb.pvd.total_cmp_scalar(&pa.pvd).then_with(|| (a.spec.deadline, a.id()).cmp(&(b.spec.deadline, b.id())))
    });
    let mut schedule: Vec<&JobState<V>> = Vec::with_capacity(candidates.len());
    for (job, _) in candidates {
        let pos = schedule.partition_point(|s| by_deadline(s, job) == Ordering::Less);
        schedule.insert(pos, job);
        if !feasible(&schedule, now) {
            schedule.remove(pos);
        }
    }
    TentativeSchedule { jobs: schedule.iter().map(|j| j.id()).collect(), feasible: true }
}

/// Builds the LBESA tentative schedule: all non-expired ready jobs in
/// deadline order, shedding the lowest density (ties: later deadline, then
/// higher id) until feasible.
pub fn lbesa_schedule<V: Scalar>(ready: &[&JobState<V>], now: TimePoint) -> TentativeSchedule {
    let mut schedule: Vec<&JobState<V>> = ready.iter().copied().filter(|j| j.spec.deadline > now).collect();
    schedule.sort_by(|a, b| by_deadline(a, b));
    while !feasible(&schedule, now) {
        let victim = schedule
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let (pa, pb) = (PvdEntry::of(a).pvd, PvdEntry::of(b).pvd);
                pa.total_cmp_scalar(&pb).then_with(|| (b.spec.deadline, b.id()).cmp(&(a.spec.deadline, a.id())))
            })
            .map(|(i, _)| i)
            .expect("an infeasible schedule is non-empty");
        schedule.remove(victim);
    }
    TentativeSchedule { jobs: schedule.iter().map(|j| j.id()).collect(), feasible: true }
}

fn pick<V: Scalar>(
    schedule: &TentativeSchedule,
    ready: &[&JobState<V>],
    aborts: &[JobId],
    now: TimePoint,
) -> Option<JobId> {
    if let Some(&head) = schedule.jobs.first() {
        return Some(head);
    }
    // Nothing can meet its deadline; stay work-conserving with the EDF head.
    edf_select(ready.iter().copied().filter(|j| !aborts.contains(&j.id())), now)
}

/// DASA decision: the earliest-deadline member of the greedy schedule,
/// plus the jobs whose deadlines have passed.
pub fn dasa_select<V: Scalar>(ready: &[&JobState<V>], now: TimePoint) -> (Option<JobId>, Vec<JobId>) {
    let aborts = expired(ready, now);
    let schedule = dasa_schedule(ready, now);
    (pick(&schedule, ready, &aborts, now), aborts)
}

/// LBESA decision: the earliest-deadline survivor of shedding, plus the
/// jobs whose deadlines have passed. Shed jobs stay ready.
pub fn lbesa_select<V: Scalar>(ready: &[&JobState<V>], now: TimePoint) -> (Option<JobId>, Vec<JobId>) {
    let aborts = expired(ready, now);
    let schedule = lbesa_schedule(ready, now);
    (pick(&schedule, ready, &aborts, now), aborts)
}

fn decide(choice: (Option<JobId>, Vec<JobId>)) -> Decision {
    Decision { job: choice.0, quantum: None, aborts: choice.1 }
}

#[derive(Debug, Default, Clone)]
pub struct Dasa;

impl<V: Scalar> Policy<V> for Dasa {
    fn name(&self) -> &'static str {
        "dasa"
    }

    fn aborts_on_miss(&self) -> bool {
        true
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        let ready: Vec<_> = view.ready_jobs().collect();
        decide(dasa_select(&ready, view.now))
    }
}

#[derive(Debug, Default, Clone)]
pub struct Lbesa;

impl<V: Scalar> Policy<V> for Lbesa {
    fn name(&self) -> &'static str {
        "lbesa"
    }

    fn aborts_on_miss(&self) -> bool {
        true
    }

    fn select(&mut self, view: &SchedView<'_, V>) -> Decision {
        let ready: Vec<_> = view.ready_jobs().collect();
        decide(lbesa_select(&ready, view.now))
    }
}
