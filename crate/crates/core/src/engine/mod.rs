//! Event-driven uniprocessor simulation loop.
//!
//! The engine owns job state, time accounting and the trace. It consults
//! the policy at every scheduling point (arrival, completion, quantum
//! expiry, abort) and applies dispatch latency whenever the CPU switches to
//! a job other than the last one that executed.

mod event;
mod policy;
mod trace;

use thiserror::Error;

use crate::model::{validate_workload, JobId, JobState, JobStatus, SimConfig, Violation, Workload};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

pub use event::{Event, EventKind, EventQueue};
pub use policy::{Admission, Decision, Policy, SchedView};
pub use trace::{scheduling_points, Segment, Trace, TraceKind, TraceRecord, TraceViolation};

/// Trace plus final job states of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun<V> {
    pub trace: Trace,
    pub jobs: Vec<JobState<V>>,
}

impl<V: Scalar> SimRun<V> {
    pub fn misses(&self) -> usize {
        self.jobs.iter().filter(|j| !j.met_deadline()).count()
    }

    pub fn accrued_value(&self) -> V {
        self.jobs.iter().filter(|j| j.met_deadline()).fold(V::zero(), |acc, j| acc + j.spec.value.clone())
    }
}

#[derive(Debug, Error)]
pub enum SimError<V: Scalar> {
    #[error("invalid workload: {}", join(.0))]
    InvalidWorkload(Vec<Violation>),
    #[error("policy contract violation at {time}: {reason}")]
    PolicyContractViolation { time: TimePoint, reason: String },
    #[error("horizon {horizon} reached with {unfinished} unfinished jobs")]
    HorizonExceeded { horizon: TimePoint, unfinished: usize, run: Box<SimRun<V>> },
    #[error("stalled at {time}: live jobs but nothing scheduled")]
    Stalled { time: TimePoint, run: Box<SimRun<V>> },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cpu {
    Idle,
    Switching { job: JobId, until: TimePoint, quantum: Option<TimeDelta> },
    Running { job: JobId, since: TimePoint, slice_end: Option<TimePoint> },
}

impl Cpu {
    fn job(self) -> Option<JobId> {
        match self {
            Cpu::Idle => None,
            Cpu::Switching { job, .. } | Cpu::Running { job, .. } => Some(job),
        }
    }
}

fn view<'a, V>(now: TimePoint, jobs: &'a [JobState<V>], live: &'a [JobId], cpu: Cpu) -> SchedView<'a, V> {
    let slice_left = match cpu {
        Cpu::Idle => None,
        Cpu::Switching { quantum, .. } => quantum,
        Cpu::Running { slice_end, .. } => slice_end.map(|e| TimeDelta(e.0 - now.0)),
    };
    SchedView { now, jobs, ready: live, current: cpu.job(), slice_left }
}

struct Engine<'p, V, P: ?Sized> {
    policy: &'p mut P,
    jobs: Vec<JobState<V>>,
    live: Vec<JobId>,
    queue: EventQueue,
    now: TimePoint,
    cpu: Cpu,
    epoch: u64,
    last_ran: Option<JobId>,
    overhead: TimeDelta,
    abort_on_miss: bool,
    trace: Trace,
    levels: Option<usize>,
}

/// Simulates `w` under `policy` to quiescence or to the configured horizon.
pub fn run<V: Scalar, P: Policy<V> + ?Sized>(
    w: &Workload<V>,
    policy: &mut P,
    cfg: &SimConfig<V>,
) -> Result<SimRun<V>, SimError<V>> {
    let violations = validate_workload(w);
    if !violations.is_empty() {
        return Err(SimError::InvalidWorkload(violations));
    }
    let mut slots: Vec<Option<JobState<V>>> = vec![None; w.len()];
    for t in &w.tasks {
        slots[t.id] = Some(JobState::new(t.clone()));
    }
    let jobs: Vec<JobState<V>> = slots.into_iter().map(|j| j.expect("dense ids")).collect();

    let mut queue = EventQueue::new();
    for t in &w.tasks {
        queue.push(t.arrival, EventKind::Arrival, Some(t.id), 0);
    }
    let abort_on_miss = cfg.abort_on_miss.unwrap_or_else(|| policy.aborts_on_miss());
    let levels = policy.level_count();
    let trace = Trace { policy: policy.name().to_string(), workload: w.name.clone(), ..Trace::default() };
    let engine = Engine {
        policy,
        jobs,
        live: Vec::new(),
        queue,
        now: TimePoint::ZERO,
        cpu: Cpu::Idle,
        epoch: 0,
        last_ran: None,
        overhead: cfg.switch_overhead(),
        abort_on_miss,
        trace,
        levels,
    };
    engine.simulate(cfg.horizon)
}

impl<'p, V: Scalar, P: Policy<V> + ?Sized> Engine<'p, V, P> {
    fn simulate(mut self, horizon: Option<TimePoint>) -> Result<SimRun<V>, SimError<V>> {
        loop {
            self.drop_stale();
            let Some(t) = self.queue.peek().map(|e| e.time) else { break };
            if let Some(h) = horizon {
                if t > h {
                    if h > self.now {
                        self.advance(h);
                    }
                    self.close_segment();
                    if let Cpu::Running { job, slice_end, .. } = self.cpu {
                        self.cpu = Cpu::Running { job, since: self.now, slice_end };
                    }
                    self.trace.truncated = true;
                    self.trace.makespan = self.now;
                    let unfinished = self
                        .jobs
                        .iter()
                        .filter(|j| !matches!(j.status, JobStatus::Completed | JobStatus::Aborted))
                        .count();
                    return Err(SimError::HorizonExceeded { horizon: h, unfinished, run: Box::new(self.finish()) });
                }
            }
            self.advance(t);
            let mut point = false;
            while self.queue.peek().is_some_and(|e| e.time == t) {
                let ev = self.queue.pop().expect("peeked");
                if self.is_stale(&ev) {
                    continue;
                }
                point |= self.handle(ev);
            }
            if point {
                self.schedule()?;
            }
        }
        self.trace.makespan = self.now;
        if !self.live.is_empty() {
            let time = self.now;
            return Err(SimError::Stalled { time, run: Box::new(self.finish()) });
        }
        Ok(self.finish())
    }

    fn finish(self) -> SimRun<V> {
        SimRun { trace: self.trace, jobs: self.jobs }
    }

    fn drop_stale(&mut self) {
        while let Some(ev) = self.queue.peek().copied() {
            if !self.is_stale(&ev) {
                break;
            }
            self.queue.pop();
        }
    }

    fn is_stale(&self, ev: &Event) -> bool {
        match ev.kind {
            EventKind::Arrival | EventKind::Reconfigure => false,
            EventKind::Deadline => !self.jobs[ev.job.expect("deadline event names a job")].status.is_live(),
            EventKind::Completion | EventKind::QuantumExpiry => {
                ev.epoch != self.epoch || !matches!(self.cpu, Cpu::Running { job, .. } if Some(job) == ev.job)
            }
            EventKind::LatencyElapsed => {
                ev.epoch != self.epoch || !matches!(self.cpu, Cpu::Switching { job, .. } if Some(job) == ev.job)
            }
        }
    }

    fn advance(&mut self, t: TimePoint) {
        let dt = t.since(self.now).expect("event queue never goes back in time");
        match self.cpu {
            Cpu::Idle => self.trace.idle += dt,
            Cpu::Switching { .. } => self.trace.latency_ticks += dt,
            Cpu::Running { job, .. } => self.jobs[job].remaining -= dt,
        }
        self.now = t;
    }

    fn record(&mut self, kind: TraceKind, job: Option<JobId>) {
        let level = match kind {
            TraceKind::Reconfigure => self.levels,
            _ => job.and_then(|j| self.policy.level_of(j)),
        };
        self.trace.records.push(TraceRecord { time: self.now, kind, job, level });
    }

    fn note_levels(&mut self) {
        let current = self.policy.level_count();
        if current != self.levels {
            self.levels = current;
            self.record(TraceKind::Reconfigure, None);
        }
    }

    fn set_live(&mut self, job: JobId, live: bool) {
        match (self.live.binary_search(&job), live) {
            (Err(pos), true) => self.live.insert(pos, job),
            (Ok(pos), false) => {
                self.live.remove(pos);
            }
            _ => {}
        }
    }

    fn close_segment(&mut self) {
        if let Cpu::Running { job, since, .. } = self.cpu {
            if self.now > since {
                self.trace.segments.push(Segment { job, start: since, end: self.now });
            }
        }
    }

    fn release_cpu(&mut self) {
        self.close_segment();
        self.cpu = Cpu::Idle;
        self.epoch += 1;
    }

    /// Returns whether the event makes `now` a scheduling point.
    fn handle(&mut self, ev: Event) -> bool {
        match ev.kind {
            EventKind::Completion => {
                let job = ev.job.expect("completion names a job");
                self.release_cpu();
                let j = &mut self.jobs[job];
                j.status = JobStatus::Completed;
                j.completion = Some(self.now);
                self.set_live(job, false);
                self.record(TraceKind::Completion, Some(job));
                let v = view(self.now, &self.jobs, &self.live, self.cpu);
                self.policy.on_completion(job, &v);
                self.note_levels();
                true
            }
            EventKind::Deadline => {
                self.abort(ev.job.expect("deadline names a job"));
                true
            }
            EventKind::QuantumExpiry => {
                let job = ev.job.expect("expiry names a job");
                self.release_cpu();
                self.jobs[job].status = JobStatus::Ready;
                self.record(TraceKind::QuantumExpiry, Some(job));
                let v = view(self.now, &self.jobs, &self.live, self.cpu);
                self.policy.on_quantum_expiry(job, &v);
                self.note_levels();
                true
            }
            EventKind::Arrival => {
                let job = ev.job.expect("arrival names a job");
                let j = &mut self.jobs[job];
                j.status = JobStatus::Ready;
                j.last_enqueue = self.now;
                self.set_live(job, true);
                let v = view(self.now, &self.jobs, &self.live, self.cpu);
                let admission = self.policy.on_arrival(job, &v);
                self.record(TraceKind::Arrival, Some(job));
                match admission {
                    Admission::Accepted => {
                        if self.abort_on_miss {
                            let deadline = self.jobs[job].spec.deadline;
                            self.queue.push(deadline, EventKind::Deadline, Some(job), self.epoch);
                        }
                    }
                    Admission::Rejected(_) => {
                        self.jobs[job].status = JobStatus::Aborted;
                        self.set_live(job, false);
                        self.record(TraceKind::Reject, Some(job));
                    }
                }
                self.note_levels();
                true
            }
            EventKind::LatencyElapsed => {
                let Cpu::Switching { job, quantum, .. } = self.cpu else { unreachable!("checked by is_stale") };
                self.record(TraceKind::LatencyElapsed, Some(job));
                self.start_running(job, quantum);
                false
            }
            EventKind::Reconfigure => {
                self.record(TraceKind::Reconfigure, None);
                false
            }
        }
    }

    fn abort(&mut self, job: JobId) {
        if self.cpu.job() == Some(job) {
            self.release_cpu();
        }
        self.jobs[job].status = JobStatus::Aborted;
        self.set_live(job, false);
        self.record(TraceKind::Abort, Some(job));
        let v = view(self.now, &self.jobs, &self.live, self.cpu);
        self.policy.on_abort(job, &v);
        self.note_levels();
    }

    fn start_running(&mut self, job: JobId, quantum: Option<TimeDelta>) {
        let now = self.now;
        self.epoch += 1;
        self.cpu = Cpu::Running { job, since: now, slice_end: quantum.map(|q| now + q) };
        self.last_ran = Some(job);
        let j = &mut self.jobs[job];
        j.status = JobStatus::Running;
        j.first_dispatch.get_or_insert(now);
        let remaining = j.remaining;
        self.push_cpu_events(job, remaining, quantum);
    }

    fn push_cpu_events(&mut self, job: JobId, remaining: TimeDelta, quantum: Option<TimeDelta>) {
        self.queue.push(self.now + remaining, EventKind::Completion, Some(job), self.epoch);
        if let Some(q) = quantum.filter(|&q| q < remaining) {
            self.queue.push(self.now + q, EventKind::QuantumExpiry, Some(job), self.epoch);
        }
    }

    fn violation(&self, reason: String) -> SimError<V> {
        SimError::PolicyContractViolation { time: self.now, reason }
    }

    fn schedule(&mut self) -> Result<(), SimError<V>> {
        let v = view(self.now, &self.jobs, &self.live, self.cpu);
        let decision = self.policy.select(&v);
        self.record(TraceKind::Schedule, None);
        self.note_levels();

        for a in &decision.aborts {
            if self.live.binary_search(a).is_err() {
                return Err(self.violation(format!("abort of non-ready job {a}")));
            }
        }
        if let Some(j) = decision.job {
            if self.live.binary_search(&j).is_err() {
                return Err(self.violation(format!("selected non-ready job {j}")));
            }
            if decision.aborts.contains(&j) {
                return Err(self.violation(format!("selected job {j} is also aborted")));
            }
        }
        if decision.quantum == Some(TimeDelta::ZERO) {
            return Err(self.violation("zero-length quantum".to_string()));
        }
        for &a in &decision.aborts {
            if self.jobs[a].status.is_live() {
                self.abort(a);
            }
        }

        let current = self.cpu.job();
        match decision.job {
            None => {
                if let Some(c) = current {
                    self.preempt(c);
                }
            }
            Some(j) if Some(j) == current => match self.cpu {
                Cpu::Running { job, since, .. } => {
                    self.epoch += 1;
                    self.cpu = Cpu::Running { job, since, slice_end: decision.quantum.map(|q| self.now + q) };
                    let remaining = self.jobs[job].remaining;
                    self.push_cpu_events(job, remaining, decision.quantum);
                }
                Cpu::Switching { job, until, .. } => {
                    self.cpu = Cpu::Switching { job, until, quantum: decision.quantum };
                }
                Cpu::Idle => unreachable!("current job implies a busy CPU"),
            },
            Some(j) => {
                if let Some(c) = current {
                    self.preempt(c);
                }
                self.dispatch(j, decision.quantum);
            }
        }
        Ok(())
    }

    fn preempt(&mut self, job: JobId) {
        self.release_cpu();
        self.jobs[job].status = JobStatus::Ready;
        self.record(TraceKind::Preempt, Some(job));
    }

    fn dispatch(&mut self, job: JobId, quantum: Option<TimeDelta>) {
        self.record(TraceKind::Dispatch, Some(job));
        let overhead = if self.last_ran == Some(job) { TimeDelta::ZERO } else { self.overhead };
        if overhead.is_zero() {
            self.start_running(job, quantum);
        } else {
            self.epoch += 1;
            let until = self.now + overhead;
            self.cpu = Cpu::Switching { job, until, quantum };
            self.queue.push(until, EventKind::LatencyElapsed, Some(job), self.epoch);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskSpec;
    use crate::policy::{Edf, RoundRobin, RrConfig};
    use crate::scalar::Rational;

    type W = Workload<Rational>;

    fn spans(run: &SimRun<Rational>) -> Vec<(JobId, u64, u64)> {
        run.trace.segments.iter().map(|s| (s.job, s.start.ticks(), s.end.ticks())).collect()
    }

    fn one_job() -> W {
        Workload::new("one", vec![TaskSpec::new(0, 0, 3000, 3000)])
    }

    fn overload() -> W {
        Workload::new("over", vec![TaskSpec::new(0, 0, 3000, 3000), TaskSpec::new(1, 0, 3000, 3100)])
    }

    struct Lazy;

    impl Policy<Rational> for Lazy {
        fn name(&self) -> &'static str {
            "lazy"
        }

        fn select(&mut self, _view: &SchedView<'_, Rational>) -> Decision {
            Decision::idle()
        }
    }

    struct Rogue;

    impl Policy<Rational> for Rogue {
        fn name(&self) -> &'static str {
            "rogue"
        }

        fn select(&mut self, _view: &SchedView<'_, Rational>) -> Decision {
            Decision::run(7)
        }
    }

    #[test]
    fn single_job_meets_its_deadline() {
        let r = run(&one_job(), &mut Edf, &SimConfig::default()).unwrap();
        assert_eq!(r.jobs[0].completion, Some(TimePoint(3000)));
        assert!(r.jobs[0].met_deadline());
        assert_eq!(scheduling_points(&r.trace), vec![TimePoint(0), TimePoint(3000)]);
    }

    #[test]
    fn dispatch_latency_delays_first_execution() {
        let r = run(&one_job(), &mut Edf, &SimConfig::default().with_dispatch_latency(1000)).unwrap();
        let j = &r.jobs[0];
        assert_eq!((j.first_dispatch, j.completion), (Some(TimePoint(1000)), Some(TimePoint(4000))));
        assert!(!j.met_deadline());
        assert_eq!(r.trace.latency_ticks, TimeDelta(1000));
        assert_eq!(scheduling_points(&r.trace), vec![TimePoint(0), TimePoint(4000)]);
        let expected = "#summary\n#policy,edf\n#workload,one\n#makespan,4000\n#busy,3000\n#idle,0\n\
                        #latency_ticks,1000\n#truncated,false\n#events\ntime,kind,job_id,level\n0,arrival,0,\n\
                        0,schedule,,\n0,dispatch,0,\n1000,latency_elapsed,0,\n4000,completion,0,\n4000,schedule,,\n\
                        #segments\njob_id,start,end\n0,1000,4000\n";
        assert_eq!(r.trace.to_csv(), expected);
    }

    #[test]
    fn edf_two_jobs_run_nearest_deadline_first() {
        let w: W = Workload::new("two", vec![TaskSpec::new(0, 0, 2000, 8000), TaskSpec::new(1, 0, 2000, 4000)]);
        let r = run(&w, &mut Edf, &SimConfig::default()).unwrap();
        assert_eq!(spans(&r), vec![(1, 0, 2000), (0, 2000, 4000)]);
        assert_eq!(scheduling_points(&r.trace), vec![TimePoint(0), TimePoint(2000), TimePoint(4000)]);
    }

    #[test]
    fn late_job_runs_on_without_aborts() {
        let r = run(&overload(), &mut Edf, &SimConfig::default()).unwrap();
        assert_eq!(spans(&r), vec![(0, 0, 3000), (1, 3000, 6000)]);
        assert_eq!(r.misses(), 1);
    }

    #[test]
    fn abort_on_miss_stops_the_late_job_at_its_deadline() {
        let cfg = SimConfig { abort_on_miss: Some(true), ..SimConfig::default() };
        let r = run(&overload(), &mut Edf, &cfg).unwrap();
        assert_eq!(spans(&r), vec![(0, 0, 3000), (1, 3000, 3100)]);
        assert_eq!(r.jobs[1].status, JobStatus::Aborted);
        assert_eq!(r.trace.makespan, TimePoint(3100));
        r.trace.check(&r.jobs).unwrap();
    }

    #[test]
    fn latency_applies_on_switches_but_not_on_resume() {
        let cfg = SimConfig::default().with_dispatch_latency(100);
        let solo: W = Workload::new("solo", vec![TaskSpec::new(0, 0, 2500, 10_000)]);
        let r = run(&solo, &mut RoundRobin::new(RrConfig::default()), &cfg).unwrap();
        assert_eq!(r.trace.latency_ticks, TimeDelta(100));
        assert_eq!(r.jobs[0].completion, Some(TimePoint(2600)));

        let pair: W = Workload::new("pair", vec![TaskSpec::new(0, 0, 2500, 10_000), TaskSpec::new(1, 0, 2500, 10_000)]);
        let r = run(&pair, &mut RoundRobin::new(RrConfig::default()), &cfg).unwrap();
        assert_eq!(
            spans(&r),
            vec![(0, 100, 1100), (1, 1200, 2200), (0, 2300, 3300), (1, 3400, 4400), (0, 4500, 5000), (1, 5100, 5600)]
        );
        assert_eq!(r.trace.latency_ticks, TimeDelta(600));
        r.trace.check(&r.jobs).unwrap();
    }

    #[test]
    fn completion_wins_over_simultaneous_quantum_expiry() {
        let w: W = Workload::new("exact", vec![TaskSpec::new(0, 0, 1000, 5000)]);
        let r = run(&w, &mut RoundRobin::new(RrConfig::default()), &SimConfig::default()).unwrap();
        assert!(r.trace.records.iter().all(|rec| rec.kind != TraceKind::QuantumExpiry));
        assert_eq!(r.jobs[0].completion, Some(TimePoint(1000)));
    }

    #[test]
    fn horizon_truncates_the_run() {
        let cfg = SimConfig { horizon: Some(TimePoint(1500)), ..SimConfig::default() };
        match run(&one_job(), &mut Edf, &cfg) {
            Err(SimError::HorizonExceeded { horizon, unfinished, run }) => {
                assert_eq!((horizon, unfinished), (TimePoint(1500), 1));
                assert!(run.trace.truncated);
                assert_eq!(run.trace.executed_by(0), TimeDelta(1500));
                run.trace.check(&run.jobs).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contract_and_stall_errors() {
        assert!(matches!(
            run(&one_job(), &mut Rogue, &SimConfig::default()),
            Err(SimError::PolicyContractViolation { time: TimePoint(0), .. })
        ));
        assert!(matches!(run(&one_job(), &mut Lazy, &SimConfig::default()), Err(SimError::Stalled { .. })));
        let bad = Workload::new("bad", vec![TaskSpec::<Rational>::new(0, 5, 0, 5)]);
        match run(&bad, &mut Edf, &SimConfig::default()) {
            Err(SimError::InvalidWorkload(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
