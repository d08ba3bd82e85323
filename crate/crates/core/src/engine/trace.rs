use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{JobId, JobState, JobStatus};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

/// Kinds of trace records. A superset of the queued event kinds: the
/// engine also records its own decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Arrival,
    /// Arrival refused by the policy's admission test.
    Reject,
    Completion,
    Abort,
    QuantumExpiry,
    LatencyElapsed,
    Reconfigure,
    /// The policy's `select` was invoked.
    Schedule,
    Dispatch,
    Preempt,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Arrival => "arrival",
            TraceKind::Reject => "reject",
            TraceKind::Completion => "completion",
            TraceKind::Abort => "abort",
            TraceKind::QuantumExpiry => "quantum_expiry",
            TraceKind::LatencyElapsed => "latency_elapsed",
            TraceKind::Reconfigure => "reconfigure",
            TraceKind::Schedule => "schedule",
            TraceKind::Dispatch => "dispatch",
            TraceKind::Preempt => "preempt",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: TimePoint,
    pub kind: TraceKind,
    pub job: Option<JobId>,
    /// Queue level of the job, or the new level count for `Reconfigure`.
    pub level: Option<usize>,
}

/// One contiguous stretch of CPU execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub job: JobId,
    pub start: TimePoint,
    pub end: TimePoint,
}

impl Segment {
    pub fn len(&self) -> TimeDelta {
        TimeDelta(self.end.0 - self.start.0)
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Append-only record of one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub policy: String,
    pub workload: String,
    pub records: Vec<TraceRecord>,
    pub segments: Vec<Segment>,
    pub idle: TimeDelta,
    /// Ticks spent in dispatch latency and context switches.
    pub latency_ticks: TimeDelta,
    pub makespan: TimePoint,
    /// The run stopped at its horizon with live jobs.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceViolation {
    #[error("segments overlap at {0}")]
    Overlap(TimePoint),
    #[error("job {0} executed before its arrival")]
    BeforeArrival(JobId),
    #[error("job {job}: executed {executed} ticks, expected {expected}")]
    ExecutionMismatch { job: JobId, executed: u64, expected: String },
    #[error("conservation broken: busy {busy} + idle {idle} + latency {latency} != makespan {makespan}")]
    Conservation { busy: u64, idle: u64, latency: u64, makespan: u64 },
    #[error("records out of time order at index {0}")]
    Unordered(usize),
}

impl Trace {
    pub fn busy(&self) -> TimeDelta {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn executed_by(&self, job: JobId) -> TimeDelta {
        self.segments.iter().filter(|s| s.job == job).map(Segment::len).sum()
    }

    /// Checks ordering, exclusivity, per-job execution bounds and tick conservation.
    pub fn check<V: Scalar>(&self, jobs: &[JobState<V>]) -> Result<(), TraceViolation> {
        for (i, pair) in self.records.windows(2).enumerate() {
            if pair[1].time < pair[0].time {
                return Err(TraceViolation::Unordered(i + 1));
            }
        }
        for pair in self.segments.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(TraceViolation::Overlap(pair[1].start));
            }
        }
        for s in &self.segments {
            if s.start < jobs[s.job].spec.arrival {
                return Err(TraceViolation::BeforeArrival(s.job));
            }
        }
        for j in jobs {
            let executed = self.executed_by(j.id());
            let ok = match j.status {
                JobStatus::Completed => executed == j.spec.burst,
                JobStatus::NotArrived => executed.is_zero(),
                _ => executed < j.spec.burst,
            };
            if !ok || executed != j.executed() {
                return Err(TraceViolation::ExecutionMismatch {
                    job: j.id(),
                    executed: executed.ticks(),
                    expected: format!("{:?} with burst {}", j.status, j.spec.burst),
                });
            }
        }
        let (busy, idle, latency) = (self.busy().ticks(), self.idle.ticks(), self.latency_ticks.ticks());
        if busy + idle + latency != self.makespan.ticks() {
            return Err(TraceViolation::Conservation { busy, idle, latency, makespan: self.makespan.ticks() });
        }
        Ok(())
    }

    /// Stable CSV rendering: a `#summary` block, then events, then segments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#summary");
        let _ = writeln!(out, "#policy,{}", self.policy);
        let _ = writeln!(out, "#workload,{}", self.workload);
        let _ = writeln!(out, "#makespan,{}", self.makespan);
        let _ = writeln!(out, "#busy,{}", self.busy());
        let _ = writeln!(out, "#idle,{}", self.idle);
        let _ = writeln!(out, "#latency_ticks,{}", self.latency_ticks);
        let _ = writeln!(out, "#truncated,{}", self.truncated);
        let _ = writeln!(out, "#events");
        let _ = writeln!(out, "time,kind,job_id,level");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.time, r.kind, opt(r.job), opt(r.level));
        }
        let _ = writeln!(out, "#segments");
        let _ = writeln!(out, "job_id,start,end");
        for s in &self.segments {
            let _ = writeln!(out, "{},{},{}", s.job, s.start, s.end);
        }
        out
    }
}

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Instants at which the policy was consulted, in order.
pub fn scheduling_points(trace: &Trace) -> Vec<TimePoint> {
    trace.records.iter().filter(|r| r.kind == TraceKind::Schedule).map(|r| r.time).collect()
}
