//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schedsim::engine::Segment;
use schedsim::model::{JobId, TaskSpec, Workload};
use schedsim::{Rational, Scalar, TimePoint};

/// Processor-demand criterion by enumeration: for every `t1` in the arrival
/// instants and `t2` in the deadlines, the work of jobs wholly inside
/// `[t1, t2]` fits in `t2 - t1`.
pub fn demand_feasible<V: Scalar>(w: &Workload<V>) -> bool {
    for a in &w.tasks {
        for d in &w.tasks {
            let (t1, t2) = (a.arrival.ticks(), d.deadline.ticks());
            if t2 <= t1 {
                continue;
            }
            let demand: u64 = w
                .tasks
                .iter()
                .filter(|t| t.arrival.ticks() >= t1 && t.deadline.ticks() <= t2)
                .map(|t| t.burst.ticks())
                .sum();
            if demand > t2 - t1 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefPolicy {
    Edf,
    Fcfs,
    Rr(u64),
}

/// Outcome of the tick-level reference simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefRun {
    /// Maximal runs of one job, adjacent pieces merged.
    pub segments: Vec<(JobId, u64, u64)>,
    pub completion: Vec<u64>,
    pub first_dispatch: Vec<u64>,
}

/// Advances one tick at a time with zero dispatch latency and no aborts.
pub fn tick_simulate<V: Scalar>(w: &Workload<V>, policy: RefPolicy) -> RefRun {
    let n = w.len();
    let task = |id: JobId| w.tasks.iter().find(|t| t.id == id).expect("dense ids");
    let mut remaining: Vec<u64> = (0..n).map(|id| task(id).burst.ticks()).collect();
    let mut completion = vec![u64::MAX; n];
    let mut first_dispatch = vec![u64::MAX; n];
    let mut fifo: Vec<JobId> = Vec::new();
    let mut used = 0u64;
    let mut running: Option<JobId> = None;
    let mut ticks: Vec<Option<JobId>> = Vec::new();
    let mut t = 0u64;
    let mut done = 0;
    while done < n {
        // Boundary bookkeeping in the engine's event order: completion,
        // quantum expiry, then arrivals.
        if let (Some(j), RefPolicy::Rr(q)) = (running, policy) {
            if used == q && remaining[j] > 0 {
                fifo.retain(|&x| x != j);
                fifo.push(j);
                used = 0;
            }
        }
        let mut arrivals: Vec<JobId> = w.tasks.iter().filter(|x| x.arrival.ticks() == t).map(|x| x.id).collect();
        arrivals.sort_unstable();
        fifo.extend(arrivals);
        let ready: Vec<JobId> = (0..n).filter(|&j| task(j).arrival.ticks() <= t && remaining[j] > 0).collect();
        let pick = match policy {
            RefPolicy::Edf => ready.iter().copied().min_by_key(|&j| {
                let s = task(j);
                (s.deadline, s.arrival, s.id)
            }),
            RefPolicy::Fcfs => ready.iter().copied().min_by_key(|&j| (task(j).arrival, j)),
            RefPolicy::Rr(_) => fifo.first().copied(),
        };
        if pick != running {
            used = 0;
        }
        running = pick;
        ticks.push(pick);
        if let Some(j) = pick {
            if first_dispatch[j] == u64::MAX {
                first_dispatch[j] = t;
            }
            remaining[j] -= 1;
            used += 1;
            if remaining[j] == 0 {
                completion[j] = t + 1;
                done += 1;
                fifo.retain(|&x| x != j);
                running = None;
                used = 0;
            }
        }
        t += 1;
    }
    let mut segments: Vec<(JobId, u64, u64)> = Vec::new();
    for (i, j) in ticks.iter().enumerate() {
        let Some(j) = *j else { continue };
        let i = i as u64;
        match segments.last_mut() {
            Some(last) if last.0 == j && last.2 == i => last.2 = i + 1,
            _ => segments.push((j, i, i + 1)),
        }
    }
    RefRun { segments, completion, first_dispatch }
}

/// Engine segments with adjacent pieces of the same job merged.
pub fn merged(segments: &[Segment]) -> Vec<(JobId, u64, u64)> {
    let mut out: Vec<(JobId, u64, u64)> = Vec::new();
    for s in segments.iter().filter(|s| !s.is_empty()) {
        match out.last_mut() {
            Some(last) if last.0 == s.job && last.2 == s.start.ticks() => last.2 = s.end.ticks(),
            _ => out.push((s.job, s.start.ticks(), s.end.ticks())),
        }
    }
    out
}

/// Small random workload: `n` jobs, arrivals in `[0, span)`, bursts in
/// `[100, max_burst]`, relative deadline `burst + slack`, slack in `[0, max_slack]`.
pub fn random_small(
    seed: u64,
    n: usize,
    span: u64,
    max_burst: u64,
    max_slack: u64,
    values: bool,
) -> Workload<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw: Vec<(u64, u64, u64, Rational)> = (0..n)
        .map(|_| {
            let arrival = rng.gen_range(0..span);
            let burst = rng.gen_range(100..=max_burst);
            let slack = rng.gen_range(0..=max_slack);
            let value = if values { Rational::from_u64(rng.gen_range(1..=10)) } else { Rational::from_u64(1) };
            (arrival, burst, arrival + burst + slack, value)
        })
        .collect();
    raw.sort_by_key(|r| r.0);
    let tasks =
        raw.into_iter().enumerate().map(|(id, (a, b, d, v))| TaskSpec::new(id, a, b, d).with_value(v)).collect();
    let mut w = Workload::new(format!("rand{seed}"), tasks);
    w.seed = Some(seed);
    w
}

pub fn at(t: u64) -> TimePoint {
    TimePoint(t)
}
