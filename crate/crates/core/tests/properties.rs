//! Run-level invariants over random workloads and every policy.

mod common;

use common::{demand_feasible, random_small};
use proptest::prelude::*;
use schedsim::engine::{run, SimRun, TraceKind};
use schedsim::harness::{run_one, PolicyKind};
use schedsim::metrics::compute;
use schedsim::model::{JobStatus, TaskSpec};
use schedsim::nmlfq::{AdmissionMode, Nmlfq};
use schedsim::{Rational, Scalar, SimConfig, SimConfigF64, TaskSpecF64, TimeDelta, Workload, WorkloadF64};

fn run_kind(w: &Workload, kind: PolicyKind, cfg: &SimConfig) -> SimRun<Rational> {
    run_one(w, kind, cfg).expect("run succeeds").run
}

/// Time at which each job left the system, from completion, abort or reject records.
fn departures(r: &SimRun<Rational>) -> Vec<u64> {
    let mut out = vec![u64::MAX; r.jobs.len()];
    for rec in &r.trace.records {
        if matches!(rec.kind, TraceKind::Completion | TraceKind::Abort | TraceKind::Reject) {
            let j = rec.job.expect("departure names its job");
            out[j] = out[j].min(rec.time.ticks());
        }
    }
    out
}

fn any_config() -> impl Strategy<Value = SimConfig> {
    (0u64..300, 0u64..100, 1u64..2000, prop::bool::ANY).prop_map(|(lat, cs, q, accept_all)| {
        let mut cfg =
            SimConfig { dispatch_latency: TimeDelta(lat), context_switch_cost: TimeDelta(cs), ..SimConfig::default() };
        cfg.rr.quantum = TimeDelta(q);
        cfg.nmlfq.base_quantum = TimeDelta(q);
        if accept_all {
            cfg.nmlfq.admission = AdmissionMode::AcceptAll;
        }
        cfg
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn traces_conserve_time_and_are_deterministic(
        seed in any::<u64>(),
        n in 1usize..=10,
        cfg in any_config(),
    ) {
        let w = random_small(seed, n, 20_000, 4000, 6000, true);
        for kind in PolicyKind::ALL {
            let a = run_kind(&w, kind, &cfg);
            let b = run_kind(&w, kind, &cfg);
            prop_assert_eq!(a.trace.to_csv(), b.trace.to_csv());
            prop_assert!(a.trace.check(&a.jobs).is_ok(), "{kind}: {:?}", a.trace.check(&a.jobs));
            let t = &a.trace;
            prop_assert_eq!(t.busy() + t.idle + t.latency_ticks, TimeDelta(t.makespan.ticks()));
            for j in &a.jobs {
                prop_assert!(!j.status.is_live() && j.status != JobStatus::NotArrived);
                prop_assert!(t.executed_by(j.id()) <= j.spec.burst);
                if j.status == JobStatus::Completed {
                    prop_assert_eq!(t.executed_by(j.id()), j.spec.burst);
                }
            }
        }
    }

    #[test]
    fn no_idling_while_work_is_pending(seed in any::<u64>(), n in 1usize..=10) {
        let w = random_small(seed, n, 20_000, 4000, 6000, true);
        let cfg = SimConfig::default();
        for kind in PolicyKind::ALL {
            let r = run_kind(&w, kind, &cfg);
            let gone = departures(&r);
            let mut busy: Vec<(u64, u64)> = r.trace.segments.iter().map(|s| (s.start.ticks(), s.end.ticks())).collect();
            busy.sort_unstable();
            let mut gaps = Vec::new();
            let mut cursor = 0;
            for (s, e) in busy {
                if s > cursor {
                    gaps.push((cursor, s));
                }
                cursor = cursor.max(e);
            }
            for (a, b) in gaps {
                for (j, spec) in w.tasks.iter().map(|t| (t.id, t)) {
                    let live_from = spec.arrival.ticks().max(a);
                    let live_to = gone[j].min(b);
                    prop_assert!(live_from >= live_to, "{kind}: job {j} pending during idle [{a}, {b})");
                }
            }
        }
    }

    #[test]
    fn metrics_identities(seed in any::<u64>(), n in 1usize..=10, cfg in any_config()) {
        let w = random_small(seed, n, 20_000, 4000, 6000, true);
        for kind in PolicyKind::ALL {
            let r = run_kind(&w, kind, &cfg);
            let m = compute(&r.trace, &r.jobs).unwrap();
            prop_assert_eq!(&m, &compute(&r.trace, &r.jobs).unwrap());
            prop_assert!(m.cpu_utilization >= Rational::from_u64(0) && m.cpu_utilization <= Rational::from_u64(1));
            for j in &m.per_job {
                if let (Some(t), Some(wt)) = (j.turnaround, j.waiting) {
                    prop_assert_eq!(t, wt + j.burst);
                    prop_assert!(j.response.unwrap() <= t);
                }
                let expected = if j.met_deadline { w.tasks[j.job].value } else { Rational::from_u64(0) };
                prop_assert_eq!(j.value_accrued, expected);
            }
        }
    }

    #[test]
    fn best_effort_underload_matches_edf(seed in any::<u64>(), n in 1usize..=8) {
        let w = random_small(seed, n, 10_000, 3000, 6000, true);
        prop_assume!(demand_feasible(&w));
        for kind in [PolicyKind::Edf, PolicyKind::Dasa, PolicyKind::Lbesa] {
            prop_assert_eq!(run_kind(&w, kind, &SimConfig::default()).misses(), 0, "{}", kind);
        }
    }

    #[test]
    fn scaling_values_leaves_best_effort_traces_unchanged(seed in any::<u64>(), n in 1usize..=10, k in 1u64..1000) {
        let w = random_small(seed, n, 10_000, 4000, 3000, true);
        let mut scaled = w.clone();
        for t in &mut scaled.tasks {
            t.value *= Rational::from_u64(k);
        }
        for kind in [PolicyKind::Dasa, PolicyKind::Lbesa] {
            let (a, b) = (run_kind(&w, kind, &SimConfig::default()), run_kind(&scaled, kind, &SimConfig::default()));
            prop_assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn float_and_exact_scalars_agree_on_unit_values(seed in any::<u64>(), n in 1usize..=10) {
        let w = random_small(seed, n, 20_000, 4000, 6000, false);
        let wf = WorkloadF64::new(
            w.name.clone(),
            w.tasks.iter().map(|t| TaskSpecF64::new(t.id, t.arrival.ticks(), t.burst.ticks(), t.deadline.ticks())).collect(),
        );
        for kind in PolicyKind::ALL {
            let exact = run_kind(&w, kind, &SimConfig::default());
            let cfg = SimConfigF64::default();
            let float = run_one(&wf, kind, &cfg).unwrap().run;
            prop_assert_eq!(exact.trace, float.trace);
        }
    }
}

#[test]
fn aging_prevents_starvation_in_accept_all_mode() {
    let mut cfg = SimConfig::default();
    cfg.nmlfq.admission = AdmissionMode::AcceptAll;
    for seed in 0..1000 {
        let w = random_small(seed, 1 + (seed % 12) as usize, 30_000, 6000, 8000, false);
        let r = run(&w, &mut Nmlfq::new(cfg.nmlfq.clone()), &cfg).unwrap();
        assert!(r.jobs.iter().all(|j| j.status == JobStatus::Completed), "seed {seed}");
    }
}

#[test]
fn nmlfq_short_arrival_preempts_long_job() {
    let w = Workload::new("pre", vec![TaskSpec::new(0, 0, 5000, 50_000), TaskSpec::new(1, 1500, 500, 3500)]);
    let r = run_kind(&w, PolicyKind::Nmlfq, &SimConfig::default());
    let b = &r.jobs[1];
    assert_eq!(b.first_dispatch.map(|t| t.ticks()), Some(1500));
    assert_eq!(b.completion.map(|t| t.ticks()), Some(2000));
}
