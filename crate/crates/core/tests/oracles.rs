//! The engine against independent brute-force references.

mod common;

use common::{demand_feasible, merged, random_small, tick_simulate, RefPolicy};
use proptest::prelude::*;
use schedsim::engine::run;
use schedsim::policy::{Edf, Fcfs, RoundRobin, RrConfig};
use schedsim::{SimConfig, TaskSpec, TimeDelta, Workload};

fn check_against_reference(w: &Workload, policy: RefPolicy) -> Result<(), TestCaseError> {
    let cfg = SimConfig::default();
    let got = match policy {
        RefPolicy::Edf => run(w, &mut Edf, &cfg),
        RefPolicy::Fcfs => run(w, &mut Fcfs, &cfg),
        RefPolicy::Rr(q) => run(w, &mut RoundRobin::new(RrConfig { quantum: TimeDelta(q) }), &cfg),
    }
    .expect("run completes");
    let want = tick_simulate(w, policy);
    prop_assert_eq!(merged(&got.trace.segments), want.segments);
    for j in &got.jobs {
        prop_assert_eq!(j.completion.map(|c| c.ticks()), Some(want.completion[j.id()]));
        prop_assert_eq!(j.first_dispatch.map(|c| c.ticks()), Some(want.first_dispatch[j.id()]));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn edf_matches_tick_reference(seed in any::<u64>(), n in 1usize..=8) {
        check_against_reference(&random_small(seed, n, 6000, 2000, 3000, false), RefPolicy::Edf)?;
    }

    #[test]
    fn fcfs_matches_tick_reference(seed in any::<u64>(), n in 1usize..=8) {
        check_against_reference(&random_small(seed, n, 6000, 2000, 3000, false), RefPolicy::Fcfs)?;
    }

    #[test]
    fn rr_matches_tick_reference(seed in any::<u64>(), n in 1usize..=8, q in 1u64..1500) {
        check_against_reference(&random_small(seed, n, 6000, 2000, 3000, false), RefPolicy::Rr(q))?;
    }

    #[test]
    fn edf_misses_nothing_iff_demand_feasible(seed in any::<u64>(), n in 1usize..=8) {
        let w = random_small(seed, n, 10_000, 3000, 4000, false);
        let r = run(&w, &mut Edf, &SimConfig::default()).unwrap();
        prop_assert_eq!(r.misses() == 0, demand_feasible(&w));
    }
}

#[test]
fn rr_two_job_fixture() {
    let w = Workload::new("rr2", vec![TaskSpec::new(0, 0, 2500, 10_000), TaskSpec::new(1, 0, 2500, 10_000)]);
    let want = vec![(0, 0, 1000), (1, 1000, 2000), (0, 2000, 3000), (1, 3000, 4000), (0, 4000, 4500), (1, 4500, 5000)];
    assert_eq!(tick_simulate(&w, RefPolicy::Rr(1000)).segments, want);
    let r = run(&w, &mut RoundRobin::new(RrConfig::default()), &SimConfig::default()).unwrap();
    assert_eq!(merged(&r.trace.segments), want);
}

#[test]
fn demand_oracle_examples() {
    let fits = Workload::new("fits", vec![TaskSpec::new(0, 0, 3000, 3000)]);
    assert!(demand_feasible(&fits));
    let over = Workload::new("over", vec![TaskSpec::new(0, 0, 3000, 3000), TaskSpec::new(1, 0, 3000, 3100)]);
    assert!(!demand_feasible(&over));
    let staggered = Workload::new("stag", vec![TaskSpec::new(0, 0, 2000, 2500), TaskSpec::new(1, 1000, 2000, 4500)]);
    assert!(demand_feasible(&staggered));
}

mod best_effort {
    use super::*;
    use schedsim::model::JobStatus;
    use schedsim::policy::besteffort::{dasa_schedule, feasible, lbesa_schedule};
    use schedsim::JobState;
    use schedsim::{Rational, Scalar, TimePoint};

    const NOW: u64 = 10_000;

    fn ready(id: usize, rem: u64, dl_offset: u64, value: u64) -> JobState {
        let mut j = JobState::new(TaskSpec::new(id, 0, rem, NOW + dl_offset).with_value(Rational::from_u64(value)));
        j.status = JobStatus::Ready;
        j
    }

    /// Best accrued value over every feasible keep-set, by enumeration.
    fn best_keep_set(jobs: &[JobState]) -> Rational {
        let mut best = Rational::from_u64(0);
        for mask in 0u32..(1 << jobs.len()) {
            let mut kept: Vec<&JobState> = (0..jobs.len()).filter(|i| mask & (1 << i) != 0).map(|i| &jobs[i]).collect();
            kept.sort_by_key(|j| j.edf_key());
            if feasible(&kept, TimePoint(NOW)) {
                let v = kept.iter().fold(Rational::from_u64(0), |acc, j| acc + j.spec.value);
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    fn value_of(ids: &[usize], jobs: &[JobState]) -> Rational {
        ids.iter().fold(Rational::from_u64(0), |acc, &i| acc + jobs[i].spec.value)
    }

    #[test]
    fn three_job_divergence_against_enumeration() {
        let jobs = [ready(0, 2000, 2000, 6), ready(1, 2000, 3000, 5), ready(2, 2000, 4000, 5)];
        let refs: Vec<&JobState> = jobs.iter().collect();
        let dasa = dasa_schedule(&refs, TimePoint(NOW)).jobs;
        let lbesa = lbesa_schedule(&refs, TimePoint(NOW)).jobs;
        assert_eq!(best_keep_set(&jobs), Rational::from_u64(11));
        assert_eq!(value_of(&dasa, &jobs), Rational::from_u64(11));
        assert_eq!(value_of(&lbesa, &jobs), Rational::from_u64(6));
    }

    #[test]
    fn two_job_overloads_keep_the_optimal_job() {
        let dasa_case = [ready(0, 3000, 3000, 10), ready(1, 3000, 3100, 1)];
        let lbesa_case = [ready(0, 3000, 3000, 1), ready(1, 3000, 3100, 10)];
        let dasa_ids = |js: &[JobState; 2]| -> Vec<usize> {
            let r: Vec<&JobState> = js.iter().collect();
            dasa_schedule(&r, TimePoint(NOW)).jobs
        };
        assert_eq!(value_of(&dasa_ids(&dasa_case), &dasa_case), best_keep_set(&dasa_case));
        let r: Vec<&JobState> = lbesa_case.iter().collect();
        assert_eq!(value_of(&lbesa_schedule(&r, TimePoint(NOW)).jobs, &lbesa_case), best_keep_set(&lbesa_case));
    }

    proptest! {
        #[test]
        fn tentative_schedules_are_feasible_and_deadline_ordered(
            spec in prop::collection::vec((100u64..4000, 0u64..8000, 1u64..10), 1..8),
        ) {
            let jobs: Vec<JobState> = spec.iter().enumerate().map(|(i, &(r, d, v))| ready(i, r, d, v)).collect();
            let refs: Vec<&JobState> = jobs.iter().collect();
            for sched in [dasa_schedule(&refs, TimePoint(NOW)), lbesa_schedule(&refs, TimePoint(NOW))] {
                let kept: Vec<&JobState> = sched.jobs.iter().map(|&i| &jobs[i]).collect();
                prop_assert!(feasible(&kept, TimePoint(NOW)));
                prop_assert!(kept.windows(2).all(|p| p[0].edf_key() < p[1].edf_key()));
                prop_assert!(value_of(&sched.jobs, &jobs) <= best_keep_set(&jobs));
            }
        }
    }
}
