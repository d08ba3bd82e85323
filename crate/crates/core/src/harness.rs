//! Policy selection by name and batch execution of (workload, policy) runs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run, Policy, SimError, SimRun};
use crate::metrics::{compare, compute, ComparisonTable, MetricsError, MetricsReport};
use crate::model::{SimConfig, Workload};
use crate::nmlfq::Nmlfq;
use crate::policy::{Dasa, Edf, Fcfs, Lbesa, RoundRobin};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Fcfs,
    Rr,
    Edf,
    Dasa,
    Lbesa,
    Nmlfq,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] =
        [PolicyKind::Fcfs, PolicyKind::Rr, PolicyKind::Edf, PolicyKind::Dasa, PolicyKind::Lbesa, PolicyKind::Nmlfq];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Fcfs => "fcfs",
            PolicyKind::Rr => "rr",
            PolicyKind::Edf => "edf",
            PolicyKind::Dasa => "dasa",
            PolicyKind::Lbesa => "lbesa",
            PolicyKind::Nmlfq => "nmlfq",
        }
    }

    /// A fresh policy instance configured from `cfg`.
    pub fn build<V: Scalar>(self, cfg: &SimConfig<V>) -> Result<Box<dyn Policy<V> + Send>, String> {
        Ok(match self {
            PolicyKind::Fcfs => Box::new(Fcfs),
            PolicyKind::Rr => {
                if cfg.rr.quantum.is_zero() {
                    return Err("rr quantum must be at least one tick".into());
                }
                Box::new(RoundRobin::new(cfg.rr))
            }
            PolicyKind::Edf => Box::new(Edf),
            PolicyKind::Dasa => Box::new(Dasa),
            PolicyKind::Lbesa => Box::new(Lbesa),
            PolicyKind::Nmlfq => {
                cfg.nmlfq.validate()?;
                Box::new(Nmlfq::new(cfg.nmlfq.clone()))
            }
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| format!("unknown policy `{s}` (expected fcfs|rr|edf|dasa|lbesa|nmlfq)"))
    }
}

#[derive(Debug, Error)]
pub enum HarnessError<V: Scalar> {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{workload}/{policy}: {source}")]
    Sim { workload: String, policy: PolicyKind, source: SimError<V> },
    #[error("{workload}/{policy}: {source}")]
    Metrics { workload: String, policy: PolicyKind, source: MetricsError },
    #[error(transparent)]
    Compare(MetricsError),
}

/// One finished (workload, policy) run with its metrics.
#[derive(Debug, Clone)]
pub struct RunOutcome<V> {
    pub policy: PolicyKind,
    pub run: SimRun<V>,
    pub report: MetricsReport<V>,
}

/// Runs `w` under `kind` and computes its metrics.
pub fn run_one<V: Scalar>(
    w: &Workload<V>,
    kind: PolicyKind,
    cfg: &SimConfig<V>,
) -> Result<RunOutcome<V>, HarnessError<V>> {
    let mut policy = kind.build(cfg).map_err(HarnessError::Config)?;
    let run = run(w, &mut policy, cfg).map_err(|source| HarnessError::Sim {
        workload: w.name.clone(),
        policy: kind,
        source,
    })?;
    let report = compute(&run.trace, &run.jobs).map_err(|source| HarnessError::Metrics {
        workload: w.name.clone(),
        policy: kind,
        source,
    })?;
    Ok(RunOutcome { policy: kind, run, report })
}

/// Every (workload, policy) pair, workload-major. Runs are independent, so
/// the parallel and serial orders give identical results.
pub fn run_matrix<V: Scalar>(
    workloads: &[Workload<V>],
    policies: &[PolicyKind],
    cfg: &SimConfig<V>,
    parallel: bool,
) -> Result<Vec<RunOutcome<V>>, HarnessError<V>> {
    let pairs: Vec<(&Workload<V>, PolicyKind)> =
        workloads.iter().flat_map(|w| policies.iter().map(move |&p| (w, p))).collect();
    if parallel {
        pairs.into_par_iter().map(|(w, p)| run_one(w, p, cfg)).collect()
    } else {
        pairs.into_iter().map(|(w, p)| run_one(w, p, cfg)).collect()
    }
}

/// Per-run outcomes and the table built from them.
pub type Comparison<V> = (Vec<RunOutcome<V>>, ComparisonTable<V>);

/// Runs the matrix and tabulates it.
pub fn compare_policies<V: Scalar>(
    workloads: &[Workload<V>],
    policies: &[PolicyKind],
    cfg: &SimConfig<V>,
    parallel: bool,
) -> Result<Comparison<V>, HarnessError<V>> {
    let outcomes = run_matrix(workloads, policies, cfg, parallel)?;
    let reports: Vec<MetricsReport<V>> = outcomes.iter().map(|o| o.report.clone()).collect();
    let table = compare(&reports).map_err(HarnessError::Compare)?;
    Ok((outcomes, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskSpec;
    use crate::scalar::Rational;

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>(), Ok(k));
        }
        assert!("sjf".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn built_policy_reports_its_name() {
        let cfg = SimConfig::<Rational>::default();
        for k in PolicyKind::ALL {
            assert_eq!(k.build(&cfg).unwrap().name(), k.as_str());
        }
    }

    #[test]
    fn invalid_nmlfq_config_is_reported() {
        let mut cfg = SimConfig::<Rational>::default();
        cfg.nmlfq.max_levels = 1;
        assert!(PolicyKind::Nmlfq.build(&cfg).is_err());
    }

    #[test]
    fn parallel_matches_serial() {
        let w =
            Workload::new("pair", vec![TaskSpec::<Rational>::new(0, 0, 2500, 9000), TaskSpec::new(1, 100, 1500, 4000)]);
        let cfg = SimConfig::default();
        let a = run_matrix(std::slice::from_ref(&w), &PolicyKind::ALL, &cfg, true).unwrap();
        let b = run_matrix(std::slice::from_ref(&w), &PolicyKind::ALL, &cfg, false).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.run.trace.to_csv(), y.run.trace.to_csv());
            assert_eq!(x.report, y.report);
        }
    }
}
