//! Deterministic discrete-event simulation of uniprocessor CPU scheduling.
//!
//! The crate ships a dynamic multi-level feedback queue ([`nmlfq`]) and the
//! policies it is compared with: FCFS, round-robin and EDF
//! ([`policy::classic`]), and the value-density best-effort schedulers DASA
//! and LBESA ([`policy::besteffort`]). Runs produce a [`engine::Trace`] from
//! which [`metrics`] derives response, waiting and turnaround statistics.
//!
//! Time is integer ticks. Task values and every derived ratio are generic
//! over [`Scalar`]; the aliases at the crate root fix it to the exact
//! [`Rational`], and the `*F64` aliases to `f64`.

pub mod engine;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod nmlfq;
pub mod policy;
pub mod scalar;
pub mod time;
pub mod workload;

pub use scalar::{Rational, Scalar};
pub use time::{TimeDelta, TimePoint};

pub type TaskSpec = model::TaskSpec<Rational>;
pub type JobState = model::JobState<Rational>;
pub type Workload = model::Workload<Rational>;
pub type SimConfig = model::SimConfig<Rational>;
pub type NmlfqConfig = nmlfq::NmlfqConfig<Rational>;
pub type SimRun = engine::SimRun<Rational>;
pub type SimError = engine::SimError<Rational>;
pub type JobMetrics = metrics::JobMetrics<Rational>;
pub type MetricsReport = metrics::MetricsReport<Rational>;
pub type ComparisonTable = metrics::ComparisonTable<Rational>;
pub type GenSpec = workload::GenSpec<Rational>;

pub type TaskSpecF64 = model::TaskSpec<f64>;
pub type WorkloadF64 = model::Workload<f64>;
pub type SimConfigF64 = model::SimConfig<f64>;
pub type MetricsReportF64 = metrics::MetricsReport<f64>;
