//! Response, waiting, turnaround, utilization and value metrics derived
//! from a finished run, and the multi-policy comparison table.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::Trace;
use crate::model::{JobId, JobState, JobStatus};
use crate::scalar::{mean, Scalar};
use crate::time::{TimeDelta, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
    #[error("mismatched suites: {0}")]
    MismatchedSuites(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobMetrics<V> {
    pub job: JobId,
    pub arrival: TimePoint,
    pub burst: TimeDelta,
    pub deadline: TimePoint,
    pub first_dispatch: Option<TimePoint>,
    pub completion: Option<TimePoint>,
    /// First execution start minus arrival; dispatch latency included.
    pub response: Option<TimeDelta>,
    pub turnaround: Option<TimeDelta>,
    pub waiting: Option<TimeDelta>,
    pub met_deadline: bool,
    pub value_accrued: V,
}

/// Metrics of one (workload, policy, config) run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<V> {
    pub policy: String,
    pub workload: String,
    pub per_job: Vec<JobMetrics<V>>,
    pub makespan: TimePoint,
    pub busy: TimeDelta,
    /// Busy ticks over makespan.
    pub cpu_utilization: V,
    /// Latest completion minus earliest arrival.
    pub overall_turnaround: TimeDelta,
    /// Over completed jobs.
    pub avg_turnaround: V,
    /// Over completed jobs.
    pub avg_waiting: V,
    /// Over jobs that were dispatched at least once.
    pub avg_response: V,
    pub responded: usize,
    pub completed: usize,
    pub misses: usize,
    pub miss_ratio: V,
    pub total_value: V,
}

/// Derives the report for one run. Pure in `(trace, jobs)`.
pub fn compute<V: Scalar>(trace: &Trace, jobs: &[JobState<V>]) -> Result<MetricsReport<V>, MetricsError> {
    if jobs.is_empty() {
        return Err(MetricsError::IncompleteTrace("no jobs".into()));
    }
    if !trace.truncated {
        if let Some(j) = jobs.iter().find(|j| !matches!(j.status, JobStatus::Completed | JobStatus::Aborted)) {
            return Err(MetricsError::IncompleteTrace(format!("job {} still {:?}", j.id(), j.status)));
        }
    }
    trace.check(jobs).map_err(|e| MetricsError::IncompleteTrace(e.to_string()))?;

    let per_job: Vec<JobMetrics<V>> = jobs
        .iter()
        .map(|j| {
            let arrival = j.spec.arrival;
            let completion = j.completion.filter(|_| j.status == JobStatus::Completed);
            let turnaround = completion.map(|c| c.since(arrival).expect("completion after arrival"));
            let met = j.met_deadline();
            JobMetrics {
                job: j.id(),
                arrival,
                burst: j.spec.burst,
                deadline: j.spec.deadline,
                first_dispatch: j.first_dispatch,
                completion,
                response: j.first_dispatch.map(|d| d.since(arrival).expect("dispatch after arrival")),
                turnaround,
                waiting: turnaround.map(|t| t - j.spec.burst),
                met_deadline: met,
                value_accrued: if met { j.spec.value.clone() } else { V::zero() },
            }
        })
        .collect();

    let ticks = |d: TimeDelta| V::from_u64(d.ticks());
    let responses: Vec<TimeDelta> = per_job.iter().filter_map(|m| m.response).collect();
    let turnarounds: Vec<TimeDelta> = per_job.iter().filter_map(|m| m.turnaround).collect();
    let waits: Vec<TimeDelta> = per_job.iter().filter_map(|m| m.waiting).collect();
    let sum = |v: &[TimeDelta]| ticks(v.iter().copied().sum());
    let misses = per_job.iter().filter(|m| !m.met_deadline).count();
    let busy = trace.busy();
    let first_arrival = per_job.iter().map(|m| m.arrival).min().expect("non-empty");
    let overall_turnaround = per_job
        .iter()
        .filter_map(|m| m.completion)
        .max()
        .map_or(TimeDelta::ZERO, |c| c.since(first_arrival).expect("completion after arrival"));
    let cpu_utilization =
        if trace.makespan.ticks() == 0 { V::zero() } else { ticks(busy) / V::from_u64(trace.makespan.ticks()) };
    let total_value = per_job.iter().fold(V::zero(), |acc, m| acc + m.value_accrued.clone());

    Ok(MetricsReport {
        policy: trace.policy.clone(),
        workload: trace.workload.clone(),
        makespan: trace.makespan,
        busy,
        cpu_utilization,
        overall_turnaround,
        avg_turnaround: mean(sum(&turnarounds), turnarounds.len()),
        avg_waiting: mean(sum(&waits), waits.len()),
        avg_response: mean(sum(&responses), responses.len()),
        responded: responses.len(),
        completed: turnarounds.len(),
        misses,
        miss_ratio: V::from_u64(misses as u64) / V::from_u64(per_job.len() as u64),
        total_value,
        per_job,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl<V: Scalar> MetricsReport<V> {
    /// Sum of response samples, so that weighted aggregation stays exact.
    pub fn total_response(&self) -> V {
        self.avg_response.clone() * V::from_u64(self.responded as u64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "job_id,arrival,burst,deadline,first_dispatch,completion,response,turnaround,waiting,met_deadline,value_accrued"
        );
        for m in &self.per_job {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                m.job,
                m.arrival,
                m.burst,
                m.deadline,
                opt(m.first_dispatch),
                opt(m.completion),
                opt(m.response),
                opt(m.turnaround),
                opt(m.waiting),
                m.met_deadline,
                m.value_accrued.to_plain_string()
            );
        }
        let _ = writeln!(out, "#summary");
        for (k, v) in self.summary_pairs() {
            let _ = writeln!(out, "#{k},{v}");
        }
        out
    }

    fn summary_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("policy", self.policy.clone()),
            ("workload", self.workload.clone()),
            ("jobs", self.per_job.len().to_string()),
            ("makespan", self.makespan.to_string()),
            ("busy", self.busy.to_string()),
            ("cpu_utilization", self.cpu_utilization.to_fixed(6)),
            ("overall_turnaround", self.overall_turnaround.to_string()),
            ("avg_turnaround", self.avg_turnaround.to_fixed(3)),
            ("avg_waiting", self.avg_waiting.to_fixed(3)),
            ("avg_response", self.avg_response.to_fixed(3)),
            ("responded", self.responded.to_string()),
            ("completed", self.completed.to_string()),
            ("misses", self.misses.to_string()),
            ("miss_ratio", self.miss_ratio.to_fixed(6)),
            ("total_value", self.total_value.to_fixed(3)),
        ]
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.summary_pairs() {
            let _ = writeln!(out, "{k:<20} {v}");
        }
        out
    }
}

/// `(other - reference) / other`: the fraction by which the reference
/// policy's response time undercuts `other`. `None` when `other` is zero.
pub fn reduction<V: Scalar>(other: &V, reference: &V) -> Option<V> {
    if other.is_zero() {
        None
    } else {
        Some((other.clone() - reference.clone()) / other.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCell<V> {
    pub avg_response: V,
    pub responded: usize,
    pub avg_waiting: V,
    pub avg_turnaround: V,
    pub miss_ratio: V,
    pub total_value: V,
    /// Response-time reduction of the reference policy relative to this one.
    pub reduction: Option<V>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow<V> {
    pub workload: String,
    /// One cell per policy, in [`ComparisonTable::policies`] order.
    pub cells: Vec<PolicyCell<V>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable<V> {
    pub policies: Vec<String>,
    /// Policy the reductions are measured for (`nmlfq` when present).
    pub reference: String,
    pub rows: Vec<CaseRow<V>>,
    /// Weighted over all cases: response by responded jobs, the rest by case.
    pub aggregate: Vec<PolicyCell<V>>,
}

/// Groups reports by workload and policy and computes the reference
/// policy's response-time reduction against each policy.
pub fn compare<V: Scalar>(reports: &[MetricsReport<V>]) -> Result<ComparisonTable<V>, MetricsError> {
    let mut policies: Vec<String> = Vec::new();
    let mut workloads: Vec<String> = Vec::new();
    for r in reports {
        if !policies.contains(&r.policy) {
            policies.push(r.policy.clone());
        }
        if !workloads.contains(&r.workload) {
            workloads.push(r.workload.clone());
        }
    }
    if policies.is_empty() {
        return Err(MetricsError::MismatchedSuites("no reports".into()));
    }
    let reference = if policies.iter().any(|p| p == "nmlfq") { "nmlfq".to_string() } else { policies[0].clone() };
    let ref_idx = policies.iter().position(|p| *p == reference).expect("present");

    let mut grid: Vec<Vec<&MetricsReport<V>>> = Vec::with_capacity(workloads.len());
    for w in &workloads {
        let mut row = Vec::with_capacity(policies.len());
        for p in &policies {
            let found: Vec<_> = reports.iter().filter(|r| &r.workload == w && &r.policy == p).collect();
            match found.as_slice() {
                [one] => row.push(*one),
                [] => return Err(MetricsError::MismatchedSuites(format!("no `{p}` report for workload `{w}`"))),
                _ => return Err(MetricsError::MismatchedSuites(format!("duplicate `{p}` reports for `{w}`"))),
            }
        }
        grid.push(row);
    }

    let rows = workloads
        .iter()
        .zip(&grid)
        .map(|(w, row)| {
            let reference = row[ref_idx].avg_response.clone();
            CaseRow {
                workload: w.clone(),
                cells: row
                    .iter()
                    .map(|r| PolicyCell {
                        avg_response: r.avg_response.clone(),
                        responded: r.responded,
                        avg_waiting: r.avg_waiting.clone(),
                        avg_turnaround: r.avg_turnaround.clone(),
                        miss_ratio: r.miss_ratio.clone(),
                        total_value: r.total_value.clone(),
                        reduction: reduction(&r.avg_response, &reference),
                    })
                    .collect(),
            }
        })
        .collect();

    let n_cases = workloads.len();
    let mut aggregate: Vec<PolicyCell<V>> = (0..policies.len())
        .map(|p| {
            let column: Vec<&MetricsReport<V>> = grid.iter().map(|row| row[p]).collect();
            let responded: usize = column.iter().map(|r| r.responded).sum();
            let total_response = column.iter().fold(V::zero(), |acc, r| acc + r.total_response());
            let case_mean =
                |f: &dyn Fn(&MetricsReport<V>) -> V| mean(column.iter().fold(V::zero(), |acc, r| acc + f(r)), n_cases);
            PolicyCell {
                avg_response: mean(total_response, responded),
                responded,
                avg_waiting: case_mean(&|r| r.avg_waiting.clone()),
                avg_turnaround: case_mean(&|r| r.avg_turnaround.clone()),
                miss_ratio: case_mean(&|r| r.miss_ratio.clone()),
                total_value: column.iter().fold(V::zero(), |acc, r| acc + r.total_value.clone()),
                reduction: None,
            }
        })
        .collect();
    let ref_resp = aggregate[ref_idx].avg_response.clone();
    for cell in &mut aggregate {
        cell.reduction = reduction(&cell.avg_response, &ref_resp);
    }

    Ok(ComparisonTable { policies, reference, rows, aggregate })
}

impl<V: Scalar> ComparisonTable<V> {
    fn policy_index(&self, policy: &str) -> Option<usize> {
        self.policies.iter().position(|p| p == policy)
    }

    pub fn aggregate_for(&self, policy: &str) -> Option<&PolicyCell<V>> {
        self.policy_index(policy).map(|i| &self.aggregate[i])
    }

    /// Long-format CSV: one row per (case, policy), then `#aggregate` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "workload,policy,avg_response,responded,avg_waiting,avg_turnaround,miss_ratio,total_value,{}_response_reduction",
            self.reference
        );
        let line = |out: &mut String, w: &str, p: &str, c: &PolicyCell<V>| {
            let _ = writeln!(
                out,
                "{w},{p},{},{},{},{},{},{},{}",
                c.avg_response.to_fixed(3),
                c.responded,
                c.avg_waiting.to_fixed(3),
                c.avg_turnaround.to_fixed(3),
                c.miss_ratio.to_fixed(6),
                c.total_value.to_fixed(3),
                c.reduction.as_ref().map(|r| r.to_fixed(6)).unwrap_or_default()
            );
        };
        for row in &self.rows {
            for (p, c) in self.policies.iter().zip(&row.cells) {
                line(&mut out, &row.workload, p, c);
            }
        }
        let _ = writeln!(out, "#aggregate");
        for (p, c) in self.policies.iter().zip(&self.aggregate) {
            line(&mut out, "ALL", p, c);
        }
        out
    }

    /// Wide plain-text table of average response times and reductions.
    pub fn to_text(&self) -> String {
        let others: Vec<usize> = (0..self.policies.len()).filter(|&i| self.policies[i] != self.reference).collect();
        let mut header = vec!["workload".to_string()];
        header.extend(self.policies.iter().map(|p| format!("{p} resp")));
        header.extend(others.iter().map(|&i| format!("vs {}", self.policies[i])));
        let pct = |c: &PolicyCell<V>| {
            c.reduction.as_ref().map(|r| format!("{:.1}%", r.to_f64() * 100.0)).unwrap_or_else(|| "-".into())
        };
        let mut body: Vec<Vec<String>> = Vec::new();
        let mut emit = |name: &str, cells: &[PolicyCell<V>]| {
            let mut r = vec![name.to_string()];
            r.extend(cells.iter().map(|c| c.avg_response.to_fixed(1)));
            r.extend(others.iter().map(|&i| pct(&cells[i])));
            body.push(r);
        };
        for row in &self.rows {
            emit(&row.workload, &row.cells);
        }
        emit("AGGREGATE", &self.aggregate);
        let widths: Vec<usize> = (0..header.len())
            .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let fmt_row = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", fmt_row(&header));
        let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        for r in &body {
            let _ = writeln!(out, "{}", fmt_row(r));
        }
        out
    }

    /// Bar chart of aggregate average response time per policy.
    pub fn to_svg(&self) -> String {
        let (w, h, margin) = (120 * self.policies.len().max(1) + 80, 320usize, 40usize);
        let max = self.aggregate.iter().map(|c| c.avg_response.to_f64()).fold(0.0f64, f64::max).max(1.0);
        let plot_h = (h - 2 * margin) as f64;
        let mut out = String::new();
        let _ =
            writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">Average response time (ticks)</text>"#,
            w / 2
        );
        let baseline = h - margin;
        let _ = writeln!(
            out,
            r#"<line x1="{margin}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="black"/>"#,
            w - margin / 2
        );
        for (i, (p, c)) in self.policies.iter().zip(&self.aggregate).enumerate() {
            let v = c.avg_response.to_f64();
            let bar = (v / max * plot_h).round() as usize;
            let x = margin + 20 + i * 120;
            let fill = if *p == self.reference { "#3b6ea5" } else { "#a5a5a5" };
            let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="80" height="{bar}" fill="{fill}"/>"#, baseline - bar);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{v:.1}</text>"#,
                x + 40,
                baseline - bar - 4
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{p}</text>"#,
                x + 40,
                baseline + 16
            );
        }
        let _ = writeln!(out, "</svg>");
        out
    }
}
