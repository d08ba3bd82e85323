use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{TaskSpec, Workload};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

/// How task values are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueMode<V> {
    Unit,
    /// Uniform in `[lo, hi]` at a resolution of 0.001.
    Uniform(V, V),
}

/// Parameters of a synthetic aperiodic workload.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec<V> {
    pub name: String,
    pub n_tasks: usize,
    /// Total burst over span.
    pub target_load: V,
    /// Arrivals are drawn from `[0, span)`.
    pub span: TimeDelta,
    pub burst_range: (u64, u64),
    /// Relative deadline is `burst * factor`, factor drawn at a resolution of 0.001.
    pub deadline_tightness: (V, V),
    pub value_mode: ValueMode<V>,
    pub seed: u64,
}

impl<V: Scalar> GenSpec<V> {
    /// Defaults: span 100 000 ticks, bursts 200..=12 000, tightness 1.5..=4, unit values.
    pub fn new(n_tasks: usize, target_load: V, seed: u64) -> Self {
        GenSpec {
            name: format!("gen-s{seed}"),
            n_tasks,
            target_load,
            span: TimeDelta(100_000),
            burst_range: (200, 12_000),
            deadline_tightness: (V::from_u64(3) / V::from_u64(2), V::from_u64(4)),
            value_mode: ValueMode::Unit,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidSpec(m.to_string()));
        if self.n_tasks < 1 {
            return bad("n_tasks must be at least 1");
        }
        if self.span.ticks() < 1 {
            return bad("span must be at least one tick");
        }
        if self.target_load.partial_cmp(&V::zero()) != Some(std::cmp::Ordering::Greater) {
            return bad("target_load must be positive");
        }
        let (bmin, bmax) = self.burst_range;
        if bmin < 1 || bmax < bmin {
            return bad("burst range must satisfy 1 <= min <= max");
        }
        let (lo, hi) = &self.deadline_tightness;
        if *lo < V::one() || hi < lo {
            return bad("tightness range must satisfy 1 <= lo <= hi");
        }
        if let ValueMode::Uniform(lo, hi) = &self.value_mode {
            if *lo < V::zero() || hi < lo {
                return bad("value range must satisfy 0 <= lo <= hi");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(
        "infeasible spec: total burst {target} (within 2%) is outside [{min}, {max}] reachable by the burst range"
    )]
    InfeasibleSpec { target: u64, min: u64, max: u64 },
}

fn thousandths<V: Scalar>(v: &V) -> u64 {
    (v.clone() * V::from_u64(1000)).to_f64().round().max(0.0) as u64
}

/// Rescales `raw` to sum exactly to `total`, keeping every entry in
/// `[lo, hi]`. Requires `n*lo <= total <= n*hi`.
fn rescale(raw: &[u64], total: u64, lo: u64, hi: u64) -> Vec<u64> {
    let raw_sum: u128 = raw.iter().map(|&b| b as u128).sum();
    let mut out: Vec<u64> = raw
        .iter()
        .map(|&b| {
            let scaled = (b as u128 * total as u128 + raw_sum / 2) / raw_sum;
            (scaled as u64).clamp(lo, hi)
        })
        .collect();
    let mut sum: u64 = out.iter().sum();
    // Spread the rounding and clamping residue over entries with room.
    while sum != total {
        for b in out.iter_mut() {
            if sum < total && *b < hi {
                let step = (hi - *b).min(total - sum);
                *b += step;
                sum += step;
            } else if sum > total && *b > lo {
                let step = (*b - lo).min(sum - total);
                *b -= step;
                sum -= step;
            }
            if sum == total {
                break;
            }
        }
    }
    out
}

/// Draws a workload from `g`. Deterministic in the spec (seed included).
pub fn generate<V: Scalar>(g: &GenSpec<V>) -> Result<Workload<V>, GenError> {
    g.validate()?;
    let n = g.n_tasks as u64;
    let (bmin, bmax) = g.burst_range;
    let exact = g.target_load.clone() * V::from_u64(g.span.ticks());
    let target = exact.to_f64().round() as u64;
    let band_lo = (target * 49).div_ceil(50);
    let band_hi = target * 51 / 50;
    let (reach_lo, reach_hi) = (n * bmin, n * bmax);
    if reach_lo > band_hi || reach_hi < band_lo {
        return Err(GenError::InfeasibleSpec { target, min: reach_lo, max: reach_hi });
    }
    let total = target.clamp(reach_lo, reach_hi);

    let (f_lo, f_hi) = (thousandths(&g.deadline_tightness.0), thousandths(&g.deadline_tightness.1));
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut drawn = Vec::with_capacity(g.n_tasks);
    for _ in 0..g.n_tasks {
        let arrival = rng.gen_range(0..g.span.ticks());
        let burst = rng.gen_range(bmin..=bmax);
        let factor = rng.gen_range(f_lo..=f_hi);
        let value = match &g.value_mode {
            ValueMode::Unit => V::one(),
            ValueMode::Uniform(lo, hi) => {
                let m = rng.gen_range(thousandths(lo)..=thousandths(hi));
                V::from_u64(m) / V::from_u64(1000)
            }
        };
        drawn.push((arrival, burst, factor, value));
    }
    let raw: Vec<u64> = drawn.iter().map(|d| d.1).collect();
    let bursts = rescale(&raw, total, bmin, bmax);

    let mut order: Vec<usize> = (0..drawn.len()).collect();
    order.sort_by_key(|&i| (drawn[i].0, i));
    let tasks = order
        .iter()
        .enumerate()
        .map(|(id, &i)| {
            let (arrival, _, factor, ref value) = drawn[i];
            let burst = bursts[i];
            let rel = (burst * factor).div_ceil(1000);
            TaskSpec {
                id,
                arrival: TimePoint(arrival),
                burst: TimeDelta(burst),
                deadline: TimePoint(arrival + rel),
                value: value.clone(),
            }
        })
        .collect();
    Ok(Workload { name: g.name.clone(), seed: Some(g.seed), tasks })
}
