use std::fmt;
use std::str::FromStr;

use crate::scalar::Scalar;
use crate::time::TimeDelta;

/// How arrivals are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdmissionMode {
    /// Accept only if every admitted job can still meet its deadline;
    /// dispatch is then constrained to keep that true.
    #[default]
    Planning,
    /// Accept everything.
    AcceptAll,
}

impl FromStr for AdmissionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planning" => Ok(AdmissionMode::Planning),
            "accept_all" => Ok(AdmissionMode::AcceptAll),
            other => Err(format!("unknown admission mode `{other}` (expected planning|accept_all)")),
        }
    }
}

impl fmt::Display for AdmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdmissionMode::Planning => "planning",
            AdmissionMode::AcceptAll => "accept_all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmlfqConfig<V> {
    /// Quantum of level 0; level k gets `base_quantum * 2^k`.
    pub base_quantum: TimeDelta,
    pub min_levels: usize,
    pub max_levels: usize,
    /// Waiting time after which a job moves up one level. `None` means
    /// `10 * base_quantum * current level count`.
    pub aging_threshold: Option<TimeDelta>,
    /// A job is urgent when `slack < urgency_factor * remaining`.
    pub urgency_factor: V,
    pub admission: AdmissionMode,
}

impl<V: Scalar> Default for NmlfqConfig<V> {
    fn default() -> Self {
        NmlfqConfig {
            base_quantum: TimeDelta(1000),
            min_levels: 2,
            max_levels: 8,
            aging_threshold: None,
            urgency_factor: V::one(),
            admission: AdmissionMode::Planning,
        }
    }
}

impl<V: Scalar> NmlfqConfig<V> {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_levels < 1 {
            return Err("min_levels must be at least 1".into());
        }
        if self.max_levels < self.min_levels {
            return Err("max_levels must be at least min_levels".into());
        }
        if self.max_levels > 40 {
            return Err("max_levels above 40 overflows the quantum".into());
        }
        if self.base_quantum.ticks() < 1 {
            return Err("base_quantum must be at least one tick".into());
        }
        if self.urgency_factor < V::zero() {
            return Err("urgency_factor must be non-negative".into());
        }
        Ok(())
    }

    pub fn aging_threshold_for(&self, level_count: usize) -> TimeDelta {
        self.aging_threshold.unwrap_or(TimeDelta(10 * self.base_quantum.ticks() * level_count as u64))
    }
}

/// Level count and per-level quanta for a given ready population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    pub count: usize,
    pub quanta: Vec<TimeDelta>,
}

/// `L = clamp(ceil(log2(n_ready + 1)), min_levels, max_levels)` and
/// `q[k] = base_quantum * 2^k`.
pub fn reconfigure<V: Scalar>(n_ready: usize, cfg: &NmlfqConfig<V>) -> Levels {
    let m = n_ready as u64 + 1;
    let ceil_log2 = if m <= 1 { 0 } else { 64 - (m - 1).leading_zeros() as usize };
    let count = ceil_log2.clamp(cfg.min_levels, cfg.max_levels);
    let quanta = (0..count).map(|k| TimeDelta(cfg.base_quantum.ticks() << k)).collect();
    Levels { count, quanta }
}
