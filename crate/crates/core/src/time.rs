//! Integer tick time. One tick is one microsecond nominal, so 1 ms = 1000 ticks.

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use thiserror::Error;

/// Ticks per millisecond.
pub const TICKS_PER_MS: u64 = 1000;

/// An absolute instant on the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimePoint(pub u64);

/// A non-negative span of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeDelta(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("time underflow: {later} is after {earlier}")]
pub struct TimeUnderflow {
    pub earlier: TimePoint,
    pub later: TimePoint,
}

impl TimePoint {
    pub const ZERO: TimePoint = TimePoint(0);

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn from_ms(ms: u64) -> Self {
        TimePoint(ms * TICKS_PER_MS)
    }

    /// `self - earlier`, failing when `earlier` is after `self`.
    pub fn since(self, earlier: TimePoint) -> Result<TimeDelta, TimeUnderflow> {
        self.0.checked_sub(earlier.0).map(TimeDelta).ok_or(TimeUnderflow { earlier: self, later: earlier })
    }

    /// Signed distance `self - other` in ticks.
    pub fn signed_diff(self, other: TimePoint) -> i64 {
        self.0 as i64 - other.0 as i64
    }
}

impl TimeDelta {
    pub const ZERO: TimeDelta = TimeDelta(0);

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn from_ms(ms: u64) -> Self {
        TimeDelta(ms * TICKS_PER_MS)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn saturating_sub(self, rhs: TimeDelta) -> TimeDelta {
        TimeDelta(self.0.saturating_sub(rhs.0))
    }
}

impl Add<TimeDelta> for TimePoint {
    type Output = TimePoint;
    fn add(self, rhs: TimeDelta) -> TimePoint {
        TimePoint(self.0 + rhs.0)
    }
}

impl AddAssign<TimeDelta> for TimePoint {
    fn add_assign(&mut self, rhs: TimeDelta) {
        self.0 += rhs.0;
    }
}

impl Add for TimeDelta {
    type Output = TimeDelta;
    fn add(self, rhs: TimeDelta) -> TimeDelta {
        TimeDelta(self.0 + rhs.0)
    }
}

impl AddAssign for TimeDelta {
    fn add_assign(&mut self, rhs: TimeDelta) {
        self.0 += rhs.0;
    }
}

/// Panics on underflow; use [`TimeDelta::saturating_sub`] when that is possible.
impl Sub for TimeDelta {
    type Output = TimeDelta;
    fn sub(self, rhs: TimeDelta) -> TimeDelta {
        TimeDelta(self.0.checked_sub(rhs.0).expect("TimeDelta underflow"))
    }
}

impl SubAssign for TimeDelta {
    fn sub_assign(&mut self, rhs: TimeDelta) {
        *self = *self - rhs;
    }
}

impl std::iter::Sum for TimeDelta {
    fn sum<I: Iterator<Item = TimeDelta>>(iter: I) -> Self {
        TimeDelta(iter.map(|d| d.0).sum())
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for TimeDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
