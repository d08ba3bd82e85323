//! Scalar types for task values and derived metrics.
//!
//! Time is always integer ticks. Everything that is a ratio (task value,
//! value density, averages, utilization) is computed in a [`Scalar`], which
//! is either an exact rational ([`Rational`]) or a binary float.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive};

/// Exact rational used by the default type aliases.
pub type Rational = Ratio<i128>;

/// Numeric type used for task values and every derived quantity.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    fn from_u64(n: u64) -> Self;

    fn from_i64(n: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Parses a plain decimal (`12`, `0.25`, `-3.5`) or, for exact
    /// types, a fraction `p/q`.
    fn parse_decimal(s: &str) -> Option<Self>;

    /// Shortest text that [`Scalar::parse_decimal`] reads back to the same value.
    fn to_plain_string(&self) -> String;

    /// Rounded decimal rendering for reports.
    fn to_fixed(&self, places: usize) -> String {
        format!("{:.*}", places, self.to_f64())
    }

    fn from_millis(m: u64) -> Self {
        Self::from_u64(m) / Self::from_u64(1000)
    }

    /// Total order used when sorting; NaN sorts as equal.
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_u64(n: u64) -> Self {
                n as $f
            }

            fn from_i64(n: i64) -> Self {
                n as $f
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse_decimal(s: &str) -> Option<Self> {
                let s = s.trim();
                if let Some((p, q)) = s.split_once('/') {
                    let p: $f = p.trim().parse().ok()?;
                    let q: $f = q.trim().parse().ok()?;
                    return (q != 0.0).then(|| p / q);
                }
                s.parse().ok().filter(|v: &$f| v.is_finite())
            }

            fn to_plain_string(&self) -> String {
                format!("{}", self)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

macro_rules! impl_ratio_scalar {
    ($i:ty) => {
        impl Scalar for Ratio<$i> {
            fn from_u64(n: u64) -> Self {
                Ratio::from_integer(n as $i)
            }

            fn from_i64(n: i64) -> Self {
                Ratio::from_integer(n as $i)
            }

            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }

            fn parse_decimal(s: &str) -> Option<Self> {
                let s = s.trim();
                if let Some((p, q)) = s.split_once('/') {
                    let p: $i = p.trim().parse().ok()?;
                    let q: $i = q.trim().parse().ok()?;
                    return (q != 0).then(|| Ratio::new(p, q));
                }
                let (neg, digits) = match s.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, s.strip_prefix('+').unwrap_or(s)),
                };
                let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
                if int_part.is_empty() && frac_part.is_empty() {
                    return None;
                }
                if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
                    return None;
                }
                let mut numer: $i = 0;
                for c in int_part.chars().chain(frac_part.chars()) {
                    numer = numer.checked_mul(10)?.checked_add((c as u8 - b'0') as $i)?;
                }
                let denom = (10 as $i).checked_pow(frac_part.len() as u32)?;
                let r = Ratio::new(numer, denom);
                Some(if neg { -r } else { r })
            }

            fn to_plain_string(&self) -> String {
                if self.is_integer() {
                    return self.numer().to_string();
                }
                // Terminating decimal iff the reduced denominator is 2^a 5^b.
                let mut d = *self.denom();
                let (mut twos, mut fives) = (0u32, 0u32);
                while d % 2 == 0 {
                    d /= 2;
                    twos += 1;
                }
                while d % 5 == 0 {
                    d /= 5;
                    fives += 1;
                }
                if d != 1 {
                    return format!("{}/{}", self.numer(), self.denom());
                }
                let places = twos.max(fives);
                let scale = (10 as $i).pow(places);
                let scaled = (self * Ratio::from_integer(scale)).to_integer();
                let sign = if scaled < 0 { "-" } else { "" };
                let mag = scaled.abs();
                let int = mag / scale;
                let frac = mag % scale;
                format!("{sign}{int}.{frac:0width$}", width = places as usize)
            }

            fn to_fixed(&self, places: usize) -> String {
                let scale = Ratio::from_integer((10 as $i).pow(places as u32));
                let scaled = (self * scale).round().to_integer();
                if places == 0 {
                    return scaled.to_string();
                }
                let p = (10 as $i).pow(places as u32);
                let sign = if scaled < 0 { "-" } else { "" };
                let mag = scaled.abs();
                format!("{sign}{}.{:0width$}", mag / p, mag % p, width = places)
            }
        }
    };
}

impl_ratio_scalar!(i64);
impl_ratio_scalar!(i128);

/// `sum / count`, or zero when the population is empty.
pub fn mean<V: Scalar>(sum: V, count: usize) -> V {
    if count == 0 {
        V::zero()
    } else {
        sum / V::from_u64(count as u64)
    }
}
