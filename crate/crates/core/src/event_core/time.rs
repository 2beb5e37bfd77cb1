use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use super::KernelError;

/// Minutes since run start. Always finite and non-negative, so it carries a
/// total order.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    pub fn new(minutes: f64) -> Result<Self, KernelError> {
        if minutes.is_finite() && minutes >= 0.0 {
            // normalise -0.0 so equality and ordering agree
            Ok(SimTime(minutes + 0.0))
        } else {
            Err(KernelError::InvalidTime(minutes))
        }
    }

    #[inline]
    pub fn minutes(self) -> f64 {
        self.0
    }

    /// `self + delay`; the delay must be finite and non-negative.
    pub fn after(self, delay: f64) -> Result<Self, KernelError> {
        SimTime::new(self.0 + delay).and_then(|t| {
            if delay >= 0.0 {
                Ok(t)
            } else {
                Err(KernelError::InvalidTime(delay))
            }
        })
    }
}

impl TryFrom<f64> for SimTime {
    type Error = KernelError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        SimTime::new(value)
    }
}

impl From<SimTime> for f64 {
    fn from(t: SimTime) -> f64 {
        t.0
    }
}

impl PartialEq for SimTime {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SimTime {}

impl Hash for SimTime {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add<f64> for SimTime {
    type Output = f64;

    fn add(self, rhs: f64) -> f64 {
        self.0 + rhs
    }
}

impl Sub for SimTime {
    type Output = f64;

    fn sub(self, rhs: SimTime) -> f64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
