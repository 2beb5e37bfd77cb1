use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::KernelError;

/// What a random stream is used for. Each purpose gets its own ChaCha stream
/// under the replication seed, so paired runs can share draws per purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Arrivals,
    EntryService,
    HelpService,
    ReturnService,
    FittingDuration,
    HelpDecision,
    GarmentCount,
}

impl Purpose {
    pub const ALL: [Purpose; 7] = [
        Purpose::Arrivals,
        Purpose::EntryService,
        Purpose::HelpService,
        Purpose::ReturnService,
        Purpose::FittingDuration,
        Purpose::HelpDecision,
        Purpose::GarmentCount,
    ];

    pub fn stream_index(self) -> u64 {
        self as u64
    }
}

/// Continuous variate descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Deterministic { value: f64 },
    Exponential { rate: f64 },
}

impl Distribution {
    pub fn exponential_mean(mean: f64) -> Distribution {
        Distribution::Exponential { rate: 1.0 / mean }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            Distribution::Deterministic { value } if !(value.is_finite() && value >= 0.0) => Err(
                KernelError::InvalidDistributionParameter(format!("deterministic value {value}")),
            ),
            Distribution::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => Err(
                KernelError::InvalidDistributionParameter(format!("exponential rate {rate}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Deterministic { value } => value,
            Distribution::Exponential { rate } => 1.0 / rate,
        }
    }
}

/// Discrete variate on the positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountDistribution {
    Fixed { value: u32 },
    /// Geometric on {1, 2, ...} with the given mean (>= 1).
    ShiftedGeometric { mean: f64 },
}

impl CountDistribution {
    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            CountDistribution::Fixed { value: 0 } => Err(
                KernelError::InvalidDistributionParameter("fixed count must be positive".into()),
            ),
            CountDistribution::ShiftedGeometric { mean } if !(mean.is_finite() && mean >= 1.0) => {
                Err(KernelError::InvalidDistributionParameter(format!(
                    "shifted geometric mean {mean}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CountDistribution::Fixed { value } => value as f64,
            CountDistribution::ShiftedGeometric { mean } => mean,
        }
    }
}

/// A reproducible uniform source identified by `(seed, stream_index)`.
///
/// Backed by ChaCha8, whose output for a given key and stream is fixed by the
/// algorithm, so sequences match on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RngStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn for_purpose(seed: u64, purpose: Purpose) -> Self {
        Self::new(seed, purpose.stream_index())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn draw(&mut self, dist: &Distribution) -> Result<f64, KernelError> {
        dist.validate()?;
        Ok(match *dist {
            Distribution::Deterministic { value } => value,
            // inverse transform; 1 - u lies in (0, 1] so the log is finite
            Distribution::Exponential { rate } => -(1.0 - self.uniform()).ln() / rate,
        })
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn draw_count(&mut self, dist: &CountDistribution) -> Result<u32, KernelError> {
        dist.validate()?;
        Ok(match *dist {
            CountDistribution::Fixed { value } => value,
            CountDistribution::ShiftedGeometric { mean } => {
                let u = self.uniform();
                if mean <= 1.0 {
                    1
                } else {
                    let fail = 1.0 - 1.0 / mean;
                    let extra = ((1.0 - u).ln() / fail.ln()).floor();
                    1 + extra.min(u32::MAX as f64 - 1.0) as u32
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_is_constant() {
        let mut s = RngStream::new(1, 0);
        let d = Distribution::Deterministic { value: 7.5 };
        for _ in 0..10 {
            assert_eq!(s.draw(&d).unwrap(), 7.5);
        }
    }

    #[test]
    fn exponential_rate_zero_is_rejected() {
        let mut s = RngStream::new(1, 0);
        let err = s.draw(&Distribution::Exponential { rate: 0.0 });
        assert!(matches!(err, Err(KernelError::InvalidDistributionParameter(_))));
    }

    #[test]
    fn exponential_sample_mean() {
        // law of large numbers: sd of the mean is 0.5 / 1000 = 5e-4
        let mut s = RngStream::new(42, 3);
        let d = Distribution::Exponential { rate: 2.0 };
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.draw(&d).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RngStream::new(99, 4);
        let mut b = RngStream::new(99, 4);
        let xs: Vec<u64> = (0..64).map(|_| a.uniform().to_bits()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.uniform().to_bits()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(99, 0);
        let mut b = RngStream::new(99, 1);
        let xs: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn shifted_geometric_mean_and_support() {
        let mut s = RngStream::new(5, 6);
        let d = CountDistribution::ShiftedGeometric { mean: 3.0 };
        let n = 200_000;
        let mut total = 0u64;
        for _ in 0..n {
            let c = s.draw_count(&d).unwrap();
            assert!(c >= 1);
            total += c as u64;
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 3.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn count_validation() {
        assert!(CountDistribution::Fixed { value: 0 }.validate().is_err());
        assert!(CountDistribution::ShiftedGeometric { mean: 0.5 }.validate().is_err());
        assert_eq!(
            RngStream::new(0, 0).draw_count(&CountDistribution::ShiftedGeometric { mean: 1.0 }),
            Ok(1)
        );
    }
}
