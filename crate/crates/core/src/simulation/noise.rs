// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TimeSeries;

/// Noise distribution. Both families are parameterized by their standard
/// deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian {
        sigma: f64,
    },
    /// Student t with `df` degrees of freedom rescaled to standard deviation
    /// `scale` (for `df ≤ 2`, where the variance is infinite, `scale`
    /// multiplies the standard t).
    Student {
        df: f64,
        scale: f64,
    },
}

impl NoiseFamily {
    /// Nominal standard deviation.
    pub fn sigma(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma,
            Self::Student { scale, .. } => scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Gaussian { sigma } => sigma.is_finite() && sigma >= 0.0,
            Self::Student { df, scale } => {
                df.is_finite() && df > 0.0 && scale.is_finite() && scale >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid noise parameters: {self:?}"
            )))
        }
    }
}

/// A noise family with its generator seed. The generator is ChaCha8 seeded
/// from the 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            family: NoiseFamily::Gaussian { sigma },
            seed,
        }
    }

    pub fn student(df: f64, scale: f64, seed: u64) -> Self {
        Self {
            family: NoiseFamily::Student { df, scale },
            seed,
        }
    }
}

/// `y_t = signal_t + ε_t` with i.i.d. draws from the noise family.
pub fn add_noise(signal: &[f64], noise: &NoiseSpec) -> Result<TimeSeries> {
    noise.family.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let values = match noise.family {
        NoiseFamily::Gaussian { sigma: 0.0 } => signal.to_vec(),
        NoiseFamily::Student { scale: 0.0, .. } => signal.to_vec(),
        NoiseFamily::Gaussian { sigma } => {
            let dist = Normal::new(0.0, sigma).expect("validated sigma");
            signal.iter().map(|s| s + dist.sample(&mut rng)).collect()
        }
        NoiseFamily::Student { df, scale } => {
            let dist = StudentT::new(df).expect("validated df");
            let factor = if df > 2.0 {
                scale * ((df - 2.0) / df).sqrt()
            } else {
                scale
            };
            signal
                .iter()
                .map(|s| s + factor * dist.sample(&mut rng))
                .collect()
        }
    };
    TimeSeries::new(values)
}
