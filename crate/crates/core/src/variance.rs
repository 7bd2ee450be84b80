// SPDX-License-Identifier: MIT OR Apache-2.0

//! Noise level estimators for series with slopes, and the default penalty.

use crate::error::{Error, Result};
use crate::model::TimeSeries;

/// Order-3 Hall difference filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HallCoefficients {
    pub d: [f64; 4],
    /// Square root of the filter's energy on first differences.
    pub delta: f64,
}

impl HallCoefficients {
    pub const ORDER3: Self = Self {
        d: [0.1942, 0.2809, 0.3832, -0.8582],
        delta: 1.527507,
    };

    /// `d0² + (d1−d0)² + (d2−d1)² + (d3−d2)² + d3²`, the energy of the filter
    /// applied to first differences of white noise.
    pub fn difference_energy(&self) -> f64 {
        let d = self.d;
        d[0] * d[0]
            + (d[1] - d[0]).powi(2)
            + (d[2] - d[1]).powi(2)
            + (d[3] - d[2]).powi(2)
            + d[3] * d[3]
    }

    #[inline]
    fn apply(&self, w: &[f64]) -> f64 {
        self.d[0] * w[0] + self.d[1] * w[1] + self.d[2] * w[2] + self.d[3] * w[3]
    }
}

fn need(y: &TimeSeries, min: usize, what: &str) -> Result<()> {
    if y.len() < min {
        return Err(Error::guard(format!(
            "{what} needs at least {min} observations; got {}",
            y.len()
        )));
    }
    Ok(())
}

fn first_differences(y: &[f64]) -> Vec<f64> {
    y.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Hall's order-3 variance estimate, applied directly to the series.
pub fn hall_estimator(y: &TimeSeries) -> Result<f64> {
    need(y, 4, "the Hall estimator")?;
    let h = HallCoefficients::ORDER3;
    let windows = y.values().windows(4);
    let count = windows.len() as f64;
    Ok(windows.map(|w| h.apply(w).powi(2)).sum::<f64>() / count)
}

/// Hall's order-3 filter applied to first differences, which removes the
/// local slope before estimating the variance.
pub fn hall_diff_estimator(y: &TimeSeries) -> Result<f64> {
    need(y, 5, "the differenced Hall estimator")?;
    let h = HallCoefficients::ORDER3;
    let z = first_differences(y.values());
    let windows = z.windows(4);
    let count = windows.len() as f64;
    let sum: f64 = windows.map(|w| h.apply(w).powi(2)).sum();
    Ok(sum / (count * h.delta * h.delta))
}

/// Median absolute deviation of first differences, rescaled to a Gaussian
/// standard deviation. Returns σ̂, not σ̂².
pub fn mad_estimator(y: &TimeSeries) -> Result<f64> {
    need(y, 2, "the MAD estimator")?;
    let mut z = first_differences(y.values());
    let center = median(&mut z);
    let mut dev: Vec<f64> = z.iter().map(|x| (x - center).abs()).collect();
    Ok(median(&mut dev) / 0.67449 / std::f64::consts::SQRT_2)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

/// `β = 2σ̂² ln n`.
pub fn default_penalty(sigma2: f64, n: usize) -> f64 {
    2.0 * sigma2 * (n as f64).ln()
}
