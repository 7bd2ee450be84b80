// SPDX-License-Identifier: MIT OR Apache-2.0

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Segmentation;

/// Shape of a true signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// Knots `(0, s_0), (τ_1, s_1), …, (τ_k = n, s_k)`.
    PiecewiseLinear {
        changepoints: Vec<usize>,
        states: Vec<f64>,
    },
    /// `lo` at both ends, `hi` at the middle index.
    Hat { lo: f64, hi: f64 },
    /// One of the four benchmark scenarios (2, 7, 6 and 8 segments).
    Scenario { id: u8 },
    Sinusoid {
        amplitude: f64,
        period: f64,
        offset: f64,
    },
}

/// A true signal of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub n: usize,
}

impl SignalSpec {
    pub fn hat(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            kind: SignalKind::Hat { lo, hi },
            n,
        }
    }

    pub fn scenario(id: u8, n: usize) -> Self {
        Self {
            kind: SignalKind::Scenario { id },
            n,
        }
    }

    pub fn sinusoid(amplitude: f64, period: f64, offset: f64, n: usize) -> Self {
        Self {
            kind: SignalKind::Sinusoid {
                amplitude,
                period,
                offset,
            },
            n,
        }
    }

    pub fn piecewise_linear(changepoints: Vec<usize>, states: Vec<f64>) -> Self {
        let n = changepoints.last().copied().unwrap_or(0);
        Self {
            kind: SignalKind::PiecewiseLinear {
                changepoints,
                states,
            },
            n,
        }
    }

    /// The same shape at another length.
    #[must_use]
    pub fn with_len(&self, n: usize) -> Self {
        let mut out = self.clone();
        if let SignalKind::PiecewiseLinear { changepoints, .. } = &mut out.kind {
            // rescale break positions proportionally
            let old = self.n.max(1) as f64;
            for cp in changepoints.iter_mut() {
                *cp = ((*cp as f64) * n as f64 / old).round() as usize;
            }
        }
        out.n = n;
        out
    }

    /// Knots `(position, value)` starting at position 0, for piecewise-linear
    /// shapes; `None` for the sinusoid.
    pub fn knots(&self) -> Result<Option<Vec<(usize, f64)>>> {
        let n = self.n;
        if n == 0 {
            return Err(Error::invalid("signal length must be positive"));
        }
        let knots = match &self.kind {
            SignalKind::PiecewiseLinear {
                changepoints,
                states,
            } => {
                if changepoints.is_empty() || states.len() != changepoints.len() + 1 {
                    return Err(Error::invalid(format!(
                        "piecewise-linear signal needs k change-points and k + 1 states; got {} and {}",
                        changepoints.len(),
                        states.len()
                    )));
                }
                if *changepoints.last().unwrap() != n {
                    return Err(Error::invalid(format!(
                        "last change-point must equal n = {n}"
                    )));
                }
                std::iter::once(0)
                    .chain(changepoints.iter().copied())
                    .zip(states.iter().copied())
                    .collect()
            }
            SignalKind::Hat { lo, hi } => {
                if n < 2 {
                    return Err(Error::invalid("a hat needs at least two points"));
                }
                vec![(0, *lo), (n / 2, *hi), (n, *lo)]
            }
            SignalKind::Scenario { id } => {
                let table = scenario_table()
                    .iter()
                    .find(|s| s.id == *id)
                    .ok_or_else(|| {
                        Error::invalid(format!("unknown scenario {id}; expected 1..=4"))
                    })?;
                table
                    .knots
                    .iter()
                    .map(|&(frac, value)| ((frac * n as f64).round() as usize, value))
                    .collect()
            }
            SignalKind::Sinusoid { .. } => return Ok(None),
        };
        let knots: Vec<(usize, f64)> = knots;
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid(format!(
                "n = {n} is too short for this signal's break positions"
            )));
        }
        if knots.iter().any(|k| !k.1.is_finite()) {
            return Err(Error::invalid("signal values must be finite"));
        }
        Ok(Some(knots))
    }

    /// Number of segments of a piecewise-linear shape.
    pub fn segment_count(&self) -> Result<Option<usize>> {
        Ok(self.knots()?.map(|k| k.len() - 1))
    }
}

#[derive(Debug, Deserialize)]
struct ScenarioEntry {
    id: u8,
    knots: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
struct ScenarioFile {
    scenarios: Vec<ScenarioEntry>,
}

fn scenario_table() -> &'static [ScenarioEntry] {
    static TABLE: OnceLock<Vec<ScenarioEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let file: ScenarioFile =
            serde_json::from_str(include_str!("../../fixtures/scenarios.json"))
                .expect("bundled scenario fixture parses");
        file.scenarios
    })
}

/// Linear interpolation through knots, evaluated at `t = 1..n`.
fn interpolate(knots: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for w in knots.windows(2) {
        let ((a, u), (b, v)) = (w[0], w[1]);
        let len = (b - a) as f64;
        for t in a + 1..=b {
            out.push(u + (v - u) * (t - a) as f64 / len);
        }
    }
    out
}

/// The true signal at `t = 1..n`.
pub fn generate_signal(spec: &SignalSpec) -> Result<Vec<f64>> {
    match spec.knots()? {
        Some(knots) => Ok(interpolate(&knots, spec.n)),
        None => {
            let SignalKind::Sinusoid {
                amplitude,
                period,
                offset,
            } = spec.kind
            else {
                unreachable!("only the sinusoid has no knots")
            };
            if period.is_nan() || period <= 0.0 {
                return Err(Error::invalid(format!(
                    "sinusoid period must be positive; got {period}"
                )));
            }
            Ok((1..=spec.n)
                .map(|t| offset + amplitude * (std::f64::consts::TAU * t as f64 / period).sin())
                .collect())
        }
    }
}

/// The fitted signal of a segmentation at `t = 1..n`.
pub fn reconstruct_signal(seg: &Segmentation, n: usize) -> Result<Vec<f64>> {
    if seg.changepoints.last() != Some(&n) || seg.states.len() != seg.changepoints.len() + 1 {
        return Err(Error::invalid(format!(
            "segmentation does not describe a series of length {n}"
        )));
    }
    let knots: Vec<_> = seg.knots().collect();
    if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::invalid("change-points must increase strictly"));
    }
    Ok(interpolate(&knots, n))
}

/// Mean squared difference.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(format!(
            "mse needs two non-empty sequences of equal length; got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}
