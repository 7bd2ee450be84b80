// SPDX-License-Identifier: MIT OR Apache-2.0

//! Validity tests and memory functions for constrained inference.
//!
//! A constrained step from couple `(t', u)` to couple `(t, v)` is admissible
//! when `validity(memory(t', u), (t', u), (t, v))` holds. The memory of a
//! cell is a single real derived from the optimal incoming segment, written
//! once right after the cell's value is final.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position/state couple `(t, value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couple {
    pub t: usize,
    pub value: f64,
}

impl Couple {
    pub fn new(t: usize, value: f64) -> Self {
        Self { t, value }
    }
}

/// Inference mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConstraintSpec {
    #[default]
    None,
    /// Non-decreasing states.
    Isotonic,
    /// States increase (weakly) then decrease (weakly); never rise again after
    /// the first strictly decreasing segment.
    Unimodal,
    /// Interior angle between consecutive segments at least the threshold.
    MinAngle { threshold_degrees: f64 },
}

impl ConstraintSpec {
    pub fn min_angle(threshold_degrees: f64) -> Result<Self> {
        let spec = Self::MinAngle { threshold_degrees };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::MinAngle { threshold_degrees } = *self {
            if !(threshold_degrees > 0.0 && threshold_degrees < 180.0) {
                return Err(Error::config(format!(
                    "minimal angle must lie in (0, 180) degrees; got {threshold_degrees}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Isotonic => "isotonic",
            Self::Unimodal => "unimodal",
            Self::MinAngle { .. } => "minangle",
        }
    }

    /// Memory of every couple at `t = 0`.
    pub fn initial_memory(&self) -> f64 {
        match self {
            Self::Unimodal => 1.0,
            _ => 0.0,
        }
    }

    /// Whether the memory carries information (true for unimodal and
    /// minimal-angle).
    pub fn has_memory(&self) -> bool {
        matches!(self, Self::Unimodal | Self::MinAngle { .. })
    }
}

impl std::fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MinAngle { threshold_degrees } => write!(f, "minangle({threshold_degrees})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Slope between two couples, in data units per index.
pub fn slope(prev: Couple, cur: Couple) -> f64 {
    (cur.value - prev.value) / (cur.t - prev.t) as f64
}

/// Angle in degrees, in `[0, 180]`, between two consecutive segments with the
/// given slopes: 180 for collinear segments, smaller for sharper kinks.
pub fn interior_angle(slope1: f64, slope2: f64) -> f64 {
    180.0 - (slope1.atan().to_degrees() - slope2.atan().to_degrees()).abs()
}

/// Validity test for the step `prev → cur`.
pub fn validity(mode: &ConstraintSpec, memory: f64, prev: Couple, cur: Couple) -> bool {
    match *mode {
        ConstraintSpec::None => true,
        ConstraintSpec::Isotonic => prev.value <= cur.value,
        ConstraintSpec::Unimodal => memory == 1.0 || prev.value >= cur.value,
        ConstraintSpec::MinAngle { threshold_degrees } => {
            // a segment starting at t = 0 has no predecessor
            prev.t == 0 || interior_angle(memory, slope(prev, cur)) >= threshold_degrees
        }
    }
}

/// Memory of `cur` once `prev → cur` has been selected as its optimal step.
pub fn memory_update(mode: &ConstraintSpec, prev_memory: f64, prev: Couple, cur: Couple) -> f64 {
    match mode {
        ConstraintSpec::None | ConstraintSpec::Isotonic => 0.0,
        ConstraintSpec::Unimodal => {
            if prev_memory == 0.0 || prev.value > cur.value {
                0.0
            } else {
                1.0
            }
        }
        ConstraintSpec::MinAngle { .. } => slope(prev, cur),
    }
}

/// The set of next-segment slopes admitted after a segment of slope
/// `memory`, as a closed interval. Equivalent to the minimal-angle validity
/// test but costs two comparisons per candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl SlopeWindow {
    pub const ANY: Self = Self {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn after(memory: f64, threshold_degrees: f64) -> Self {
        let slack = 180.0 - threshold_degrees;
        let center = memory.atan().to_degrees();
        let lo_deg = center - slack;
        let hi_deg = center + slack;
        let lo = if lo_deg <= -90.0 {
            f64::NEG_INFINITY
        } else {
            lo_deg.to_radians().tan()
        };
        let hi = if hi_deg >= 90.0 {
            f64::INFINITY
        } else {
            hi_deg.to_radians().tan()
        };
        Self { lo, hi }
    }

    #[inline(always)]
    pub fn admits(&self, slope: f64) -> bool {
        self.lo <= slope && slope <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISO: ConstraintSpec = ConstraintSpec::Isotonic;
    const UNI: ConstraintSpec = ConstraintSpec::Unimodal;

    fn c(t: usize, v: f64) -> Couple {
        Couple::new(t, v)
    }

    #[test]
    fn isotonic_allows_equality() {
        assert!(validity(&ISO, 0.0, c(1, 3.0), c(4, 3.0)));
        assert!(validity(&ISO, 0.0, c(1, 2.0), c(4, 3.0)));
        assert!(!validity(&ISO, 0.0, c(1, 4.0), c(4, 3.0)));
    }

    #[test]
    fn unimodal_validity_and_memory() {
        assert!(!validity(&UNI, 0.0, c(2, 2.0), c(5, 5.0)));
        assert!(validity(&UNI, 0.0, c(2, 5.0), c(5, 5.0)));
        assert!(validity(&UNI, 1.0, c(2, 2.0), c(5, 5.0)));

        assert_eq!(memory_update(&UNI, 1.0, c(0, 5.0), c(3, 2.0)), 0.0);
        assert_eq!(memory_update(&UNI, 1.0, c(0, 2.0), c(3, 5.0)), 1.0);
        assert_eq!(memory_update(&UNI, 1.0, c(0, 2.0), c(3, 2.0)), 1.0);
        assert_eq!(memory_update(&UNI, 0.0, c(0, 2.0), c(3, 5.0)), 0.0);
        assert_eq!(UNI.initial_memory(), 1.0);
    }

    #[test]
    fn interior_angle_examples() {
        assert!((interior_angle(0.24, -0.24) - 153.01).abs() < 0.01);
        assert_eq!(interior_angle(0.7, 0.7), 180.0);
        assert!((interior_angle(1.0, -1.0) - 90.0).abs() < 1e-12);
        assert!((interior_angle(0.0, 1e9) - 90.0).abs() < 1e-6);
    }

    #[test]
    fn min_angle_validity() {
        let mode = ConstraintSpec::min_angle(130.0).unwrap();
        // previous slope 0.24, candidate slope -0.24
        assert!(validity(&mode, 0.24, c(250, 60.0), c(500, 0.0)));
        // previous slope 1, candidate slope -1: 90 degrees
        assert!(!validity(&mode, 1.0, c(4, 4.0), c(8, 0.0)));
        // first segment is free
        assert!(validity(&mode, 123.0, c(0, 0.0), c(1, 50.0)));
        assert_eq!(memory_update(&mode, 0.0, c(0, 0.0), c(4, 4.0)), 1.0);
    }

    #[test]
    fn min_angle_threshold_validation() {
        assert!(ConstraintSpec::min_angle(0.0).is_err());
        assert!(ConstraintSpec::min_angle(180.0).is_err());
        assert!(ConstraintSpec::min_angle(f64::NAN).is_err());
        assert!(ConstraintSpec::min_angle(90.0).is_ok());
    }

    #[test]
    fn slope_window_matches_angle_test() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20_000 {
            let threshold = 1.0 + 178.0 * next();
            let m = (next() - 0.5) * 20.0;
            let s = (next() - 0.5) * 20.0;
            let window = SlopeWindow::after(m, threshold);
            let direct = interior_angle(m, s) >= threshold;
            // skip measure-zero boundary cases
            if (interior_angle(m, s) - threshold).abs() > 1e-9 {
                assert_eq!(
                    window.admits(s),
                    direct,
                    "m={m} s={s} threshold={threshold}"
                );
            }
        }
    }
}
