// SPDX-License-Identifier: MIT OR Apache-2.0

//! Data containers and the segment cost.
//!
//! Time indices follow the 1-based convention used throughout the crate's
//! documentation: a series is `y_1..y_n`, a segment `(t', t]` covers
//! `y_{t'+1}..y_t` and is fitted by the straight line from value `u` at
//! index `t'` to value `v` at index `t`. The left value is "unseen": the
//! residual at `t'` belongs to the previous segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered, finite, non-empty sequence of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(
                "time series must contain at least one value",
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "time series value at index {} is not finite ({})",
                pos + 1,
                values[pos]
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: construction rejects empty input.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `y_i` with 1-based `i`.
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Cumulative sums `S1_t = Σ y_i`, `S2_t = Σ y_i²` and `S+_t = Σ i·y_i`
/// over `i = 1..t`, with `S_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSums {
    values: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    splus: Vec<f64>,
}

impl PrefixSums {
    pub fn new(y: &TimeSeries) -> Self {
        let n = y.len();
        let mut s1 = Vec::with_capacity(n + 1);
        let mut s2 = Vec::with_capacity(n + 1);
        let mut splus = Vec::with_capacity(n + 1);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        s1.push(a);
        s2.push(b);
        splus.push(c);
        for (k, &yi) in y.values().iter().enumerate() {
            a += yi;
            b += yi * yi;
            c += (k + 1) as f64 * yi;
            s1.push(a);
            s2.push(b);
            splus.push(c);
        }
        Self {
            values: y.values().to_vec(),
            s1,
            s2,
            splus,
        }
    }

    /// Series length `n`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `S1_0..S1_n`.
    pub fn s1(&self) -> &[f64] {
        &self.s1
    }

    /// `S2_0..S2_n`.
    pub fn s2(&self) -> &[f64] {
        &self.s2
    }

    /// `S+_0..S+_n`.
    pub fn splus(&self) -> &[f64] {
        &self.splus
    }

    /// `y_i` with 1-based `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// `Σ_{i=t'+1..t} (t − i)·y_i`.
    pub fn reverse_weighted_sum(&self, tprime: usize, t: usize) -> f64 {
        t as f64 * (self.s1[t] - self.s1[tprime]) - (self.splus[t] - self.splus[tprime])
    }

    /// `Σ_{i=t'+1..t} (i − t')·y_i`.
    pub fn forward_weighted_sum(&self, tprime: usize, t: usize) -> f64 {
        (self.splus[t] - self.splus[tprime]) - tprime as f64 * (self.s1[t] - self.s1[tprime])
    }

    pub(crate) fn check_range(&self, tprime: usize, t: usize) -> Result<()> {
        if tprime >= t || t > self.len() {
            return Err(Error::invalid(format!(
                "segment ({tprime}, {t}] is not a valid range for a series of length {}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Build the prefix sums of a series in `O(n)`.
pub fn build_prefix_sums(y: &TimeSeries) -> PrefixSums {
    PrefixSums::new(y)
}

/// The cost of a segment as a quadratic in its left state `u` once the right
/// state `v` is fixed: `cost(u) = c0 + u·(c1 + u·c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    #[inline(always)]
    pub fn eval(&self, u: f64) -> f64 {
        self.c0 + u * (self.c1 + u * self.c2)
    }
}

/// Per-segment sufficient statistics. Every cost evaluation in the crate goes
/// through [`SegmentStats::quadratic`], so the dynamic program, the oracle and
/// [`segment_cost_fast`] agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats {
    /// `Σ (i − t') y_i / L`
    w: f64,
    squares: f64,
    /// `−2 Σ y_i + 2w`
    linear: f64,
    /// `1/2 + L/3 + 1/(6L)`
    vv: f64,
    /// `L/3 − 1/(3L)`
    uv: f64,
    /// `−1/2 + L/3 + 1/(6L)`
    uu: f64,
    single: Option<f64>,
}

impl SegmentStats {
    /// Statistics of `y_{t'+1..t}`; the caller guarantees `t' < t ≤ n`.
    #[inline]
    pub fn new(ps: &PrefixSums, tprime: usize, t: usize) -> Self {
        let single = (t == tprime + 1).then(|| ps.value(t));
        let l = (t - tprime) as f64;
        let sum = ps.s1[t] - ps.s1[tprime];
        let w = ps.forward_weighted_sum(tprime, t) / l;
        Self {
            w,
            squares: ps.s2[t] - ps.s2[tprime],
            linear: -2.0 * sum + 2.0 * w,
            vv: 0.5 + l / 3.0 + 1.0 / (6.0 * l),
            uv: l / 3.0 - 1.0 / (3.0 * l),
            uu: -0.5 + l / 3.0 + 1.0 / (6.0 * l),
            single,
        }
    }

    /// Cost as a function of the left state with the right state fixed.
    ///
    /// A single-point segment only sees its right state; it is special-cased
    /// so that the cost is exactly independent of `u`.
    #[inline]
    pub fn quadratic(&self, v: f64) -> Quadratic {
        if let Some(y) = self.single {
            let r = y - v;
            return Quadratic {
                c0: r * r,
                c1: 0.0,
                c2: 0.0,
            };
        }
        Quadratic {
            c0: self.squares - 2.0 * v * self.w + v * v * self.vv,
            c1: self.linear + v * self.uv,
            c2: self.uu,
        }
    }

    #[inline]
    pub fn cost(&self, u: f64, v: f64) -> f64 {
        self.quadratic(v).eval(u)
    }
}

/// Residual sum of squares of `y_{t'+1..t}` around the line from `u` (at
/// `t'`) to `v` (at `t`), by direct summation.
pub fn segment_cost_naive(y: &TimeSeries, tprime: usize, t: usize, u: f64, v: f64) -> Result<f64> {
    if tprime >= t || t > y.len() {
        return Err(Error::invalid(format!(
            "segment ({tprime}, {t}] is not a valid range for a series of length {}",
            y.len()
        )));
    }
    let len = (t - tprime) as f64;
    Ok((tprime + 1..=t)
        .map(|i| {
            let fitted = u + (v - u) * (i - tprime) as f64 / len;
            let r = y.at(i) - fitted;
            r * r
        })
        .sum())
}

/// Same quantity as [`segment_cost_naive`] in `O(1)` from prefix sums.
pub fn segment_cost_fast(ps: &PrefixSums, tprime: usize, t: usize, u: f64, v: f64) -> Result<f64> {
    ps.check_range(tprime, t)?;
    Ok(SegmentStats::new(ps, tprime, t).cost(u, v))
}

/// Finite, strictly increasing set of admissible break values.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    states: Vec<f64>,
    /// `(first state, 1 / step)` for evenly spaced grids
    uniform: Option<(f64, f64)>,
}

impl StateGrid {
    pub fn new(states: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("state grid must contain at least one state"));
        }
        if let Some(bad) = states.iter().find(|s| !s.is_finite()) {
            return Err(Error::invalid(format!(
                "state grid contains a non-finite value ({bad})"
            )));
        }
        if let Some(w) = states.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "state grid must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            states,
            uniform: None,
        })
    }

    /// `min, min + step, ...` up to `max` inclusive (with a small tolerance
    /// on the last step).
    pub fn range(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::invalid("state range bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(Error::invalid(format!(
                "state step must be positive; got {step}"
            )));
        }
        if max < min {
            return Err(Error::invalid(format!(
                "state range max {max} is below min {min}"
            )));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        let states = (0..count).map(|k| min + k as f64 * step).collect();
        let mut grid = Self::new(states)?;
        grid.uniform = Some((min, 1.0 / step));
        Ok(grid)
    }

    /// Consecutive integers `min..=max`.
    pub fn integers(min: i64, max: i64) -> Result<Self> {
        Self::range(min as f64, max as f64, 1.0)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn value(&self, index: usize) -> f64 {
        self.states[index]
    }

    pub fn min(&self) -> f64 {
        self.states[0]
    }

    pub fn max(&self) -> f64 {
        self.states[self.states.len() - 1]
    }

    /// Index of the first state `≥ x` (`len()` if none).
    #[inline]
    fn lower_bound(&self, x: f64) -> usize {
        if let Some((start, inv_step)) = self.uniform {
            // the guess may be off by one either way; the loops correct it
            let guess = ((x - start) * inv_step).ceil();
            let mut k = if guess.is_nan() || guess <= 0.0 {
                0
            } else {
                (guess as usize).min(self.states.len())
            };
            while k > 0 && self.states[k - 1] >= x {
                k -= 1;
            }
            while k < self.states.len() && self.states[k] < x {
                k += 1;
            }
            k
        } else {
            self.states.partition_point(|&s| s < x)
        }
    }

    /// Indices of the states bracketing `x`: the largest state `≤ x` and the
    /// smallest state `≥ x`, clamped to the grid ends.
    #[inline]
    pub fn bracket(&self, x: f64) -> (usize, usize) {
        let last = self.states.len() - 1;
        let hi = self.lower_bound(x);
        if hi > last {
            return (last, last);
        }
        if self.states[hi] == x || hi == 0 {
            return (hi, hi);
        }
        (hi - 1, hi)
    }

    /// Nearest state index; exact midpoints resolve to the lower state.
    pub fn nearest_index(&self, x: f64) -> usize {
        let (lo, hi) = self.bracket(x);
        if lo == hi || x - self.states[lo] <= self.states[hi] - x {
            lo
        } else {
            hi
        }
    }

    /// Index of a value that is exactly a member of the grid.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let k = self.lower_bound(value);
        (k < self.states.len() && self.states[k] == value).then_some(k)
    }
}

/// A continuous piecewise-linear fit: change-points `τ_1 < … < τ_{k+1} = n`
/// and the states `s_0..s_{k+1}` taken at `τ_0 = 0, τ_1, …, τ_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub changepoints: Vec<usize>,
    pub states: Vec<f64>,
    pub state_indices: Vec<usize>,
    pub objective: f64,
}

impl Segmentation {
    /// Number of segments `k + 1`.
    pub fn segment_count(&self) -> usize {
        self.changepoints.len()
    }

    /// Positions `τ_0 = 0, τ_1, …, τ_{k+1}`.
    pub fn knots(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        std::iter::once(0)
            .chain(self.changepoints.iter().copied())
            .zip(self.states.iter().copied())
    }

    /// Slope of each segment in data units per index.
    pub fn slopes(&self) -> Vec<f64> {
        let knots: Vec<_> = self.knots().collect();
        knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64)
            .collect()
    }

    /// Structural checks against a series length and a grid.
    pub fn validate(&self, n: usize, grid: &StateGrid) -> Result<()> {
        if self.changepoints.is_empty() {
            return Err(Error::invalid("segmentation has no change-points"));
        }
        if self.states.len() != self.changepoints.len() + 1
            || self.state_indices.len() != self.states.len()
        {
            return Err(Error::invalid(format!(
                "segmentation has {} change-points but {} states ({} indices)",
                self.changepoints.len(),
                self.states.len(),
                self.state_indices.len()
            )));
        }
        if self.changepoints[0] == 0 || self.changepoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "change-points must be positive and strictly increasing",
            ));
        }
        if *self.changepoints.last().unwrap() != n {
            return Err(Error::invalid(format!(
                "last change-point {} differs from series length {n}",
                self.changepoints.last().unwrap()
            )));
        }
        for (&idx, &s) in self.state_indices.iter().zip(&self.states) {
            if idx >= grid.len() || grid.value(idx) != s {
                return Err(Error::invalid(format!(
                    "state {s} is not a member of the grid"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn prefix_sums_small() {
        let ps = build_prefix_sums(&ts(&[1.0, 2.0, 3.0]));
        assert_eq!(ps.s1(), &[0.0, 1.0, 3.0, 6.0]);
        assert_eq!(ps.s2(), &[0.0, 1.0, 5.0, 14.0]);
        assert_eq!(ps.splus(), &[0.0, 1.0, 5.0, 14.0]);

        let zero = build_prefix_sums(&ts(&[0.0, 0.0]));
        assert!(zero
            .s1()
            .iter()
            .chain(zero.s2())
            .chain(zero.splus())
            .all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_bad_series() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn cost_examples() {
        let y = ts(&[1.0, 2.0, 3.0, 4.0]);
        let ps = build_prefix_sums(&y);
        assert_eq!(segment_cost_naive(&y, 0, 4, 0.0, 4.0).unwrap(), 0.0);
        assert!(segment_cost_fast(&ps, 0, 4, 0.0, 4.0).unwrap().abs() < 1e-12);

        let y = ts(&[1.0, 1.0]);
        let ps = build_prefix_sums(&y);
        assert_eq!(segment_cost_naive(&y, 0, 2, 0.0, 0.0).unwrap(), 2.0);
        assert!((segment_cost_fast(&ps, 0, 2, 0.0, 0.0).unwrap() - 2.0).abs() < 1e-12);

        let y = ts(&[1.0, 2.0]);
        let ps = build_prefix_sums(&y);
        assert_eq!(segment_cost_naive(&y, 0, 2, 0.0, 2.0).unwrap(), 0.0);
        assert!(segment_cost_fast(&ps, 0, 2, 0.0, 2.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_point_segment_ignores_left_state() {
        let y = ts(&[3.0, 7.5, -1.0]);
        let ps = build_prefix_sums(&y);
        assert_eq!(segment_cost_fast(&ps, 1, 2, -100.0, 7.5).unwrap(), 0.0);
        let a = segment_cost_fast(&ps, 2, 3, 4.0, 1.0).unwrap();
        let b = segment_cost_fast(&ps, 2, 3, -9.0, 1.0).unwrap();
        assert_eq!(a, 4.0);
        assert_eq!(a, b);
    }

    #[test]
    fn cost_rejects_bad_ranges() {
        let y = ts(&[1.0, 2.0]);
        let ps = build_prefix_sums(&y);
        assert!(segment_cost_naive(&y, 2, 2, 0.0, 0.0).is_err());
        assert!(segment_cost_naive(&y, 0, 3, 0.0, 0.0).is_err());
        assert!(segment_cost_fast(&ps, 1, 0, 0.0, 0.0).is_err());
        assert!(segment_cost_fast(&ps, 0, 3, 0.0, 0.0).is_err());
    }

    #[test]
    fn grid_construction() {
        assert!(StateGrid::new(vec![]).is_err());
        assert!(StateGrid::new(vec![0.0, 0.0]).is_err());
        assert!(StateGrid::new(vec![1.0, 0.0]).is_err());
        let g = StateGrid::range(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.states(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = StateGrid::range(0.0, 0.9, 0.5).unwrap();
        assert_eq!(g.states(), &[0.0, 0.5]);
        assert!(StateGrid::range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn nearest_and_bracket() {
        for grid in [
            StateGrid::integers(0, 4).unwrap(),
            StateGrid::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap(),
        ] {
            assert_eq!(grid.nearest_index(2.3), 2);
            assert_eq!(grid.nearest_index(2.5), 2);
            assert_eq!(grid.nearest_index(2.51), 3);
            assert_eq!(grid.nearest_index(-7.0), 0);
            assert_eq!(grid.nearest_index(99.0), 4);
            assert_eq!(grid.bracket(2.3), (2, 3));
            assert_eq!(grid.bracket(3.0), (3, 3));
            assert_eq!(grid.bracket(-1.0), (0, 0));
            assert_eq!(grid.bracket(4.5), (4, 4));
            assert_eq!(grid.index_of(3.0), Some(3));
            assert_eq!(grid.index_of(3.5), None);
        }
    }

    #[test]
    fn segmentation_validation() {
        let grid = StateGrid::integers(0, 4).unwrap();
        let seg = Segmentation {
            changepoints: vec![4, 8],
            states: vec![0.0, 4.0, 0.0],
            state_indices: vec![0, 4, 0],
            objective: 0.1,
        };
        assert!(seg.validate(8, &grid).is_ok());
        assert!(seg.validate(9, &grid).is_err());
        assert_eq!(seg.slopes(), vec![1.0, -1.0]);
        let mut bad = seg.clone();
        bad.states[1] = 3.5;
        assert!(bad.validate(8, &grid).is_err());
    }
}
