// SPDX-License-Identifier: MIT OR Apache-2.0

//! Candidate reduction for the dynamic program.
//!
//! Two strategies are available. The channel method restricts, for every
//! previous column `t'`, the scanned states to an interval built from the
//! monotone runs of that column and the argmin `v*` of the segment cost; it
//! is recomputed at every step, so skipped couples may come back later. The
//! inequality family removes couples permanently: a couple `(t', u)` is
//! dropped for target state `v` once affine envelopes of the future data
//! certify it can never beat `(t, v)`, and same-state couples obey a
//! keep-exactly-one rule.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintSpec;
use crate::error::{Error, Result};
use crate::model::{PrefixSums, SegmentStats, StateGrid};

/// Acceleration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruningSpec {
    None,
    #[default]
    Channel,
    Inequality,
}

impl PruningSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Channel => "channel",
            Self::Inequality => "inequality",
        }
    }

    /// Channel pruning tolerates the isotonic constraint; inequality pruning
    /// needs the unconstrained recursion.
    pub fn supports(&self, constraint: &ConstraintSpec) -> bool {
        match self {
            Self::None => true,
            Self::Channel => matches!(constraint, ConstraintSpec::None | ConstraintSpec::Isotonic),
            Self::Inequality => matches!(constraint, ConstraintSpec::None),
        }
    }

    pub fn check(&self, constraint: &ConstraintSpec) -> Result<()> {
        if self.supports(constraint) {
            Ok(())
        } else {
            Err(Error::config(format!(
                "{} pruning cannot be combined with the {} constraint",
                self.name(),
                constraint.name()
            )))
        }
    }
}

impl std::fmt::Display for PruningSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Argmin over the left state of the cost of `y_{t'+1..t}` when the right
/// state is `vtilde`. Needs at least two points.
pub fn vstar(ps: &PrefixSums, tprime: usize, t: usize, vtilde: f64) -> Result<f64> {
    ps.check_range(tprime, t)?;
    if tprime + 1 >= t {
        return Err(Error::guard(format!(
            "v* needs a segment of at least two points; got ({tprime}, {t}]"
        )));
    }
    Ok(vstar_unchecked(ps, tprime, t, vtilde))
}

#[inline]
pub(crate) fn vstar_unchecked(ps: &PrefixSums, tprime: usize, t: usize, vtilde: f64) -> f64 {
    let (a, b) = vstar_affine(ps, tprime, t);
    a - vtilde * b
}

/// `v* = a − ṽ·b`; `(a, b)` only depend on the segment.
#[inline]
pub(crate) fn vstar_affine(ps: &PrefixSums, tprime: usize, t: usize) -> (f64, f64) {
    let len = (t - tprime) as f64;
    let denom = 2.0 * len - 1.0;
    let a = 6.0 / ((len - 1.0) * denom) * ps.reverse_weighted_sum(tprime, t);
    (a, (len + 1.0) / denom)
}

/// Monotone-run boundaries of a finalized column `v ↦ Q_{t'}(v)`, as grid
/// indices. The column is non-increasing on `[0, v_l]` and non-decreasing on
/// `[v_u, m-1]`, with `v_l ≤ v_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelState {
    pub v_l: usize,
    pub v_u: usize,
}

/// Scan a finalized column for its monotone runs. A column that is entirely
/// non-decreasing (constant included) maps to `(0, 0)`; one that is entirely
/// non-increasing to `(m-1, m-1)`.
pub fn update_channel_column(column: &[f64]) -> ChannelState {
    assert!(!column.is_empty(), "column must not be empty");
    let last = column.len() - 1;
    let mut v_l = 0;
    while v_l < last && column[v_l + 1] <= column[v_l] {
        v_l += 1;
    }
    let mut v_u = last;
    while v_u > 0 && column[v_u - 1] <= column[v_u] {
        v_u -= 1;
    }
    if v_u == 0 {
        ChannelState { v_l: 0, v_u: 0 }
    } else if v_l == last {
        ChannelState {
            v_l: last,
            v_u: last,
        }
    } else {
        ChannelState {
            v_l,
            v_u: v_u.max(v_l),
        }
    }
}

/// The interval of states that must contain the argmin of
/// `q_{t'} + C(·, ṽ)`: everything below `min(v_l, [v*])` and above
/// `max(v_u, [v*])` is excluded, `[v*]` being the nearest state.
pub fn channel_interval(
    channel: ChannelState,
    vstar_value: f64,
    grid: &StateGrid,
) -> RangeInclusive<usize> {
    let nearest = grid.nearest_index(vstar_value);
    channel.v_l.min(nearest)..=channel.v_u.max(nearest)
}

/// Range scanned by the solver: [`channel_interval`] widened to both states
/// bracketing `v*`, so the first minimizer in grid order is always inside
/// the range even when `v*` sits at a midpoint.
#[inline]
pub(crate) fn channel_scan_range(
    channel: ChannelState,
    vstar_value: f64,
    grid: &StateGrid,
) -> (usize, usize) {
    let (lo, hi) = grid.bracket(vstar_value);
    (channel.v_l.min(lo), channel.v_u.max(hi))
}

/// `g_t(T) = Σ_{i=t+1..T-1} y_i (T − i)/(T − t)`, zero for `T = t + 1`.
pub fn future_weighted_mean(ps: &PrefixSums, t: usize, big_t: usize) -> f64 {
    if big_t <= t + 1 {
        return 0.0;
    }
    // weights (T-1-i) plus one more copy of each y_i
    let sum = ps.s1()[big_t - 1] - ps.s1()[t];
    (ps.reverse_weighted_sum(t, big_t - 1) + sum) / (big_t - t) as f64
}

/// Affine lower (`+`) and upper (`−`) envelopes of `T ↦ g_t(T)` on
/// `T = t+1..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBounds {
    pub alpha_plus: f64,
    pub gamma_plus: f64,
    pub alpha_minus: f64,
    pub gamma_minus: f64,
}

impl EnvelopeBounds {
    pub fn lower(&self, big_t: usize) -> f64 {
        self.alpha_plus * big_t as f64 + self.gamma_plus
    }

    pub fn upper(&self, big_t: usize) -> f64 {
        self.alpha_minus * big_t as f64 + self.gamma_minus
    }
}

/// Least-squares line through `(T, g_t(T))`, shifted down (resp. up) until it
/// lies below (resp. above) every sample.
pub fn compute_envelopes(ps: &PrefixSums, t: usize) -> Result<EnvelopeBounds> {
    let n = ps.len();
    if t >= n {
        return Err(Error::guard(format!(
            "envelopes need future data: t = {t} must be below n = {n}"
        )));
    }
    let g: Vec<f64> = (t + 1..=n)
        .map(|big_t| future_weighted_mean(ps, t, big_t))
        .collect();
    let count = g.len() as f64;
    let mean_x = (t + 1 + n) as f64 / 2.0;
    let mean_g = g.iter().sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &gv) in g.iter().enumerate() {
        let dx = (t + 1 + k) as f64 - mean_x;
        sxy += dx * (gv - mean_g);
        sxx += dx * dx;
    }
    let alpha = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut scale: f64 = 1.0;
    for (k, &gv) in g.iter().enumerate() {
        let x = (t + 1 + k) as f64;
        let r = gv - alpha * x;
        lo = lo.min(r);
        hi = hi.max(r);
        scale = scale.max(gv.abs()).max((alpha * x).abs());
    }
    // rounding slack so the sandwich holds in floating point
    let slack = 1e-12 * scale;
    Ok(EnvelopeBounds {
        alpha_plus: alpha,
        gamma_plus: lo - slack,
        alpha_minus: alpha,
        gamma_minus: hi + slack,
    })
}

/// The affine certificate of the inequality rule for candidate `(t', u)`
/// against `(t, v)`: true when `(t', u)` can never beat `(t, v)` extended at
/// constant state, for every future `T`. Assumes the trigger inequality.
#[inline]
pub(crate) fn envelope_certificate(
    ps: &PrefixSums,
    env: &EnvelopeBounds,
    tprime: usize,
    t: usize,
    u: f64,
    v: f64,
) -> bool {
    let n = ps.len();
    let len = (t - tprime) as f64;
    let mix = (u + 2.0 * v) / 6.0;
    let base =
        tprime as f64 * mix - (v - u) / (12.0 * len) + ps.forward_weighted_sum(tprime, t) / len;
    let at = |alpha: f64, gamma: f64, big_t: usize| (alpha - mix) * big_t as f64 + base + gamma;
    if v > u {
        at(env.alpha_plus, env.gamma_plus, t + 1) >= 0.0
            && at(env.alpha_plus, env.gamma_plus, n) >= 0.0
    } else if v < u {
        at(env.alpha_minus, env.gamma_minus, t + 1) <= 0.0
            && at(env.alpha_minus, env.gamma_minus, n) <= 0.0
    } else {
        false
    }
}

/// Inequality rule for a couple `(t', u)` with `u ≠ v`, evaluated once
/// `Q_t(v)` is known. Returns true when the couple can be dropped from all
/// future candidate sets of state `v`.
pub fn inequality_prune(
    ps: &PrefixSums,
    q_candidate: f64,
    q_current: f64,
    candidate: (usize, f64),
    current: (usize, f64),
    env: &EnvelopeBounds,
) -> bool {
    let ((tprime, u), (t, v)) = (candidate, current);
    if u == v || tprime >= t || t >= ps.len() {
        return false;
    }
    let cost = SegmentStats::new(ps, tprime, t).cost(u, v);
    // a NaN partial cost never triggers the rule
    if q_candidate + cost <= q_current || (q_candidate + cost).is_nan() {
        return false;
    }
    envelope_certificate(ps, env, tprime, t, u, v)
}

/// Outcome of the same-state rule for the pair `(t', v)`, `(t, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SameStateOutcome {
    /// `Q_{t'}(v) + C(t'..t, v, v) > Q_t(v)`: the older couple is dominated.
    DropOlder,
    /// Otherwise the new couple `(t, v)` is dominated by the older one.
    DropCurrent,
}

/// Exactly one of the two same-state rules fires.
pub fn same_state_prune(q_older: f64, cost_constant: f64, q_current: f64) -> SameStateOutcome {
    if q_older + cost_constant > q_current {
        SameStateOutcome::DropOlder
    } else {
        SameStateOutcome::DropCurrent
    }
}
