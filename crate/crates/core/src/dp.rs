// SPDX-License-Identifier: MIT OR Apache-2.0

//! The change-in-slope optimal partitioning recursion over a finite grid.
//!
//! `Q_t(v)` is the best penalized cost of `y_1..y_t` with the fitted signal
//! equal to `v` at `t`:
//!
//! ```text
//! Q_0(v) = −β
//! Q_t(v) = min over t' < t, u admissible of  Q_{t'}(u) + C(y_{t'+1..t}, u, v) + β
//! ```
//!
//! Ties are broken towards the smallest `t'`, then the smallest `u` in grid
//! order, which makes every strategy return the same segmentation.

use crate::constraint::{memory_update, ConstraintSpec, Couple, SlopeWindow};
use crate::error::{Error, Result};
use crate::model::{PrefixSums, Quadratic, SegmentStats, Segmentation, StateGrid, TimeSeries};
use crate::pruning::{
    channel_scan_range, compute_envelopes, envelope_certificate, same_state_prune,
    update_channel_column, vstar_affine, ChannelState, PruningSpec, SameStateOutcome,
};

/// Penalty, constraint and acceleration strategy of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub constraint: ConstraintSpec,
    pub pruning: PruningSpec,
}

impl SolverConfig {
    /// Unconstrained, channel-accelerated.
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            constraint: ConstraintSpec::None,
            pruning: PruningSpec::Channel,
        }
    }

    #[must_use]
    pub fn with_constraint(mut self, constraint: ConstraintSpec) -> Self {
        self.constraint = constraint;
        self
    }

    #[must_use]
    pub fn with_pruning(mut self, pruning: PruningSpec) -> Self {
        self.pruning = pruning;
        self
    }

    /// Use the channel method when the constraint allows it, no pruning
    /// otherwise.
    #[must_use]
    pub fn with_best_pruning(mut self) -> Self {
        self.pruning = if PruningSpec::Channel.supports(&self.constraint) {
            PruningSpec::Channel
        } else {
            PruningSpec::None
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::config(format!(
                "penalty must be finite and non-negative; got {}",
                self.beta
            )));
        }
        self.constraint.validate()?;
        self.pruning.check(&self.constraint)
    }
}

/// Number of `(t', u)` couples an unpruned unconstrained run scans:
/// `Σ_{t=1..n} t·m²`.
pub fn full_scan_count(n: usize, m: usize) -> u64 {
    (m as u64) * (m as u64) * (n as u64) * (n as u64 + 1) / 2
}

/// Output of [`slope_op`].
#[derive(Debug, Clone, PartialEq)]
pub struct DpTables {
    n: usize,
    m: usize,
    beta: f64,
    q: Vec<f64>,
    cp: Vec<usize>,
    prev: Vec<usize>,
    memory: Vec<f64>,
    scanned: u64,
}

impl DpTables {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `Q(t, v)` for `t = 0..n`; `+∞` marks a cell without admissible
    /// predecessor.
    pub fn q(&self, t: usize, v: usize) -> f64 {
        self.q[t * self.m + v]
    }

    pub fn column(&self, t: usize) -> &[f64] {
        &self.q[t * self.m..(t + 1) * self.m]
    }

    /// Best previous position `cp(t, v)`, `t ≥ 1`.
    pub fn changepoint(&self, t: usize, v: usize) -> usize {
        self.cp[(t - 1) * self.m + v]
    }

    /// Best previous state index `U(t, v)`, `t ≥ 1`.
    pub fn prev_state(&self, t: usize, v: usize) -> usize {
        self.prev[(t - 1) * self.m + v]
    }

    /// Constraint memory of cell `(t, v)`.
    pub fn memory(&self, t: usize, v: usize) -> f64 {
        self.memory[t * self.m + v]
    }

    /// Couples scanned while filling the table.
    pub fn scanned(&self) -> u64 {
        self.scanned
    }

    pub fn scanned_proportion(&self) -> f64 {
        self.scanned as f64 / full_scan_count(self.n, self.m) as f64
    }

    /// `(argmin_v Q(n, v), min_v Q(n, v))`, first state on ties; `None` when
    /// every final cell is infeasible.
    pub fn optimum(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (v, &val) in self.column(self.n).iter().enumerate() {
            if val.is_finite() && best.is_none_or(|(_, b)| val < b) {
                best = Some((v, val));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    val: f64,
    tp: usize,
    u: usize,
}

impl Best {
    const NONE: Self = Self {
        val: f64::INFINITY,
        tp: 0,
        u: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Free,
    Isotonic,
    Unimodal,
    MinAngle(f64),
}

impl Rule {
    fn of(spec: &ConstraintSpec) -> Self {
        match *spec {
            ConstraintSpec::None => Self::Free,
            ConstraintSpec::Isotonic => Self::Isotonic,
            ConstraintSpec::Unimodal => Self::Unimodal,
            ConstraintSpec::MinAngle { threshold_degrees } => Self::MinAngle(threshold_degrees),
        }
    }
}

/// Per-layer cell storage shared by the penalized and fixed-K recursions.
struct Layer {
    q: Vec<f64>,
    memory: Vec<f64>,
    windows: Vec<SlopeWindow>,
}

impl Layer {
    fn new(n: usize, m: usize, fill: f64, memory: f64) -> Self {
        Self {
            q: vec![fill; (n + 1) * m],
            memory: vec![memory; (n + 1) * m],
            windows: Vec::new(),
        }
    }
}

/// Minimize over `u ∈ [lo, hi]` for a fixed predecessor position.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn scan_states(
    rule: Rule,
    states: &[f64],
    src: &Layer,
    m: usize,
    tp: usize,
    t: usize,
    v_val: f64,
    quad: &Quadratic,
    (lo, hi): (usize, usize),
    add: f64,
    best: &mut Best,
) {
    let row = &src.q[tp * m..(tp + 1) * m];
    match rule {
        Rule::Free | Rule::Isotonic => {
            let (row, xs) = (&row[lo..=hi], &states[lo..=hi]);
            // four interleaved running minima, each keeping its first
            // minimizer; merged below by (value, index)
            let mut lanes = [f64::INFINITY; 4];
            let mut index = [0usize; 4];
            let (rc, xc) = (row.chunks_exact(4), xs.chunks_exact(4));
            let (rr, xr) = (rc.remainder(), xc.remainder());
            for (c, (r4, x4)) in rc.zip(xc).enumerate() {
                for j in 0..4 {
                    let val = (r4[j] + quad.eval(x4[j])) + add;
                    if val < lanes[j] {
                        lanes[j] = val;
                        index[j] = 4 * c + j;
                    }
                }
            }
            let tail = row.len() - rr.len();
            for (j, (&q, &x)) in rr.iter().zip(xr).enumerate() {
                let val = (q + quad.eval(x)) + add;
                if val < lanes[j] {
                    lanes[j] = val;
                    index[j] = tail + j;
                }
            }
            for j in 0..4 {
                if lanes[j] < best.val
                    || (lanes[j] == best.val && best.tp == tp && lo + index[j] < best.u)
                {
                    *best = Best {
                        val: lanes[j],
                        tp,
                        u: lo + index[j],
                    };
                }
            }
        }
        Rule::Unimodal => {
            let mem = &src.memory[tp * m..(tp + 1) * m];
            for u in lo..=hi {
                if mem[u] == 0.0 && states[u] < v_val {
                    continue;
                }
                let val = (row[u] + quad.eval(states[u])) + add;
                if val < best.val {
                    *best = Best { val, tp, u };
                }
            }
        }
        Rule::MinAngle(_) => {
            let windows = &src.windows[tp * m..(tp + 1) * m];
            let span = (t - tp) as f64;
            for u in lo..=hi {
                if tp > 0 && !windows[u].admits((v_val - states[u]) / span) {
                    continue;
                }
                let val = (row[u] + quad.eval(states[u])) + add;
                if val < best.val {
                    *best = Best { val, tp, u };
                }
            }
        }
    }
}

/// Memory (and slope window for minimal-angle) of a finalized cell whose
/// optimal predecessor is read from `src`.
#[allow(clippy::too_many_arguments)]
fn cell_memory(
    spec: &ConstraintSpec,
    rule: Rule,
    states: &[f64],
    src: &Layer,
    m: usize,
    t: usize,
    v: usize,
    best: &Best,
) -> Option<(f64, Option<SlopeWindow>)> {
    if !best.val.is_finite() || !spec.has_memory() {
        return None;
    }
    let mem = memory_update(
        spec,
        src.memory[best.tp * m + best.u],
        Couple::new(best.tp, states[best.u]),
        Couple::new(t, states[v]),
    );
    let window = match rule {
        Rule::MinAngle(threshold) => Some(SlopeWindow::after(mem, threshold)),
        _ => None,
    };
    Some((mem, window))
}

/// Fill the `Q`, `cp` and `U` tables.
pub fn slope_op(y: &TimeSeries, grid: &StateGrid, config: &SolverConfig) -> Result<DpTables> {
    config.validate()?;
    let ps = PrefixSums::new(y);
    match config.pruning {
        PruningSpec::None => Ok(run_scan(&ps, grid, config, false)),
        PruningSpec::Channel => Ok(run_scan(&ps, grid, config, true)),
        PruningSpec::Inequality => Ok(run_inequality(&ps, grid, config.beta)),
    }
}

// t' indexes several parallel tables, not just one slice
#[allow(clippy::needless_range_loop)]
fn run_scan(ps: &PrefixSums, grid: &StateGrid, config: &SolverConfig, channel: bool) -> DpTables {
    let n = ps.len();
    let m = grid.len();
    let states = grid.states();
    let beta = config.beta;
    let rule = Rule::of(&config.constraint);

    let mut layer = Layer::new(n, m, f64::INFINITY, config.constraint.initial_memory());
    layer.q[..m].fill(-beta);
    if matches!(rule, Rule::MinAngle(_)) {
        layer.windows = vec![SlopeWindow::ANY; (n + 1) * m];
    }
    let mut cp = vec![0usize; n * m];
    let mut prev = vec![0usize; n * m];
    let mut channels: Vec<ChannelState> = Vec::with_capacity(n + 1);
    if channel {
        channels.push(update_channel_column(&layer.q[..m]));
    }
    let mut scanned = 0u64;
    let mut best = vec![Best::NONE; m];

    for t in 1..=n {
        best.fill(Best::NONE);
        // predecessor-major order keeps row t' hot; per state, t' still
        // increases, so ties resolve as in the recursion
        for tp in 0..t {
            let seg = SegmentStats::new(ps, tp, t);
            let affine = (channel && tp + 1 < t).then(|| vstar_affine(ps, tp, t));
            for (v, cell) in best.iter_mut().enumerate() {
                let v_val = states[v];
                let top = if rule == Rule::Isotonic { v } else { m - 1 };
                let range = match affine {
                    Some((a, b)) => {
                        let (lo, hi) = channel_scan_range(channels[tp], a - v_val * b, grid);
                        (lo.min(top), hi.min(top))
                    }
                    None => (0, top),
                };
                scanned += (range.1 - range.0 + 1) as u64;
                let quad = seg.quadratic(v_val);
                scan_states(
                    rule, states, &layer, m, tp, t, v_val, &quad, range, beta, cell,
                );
            }
        }
        for (v, cell) in best.iter().enumerate() {
            layer.q[t * m + v] = cell.val;
            cp[(t - 1) * m + v] = cell.tp;
            prev[(t - 1) * m + v] = cell.u;
            // the predecessor cell lives in an earlier column of the same table
            if let Some((mem, window)) =
                cell_memory(&config.constraint, rule, states, &layer, m, t, v, cell)
            {
                layer.memory[t * m + v] = mem;
                if let Some(window) = window {
                    layer.windows[t * m + v] = window;
                }
            }
        }
        if channel {
            channels.push(update_channel_column(&layer.q[t * m..(t + 1) * m]));
        }
    }

    DpTables {
        n,
        m,
        beta,
        q: layer.q,
        cp,
        prev,
        memory: layer.memory,
        scanned,
    }
}

fn run_inequality(ps: &PrefixSums, grid: &StateGrid, beta: f64) -> DpTables {
    let n = ps.len();
    let m = grid.len();
    let states = grid.states();
    let mut q = vec![f64::INFINITY; (n + 1) * m];
    q[..m].fill(-beta);
    let mut cp = vec![0usize; n * m];
    let mut prev = vec![0usize; n * m];
    let mut scanned = 0u64;

    // per target state: surviving couples (t', u), kept sorted by (t', u)
    let mut candidates: Vec<Vec<(u32, u32)>> = (0..m)
        .map(|_| (0..m as u32).map(|u| (0, u)).collect())
        .collect();
    let mut partial: Vec<f64> = Vec::new();
    let mut keep_current = vec![true; m];

    let mut stats: Vec<SegmentStats> = Vec::with_capacity(n);
    for t in 1..=n {
        let envelopes = (t < n).then(|| compute_envelopes(ps, t).expect("t < n"));
        stats.clear();
        stats.extend((0..t).map(|tp| SegmentStats::new(ps, tp, t)));
        for v in 0..m {
            let v_val = states[v];
            let list = &mut candidates[v];
            partial.clear();
            let mut best = Best::NONE;
            for &(tp, u) in list.iter() {
                let (tp, u) = (tp as usize, u as usize);
                let cost = stats[tp].cost(states[u], v_val);
                let p = q[tp * m + u] + cost;
                partial.push(p);
                let val = p + beta;
                if val < best.val {
                    best = Best { val, tp, u };
                }
            }
            scanned += list.len() as u64;
            q[t * m + v] = best.val;
            cp[(t - 1) * m + v] = best.tp;
            prev[(t - 1) * m + v] = best.u;

            keep_current[v] = true;
            let Some(env) = envelopes.as_ref() else {
                continue;
            };
            let q_tv = best.val;
            let mut k = 0;
            list.retain(|&(tp, u)| {
                let p = partial[k];
                k += 1;
                let (tp, u) = (tp as usize, u as usize);
                if u == v {
                    match same_state_prune(p, 0.0, q_tv) {
                        SameStateOutcome::DropOlder => false,
                        SameStateOutcome::DropCurrent => {
                            keep_current[v] = false;
                            true
                        }
                    }
                } else {
                    !(p > q_tv && envelope_certificate(ps, env, tp, t, states[u], v_val))
                }
            });
        }
        if t < n {
            for (v, list) in candidates.iter_mut().enumerate() {
                for u in 0..m {
                    if u != v || keep_current[v] {
                        list.push((t as u32, u as u32));
                    }
                }
            }
        }
    }

    DpTables {
        n,
        m,
        beta,
        q,
        cp,
        prev,
        memory: vec![0.0; (n + 1) * m],
        scanned,
    }
}

/// Walk the `cp`/`U` tables back from the best final state.
pub fn backtrack(tables: &DpTables, grid: &StateGrid) -> Result<Segmentation> {
    let (v_end, objective) = tables.optimum().ok_or_else(|| {
        Error::Infeasible("no admissible segmentation reaches the end of the series".into())
    })?;
    let mut changepoints = Vec::new();
    let mut idx = vec![v_end];
    let (mut t, mut v) = (tables.n(), v_end);
    while t > 0 {
        changepoints.push(t);
        let u = tables.prev_state(t, v);
        t = tables.changepoint(t, v);
        v = u;
        idx.push(v);
    }
    changepoints.reverse();
    idx.reverse();
    Ok(Segmentation {
        changepoints,
        states: idx.iter().map(|&i| grid.value(i)).collect(),
        state_indices: idx,
        objective,
    })
}

/// Result of an end-to-end solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub segmentation: Segmentation,
    pub scanned: u64,
    pub scanned_proportion: f64,
}

/// [`slope_op`] followed by [`backtrack`].
pub fn solve(y: &TimeSeries, grid: &StateGrid, config: &SolverConfig) -> Result<Solution> {
    let tables = slope_op(y, grid, config)?;
    let segmentation = backtrack(&tables, grid)?;
    Ok(Solution {
        segmentation,
        scanned: tables.scanned(),
        scanned_proportion: tables.scanned_proportion(),
    })
}

/// Penalized cost of a given segmentation: `Σ (C_i + β) − β`, accumulated in
/// the same order as the recursion.
pub fn evaluate_segmentation(y: &TimeSeries, seg: &Segmentation, beta: f64) -> Result<f64> {
    let n = y.len();
    if seg.changepoints.is_empty() || seg.states.len() != seg.changepoints.len() + 1 {
        return Err(Error::invalid(format!(
            "segmentation has {} change-points and {} states",
            seg.changepoints.len(),
            seg.states.len()
        )));
    }
    if seg.changepoints[0] == 0
        || seg.changepoints.windows(2).any(|w| w[0] >= w[1])
        || *seg.changepoints.last().unwrap() != n
    {
        return Err(Error::invalid(format!(
            "change-points must increase strictly from 1 and end at n = {n}"
        )));
    }
    let ps = PrefixSums::new(y);
    let knots: Vec<_> = seg.knots().collect();
    Ok(knots.windows(2).fold(-beta, |acc, w| {
        let cost = SegmentStats::new(&ps, w[0].0, w[1].0).cost(w[0].1, w[1].1);
        (acc + cost) + beta
    }))
}

/// Best segmentation with exactly `k` segments (no penalty), by a layered
/// recursion over the segment count. The returned objective is the total
/// residual sum of squares.
#[allow(clippy::needless_range_loop)]
pub fn slope_op_fixed_k(
    y: &TimeSeries,
    grid: &StateGrid,
    k: usize,
    constraint: &ConstraintSpec,
) -> Result<Segmentation> {
    let n = y.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "segment count must lie in 1..={n}; got {k}"
        )));
    }
    constraint.validate()?;
    let ps = PrefixSums::new(y);
    let m = grid.len();
    let states = grid.states();
    let rule = Rule::of(constraint);

    let mut first = Layer::new(n, m, f64::INFINITY, constraint.initial_memory());
    first.q[..m].fill(0.0);
    if matches!(rule, Rule::MinAngle(_)) {
        first.windows = vec![SlopeWindow::ANY; (n + 1) * m];
    }
    let mut layers = vec![first];
    // per layer: (cp, prev) over (t, v), t = 1..n
    let mut links: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(k);
    let all_stats: Vec<Vec<SegmentStats>> = (0..=n)
        .map(|t| (0..t).map(|tp| SegmentStats::new(&ps, tp, t)).collect())
        .collect();

    for layer_idx in 1..=k {
        let src = &layers[layer_idx - 1];
        let mut dst = Layer::new(n, m, f64::INFINITY, constraint.initial_memory());
        if matches!(rule, Rule::MinAngle(_)) {
            dst.windows = vec![SlopeWindow::ANY; (n + 1) * m];
        }
        let mut cp = vec![0usize; n * m];
        let mut prev = vec![0usize; n * m];
        for t in layer_idx..=n {
            for v in 0..m {
                let v_val = states[v];
                let top = if rule == Rule::Isotonic { v } else { m - 1 };
                let mut best = Best::NONE;
                for tp in (layer_idx - 1)..t {
                    let quad = all_stats[t][tp].quadratic(v_val);
                    scan_states(
                        rule,
                        states,
                        src,
                        m,
                        tp,
                        t,
                        v_val,
                        &quad,
                        (0, top),
                        0.0,
                        &mut best,
                    );
                }
                dst.q[t * m + v] = best.val;
                cp[(t - 1) * m + v] = best.tp;
                prev[(t - 1) * m + v] = best.u;
                if let Some((mem, window)) =
                    cell_memory(constraint, rule, states, src, m, t, v, &best)
                {
                    dst.memory[t * m + v] = mem;
                    if let Some(window) = window {
                        dst.windows[t * m + v] = window;
                    }
                }
            }
        }
        layers.push(dst);
        links.push((cp, prev));
    }

    let last = &layers[k];
    let mut end: Option<(usize, f64)> = None;
    for v in 0..m {
        let val = last.q[n * m + v];
        if val.is_finite() && end.is_none_or(|(_, b)| val < b) {
            end = Some((v, val));
        }
    }
    let (v_end, objective) = end.ok_or_else(|| {
        Error::Infeasible(format!(
            "no admissible segmentation with {k} segments under the {} constraint",
            constraint.name()
        ))
    })?;

    let mut changepoints = Vec::with_capacity(k);
    let mut idx = vec![v_end];
    let (mut t, mut v) = (n, v_end);
    for layer_idx in (1..=k).rev() {
        changepoints.push(t);
        let (cp, prev) = &links[layer_idx - 1];
        let u = prev[(t - 1) * m + v];
        t = cp[(t - 1) * m + v];
        v = u;
        idx.push(v);
    }
    debug_assert_eq!(t, 0);
    changepoints.reverse();
    idx.reverse();
    Ok(Segmentation {
        changepoints,
        states: idx.iter().map(|&i| grid.value(i)).collect(),
        state_indices: idx,
        objective,
    })
}
