// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exhaustive reference solver for tiny instances.
//!
//! Every change-point subset and every state assignment is enumerated. For
//! constrained modes each cell `(t, v)` gets the memory of its own exhaustive
//! optimum, so the admissibility of a step is judged with the same
//! information the recursion has. Ties follow the recursion's rule: compare
//! the total, then the last change-point, then the last state, then the
//! value of the prefix, and so on backwards.

use std::cmp::Ordering;

use crate::constraint::{memory_update, validity, Couple};
use crate::dp::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{PrefixSums, SegmentStats, Segmentation, StateGrid, TimeSeries};

/// Largest series length accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_N: usize = 12;
/// Largest grid size accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_M: usize = 5;

#[derive(Debug, Clone)]
struct Path {
    /// knots `(t_j, s_j)`, starting at `t = 0`
    knots: Vec<(usize, usize)>,
    /// running value at each knot, `−β` at the first
    values: Vec<f64>,
}

impl Path {
    fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Backward lexicographic comparison on (value, position, state).
    fn cmp_dp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (self.knots.len(), other.knots.len());
        loop {
            i -= 1;
            j -= 1;
            let by_value = self.values[i].total_cmp(&other.values[j]);
            if by_value != Ordering::Equal {
                return by_value;
            }
            if i == 0 || j == 0 {
                return i.cmp(&j);
            }
            let by_knot = self.knots[i - 1].cmp(&other.knots[j - 1]);
            if by_knot != Ordering::Equal {
                return by_knot;
            }
        }
    }
}

/// Globally optimal segmentation by exhaustive enumeration, for `n ≤ 12`
/// and `m ≤ 5`. The pruning field of `config` is ignored.
pub fn brute_force_oracle(
    y: &TimeSeries,
    grid: &StateGrid,
    config: &SolverConfig,
) -> Result<Segmentation> {
    let (n, m) = (y.len(), grid.len());
    if n > ORACLE_MAX_N || m > ORACLE_MAX_M {
        return Err(Error::guard(format!(
            "brute force is limited to n ≤ {ORACLE_MAX_N} and m ≤ {ORACLE_MAX_M}; got n = {n}, m = {m}"
        )));
    }
    config.constraint.validate()?;
    let ps = PrefixSums::new(y);
    let states = grid.states();
    let beta = config.beta;
    let mode = config.constraint;

    let mut memory = vec![vec![mode.initial_memory(); m]; n + 1];
    let mut final_best: Vec<Option<Path>> = vec![None; m];
    // cells of earlier columns only matter through their memory
    let first_t = if mode.has_memory() { 1 } else { n };

    for t in first_t..=n {
        for v in 0..m {
            let mut best: Option<Path> = None;
            for mask in 0u32..(1u32 << (t - 1)) {
                let inner: Vec<usize> = (1..t).filter(|p| mask & (1 << (p - 1)) != 0).collect();
                let mut positions = Vec::with_capacity(inner.len() + 2);
                positions.push(0);
                positions.extend(inner);
                positions.push(t);
                let free = positions.len() - 1;
                let mut assign = vec![0usize; free];
                loop {
                    if let Some(path) =
                        evaluate(&ps, states, &memory, &mode, beta, &positions, &assign, v)
                    {
                        if best
                            .as_ref()
                            .is_none_or(|b| path.cmp_dp(b) == Ordering::Less)
                        {
                            best = Some(path);
                        }
                    }
                    if !advance(&mut assign, m) {
                        break;
                    }
                }
            }
            if let Some(path) = &best {
                let k = path.knots.len();
                let (tp, u) = path.knots[k - 2];
                memory[t][v] = memory_update(
                    &mode,
                    memory[tp][u],
                    Couple::new(tp, states[u]),
                    Couple::new(t, states[v]),
                );
            } else {
                memory[t][v] = f64::NAN;
            }
            if t == n {
                final_best[v] = best;
            }
        }
    }

    let mut chosen: Option<Path> = None;
    for path in final_best.into_iter().flatten() {
        if chosen.as_ref().is_none_or(|c| path.total() < c.total()) {
            chosen = Some(path);
        }
    }
    let path = chosen.ok_or_else(|| Error::Infeasible("no admissible segmentation".into()))?;
    let idx: Vec<usize> = path.knots.iter().map(|&(_, s)| s).collect();
    Ok(Segmentation {
        changepoints: path.knots[1..].iter().map(|&(t, _)| t).collect(),
        states: idx.iter().map(|&i| states[i]).collect(),
        state_indices: idx,
        objective: path.total(),
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    ps: &PrefixSums,
    states: &[f64],
    memory: &[Vec<f64>],
    mode: &crate::constraint::ConstraintSpec,
    beta: f64,
    positions: &[usize],
    assign: &[usize],
    v_end: usize,
) -> Option<Path> {
    let k = positions.len();
    let state_at = |j: usize| if j + 1 == k { v_end } else { assign[j] };
    let mut knots = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    knots.push((0, state_at(0)));
    values.push(-beta);
    let mut acc = -beta;
    for j in 1..k {
        let (tp, t) = (positions[j - 1], positions[j]);
        let (u, v) = (state_at(j - 1), state_at(j));
        let prev = Couple::new(tp, states[u]);
        let cur = Couple::new(t, states[v]);
        if !validity(mode, memory[tp][u], prev, cur) {
            return None;
        }
        acc = (acc + SegmentStats::new(ps, tp, t).cost(states[u], states[v])) + beta;
        knots.push((t, v));
        values.push(acc);
    }
    Some(Path { knots, values })
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
