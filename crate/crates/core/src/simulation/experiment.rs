// SPDX-License-Identifier: MIT OR Apache-2.0

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{add_noise, NoiseFamily, NoiseSpec};
use super::signal::{generate_signal, mse, reconstruct_signal, SignalSpec};
use crate::constraint::ConstraintSpec;
use crate::dp::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::model::StateGrid;
use crate::pruning::PruningSpec;

/// One solve inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    /// Normalized penalty `β / (σ² ln n)`.
    pub b: f64,
    pub beta: f64,
    pub mse: f64,
    pub segments: usize,
    pub scanned_proportion: f64,
    pub wall_ms: f64,
    pub seed: u64,
}

/// Means over the replicates of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// Strategy, constraint or noise label of the cell.
    pub group: String,
    /// Scanned parameter (b, σ or n depending on the experiment).
    pub x: f64,
    pub replicates: usize,
    pub mean_mse: f64,
    pub mean_segments: f64,
    pub mean_scanned_proportion: f64,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// Least-squares slope of ln(time) on ln(n), timing experiments only.
    pub loglog_slope: Option<f64>,
}

impl ExperimentReport {
    /// Summary rows of one group.
    pub fn group(&self, name: &str) -> impl Iterator<Item = &SummaryRow> + '_ {
        let name = name.to_owned();
        self.summary.iter().filter(move |r| r.group == name)
    }

    /// `x` of the row with the smallest mean MSE in a group (first on ties).
    pub fn argmin_mse(&self, group: &str) -> Option<f64> {
        let mut best: Option<&SummaryRow> = None;
        for row in self.group(group) {
            if best.is_none_or(|b| row.mean_mse < b.mean_mse) {
                best = Some(row);
            }
        }
        best.map(|r| r.x)
    }

    /// Records with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.records {
            r.wall_ms = 0.0;
        }
        for r in &mut out.summary {
            r.mean_wall_ms = 0.0;
        }
        out
    }
}

/// `β = b σ² ln n`.
pub fn beta_from_b(b: f64, sigma: f64, n: usize) -> f64 {
    b * sigma * sigma * (n as f64).ln()
}

fn summarize(group: &str, x: f64, runs: &[RunRecord]) -> SummaryRow {
    let k = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(f).sum::<f64>() / k;
    SummaryRow {
        group: group.to_owned(),
        x,
        replicates: runs.len(),
        mean_mse: mean(&|r| r.mse),
        mean_segments: mean(&|r| r.segments as f64),
        mean_scanned_proportion: mean(&|r| r.scanned_proportion),
        mean_wall_ms: mean(&|r| r.wall_ms),
    }
}

/// Noisy series of one replicate; replicate `r` always uses seed `seed + r`
/// so cells of an experiment share their noise.
struct Replicate {
    seed: u64,
    truth: Vec<f64>,
    series: crate::model::TimeSeries,
}

fn replicate(spec: &SignalSpec, family: NoiseFamily, seed: u64) -> Result<Replicate> {
    let truth = generate_signal(spec)?;
    let series = add_noise(&truth, &NoiseSpec { family, seed })?;
    Ok(Replicate {
        seed,
        truth,
        series,
    })
}

fn run_one(
    rep: &Replicate,
    grid: &StateGrid,
    config: &SolverConfig,
    run_id: String,
    b: f64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let sol = solve(&rep.series, grid, config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let fitted = reconstruct_signal(&sol.segmentation, rep.series.len())?;
    Ok(RunRecord {
        run_id,
        b,
        beta: config.beta,
        mse: mse(&fitted, &rep.truth)?,
        segments: sol.segmentation.segment_count(),
        scanned_proportion: sol.scanned_proportion,
        wall_ms,
        seed: rep.seed,
    })
}

fn replicates(
    spec: &SignalSpec,
    family: NoiseFamily,
    count: usize,
    seed: u64,
) -> Result<Vec<Replicate>> {
    if count == 0 {
        return Err(Error::invalid("at least one replicate is required"));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|r| replicate(spec, family, seed.wrapping_add(r)))
        .collect()
}

/// Mean MSE and segment count per normalized penalty `b`, for each
/// constraint in `constraints` (group label = constraint name). Replicates
/// are shared across `b` values and constraints. The fastest exact pruning
/// the constraint allows is used.
pub fn penalty_scan(
    spec: &SignalSpec,
    noise: NoiseFamily,
    grid: &StateGrid,
    b_grid: &[f64],
    replicate_count: usize,
    seed: u64,
    constraints: &[ConstraintSpec],
) -> Result<ExperimentReport> {
    noise.validate()?;
    let sigma = noise.sigma();
    let n = spec.n;
    let reps = replicates(spec, noise, replicate_count, seed)?;
    let mut jobs = Vec::new();
    for constraint in constraints {
        for &b in b_grid {
            for (r, rep) in reps.iter().enumerate() {
                let config = SolverConfig::new(beta_from_b(b, sigma, n))
                    .with_constraint(*constraint)
                    .with_best_pruning();
                jobs.push((constraint.name(), b, r, rep, config));
            }
        }
    }
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|(name, b, r, rep, config)| {
            run_one(rep, grid, config, format!("{name}/b={b}/rep={r}"), *b)
        })
        .collect::<Result<_>>()?;
    let mut summary = Vec::new();
    let per_b = reps.len();
    for (ci, constraint) in constraints.iter().enumerate() {
        for (bi, &b) in b_grid.iter().enumerate() {
            let start = (ci * b_grid.len() + bi) * per_b;
            summary.push(summarize(
                constraint.name(),
                b,
                &records[start..start + per_b],
            ));
        }
    }
    Ok(ExperimentReport {
        experiment: "penalty-scan".into(),
        records,
        summary,
        loglog_slope: None,
    })
}

/// The constrained-versus-unconstrained comparison under heavy-tailed noise:
/// a [`penalty_scan`] with `constraints = [none, constraint]`.
pub fn robustness_scan(
    spec: &SignalSpec,
    noise: NoiseFamily,
    grid: &StateGrid,
    b_grid: &[f64],
    replicate_count: usize,
    seed: u64,
    constraint: ConstraintSpec,
) -> Result<ExperimentReport> {
    let mut report = penalty_scan(
        spec,
        noise,
        grid,
        b_grid,
        replicate_count,
        seed,
        &[ConstraintSpec::None, constraint],
    )?;
    report.experiment = "robustness".into();
    Ok(report)
}

/// Mean scanned proportion per pruning strategy (group) and Gaussian noise
/// level (`x = σ`), unconstrained, at `β = b σ² ln n`.
pub fn pruning_efficiency_scan(
    spec: &SignalSpec,
    sigmas: &[f64],
    strategies: &[PruningSpec],
    grid: &StateGrid,
    b: f64,
    replicate_count: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for &sigma in sigmas {
        let reps = replicates(spec, NoiseFamily::Gaussian { sigma }, replicate_count, seed)?;
        let beta = beta_from_b(b, sigma, spec.n);
        for strategy in strategies {
            let config = SolverConfig::new(beta).with_pruning(*strategy);
            let runs: Vec<RunRecord> = reps
                .par_iter()
                .enumerate()
                .map(|(r, rep)| {
                    run_one(
                        rep,
                        grid,
                        &config,
                        format!("{strategy}/sigma={sigma}/rep={r}"),
                        b,
                    )
                })
                .collect::<Result<_>>()?;
            summary.push(summarize(strategy.name(), sigma, &runs));
            records.extend(runs);
        }
    }
    Ok(ExperimentReport {
        experiment: "pruning-efficiency".into(),
        records,
        summary,
        loglog_slope: None,
    })
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Median wall time per series length (`x = n`) and the fitted log-log
/// slope. Runs sequentially so timings are not disturbed by other solves.
#[allow(clippy::too_many_arguments)]
pub fn timing_scan(
    spec: &SignalSpec,
    n_grid: &[usize],
    noise: NoiseFamily,
    grid: &StateGrid,
    pruning: PruningSpec,
    b: f64,
    replicate_count: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("series lengths must increase"));
    }
    noise.validate()?;
    let sigma = noise.sigma();
    let mut records = Vec::new();
    let mut summary = Vec::new();
    let mut points = Vec::new();
    for &n in n_grid {
        let sized = spec.with_len(n);
        let config = SolverConfig::new(beta_from_b(b, sigma, n)).with_pruning(pruning);
        let mut runs = Vec::with_capacity(replicate_count);
        for r in 0..replicate_count as u64 {
            let rep = replicate(&sized, noise, seed.wrapping_add(r))?;
            runs.push(run_one(
                &rep,
                grid,
                &config,
                format!("{pruning}/n={n}/rep={r}"),
                b,
            )?);
        }
        let mut times: Vec<f64> = runs.iter().map(|r| r.wall_ms).collect();
        times.sort_by(f64::total_cmp);
        points.push((n as f64, times[times.len() / 2]));
        summary.push(summarize(pruning.name(), n as f64, &runs));
        records.extend(runs);
    }
    Ok(ExperimentReport {
        experiment: "timing".into(),
        records,
        summary,
        loglog_slope: loglog_slope(&points),
    })
}
