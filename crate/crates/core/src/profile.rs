// SPDX-License-Identifier: MIT OR Apache-2.0

//! Inhibition-zone measurement on radial intensity profiles.
//!
//! A profile gives the mean intensity (0–255) at increasing distances from
//! the center of an antibiotic disk. Intensity is low inside the inhibition
//! zone and rises towards the bacterial lawn, so the profile is fitted under
//! the isotonic constraint and the first change-point marks the zone edge.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintSpec;
use crate::dp::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{Segmentation, StateGrid, TimeSeries};
use crate::pruning::PruningSpec;
use crate::simulation::{add_noise, NoiseSpec};

/// Fewest points left after the cutoff for a profile to be analyzed.
pub const MIN_PROFILE_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub distance_mm: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl RadialProfile {
    /// Distances must be finite and strictly increasing.
    pub fn new(distance_mm: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if distance_mm.len() != intensity.len() {
            return Err(Error::invalid(format!(
                "{} distances for {} intensities",
                distance_mm.len(),
                intensity.len()
            )));
        }
        if distance_mm.iter().chain(&intensity).any(|x| !x.is_finite()) {
            return Err(Error::invalid("profile values must be finite"));
        }
        if distance_mm.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("profile distances must increase strictly"));
        }
        Ok(Self {
            distance_mm,
            intensity,
        })
    }

    pub fn len(&self) -> usize {
        self.distance_mm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distance_mm.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Penalty per segment; defaults to the maximal gray value.
    pub beta: f64,
    /// Points at or below this distance (the disk itself) are dropped.
    pub cutoff_mm: f64,
    /// Spacing of the intensity grid.
    pub state_step: f64,
    pub pruning: PruningSpec,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            beta: 255.0,
            cutoff_mm: 3.5,
            state_step: 1.0,
            pruning: PruningSpec::Channel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileAnalysis {
    /// Inhibition radius: distance of the first change-point.
    pub radius_mm: f64,
    pub diameter_mm: f64,
    /// 1-based index of the first change-point among the retained points.
    pub first_changepoint: usize,
    /// True when the fit has a single segment, so the radius is just the
    /// profile end.
    pub degenerate: bool,
    pub points_used: usize,
    pub state_count: usize,
    pub wall_ms: f64,
    pub segmentation: Segmentation,
}

/// `floor(min) + k·step` for `k = 0..=ceil((max − floor(min)) / step)`.
pub fn intensity_grid(values: &[f64], step: f64) -> Result<StateGrid> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!(
            "state step must be positive; got {step}"
        )));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count = ((hi - lo) / step).ceil().max(0.0) as usize;
    StateGrid::new((0..=count).map(|k| lo + k as f64 * step).collect())
}

/// Fit the profile under the isotonic constraint and read off the
/// inhibition diameter.
pub fn analyze_profile(
    profile: &RadialProfile,
    options: &ProfileOptions,
) -> Result<ProfileAnalysis> {
    let keep: Vec<usize> = (0..profile.len())
        .filter(|&i| profile.distance_mm[i] > options.cutoff_mm)
        .collect();
    if keep.len() < MIN_PROFILE_POINTS {
        return Err(Error::guard(format!(
            "profile has {} points beyond {} mm; at least {MIN_PROFILE_POINTS} are needed",
            keep.len(),
            options.cutoff_mm
        )));
    }
    let distances: Vec<f64> = keep.iter().map(|&i| profile.distance_mm[i]).collect();
    let intensity: Vec<f64> = keep.iter().map(|&i| profile.intensity[i]).collect();
    let grid = intensity_grid(&intensity, options.state_step)?;
    let y = TimeSeries::new(intensity)?;
    let config = SolverConfig::new(options.beta)
        .with_constraint(ConstraintSpec::Isotonic)
        .with_pruning(options.pruning);
    let start = Instant::now();
    let sol = solve(&y, &grid, &config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let seg = sol.segmentation;
    let first = seg.changepoints[0];
    let radius = distances[first - 1];
    Ok(ProfileAnalysis {
        radius_mm: radius,
        diameter_mm: 2.0 * radius,
        first_changepoint: first,
        degenerate: seg.changepoints.len() == 1,
        points_used: distances.len(),
        state_count: grid.len(),
        wall_ms,
        segmentation: seg,
    })
}

/// One grid spacing of a states-density scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub step: f64,
    pub state_count: usize,
    /// Median over the repeats.
    pub wall_ms: f64,
    pub first_changepoint: usize,
    pub diameter_mm: f64,
}

/// Analyze the same profile with coarser and coarser intensity grids.
pub fn states_density_scan(
    profile: &RadialProfile,
    options: &ProfileOptions,
    steps: &[f64],
    repeats: usize,
) -> Result<Vec<DensityRow>> {
    let repeats = repeats.max(1);
    steps
        .iter()
        .map(|&step| {
            let opts = ProfileOptions {
                state_step: step,
                ..*options
            };
            let mut runs = (0..repeats)
                .map(|_| analyze_profile(profile, &opts))
                .collect::<Result<Vec<_>>>()?;
            runs.sort_by(|a, b| a.wall_ms.total_cmp(&b.wall_ms));
            let mid = &runs[runs.len() / 2];
            Ok(DensityRow {
                step,
                state_count: mid.state_count,
                wall_ms: mid.wall_ms,
                first_changepoint: mid.first_changepoint,
                diameter_mm: mid.diameter_mm,
            })
        })
        .collect()
}

/// A synthetic profile sampled every 0.1 mm from 0.1 to 30 mm: intensity 10
/// up to 8.0 mm, then rising by 2 per sample to 200, then flat. Optional
/// Gaussian noise `(σ, seed)`.
pub fn synthetic_ramp_profile(noise: Option<(f64, u64)>) -> Result<RadialProfile> {
    let distance: Vec<f64> = (1..=300).map(|k| k as f64 / 10.0).collect();
    let clean: Vec<f64> = (1..=300)
        .map(|k: i32| (10.0 + 2.0 * f64::from((k - 80).max(0))).min(200.0))
        .collect();
    let intensity = match noise {
        Some((sigma, seed)) => add_noise(&clean, &NoiseSpec::gaussian(sigma, seed))?.into_inner(),
        None => clean,
    };
    RadialProfile::new(distance, intensity)
}
