// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic signals, noise models and the benchmark experiment drivers.

mod experiment;
mod noise;
mod signal;

pub use experiment::{
    beta_from_b, loglog_slope, penalty_scan, pruning_efficiency_scan, robustness_scan, timing_scan,
    ExperimentReport, RunRecord, SummaryRow,
};
pub use noise::{add_noise, NoiseFamily, NoiseSpec};
pub use signal::{generate_signal, mse, reconstruct_signal, SignalKind, SignalSpec};
