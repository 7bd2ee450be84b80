// SPDX-License-Identifier: MIT OR Apache-2.0

//! Continuous piecewise-linear segmentation over a finite grid of states.
//!
//! A series `y_1..y_n` is approximated by a continuous piecewise-linear
//! signal whose values at the change-points are drawn from a [`StateGrid`].
//! The fit minimizes the residual sum of squares plus a penalty `β` per
//! segment, exactly, by dynamic programming ([`slope_op`], [`solve`]). Fits
//! can be constrained (isotonic, unimodal, minimal angle between segments)
//! and accelerated with channel or inequality pruning, neither of which
//! changes the result.
//!
//! ```
//! use slopeop::{solve, SolverConfig, StateGrid, TimeSeries};
//!
//! let y = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0]).unwrap();
//! let grid = StateGrid::integers(0, 4).unwrap();
//! let fit = solve(&y, &grid, &SolverConfig::new(1.0)).unwrap();
//! assert_eq!(fit.segmentation.changepoints, vec![4, 8]);
//! assert_eq!(fit.segmentation.states, vec![0.0, 4.0, 0.0]);
//! ```

pub mod constraint;
pub mod dp;
pub mod error;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod pruning;
pub mod simulation;
pub mod variance;

pub use constraint::{ConstraintSpec, Couple};
pub use dp::{
    backtrack, evaluate_segmentation, full_scan_count, slope_op, slope_op_fixed_k, solve, DpTables,
    Solution, SolverConfig,
};
pub use error::{Error, Result};
pub use model::{
    build_prefix_sums, segment_cost_fast, segment_cost_naive, PrefixSums, Segmentation, StateGrid,
    TimeSeries,
};
pub use oracle::brute_force_oracle;
pub use pruning::PruningSpec;
pub use variance::{
    default_penalty, hall_diff_estimator, hall_estimator, mad_estimator, HallCoefficients,
};
