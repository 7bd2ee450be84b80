// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use slopeop::{
    brute_force_oracle, evaluate_segmentation, slope_op, solve, ConstraintSpec, PruningSpec,
    Segmentation, SolverConfig, StateGrid, TimeSeries,
};

fn modes() -> [ConstraintSpec; 4] {
    [
        ConstraintSpec::None,
        ConstraintSpec::Isotonic,
        ConstraintSpec::Unimodal,
        ConstraintSpec::MinAngle {
            threshold_degrees: 120.0,
        },
    ]
}

fn series(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, len)
}

fn grid_strategy() -> impl Strategy<Value = StateGrid> {
    prop::collection::btree_set(-4i32..=4, 2..=4)
        .prop_map(|set| StateGrid::new(set.into_iter().map(f64::from).collect()).unwrap())
}

fn assert_same(a: &Segmentation, b: &Segmentation) {
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.changepoints, b.changepoints);
    assert_eq!(a.state_indices, b.state_indices);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_exhaustive_search(
        y in series(1..=7),
        grid in grid_strategy(),
        beta in prop::sample::select(vec![0.0, 0.5, 5.0]),
        mode in 0usize..4,
    ) {
        let y = TimeSeries::new(y).unwrap();
        let constraint = modes()[mode];
        let cfg = SolverConfig::new(beta).with_constraint(constraint).with_pruning(PruningSpec::None);
        let dp = solve(&y, &grid, &cfg).map(|s| s.segmentation);
        let brute = brute_force_oracle(&y, &grid, &cfg);
        match (dp, brute) {
            (Ok(a), Ok(b)) => assert_same(&a, &b),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "dp {:?} vs brute {:?}", a, b),
        }
    }

    #[test]
    fn objective_is_recomputable(y in series(2..=30), beta in 0.0..20.0f64, mode in 0usize..4) {
        let y = TimeSeries::new(y).unwrap();
        let grid = StateGrid::integers(-4, 4).unwrap();
        let cfg = SolverConfig::new(beta).with_constraint(modes()[mode]).with_best_pruning();
        let seg = solve(&y, &grid, &cfg).unwrap().segmentation;
        seg.validate(y.len(), &grid).unwrap();
        prop_assert_eq!(evaluate_segmentation(&y, &seg, beta).unwrap(), seg.objective);
    }

    #[test]
    fn pruning_is_transparent(y in series(2..=60), beta in 0.0..30.0f64, isotonic in any::<bool>()) {
        let y = TimeSeries::new(y).unwrap();
        let grid = StateGrid::range(-4.0, 4.0, 0.5).unwrap();
        let constraint = if isotonic { ConstraintSpec::Isotonic } else { ConstraintSpec::None };
        let base = SolverConfig::new(beta).with_constraint(constraint);
        let full = solve(&y, &grid, &base.with_pruning(PruningSpec::None)).unwrap().segmentation;
        let channel = solve(&y, &grid, &base.with_pruning(PruningSpec::Channel)).unwrap().segmentation;
        assert_same(&full, &channel);
        if !isotonic {
            let ineq = solve(&y, &grid, &base.with_pruning(PruningSpec::Inequality)).unwrap().segmentation;
            assert_same(&full, &ineq);
        }
    }

    #[test]
    fn optimum_is_monotone_in_penalty(y in series(2..=40), b1 in 0.0..10.0f64, b2 in 0.0..10.0f64) {
        let y = TimeSeries::new(y).unwrap();
        let grid = StateGrid::integers(-4, 4).unwrap();
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let a = solve(&y, &grid, &SolverConfig::new(lo)).unwrap().segmentation;
        let b = solve(&y, &grid, &SolverConfig::new(hi)).unwrap().segmentation;
        prop_assert!(a.objective <= b.objective + 1e-9);
        prop_assert!(a.segment_count() >= b.segment_count());
    }
}

#[test]
fn unpruned_scan_count_is_full() {
    let y = TimeSeries::new((0..50).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap();
    let grid = StateGrid::range(-1.0, 1.0, 0.25).unwrap();
    let tables = slope_op(
        &y,
        &grid,
        &SolverConfig::new(1.0).with_pruning(PruningSpec::None),
    )
    .unwrap();
    assert_eq!(tables.scanned_proportion(), 1.0);
    for pruning in [PruningSpec::Channel, PruningSpec::Inequality] {
        let t = slope_op(&y, &grid, &SolverConfig::new(1.0).with_pruning(pruning)).unwrap();
        assert!(t.scanned_proportion() > 0.0 && t.scanned_proportion() < 1.0);
    }
}
