// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write;

use serde::Serialize;
use slopeop::profile::{
    analyze_profile, states_density_scan, synthetic_ramp_profile, ProfileOptions,
};
use slopeop::simulation::{
    add_noise, generate_signal, penalty_scan, pruning_efficiency_scan, reconstruct_signal,
    robustness_scan, timing_scan, NoiseFamily, NoiseSpec, SignalSpec,
};
use slopeop::{
    default_penalty, hall_diff_estimator, hall_estimator, mad_estimator, slope_op_fixed_k, solve,
    ConstraintSpec, PruningSpec, SolverConfig, StateGrid, TimeSeries,
};

use crate::error::{CliError, CliResult};
use crate::input::{
    padded_grid, parse_signal, parse_states, parse_sweep, read_profile, read_states, read_values,
};
use crate::{
    BenchmarkArgs, ConstraintArg, ConstraintArgs, Experiment, Format, GridArgs, NoiseArg,
    OutputArgs, ProfileArgs, PruningArg, SegmentArgs, SimulateArgs, VarianceArgs,
};

/// Pad added on both sides of the data range for the default grid.
const GRID_PAD: f64 = 10.0;

fn emit(output: &OutputArgs, bytes: &[u8]) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn grid_from(
    args: &GridArgs,
    fallback: impl FnOnce() -> CliResult<StateGrid>,
) -> CliResult<StateGrid> {
    match (&args.states, &args.states_file) {
        (Some(spec), _) => parse_states(spec),
        (None, Some(path)) => read_states(path),
        (None, None) => fallback(),
    }
}

fn constraint_from(args: &ConstraintArgs) -> CliResult<ConstraintSpec> {
    match (args.constraint, args.min_angle) {
        (ConstraintArg::None | ConstraintArg::Minangle, Some(deg)) => {
            Ok(ConstraintSpec::min_angle(deg)?)
        }
        (ConstraintArg::Minangle, None) => Err(CliError::Usage(
            "--constraint minangle needs --min-angle".into(),
        )),
        (_, Some(_)) => Err(CliError::Usage(
            "--min-angle only applies to the minangle constraint".into(),
        )),
        (ConstraintArg::None, None) => Ok(ConstraintSpec::None),
        (ConstraintArg::Isotonic, None) => Ok(ConstraintSpec::Isotonic),
        (ConstraintArg::Unimodal, None) => Ok(ConstraintSpec::Unimodal),
    }
}

fn pruning_from(arg: PruningArg) -> PruningSpec {
    match arg {
        PruningArg::None => PruningSpec::None,
        PruningArg::Channel => PruningSpec::Channel,
        PruningArg::Inequality => PruningSpec::Inequality,
    }
}

/// Result document of `segment`; the key order is part of the format.
#[derive(Serialize)]
struct SegmentDoc {
    changepoints: Vec<usize>,
    states: Vec<f64>,
    objective: f64,
    beta: Option<f64>,
    constraint: &'static str,
    pruning: Option<&'static str>,
    scanned_proportion: Option<f64>,
}

#[derive(Serialize)]
struct FittedRow {
    t: usize,
    value: f64,
    fitted: f64,
}

pub fn segment(args: &SegmentArgs) -> CliResult<()> {
    let values = read_values(&args.input)?;
    let grid = grid_from(&args.grid, || padded_grid(&values, GRID_PAD))?;
    let constraint = constraint_from(&args.constraint)?;
    let y = TimeSeries::new(values)?;
    let doc = if let Some(k) = args.fixed_k {
        if args.pruning.is_some() {
            return Err(CliError::Usage(
                "--pruning does not apply with --fixed-k".into(),
            ));
        }
        if k == 0 || k > y.len() {
            return Err(CliError::Usage(format!(
                "--fixed-k must be in 1..={}; got {k}",
                y.len()
            )));
        }
        let seg = slope_op_fixed_k(&y, &grid, k, &constraint)?;
        SegmentDoc {
            changepoints: seg.changepoints,
            states: seg.states,
            objective: seg.objective,
            beta: None,
            constraint: constraint.name(),
            pruning: None,
            scanned_proportion: None,
        }
    } else {
        let beta = match args.beta {
            Some(b) => b,
            None => default_penalty(hall_diff_estimator(&y)?, y.len()),
        };
        let config = SolverConfig::new(beta).with_constraint(constraint);
        let config = match args.pruning {
            Some(p) => config.with_pruning(pruning_from(p)),
            None => config.with_best_pruning(),
        };
        let sol = solve(&y, &grid, &config)?;
        SegmentDoc {
            changepoints: sol.segmentation.changepoints,
            states: sol.segmentation.states,
            objective: sol.segmentation.objective,
            beta: Some(beta),
            constraint: constraint.name(),
            pruning: Some(config.pruning.name()),
            scanned_proportion: Some(sol.scanned_proportion),
        }
    };
    let bytes = match args.output.format {
        Format::Json => json(&doc)?,
        Format::Csv => {
            let seg = slopeop::Segmentation {
                changepoints: doc.changepoints.clone(),
                states: doc.states.clone(),
                state_indices: Vec::new(),
                objective: doc.objective,
            };
            let fitted = reconstruct_signal(&seg, y.len())?;
            csv_rows(
                y.values()
                    .iter()
                    .zip(fitted)
                    .enumerate()
                    .map(|(i, (&value, fitted))| FittedRow {
                        t: i + 1,
                        value,
                        fitted,
                    }),
            )?
        }
    };
    emit(&args.output, &bytes)
}

/// Standard-deviation estimates of `variance`.
#[derive(Serialize)]
struct VarianceDoc {
    n: usize,
    mad: f64,
    hall: f64,
    hall_diff: f64,
}

pub fn variance(args: &VarianceArgs) -> CliResult<()> {
    let y = TimeSeries::new(read_values(&args.input)?)?;
    let doc = VarianceDoc {
        n: y.len(),
        mad: mad_estimator(&y)?,
        hall: hall_estimator(&y)?.sqrt(),
        hall_diff: hall_diff_estimator(&y)?.sqrt(),
    };
    let bytes = match args.output.format {
        Format::Json => json(&doc)?,
        Format::Csv => csv_rows([doc])?,
    };
    emit(&args.output, &bytes)
}

fn noise_family(kind: NoiseArg, sigma: f64, df: f64) -> NoiseFamily {
    match kind {
        NoiseArg::Gaussian => NoiseFamily::Gaussian { sigma },
        NoiseArg::Student => NoiseFamily::Student { df, scale: sigma },
    }
}

#[derive(Serialize)]
struct SimulationDoc {
    signal: SignalSpec,
    noise: NoiseSpec,
    truth: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct ValueRow {
    value: f64,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec = parse_signal(&args.signal, args.n)?;
    let noise = NoiseSpec {
        family: noise_family(args.noise, args.sigma, args.df),
        seed: args.seed,
    };
    let truth = generate_signal(&spec)?;
    let values = add_noise(&truth, &noise)?.into_inner();
    let bytes = match args.output.format {
        Format::Json => json(&SimulationDoc {
            signal: spec,
            noise,
            truth,
            values,
        })?,
        Format::Csv => csv_rows(values.into_iter().map(|value| ValueRow { value }))?,
    };
    emit(&args.output, &bytes)
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    if args.experiment == Experiment::StatesDensity {
        return states_density(args);
    }
    let default_signal = match args.experiment {
        Experiment::PenaltyScan | Experiment::Robustness => "scenario:1",
        _ => "hat:10:50",
    };
    let spec = parse_signal(args.signal.as_deref().unwrap_or(default_signal), args.n)?;
    let default_states = match args.experiment {
        Experiment::PenaltyScan | Experiment::Robustness => "-10:70:1",
        _ => "0:60:1",
    };
    let grid = grid_from(&args.grid, || parse_states(default_states))?;
    let report = match args.experiment {
        Experiment::PenaltyScan => {
            let sigma = args.sigma.unwrap_or(12.0);
            let b_grid = parse_sweep(args.b_grid.as_deref().unwrap_or("0.1:5:0.1"), "--b-grid")?;
            penalty_scan(
                &spec,
                NoiseFamily::Gaussian { sigma },
                &grid,
                &b_grid,
                args.replicates.unwrap_or(30),
                args.seed,
                &[constraint_from(&args.constraint)?],
            )?
        }
        Experiment::Robustness => {
            let sigma = args.sigma.unwrap_or(24.0);
            let b_grid = parse_sweep(args.b_grid.as_deref().unwrap_or("0.5:2.5:0.25"), "--b-grid")?;
            let constraint = match constraint_from(&args.constraint)? {
                ConstraintSpec::None => ConstraintSpec::min_angle(130.0)?,
                c => c,
            };
            robustness_scan(
                &spec,
                NoiseFamily::Student {
                    df: args.df,
                    scale: sigma,
                },
                &grid,
                &b_grid,
                args.replicates.unwrap_or(10),
                args.seed,
                constraint,
            )?
        }
        Experiment::PruningEfficiency => {
            let sigmas = if args.sigmas.is_empty() {
                vec![3.0, 12.0, 24.0]
            } else {
                args.sigmas.clone()
            };
            let strategies: Vec<PruningSpec> = if args.strategies.is_empty() {
                vec![PruningSpec::Channel, PruningSpec::Inequality]
            } else {
                args.strategies.iter().map(|&p| pruning_from(p)).collect()
            };
            pruning_efficiency_scan(
                &spec,
                &sigmas,
                &strategies,
                &grid,
                args.b,
                args.replicates.unwrap_or(5),
                args.seed,
            )?
        }
        Experiment::Timing => {
            let n_grid = if args.n_grid.is_empty() {
                (1..=10).map(|k| 100 * k).collect()
            } else {
                args.n_grid.clone()
            };
            timing_scan(
                &spec,
                &n_grid,
                NoiseFamily::Gaussian {
                    sigma: args.sigma.unwrap_or(3.0),
                },
                &grid,
                pruning_from(args.pruning.unwrap_or(PruningArg::Channel)),
                args.b,
                args.replicates.unwrap_or(3),
                args.seed,
            )?
        }
        Experiment::StatesDensity => unreachable!("handled above"),
    };
    for row in &report.summary {
        eprintln!(
            "{} x={} mse={:.4} segments={:.2} scanned={:.4} ms={:.2}",
            row.group,
            row.x,
            row.mean_mse,
            row.mean_segments,
            row.mean_scanned_proportion,
            row.mean_wall_ms
        );
    }
    if let Some(slope) = report.loglog_slope {
        eprintln!("log-log slope {slope:.3}");
    }
    let bytes = match args.output.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(&report.records)?,
    };
    emit(&args.output, &bytes)
}

fn states_density(args: &BenchmarkArgs) -> CliResult<()> {
    let profile = match &args.input {
        Some(path) => read_profile(path)?,
        None => synthetic_ramp_profile(None)?,
    };
    let mut options = ProfileOptions::default();
    if let Some(p) = args.pruning {
        options.pruning = pruning_from(p);
    }
    let steps = if args.steps.is_empty() {
        vec![1.0, 2.0, 4.0, 8.0]
    } else {
        args.steps.clone()
    };
    let rows = states_density_scan(&profile, &options, &steps, args.replicates.unwrap_or(21))?;
    let bytes = match args.output.format {
        Format::Json => json(&rows)?,
        Format::Csv => csv_rows(&rows)?,
    };
    emit(&args.output, &bytes)
}

/// Flat summary of `profile` for CSV output.
#[derive(Serialize)]
struct ProfileRow {
    radius_mm: f64,
    diameter_mm: f64,
    first_changepoint: usize,
    degenerate: bool,
    points_used: usize,
    state_count: usize,
}

pub fn profile(args: &ProfileArgs) -> CliResult<()> {
    let profile = read_profile(&args.input)?;
    let options = ProfileOptions {
        beta: args.beta,
        cutoff_mm: args.cutoff,
        state_step: args.state_step,
        pruning: pruning_from(args.pruning),
    };
    let a = analyze_profile(&profile, &options)?;
    if a.degenerate {
        eprintln!("slopeseg: no change-point found; the radius is the profile end");
    }
    let bytes = match args.output.format {
        Format::Json => json(&a)?,
        Format::Csv => csv_rows([ProfileRow {
            radius_mm: a.radius_mm,
            diameter_mm: a.diameter_mm,
            first_changepoint: a.first_changepoint,
            degenerate: a.degenerate,
            points_used: a.points_used,
            state_count: a.state_count,
        }])?,
    };
    emit(&args.output, &bytes)
}
