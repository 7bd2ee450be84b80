// SPDX-License-Identifier: MIT OR Apache-2.0

//! Readers for series, state and profile files, and parsers for the
//! compact flag syntaxes.

use std::fs::File;
use std::path::Path;

use slopeop::profile::RadialProfile;
use slopeop::simulation::SignalSpec;
use slopeop::StateGrid;

use crate::error::{CliError, CliResult};

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn reader(path: &Path, headers: bool) -> CliResult<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
        _ => CliError::Parse(format!("{}: {e}", path.display())),
    }
}

fn number(path: &Path, line: u64, field: &str) -> CliResult<f64> {
    match field.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Parse(format!(
            "{} line {line}: expected a finite number, found {field:?}",
            path.display()
        ))),
    }
}

/// One value per row, with an optional `value` header. Blank rows are
/// skipped.
pub fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let mut rdr = reader(path, false)?;
    let mut out = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 1 {
            return Err(CliError::Parse(format!(
                "{} line {line}: expected one column, found {}",
                path.display(),
                record.len()
            )));
        }
        if k == 0 && record[0].eq_ignore_ascii_case("value") {
            continue;
        }
        out.push(number(path, line, &record[0])?);
    }
    if out.is_empty() {
        return Err(CliError::Parse(format!("{}: no values", path.display())));
    }
    Ok(out)
}

/// `distance_mm,intensity` columns with that header.
pub fn read_profile(path: &Path) -> CliResult<RadialProfile> {
    let mut rdr = reader(path, true)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parse(format!("{}: missing column {name:?}", path.display())))
    };
    let (d, i) = (column("distance_mm")?, column("intensity")?);
    let (mut distance, mut intensity) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = |j: usize| {
            record.get(j).ok_or_else(|| {
                CliError::Parse(format!("{} line {line}: missing field", path.display()))
            })
        };
        distance.push(number(path, line, field(d)?)?);
        intensity.push(number(path, line, field(i)?)?);
    }
    Ok(RadialProfile::new(distance, intensity)?)
}

/// Colon-separated numbers, e.g. `0:60:1`.
fn fields(text: &str, count: usize, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match values {
        Some(v) if v.len() == count && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!(
            "{what}: expected {count} colon-separated numbers, got {text:?}"
        ))),
    }
}

/// `min:max:step`, inclusive.
pub fn parse_states(text: &str) -> CliResult<StateGrid> {
    let v = fields(text, 3, "--states")?;
    Ok(StateGrid::range(v[0], v[1], v[2])?)
}

pub fn read_states(path: &Path) -> CliResult<StateGrid> {
    let mut states = read_values(path)?;
    states.sort_by(f64::total_cmp);
    states.dedup();
    Ok(StateGrid::new(states)?)
}

/// Integer states from `floor(min) − pad` to `ceil(max) + pad`.
pub fn padded_grid(y: &[f64], pad: f64) -> CliResult<StateGrid> {
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min).floor() - pad;
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil() + pad;
    Ok(StateGrid::range(lo, hi, 1.0)?)
}

/// `start:stop:step`, inclusive, as a list.
pub fn parse_sweep(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let v = fields(text, 3, what)?;
    if !(v[2] > 0.0 && v[1] >= v[0]) {
        return Err(CliError::Usage(format!(
            "{what}: need start <= stop and step > 0"
        )));
    }
    let count = ((v[1] - v[0]) / v[2] + 1e-9).floor() as usize + 1;
    // k·step from the start keeps values like 0.3 as close as possible
    Ok((0..count).map(|k| v[0] + k as f64 * v[2]).collect())
}

/// `hat:LO:HI`, `scenario:ID`, `sinusoid:AMPLITUDE:PERIOD:OFFSET` or
/// `linear:S0:S1` (a straight line over the whole length).
pub fn parse_signal(text: &str, n: usize) -> CliResult<SignalSpec> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "hat" => {
            let v = fields(rest, 2, "hat signal")?;
            Ok(SignalSpec::hat(v[0], v[1], n))
        }
        "scenario" => match rest.parse::<u8>() {
            Ok(id) => Ok(SignalSpec::scenario(id, n)),
            Err(_) => Err(CliError::Usage(format!(
                "scenario id must be 1..4, got {rest:?}"
            ))),
        },
        "sinusoid" => {
            let v = fields(rest, 3, "sinusoid signal")?;
            Ok(SignalSpec::sinusoid(v[0], v[1], v[2], n))
        }
        "linear" => {
            let v = fields(rest, 2, "linear signal")?;
            Ok(SignalSpec::piecewise_linear(vec![n], v))
        }
        _ => Err(CliError::Usage(format!(
            "unknown signal {kind:?}; expected hat, scenario, sinusoid or linear"
        ))),
    }
}
