//! CSV writers for trajectories, control schedules, and solver
//! convergence histories, plus a small reader for round-trip checks.
//!
//! All files use a header row, LF line endings, and 12 significant
//! digits (`%.11e`). Parsing a file and re-writing it reproduces it byte
//! for byte: formatting is idempotent at this precision.

use std::path::Path;

use seir_control::{ConvergenceRecord, ControlValue, TimeGrid, Trajectory};

use crate::error::CliError;

/// Formats one value with 12 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write `{}`: {e}", path.display())))
}

/// Writes a trajectory as `t,S,E,I,R` rows, one per grid node.
///
/// Controlled trajectories gain `u1,u2` columns holding the control
/// applied on the interval starting at `t`; the final node repeats the
/// last interval's control so every row has the same shape.
pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<(), CliError> {
    let controls = trajectory.controls.as_deref();
    let mut out = String::new();
    out.push_str(if controls.is_some() { "t,S,E,I,R,u1,u2\n" } else { "t,S,E,I,R\n" });
    for (k, state) in trajectory.states.iter().enumerate() {
        out.push_str(&format_value(trajectory.grid.time(k)));
        for component in state.as_array() {
            out.push(',');
            out.push_str(&format_value(component));
        }
        if let Some(controls) = controls {
            let u = controls[k.min(controls.len() - 1)];
            out.push(',');
            out.push_str(&format_value(u.u1));
            out.push(',');
            out.push_str(&format_value(u.u2));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes a control schedule as `t,u1,u2`, one row per interval start.
pub fn write_controls(path: &Path, grid: TimeGrid, controls: &[ControlValue]) -> Result<(), CliError> {
    let mut out = String::from("t,u1,u2\n");
    for (k, u) in controls.iter().enumerate() {
        out.push_str(&format_value(grid.time(k)));
        out.push(',');
        out.push_str(&format_value(u.u1));
        out.push(',');
        out.push_str(&format_value(u.u2));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes a solver's per-iteration objective and residual history.
pub fn write_convergence(path: &Path, record: &ConvergenceRecord) -> Result<(), CliError> {
    let rows = record.objective_history.len().max(record.residual_history.len());
    let mut out = String::from("iteration,objective,residual\n");
    for k in 0..rows {
        out.push_str(&k.to_string());
        out.push(',');
        if let Some(j) = record.objective_history.get(k) {
            out.push_str(&format_value(*j));
        }
        out.push(',');
        if let Some(r) = record.residual_history.get(k) {
            out.push_str(&format_value(*r));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Reads a numeric CSV written by this module: a header line followed
/// by rows of floats. Empty fields (a convergence file may have fewer
/// residuals than objectives) read as NaN. Used by tests to verify
/// round-trips.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read `{}`: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Usage(format!("`{}` is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|field| {
                if field.is_empty() {
                    Ok(f64::NAN)
                } else {
                    field.parse()
                }
            })
            .collect();
        let row = row.map_err(|e| {
            CliError::Usage(format!("`{}` line {}: {e}", path.display(), index + 2))
        })?;
        if row.len() != header.len() {
            return Err(CliError::Usage(format!(
                "`{}` line {}: expected {} fields, got {}",
                path.display(),
                index + 2,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
