use std::path::Path;

use rayon::prelude::*;

use crate::config::{prepare, Prepared, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_csv};
use crate::simulate::{compute, reference_path, write_outputs, RunArtifacts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    H,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::H => "h",
        }
    }

    fn apply(self, config: &RunConfig, value: f64) -> RunConfig {
        let mut c = config.clone();
        match self {
            SweepParam::Alpha => c.alpha = value,
            SweepParam::H => c.h = value,
        }
        c
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub status: Result<(), String>,
    /// Max-norm configuration error at the final step against the
    /// reference solution.
    pub endpoint_error: Option<f64>,
    /// Least-squares circle residual relative to the fitted radius.
    pub circle_residual: Option<f64>,
    pub mean_energy_drift: Option<f64>,
    pub mean_constraint_residual: Option<f64>,
}

#[derive(Debug)]
pub struct SweepRun {
    pub row: SweepRow,
    pub prepared: Prepared,
    pub artifacts: Option<RunArtifacts>,
}

fn run_one(prep: &Prepared, value: f64) -> (SweepRow, Option<RunArtifacts>) {
    let failed = |message: String| SweepRow {
        value,
        status: Err(message),
        endpoint_error: None,
        circle_residual: None,
        mean_energy_drift: None,
        mean_constraint_residual: None,
    };
    let art = match compute(prep) {
        Ok(art) => art,
        Err(e) => return (failed(e.to_string()), None),
    };
    if let Some(message) = &art.failure {
        return (failed(message.clone()), Some(art));
    }
    let reference = match reference_path(prep, art.path.len()) {
        Ok(r) => r,
        Err(e) => return (failed(e.to_string()), Some(art)),
    };
    let endpoint = art.path.last().iter().zip(reference.last().unwrap()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let row = SweepRow {
        value,
        status: Ok(()),
        endpoint_error: Some(endpoint),
        circle_residual: art.circle_relative_residual(),
        mean_energy_drift: Some(art.mean_energy_drift()),
        mean_constraint_residual: Some(art.mean_constraint_residual()),
    };
    (row, Some(art))
}

/// Runs every value in parallel; results keep the order of `values`.
/// Configuration errors abort the sweep, numerical failures are recorded
/// in the row.
pub fn run_sweep(config: &RunConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRun>, CliError> {
    if values.len() < 2 {
        return Err(CliError::config("values", format!("a sweep needs at least two values, got {}", values.len())));
    }
    let prepared = values
        .iter()
        .map(|&v| prepare(&param.apply(config, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(prepared
        .into_par_iter()
        .zip(values.par_iter())
        .map(|(prep, &value)| {
            let (row, artifacts) = run_one(&prep, value);
            SweepRun {
                row,
                prepared: prep,
                artifacts,
            }
        })
        .collect())
}

fn optional(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Per-value run directories `<param>_<index>` plus `sweep_summary.csv`.
pub fn write_sweep(dir: &Path, param: SweepParam, runs: &[SweepRun]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (i, run) in runs.iter().enumerate() {
        if let Some(art) = &run.artifacts {
            write_outputs(&dir.join(format!("{}_{i:02}", param.name())), &run.prepared, art)?;
        }
    }
    let header = [
        "index",
        param.name(),
        "status",
        "endpoint_error",
        "circle_residual",
        "mean_energy_drift",
        "mean_constraint_residual",
    ]
    .map(String::from);
    let rows = runs.iter().enumerate().map(|(i, run)| {
        let r = &run.row;
        vec![
            i.to_string(),
            num(r.value),
            match &r.status {
                Ok(()) => "ok".to_string(),
                Err(m) => format!("failed: {m}"),
            },
            optional(r.endpoint_error),
            optional(r.circle_residual),
            optional(r.mean_energy_drift),
            optional(r.mean_constraint_residual),
        ]
    });
    write_csv(&dir.join("sweep_summary.csv"), &header, rows)
}
