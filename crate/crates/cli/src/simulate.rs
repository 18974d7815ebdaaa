use std::path::Path;

use nonholo_core::diagnostics::{
    constraint_residual_series, discrete_energy_series, fit_circle, nonholonomic_reference, CircleFit, CircleFitMode,
    ConstraintMode, ReferenceSettings, SeriesPoint,
};
use nonholo_core::integrators::{discretize_constraints, run_trajectory, DiscretePath};
use nonholo_core::model::State;

use crate::config::Prepared;
use crate::error::CliError;
use crate::output::{num, plot_script, write_csv, write_text, Summary};

/// Everything a single run produces, before anything is written.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub path: DiscretePath,
    /// Set when the stepper failed; `path` then holds the steps completed.
    pub failure: Option<String>,
    pub energy: Vec<SeriesPoint>,
    pub continuous: Vec<Vec<SeriesPoint>>,
    pub discrete: Vec<Vec<SeriesPoint>>,
    pub circle: Option<CircleFit>,
}

impl RunArtifacts {
    pub fn steps_completed(&self) -> usize {
        self.path.len().saturating_sub(2)
    }

    /// Mean of `|E_k − E_1|`.
    pub fn mean_energy_drift(&self) -> f64 {
        match self.energy.first() {
            Some(first) => self.energy.iter().map(|p| (p.value - first.value).abs()).sum::<f64>() / self.energy.len() as f64,
            None => 0.0,
        }
    }

    /// Mean absolute continuous constraint residual over all constraints.
    pub fn mean_constraint_residual(&self) -> f64 {
        let values: Vec<f64> = self.continuous.iter().flatten().map(|p| p.value.abs()).collect();
        if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    }

    pub fn circle_relative_residual(&self) -> Option<f64> {
        self.circle.map(|c| c.max_residual / c.radius)
    }
}

fn reference_settings(prep: &Prepared) -> ReferenceSettings {
    ReferenceSettings {
        tol: prep.config.tolerances.reference,
        ..ReferenceSettings::default()
    }
}

/// Reference configurations at `t_k = k h`, `k < len`.
pub fn reference_path(prep: &Prepared, len: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let grid: Vec<f64> = (0..len).map(|k| k as f64 * prep.params.h).collect();
    let init = State::new(prep.q0.clone(), prep.v0.clone());
    nonholonomic_reference(&prep.system, &init, &grid, &reference_settings(prep)).map_err(|e| CliError::Numerical(format!("reference: {e}")))
}

pub fn compute(prep: &Prepared) -> Result<RunArtifacts, CliError> {
    let n_steps = prep.config.n_steps;
    let (path, failure) = match &prep.stepper {
        Some(stepper) => match run_trajectory(stepper, &prep.q0, &prep.q1, n_steps) {
            Ok(path) => (path, None),
            Err(e) => {
                let message = e.to_string();
                (e.path, Some(message))
            }
        },
        None => {
            let configurations = reference_path(prep, n_steps + 2)?;
            let path = DiscretePath {
                h: prep.params.h,
                configurations,
                multipliers: Vec::new(),
                iterations: Vec::new(),
                residuals: Vec::new(),
            };
            (path, None)
        }
    };
    let numerical = |e: nonholo_core::diagnostics::DiagnosticsError| CliError::Numerical(e.to_string());
    let energy = discrete_energy_series(&path, &prep.system).map_err(numerical)?;
    let wd = discretize_constraints(prep.system.clone(), prep.params);
    let continuous = constraint_residual_series(&path, &wd, ConstraintMode::Continuous).map_err(numerical)?;
    let discrete = constraint_residual_series(&path, &wd, ConstraintMode::Discrete).map_err(numerical)?;
    let circle = prep.projection.and_then(|(a, b)| {
        let points: Vec<(f64, f64)> = path.configurations.iter().map(|q| (q[a], q[b])).collect();
        fit_circle(&points, CircleFitMode::LeastSquares).ok()
    });
    Ok(RunArtifacts {
        path,
        failure,
        energy,
        continuous,
        discrete,
        circle,
    })
}

fn summary(prep: &Prepared, art: &RunArtifacts) -> Summary {
    let c = &prep.config;
    let mut s = Summary::default();
    s.push("system", prep.system.name());
    s.push("integrator", c.integrator.name());
    s.push_num("alpha", c.alpha);
    s.push_num("h", c.h);
    s.push("scheme", format!("{:?}", c.scheme).to_lowercase());
    s.push("n_steps", c.n_steps);
    s.push("steps_completed", art.steps_completed());
    s.push("status", art.failure.as_deref().map_or_else(|| "ok".to_string(), |m| format!("failed: {m}")));
    let path = &art.path;
    if !path.iterations.is_empty() {
        s.push_num("max_newton_residual", path.max_residual());
        s.push("max_newton_iterations", path.iterations.iter().max().copied().unwrap_or(0));
        s.push_num(
            "mean_newton_iterations",
            path.iterations.iter().sum::<usize>() as f64 / path.iterations.len() as f64,
        );
    }
    if let (Some(first), Some(last)) = (art.energy.first(), art.energy.last()) {
        s.push_num("energy_first", first.value);
        s.push_num("energy_last", last.value);
        s.push_num("energy_min", art.energy.iter().map(|p| p.value).fold(f64::INFINITY, f64::min));
        s.push_num("energy_max", art.energy.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max));
    }
    let max_abs = |series: &[Vec<SeriesPoint>]| series.iter().flatten().map(|p| p.value.abs()).fold(0.0, f64::max);
    s.push_num("max_abs_continuous_constraint", max_abs(&art.continuous));
    s.push_num("max_abs_discrete_constraint", max_abs(&art.discrete));
    if let (Some(fit), Some((a, b))) = (art.circle, prep.projection) {
        let labels = prep.system.labels();
        s.push("circle_plane", format!("{},{}", labels[a], labels[b]));
        s.push("circle_center", format!("{},{}", num(fit.center.0), num(fit.center.1)));
        s.push_num("circle_radius", fit.radius);
        s.push_num("circle_max_residual", fit.max_residual);
    }
    s
}

pub fn write_outputs(dir: &Path, prep: &Prepared, art: &RunArtifacts) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let labels = prep.system.labels();
    let h = art.path.h;

    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend(labels.iter().cloned());
    let rows = art.path.configurations.iter().enumerate().map(|(k, q)| {
        let mut row = vec![k.to_string(), num(k as f64 * h)];
        row.extend(q.iter().map(|&x| num(x)));
        row
    });
    write_csv(&dir.join("trajectory.csv"), &header, rows)?;

    let header = ["k", "t", "E"].map(String::from);
    let rows = art.energy.iter().map(|p| vec![p.k.to_string(), num(p.t), num(p.value)]);
    write_csv(&dir.join("energy.csv"), &header, rows)?;

    let m = prep.system.m();
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend((1..=m).map(|a| format!("c{a}")));
    header.extend((1..=m).map(|a| format!("d{a}")));
    let rows = (0..art.energy.len()).map(|i| {
        let p = &art.energy[i];
        let mut row = vec![p.k.to_string(), num(p.t)];
        row.extend(art.continuous.iter().map(|s| num(s[i].value)));
        row.extend(art.discrete.iter().map(|s| num(s[i].value)));
        row
    });
    write_csv(&dir.join("constraints.csv"), &header, rows)?;

    write_text(&dir.join("summary.txt"), &summary(prep, art).render())?;
    write_text(&dir.join("plot.gp"), &plot_script(labels, prep.projection, m))?;
    Ok(())
}

/// Runs and writes all outputs; a solver failure still writes the partial
/// outputs before it is reported.
pub fn simulate(prep: &Prepared, dir: &Path) -> Result<RunArtifacts, CliError> {
    let art = compute(prep)?;
    write_outputs(dir, prep, &art)?;
    match &art.failure {
        Some(message) => Err(CliError::Numerical(message.clone())),
        None => Ok(art),
    }
}
