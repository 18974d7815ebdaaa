//! Reference integration, energy and constraint series, circle fitting,
//! trajectory error metrics and convergence orders.

mod circle;
mod reference;

pub use circle::{fit_circle, windowed_radii, CircleFit, CircleFitMode};
pub use reference::{nonholonomic_reference, reference_trajectory, sode_reference, ReferenceSettings};

use rayon::prelude::*;
use thiserror::Error;

use crate::error::ModelError;
use crate::integrators::{DiscreteConstraints, DiscretePath};
use crate::model::SystemSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("more than {max_steps} steps needed (stopped at t = {t})")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("points are collinear")]
    Collinear,
    #[error("need at least {need} entries, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub k: usize,
    pub t: f64,
    pub value: f64,
}

fn backward_difference(path: &DiscretePath, k: usize) -> Vec<f64> {
    let (a, b) = (&path.configurations[k - 1], &path.configurations[k]);
    a.iter().zip(b).map(|(x, y)| (y - x) / path.h).collect()
}

fn check_length(path: &DiscretePath) -> Result<(), DiagnosticsError> {
    if path.len() < 2 {
        return Err(DiagnosticsError::TooShort { need: 2, got: path.len() });
    }
    Ok(())
}

/// `E(q_k, (q_k − q_{k−1})/h)` for `k = 1 … N`, with `E` the kinetic energy
/// plus the potential.
pub fn discrete_energy_series(path: &DiscretePath, system: &SystemSpec) -> Result<Vec<SeriesPoint>, DiagnosticsError> {
    check_length(path)?;
    (1..path.len())
        .map(|k| {
            let v = backward_difference(path, k);
            Ok(SeriesPoint {
                k,
                t: k as f64 * path.h,
                value: system.energy(&path.configurations[k], &v)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// `ω(q_k)·(q_k − q_{k−1})/h`.
    Continuous,
    /// `ω_d(q_{k−1}, q_k)`.
    Discrete,
}

/// One series per constraint, `k = 1 … N`.
pub fn constraint_residual_series(
    path: &DiscretePath,
    constraints: &DiscreteConstraints,
    mode: ConstraintMode,
) -> Result<Vec<Vec<SeriesPoint>>, DiagnosticsError> {
    check_length(path)?;
    let system = constraints.system();
    let mut out = vec![Vec::with_capacity(path.len() - 1); system.m()];
    for k in 1..path.len() {
        let values = match mode {
            ConstraintMode::Continuous => system.constraint_residual(&path.configurations[k], &backward_difference(path, k))?,
            ConstraintMode::Discrete => constraints.value(&path.configurations[k - 1], &path.configurations[k])?,
        };
        for (series, value) in out.iter_mut().zip(values) {
            series.push(SeriesPoint {
                k,
                t: k as f64 * path.h,
                value,
            });
        }
    }
    Ok(out)
}

pub fn sign_changes(series: &[SeriesPoint]) -> usize {
    series
        .windows(2)
        .filter(|w| w[0].value != 0.0 && w[1].value != 0.0 && (w[0].value > 0.0) != (w[1].value > 0.0))
        .count()
}

/// Configuration errors against a reference sampled on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    /// Largest Euclidean configuration error over the grid.
    pub max: f64,
    pub rms: f64,
    pub endpoint: f64,
    /// Largest absolute error per coordinate.
    pub component_max: Vec<f64>,
}

pub fn error_metrics(path: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<ErrorMetrics, DiagnosticsError> {
    if path.len() != reference.len() {
        return Err(DiagnosticsError::GridMismatch(format!("{} configurations against {} reference samples", path.len(), reference.len())));
    }
    if path.is_empty() {
        return Err(DiagnosticsError::TooShort { need: 1, got: 0 });
    }
    let dim = path[0].len();
    let mut component_max = vec![0.0f64; dim];
    let mut max = 0.0f64;
    let mut sum_sq = 0.0;
    let mut endpoint = 0.0;
    for (q, r) in path.iter().zip(reference) {
        if q.len() != dim || r.len() != dim {
            return Err(DiagnosticsError::GridMismatch("configuration dimensions differ".into()));
        }
        let mut sq = 0.0;
        for (i, (a, b)) in q.iter().zip(r).enumerate() {
            let d = (a - b).abs();
            component_max[i] = component_max[i].max(d);
            sq += d * d;
        }
        max = max.max(sq.sqrt());
        sum_sq += sq;
        endpoint = sq.sqrt();
    }
    Ok(ErrorMetrics {
        max,
        rms: (sum_sq / path.len() as f64).sqrt(),
        endpoint,
        component_max,
    })
}

/// Errors per step size and the observed orders between consecutive sizes;
/// an order is `None` when either error is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceStudy {
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().flatten().copied().reduce(f64::min)
    }
}

/// Runs `error_at(h)` for every step size (in parallel) and estimates
/// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
pub fn convergence_order<F, E>(error_at: F, h_list: &[f64]) -> Result<ConvergenceStudy, E>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Send + From<DiagnosticsError>,
{
    if h_list.len() < 3 {
        return Err(DiagnosticsError::TooShort { need: 3, got: h_list.len() }.into());
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) || h_list[h_list.len() - 1] <= 0.0 {
        return Err(DiagnosticsError::InvalidInput("step sizes must be positive and decreasing".into()).into());
    }
    let errors = h_list.par_iter().map(|&h| error_at(h)).collect::<Result<Vec<f64>, E>>()?;
    let orders = errors
        .windows(2)
        .zip(h_list.windows(2))
        .map(|(e, h)| {
            if e[0] > 0.0 && e[1] > 0.0 {
                Some((e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            } else {
                None
            }
        })
        .collect();
    Ok(ConvergenceStudy {
        h: h_list.to_vec(),
        errors,
        orders,
    })
}
