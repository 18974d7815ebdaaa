//! Discrete Lagrangians and constraints, and the nonholonomic, variational
//! and modified implicit steppers built on them.

mod discrete;
mod newton;
mod steppers;

pub use discrete::{
    discretize_constraints, discretize_lagrangian, seed_second_point, DiscreteConstraints, DiscreteLagrangian,
    DiscretizationParams, Scheme,
};
pub use newton::{newton_solve, partitioned_newton_solve, NewtonOutcome, NewtonSettings};
pub use steppers::{AnyStepper, ModifiedStepper, NonholonomicStepper, StepOutcome, Stepper, VariationalStepper, DEFAULT_EPS_MIN};

use thiserror::Error;

use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid discretization: {0}")]
    InvalidParams(String),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("singular Newton Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("trajectory approaches the singular set: |Δr1|/h = {ratio:e} <= {eps_min:e}")]
    SingularSet { ratio: f64, eps_min: f64 },
}

/// A discrete trajectory `q_0 … q_N` with per-step solver records; entry
/// `k` of `multipliers`, `iterations` and `residuals` belongs to the step
/// producing `q_{k+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub h: f64,
    pub configurations: Vec<Vec<f64>>,
    pub multipliers: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl DiscretePath {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.h).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.configurations.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Coordinate `index` along the path.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.configurations.iter().map(|q| q[index]).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

/// A stepper failure part way along a trajectory, with everything computed
/// before it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step} failed: {source}")]
pub struct TrajectoryError {
    pub step: usize,
    pub path: DiscretePath,
    pub source: IntegratorError,
}

/// Applies `stepper` `n_steps` times starting from the pair `(q0, q1)`.
pub fn run_trajectory<S: Stepper + ?Sized>(stepper: &S, q0: &[f64], q1: &[f64], n_steps: usize) -> Result<DiscretePath, TrajectoryError> {
    let mut path = DiscretePath {
        h: stepper.params().h,
        configurations: vec![q0.to_vec(), q1.to_vec()],
        multipliers: Vec::with_capacity(n_steps),
        iterations: Vec::with_capacity(n_steps),
        residuals: Vec::with_capacity(n_steps),
    };
    for step in 0..n_steps {
        let k = path.configurations.len();
        match stepper.step(&path.configurations[k - 2], &path.configurations[k - 1]) {
            Ok(out) => {
                path.configurations.push(out.q_next);
                path.multipliers.push(out.multipliers);
                path.iterations.push(out.iterations);
                path.residuals.push(out.residual);
            }
            Err(source) => return Err(TrajectoryError { step, path, source }),
        }
    }
    Ok(path)
}
