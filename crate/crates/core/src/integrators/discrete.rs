use serde::{Deserialize, Serialize};

use super::IntegratorError;
use crate::dual::{gradient, Scalar};
use crate::error::ModelError;
use crate::lagrangians::Lagrangian;
use crate::model::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Plain,
    Symmetrized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationParams {
    pub alpha: f64,
    pub h: f64,
    pub scheme: Scheme,
}

impl DiscretizationParams {
    pub fn new(alpha: f64, h: f64, scheme: Scheme) -> Result<Self, IntegratorError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(IntegratorError::InvalidParams(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(IntegratorError::InvalidParams(format!("h must be positive, got {h}")));
        }
        Ok(DiscretizationParams { alpha, h, scheme })
    }

    /// The same discretization run backwards in time (`h` negated), so that
    /// feeding `(q_{k+1}, q_k)` to a stepper yields `q_{k−1}`.
    pub fn reversed(&self) -> Self {
        DiscretizationParams { h: -self.h, ..*self }
    }

    /// Interpolation weights `(w, 1 − w)` of `q1` and `q2`, with the mean
    /// weight of each evaluation point.
    fn nodes(&self) -> Vec<(f64, f64)> {
        let a = self.alpha;
        match self.scheme {
            Scheme::Plain => vec![(1.0 - a, 1.0)],
            Scheme::Symmetrized => vec![(1.0 - a, 0.5), (a, 0.5)],
        }
    }
}

fn interpolate<T: Scalar>(q1: &[T], q2: &[T], w1: f64) -> Vec<T> {
    q1.iter().zip(q2).map(|(&a, &b)| a * w1 + b * (1.0 - w1)).collect()
}

fn difference_quotient<T: Scalar>(q1: &[T], q2: &[T], h: f64) -> Vec<T> {
    q1.iter().zip(q2).map(|(&a, &b)| (b - a) / h).collect()
}

/// `L_d(q1, q2) = L((1−α)q1 + αq2, (q2−q1)/h)`, or for the symmetrized
/// scheme the average of that and `L(αq1 + (1−α)q2, (q2−q1)/h)`.
#[derive(Debug, Clone)]
pub struct DiscreteLagrangian<L> {
    lagrangian: L,
    params: DiscretizationParams,
}

pub fn discretize_lagrangian<L: Lagrangian>(lagrangian: L, params: DiscretizationParams) -> DiscreteLagrangian<L> {
    DiscreteLagrangian { lagrangian, params }
}

impl<L: Lagrangian> DiscreteLagrangian<L> {
    pub fn params(&self) -> &DiscretizationParams {
        &self.params
    }

    pub fn lagrangian(&self) -> &L {
        &self.lagrangian
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.dim()
    }

    pub fn with_params(&self, params: DiscretizationParams) -> Self
    where
        L: Clone,
    {
        DiscreteLagrangian {
            lagrangian: self.lagrangian.clone(),
            params,
        }
    }

    pub fn value<T: Scalar>(&self, q1: &[T], q2: &[T]) -> Result<T, ModelError> {
        let v = difference_quotient(q1, q2, self.params.h);
        let mut total = T::zero();
        for (w1, weight) in self.params.nodes() {
            total = total + self.lagrangian.value(&interpolate(q1, q2, w1), &v)? * weight;
        }
        Ok(total)
    }

    /// `(D1 L_d, D2 L_d)` at `(q1, q2)`.
    pub fn partials<T: Scalar>(&self, q1: &[T], q2: &[T]) -> Result<(Vec<T>, Vec<T>), ModelError> {
        let n = q1.len();
        let mut z = q1.to_vec();
        z.extend_from_slice(q2);
        let (_, grad) = gradient(|w| self.value(&w[..n], &w[n..]), &z)?;
        let d2 = grad[n..].to_vec();
        let mut d1 = grad;
        d1.truncate(n);
        Ok((d1, d2))
    }
}

/// `ω_d^a(q1, q2) = ω^a((1−α)q1 + αq2)·(q2−q1)/h`, symmetrized like
/// [`DiscreteLagrangian`].
#[derive(Debug, Clone)]
pub struct DiscreteConstraints {
    system: SystemSpec,
    params: DiscretizationParams,
}

pub fn discretize_constraints(system: SystemSpec, params: DiscretizationParams) -> DiscreteConstraints {
    DiscreteConstraints { system, params }
}

impl DiscreteConstraints {
    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn params(&self) -> &DiscretizationParams {
        &self.params
    }

    pub fn with_params(&self, params: DiscretizationParams) -> Self {
        DiscreteConstraints {
            system: self.system.clone(),
            params,
        }
    }

    pub fn value<T: Scalar>(&self, q1: &[T], q2: &[T]) -> Result<Vec<T>, ModelError> {
        let v = difference_quotient(q1, q2, self.params.h);
        let mut out = vec![T::zero(); self.system.m()];
        for (w1, weight) in self.params.nodes() {
            for (o, r) in out.iter_mut().zip(self.system.constraint_residual(&interpolate(q1, q2, w1), &v)?) {
                *o = *o + r * weight;
            }
        }
        Ok(out)
    }

    /// `(∂ω_d/∂q1, ∂ω_d/∂q2)`, row `a` per constraint.
    pub fn partials(&self, q1: &[f64], q2: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), ModelError> {
        let n = q1.len();
        let mut z = q1.to_vec();
        z.extend_from_slice(q2);
        let (_, jac) = crate::dual::jacobian(|w| self.value(&w[..n], &w[n..]), &z)?;
        Ok(jac.into_iter().map(|row| (row[..n].to_vec(), row[n..].to_vec())).unzip())
    }

    /// Averaged coefficients `Ā_a` multiplying `Δr2` in `h ω_d = Ā Δr2 + Δs`.
    fn averaged_coefficients(&self, r1_first: f64, r1_second: f64) -> Result<Vec<f64>, ModelError> {
        let mut out = vec![0.0; self.system.m()];
        for (w1, weight) in self.params.nodes() {
            let r1 = w1 * r1_first + (1.0 - w1) * r1_second;
            for (o, (a, _)) in out.iter_mut().zip(self.system.coefficients(r1)?) {
                *o += a * weight;
            }
        }
        Ok(out)
    }
}

/// Completes `q1` from its `(r1, r2)` components so that `ω_d(q0, q1) = 0`.
///
/// The constraint forms depend on `r1` alone, so `ω_d` is affine in the
/// `s` components and `s1 = s0 − Ā Δr2` solves it exactly for every `α` and
/// both schemes.
pub fn seed_second_point(
    constraints: &DiscreteConstraints,
    q0: &[f64],
    r_components: (f64, f64),
) -> Result<Vec<f64>, IntegratorError> {
    let sys = constraints.system();
    if q0.len() != sys.dim() {
        return Err(ModelError::Dimension {
            expected: sys.dim(),
            got: q0.len(),
        }
        .into());
    }
    let (r1, r2) = r_components;
    let coeffs = constraints.averaged_coefficients(q0[0], r1)?;
    let dr2 = r2 - q0[1];
    let mut q1 = vec![r1, r2];
    q1.extend(q0[2..].iter().zip(&coeffs).map(|(s, a)| s - a * dr2));
    Ok(q1)
}
