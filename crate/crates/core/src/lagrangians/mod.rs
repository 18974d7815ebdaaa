//! Free (unconstrained) Lagrangians whose Euler–Lagrange equations are
//! equivalent to the second associated system, their Legendre transform and
//! the corresponding Hamiltonians.

mod hamiltonian;

pub use hamiltonian::{hamiltonian, Hamiltonian};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dual::{self, Dual, Scalar};
use crate::error::ModelError;
use crate::model::{SystemSpec, COEFFICIENT_GUARD};

/// Default lower bound on `|ṙ1|` and `|A_β(r1)|` for free Lagrangians.
pub const DEFAULT_ADMISSIBILITY_GUARD: f64 = 1e-9;

/// Threshold on `|K|` for treating the measure density as constant.
const CONSTANT_DENSITY_TOL: f64 = 1e-10;

/// A Lagrangian `L(q, q̇)` that can be evaluated over any scalar type.
pub trait Lagrangian: Sync {
    fn dim(&self) -> usize;

    fn value<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<T, ModelError>;
}

/// The mechanical Lagrangian `½ Σ I_i q̇_i² − V(r2)`.
impl Lagrangian for SystemSpec {
    fn dim(&self) -> usize {
        SystemSpec::dim(self)
    }

    fn value<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<T, ModelError> {
        let (pot, _) = self.potential_with_slope(q[1])?;
        Ok(self.kinetic_energy(v) - pot)
    }
}

impl<L: Lagrangian> Lagrangian for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<T, ModelError> {
        (**self).value(q, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagrangianKind {
    Type1,
    Type2,
}

/// Constants of a free Lagrangian.
///
/// `Type1`: `½I1ṙ1² + (1/2N)(C2 ṙ2²/ṙ1 + Σ C_β ṡ_β²/(A_β ṙ1))`.
///
/// `Type2` (constant `N` only): `½w1 ṙ1² + ½w2 ṙ2² + (1/2N) Σ a_β ṡ_β²/(A_β ṙ1)`
/// where the weights `(w1, w2)` default to `(I1, I2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FreeConstants {
    Type1 {
        c2: f64,
        c: Vec<f64>,
    },
    Type2 {
        a: Vec<f64>,
        #[serde(default)]
        weights: Option<[f64; 2]>,
    },
}

impl FreeConstants {
    pub fn kind(&self) -> LagrangianKind {
        match self {
            FreeConstants::Type1 { .. } => LagrangianKind::Type1,
            FreeConstants::Type2 { .. } => LagrangianKind::Type2,
        }
    }

    /// All-ones constants of the given kind for `m` constraints.
    pub fn unit(kind: LagrangianKind, m: usize) -> Self {
        match kind {
            LagrangianKind::Type1 => FreeConstants::Type1 { c2: 1.0, c: vec![1.0; m] },
            LagrangianKind::Type2 => FreeConstants::Type2 {
                a: vec![1.0; m],
                weights: None,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct FreeLagrangian {
    system: SystemSpec,
    constants: FreeConstants,
    guard: f64,
}

impl FreeLagrangian {
    pub fn new(system: SystemSpec, constants: FreeConstants) -> Result<Self, ModelError> {
        if system.potential().is_some() {
            return Err(ModelError::Unsupported(format!(
                "`{}` has a potential; free Lagrangians exist only for the potential-free class",
                system.name()
            )));
        }
        let m = system.m();
        let (len, values): (usize, Vec<f64>) = match &constants {
            FreeConstants::Type1 { c2, c } => (c.len(), std::iter::once(*c2).chain(c.iter().copied()).collect()),
            FreeConstants::Type2 { a, weights } => (
                a.len(),
                a.iter().copied().chain(weights.iter().flatten().copied()).collect(),
            ),
        };
        if len != m {
            return Err(ModelError::Dimension { expected: m, got: len });
        }
        if let Some(bad) = values.iter().find(|c| **c == 0.0 || !c.is_finite()) {
            return Err(ModelError::InvalidSpec(format!("free Lagrangian constants must be nonzero, got {bad}")));
        }
        if constants.kind() == LagrangianKind::Type2 {
            check_constant_density(&system)?;
        }
        Ok(FreeLagrangian {
            system,
            constants,
            guard: DEFAULT_ADMISSIBILITY_GUARD,
        })
    }

    /// Type 2 with `a_β = −N` and unit weights for the disk (this gives
    /// `½(φ̇² + θ̇² + ẋ²/(cos φ φ̇) + ẏ²/(sin φ φ̇))`), Type 1 with unit
    /// constants for everything else.
    pub fn default_for(system: SystemSpec) -> Result<Self, ModelError> {
        let constants = if system.name() == "disk" {
            let (n, _) = system.measure_density(0.0)?;
            FreeConstants::Type2 {
                a: vec![-n; system.m()],
                weights: Some([1.0, 1.0]),
            }
        } else {
            FreeConstants::unit(LagrangianKind::Type1, system.m())
        };
        Self::new(system, constants)
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn constants(&self) -> &FreeConstants {
        &self.constants
    }

    pub fn kind(&self) -> LagrangianKind {
        self.constants.kind()
    }

    /// `(w1, w2)` of the quadratic `ṙ1`, `ṙ2` terms for Type 2.
    pub(crate) fn type2_weights(&self) -> (f64, f64) {
        match &self.constants {
            FreeConstants::Type2 {
                weights: Some([w1, w2]),
                ..
            } => (*w1, *w2),
            _ => (self.system.i1(), self.system.i2()),
        }
    }

    /// Coefficients `A_β(r1)` with the admissibility guard applied, and `N`.
    pub(crate) fn guarded_coefficients<T: Scalar>(&self, r1: T) -> Result<(Vec<T>, T), ModelError> {
        let mut inv_sq = T::constant(self.system.i2());
        let mut coeffs = Vec::with_capacity(self.system.m());
        for (beta, (expr, &inertia)) in self.system.a_alpha().iter().zip(self.system.i_alpha()).enumerate() {
            let a = expr.eval(r1)?;
            if a.re().abs() <= self.guard.max(COEFFICIENT_GUARD) {
                return Err(ModelError::singular(format!("A_{}(r1)", beta + 1), a.re()));
            }
            inv_sq = inv_sq + a * a * inertia;
            coeffs.push(a);
        }
        Ok((coeffs, inv_sq.sqrt().recip()))
    }

    pub fn gradient_v(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>, ModelError> {
        velocity_gradient(self, q, v)
    }

    pub fn hessian_v(&self, q: &[f64], v: &[f64]) -> Result<DMatrix<f64>, ModelError> {
        let h = velocity_hessian(self, q, v)?;
        Ok(to_matrix(&h))
    }
}

impl Lagrangian for FreeLagrangian {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn value<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<T, ModelError> {
        let dr1 = v[0];
        if dr1.re().abs() <= self.guard {
            return Err(ModelError::singular("r1 velocity", dr1.re()));
        }
        let (coeffs, n) = self.guarded_coefficients(q[0])?;
        let half_inv_n = n.recip() * 0.5;
        let s_dot = &v[2..];
        match &self.constants {
            FreeConstants::Type1 { c2, c } => {
                let mut bracket = v[1] * v[1] * *c2 / dr1;
                for ((&a, &cb), &sd) in coeffs.iter().zip(c).zip(s_dot) {
                    bracket = bracket + sd * sd * cb / (a * dr1);
                }
                Ok(dr1 * dr1 * (0.5 * self.system.i1()) + half_inv_n * bracket)
            }
            FreeConstants::Type2 { a: consts, .. } => {
                let (w1, w2) = self.type2_weights();
                let mut sum = T::zero();
                for ((&a, &ab), &sd) in coeffs.iter().zip(consts).zip(s_dot) {
                    sum = sum + sd * sd * ab / (a * dr1);
                }
                Ok(dr1 * dr1 * (0.5 * w1) + v[1] * v[1] * (0.5 * w2) + half_inv_n * sum)
            }
        }
    }
}

fn check_constant_density(system: &SystemSpec) -> Result<(), ModelError> {
    let mut evaluated = 0;
    for i in 0..=96 {
        let r1 = -std::f64::consts::PI + i as f64 * std::f64::consts::PI / 48.0 + 1e-3;
        if let Ok((_, k)) = system.measure_density(r1) {
            evaluated += 1;
            if k.abs() >= CONSTANT_DENSITY_TOL {
                return Err(ModelError::Unsupported(format!(
                    "type 2 Lagrangian needs a constant measure density, but K({r1:.3}) = {k:e} for `{}`",
                    system.name()
                )));
            }
        }
    }
    if evaluated == 0 {
        return Err(ModelError::Unsupported("measure density could not be evaluated on the test grid".into()));
    }
    Ok(())
}

pub(crate) fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.first().map_or(0, Vec::len), |i, j| rows[i][j])
}

fn lift<T: Scalar>(xs: &[T]) -> Vec<Dual<T>> {
    dual::lift_all(xs)
}

/// `∂L/∂q̇` at `(q, q̇)`.
pub fn velocity_gradient<L: Lagrangian>(lag: &L, q: &[f64], v: &[f64]) -> Result<Vec<f64>, ModelError> {
    let qc = lift(q);
    Ok(dual::gradient(|vv| lag.value(&qc, vv), v)?.1)
}

/// `∂²L/∂q̇∂q̇` over any scalar type.
pub fn velocity_hessian<L: Lagrangian, T: Scalar>(lag: &L, q: &[T], v: &[T]) -> Result<Vec<Vec<T>>, ModelError> {
    let qc: Vec<Dual<Dual<T>>> = q.iter().map(|&x| Dual::lift(Dual::lift(x))).collect();
    dual::hessian(|vv| lag.value(&qc, vv), v)
}

/// Energy function `Σ q̇_i ∂L/∂q̇_i − L`.
pub fn energy_function<L: Lagrangian>(lag: &L, q: &[f64], v: &[f64]) -> Result<f64, ModelError> {
    let qc = lift(q);
    let (value, grad) = dual::gradient(|vv| lag.value(&qc, vv), v)?;
    Ok(grad.iter().zip(v).map(|(p, vi)| p * vi).sum::<f64>() - value)
}

/// Accelerations solving the Euler–Lagrange equations
/// `∂²L/∂q̇∂q̇ · q̈ = ∂L/∂q − ∂²L/∂q̇∂q · q̇`.
pub fn euler_lagrange_acceleration<L: Lagrangian>(lag: &L, q: &[f64], v: &[f64]) -> Result<Vec<f64>, ModelError> {
    let n = q.len();
    let z: Vec<f64> = q.iter().chain(v).copied().collect();
    let h = dual::hessian(|zz| lag.value(&zz[..n], &zz[n..]), &z)?;
    let (_, grad) = dual::gradient(|zz| lag.value(&zz[..n], &zz[n..]), &z)?;
    let hvv = DMatrix::from_fn(n, n, |i, j| h[n + i][n + j]);
    let rhs = DVector::from_fn(n, |i, _| grad[i] - (0..n).map(|j| h[n + i][j] * v[j]).sum::<f64>());
    hvv.lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| ModelError::singular("velocity Hessian determinant", 0.0))
}

/// A point of the cotangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// `(q, q̇) ↦ (q, ∂L/∂q̇)`.
pub fn legendre_transform<L: Lagrangian>(lag: &L, q: &[f64], v: &[f64]) -> Result<PhasePoint, ModelError> {
    Ok(PhasePoint {
        q: q.to_vec(),
        p: velocity_gradient(lag, q, v)?,
    })
}
