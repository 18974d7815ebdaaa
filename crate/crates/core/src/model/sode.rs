use nalgebra::DMatrix;

use super::{SystemSpec, COEFFICIENT_GUARD};
use crate::dual::{seed, seed_axis, Dual, Scalar};
use crate::error::ModelError;

/// A second-order system `q̈ = f(q, q̇)` whose acceleration can be evaluated
/// over any [`Scalar`]; partial derivatives follow from dual numbers.
pub trait SecondOrderField: Sync {
    fn dim(&self) -> usize;

    fn acceleration<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<Vec<T>, ModelError>;
}

/// `f ≡ 0` in `dim` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct FreeMotion {
    pub dim: usize,
}

impl SecondOrderField for FreeMotion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn acceleration<T: Scalar>(&self, _q: &[T], _v: &[T]) -> Result<Vec<T>, ModelError> {
        Ok(vec![T::zero(); self.dim])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociatedKind {
    /// `s̈_α = −(A'_α − N²K A_α) ṙ1 ṙ2`, the differentiated constraint.
    Assoc1,
    /// `s̈_α = (A'_α − N²K A_α) ṙ1 ṡ_α / A_α` (no sum over α).
    Assoc2,
    /// Single constraint with a potential: `r̈2 = Γ2 ṙ1 ṙ2 + t2`, `s̈ = Γ3 ṙ1 ṡ + t3`.
    Extended,
}

/// One of the second-order systems whose solutions contain the
/// nonholonomic ones once restricted to the constraints.
///
/// With a potential `V(r2)` both `Assoc1` and `Assoc2` carry the extra terms
/// `−N²V'` (for `r2`) and `A_α N² V'` (for `s_α`); `Extended` is `Assoc2`
/// restricted to one constraint and a nonzero potential, i.e.
/// `Γ2 = −N²K`, `Γ3 = (A' − N²KA)/A`, `t2 = −N²V'`, `t3 = A N² V'`.
#[derive(Debug, Clone)]
pub struct AssociatedSystem {
    system: SystemSpec,
    kind: AssociatedKind,
}

impl AssociatedSystem {
    pub fn new(system: SystemSpec, kind: AssociatedKind) -> Result<Self, ModelError> {
        if kind == AssociatedKind::Extended {
            if system.m() != 1 {
                return Err(ModelError::Unsupported(format!(
                    "the extended system needs exactly one constraint, `{}` has {}",
                    system.name(),
                    system.m()
                )));
            }
            if system.potential().is_none() {
                return Err(ModelError::Unsupported(format!(
                    "the extended system needs a potential, `{}` has none",
                    system.name()
                )));
            }
        }
        Ok(AssociatedSystem { system, kind })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn kind(&self) -> AssociatedKind {
        self.kind
    }
}

impl SecondOrderField for AssociatedSystem {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn acceleration<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<Vec<T>, ModelError> {
        let sys = &self.system;
        let n = sys.dim();
        if q.len() != n || v.len() != n {
            return Err(ModelError::Dimension {
                expected: n,
                got: q.len().min(v.len()),
            });
        }
        let coeffs = sys.coefficients(q[0])?;
        let (density, k) = sys.density_from(&coeffs);
        let (_, dv) = sys.potential_with_slope(q[1])?;
        let n2 = density * density;
        let (dr1, dr2) = (v[0], v[1]);

        let mut out = Vec::with_capacity(n);
        out.push(T::zero());
        out.push(-(n2 * k * dr1 * dr2) - n2 * dv);
        for (alpha, &(a, da)) in coeffs.iter().enumerate() {
            let gamma = da - n2 * k * a;
            let forcing = a * n2 * dv;
            let s_acc = match self.kind {
                AssociatedKind::Assoc1 => -(gamma * dr1 * dr2) + forcing,
                AssociatedKind::Assoc2 | AssociatedKind::Extended => {
                    if a.re().abs() < COEFFICIENT_GUARD {
                        return Err(ModelError::singular(format!("A_{}(r1)", alpha + 1), a.re()));
                    }
                    gamma * dr1 * v[2 + alpha] / a + forcing
                }
            };
            out.push(s_acc);
        }
        Ok(out)
    }
}

/// `(∂f/∂q, ∂f/∂q̇)` at a point, row `i` holding the derivatives of `f^i`.
pub fn acceleration_partials<F: SecondOrderField>(
    field: &F,
    q: &[f64],
    v: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>), ModelError> {
    let n = field.dim();
    let mut dq = DMatrix::zeros(n, n);
    let mut dv = DMatrix::zeros(n, n);
    let qc: Vec<Dual<f64>> = q.iter().map(|&x| Dual::lift(x)).collect();
    let vc: Vec<Dual<f64>> = v.iter().map(|&x| Dual::lift(x)).collect();
    for j in 0..n {
        let fq = field.acceleration(&seed_axis(q, j), &vc)?;
        let fv = field.acceleration(&qc, &seed_axis(v, j))?;
        for i in 0..n {
            dq[(i, j)] = fq[i].eps;
            dv[(i, j)] = fv[i].eps;
        }
    }
    Ok((dq, dv))
}

/// The point `(q + ε q̇, q̇ + ε f)`: evaluating any function of `(q, q̇)` on it
/// gives its derivative along `Γ = q̇ ∂_q + f ∂_q̇` in the tangent slot.
pub fn along_gamma<F: SecondOrderField, T: Scalar>(
    field: &F,
    q: &[T],
    v: &[T],
) -> Result<(Vec<Dual<T>>, Vec<Dual<T>>), ModelError> {
    let f = field.acceleration(q, v)?;
    Ok((seed(q, v), seed(v, &f)))
}

/// The first-order system `(q, q̇)' = (q̇, f)`.
pub fn first_order_rhs<F: SecondOrderField>(field: &F, y: &[f64]) -> Result<Vec<f64>, ModelError> {
    let n = field.dim();
    let (q, v) = y.split_at(n);
    let mut out = v.to_vec();
    out.extend(field.acceleration(q, v)?);
    Ok(out)
}
