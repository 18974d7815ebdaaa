use super::{FreeConstants, FreeLagrangian};
use crate::dual::{self, Scalar};
use crate::error::ModelError;
use crate::model::SystemSpec;

/// Closed-form Hamiltonian of a free Lagrangian.
///
/// Type 1: `H = (1/2I1)(p1 + ½N(p2²/C2 + Σ A_β p_β²/C_β))²`.
///
/// Type 2: `H = p2²/(2w2) + (1/2w1)(p1 + ½N Σ (A_β/a_β) p_β²)²`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    lagrangian: FreeLagrangian,
}

/// Hamiltonian of the free Lagrangian with the given constants.
pub fn hamiltonian(system: SystemSpec, constants: FreeConstants) -> Result<Hamiltonian, ModelError> {
    Ok(Hamiltonian::new(FreeLagrangian::new(system, constants)?))
}

impl Hamiltonian {
    pub fn new(lagrangian: FreeLagrangian) -> Self {
        Hamiltonian { lagrangian }
    }

    pub fn lagrangian(&self) -> &FreeLagrangian {
        &self.lagrangian
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.system().dim()
    }

    fn coefficients<T: Scalar>(&self, r1: T) -> Result<(Vec<T>, T), ModelError> {
        let sys = self.lagrangian.system();
        let mut inv_sq = T::constant(sys.i2());
        let mut coeffs = Vec::with_capacity(sys.m());
        for (expr, &inertia) in sys.a_alpha().iter().zip(sys.i_alpha()) {
            let a = expr.eval(r1)?;
            inv_sq = inv_sq + a * a * inertia;
            coeffs.push(a);
        }
        Ok((coeffs, inv_sq.sqrt().recip()))
    }

    /// `I1 ṙ1` (Type 1) or `w1 ṙ1` (Type 2) reconstructed from momenta.
    fn shifted_p1<T: Scalar>(&self, coeffs: &[T], n: T, p: &[T]) -> T {
        let p_s = &p[2..];
        match self.lagrangian.constants() {
            FreeConstants::Type1 { c2, c } => {
                let mut bracket = p[1] * p[1] / *c2;
                for ((&a, &cb), &pb) in coeffs.iter().zip(c).zip(p_s) {
                    bracket = bracket + a * pb * pb / cb;
                }
                p[0] + n * bracket * 0.5
            }
            FreeConstants::Type2 { a: consts, .. } => {
                let mut sum = T::zero();
                for ((&a, &ab), &pb) in coeffs.iter().zip(consts).zip(p_s) {
                    sum = sum + a * pb * pb / ab;
                }
                p[0] + n * sum * 0.5
            }
        }
    }

    pub fn value<T: Scalar>(&self, q: &[T], p: &[T]) -> Result<T, ModelError> {
        let (coeffs, n) = self.coefficients(q[0])?;
        let shifted = self.shifted_p1(&coeffs, n, p);
        Ok(match self.lagrangian.constants() {
            FreeConstants::Type1 { .. } => shifted * shifted / (2.0 * self.lagrangian.system().i1()),
            FreeConstants::Type2 { .. } => {
                let (w1, w2) = self.lagrangian.type2_weights();
                p[1] * p[1] / (2.0 * w2) + shifted * shifted / (2.0 * w1)
            }
        })
    }

    /// `ṙ1` on the Legendre-inverse branch used by the Type 2 constraint image.
    pub fn r1_velocity(&self, q: &[f64], p: &[f64]) -> Result<f64, ModelError> {
        let (coeffs, n) = self.coefficients(q[0])?;
        let w1 = match self.lagrangian.constants() {
            FreeConstants::Type1 { .. } => self.lagrangian.system().i1(),
            FreeConstants::Type2 { .. } => self.lagrangian.type2_weights().0,
        };
        Ok(self.shifted_p1(&coeffs, n, p) / w1)
    }

    /// Residuals of the image of the constraints under the Legendre map:
    /// `C2 p_α + C_α p2` (Type 1) or `w2 N ṙ1 p_α + a_α p2` (Type 2).
    pub fn constraint_image_residual(&self, q: &[f64], p: &[f64]) -> Result<Vec<f64>, ModelError> {
        match self.lagrangian.constants() {
            FreeConstants::Type1 { c2, c } => Ok(c.iter().zip(&p[2..]).map(|(cb, pb)| c2 * pb + cb * p[1]).collect()),
            FreeConstants::Type2 { a, .. } => {
                let (_, n) = self.coefficients(q[0])?;
                let (_, w2) = self.lagrangian.type2_weights();
                let dr1 = self.r1_velocity(q, p)?;
                Ok(a.iter().zip(&p[2..]).map(|(ab, pb)| w2 * n * dr1 * pb + ab * p[1]).collect())
            }
        }
    }

    /// Hamilton's equations on `y = (q, p)`: `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
    pub fn rhs(&self, y: &[f64]) -> Result<Vec<f64>, ModelError> {
        let n = self.dim();
        let (_, grad) = dual::gradient(|z| self.value(&z[..n], &z[n..]), y)?;
        let mut out = grad[n..].to_vec();
        out.extend(grad[..n].iter().map(|g| -g));
        Ok(out)
    }
}
