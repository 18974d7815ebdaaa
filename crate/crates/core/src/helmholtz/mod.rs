//! Numerical inverse-problem machinery for a second-order system
//! `q̈ = f(q, q̇)`: the tensors `∇`, `Φ`, `∇Φ`, `R`, residuals of the
//! Helmholtz conditions for a candidate multiplier, and the pointwise space
//! of symmetric matrices satisfying the algebraic conditions.
//!
//! All derivatives of `f` (up to third order) come from nested dual numbers.

mod sampling;
mod space;

pub use sampling::{sample_points, SampleBox};
pub use space::{algebraic_multiplier_space, MultiplierSpace, ProbeSettings};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dual::{lift_all, seed_axis, Dual, Scalar};
use crate::error::ModelError;
use crate::lagrangians::{velocity_hessian, Lagrangian};
use crate::model::{along_gamma, SecondOrderField};

/// Default pass threshold for condition residuals.
pub const CONDITION_TOL: f64 = 1e-8;

type Grid<T> = Vec<Vec<T>>;

/// Tensors at a point `(q, q̇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzTensors {
    /// `∇^i_j = −½ ∂f^i/∂q̇^j`.
    pub nabla: DMatrix<f64>,
    /// `Φ^i_j = Γ(∂f^i/∂q̇^j) − 2 ∂f^i/∂q^j − ½ ∂f^i/∂q̇^l ∂f^l/∂q̇^j`.
    pub phi: DMatrix<f64>,
    /// `(∇Φ)^i_j = Γ(Φ^i_j) − ∇^i_m Φ^m_j − ∇^m_j Φ^i_m`.
    pub nabla_phi: DMatrix<f64>,
    /// `r[i][(j, k)] = R^i_{jk} = ∂Φ^i_j/∂q̇^k − ∂Φ^i_k/∂q̇^j`.
    pub r: Vec<DMatrix<f64>>,
}

/// `(Φ, ∂f/∂q̇)` over any scalar type.
fn phi_generic<F: SecondOrderField, T: Scalar>(field: &F, q: &[T], v: &[T]) -> Result<(Grid<T>, Grid<T>), ModelError> {
    let n = field.dim();
    let f0 = field.acceleration(q, v)?;
    let v_lift = lift_all(v);
    let mut dq = vec![vec![T::zero(); n]; n];
    let mut dv = vec![vec![T::zero(); n]; n];
    let mut gamma_dv = vec![vec![T::zero(); n]; n];
    // outer tangent: Γ direction (q̇, f); inner tangent: ∂/∂q̇^j
    let q_gamma: Vec<Dual<Dual<T>>> = q
        .iter()
        .zip(v)
        .map(|(&qi, &vi)| Dual::new(Dual::lift(qi), Dual::lift(vi)))
        .collect();
    for j in 0..n {
        let fq = field.acceleration(&seed_axis(q, j), &v_lift)?;
        let v_gamma: Vec<Dual<Dual<T>>> = v
            .iter()
            .zip(&f0)
            .enumerate()
            .map(|(i, (&vi, &fi))| {
                let unit = if i == j { T::one() } else { T::zero() };
                Dual::new(Dual::new(vi, unit), Dual::lift(fi))
            })
            .collect();
        let out = field.acceleration(&q_gamma, &v_gamma)?;
        for k in 0..n {
            dq[k][j] = fq[k].eps;
            dv[k][j] = out[k].re.eps;
            gamma_dv[k][j] = out[k].eps.eps;
        }
    }
    let mut phi = vec![vec![T::zero(); n]; n];
    for k in 0..n {
        for j in 0..n {
            let mut quad = T::zero();
            for l in 0..n {
                quad = quad + dv[k][l] * dv[l][j];
            }
            phi[k][j] = gamma_dv[k][j] - dq[k][j] * 2.0 - quad * 0.5;
        }
    }
    Ok((phi, dv))
}

fn to_dmatrix(g: &Grid<f64>) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| g[i][j])
}

fn tangent_matrix(g: &Grid<Dual<f64>>) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| g[i][j].eps)
}

pub fn helmholtz_tensors<F: SecondOrderField>(field: &F, q: &[f64], v: &[f64]) -> Result<HelmholtzTensors, ModelError> {
    let n = field.dim();
    let (phi, dv) = phi_generic(field, q, v)?;
    let phi = to_dmatrix(&phi);
    let nabla = to_dmatrix(&dv) * -0.5;

    let (qg, vg) = along_gamma(field, q, v)?;
    let gamma_phi = tangent_matrix(&phi_generic(field, &qg, &vg)?.0);
    let nabla_phi = gamma_phi - &nabla * &phi - &phi * &nabla;

    let q_lift = lift_all(q);
    let dphi: Vec<DMatrix<f64>> = (0..n)
        .map(|k| Ok(tangent_matrix(&phi_generic(field, &q_lift, &seed_axis(v, k))?.0)))
        .collect::<Result<_, ModelError>>()?;
    let r = (0..n)
        .map(|i| DMatrix::from_fn(n, n, |j, k| dphi[k][(i, j)] - dphi[j][(i, k)]))
        .collect();
    Ok(HelmholtzTensors {
        nabla,
        phi,
        nabla_phi,
        r,
    })
}

/// A candidate multiplier `g_ij(q, q̇)`, evaluable over any scalar type so
/// that its `Γ`- and velocity-derivatives are available.
pub trait MultiplierField: Sync {
    fn dim(&self) -> usize;

    fn matrix<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<Grid<T>, ModelError>;
}

/// The velocity Hessian of a Lagrangian.
#[derive(Debug, Clone)]
pub struct LagrangianHessian<L>(pub L);

impl<L: Lagrangian> MultiplierField for LagrangianHessian<L> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<Grid<T>, ModelError> {
        velocity_hessian(&self.0, q, v)
    }
}

/// A multiplier that does not depend on `(q, q̇)`.
#[derive(Debug, Clone)]
pub struct ConstantMultiplier(pub DMatrix<f64>);

impl MultiplierField for ConstantMultiplier {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn matrix<T: Scalar>(&self, _q: &[T], _v: &[T]) -> Result<Grid<T>, ModelError> {
        let n = self.0.nrows();
        Ok((0..n)
            .map(|i| (0..n).map(|j| T::constant(self.0[(i, j)])).collect())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Symmetry,
    VelocitySymmetry,
    Nabla,
    Phi,
    NablaPhi,
    Cyclic,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::Symmetry,
        Condition::VelocitySymmetry,
        Condition::Nabla,
        Condition::Phi,
        Condition::NablaPhi,
        Condition::Cyclic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Symmetry => "symmetry",
            Condition::VelocitySymmetry => "velocity_symmetry",
            Condition::Nabla => "nabla",
            Condition::Phi => "phi",
            Condition::NablaPhi => "nabla_phi",
            Condition::Cyclic => "r_cyclic",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Residuals of all six conditions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResiduals {
    pub residuals: [f64; 6],
    pub det: f64,
}

impl PointResiduals {
    pub fn get(&self, c: Condition) -> f64 {
        self.residuals[c.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub message: String,
}

/// Per-condition maxima over a batch of points.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzReport {
    pub tolerance: f64,
    pub max_residuals: [f64; 6],
    pub min_abs_det: f64,
    /// Residuals per admissible point, in input order.
    pub points: Vec<(usize, PointResiduals)>,
    /// Points where evaluation failed.
    pub failures: Vec<PointFailure>,
}

impl HelmholtzReport {
    fn empty(tolerance: f64) -> Self {
        HelmholtzReport {
            tolerance,
            max_residuals: [0.0; 6],
            min_abs_det: f64::INFINITY,
            points: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn max_residual(&self, c: Condition) -> f64 {
        self.max_residuals[c.index()]
    }

    pub fn passes(&self, c: Condition) -> bool {
        !self.points.is_empty() && self.max_residual(c) < self.tolerance
    }

    pub fn all_pass(&self) -> bool {
        Condition::ALL.iter().all(|&c| self.passes(c))
    }

    /// Combine two reports over disjoint point sets.
    pub fn merge(mut self, other: HelmholtzReport) -> Self {
        for i in 0..6 {
            self.max_residuals[i] = self.max_residuals[i].max(other.max_residuals[i]);
        }
        self.min_abs_det = self.min_abs_det.min(other.min_abs_det);
        self.points.extend(other.points);
        self.failures.extend(other.failures);
        self
    }

    fn push(mut self, index: usize, outcome: Result<PointResiduals, ModelError>) -> Self {
        match outcome {
            Ok(res) => {
                for i in 0..6 {
                    self.max_residuals[i] = self.max_residuals[i].max(res.residuals[i]);
                }
                self.min_abs_det = self.min_abs_det.min(res.det.abs());
                self.points.push((index, res));
            }
            Err(e) => self.failures.push(PointFailure {
                index,
                message: e.to_string(),
            }),
        }
        self
    }
}

fn antisymmetric_part_max(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// All six condition residuals for `g` at one point.
pub fn point_residuals<F: SecondOrderField, G: MultiplierField>(
    field: &F,
    g: &G,
    q: &[f64],
    v: &[f64],
) -> Result<PointResiduals, ModelError> {
    let n = field.dim();
    let tensors = helmholtz_tensors(field, q, v)?;
    let gm = to_dmatrix(&g.matrix(q, v)?);

    let q_lift = lift_all(q);
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| Ok(tangent_matrix(&g.matrix(&q_lift, &seed_axis(v, k))?)))
        .collect::<Result<_, ModelError>>()?;
    let mut vel_sym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                vel_sym = vel_sym.max((dg[k][(i, j)] - dg[j][(i, k)]).abs());
            }
        }
    }

    let (qg, vg) = along_gamma(field, q, v)?;
    let gamma_g = tangent_matrix(&g.matrix(&qg, &vg)?);
    let nabla_res = (gamma_g - &gm * &tensors.nabla - tensors.nabla.transpose() * &gm).amax();

    let mut cyclic: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += gm[(i, j)] * tensors.r[j][(k, l)] + gm[(l, j)] * tensors.r[j][(i, k)] + gm[(k, j)] * tensors.r[j][(l, i)];
                }
                cyclic = cyclic.max(s.abs());
            }
        }
    }

    let mut residuals = [0.0; 6];
    residuals[Condition::Symmetry.index()] = antisymmetric_part_max(&gm);
    residuals[Condition::VelocitySymmetry.index()] = vel_sym;
    residuals[Condition::Nabla.index()] = nabla_res;
    residuals[Condition::Phi.index()] = antisymmetric_part_max(&(&gm * &tensors.phi));
    residuals[Condition::NablaPhi.index()] = antisymmetric_part_max(&(&gm * &tensors.nabla_phi));
    residuals[Condition::Cyclic.index()] = cyclic;
    Ok(PointResiduals {
        residuals,
        det: gm.determinant(),
    })
}

/// Maximum residuals of the Helmholtz conditions for `g` over `points`.
/// Points are evaluated in parallel; failures are recorded, never dropped.
pub fn multiplier_residuals<F: SecondOrderField, G: MultiplierField>(
    field: &F,
    g: &G,
    points: &[(Vec<f64>, Vec<f64>)],
    tolerance: f64,
) -> HelmholtzReport {
    let outcomes: Vec<_> = points
        .par_iter()
        .enumerate()
        .map(|(i, (q, v))| (i, point_residuals(field, g, q, v)))
        .collect();
    outcomes
        .into_iter()
        .fold(HelmholtzReport::empty(tolerance), |report, (i, outcome)| report.push(i, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangians::{FreeConstants, FreeLagrangian, LagrangianKind};
    use crate::model::{build_system, AssociatedKind, AssociatedSystem, FreeMotion, SystemConfig};

    fn assoc(name: &str, kind: AssociatedKind) -> AssociatedSystem {
        AssociatedSystem::new(build_system(&SystemConfig::named(name)).unwrap(), kind).unwrap()
    }

    #[test]
    fn free_motion_has_vanishing_tensors() {
        let t = helmholtz_tensors(&FreeMotion { dim: 3 }, &[0.1, 0.2, 0.3], &[1.0, -1.0, 0.5]).unwrap();
        assert_eq!(t.nabla.amax(), 0.0);
        assert_eq!(t.phi.amax(), 0.0);
        assert_eq!(t.nabla_phi.amax(), 0.0);
        assert!(t.r.iter().all(|m| m.amax() == 0.0));
    }

    #[test]
    fn identity_multiplier_for_free_motion() {
        let g = ConstantMultiplier(DMatrix::identity(3, 3));
        let pts = vec![(vec![0.1, 0.2, 0.3], vec![1.0, -1.0, 0.5])];
        let report = multiplier_residuals(&FreeMotion { dim: 3 }, &g, &pts, CONDITION_TOL);
        assert_eq!(report.max_residuals, [0.0; 6]);
        assert_eq!(report.min_abs_det, 1.0);
        assert!(report.all_pass());
    }

    #[test]
    fn r_is_antisymmetric() {
        let f = assoc("disk", AssociatedKind::Assoc2);
        let t = helmholtz_tensors(&f, &[0.4, 0.1, 0.2, 0.3], &[0.9, 1.2, -0.4, 0.6]).unwrap();
        for m in &t.r {
            assert_eq!((m + m.transpose()).amax(), 0.0);
        }
    }

    /// Φ rebuilt from central differences of f alone.
    fn phi_by_differences<F: SecondOrderField>(f: &F, q: &[f64], v: &[f64]) -> DMatrix<f64> {
        let n = f.dim();
        let h = 1e-4;
        let acc = |q: &[f64], v: &[f64]| DMatrix::from_vec(n, 1, f.acceleration(q, v).unwrap());
        let shifted = |x: &[f64], j: usize, s: f64| {
            let mut y = x.to_vec();
            y[j] += s;
            y
        };
        let jac_v = |q: &[f64], v: &[f64]| {
            DMatrix::from_fn(n, n, |i, j| (acc(q, &shifted(v, j, h))[i] - acc(q, &shifted(v, j, -h))[i]) / (2.0 * h))
        };
        let jac_q = DMatrix::from_fn(n, n, |i, j| (acc(&shifted(q, j, h), v)[i] - acc(&shifted(q, j, -h), v)[i]) / (2.0 * h));
        let f0 = f.acceleration(q, v).unwrap();
        let step = |s: f64| {
            let qs: Vec<f64> = q.iter().zip(v).map(|(a, b)| a + s * b).collect();
            let vs: Vec<f64> = v.iter().zip(&f0).map(|(a, b)| a + s * b).collect();
            jac_v(&qs, &vs)
        };
        let gamma_jv = (step(h) - step(-h)) / (2.0 * h);
        let jv = jac_v(q, v);
        gamma_jv - jac_q * 2.0 - &jv * &jv * 0.5
    }

    #[test]
    fn phi_matches_difference_reconstruction() {
        let f = assoc("particle", AssociatedKind::Assoc2);
        let (q, v) = ([0.8, -0.3, 0.5], [1.1, 0.7, -0.9]);
        let t = helmholtz_tensors(&f, &q, &v).unwrap();
        let fd = phi_by_differences(&f, &q, &v);
        assert!((t.phi - fd).amax() < 1e-5);
    }

    #[test]
    fn derived_tensors_match_differences_of_phi() {
        let f = assoc("knife_edge", AssociatedKind::Assoc2);
        let (q, v) = ([0.6, 0.2, -0.1], [0.9, -0.5, 0.8]);
        let t = helmholtz_tensors(&f, &q, &v).unwrap();
        let n = 3;
        let h = 1e-5;
        let phi_at = |q: &[f64], v: &[f64]| helmholtz_tensors(&f, q, v).unwrap().phi;
        let f0 = f.acceleration(&q, &v).unwrap();
        let along = |s: f64| {
            let qs: Vec<f64> = q.iter().zip(&v).map(|(a, b)| a + s * b).collect();
            let vs: Vec<f64> = v.iter().zip(&f0).map(|(a, b)| a + s * b).collect();
            phi_at(&qs, &vs)
        };
        let gamma_phi = (along(h) - along(-h)) / (2.0 * h);
        let expected = gamma_phi - &t.nabla * &t.phi - &t.phi * &t.nabla;
        assert!((expected - &t.nabla_phi).amax() < 1e-5);
        let dphi: Vec<DMatrix<f64>> = (0..n)
            .map(|k| {
                let mut up = v.to_vec();
                let mut down = v.to_vec();
                up[k] += h;
                down[k] -= h;
                (phi_at(&q, &up) - phi_at(&q, &down)) / (2.0 * h)
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let fd = dphi[k][(i, j)] - dphi[j][(i, k)];
                    assert!((fd - t.r[i][(j, k)]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn type1_hessian_is_a_multiplier_for_assoc2() {
        let sys = build_system(&SystemConfig::named("particle")).unwrap();
        let lag = FreeLagrangian::new(sys.clone(), FreeConstants::unit(LagrangianKind::Type1, 1)).unwrap();
        let f = AssociatedSystem::new(sys, AssociatedKind::Assoc2).unwrap();
        let pts = vec![
            (vec![0.8, -0.3, 0.5], vec![1.1, 0.7, -0.9]),
            (vec![-1.2, 0.4, 0.1], vec![-0.6, 1.5, 0.3]),
        ];
        let report = multiplier_residuals(&f, &LagrangianHessian(lag), &pts, CONDITION_TOL);
        assert!(report.failures.is_empty());
        assert!(report.all_pass(), "{:?}", report.max_residuals);
    }

    #[test]
    fn failures_are_reported_per_point() {
        let sys = build_system(&SystemConfig::named("particle")).unwrap();
        let lag = FreeLagrangian::default_for(sys.clone()).unwrap();
        let f = AssociatedSystem::new(sys, AssociatedKind::Assoc2).unwrap();
        let pts = vec![
            (vec![0.8, -0.3, 0.5], vec![1.1, 0.7, -0.9]),
            (vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]),
        ];
        let report = multiplier_residuals(&f, &LagrangianHessian(lag), &pts, CONDITION_TOL);
        assert_eq!(report.points.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].index, 1);
    }
}
