//! The system class: a diagonal kinetic energy in `(r1, r2, s_1..s_m)`,
//! constraints `ṡ_α = −A_α(r1) ṙ2`, and an optional potential `V(r2)`.
//!
//! Coordinates are always ordered `(r1, r2, s_1, …, s_m)`.

mod disk;
mod registry;
mod sode;

pub use disk::{exact_disk_solution, DiskSolution};
pub use registry::{build_system, registry_names, CustomSystem, SystemConfig};
pub use sode::{
    acceleration_partials, along_gamma, first_order_rhs, AssociatedKind, AssociatedSystem, FreeMotion,
    SecondOrderField,
};

use crate::dual::Scalar;
use crate::error::ModelError;
use crate::expression::Expr;

/// Smallest |A_α(r1)| accepted where a formula divides by it.
pub const COEFFICIENT_GUARD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SystemSpec {
    name: String,
    i1: f64,
    i2: f64,
    i_alpha: Vec<f64>,
    a_alpha: Vec<Expr>,
    potential: Option<Expr>,
    labels: Vec<String>,
}

impl SystemSpec {
    pub fn new(
        name: impl Into<String>,
        i1: f64,
        i2: f64,
        i_alpha: Vec<f64>,
        a_alpha: Vec<Expr>,
        potential: Option<Expr>,
        labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        if a_alpha.is_empty() {
            return Err(ModelError::InvalidSpec("at least one constraint is required".into()));
        }
        if i_alpha.len() != a_alpha.len() {
            return Err(ModelError::InvalidSpec(format!(
                "{} constraint inertias but {} constraint coefficients",
                i_alpha.len(),
                a_alpha.len()
            )));
        }
        for (label, value) in [("I1", i1), ("I2", i2)]
            .into_iter()
            .chain(i_alpha.iter().map(|&v| ("I_alpha", v)))
        {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidSpec(format!("inertia {label} must be positive, got {value}")));
            }
        }
        let n = 2 + a_alpha.len();
        if labels.len() != n {
            return Err(ModelError::InvalidSpec(format!("expected {n} coordinate labels, got {}", labels.len())));
        }
        Ok(SystemSpec {
            name: name.into(),
            i1,
            i2,
            i_alpha,
            a_alpha,
            potential,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.a_alpha.len()
    }

    /// Configuration dimension `2 + m`.
    pub fn dim(&self) -> usize {
        2 + self.m()
    }

    pub fn i1(&self) -> f64 {
        self.i1
    }

    pub fn i2(&self) -> f64 {
        self.i2
    }

    pub fn i_alpha(&self) -> &[f64] {
        &self.i_alpha
    }

    pub fn a_alpha(&self) -> &[Expr] {
        &self.a_alpha
    }

    pub fn potential(&self) -> Option<&Expr> {
        self.potential.as_ref()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Diagonal of the kinetic-energy metric, `(I1, I2, I_1..I_m)`.
    pub fn inertia_diagonal(&self) -> Vec<f64> {
        let mut d = vec![self.i1, self.i2];
        d.extend_from_slice(&self.i_alpha);
        d
    }

    /// `(A_α(r1), A'_α(r1))` for every constraint.
    pub fn coefficients<T: Scalar>(&self, r1: T) -> Result<Vec<(T, T)>, ModelError> {
        self.a_alpha
            .iter()
            .map(|a| a.eval_with_derivative(r1).map_err(ModelError::from))
            .collect()
    }

    /// `(N, K)` with `N = (I2 + Σ I_α A_α²)^{-1/2}` and `K = Σ I_α A_α A'_α`.
    pub fn measure_density<T: Scalar>(&self, r1: T) -> Result<(T, T), ModelError> {
        let coeffs = self.coefficients(r1)?;
        Ok(self.density_from(&coeffs))
    }

    pub(crate) fn density_from<T: Scalar>(&self, coeffs: &[(T, T)]) -> (T, T) {
        let mut inv_sq = T::constant(self.i2);
        let mut k = T::zero();
        for (&(a, da), &inertia) in coeffs.iter().zip(&self.i_alpha) {
            inv_sq = inv_sq + a * a * inertia;
            k = k + a * da * inertia;
        }
        (inv_sq.sqrt().recip(), k)
    }

    /// `(V(r2), V'(r2))`, zero when the system has no potential.
    pub fn potential_with_slope<T: Scalar>(&self, r2: T) -> Result<(T, T), ModelError> {
        match &self.potential {
            Some(v) => Ok(v.eval_with_derivative(r2)?),
            None => Ok((T::zero(), T::zero())),
        }
    }

    pub fn kinetic_energy<T: Scalar>(&self, v: &[T]) -> T {
        self.inertia_diagonal()
            .iter()
            .zip(v)
            .fold(T::zero(), |acc, (&inertia, &vi)| acc + vi * vi * (0.5 * inertia))
    }

    /// Total energy `T + V`.
    pub fn energy(&self, q: &[f64], v: &[f64]) -> Result<f64, ModelError> {
        Ok(self.kinetic_energy(v) + self.potential_with_slope(q[1])?.0)
    }

    /// Rows of the constraint one-forms: row `a` is `(0, A_a, e_a)` so that
    /// `ω(q)·v = ṡ_a + A_a(r1) ṙ2`.
    pub fn constraint_form<T: Scalar>(&self, q: &[T]) -> Result<Vec<Vec<T>>, ModelError> {
        let n = self.dim();
        self.a_alpha
            .iter()
            .enumerate()
            .map(|(a, expr)| {
                let mut row = vec![T::zero(); n];
                row[1] = expr.eval(q[0])?;
                row[2 + a] = T::one();
                Ok(row)
            })
            .collect()
    }

    /// `ω(q)·v`, one entry per constraint.
    pub fn constraint_residual<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<Vec<T>, ModelError> {
        Ok(self
            .constraint_form(q)?
            .into_iter()
            .map(|row| row.iter().zip(v).fold(T::zero(), |acc, (&w, &vi)| acc + w * vi))
            .collect())
    }

    /// Accelerations of `(r1, r2)` in the reduced nonholonomic dynamics.
    pub fn reduced_accelerations<T: Scalar>(&self, q: &[T], v: &[T]) -> Result<(T, T), ModelError> {
        let (n, k) = self.measure_density(q[0])?;
        let (_, dv) = self.potential_with_slope(q[1])?;
        let n2 = n * n;
        Ok((T::zero(), -(n2 * k * v[0] * v[1]) - n2 * dv))
    }

    pub fn nonholonomic_rhs(&self, st: &State) -> Result<NonholonomicRates, ModelError> {
        self.check_state(st)?;
        let (r1_accel, r2_accel) = self.reduced_accelerations(&st.q, &st.v)?;
        let s_velocity = self
            .coefficients(st.q[0])?
            .into_iter()
            .map(|(a, _)| -a * st.v[1])
            .collect();
        Ok(NonholonomicRates {
            r1_accel,
            r2_accel,
            s_velocity,
        })
    }

    /// First-order form of the nonholonomic dynamics on `y = (q, ṙ1, ṙ2)`.
    pub fn nonholonomic_field(&self, y: &[f64]) -> Result<Vec<f64>, ModelError> {
        let n = self.dim();
        if y.len() != n + 2 {
            return Err(ModelError::Dimension {
                expected: n + 2,
                got: y.len(),
            });
        }
        let st = self.unreduce(y)?;
        let rates = self.nonholonomic_rhs(&st)?;
        let mut out = Vec::with_capacity(n + 2);
        out.push(y[n]);
        out.push(y[n + 1]);
        out.extend(rates.s_velocity);
        out.push(rates.r1_accel);
        out.push(rates.r2_accel);
        Ok(out)
    }

    /// `(q, ṙ1, ṙ2)` from a full state.
    pub fn reduce(&self, st: &State) -> Vec<f64> {
        let mut y = st.q.clone();
        y.push(st.v[0]);
        y.push(st.v[1]);
        y
    }

    /// Full state from `(q, ṙ1, ṙ2)`, with `ṡ` taken from the constraints.
    pub fn unreduce(&self, y: &[f64]) -> Result<State, ModelError> {
        let n = self.dim();
        let q = y[..n].to_vec();
        let (dr1, dr2) = (y[n], y[n + 1]);
        let mut v = vec![dr1, dr2];
        for (a, _) in self.coefficients(q[0])? {
            v.push(-a * dr2);
        }
        Ok(State { q, v })
    }

    /// Velocities satisfying the constraints for the given `(ṙ1, ṙ2)`.
    pub fn constrained_velocity(&self, q: &[f64], dr1: f64, dr2: f64) -> Result<Vec<f64>, ModelError> {
        let mut y = q.to_vec();
        y.extend([dr1, dr2]);
        Ok(self.unreduce(&y)?.v)
    }

    fn check_state(&self, st: &State) -> Result<(), ModelError> {
        let n = self.dim();
        for len in [st.q.len(), st.v.len()] {
            if len != n {
                return Err(ModelError::Dimension { expected: n, got: len });
            }
        }
        if st.q.iter().chain(&st.v).any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidSpec("state has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Positions and velocities, ordered `(r1, r2, s_1..s_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Self {
        State { q, v }
    }
}

/// Right-hand side of the mixed first/second-order nonholonomic equations.
#[derive(Debug, Clone, PartialEq)]
pub struct NonholonomicRates {
    pub r1_accel: f64,
    pub r2_accel: f64,
    pub s_velocity: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_density_is_constant() {
        let disk = build_system(&SystemConfig::named("disk")).unwrap();
        for i in 0..50 {
            let phi = -3.0 + 0.13 * i as f64;
            let (n, k) = disk.measure_density(phi).unwrap();
            assert!(k.abs() < 1e-15);
            assert!((n - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn particle_density_at_origin() {
        let p = build_system(&SystemConfig::named("particle")).unwrap();
        assert_eq!(p.measure_density(0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn particle_rhs_hand_value() {
        let p = build_system(&SystemConfig::named("particle")).unwrap();
        // x=1, ẋ=1, ẏ=2: N² = 1/2, K = 1 → ÿ = −(1/2)(1)(1)(2)
        let st = State::new(vec![1.0, 0.0, 0.0], vec![1.0, 2.0, -2.0]);
        let rates = p.nonholonomic_rhs(&st).unwrap();
        assert_eq!(rates.r1_accel, 0.0);
        assert!((rates.r2_accel + 1.0).abs() < 1e-15);
        assert_eq!(rates.s_velocity, vec![-2.0]);
    }

    #[test]
    fn disk_rhs_has_no_r2_acceleration() {
        let disk = build_system(&SystemConfig::named("disk")).unwrap();
        let st = State::new(vec![0.3, 1.0, 2.0, -1.0], vec![1.7, -0.4, 0.0, 0.0]);
        assert_eq!(disk.nonholonomic_rhs(&st).unwrap().r2_accel, 0.0);
    }

    #[test]
    fn zero_r1_rate_freezes_r2_without_potential() {
        for name in ["particle", "knife_edge", "disk"] {
            let sys = build_system(&SystemConfig::named(name)).unwrap();
            let mut v = vec![0.0; sys.dim()];
            v[1] = 1.3;
            let st = State::new(vec![0.4; sys.dim()], v);
            assert_eq!(sys.nonholonomic_rhs(&st).unwrap().r2_accel, 0.0, "{name}");
        }
    }

    #[test]
    fn potential_enters_r2_acceleration() {
        let sys = build_system(&SystemConfig::named("knife_edge_inclined")).unwrap();
        let q = [0.3, 0.0, 0.0];
        let (n, _) = sys.measure_density(q[0]).unwrap();
        let (_, dv) = sys.potential_with_slope(0.0).unwrap();
        let (_, r2) = sys.reduced_accelerations(&q, &[0.0, 0.0, 0.0]).unwrap();
        assert!((r2 + n * n * dv).abs() < 1e-15);
        assert!(r2 > 0.0, "gravity pulls down the slope in +x");
    }

    #[test]
    fn constraint_form_matches_constraint() {
        let disk = build_system(&SystemConfig::named("disk")).unwrap();
        let q = [0.8, 0.0, 0.0, 0.0];
        let v = disk.constrained_velocity(&q, 0.5, 2.0).unwrap();
        assert!((v[2] - 0.8f64.cos() * 2.0).abs() < 1e-15);
        assert!((v[3] - 0.8f64.sin() * 2.0).abs() < 1e-15);
        for r in disk.constraint_residual(&q, &v).unwrap() {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        let disk = build_system(&SystemConfig::named("disk")).unwrap();
        let st = State::new(vec![0.0; 3], vec![0.0; 4]);
        assert!(matches!(disk.nonholonomic_rhs(&st), Err(ModelError::Dimension { .. })));
    }
}
