use super::discrete::{DiscreteConstraints, DiscreteLagrangian, DiscretizationParams};
use super::newton::{max_abs, newton_solve, partitioned_newton_solve, NewtonSettings};
use super::IntegratorError;
use crate::dual::{lift_all, Dual};
use crate::error::ModelError;
use crate::lagrangians::FreeLagrangian;
use crate::model::SystemSpec;

/// Default `ε_min` for the `|Δr1|/h` guard of free-Lagrangian steppers.
pub const DEFAULT_EPS_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub q_next: Vec<f64>,
    /// `λ_k`, empty for steppers without multipliers.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// One implicit step `(q_{k−1}, q_k) → q_{k+1}`.
pub trait Stepper: Sync {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn params(&self) -> DiscretizationParams;

    fn step(&self, q_prev: &[f64], q_curr: &[f64]) -> Result<StepOutcome, IntegratorError>;

    /// Max-norm residual of the defining equations for a completed step,
    /// recomputed from scratch.
    fn defining_residual(&self, q_prev: &[f64], q_curr: &[f64], q_next: &[f64], multipliers: &[f64]) -> Result<f64, IntegratorError>;
}

fn check_dim(expected: usize, q: &[f64]) -> Result<(), IntegratorError> {
    if q.len() != expected {
        return Err(ModelError::Dimension { expected, got: q.len() }.into());
    }
    Ok(())
}

fn predictor(q_prev: &[f64], q_curr: &[f64]) -> Vec<f64> {
    q_prev.iter().zip(q_curr).map(|(a, b)| 2.0 * b - a).collect()
}

fn guard_r1(q1: &[f64], q2: &[f64], h: f64, eps_min: f64) -> Result<(), IntegratorError> {
    let ratio = ((q2[0] - q1[0]) / h).abs();
    if ratio.is_nan() || ratio <= eps_min {
        return Err(IntegratorError::SingularSet { ratio, eps_min });
    }
    Ok(())
}

/// Discrete Lagrange–d'Alembert stepper: solves
/// `D1 L_d(q_k, q_{k+1}) + D2 L_d(q_{k−1}, q_k) = λ_a ω^a(q_k)` together with
/// `ω_d(q_k, q_{k+1}) = 0` for `(q_{k+1}, λ)`.
#[derive(Debug, Clone)]
pub struct NonholonomicStepper {
    ld: DiscreteLagrangian<SystemSpec>,
    wd: DiscreteConstraints,
    pub newton: NewtonSettings,
}

impl NonholonomicStepper {
    pub fn new(system: SystemSpec, params: DiscretizationParams) -> Self {
        NonholonomicStepper {
            ld: super::discretize_lagrangian(system.clone(), params),
            wd: super::discretize_constraints(system, params),
            newton: NewtonSettings::default(),
        }
    }

    pub fn reversed(&self) -> Self {
        let params = self.ld.params().reversed();
        NonholonomicStepper {
            ld: self.ld.with_params(params),
            wd: self.wd.with_params(params),
            newton: self.newton,
        }
    }

    fn equations<T: crate::dual::Scalar>(&self, q_curr: &[T], q_next: &[T], lambda: &[T], d2_prev: &[f64], form: &[Vec<f64>]) -> Result<Vec<T>, ModelError> {
        let (d1, _) = self.ld.partials(q_curr, q_next)?;
        let mut out: Vec<T> = d1
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let forcing = lambda.iter().zip(form).fold(T::zero(), |acc, (&l, row)| acc + l * row[i]);
                d + d2_prev[i] - forcing
            })
            .collect();
        out.extend(self.wd.value(q_curr, q_next)?);
        Ok(out)
    }
}

impl Stepper for NonholonomicStepper {
    fn name(&self) -> &'static str {
        "nonholonomic"
    }

    fn dim(&self) -> usize {
        self.ld.dim()
    }

    fn params(&self) -> DiscretizationParams {
        *self.ld.params()
    }

    fn step(&self, q_prev: &[f64], q_curr: &[f64]) -> Result<StepOutcome, IntegratorError> {
        let n = self.dim();
        check_dim(n, q_prev)?;
        check_dim(n, q_curr)?;
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        let form = self.wd.system().constraint_form(q_curr)?;
        let q_curr_d = lift_all(q_curr);
        let m = form.len();
        let mut x0 = predictor(q_prev, q_curr);
        x0.extend(std::iter::repeat_n(0.0, m));
        let out = newton_solve(
            |x: &[Dual<f64>]| self.equations(&q_curr_d, &x[..n], &x[n..], &d2_prev, &form),
            x0,
            &self.newton,
        )?;
        Ok(StepOutcome {
            q_next: out.x[..n].to_vec(),
            multipliers: out.x[n..].to_vec(),
            iterations: out.iterations,
            residual: out.residual,
        })
    }

    fn defining_residual(&self, q_prev: &[f64], q_curr: &[f64], q_next: &[f64], multipliers: &[f64]) -> Result<f64, IntegratorError> {
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        let form = self.wd.system().constraint_form(q_curr)?;
        Ok(max_abs(&self.equations(q_curr, q_next, multipliers, &d2_prev, &form)?))
    }
}

/// Discrete Euler–Lagrange stepper for a free Lagrangian:
/// `D1 L̃_d(q_k, q_{k+1}) + D2 L̃_d(q_{k−1}, q_k) = 0`.
#[derive(Debug, Clone)]
pub struct VariationalStepper {
    ld: DiscreteLagrangian<FreeLagrangian>,
    pub eps_min: f64,
    pub newton: NewtonSettings,
}

impl VariationalStepper {
    pub fn new(lagrangian: FreeLagrangian, params: DiscretizationParams) -> Self {
        VariationalStepper {
            ld: super::discretize_lagrangian(lagrangian, params),
            eps_min: DEFAULT_EPS_MIN,
            newton: NewtonSettings::default(),
        }
    }

    pub fn reversed(&self) -> Self {
        VariationalStepper {
            ld: self.ld.with_params(self.ld.params().reversed()),
            ..self.clone()
        }
    }

    pub fn discrete_lagrangian(&self) -> &DiscreteLagrangian<FreeLagrangian> {
        &self.ld
    }

    fn equations<T: crate::dual::Scalar>(&self, q_curr: &[T], q_next: &[T], d2_prev: &[f64]) -> Result<Vec<T>, ModelError> {
        let (d1, _) = self.ld.partials(q_curr, q_next)?;
        Ok(d1.iter().zip(d2_prev).map(|(&a, &b)| a + b).collect())
    }
}

impl Stepper for VariationalStepper {
    fn name(&self) -> &'static str {
        "variational"
    }

    fn dim(&self) -> usize {
        self.ld.dim()
    }

    fn params(&self) -> DiscretizationParams {
        *self.ld.params()
    }

    fn step(&self, q_prev: &[f64], q_curr: &[f64]) -> Result<StepOutcome, IntegratorError> {
        let n = self.dim();
        check_dim(n, q_prev)?;
        check_dim(n, q_curr)?;
        let h = self.ld.params().h;
        guard_r1(q_prev, q_curr, h, self.eps_min)?;
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        let q_curr_d = lift_all(q_curr);
        let out = partitioned_newton_solve(
            |x: &[Dual<f64>]| self.equations(&q_curr_d, x, &d2_prev),
            predictor(q_prev, q_curr),
            2,
            &self.newton,
        )?;
        guard_r1(q_curr, &out.x, h, self.eps_min)?;
        Ok(StepOutcome {
            q_next: out.x,
            multipliers: Vec::new(),
            iterations: out.iterations,
            residual: out.residual,
        })
    }

    fn defining_residual(&self, q_prev: &[f64], q_curr: &[f64], q_next: &[f64], _multipliers: &[f64]) -> Result<f64, IntegratorError> {
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        Ok(max_abs(&self.equations(q_curr, q_next, &d2_prev)?))
    }
}

/// The hybrid stepper: the discrete Euler–Lagrange equations of a free
/// Lagrangian for `(r1, r2)` only, closed by `ω_d(q_k, q_{k+1}) = 0`.
#[derive(Debug, Clone)]
pub struct ModifiedStepper {
    ld: DiscreteLagrangian<FreeLagrangian>,
    wd: DiscreteConstraints,
    pub eps_min: f64,
    pub newton: NewtonSettings,
}

impl ModifiedStepper {
    pub fn new(lagrangian: FreeLagrangian, params: DiscretizationParams) -> Self {
        let system = lagrangian.system().clone();
        ModifiedStepper {
            ld: super::discretize_lagrangian(lagrangian, params),
            wd: super::discretize_constraints(system, params),
            eps_min: DEFAULT_EPS_MIN,
            newton: NewtonSettings::default(),
        }
    }

    pub fn reversed(&self) -> Self {
        let params = self.ld.params().reversed();
        ModifiedStepper {
            ld: self.ld.with_params(params),
            wd: self.wd.with_params(params),
            ..self.clone()
        }
    }

    fn equations<T: crate::dual::Scalar>(&self, q_curr: &[T], q_next: &[T], d2_prev: &[f64]) -> Result<Vec<T>, ModelError> {
        let (d1, _) = self.ld.partials(q_curr, q_next)?;
        let mut out = vec![d1[0] + d2_prev[0], d1[1] + d2_prev[1]];
        out.extend(self.wd.value(q_curr, q_next)?);
        Ok(out)
    }
}

impl Stepper for ModifiedStepper {
    fn name(&self) -> &'static str {
        "modified"
    }

    fn dim(&self) -> usize {
        self.ld.dim()
    }

    fn params(&self) -> DiscretizationParams {
        *self.ld.params()
    }

    fn step(&self, q_prev: &[f64], q_curr: &[f64]) -> Result<StepOutcome, IntegratorError> {
        let n = self.dim();
        check_dim(n, q_prev)?;
        check_dim(n, q_curr)?;
        let h = self.ld.params().h;
        guard_r1(q_prev, q_curr, h, self.eps_min)?;
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        let q_curr_d = lift_all(q_curr);
        let out = partitioned_newton_solve(
            |x: &[Dual<f64>]| self.equations(&q_curr_d, x, &d2_prev),
            predictor(q_prev, q_curr),
            2,
            &self.newton,
        )?;
        guard_r1(q_curr, &out.x, h, self.eps_min)?;
        Ok(StepOutcome {
            q_next: out.x,
            multipliers: Vec::new(),
            iterations: out.iterations,
            residual: out.residual,
        })
    }

    fn defining_residual(&self, q_prev: &[f64], q_curr: &[f64], q_next: &[f64], _multipliers: &[f64]) -> Result<f64, IntegratorError> {
        let (_, d2_prev) = self.ld.partials(q_prev, q_curr)?;
        Ok(max_abs(&self.equations(q_curr, q_next, &d2_prev)?))
    }
}

/// Any of the three steppers, for callers that choose at run time.
#[derive(Debug, Clone)]
pub enum AnyStepper {
    Nonholonomic(NonholonomicStepper),
    Variational(VariationalStepper),
    Modified(ModifiedStepper),
}

impl AnyStepper {
    pub fn reversed(&self) -> Self {
        match self {
            AnyStepper::Nonholonomic(s) => AnyStepper::Nonholonomic(s.reversed()),
            AnyStepper::Variational(s) => AnyStepper::Variational(s.reversed()),
            AnyStepper::Modified(s) => AnyStepper::Modified(s.reversed()),
        }
    }

    fn inner(&self) -> &dyn Stepper {
        match self {
            AnyStepper::Nonholonomic(s) => s,
            AnyStepper::Variational(s) => s,
            AnyStepper::Modified(s) => s,
        }
    }
}

impl Stepper for AnyStepper {
    fn name(&self) -> &'static str {
        self.inner().name()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn params(&self) -> DiscretizationParams {
        self.inner().params()
    }

    fn step(&self, q_prev: &[f64], q_curr: &[f64]) -> Result<StepOutcome, IntegratorError> {
        self.inner().step(q_prev, q_curr)
    }

    fn defining_residual(&self, q_prev: &[f64], q_curr: &[f64], q_next: &[f64], multipliers: &[f64]) -> Result<f64, IntegratorError> {
        self.inner().defining_residual(q_prev, q_curr, q_next, multipliers)
    }
}
