use std::path::{Path, PathBuf};

use nonholo_core::integrators::{
    discretize_constraints, seed_second_point, AnyStepper, DiscretizationParams, ModifiedStepper, NewtonSettings,
    NonholonomicStepper, Scheme, VariationalStepper, DEFAULT_EPS_MIN,
};
use nonholo_core::lagrangians::{FreeConstants, FreeLagrangian, LagrangianKind};
use nonholo_core::model::{build_system, AssociatedKind, SystemConfig, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "NONHOLO_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    #[default]
    Nonholonomic,
    Variational,
    Modified,
    /// Adaptive reference integration of the nonholonomic equations,
    /// sampled on the step grid.
    Oracle,
}

impl IntegratorKind {
    pub fn name(self) -> &'static str {
        match self {
            IntegratorKind::Nonholonomic => "nonholonomic",
            IntegratorKind::Variational => "variational",
            IntegratorKind::Modified => "modified",
            IntegratorKind::Oracle => "oracle",
        }
    }
}

/// `q0` plus either the `(r1, r2)` components of `q1`, or continuous
/// velocities `v0` (only their `r1`, `r2` entries are used; `q1` is
/// `q0 + h v0` with the `s` components re-seeded from the discrete
/// constraints).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub q0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1_r: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub newton: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub eps_min: f64,
    pub reference: f64,
    pub helmholtz: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let newton = NewtonSettings::default();
        Tolerances {
            newton: newton.tol,
            max_iterations: newton.max_iterations,
            max_halvings: newton.max_halvings,
            eps_min: DEFAULT_EPS_MIN,
            reference: 1e-12,
            helmholtz: nonholo_core::helmholtz::CONDITION_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    HessianOfType1,
    HessianOfType2,
    PointwiseSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociatedChoice {
    Assoc1,
    Assoc2,
    Extended,
}

impl From<AssociatedChoice> for AssociatedKind {
    fn from(c: AssociatedChoice) -> Self {
        match c {
            AssociatedChoice::Assoc1 => AssociatedKind::Assoc1,
            AssociatedChoice::Assoc2 => AssociatedKind::Assoc2,
            AssociatedChoice::Extended => AssociatedKind::Extended,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub associated: AssociatedChoice,
    pub candidate: Candidate,
    #[serde(default = "default_depth")]
    pub depth: u8,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_depth() -> u8 {
    3
}

fn default_samples() -> usize {
    50
}

fn default_h() -> f64 {
    0.1
}

fn default_steps() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub integrator: IntegratorKind,
    /// Free Lagrangian constants; the per-system default when absent.
    #[serde(default)]
    pub lagrangian: Option<FreeConstants>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Coordinate labels of the plane used for circle fits; `x`, `y` when
    /// the system has both.
    #[serde(default)]
    pub projection: Option<[String; 2]>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Reads the file and applies the `NONHOLO_SEED` override.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        if let Ok(seed) = std::env::var(SEED_ENV) {
            config.seed = seed.trim().parse().map_err(|e| CliError::config(SEED_ENV, e))?;
        }
        Ok(config)
    }
}

/// A validated simulation setup.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub system: SystemSpec,
    pub params: DiscretizationParams,
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    /// Constraint-compatible continuous velocity at `q0`, the initial data
    /// of the reference solution.
    pub v0: Vec<f64>,
    pub stepper: Option<AnyStepper>,
    pub projection: Option<(usize, usize)>,
}

pub fn resolve_system(config: &RunConfig) -> Result<SystemSpec, CliError> {
    build_system(&config.system).map_err(|e| CliError::config("system", e))
}

pub fn free_lagrangian(system: &SystemSpec, constants: Option<&FreeConstants>) -> Result<FreeLagrangian, CliError> {
    match constants {
        Some(c) => FreeLagrangian::new(system.clone(), c.clone()),
        None => FreeLagrangian::default_for(system.clone()),
    }
    .map_err(|e| CliError::config("lagrangian", e))
}

/// Constants of the requested kind: the configured ones when they match,
/// unit constants otherwise.
pub fn constants_of_kind(system: &SystemSpec, config: &RunConfig, kind: LagrangianKind) -> FreeConstants {
    match &config.lagrangian {
        Some(c) if c.kind() == kind => c.clone(),
        _ => FreeConstants::unit(kind, system.m()),
    }
}

fn projection(system: &SystemSpec, requested: Option<&[String; 2]>) -> Result<Option<(usize, usize)>, CliError> {
    let find = |label: &str| system.labels().iter().position(|l| l == label);
    match requested {
        Some([a, b]) => {
            let ia = find(a).ok_or_else(|| CliError::config("projection", format!("no coordinate `{a}`")))?;
            let ib = find(b).ok_or_else(|| CliError::config("projection", format!("no coordinate `{b}`")))?;
            Ok(Some((ia, ib)))
        }
        None => Ok(find("x").zip(find("y"))),
    }
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let system = resolve_system(config)?;
    let params = DiscretizationParams::new(config.alpha, config.h, config.scheme).map_err(|e| CliError::config("alpha/h", e))?;
    let tol = &config.tolerances;
    if !(tol.newton > 0.0 && tol.reference > 0.0 && tol.eps_min >= 0.0 && tol.helmholtz > 0.0) {
        return Err(CliError::config("tolerances", "tolerances must be positive"));
    }
    let init = config.initial.as_ref().ok_or_else(|| CliError::config("initial", "missing initial data"))?;
    let n = system.dim();
    if init.q0.len() != n {
        return Err(CliError::config("initial.q0", format!("expected {n} entries, got {}", init.q0.len())));
    }
    let q0 = init.q0.clone();
    let (dr1, dr2) = match (&init.q1_r, &init.v0) {
        (Some([r1, r2]), None) => ((r1 - q0[0]) / config.h, (r2 - q0[1]) / config.h),
        (None, Some(v)) if v.len() == n => (v[0], v[1]),
        (None, Some(v)) => return Err(CliError::config("initial.v0", format!("expected {n} entries, got {}", v.len()))),
        _ => return Err(CliError::config("initial", "give exactly one of `q1_r` and `v0`")),
    };
    let constraints = discretize_constraints(system.clone(), params);
    let q1 = seed_second_point(&constraints, &q0, (q0[0] + config.h * dr1, q0[1] + config.h * dr2))
        .map_err(|e| CliError::config("initial", e))?;
    let v0 = system.constrained_velocity(&q0, dr1, dr2).map_err(|e| CliError::config("initial", e))?;

    let newton = NewtonSettings {
        tol: tol.newton,
        max_iterations: tol.max_iterations,
        max_halvings: tol.max_halvings,
    };
    let stepper = match config.integrator {
        IntegratorKind::Oracle => None,
        IntegratorKind::Nonholonomic => {
            let mut s = NonholonomicStepper::new(system.clone(), params);
            s.newton = newton;
            Some(AnyStepper::Nonholonomic(s))
        }
        IntegratorKind::Variational => {
            let mut s = VariationalStepper::new(free_lagrangian(&system, config.lagrangian.as_ref())?, params);
            s.newton = newton;
            s.eps_min = tol.eps_min;
            Some(AnyStepper::Variational(s))
        }
        IntegratorKind::Modified => {
            let mut s = ModifiedStepper::new(free_lagrangian(&system, config.lagrangian.as_ref())?, params);
            s.newton = newton;
            s.eps_min = tol.eps_min;
            Some(AnyStepper::Modified(s))
        }
    };
    Ok(Prepared {
        projection: projection(&system, config.projection.as_ref())?,
        config: config.clone(),
        system,
        params,
        q0,
        q1,
        v0,
        stepper,
    })
}

/// Parses `0.5`, `1/3` or `-2e-1`.
pub fn parse_value(text: &str) -> Result<f64, CliError> {
    let text = text.trim();
    let bad = |e: &dyn std::fmt::Display| CliError::config("values", format!("`{text}`: {e}"));
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|e| bad(&e))?;
            let den: f64 = den.trim().parse().map_err(|e| bad(&e))?;
            num / den
        }
        None => text.parse().map_err(|e| bad(&e))?,
    };
    if !value.is_finite() {
        return Err(bad(&"not a finite number"));
    }
    Ok(value)
}

pub fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(parse_value).collect()
}
