use std::path::Path;

use nonholo_core::helmholtz::{
    algebraic_multiplier_space, multiplier_residuals, sample_points, Condition, HelmholtzReport, LagrangianHessian,
    ProbeSettings, SampleBox,
};
use nonholo_core::lagrangians::{FreeLagrangian, LagrangianKind};
use nonholo_core::model::{AssociatedKind, AssociatedSystem};
use rayon::prelude::*;

use crate::config::{constants_of_kind, resolve_system, Candidate, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_csv, write_text};

/// Per-point outcome of the multiplier-space probe.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    pub index: usize,
    pub dimension: usize,
    pub max_normalized_det: f64,
    pub nonsingular: bool,
}

#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    Hessian(HelmholtzReport),
    Space {
        depth: u8,
        points: Vec<SpacePoint>,
        /// Points where the tensors could not be evaluated.
        failures: Vec<(usize, String)>,
    },
}

impl VerifyOutcome {
    pub fn verdict(&self) -> String {
        match self {
            VerifyOutcome::Hessian(report) => {
                let failing: Vec<&str> = Condition::ALL.iter().filter(|&&c| !report.passes(c)).map(|c| c.name()).collect();
                if failing.is_empty() {
                    format!("PASS: all six conditions below {:e} at {} points", report.tolerance, report.points.len())
                } else {
                    format!("FAIL: {} above {:e} ({} points)", failing.join(", "), report.tolerance, report.points.len())
                }
            }
            VerifyOutcome::Space { depth, points, .. } => {
                let found = points.iter().filter(|p| p.nonsingular).count();
                if found == 0 {
                    format!("no nonsingular multiplier found (depth {depth}, {} points)", points.len())
                } else if found == points.len() {
                    format!("nonsingular multiplier found at all {found} points (depth {depth})")
                } else {
                    format!("nonsingular multiplier found at {found} of {} points (depth {depth})", points.len())
                }
            }
        }
    }
}

pub fn run_verify(config: &RunConfig) -> Result<VerifyOutcome, CliError> {
    let check = config.verify.as_ref().ok_or_else(|| CliError::config("verify", "missing verify block"))?;
    let system = resolve_system(config)?;
    let kind: AssociatedKind = check.associated.into();
    let field = AssociatedSystem::new(system.clone(), kind).map_err(|e| CliError::config("verify.associated", e))?;
    if check.samples == 0 {
        return Err(CliError::config("verify.samples", "need at least one sample point"));
    }
    let points = sample_points(&system, &SampleBox::for_system(&system), check.samples, config.seed)
        .map_err(|e| CliError::Numerical(format!("sampling: {e}")))?;

    let outcome = match check.candidate {
        Candidate::HessianOfType1 | Candidate::HessianOfType2 => {
            let lag_kind = if check.candidate == Candidate::HessianOfType1 {
                LagrangianKind::Type1
            } else {
                LagrangianKind::Type2
            };
            let constants = constants_of_kind(&system, config, lag_kind);
            let lag = FreeLagrangian::new(system.clone(), constants).map_err(|e| CliError::config("verify.candidate", e))?;
            let report = multiplier_residuals(&field, &LagrangianHessian(lag), &points, config.tolerances.helmholtz);
            if report.points.is_empty() {
                return Err(CliError::Numerical("no admissible sample point".into()));
            }
            VerifyOutcome::Hessian(report)
        }
        Candidate::PointwiseSpace => {
            if !(1..=3).contains(&check.depth) {
                return Err(CliError::config("verify.depth", format!("must be 1, 2 or 3, got {}", check.depth)));
            }
            let settings = ProbeSettings {
                seed: config.seed,
                ..ProbeSettings::default()
            };
            let results: Vec<_> = points
                .par_iter()
                .enumerate()
                .map(|(index, (q, v))| (index, algebraic_multiplier_space(&field, q, v, check.depth, &settings)))
                .collect();
            let mut ok = Vec::new();
            let mut failures = Vec::new();
            for (index, r) in results {
                match r {
                    Ok(space) => ok.push(SpacePoint {
                        index,
                        dimension: space.dimension(),
                        max_normalized_det: space.max_normalized_det,
                        nonsingular: space.nonsingular_found,
                    }),
                    Err(e) => failures.push((index, e.to_string())),
                }
            }
            if ok.is_empty() {
                return Err(CliError::Numerical("no admissible sample point".into()));
            }
            VerifyOutcome::Space {
                depth: check.depth,
                points: ok,
                failures,
            }
        }
    };
    Ok(outcome)
}

/// `helmholtz_report.csv` and `verdict.txt`; the space probe also writes
/// `multiplier_space.csv`.
pub fn write_verify(dir: &Path, outcome: &VerifyOutcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let header = ["condition", "max_residual", "pass"].map(String::from);
    let pass = |b: bool| if b { "pass" } else { "fail" }.to_string();
    match outcome {
        VerifyOutcome::Hessian(report) => {
            let rows = Condition::ALL
                .iter()
                .map(|&c| vec![c.name().to_string(), num(report.max_residual(c)), pass(report.passes(c))]);
            write_csv(&dir.join("helmholtz_report.csv"), &header, rows)?;
            let failures = report.failures.iter().map(|f| vec![f.index.to_string(), f.message.clone()]);
            write_csv(&dir.join("point_failures.csv"), &["point".to_string(), "message".to_string()], failures)?;
        }
        VerifyOutcome::Space { points, failures, .. } => {
            // the row carries the smallest per-point maximum of |det| over the probes
            let worst = points.iter().map(|p| p.max_normalized_det).fold(f64::INFINITY, f64::min);
            let all = points.iter().all(|p| p.nonsingular);
            write_csv(
                &dir.join("helmholtz_report.csv"),
                &header,
                [vec!["nonsingular_multiplier".to_string(), num(worst), pass(all)]],
            )?;
            let rows = points.iter().map(|p| {
                vec![
                    p.index.to_string(),
                    p.dimension.to_string(),
                    num(p.max_normalized_det),
                    p.nonsingular.to_string(),
                ]
            });
            let header = ["point", "dimension", "max_normalized_det", "nonsingular"].map(String::from);
            write_csv(&dir.join("multiplier_space.csv"), &header, rows)?;
            let rows = failures.iter().map(|(i, m)| vec![i.to_string(), m.clone()]);
            write_csv(&dir.join("point_failures.csv"), &["point".to_string(), "message".to_string()], rows)?;
        }
    }
    write_text(&dir.join("verdict.txt"), &format!("{}\n", outcome.verdict()))
}
