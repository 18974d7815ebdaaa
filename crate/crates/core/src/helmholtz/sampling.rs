use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::model::SystemSpec;

/// Box in `(q, q̇)` from which test points are drawn, with the admissibility
/// requirements `|ṙ1| ≥ min_r1_speed` and `|A_α(r1)| ≥ min_coefficient`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub q_ranges: Vec<(f64, f64)>,
    pub v_ranges: Vec<(f64, f64)>,
    pub min_r1_speed: f64,
    pub min_coefficient: f64,
}

impl SampleBox {
    /// `r1 ∈ [−1.2, 1.2]`, other coordinates in `[−2, 2]`, velocities in
    /// `[−2, 2]`, `|ṙ1| ≥ 0.3`, `|A_α| ≥ 0.2`.
    pub fn for_system(system: &SystemSpec) -> Self {
        let n = system.dim();
        let mut q_ranges = vec![(-2.0, 2.0); n];
        q_ranges[0] = (-1.2, 1.2);
        SampleBox {
            q_ranges,
            v_ranges: vec![(-2.0, 2.0); n],
            min_r1_speed: 0.3,
            min_coefficient: 0.2,
        }
    }
}

const MAX_ATTEMPTS_PER_POINT: usize = 1000;

/// `count` admissible points drawn uniformly from `sample_box`, reproducible
/// for a given `seed`.
pub fn sample_points(
    system: &SystemSpec,
    sample_box: &SampleBox,
    count: usize,
    seed: u64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, ModelError> {
    let n = system.dim();
    if sample_box.q_ranges.len() != n || sample_box.v_ranges.len() != n {
        return Err(ModelError::Dimension {
            expected: n,
            got: sample_box.q_ranges.len().min(sample_box.v_ranges.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |ranges: &[(f64, f64)]| -> Vec<f64> {
        ranges.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect()
    };
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0;
    while points.len() < count {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_POINT * count.max(1) {
            return Err(ModelError::InvalidSpec(format!(
                "no admissible sample points found for `{}` after {} draws",
                system.name(),
                attempts - 1
            )));
        }
        let q = draw(&sample_box.q_ranges);
        let v = draw(&sample_box.v_ranges);
        if v[0].abs() < sample_box.min_r1_speed {
            continue;
        }
        let ok = match system.coefficients(q[0]) {
            Ok(c) => c.iter().all(|(a, _)| a.abs() >= sample_box.min_coefficient),
            Err(_) => false,
        };
        if ok {
            points.push((q, v));
        }
    }
    Ok(points)
}
