use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleFitMode {
    /// The circle through three of the points, given by index.
    ThreePoint([usize; 3]),
    /// Algebraic (Kåsa) least squares over all points.
    LeastSquares,
}

/// `(x − A)² + (y − B)² = C²` with the largest radial deviation
/// `| |p − (A, B)| − C |` over the fitted points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: (f64, f64),
    pub radius: f64,
    pub max_residual: f64,
}

fn radial_residual(points: &[(f64, f64)], center: (f64, f64), radius: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| ((x - center.0).hypot(y - center.1) - radius).abs())
        .fold(0.0, f64::max)
}

/// Rows `(2x, 2y, 1)` with right-hand side `x² + y²`: the circle equation
/// rewritten as `2Ax + 2By + D = x² + y²`, `D = C² − A² − B²`.
fn finish(points: &[(f64, f64)], sol: [f64; 3]) -> Result<CircleFit, DiagnosticsError> {
    let (a, b, d) = (sol[0], sol[1], sol[2]);
    let r2 = d + a * a + b * b;
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(DiagnosticsError::Collinear);
    }
    let radius = r2.sqrt();
    Ok(CircleFit {
        center: (a, b),
        radius,
        max_residual: radial_residual(points, (a, b), radius),
    })
}

pub fn fit_circle(points: &[(f64, f64)], mode: CircleFitMode) -> Result<CircleFit, DiagnosticsError> {
    match mode {
        CircleFitMode::ThreePoint(idx) => {
            let mut chosen = [(0.0, 0.0); 3];
            for (slot, &i) in chosen.iter_mut().zip(&idx) {
                *slot = *points.get(i).ok_or_else(|| DiagnosticsError::InvalidInput(format!("point index {i} out of range ({} points)", points.len())))?;
            }
            // shift to the first point for conditioning
            let (x0, y0) = chosen[0];
            let local: Vec<(f64, f64)> = chosen.iter().map(|&(x, y)| (x - x0, y - y0)).collect();
            let m = Matrix3::from_fn(|r, c| match c {
                0 => 2.0 * local[r].0,
                1 => 2.0 * local[r].1,
                _ => 1.0,
            });
            let rhs = Vector3::from_fn(|r, _| local[r].0 * local[r].0 + local[r].1 * local[r].1);
            let scale = local.iter().map(|p| p.0.abs().max(p.1.abs())).fold(0.0, f64::max);
            if scale == 0.0 || m.determinant().abs() <= 1e-12 * scale * scale {
                return Err(DiagnosticsError::Collinear);
            }
            let sol = m.lu().solve(&rhs).ok_or(DiagnosticsError::Collinear)?;
            let fit = finish(&local, [sol[0], sol[1], sol[2]])?;
            Ok(CircleFit {
                center: (fit.center.0 + x0, fit.center.1 + y0),
                ..fit
            })
        }
        CircleFitMode::LeastSquares => {
            if points.len() < 3 {
                return Err(DiagnosticsError::TooShort { need: 3, got: points.len() });
            }
            let count = points.len() as f64;
            let mean = points.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / count, acc.1 + p.1 / count));
            let local: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x - mean.0, y - mean.1)).collect();
            let m = DMatrix::from_fn(local.len(), 3, |r, c| match c {
                0 => 2.0 * local[r].0,
                1 => 2.0 * local[r].1,
                _ => 1.0,
            });
            let rhs = DVector::from_fn(local.len(), |r, _| local[r].0 * local[r].0 + local[r].1 * local[r].1);
            let svd = m.svd(true, true);
            let smax = svd.singular_values.max();
            if svd.singular_values.min() <= 1e-12 * smax {
                return Err(DiagnosticsError::Collinear);
            }
            let sol = svd
                .solve(&rhs, 0.0)
                .map_err(|e| DiagnosticsError::InvalidInput(e.to_string()))?;
            let fit = finish(&local, [sol[0], sol[1], sol[2]])?;
            Ok(CircleFit {
                center: (fit.center.0 + mean.0, fit.center.1 + mean.1),
                ..fit
            })
        }
    }
}

/// Least-squares radii over consecutive windows of `window` points taken
/// every `stride` points.
pub fn windowed_radii(points: &[(f64, f64)], window: usize, stride: usize) -> Result<Vec<f64>, DiagnosticsError> {
    if window < 3 || stride == 0 {
        return Err(DiagnosticsError::InvalidInput(format!("window must be >= 3 and stride > 0, got {window} and {stride}")));
    }
    if points.len() < window {
        return Err(DiagnosticsError::TooShort { need: window, got: points.len() });
    }
    (0..=points.len() - window)
        .step_by(stride)
        .map(|start| fit_circle(&points[start..start + window], CircleFitMode::LeastSquares).map(|f| f.radius))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_circle_through_three_points() {
        let fit = fit_circle(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)], CircleFitMode::ThreePoint([0, 1, 2])).unwrap();
        assert!(fit.center.0.abs() < 1e-15 && fit.center.1.abs() < 1e-15);
        assert!((fit.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_points_are_rejected() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        assert_eq!(fit_circle(&pts, CircleFitMode::ThreePoint([0, 1, 2])), Err(DiagnosticsError::Collinear));
        assert_eq!(fit_circle(&pts, CircleFitMode::LeastSquares), Err(DiagnosticsError::Collinear));
    }

    #[test]
    fn least_squares_reports_geometric_residual() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|k| {
                let a = k as f64 * 0.5;
                let r = if k == 3 { 2.1 } else { 2.0 };
                (1.0 + r * a.cos(), -1.0 + r * a.sin())
            })
            .collect();
        let fit = fit_circle(&pts, CircleFitMode::LeastSquares).unwrap();
        assert!(fit.max_residual > 0.05 && fit.max_residual < 0.1);
    }

    #[test]
    fn windowed_radii_follow_a_spiral() {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|k| {
                let a = k as f64 * 0.1;
                let r = 1.0 + 0.01 * k as f64;
                (r * a.cos(), r * a.sin())
            })
            .collect();
        let radii = windowed_radii(&pts, 40, 40).unwrap();
        assert_eq!(radii.len(), 5);
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn modes_agree_on_exact_circles(
            cx in -5.0..5.0f64, cy in -5.0..5.0f64, r in 0.1..10.0f64,
            a0 in 0.0..std::f64::consts::TAU, a1 in 0.5..2.0f64, a2 in 0.5..2.0f64,
        ) {
            let angles = [a0, a0 + a1, a0 + a1 + a2];
            let pts: Vec<(f64, f64)> = angles.iter().map(|a| (cx + r * a.cos(), cy + r * a.sin())).collect();
            let three = fit_circle(&pts, CircleFitMode::ThreePoint([0, 1, 2])).unwrap();
            let ls = fit_circle(&pts, CircleFitMode::LeastSquares).unwrap();
            prop_assert!((three.radius - r).abs() < 1e-10 * r.max(1.0));
            prop_assert!((three.radius - ls.radius).abs() < 1e-10 * r.max(1.0));
            prop_assert!((three.center.0 - ls.center.0).abs() < 1e-10 * r.max(1.0));
        }
    }
}
