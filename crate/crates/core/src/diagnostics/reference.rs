use super::DiagnosticsError;
use crate::error::ModelError;
use crate::model::{first_order_rhs, SecondOrderField, State, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSettings {
    /// Local error tolerance, used as both absolute and relative tolerance.
    pub tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        ReferenceSettings {
            tol: 1e-12,
            initial_step: 1e-3,
            min_step: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: `(y_new, scaled error norm)`.
fn dp_step<F>(rhs: &F, y: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, f64), ModelError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, ModelError>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut ys = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..n {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k.push(rhs(&ys)?);
    }
    let mut y5 = y.to_vec();
    let mut err: f64 = 0.0;
    for i in 0..n {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = tol + tol * y[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    Ok((y5, err))
}

/// Integrates the autonomous system `y' = rhs(y)` from `y(t_grid[0]) = y0`
/// with an adaptive Dormand–Prince 5(4) pair, landing exactly on every grid
/// time. Returns one state per grid time.
pub fn reference_trajectory<F>(rhs: F, y0: &[f64], t_grid: &[f64], settings: &ReferenceSettings) -> Result<Vec<Vec<f64>>, DiagnosticsError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, ModelError>,
{
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DiagnosticsError::InvalidInput("time grid must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0.to_vec());
    let mut y = y0.to_vec();
    let mut t = t_grid[0];
    let mut h = settings.initial_step;
    let mut steps = 0;
    for &target in &t_grid[1..] {
        while t < target {
            steps += 1;
            if steps > settings.max_steps {
                return Err(DiagnosticsError::TooManySteps { t, max_steps: settings.max_steps });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (y_new, err) = match dp_step(&rhs, &y, step, settings.tol) {
                Ok(r) => r,
                Err(_) => (Vec::new(), f64::INFINITY),
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // keep the pre-clamp step size for the next interval
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < settings.min_step {
                return Err(DiagnosticsError::StepUnderflow { t, h });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Configurations of the nonholonomic motion from `init` at the grid times
/// (`init` is taken at `t_grid[0]`).
pub fn nonholonomic_reference(system: &SystemSpec, init: &State, t_grid: &[f64], settings: &ReferenceSettings) -> Result<Vec<Vec<f64>>, DiagnosticsError> {
    let n = system.dim();
    let y0 = system.reduce(init);
    let ys = reference_trajectory(|y| system.nonholonomic_field(y), &y0, t_grid, settings)?;
    Ok(ys.into_iter().map(|y| y[..n].to_vec()).collect())
}

/// Positions and velocities of a second-order system at the grid times.
pub fn sode_reference<F: SecondOrderField>(field: &F, init: &State, t_grid: &[f64], settings: &ReferenceSettings) -> Result<Vec<State>, DiagnosticsError> {
    let n = field.dim();
    let mut y0 = init.q.clone();
    y0.extend_from_slice(&init.v);
    let ys = reference_trajectory(|y| first_order_rhs(field, y), &y0, t_grid, settings)?;
    Ok(ys.into_iter().map(|y| State::new(y[..n].to_vec(), y[n..].to_vec())).collect())
}
