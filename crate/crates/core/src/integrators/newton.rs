use nalgebra::{DMatrix, DVector};

use super::IntegratorError;
use crate::dual::{jacobian, lift_all, values, Dual};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Convergence threshold on the max-norm of the residual.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tol: 1e-10,
            max_iterations: 50,
            max_halvings: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// A correction this small relative to the iterate cannot be resolved in
/// floating point; the residual then sits at its round-off floor.
fn negligible(dx: &DVector<f64>, x: &[f64]) -> bool {
    dx.iter().zip(x).all(|(d, xi)| d.abs() <= 4.0 * f64::EPSILON * xi.abs().max(1.0))
}

pub(crate) fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Damped Newton iteration for `F(x) = 0`; the Jacobian comes from one
/// dual-number pass per unknown. A trial step is halved until the residual
/// decreases and evaluates without a domain error. Iteration also stops,
/// reporting the residual reached, once the correction drops below machine
/// resolution of the iterate.
pub fn newton_solve<F>(f: F, x0: Vec<f64>, settings: &NewtonSettings) -> Result<NewtonOutcome, IntegratorError>
where
    F: Fn(&[Dual<f64>]) -> Result<Vec<Dual<f64>>, ModelError>,
{
    let eval = |x: &[f64]| -> Result<Vec<f64>, ModelError> { Ok(values(&f(&lift_all(x))?)) };
    let mut x = x0;
    let mut r = eval(&x)?;
    let mut norm = max_abs(&r);
    for iteration in 0..settings.max_iterations {
        if norm < settings.tol {
            return Ok(NewtonOutcome {
                x,
                iterations: iteration,
                residual: norm,
            });
        }
        if !norm.is_finite() {
            break;
        }
        let (_, jac) = jacobian(&f, &x)?;
        let n = x.len();
        let jm = DMatrix::from_fn(jac.len(), n, |i, j| jac[i][j]);
        let rhs = -DVector::from_column_slice(&r);
        let dx = jm.lu().solve(&rhs).ok_or(IntegratorError::SingularJacobian { iteration })?;
        if negligible(&dx, &x) {
            return Ok(NewtonOutcome {
                x,
                iterations: iteration,
                residual: norm,
            });
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + t * d).collect();
            if let Ok(rt) = eval(&trial) {
                let nt = max_abs(&rt);
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xt, rt, nt)) => {
                x = xt;
                r = rt;
                norm = nt;
            }
            None => {
                return Err(IntegratorError::NewtonDivergence {
                    iterations: iteration + 1,
                    residual: norm,
                })
            }
        }
    }
    if norm < settings.tol {
        return Ok(NewtonOutcome {
            x,
            iterations: settings.max_iterations,
            residual: norm,
        });
    }
    Err(IntegratorError::NewtonDivergence {
        iterations: settings.max_iterations,
        residual: norm,
    })
}

/// Newton iteration for `F(r, s) = 0` split after the first `split`
/// unknowns: for every trial `r` the trailing equations `F_s(r, ·) = 0` are
/// solved for `s` first, and the step in `r` uses the Schur complement
/// `J_rr − J_rs J_ss⁻¹ J_sr` of the Jacobian.
pub fn partitioned_newton_solve<F>(f: F, x0: Vec<f64>, split: usize, settings: &NewtonSettings) -> Result<NewtonOutcome, IntegratorError>
where
    F: Fn(&[Dual<f64>]) -> Result<Vec<Dual<f64>>, ModelError>,
{
    let n = x0.len();
    if split == 0 || split >= n {
        return newton_solve(f, x0, settings);
    }
    let solve_tail = |r: &[f64], s0: Vec<f64>| -> Result<Vec<f64>, IntegratorError> {
        let head = lift_all(r);
        let out = newton_solve(
            |tail: &[Dual<f64>]| {
                let mut x = head.clone();
                x.extend_from_slice(tail);
                Ok(f(&x)?[split..].to_vec())
            },
            s0,
            settings,
        )?;
        Ok(out.x)
    };
    let join = |r: &[f64], s: &[f64]| -> Vec<f64> { r.iter().chain(s).copied().collect() };

    let mut r = x0[..split].to_vec();
    let mut s = solve_tail(&r, x0[split..].to_vec())?;
    let mut iterations = 0;
    loop {
        let (value, jac) = jacobian(&f, &join(&r, &s))?;
        let norm = max_abs(&value);
        if norm < settings.tol {
            return Ok(NewtonOutcome {
                x: join(&r, &s),
                iterations,
                residual: norm,
            });
        }
        if iterations == settings.max_iterations || !norm.is_finite() {
            return Err(IntegratorError::NewtonDivergence { iterations, residual: norm });
        }
        let jm = DMatrix::from_fn(n, n, |i, j| jac[i][j]);
        let j_rr = jm.view((0, 0), (split, split));
        let j_rs = jm.view((0, split), (split, n - split));
        let j_sr = jm.view((split, 0), (n - split, split));
        let lu_ss = jm.view((split, split), (n - split, n - split)).clone_owned().lu();
        let ds_dr = lu_ss
            .solve(&j_sr.clone_owned())
            .ok_or(IntegratorError::SingularJacobian { iteration: iterations })?;
        let schur = j_rr - j_rs * &ds_dr;
        let f_r = DVector::from_column_slice(&value[..split]);
        let dr = schur
            .lu()
            .solve(&-f_r)
            .ok_or(IntegratorError::SingularJacobian { iteration: iterations })?;
        if negligible(&dr, &r) {
            return Ok(NewtonOutcome {
                x: join(&r, &s),
                iterations,
                residual: norm,
            });
        }
        let ds = -(&ds_dr * &dr);
        let reduced_norm = max_abs(&value[..split]);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let r_t: Vec<f64> = r.iter().zip(dr.iter()).map(|(a, d)| a + t * d).collect();
            let s_guess: Vec<f64> = s.iter().zip(ds.iter()).map(|(a, d)| a + t * d).collect();
            if let Ok(s_t) = solve_tail(&r_t, s_guess) {
                if let Ok(v) = f(&lift_all(&join(&r_t, &s_t))) {
                    let nt = max_abs(&values(&v)[..split]);
                    if nt < reduced_norm || nt < settings.tol {
                        accepted = Some((r_t, s_t));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((r_t, s_t)) => {
                r = r_t;
                s = s_t;
            }
            None => return Err(IntegratorError::NewtonDivergence { iterations, residual: norm }),
        }
    }
}
