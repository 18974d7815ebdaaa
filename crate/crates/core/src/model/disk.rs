use super::State;
use crate::error::ModelError;

/// Closed-form motion of the vertically rolling disk, coordinates
/// `(φ, θ, x, y)`: uniform rotation in both angles, the contact point
/// running on a circle of radius `R u_θ / u_φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSolution {
    pub u_phi: f64,
    pub u_theta: f64,
    pub phi0: f64,
    pub theta0: f64,
    /// Circle center.
    pub center: (f64, f64),
    /// Disk radius `R`.
    pub disk_radius: f64,
}

impl DiskSolution {
    /// Fit the closed form to the configuration and angular rates in `init`.
    /// The translational velocities of `init` are ignored; they follow from
    /// the rolling constraint.
    pub fn new(init: &State, disk_radius: f64) -> Result<Self, ModelError> {
        if init.q.len() != 4 || init.v.len() != 4 {
            return Err(ModelError::Dimension {
                expected: 4,
                got: init.q.len().min(init.v.len()),
            });
        }
        let (u_phi, u_theta) = (init.v[0], init.v[1]);
        if u_phi == 0.0 {
            return Err(ModelError::singular("u_phi", u_phi));
        }
        let (phi0, theta0) = (init.q[0], init.q[1]);
        let ratio = u_theta / u_phi * disk_radius;
        let center = (init.q[2] - ratio * phi0.sin(), init.q[3] + ratio * phi0.cos());
        Ok(DiskSolution {
            u_phi,
            u_theta,
            phi0,
            theta0,
            center,
            disk_radius,
        })
    }

    pub fn circle_radius(&self) -> f64 {
        (self.u_theta / self.u_phi * self.disk_radius).abs()
    }

    pub fn at(&self, t: f64) -> State {
        let phi = self.u_phi * t + self.phi0;
        let theta = self.u_theta * t + self.theta0;
        let ratio = self.u_theta / self.u_phi * self.disk_radius;
        let (s, c) = phi.sin_cos();
        State {
            q: vec![phi, theta, ratio * s + self.center.0, -ratio * c + self.center.1],
            v: vec![
                self.u_phi,
                self.u_theta,
                self.u_theta * self.disk_radius * c,
                self.u_theta * self.disk_radius * s,
            ],
        }
    }
}

/// Exact disk state at time `t` for unit disk radius.
pub fn exact_disk_solution(init: &State, t: f64) -> Result<State, ModelError> {
    let sol = DiskSolution::new(init, 1.0)?;
    if t == 0.0 {
        return Ok(State {
            q: init.q.clone(),
            v: sol.at(0.0).v,
        });
    }
    Ok(sol.at(t))
}
