//! Hamiltonization and discrete integration of nonholonomic systems with
//! Lagrangian `½(I1 ṙ1² + I2 ṙ2² + Σ I_α ṡ_α²)` and constraints
//! `ṡ_α = −A_α(r1) ṙ2`.
//!
//! * [`model`]: the system class, associated second-order systems and the
//!   closed-form rolling-disk motion.
//! * [`lagrangians`]: free Lagrangians, Legendre transform and Hamiltonians.
//! * [`helmholtz`]: numerical checks of the Helmholtz conditions.
//! * [`integrators`]: nonholonomic, variational and modified discrete steppers.
//! * [`diagnostics`]: reference integration, energy/constraint series, circle
//!   fits and error metrics.

pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod expression;
pub mod helmholtz;
pub mod integrators;
pub mod lagrangians;
pub mod model;

pub use error::ModelError;
