//! Forward-mode automatic differentiation.
//!
//! [`Dual<T>`] is generic over its component type, so nesting
//! (`Dual<Dual<f64>>`, ...) yields mixed higher derivatives. Every evaluator
//! in this crate is written against [`Scalar`] and can therefore be
//! differentiated as many times as the caller nests.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type accepted by the generic evaluators.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(x: f64) -> Self;

    /// Innermost real value.
    fn re(&self) -> f64;

    /// True when every component (value and all derivative parts) is finite.
    fn all_finite(&self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, c: f64) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Scalar for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn re(&self) -> f64 {
        *self
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, c: f64) -> Self {
        f64::powf(self, c)
    }
}

/// A number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    /// A variable seeded with unit tangent.
    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::one() }
    }

    pub fn lift(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let value = self.re * inv;
        Dual::new(value, (self.eps - value * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Dual::new(self.re + c, self.eps)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Dual::new(self.re - c, self.eps)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Dual::new(self.re * c, self.eps * c)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        Dual::new(self.re / c, self.eps / c)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(x: f64) -> Self {
        Dual::lift(T::constant(x))
    }

    fn re(&self) -> f64 {
        self.re.re()
    }

    fn all_finite(&self) -> bool {
        self.re.all_finite() && self.eps.all_finite()
    }

    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual::new(t, self.eps * (t * t + 1.0))
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s * 2.0))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(1.0);
        }
        Dual::new(self.re.powi(n), self.eps * self.re.powi(n - 1) * n as f64)
    }

    fn powf(self, c: f64) -> Self {
        Dual::new(self.re.powf(c), self.eps * self.re.powf(c - 1.0) * c)
    }
}

/// Lift a slice of values to constants one level up.
pub fn lift_all<T: Scalar>(xs: &[T]) -> Vec<Dual<T>> {
    xs.iter().map(|&x| Dual::lift(x)).collect()
}

/// Lift `xs` seeding the tangent with `direction`.
pub fn seed<T: Scalar>(xs: &[T], direction: &[T]) -> Vec<Dual<T>> {
    xs.iter()
        .zip(direction)
        .map(|(&x, &d)| Dual::new(x, d))
        .collect()
}

/// Lift `xs` with a unit tangent on coordinate `index`.
pub fn seed_axis<T: Scalar>(xs: &[T], index: usize) -> Vec<Dual<T>> {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| Dual::new(x, if i == index { T::one() } else { T::zero() }))
        .collect()
}

pub fn values<T: Scalar>(xs: &[Dual<T>]) -> Vec<T> {
    xs.iter().map(|x| x.re).collect()
}

pub fn tangents<T: Scalar>(xs: &[Dual<T>]) -> Vec<T> {
    xs.iter().map(|x| x.eps).collect()
}

/// Value and gradient of a scalar function, one forward pass per coordinate.
pub fn gradient<T, E, F>(f: F, x: &[T]) -> Result<(T, Vec<T>), E>
where
    T: Scalar,
    F: Fn(&[Dual<T>]) -> Result<Dual<T>, E>,
{
    let mut value = T::zero();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let out = f(&seed_axis(x, j))?;
        value = out.re;
        grad.push(out.eps);
    }
    if x.is_empty() {
        value = f(&[])?.re;
    }
    Ok((value, grad))
}

/// Value and Jacobian (row `i` = gradient of output `i`) of a vector function.
pub fn jacobian<T, E, F>(f: F, x: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>), E>
where
    T: Scalar,
    F: Fn(&[Dual<T>]) -> Result<Vec<Dual<T>>, E>,
{
    let mut value = Vec::new();
    let mut jac: Vec<Vec<T>> = Vec::new();
    for j in 0..x.len() {
        let out = f(&seed_axis(x, j))?;
        if j == 0 {
            value = values(&out);
            jac = vec![vec![T::zero(); x.len()]; out.len()];
        }
        for (i, o) in out.iter().enumerate() {
            jac[i][j] = o.eps;
        }
    }
    Ok((value, jac))
}

/// Hessian of a scalar function through hyper-dual seeding.
pub fn hessian<T, E, F>(f: F, x: &[T]) -> Result<Vec<Vec<T>>, E>
where
    T: Scalar,
    F: Fn(&[Dual<Dual<T>>]) -> Result<Dual<Dual<T>>, E>,
{
    let n = x.len();
    let mut out = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let point: Vec<Dual<Dual<T>>> = x
                .iter()
                .enumerate()
                .map(|(k, &xk)| {
                    let inner = if k == i { T::one() } else { T::zero() };
                    let outer = if k == j { T::one() } else { T::zero() };
                    Dual::new(Dual::new(xk, inner), Dual::lift(outer))
                })
                .collect();
            let d = f(&point)?.eps.eps;
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_and_jacobian_of_polynomials() {
        let f = |x: &[Dual<Dual<f64>>]| -> Result<_, ()> { Ok(x[0] * x[0] * x[1] + x[1].sin()) };
        let h = hessian(f, &[2.0, 0.5]).unwrap();
        assert_eq!(h[0][0], 1.0);
        assert_eq!(h[0][1], 4.0);
        assert_eq!(h[1][0], 4.0);
        assert!((h[1][1] + 0.5f64.sin()).abs() < 1e-15);

        let g = |x: &[Dual<f64>]| -> Result<_, ()> { Ok(vec![x[0] * x[1], x[0] - x[1]]) };
        let (v, j) = jacobian(g, &[3.0, 4.0]).unwrap();
        assert_eq!(v, vec![12.0, -1.0]);
        assert_eq!(j, vec![vec![4.0, 3.0], vec![1.0, -1.0]]);

        let s = |x: &[Dual<f64>]| -> Result<_, ()> { Ok(x[0].exp() * x[1]) };
        let (v, g) = gradient(s, &[0.0, 2.0]).unwrap();
        assert_eq!((v, g), (2.0, vec![2.0, 1.0]));
    }

    fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_derivatives_match_finite_differences() {
        let x = 0.7;
        let cases: Vec<(fn(Dual<f64>) -> Dual<f64>, fn(f64) -> f64)> = vec![
            (|d| d.sin(), f64::sin),
            (|d| d.cos(), f64::cos),
            (|d| d.tan(), f64::tan),
            (|d| d.sqrt(), f64::sqrt),
            (|d| d.exp(), f64::exp),
            (|d| d.ln(), f64::ln),
            (|d| d.powi(3), |x| x.powi(3)),
            (|d| d.powf(2.5), |x| x.powf(2.5)),
            (|d| d.recip(), |x| 1.0 / x),
        ];
        for (dual_fn, real_fn) in cases {
            let d = dual_fn(Dual::variable(x));
            assert!((d.re - real_fn(x)).abs() < 1e-15);
            assert!((d.eps - central(real_fn, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        // d²/dx² of x³ sin x
        let x = 1.3_f64;
        let xx = Dual::new(Dual::variable(x), Dual::constant(1.0));
        let y = xx.powi(3) * xx.sin();
        let exact = 6.0 * x * x.sin() + 6.0 * x * x * x.cos() - x.powi(3) * x.sin();
        assert!((y.eps.eps - exact).abs() < 1e-12);
        // both first-order slots agree
        assert!((y.eps.re - y.re.eps).abs() < 1e-14);
    }

    #[test]
    fn finiteness_checks_every_component() {
        let zero = Dual::variable(0.0_f64);
        assert!(!zero.sqrt().all_finite());
        assert!(Dual::variable(4.0_f64).sqrt().all_finite());
    }
}
