//! Classical fixed-step fourth-order Runge-Kutta.

use crate::scalar::Real;

/// State vectors that support `self + h * other`.
pub trait Axpy<T: Real>: Sized {
    fn axpy(&self, h: T, other: &Self) -> Self;
}

/// One classical RK4 step of `dy/dt = f(y)` for an autonomous system.
pub fn rk4_step<T, S, F>(y: &S, h: T, mut f: F) -> S
where
    T: Real,
    S: Axpy<T>,
    F: FnMut(&S) -> S,
{
    let half = h * T::lit(0.5);
    let k1 = f(y);
    let k2 = f(&y.axpy(half, &k1));
    let k3 = f(&y.axpy(half, &k2));
    let k4 = f(&y.axpy(h, &k3));
    let sixth = h / T::lit(6.0);
    let third = h / T::lit(3.0);
    y.axpy(sixth, &k1)
        .axpy(third, &k2)
        .axpy(third, &k3)
        .axpy(sixth, &k4)
}

impl<T: Real> Axpy<T> for Vec<num_complex::Complex<T>> {
    fn axpy(&self, h: T, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b * h).collect()
    }
}
