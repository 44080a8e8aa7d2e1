//! Scalar abstractions.
//!
//! Two tiers are used throughout the crate:
//!
//! * [`Scalar`] is anything we can do exact coefficient algebra with: `f32`,
//!   `f64` and `Rational64`. Trig-polynomial arithmetic, extraction of the
//!   perturbation matrices and the closed-form asymptotic coefficients only
//!   need this.
//! * [`Real`] adds the floating-point surface (`sqrt`, `cos`, epsilon) needed
//!   for quadrature, pointwise frame inversion and the Hermitian eigensolve.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Exact-arithmetic capable scalar field element.
pub trait Scalar:
    Num + Clone + Neg<Output = Self> + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num + Clone + Neg<Output = T> + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating point scalar, implemented for `f32` and `f64`.
pub trait Real:
    Scalar
    + Float
    + FloatConst
    + Copy
    + Display
    + LowerExp
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Rescales an `f64` tolerance to this type's precision.
    ///
    /// For `f64` this is the identity; for `f32` the tolerance grows by the
    /// ratio of the two machine epsilons.
    fn tol(base: f64) -> Self {
        let ratio = Self::epsilon().to_f64().unwrap_or(f64::EPSILON) / f64::EPSILON;
        Self::from_f64(base * ratio).expect("tolerance representable")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn int<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}

pub(crate) fn ratio<T: Scalar>(num: i64, den: i64) -> T {
    int::<T>(num) / int::<T>(den)
}

pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cre<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// The imaginary unit.
pub(crate) fn ci<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn tolerance_scaling() {
        assert_eq!(f64::tol(1e-12), 1e-12);
        let t = f32::tol(1e-12);
        assert!(t > 1e-5 && t < 1e-3, "{t}");
    }

    #[test]
    fn rational_literals_are_exact() {
        let q: Rational64 = ratio(3, 4);
        assert_eq!(q, Rational64::new(3, 4));
        assert_eq!(int::<Rational64>(-2), Rational64::from_integer(-2));
    }
}
