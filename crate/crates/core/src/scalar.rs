//! Scalar abstractions shared by the identification and inference code.
//!
//! Identification only needs ordered field arithmetic, so [`Scalar`] is
//! satisfied by exact rationals as well as floats. Anything that needs
//! logarithms, square roots or a link function asks for [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field element usable for population-level comparisons.
pub trait Scalar:
    Num + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

impl<T> Scalar for T where
    T: Num + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

/// Floating point scalar.
pub trait Real: Scalar + Float {}

impl<T> Real for T where T: Scalar + Float {}

#[inline]
pub fn half<T: Scalar>() -> T {
    T::one() / (T::one() + T::one())
}

/// `sign(x) = I{x >= 0} - I{x <= 0}`.
#[inline]
pub fn sign<T: Scalar>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// Sign with a dead zone: values within `tol` of zero map to 0.
#[inline]
pub fn sign_tol<T: Scalar>(x: T, tol: T) -> i8 {
    if x > tol {
        1
    } else if x < T::zero() - tol {
        -1
    } else {
        0
    }
}
