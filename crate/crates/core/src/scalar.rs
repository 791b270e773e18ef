//! Scalar abstractions shared by every numerical module.
//!
//! Closed-form certificate quantities only need field arithmetic and an
//! ordering, so they are written against [`Field`] and can be evaluated
//! exactly over [`crate::Rational`]. Iterative code needs square roots and
//! exponentials and is written against [`Real`] (`f32` or `f64`).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field with conversion from primitive numbers.
pub trait Field: Clone + PartialOrd + Num + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T> Field for T where T: Clone + PartialOrd + Num + FromPrimitive + Debug + Send + Sync + 'static
{}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Field + Float + ToPrimitive + Sum + Display + LowerExp + Default {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the target scalar.
///
/// Exact for rationals and `f64`, correctly rounded for `f32`.
#[inline]
pub fn lit<T: Field>(x: f64) -> T {
    T::from_f64(x).expect("finite literal is representable")
}

/// Converts a count into the target scalar.
#[inline]
pub fn count<T: Field>(n: usize) -> T {
    T::from_usize(n).expect("count is representable")
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn min<T: Field>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn max<T: Field>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}
