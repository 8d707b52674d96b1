//! Scalar abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating point type the numeric kernels are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Converts an integer into `T`.
#[inline(always)]
pub fn int<T: Real>(x: i128) -> T {
    T::from_i128(x).unwrap()
}

/// Lossy conversion back to `f64` for reports.
#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap()
}

/// Reduces `x` into `[0, 1)`.
#[inline(always)]
pub fn frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Distance between two points of the circle ℝ/ℤ.
#[inline(always)]
pub fn circle_dist<T: Real>(a: T, b: T) -> T {
    let f = frac(a - b);
    f.min(T::one() - f)
}

/// Machine epsilon scaled for "tight" numeric comparisons.
pub fn tiny<T: Real>() -> T {
    T::epsilon() * lit(64.0)
}
