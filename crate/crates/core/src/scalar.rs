//! Real scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Sum
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in every Real type")
}

/// Widens any `Real` into `f64` for diagnostics and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `1`-norm of a complex number (`|re| + |im|`); cheap magnitude proxy.
#[inline]
pub fn abs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Complex sign `z/|z|`, or `1` at the origin.
#[inline]
pub fn phase<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        z / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_of_zero_is_one() {
        assert_eq!(phase(Complex::new(0.0f64, 0.0)), Complex::new(1.0, 0.0));
        let p = phase(Complex::new(3.0f32, -4.0));
        assert!((p.norm() - 1.0).abs() < 1e-6);
        assert_eq!(abs1(Complex::new(-1.5f64, 2.0)), 3.5);
    }
}
