//! Floating point scalar abstraction.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Real scalar the library is generic over: `f32` or `f64`.
///
/// The double precision contracts quoted in the documentation (tolerances of
/// the order `1e-10` and below) are only meaningful for `f64`; `f32` is
/// supported for the algebra but not for the tight tolerances.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossless conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Complex unit `i` over this scalar.
    fn i() -> Complex<Self> {
        Complex::new(Self::zero(), Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for promoting a real scalar to a complex one.
pub(crate) fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
