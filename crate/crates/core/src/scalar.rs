//! Scalar abstraction for the numerical kernels.
//!
//! Everything float-valued in this crate is generic over [`Real`], which is
//! satisfied by `f32` and `f64`. The arithmetic module is the exception: it
//! works in exact big-integer/rational arithmetic because torus norms
//! `||q_n omega||` fall below float resolution as soon as `q_n` is large.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used by the numerical kernels (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert")
    }

    /// Shorthand for converting a `usize` count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert")
    }

    /// 2*pi.
    fn tau() -> Self {
        Self::PI() + Self::PI()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + RemAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<R> = num_complex::Complex<R>;

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn torus_norm<R: Real>(x: R) -> R {
    let frac = x - x.round();
    frac.abs()
}
