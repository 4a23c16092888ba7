//! Scalar abstraction for the numerical core.
//!
//! All quantities are computed over a generic floating-point scalar so the
//! same code instantiates at `f32` and `f64`. Concrete aliases live at the
//! crate root; `f64` is the default everywhere in the CLI.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every module of the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lifting an `f64` constant into the generic scalar.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("constant not representable in scalar type")
}
