use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable by every numerical routine in the crate.
///
/// Both `nalgebra`'s field trait (for the SVD backend) and `num_traits::Float`
/// (for the elementwise maths) are required; `f32` and `f64` satisfy both.
pub trait Scalar:
    RealField + Float + FromPrimitive + ToPrimitive + Copy + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }
}

impl<T> Scalar for T where
    T: RealField
        + Float
        + FromPrimitive
        + ToPrimitive
        + Copy
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
