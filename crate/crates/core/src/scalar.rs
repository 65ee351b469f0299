//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the library is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used when a routine must decide whether a computed
    /// quantity is "numerically zero": `sqrt(machine epsilon)`.
    #[inline]
    fn default_tolerance() -> Self {
        Self::epsilon().sqrt()
    }

    /// Threshold, relative to the largest eigenvalue, below which an
    /// eigenvalue is treated as zero in spectral embeddings.
    #[inline]
    fn spectral_cutoff() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(10.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
