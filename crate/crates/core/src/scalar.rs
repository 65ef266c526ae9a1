//! Floating-point scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the spectral, Gaussian and Lévy kernels are written against.
///
/// Implemented for `f32` and `f64`. Tolerances below the type's resolution are
/// clamped (see [`Scalar::clamp_tol`]).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
    /// Convert an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Convert to `f64` for reporting and I/O.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest relative tolerance that makes sense for this type.
    #[inline]
    fn clamp_tol(tol: Self) -> Self {
        tol.max(Self::epsilon() * Self::lit(64.0))
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}
