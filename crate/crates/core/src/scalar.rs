//! Floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is unrepresentable,
    /// which cannot happen for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Index or count as a scalar.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `sign(s) |s|^e`, continuous at zero for `e > 0`.
#[inline]
pub(crate) fn signed_pow<T: Scalar>(s: T, e: T) -> T {
    if s == T::zero() {
        T::zero()
    } else {
        s.signum() * s.abs().powf(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_pow_is_odd_and_zero_safe() {
        assert_eq!(signed_pow(0.0_f64, 0.5), 0.0);
        assert_eq!(signed_pow(-4.0_f64, 0.5), -2.0);
        assert_eq!(signed_pow(4.0_f32, 0.5), 2.0);
    }
}
