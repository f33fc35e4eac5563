//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Scalar`] (in practice `f32` or `f64`).

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssignOps
    + FromPrimitive
    + ToPrimitive
    + Sum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics only on values outside the type's range.
    fn real(value: f64) -> Self {
        Self::from_f64(value).expect("f64 value representable in scalar type")
    }

    /// Conversion from a small integer count.
    fn count(value: usize) -> Self {
        Self::from_usize(value).expect("usize value representable in scalar type")
    }

    /// Widening conversion to `f64` for formatting and special functions.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + NumAssignOps
        + FromPrimitive
        + ToPrimitive
        + Sum
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_roundtrip() {
        let x: f64 = Scalar::real(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = Scalar::real(0.25);
        assert_eq!(y, 0.25f32);
    }

    #[test]
    fn count_conversion() {
        let n: f64 = Scalar::count(441);
        assert_eq!(n, 441.0);
    }
}
