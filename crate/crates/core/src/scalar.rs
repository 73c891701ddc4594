//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is a
//! thin bundle of `num-traits` bounds satisfied by `f32` and `f64`. Concrete
//! aliases for the common double-precision instantiations live at the crate
//! root.

use core::fmt;
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar type the core is generic over.
///
/// Implemented for `f32` and `f64` via the blanket impl below; no methods
/// need to be provided by hand.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when checking that a probability table sums to one:
    /// 1e-9 where the precision allows it, a small multiple of machine
    /// epsilon otherwise (an f32 four-term sum cannot hit 1e-9).
    fn simplex_tolerance() -> Self {
        let fixed = Self::from_f64(1e-9).unwrap_or_else(Self::epsilon);
        let scaled = Self::epsilon() * Self::from_u8(32).unwrap_or_else(Self::one);
        fixed.max(scaled)
    }

    /// Exact conversion of a small count. Panics only if the count exceeds
    /// what the mantissa can hold, which no supported batch size does.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_tolerance_matches_precision() {
        assert_eq!(<f64 as Scalar>::simplex_tolerance(), 1e-9);
        // For f32 the epsilon-scaled bound wins.
        assert!(<f32 as Scalar>::simplex_tolerance() > 1e-9);
        assert!(<f32 as Scalar>::simplex_tolerance() < 1e-5);
    }

    #[test]
    fn from_count_is_exact_for_batch_sizes() {
        assert_eq!(<f32 as Scalar>::from_count(16_384), 16_384.0f32);
        assert_eq!(<f64 as Scalar>::from_count(1_000_000), 1_000_000.0f64);
    }
}
