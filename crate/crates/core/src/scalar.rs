//! Numeric abstractions shared by the evaluation and retrieval code.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// A field-like number usable for ratios of counts.
///
/// Implemented for `f32`, `f64` and `num_rational::Ratio<i64>`, which keeps
/// identities such as `recall + fnr = 1` exact.
pub trait Scalar: Num + Copy + PartialOrd + Debug + FromPrimitive {
    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count representable in scalar type")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// `numerator / denominator`, or `None` when the denominator is zero.
    fn ratio(numerator: u64, denominator: u64) -> Option<Self> {
        if denominator == 0 {
            None
        } else {
            Some(Self::from_count(numerator) / Self::from_count(denominator))
        }
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + Debug + FromPrimitive {}

/// Floating point scalars; needed wherever a square root is taken.
pub trait Real: Scalar + Float {}

impl<T> Real for T where T: Scalar + Float {}

/// Harmonic mean of two values; `None` when their sum is zero.
pub fn harmonic_mean<T: Scalar>(a: T, b: T) -> Option<T> {
    let sum = a + b;
    if sum == T::zero() {
        None
    } else {
        Some(T::two() * a * b / sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn ratio_of_zero_denominator_is_absent() {
        assert_eq!(<f64 as Scalar>::ratio(3, 0), None);
        assert_eq!(<Rational64 as Scalar>::ratio(2, 4), Some(Rational64::new(1, 2)));
    }

    #[test]
    fn harmonic_mean_matches_closed_form() {
        assert_eq!(harmonic_mean(0.5_f64, 0.5), Some(0.5));
        assert_eq!(harmonic_mean(0.0_f64, 0.0), None);
        assert_eq!(harmonic_mean(Rational64::new(1, 2), Rational64::new(2, 3)), Some(Rational64::new(4, 7)));
    }
}
