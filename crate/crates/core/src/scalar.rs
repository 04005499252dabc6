//! Numeric abstraction shared by the statistics code.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A signed number type the statistics routines can run on.
///
/// Implemented for `f32`, `f64`, [`rust_decimal::Decimal`] and
/// [`num_rational::BigRational`]. Only ring operations and division are
/// required, so quartiles and normalization are exact on the decimal and
/// rational types.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display
{
    /// `numerator / denominator` as a scalar.
    fn ratio(numerator: u64, denominator: u64) -> Self {
        let n = Self::from_u64(numerator).expect("u64 is representable");
        let d = Self::from_u64(denominator).expect("u64 is representable");
        n / d
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display
{
}
