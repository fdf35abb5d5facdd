//! Exact scalar types usable as costs, weights and dual labels.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed};

/// An exact, totally ordered signed number.
///
/// Every solver in this crate is generic over `Scalar`. Floating point types
/// are deliberately excluded (they are not `Ord`): optimality comparisons and
/// dual certificates are checked with `==`, never with a tolerance.
pub trait Scalar:
    Copy + Ord + Signed + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts a count (degree, quota) into the scalar domain.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Multiplies by a count without going through a conversion per term.
    fn times(self, n: usize) -> Self {
        self * Self::from_count(n)
    }
}

impl Scalar for i32 {}
impl Scalar for i64 {}
impl Scalar for i128 {}
impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

/// Minimum over an iterator of optional values, `None` meaning "unbounded".
pub(crate) fn min_finite<T: Scalar>(values: impl IntoIterator<Item = Option<T>>) -> Option<T> {
    values.into_iter().flatten().min()
}
