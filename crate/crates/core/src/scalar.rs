use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, Num, NumCast};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumCast + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Always succeeds for the two float types.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("float literal")
    }

    fn from_count(k: usize) -> Self {
        Self::from_usize(k).expect("count fits in float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Anything with exact field arithmetic and an order. Blanket-implemented, so
/// `f64`, `f32` and `num_rational::Ratio<_>` all qualify.
pub trait Field: Num + Clone + PartialOrd + Debug {}

impl<T: Num + Clone + PartialOrd + Debug> Field for T {}

/// `k` as a field element, built by repeated addition so that rationals work.
pub(crate) fn count<T: Field>(k: usize) -> T {
    (0..k).fold(T::zero(), |acc, _| acc + T::one())
}

pub(crate) fn half<T: Field>() -> T {
    T::one() / (T::one() + T::one())
}
