//! Scalar abstraction for the deterministic ensemble machinery.
//!
//! Everything that does not draw random numbers (quantiles, ranks, losses,
//! estimators, regrets) is generic over [`Real`], so the same code runs on
//! `f32` and `f64`. The samplers and simulators work in `f64`.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Display + 'static {
    /// Lossless conversion from a small integer count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `1/2`, used by rank percentiles and unweighted rules.
    fn half() -> Self {
        Self::from_f64(0.5).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Total-order comparison for finite floats.
///
/// All ensemble types validate finiteness on construction, so `partial_cmp`
/// cannot fail on their contents.
pub(crate) fn cmp_finite<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("finite values compare totally")
}

/// Arithmetic mean of a non-empty slice.
pub(crate) fn mean<T: Real>(values: &[T]) -> T {
    debug_assert!(!values.is_empty());
    let mut acc = T::zero();
    for &v in values {
        acc += v;
    }
    acc / T::from_count(values.len())
}

/// Population variance (denominator `n`), consistent with the Monte Carlo
/// expectations used throughout the crate.
pub(crate) fn population_variance<T: Real>(values: &[T]) -> T {
    let m = mean(values);
    let mut acc = T::zero();
    for &v in values {
        let d = v - m;
        acc += d * d;
    }
    acc / T::from_count(values.len())
}
