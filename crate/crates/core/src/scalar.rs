//! Scalar abstractions.
//!
//! Statistical code (gamma fits, posteriors, the channel simulator) is written
//! against [`Real`], which covers `f32` and `f64`. Guess-curve arithmetic only
//! needs field operations on ratios of counts, so it is written against
//! [`Fraction`], which additionally admits exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`. Constants in this crate are always
    /// representable, so this never fails for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A number that can represent `numerator / denominator` for counts.
pub trait Fraction: Num + Clone + PartialOrd + Debug {
    fn from_ratio(numerator: u64, denominator: u64) -> Self;
}

impl Fraction for f32 {
    fn from_ratio(numerator: u64, denominator: u64) -> Self {
        (numerator as f64 / denominator as f64) as f32
    }
}

impl Fraction for f64 {
    fn from_ratio(numerator: u64, denominator: u64) -> Self {
        numerator as f64 / denominator as f64
    }
}

impl Fraction for Ratio<u64> {
    fn from_ratio(numerator: u64, denominator: u64) -> Self {
        Ratio::new(numerator, denominator)
    }
}

impl Fraction for Ratio<i64> {
    fn from_ratio(numerator: u64, denominator: u64) -> Self {
        Ratio::new(numerator as i64, denominator as i64)
    }
}

/// Numerically stable `ln(Σ exp(x_i))`. Returns `-inf` for an empty slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum: T = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}
