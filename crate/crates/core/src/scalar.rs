//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar, implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used in this crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let mut r = x % tau;
    if r < T::zero() {
        r += tau;
    }
    // `x % tau` can round up to exactly tau for tiny negative inputs.
    if r >= tau {
        r -= tau;
    }
    r
}

/// Binomial coefficient `n choose k` as a scalar, by the multiplicative formula.
pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_u32(n - i).unwrap() / T::from_u32(i + 1).unwrap();
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        let tau = std::f64::consts::TAU;
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!((wrap_angle(-std::f64::consts::FRAC_PI_2) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((wrap_angle(7.0_f64) - (7.0 - tau)).abs() < 1e-15);
        let tiny = wrap_angle(-1e-300_f64);
        assert!((0.0..tau).contains(&tiny));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial::<f64>(10, 5), 252.0);
        assert_eq!(binomial::<f64>(20, 9), 167_960.0);
        assert_eq!(binomial::<f32>(6, 0), 1.0);
        assert_eq!(binomial::<f64>(3, 4), 0.0);
    }
}
