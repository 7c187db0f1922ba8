//! Field abstraction so the moment machinery can run either in exact
//! rationals (scalar coefficient models, rational aspect ratio) or in f64
//! (matrix coefficient models).

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar used throughout the exact evaluation paths.
///
/// `i128` components keep partition-weighted sums fast; release builds carry
/// `overflow-checks = true` so an overflow panics instead of wrapping.
pub type Rat = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rat {
    Ratio::new(n, d)
}

pub fn rat_int(n: i128) -> Rat {
    Ratio::from_integer(n)
}

/// Scalar field for moment evaluation. Implemented for [`Rat`] and `f64`.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// True when arithmetic is exact (equality comparisons are meaningful).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(r: &Rat) -> Self {
        *r
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Binomial coefficient as an exact rational (panics on negative input).
pub fn binomial(n: u64, k: u64) -> Rat {
    if k > n {
        return rat_int(0);
    }
    let k = k.min(n - k);
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..k {
        num *= (n - i) as i128;
        den *= (i + 1) as i128;
        let g = num_integer::gcd(num, den);
        num /= g;
        den /= g;
    }
    rat(num, den)
}

/// n-th Catalan number C(2n, n)/(n+1).
pub fn catalan(n: u64) -> u128 {
    let b = binomial(2 * n, n) / rat_int((n + 1) as i128);
    debug_assert!(b.is_integer());
    b.to_integer() as u128
}
