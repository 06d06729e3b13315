//! Exact ordered scalars used for polarizations and stability bounds.
//!
//! Every comparison in this crate that involves a polarization weight is
//! evaluated in exact arithmetic: the boundary values `k_Y / 2` are hit
//! routinely and the strict/non-strict distinction decides the verdict.
//! Floating point types are therefore not instances of [`ExactScalar`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact ordered field element with integer rounding.
pub trait ExactScalar:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Signed
    + Send
    + Sync
    + 'static
{
    fn from_int(n: i64) -> Self;

    /// `n / d`, `d != 0`.
    fn from_fraction(n: i64, d: i64) -> Self;

    /// Smallest integer `>= self`. Panics if it does not fit an `i64`.
    fn ceil_int(&self) -> i64;

    /// Largest integer `<= self`. Panics if it does not fit an `i64`.
    fn floor_int(&self) -> i64;

    fn is_integral(&self) -> bool;

    /// Parses `"n"` or `"n/d"` (optional surrounding whitespace, `d != 0`).
    fn parse_exact(s: &str) -> Option<Self>;

    /// Half of an integer, the recurring `k_Y / 2`.
    fn half_of(n: i64) -> Self {
        Self::from_fraction(n, 2)
    }
}

fn split_fraction(s: &str) -> Option<(&str, Option<&str>)> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => Some((n.trim(), Some(d.trim()))),
        None => Some((s, None)),
    }
}

macro_rules! impl_ratio_scalar {
    ($int:ty, $conv:expr, $to_i64:expr) => {
        impl ExactScalar for Ratio<$int> {
            fn from_int(n: i64) -> Self {
                Ratio::from_integer($conv(n))
            }

            fn from_fraction(n: i64, d: i64) -> Self {
                assert!(d != 0, "zero denominator");
                Ratio::new($conv(n), $conv(d))
            }

            fn ceil_int(&self) -> i64 {
                $to_i64(&self.ceil().to_integer())
            }

            fn floor_int(&self) -> i64 {
                $to_i64(&self.floor().to_integer())
            }

            fn is_integral(&self) -> bool {
                self.denom().is_one()
            }

            fn parse_exact(s: &str) -> Option<Self> {
                let (n, d) = split_fraction(s)?;
                let n: $int = n.parse().ok()?;
                let d: $int = match d {
                    Some(d) => d.parse().ok()?,
                    None => <$int>::one(),
                };
                if d.is_zero() {
                    return None;
                }
                Some(Ratio::new(n, d))
            }
        }
    };
}

impl_ratio_scalar!(i64, |n: i64| n, |v: &i64| *v);
impl_ratio_scalar!(i128, |n: i64| n as i128, |v: &i128| v
    .to_i64()
    .expect("integer part overflows i64"));
impl_ratio_scalar!(BigInt, BigInt::from, |v: &BigInt| v
    .to_i64()
    .expect("integer part overflows i64"));

/// `ceil(n / d)` for `d > 0`.
pub fn ceil_div(n: i64, d: i64) -> i64 {
    assert!(d > 0);
    Integer::div_ceil(&n, &d)
}
