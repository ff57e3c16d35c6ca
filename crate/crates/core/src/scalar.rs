//! Exact scalar abstraction.
//!
//! Every algorithm in this crate is generic over [`Scalar`], an exact ordered
//! field. The blanket implementation covers `num_rational::Ratio<T>` for any
//! signed integer type, so both arbitrary-precision [`BigRational`] and the
//! fixed-width `Ratio<i64>` work. Floating point types deliberately do not
//! implement the trait: they are neither exact nor totally ordered.
//!
//! [`BigRational`]: num_rational::BigRational

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Clone + Ord + Debug + Display + Num + Signed + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self;

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_int(numer) / Self::from_int(denom)
    }

    /// Smallest integer `>= self`.
    fn ceil_int(&self) -> Self;

    /// Largest integer `<= self`.
    fn floor_int(&self) -> Self;

    /// `floor(self)` as a machine integer, if it fits.
    fn floor_i64(&self) -> Option<i64>;

    /// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
    fn parse_exact(s: &str) -> Option<Self>;

    /// Lossy conversion used only for human-readable summaries.
    fn approx_f64(&self) -> f64;

    fn pow_i(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn two_pow_neg(k: u32) -> Self {
        Self::half().pow_i(k)
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Clone
        + Integer
        + Signed
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Debug
        + Display
        + Send
        + Sync
        + 'static,
{
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(T::from_i64(n).expect("integer fits the scalar type"))
    }

    fn ceil_int(&self) -> Self {
        self.ceil()
    }

    fn floor_int(&self) -> Self {
        self.floor()
    }

    fn floor_i64(&self) -> Option<i64> {
        self.floor().to_integer().to_i64()
    }

    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let numer = T::from_str(num).ok()?;
        let denom = match den {
            Some(d) => T::from_str(d).ok()?,
            None => T::one(),
        };
        if denom.is_zero() {
            return None;
        }
        Some(Ratio::new(numer, denom))
    }

    fn approx_f64(&self) -> f64 {
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    }
}
