//! Numeric back ends for propensities and generators: `f64` for simulation,
//! `BigRational` for exact comparisons.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scheme::Rate;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rate(rate: &Rate) -> Self;

    fn from_count(n: u64) -> Self;

    /// Number of ordered selections of `take` items out of `count`,
    /// `count!/(count − take)!`; zero when `take > count`.
    fn arrangements(count: u64, take: u32) -> Self {
        let take = u64::from(take);
        if take > count {
            return Self::zero();
        }
        (0..take).fold(Self::one(), |acc, j| acc * Self::from_count(count - j))
    }
}

impl Scalar for f64 {
    fn from_rate(rate: &Rate) -> Self {
        rate.to_f64()
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }

    /// Integer product first, converted once; falls back to floating
    /// multiplication only past `u128`.
    fn arrangements(count: u64, take: u32) -> Self {
        match falling_factorial_u128(count, take) {
            Some(Some(v)) => v as f64,
            Some(None) => (0..u64::from(take)).fold(1.0, |acc, j| acc * (count - j) as f64),
            None => 0.0,
        }
    }
}

impl Scalar for BigRational {
    fn from_rate(rate: &Rate) -> Self {
        rate.value().clone()
    }

    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// `None` when `take > count`, `Some(None)` on overflow.
pub(crate) fn falling_factorial_u128(count: u64, take: u32) -> Option<Option<u128>> {
    let take = u64::from(take);
    if take > count {
        return None;
    }
    let mut acc: u128 = 1;
    for j in 0..take {
        match acc.checked_mul(u128::from(count - j)) {
            Some(v) => acc = v,
            None => return Some(None),
        }
    }
    Some(Some(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrangements_agree_across_backends() {
        for count in 0..12u64 {
            for take in 0..5u32 {
                let exact = <BigRational as Scalar>::arrangements(count, take);
                let float = <f64 as Scalar>::arrangements(count, take);
                assert_eq!(BigRational::from_float(float).unwrap(), exact);
            }
        }
        assert_eq!(<f64 as Scalar>::arrangements(4, 2), 12.0);
        assert_eq!(<f64 as Scalar>::arrangements(1, 2), 0.0);
        assert_eq!(<f64 as Scalar>::arrangements(0, 0), 1.0);
    }

    #[test]
    fn large_arrangements_fall_back_to_float() {
        let v = <f64 as Scalar>::arrangements(100_000, 16);
        assert!(v.is_finite() && v > 1e79);
    }
}
