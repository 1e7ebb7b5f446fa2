//! Exact dyadic rationals `n / 2^k`.
//!
//! Every measure, tolerance and threshold in the crate is a [`Dyadic`], so no
//! comparison ever rounds. Values are kept normalized: the numerator is odd
//! unless it is zero, and zero always carries exponent 0. Structural equality
//! is therefore value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    exponent: u32,
}

impl Dyadic {
    /// Builds `numerator / 2^exponent` and normalizes it.
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut numerator = numerator.into();
        let mut exponent = exponent;
        if numerator.is_zero() {
            return Self::zero();
        }
        let twos = numerator
            .trailing_zeros()
            .map(|t| t.min(u64::from(exponent)) as u32)
            .unwrap_or(0);
        if twos > 0 {
            numerator >>= twos;
            exponent -= twos;
        }
        Dyadic {
            numerator,
            exponent,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            numerator: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic {
            numerator: BigInt::from(n),
            exponent: 0,
        }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic {
            numerator: BigInt::one(),
            exponent: k,
        }
    }

    /// `count / 2^depth`, the measure of `count` cylinders at level `depth`.
    pub fn from_count(count: u64, depth: u32) -> Self {
        Dyadic::new(count, depth)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.numerator.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    /// Multiplies by `2^shift` (shift may be negative).
    pub fn mul_pow2(&self, shift: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if shift >= 0 {
            let shift = shift as u64;
            let e = u64::from(self.exponent);
            if shift <= e {
                Dyadic::new(self.numerator.clone(), (e - shift) as u32)
            } else {
                Dyadic::new(&self.numerator << (shift - e), 0)
            }
        } else {
            let e = u64::from(self.exponent) + shift.unsigned_abs();
            let e = u32::try_from(e).expect("dyadic exponent overflow");
            Dyadic::new(self.numerator.clone(), e)
        }
    }

    pub fn half(&self) -> Self {
        self.mul_pow2(-1)
    }

    /// `floor(self * 2^shift)`.
    pub fn floor_scaled(&self, shift: u32) -> BigInt {
        let scaled = self.mul_pow2(i64::from(shift));
        let denom = BigInt::one() << scaled.exponent;
        scaled.numerator.div_floor(&denom)
    }

    /// `floor(self * 2^shift)` clamped into `i128`.
    ///
    /// An integer count `c` satisfies `c * 2^-shift > self` exactly when
    /// `c > floor_scaled_i128(shift)`.
    pub fn floor_scaled_i128(&self, shift: u32) -> i128 {
        let f = self.floor_scaled(shift);
        f.to_i128().unwrap_or(if f.is_negative() {
            i128::MIN
        } else {
            i128::MAX
        })
    }

    /// Largest power of two `2^j <= self` (self must be positive).
    pub fn floor_pow2(&self) -> Self {
        assert!(self.is_positive(), "floor_pow2 of non-positive dyadic");
        let bits = self.numerator.bits() as i64;
        Dyadic::one().mul_pow2(bits - 1 - i64::from(self.exponent))
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.exponent as i32)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        Dyadic::new(&self.numerator * &rhs.numerator, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -&self.numerator,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &'a Dyadic) -> Dyadic { (&self).$m(rhs) }
        }
        impl<'a> $tr<Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

/// Renders as `p/2^q`, the exchange format used in every file and report.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p/2^q`, `p/q` with `q` a power of two, or a bare integer `p`.
impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("not a dyadic rational: {s:?}"));
        let s = s.trim();
        let Some((num, den)) = s.split_once('/') else {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            return Ok(Dyadic::new(n, 0));
        };
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den = den.trim();
        let exponent = if let Some(q) = den.strip_prefix("2^") {
            q.parse::<u32>().map_err(|_| bad())?
        } else {
            let d: u128 = den.parse().map_err(|_| bad())?;
            if d == 0 || !d.is_power_of_two() {
                return Err(bad());
            }
            d.trailing_zeros()
        };
        Ok(Dyadic::new(num, exponent))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
