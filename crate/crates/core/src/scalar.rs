//! Scalar types the pivoting and elimination code is generic over.
//!
//! Two backends are provided: `f64`, where every sign decision is taken
//! against a [`SignTolerance`], and [`Rational`] (arbitrary precision), where
//! sign decisions are exact and the tolerance is ignored.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Threshold below which a floating-point magnitude is treated as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTolerance(f64);

impl SignTolerance {
    pub const DEFAULT: SignTolerance = SignTolerance(1e-14);

    /// Returns `None` unless `eps_tol` is strictly positive and finite.
    pub fn new(eps_tol: f64) -> Option<Self> {
        (eps_tol > 0.0 && eps_tol.is_finite()).then_some(SignTolerance(eps_tol))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SignTolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Three-valued sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Field element usable as a tableau entry.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + num_traits::Num
    + Signed
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
{
    /// Lifts a finite `f64` into the scalar type without rounding.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Sign of `self`, treating magnitudes `<= tol` as zero for inexact types.
    fn sign_tol(&self, tol: SignTolerance) -> Sign;

    /// Whether sign decisions are exact (tolerance ignored).
    fn is_exact() -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn sign_tol(&self, tol: SignTolerance) -> Sign {
        if *self > tol.0 {
            Sign::Positive
        } else if *self < -tol.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sign_tol(&self, _tol: SignTolerance) -> Sign {
        if self.is_positive() {
            Sign::Positive
        } else if self.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn is_exact() -> bool {
        true
    }
}

/// Exact rational from an integer numerator and denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational from an integer.
pub fn int(x: i64) -> Rational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact sign of a rational.
pub fn exact_sign(x: &Rational) -> Sign {
    x.sign_tol(SignTolerance::DEFAULT)
}
