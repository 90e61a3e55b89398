//! Polynomials in an infinitesimal `ε > 0`.
//!
//! A value `c₀ + c₁ε + … + c_Dε^D` is compared with zero lexicographically on
//! its coefficient vector: the first nonzero coefficient decides the sign for
//! every sufficiently small `ε`.

use std::fmt;

use crate::error::{Result, TubeError};
use crate::scalar::{Scalar, Sign, SignTolerance};

#[derive(Clone, Debug, PartialEq)]
pub struct EpsPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> EpsPoly<S> {
    /// The zero polynomial with degree bound `degree`.
    pub fn zero(degree: usize) -> Self {
        EpsPoly {
            coeffs: vec![S::zero(); degree + 1],
        }
    }

    /// `constant + ε^power`.
    pub fn shifted_constant(degree: usize, constant: S, power: usize) -> Self {
        let mut p = Self::zero(degree);
        p.coeffs[0] = constant;
        p.coeffs[power] += &S::one();
        p
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "an EpsPoly has at least one coefficient"
        );
        EpsPoly { coeffs }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Sign of the first coefficient whose sign is nonzero under `tol`.
    pub fn sign(&self, tol: SignTolerance) -> Sign {
        self.coeffs
            .iter()
            .map(|c| c.sign_tol(tol))
            .find(|&s| s != Sign::Zero)
            .unwrap_or(Sign::Zero)
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(TubeError::DegreeMismatch(
                self.degree_bound(),
                other.degree_bound(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &S) -> Self {
        EpsPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        }
    }

    /// `self += alpha * x`, in place.
    pub fn axpy(&mut self, alpha: &S, x: &Self) -> Result<()> {
        self.check_degree(x)?;
        if alpha.is_zero() {
            return Ok(());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&x.coeffs) {
            if !b.is_zero() {
                *a += &(alpha.clone() * b.clone());
            }
        }
        Ok(())
    }

    pub fn negate(&mut self) {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
    }

    /// Real value at a concrete `ε`, by Horner's rule.
    pub fn eval(&self, eps: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * eps.clone() + c.clone())
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for EpsPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
