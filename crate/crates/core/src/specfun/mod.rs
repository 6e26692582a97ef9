//! Special functions: `J_ν` for complex argument, its positive zeros, and
//! associated Laguerre polynomials.

mod bessel;
mod dd;
mod laguerre;
mod roots;

use num_complex::Complex64;
use thiserror::Error;

pub use bessel::{bessel_j, bessel_j_prime, bessel_j_with, BesselMethod, Branch, MAX_ARGUMENT, SERIES_CROSSOVER};
pub use laguerre::{laguerre, laguerre_prime, laguerre_second};
pub use roots::{bessel_roots, RootTable, MAX_ROOT_COUNT, ROOT_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("Bessel order must be finite and >= 0, got {0}")]
    InvalidOrder(f64),
    #[error("argument {0} is not finite")]
    NonFiniteArgument(Complex64),
    #[error("argument {0} lies on the branch cut of z^nu")]
    BranchCut(Complex64),
    #[error("|z| = {0} exceeds the supported range")]
    OutOfRange(f64),
    #[error("order {0} is not a half-integer")]
    NotHalfInteger(f64),
    #[error("root count {0} outside 1..=1000")]
    RootCount(usize),
    #[error("root refinement failed to converge in [{lo}, {hi}]")]
    RootConvergence { lo: f64, hi: f64 },
}

/// Order ν of `J_ν`, finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, SpecFunError> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(BesselOrder(nu))
        } else {
            Err(SpecFunError::InvalidOrder(nu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.fract() == 0.0
    }

    /// `Some(n)` when ν = n + ½.
    pub fn half_integer_index(self) -> Option<u32> {
        let shifted = self.0 - 0.5;
        if shifted >= 0.0 && shifted.fract() == 0.0 && shifted < u32::MAX as f64 {
            Some(shifted as u32)
        } else {
            None
        }
    }

    pub(crate) fn raised(self, by: u32) -> Self {
        BesselOrder(self.0 + by as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_validation() {
        assert!(BesselOrder::new(-0.1).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        assert_eq!(BesselOrder::new(2.5).unwrap().half_integer_index(), Some(2));
        assert_eq!(BesselOrder::new(2.0).unwrap().half_integer_index(), None);
    }
}
