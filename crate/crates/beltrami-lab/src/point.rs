//! Points of the extended complex plane.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::num::Real;

/// A point of the extended plane: either a finite complex number or ∞.
///
/// ∞ compares equal only to itself; finite points compare by coordinates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ComplexPoint<R> {
    Finite(Complex<R>),
    Infinity,
}

impl<R: Real> ComplexPoint<R> {
    pub fn new(re: R, im: R) -> Self {
        ComplexPoint::Finite(Complex::new(re, im))
    }

    pub fn zero() -> Self {
        ComplexPoint::Finite(Complex::new(R::zero(), R::zero()))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ComplexPoint::Infinity)
    }

    /// The finite value, or `None` at ∞.
    pub fn finite(&self) -> Option<Complex<R>> {
        match self {
            ComplexPoint::Finite(z) => Some(*z),
            ComplexPoint::Infinity => None,
        }
    }
}

impl<R: Real> PartialEq for ComplexPoint<R> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ComplexPoint::Infinity, ComplexPoint::Infinity) => true,
            (ComplexPoint::Finite(a), ComplexPoint::Finite(b)) => a == b,
            _ => false,
        }
    }
}

impl<R: Real> From<Complex<R>> for ComplexPoint<R> {
    fn from(z: Complex<R>) -> Self {
        ComplexPoint::Finite(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_equals_only_itself() {
        let inf: ComplexPoint<f64> = ComplexPoint::Infinity;
        let z = ComplexPoint::new(0.0, 0.0);
        assert_eq!(inf, ComplexPoint::Infinity);
        assert_ne!(inf, z);
        assert_eq!(z, ComplexPoint::new(0.0, 0.0));
    }
}
