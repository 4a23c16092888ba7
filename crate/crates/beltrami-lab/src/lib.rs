//! Numerical laboratory for planar Beltrami equations with unbounded
//! distortion: coefficient fields and their dilatation quantities, mean
//! oscillation diagnostics, divergence-type existence probes, an FFT
//! solver for truncated coefficients, and asymptotic profiles of the
//! resulting mappings near a degeneration point.

pub mod asymptotics;
pub mod config;
pub mod criteria;
pub mod error;
pub mod field;
pub mod num;
pub mod oscillation;
pub mod phi;
pub mod point;
pub mod quad;
pub mod run;
pub mod scalar;
pub mod solver;
pub mod spherical;
pub mod verdict;

pub use error::{Error, Result};
pub use num::Real;
pub use point::ComplexPoint;
pub use verdict::{CriterionVerdict, Verdict};

/// Concrete f64 instantiations.
pub type C64 = num_complex::Complex<f64>;
pub type MuField64 = field::MuField<f64>;
pub type GridSpec64 = field::GridSpec<f64>;
pub type ScalarField64 = scalar::ScalarField<f64>;
pub type PhiFunction64 = phi::PhiFunction<f64>;
pub type ComplexPoint64 = point::ComplexPoint<f64>;
pub type CriterionVerdict64 = verdict::CriterionVerdict<f64>;
pub type Mapping64 = solver::Mapping<f64>;
pub type ApproximationRun64 = solver::ApproximationRun<f64>;
pub type EvaluableMapping64 = asymptotics::EvaluableMapping<f64>;
pub type ScaleProfile64 = asymptotics::ScaleProfile<f64>;
pub type PsiFamily64 = criteria::PsiFamily<f64>;
