//! Polynomials and rational maps as self-maps of the Riemann sphere.

pub mod exact;
mod map;
mod polynomial;
mod sphere;

pub use map::{RationalMap, DEFAULT_DEGREE_CAP};
pub use polynomial::{Polynomial, FFT_THRESHOLD};
pub use sphere::{projective_tolerance, set_projective_tolerance, SpherePoint, DEFAULT_PROJECTIVE_TOL};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RationalError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("both homogeneous forms vanish at {point}; numerator and denominator are not coprime")]
    DegenerateEvaluation { point: SpherePoint },
    #[error("degree {degree} exceeds the configured cap {cap}")]
    SizeCapExceeded { degree: usize, cap: usize },
}
