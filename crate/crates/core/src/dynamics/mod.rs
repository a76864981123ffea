//! Critical points, periodic cycles, orbit classification and Julia-set
//! sampling for rational maps of the sphere.

mod chart;
mod classify;
mod critical;
mod periodic;
mod sample;

pub use chart::{branch_index, branch_index_tol, chart_derivative, BRANCH_TOL};
pub use classify::{
    classify_point, escape_radius, Budget, Certificate, Classification, Classifier, MembershipVerdict, Verdict,
    ORBIT_PREFIX_CAP,
};
pub use critical::{classify_critical_points, critical_points, CriticalDatum, RECOUNT_TOL};
pub use periodic::{cycle_multiplier, periodic_points, periodic_points_capped, Character, CycleDatum, CYCLE_MATCH_TOL};
pub use sample::{
    escape_grid, julia_sample, preimages, repelling_seed, EscapeGrid, GridCode, Viewport, GRID_ATTRACT_TOL,
    RENDER_MAX_ITER,
};

use thiserror::Error;

use crate::rational::RationalError;
use crate::roots::RootError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("map degree {degree} is too low; at least 2 is required")]
    DegreeTooLow { degree: usize },
    #[error("local degrees total {found}, expected 2d - 2 = {expected}")]
    RiemannHurwitzMismatch { found: usize, expected: usize },
    #[error("no repelling periodic point of period 1 or 2 found")]
    NoRepellingSeedFound,
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Roots(#[from] RootError),
}
