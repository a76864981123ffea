//! A finite model of the operator algebra of a rational map.
//!
//! An [`OrbitTree`] holds a generic base point, a few forward images and
//! full backward fans. Operators are sparse matrices indexed by tree nodes:
//! `rho_n(f)` sends `x` to `R^n(x)` with weight `f(x)`, the expectation
//! [`delta`] keeps the diagonal, and the identity suite checks the algebra
//! these generate.

mod identities;
mod matrix;
mod rho;
mod tree;

use thiserror::Error;

use crate::dynamics::DynamicsError;

pub use identities::{
    max_line_count, random_quasi_monomial, random_sparse, run_identity_suite, CheckResult, IDENTITY_TOL, NORM_TOL,
};
pub use matrix::{
    commutant_witness, compose, conjugate, delta, inverse, is_diagonal, is_quasi_monomial, normalizer_witness, rel,
    NormalizerOutcome, Relation, Side, TreeMatrix,
};
pub use rho::{fiber_of, kw_inner_product, kw_inner_product_at, rho_mn, rho_n, support_mn, SampledFunction};
pub use tree::{build_orbit_tree, tree_size, OrbitTree, TreeConfig, TreeNode, EDGE_TOL, GENERIC_TOL, NODE_CAP};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HilbertError {
    #[error("map degree {degree} is too low; at least 2 is required")]
    DegreeTooLow { degree: usize },
    #[error("tree would have {} nodes, above the cap of {cap}", node_count(*nodes))]
    SizeCapExceeded { nodes: usize, cap: usize },
    #[error("no base point passed the genericity screen in {attempts} attempts")]
    GenericBaseNotFound { attempts: usize },
    #[error("depth {depth} exceeds the tree's longest walk {max}")]
    DepthExceeded { depth: usize, max: usize },
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// `usize::MAX` marks a count that overflowed.
fn node_count(nodes: usize) -> String {
    if nodes == usize::MAX {
        "more than usize::MAX".into()
    } else {
        nodes.to_string()
    }
}
