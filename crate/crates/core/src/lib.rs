//! Decides whether the functions on a dynamically defined subset of the
//! sphere (Julia set, Fatou set or the whole sphere) form a Cartan
//! subalgebra of the C*-algebra of a rational map, and provides a finite
//! orbit-tree model in which the operators behind that criterion can be
//! built and checked.

pub mod cartan;
pub mod cli;
pub mod dynamics;
pub mod hilbert;
pub mod parse;
pub mod rational;
pub mod roots;

use num_complex::Complex64;
use serde::Serializer;

pub(crate) fn serialize_complex<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    [c.re, c.im].serialize(s)
}
