//! Bivariate copulas as composable expressions.
//!
//! The crate builds copulas from a small catalog (independence, the
//! Fréchet–Hoeffding bounds, Marshall–Olkin, and two perturbations of the
//! independence copula), transforms them (transpose, survival,
//! symmetrization, radial symmetrization, convex mixing), computes
//! dependence and asymmetry measures with error estimates, and checks the
//! copula axioms and symmetry identities by seeded property testing.

// `!(x <= tol)` is used on purpose so that NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod copula;
pub mod error;
pub mod measures;
pub mod spec;
pub mod transforms;
pub mod verify;

pub use copula::{c_volume, eval, sample_grid, CopulaExpr, GridCopula, Node, Point, Primitive, Rectangle};
pub use error::{Error, Result};
pub use spec::{parse_copula_spec, unparse, ParseError};
