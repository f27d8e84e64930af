//! Rational points near non-degenerate planar curves, the dyadic covers used
//! to bound the Hausdorff measure of simultaneously and multiplicatively
//! approximable points on them, and the convergence series that govern both.

// Negated comparisons such as `!(lo < hi)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx_fn;
pub mod cli;
pub mod cover;
pub mod curve;
pub mod dyadic;
pub mod error;
pub mod limsup;
pub mod rational_count;

pub use error::{Error, Result};
