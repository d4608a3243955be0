//! Numerical laboratory for the dynamics of complex polynomials.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boettcher;
pub mod classify;
pub mod ergodic;
pub mod error;
pub mod numeric;
pub mod orbit;
pub mod poly;
pub mod render;
pub mod roots;
pub mod spectrum;
pub mod tree;

pub use error::{Error, Result};
pub use poly::{ComplexPoint, Polynomial};
