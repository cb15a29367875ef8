//! Reconstruction of a sound-soft star-shaped obstacle from far-field data
//! measured for one incident direction at many frequencies.
//!
//! The crate contains a Nystrom boundary-integral forward solver, the domain
//! derivative of the boundary-to-far-field map, the projected recursive
//! Newton method with Tikhonov-regularized steps, its multi-level variant,
//! and the simulation / reporting harness behind the `multifreq` CLI.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the quadrature formulas
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod forward;
pub mod geometry;
pub mod harness;
pub mod jacobian;
pub mod linalg;
pub mod multilevel;
pub mod newton;
pub mod specfun;

pub use error::{Error, Result};
