//! Field concentration between an m-convex perfect conductor and the matrix
//! boundary: closed-form asymptotics, a boundary-fitted reference solver and
//! the validation harness tying the two together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod auxfields;
pub mod error;
pub mod geometry;
pub mod refsolver;
pub mod regimes;
pub mod validate;

pub use error::{Error, Result};
