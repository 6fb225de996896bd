//! Periodic Jacobi matrices on universal-cover trees.

// `!(x > 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod error;
pub mod gap;
pub mod graph;
pub mod green_models;
pub mod mfunction;
pub mod models;
pub mod rgmodel;
pub mod spectral;

pub use error::{Error, Result, ValidationError};
