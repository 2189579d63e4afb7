//! Delayed-feedback stability analysis of helicopter rotor pitch-flap dynamics.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ctcr;
pub mod dde;
pub mod error;
pub mod optimize;
pub mod quasipoly;
pub mod rootfinder;
pub mod rotor;

pub use error::{Error, Result};
