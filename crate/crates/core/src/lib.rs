//! Simulation and consistency checking of nested-observer measurement
//! scenarios: dense pure states, density operators that remember whether
//! they are proper or improper mixtures, policies placing the collapse
//! cut, and a plain-text scenario format.

// `!(x <= eps)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consistency;
pub mod dsl;
pub mod error;
pub mod hilbert;
pub mod mixtures;
pub mod numfmt;
pub mod policies;
pub mod scenarios;

pub use error::{Error, Result};
