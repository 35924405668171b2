//! Library surface of the experiment driver, shared by the `jscc` binary
//! and the acceptance test suite.

// Validation uses `!(x >= 0.0)` so NaN inputs fail like negative ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod table;
