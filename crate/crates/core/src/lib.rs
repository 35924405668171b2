//! Distortion bounds and protocol simulation for low-latency analog
//! transmission with feedback.
//!
//! The crate has two halves that check each other:
//!
//! * closed-form machinery — special functions ([`special`]), source
//!   statistics ([`sources`]), scalar quantizers ([`quantizer`]),
//!   information-theoretic lower bounds ([`bounds`]) and protocol upper
//!   bounds ([`protocol`], [`dual`], [`fading`]);
//! * an event-level Monte Carlo simulator ([`montecarlo`]) of the two-way
//!   retransmission protocol over non-coherent AWGN and Rician channels.
//!
//! Every simulated statistic has a closed-form counterpart and vice versa,
//! so empirical results can be sandwiched between lower and upper bounds.
//!
//! With the default `parallel` feature, Monte Carlo trials run on rayon.
//! Results are bit-identical to the sequential path because per-trial
//! randomness is derived from `(seed, trial index)` and partial sums are
//! reduced in fixed chunk order.

// Validation uses `!(x >= 0.0)` so NaN inputs fail the same check as
// negative ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dual;
pub mod error;
pub mod fading;
pub mod montecarlo;
pub mod protocol;
pub mod quantizer;
pub mod sources;
pub mod special;

pub(crate) mod quad;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
