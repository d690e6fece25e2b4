//! Precision limits for estimating the momentum-diffusion rate of a freely
//! expanding Gaussian wavepacket.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csl;
pub mod dynamics;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod montecarlo;
pub mod sld;

pub use error::{Error, Result};
