//! Plane-partition analytics: exact counts by size and trace, the
//! saddle-point machinery around `prod_j (1 - u x^j)^{-j}`, and
//! numerical checks of the Gaussian limit law of the trace.

// `!(x < y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod clt;
pub mod error;
pub mod exact;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
