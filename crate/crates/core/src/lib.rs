//! Spatial filters that stay discriminative when the data distribution
//! shifts between sessions, with knowledge borrowed from other subjects.
//!
//! The crate covers plain CSP, three multi-subject variants (covariance
//! shrinkage toward donors, multi-task filters, removal of a donor-estimated
//! non-stationary subspace) and their composition, plus an LDA classifier,
//! subspace and divergence metrics, a synthetic population generator and an
//! experiment harness driven by the `csp-transfer` binary.

pub mod classify;
pub mod csp;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod toygen;
pub mod transfer;

pub use error::{Error, Result};
