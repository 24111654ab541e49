//! Clutter removal for OFDM integrated-sensing channels.
//!
//! Clutter snapshots are vectorized and stacked, their dominant right singular
//! subspace is stored offline, and at runtime every acquired frame has its projection
//! onto that subspace subtracted. Because the subspace only depends on `C^H C`, a
//! random phase per snapshot leaves it unchanged.
//!
//! The crate also carries the per-subcarrier and per-symbol cancellation baselines,
//! the OFDM radar detection chain, a constant-velocity Kalman tracker and a Monte
//! Carlo harness.

// `!(x > 0.0)` style checks are kept so NaN inputs fall into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clutter;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod radar;
pub mod scene;
pub mod tracker;

pub use error::{Error, Result};
pub use num_complex::Complex64;
