//! Optimal-restart hitting times ("grades") of simple random walk on Z^d:
//! exact solvers on truncated boxes, envelope bounds, disk hitting times,
//! Brownian closed forms and Monte Carlo checks.

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cache;
pub mod continuum;
pub mod disk;
pub mod error;
pub mod grade;
pub mod harmonic;
pub mod lattice;
pub mod linsolve;
pub mod montecarlo;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
