//! Construction and certification of cut-and-project point sets, and cocycle
//! induction over their discretized hulls.
//!
//! The crate is organized around exact arithmetic: lattice data, window
//! endpoints and torus coordinates live in `Q(sqrt(D))`, so membership and
//! boundary decisions are never made in floating point. Floats appear as
//! shadows for metrics, quadrature and reporting.

pub mod approxgrp;
pub mod arith;
pub mod boxes;
pub mod cert;
pub mod delone;
pub mod error;

pub mod scheme;

pub use arith::{quad_cmp, ExactF64, ExactMat, QuadRat};
pub use error::{CoreError, Result};
