//! Numerical verification engine for f-minimal hypersurfaces in weighted
//! ambient manifolds.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod charts;
pub mod cli;
pub mod error;
pub mod expr;
pub mod hypersurface;
pub mod identities;
pub mod jet;
pub mod operators;
pub mod rotsym;
pub mod sampling;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
