//! Spectral tools for the gradient-of-divergence and curl operators in a ball.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bvp;
pub mod decomposition;
pub mod eigenbasis;
pub mod error;
pub mod fieldgrid;
pub mod geometry;
pub mod quadrature;
pub mod sobolev;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
