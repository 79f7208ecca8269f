//! Exact and floating-point algebra for the convolution ("Jury") product on
//! rectangular matrices.
//!
//! The product of two `M x N` matrices is their 2-D convolution truncated to
//! the top-left `M x N` window. Together with entrywise addition it turns
//! `M x N` matrices into a unital commutative ring whose identity is the
//! matrix with a single `1` at `(0, 0)`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and parallel experiment drivers live in the `juryconv` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bruhat;
pub mod cayley_hamilton;
pub mod error;
pub mod matrix;
pub mod numerics;
pub mod partitions;
pub mod positivity;
pub mod probgrid;
pub mod sampling;
pub mod transforms;

pub use error::{Error, Result};
pub use matrix::ConvMatrix;
pub use numerics::{Backend, Rational, Ring, Scalar, C64};
