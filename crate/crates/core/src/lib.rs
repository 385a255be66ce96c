//! Sparse error correction by `l_p` minimization, `0 < p <= 1`.
//!
//! Given `y = A f + e` with a tall Gaussian coding matrix `A` and a sparse
//! error `e`, this crate
//!
//! * computes the worst-case recovery threshold `rho*(p)` and its
//!   derivative ([`threshold`]), built on half-normal moments
//!   ([`halfnormal`]);
//! * generates seeded instances ([`ensemble`]) and decodes them with IRLS
//!   ([`decoder`]);
//! * evaluates the null-space conditions and builds the matching
//!   worst-case errors ([`certify`]);
//! * runs phase-transition and concentration experiments ([`harness`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod decoder;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod halfnormal;
pub mod harness;
pub mod io;
pub mod quadrature;
pub mod seed;
pub mod threshold;

pub use error::{Error, Result};
pub use seed::SeedSpec;
