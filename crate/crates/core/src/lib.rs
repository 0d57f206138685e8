#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod lifespan;
pub mod profile;
pub mod quad;
pub mod specfun;
pub mod testfam;
pub mod wavesim;

pub use error::{Error, Result};
