// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod coeffs;
pub mod error;
pub mod expr;
pub mod quad;
pub mod osgood;
pub mod rk;
pub mod bounds;
pub mod companion;
pub mod pde;
pub mod cli;
