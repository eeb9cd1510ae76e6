// `!(x > 0.0)` is used throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtin;
pub mod compare;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod interp;
pub mod moments;
pub mod oracle;

pub use error::{Error, Result};
