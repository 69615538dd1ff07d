// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod community;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod multilevel;
pub mod objectives;
pub mod pipeline;
pub mod regionalize;
pub mod spatial;
pub mod study;
pub mod synth;

pub use error::{Error, Result};
