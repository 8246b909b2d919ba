#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundled;
pub mod error;
pub mod forward;
pub mod glevitan;
pub mod invariants;
pub mod io;
pub mod medium;
pub mod numeric;
pub mod pipeline;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
