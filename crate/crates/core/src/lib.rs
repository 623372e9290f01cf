//! Combinatorial pure-exploration bandits with Gaussian arms.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod convex;
pub mod efficient;
pub mod error;
pub mod general;
pub mod hard;
pub mod lower_bounds;
pub mod meta;
pub mod model;
pub mod naive;
pub mod oracles;
pub mod run;
pub mod stats;

pub use error::{Error, Result};
