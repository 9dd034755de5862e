//! Numerical laboratory for Blaschke products whose zeros lie in Stolz-type
//! regions: evaluation, derivative bounds, critical points and integral means.

// `!(x > 0.0)` is used on purpose so NaN fails validation; repeat_n needs a newer toolchain.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_repeat_n)]

pub mod bounds;
pub mod cli;
pub mod critical;
pub mod error;
pub mod means;
pub mod product;
pub mod regions;
pub mod rng;

pub use error::{Error, Result};
pub use product::{BlaschkeProduct, Zero, ZeroSequence};
pub use regions::{BoundarySet, ModelFunction, StolzSpec};
