//! Model functions, Stolz-type regions and closed subsets of the unit circle.

mod boundary;
mod model;
mod stolz;

pub use boundary::{default_type_grid, BoundarySet, BoundarySetSpec, CantorGenerator, MAX_CANTOR_DEPTH};
pub use model::ModelFunction;
pub use stolz::{sample_zeros, RadialLaw, StolzSpec, MAX_ANGLE_ATTEMPTS};
