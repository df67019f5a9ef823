//! Numerical laboratory for norms on high-dimensional spheres: average and
//! maximal norm, Dvoretzky and critical dimensions, small-ball
//! probabilities, negative moments, and diameters of random sections.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod error;
pub mod estimate;
pub mod estimators;
pub mod experiments;
pub mod optimize;
pub mod report;
pub mod sampling;
pub mod sections;
pub mod special;

pub use bodies::{ConvexBody, GaussianMethod};
pub use error::{Error, Result};
pub use estimate::{EstimateCI, Flag, Method};
pub use sampling::{SeedSpec, Subspace};
