//! Computable set-convergence for finite-dimensional variational analysis.
//!
//! Sets are finite point clouds. On top of the three distance primitives
//! (point-to-set distance, excess, truncated Hausdorff distance) the crate
//! provides inner/outer limit estimates, epigraph distances and the bounds
//! they imply for minima and near-minimizers, tangent and normal cones,
//! set-valued mappings with graph distances, and smoothing/homotopy solvers
//! for generalized equations.

// `!(a < b)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod demos;
pub mod distance;
pub mod epi;
pub mod error;
pub mod extreal;
pub mod field;
pub mod geneq;
pub mod grid;
pub mod limits;
pub mod newton;
pub mod nn;
pub mod norm;
pub mod optim1d;
pub mod report;
pub mod vargeo;

pub use cloud::{Ball, PointCloud};
pub use distance::{excess, point_to_set_distance, truncated_hausdorff};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use field::{FunctionSequence, ScalarField, VectorField};
pub use grid::{Axis, GridSpec};
pub use norm::NormSpec;
