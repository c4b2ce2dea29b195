//! Tangent and normal cones, one-dimensional subdifferentials and
//! optimality residuals.

mod cone;
mod polyhedron;
mod sampled;
mod subdiff;

pub use cone::{regular_normal_cone, Cone, ConeRep};
pub use polyhedron::ConvexPolyhedron;
pub use sampled::{
    direction_probes_2d, direction_probes_3d, limiting_normal_cone_sampled, normal_cone_from_tangent,
    probe_agreement_2d, regular_normals_at, tangent_cone_sampled, LimitingNormals,
};
pub use subdiff::{
    fermat_residual_1d, optimality_residual, subdifferential_1d, OneSided, PiecewiseSmooth1D, SmoothPiece,
    Subdifferential,
};
