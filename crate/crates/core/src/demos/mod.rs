//! The worked examples behind the command-line demos.

mod cones;
mod config;
mod constrained;
mod kw;
mod registry;

pub use cones::{cone_check, cone_table, polyhedral_instances, ConeInstance, ConeRow, ConeSampling};
pub use config::{DemoConfig, DEMO_NAMES};
pub use constrained::{
    cubic_demo, lifted_cubic, penalty_demo, soften_demo, softened_cubic, CubicReport, CubicRow, PenaltyReport,
    PenaltyRow, SoftenReport, SoftenRow,
};
pub use kw::{kw_centers, kw_density_demo, kw_solve, synthetic_sample, KwFit, KwParams, KwReport, KwRow};
pub use registry::{
    feasible_set_map, intersection_pair, lcp_1d_field, lcp_field, mapping, odd_even_sequence, sharpness_pair,
    shrinking_sequence, sin_homotopy_map, MAPPING_NAMES, SEQUENCE_NAMES,
};
