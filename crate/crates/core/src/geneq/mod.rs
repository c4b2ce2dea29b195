//! Set-valued mappings, graph distances, the near-solution bound and
//! continuation solvers for generalized equations.

mod homotopy;
mod mapping;
mod smoothing;
mod subgrad;

pub use homotopy::{homotopy_solve, HomotopySchedule, HomotopySolution};
pub use mapping::{
    graph_distance, graph_norm, isc_diagnostic, near_solution_check, osc_diagnostic, preimage, NearSolutionReport,
    SemicontinuityReport, SemicontinuityRow, SetValuedMap,
};
pub(crate) use smoothing::smooth_plus_unchecked;
pub use smoothing::{
    normal_map, normal_map_residual, sigmoid, smooth_plus, solve_cp_smoothed, trace_table, CpSolution,
    SmoothingSchedule, StageTrace,
};
pub use subgrad::{
    composite_graph_norm, composite_mapping, composite_stationarity_bound, subgradient_graph_1d, CompositeStationarity,
    CrossCheckGrids,
};
