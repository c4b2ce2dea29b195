//! Epigraph sampling, epigraph distances and the bounds they yield for
//! minima, near-minimizers and composite functions.

mod bounds;
mod distance;
mod sample;
mod tightness;
mod trend;

pub use bounds::{
    check_modulus, composite_epi_bound, minima_bounds_report, sampled_eps_argmin, sampled_min, CompositeBound,
    CompositeInstance, MinimaBoundsReport, Modulus, SampledMin,
};
pub use distance::{epi_distance_cloud, epi_distance_cloud_detail, epi_distance_kenmochi, hypo_distance, EpiDistance};
pub use sample::{sample_epigraph, EpiCloud};
pub use tightness::{
    characterization_check, epi_consequences_report, schedule_tail, tightness_report, CharacterizationReport,
    CharacterizationRow, ConsequenceRow, ConsequencesReport, TightnessReport, TightnessRow, VanishingTolerance,
};
pub use trend::{epi_trend, log_log_slope, EpiTrend};
