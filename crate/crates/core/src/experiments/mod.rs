//! Seeded Monte Carlo harnesses.
//!
//! Every trial draws from its own counter-based stream, so results do not
//! depend on thread count or scheduling.

mod lists;
mod pe;
mod region;
mod stats;
mod strips;
mod typicality;

pub use lists::{blob_and_reverse_sizes, list_size_survey, BlobStats, CenterMode, ListSurvey};
pub use pe::{run_pe, CodeMode, Decoder, TrialConfig, TrialTally};
pub use region::{region_sweep, RegionRow};
pub use stats::{wilson_interval, Z95};
pub use strips::{
    build_ogs, quasi_uniformity, quasi_uniformity_ln, strip_boundary_radius_sq, strip_census, thick_strip_count,
    OgsPartition, StripCensus, StripCount,
};
pub use typicality::{atypicality_bounds, atypicality_frequencies};
