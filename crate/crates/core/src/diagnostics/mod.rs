//! From raw samples to comparisons: MSD curves, two-sample tests on
//! increment laws, the localization functional, the Brownian scaling check
//! and the summary report.

mod distance;
mod localization;
mod report;
mod samples;
mod scaling;

pub use distance::{energy_distance, energy_distance_unbiased, two_sample_distance, PermutationTest, TwoSampleResult};
pub use localization::{localization_functional, mean_localization, LocalizationKernel};
pub use report::{
    assemble_report, ComparisonReport, DistanceRow, Flag, GRow, LocalizationRow, Sigma2Row, TrendFlags,
};
pub use samples::{msd_curve, IncrementSample, MsdPoint};
pub use scaling::{scaling_identity_check, ScalingLag, ScalingReport, ScalingRun};
