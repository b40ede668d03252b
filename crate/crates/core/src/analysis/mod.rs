//! Correlation, normalisation and stability analysis over scored systems.

pub mod evaluate;
pub mod kendall;
pub mod lgn;
pub mod stats;

pub use evaluate::{
    cross_lingual_cv, evaluate_average_strategy, system_level_correlation, triplet_level_correlation,
    CorrelationReport, CvReport, Granularity, SystemEvaluation,
};
pub use kendall::kendall_tau_b;
pub use lgn::{lgn_apply, lgn_fit, read_calibration, write_calibration, CalibrationSet, CalibrationStats, LgnFit, LgnPlan};
pub use stats::{coefficient_of_variation, paired_t_test, TTest};
