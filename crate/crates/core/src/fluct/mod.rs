//! Correlator formulas and Monte Carlo estimators of linear statistics.

pub mod formulas;
pub mod mc;
pub mod stats;

pub use formulas::{c_case3, s_goe, s_gue, tr_g2_limit, TraceLaw, TraceVariant, CONFLUENT_GAP};
pub use mc::{identity_residuals, mc_run, Extras, IdentityCheck, RecordExtras, ReplicateRecord};
pub use stats::{
    covariance_of_values, ks_distance, mc_covariance, mc_covariance_of, mc_mean, mc_mean_of, mc_variance, mean_of_values, values_of, variance_slope,
    CovarianceEstimate, MeanEstimate, Statistic,
};
