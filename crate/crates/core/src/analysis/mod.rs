//! Estimators and inequality checkers over grid fields: Holder exponent
//! fitting, W^{1,p} norms with divergence detection, singularity
//! classification, scale-invariant estimates, the p0-Laplacian and
//! eigenvalue-bound lemmas, barrier comparison, and volume criteria.

mod classify;
mod holder;
mod norms;
mod pointwise;
mod report;
mod scale;
pub mod trend;

pub use classify::{
    classify_samples, singularity_classify, ClassifyConfig, SingularityClass, SingularityVerdict,
};
pub use holder::{barrier_oscillation_check, holder_exponent, BarrierReport, HolderEstimate};
pub use norms::{grad_v_ln_norm, volume_integral, w1p_norm, GradLnReport, VolumeReport, W1pReport};
pub use pointwise::{
    hessian_eigen_bounds, hessian_eigen_bounds_field, p_laplacian_defect, p_laplacian_divergence,
    p_laplacian_tolerance, EigenBoundsOutcome, EigenBoundsReport, PLaplacianReport,
};
pub use report::{AnalysisReport, REPORT_SCHEMA};
pub use scale::{scale_invariant_check, DerivMode, ScaleInvariantReport};
pub use trend::{detect_trend, linear_fit, TrendReport, TrendVerdict};
