//! Linear max-margin classification, confusion metrics and cross-validation.

mod crossval;
mod metrics;
mod svm;

pub use crossval::{cross_validate, cross_validate_with, stratified_folds, CvConfig, CvReport, DEFAULT_FOLDS, DEFAULT_REPEATS};
pub use metrics::{metrics, ConfusionCounts, Metrics};
pub use svm::{svm_fit, svm_fit_detailed, LinearSvmModel, SvmFit, DEFAULT_C, GAP_TOL};

/// Convenience alias: `svm_predict(model, x)` is `model.predict(x)`.
pub fn svm_predict(model: &LinearSvmModel, features: &crate::qpca::RealFeatureMatrix) -> crate::Result<Vec<f64>> {
    model.predict(features)
}
