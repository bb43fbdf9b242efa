//! Repeated stratified k-fold cross-validation scored by misclassification rate.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::svm_fit;
use crate::error::{Error, Result};
use crate::qpca::RealFeatureMatrix;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_REPEATS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: DEFAULT_FOLDS, repeats: DEFAULT_REPEATS, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Mean over repeats of the fold-averaged misclassification rate.
    pub mean_score: f64,
    /// Population standard deviation of the per-repeat scores.
    pub std_score: f64,
}

/// Fold index of every sample for one repeat.
///
/// Each class is shuffled separately, the classes are concatenated (positive
/// first) and position `t` goes to fold `t mod k`, so every fold receives
/// its share of each class.
pub fn stratified_folds(labels: &[f64], k: usize, seed: u64, repeat: usize) -> Result<Vec<usize>> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::Parameter(format!("k = {k}; cross-validation needs at least 2 folds")));
    }
    if k > n {
        return Err(Error::Parameter(format!("k = {k} exceeds the {n} available samples")));
    }
    let mut rng = seed::rng(seed, "crossval", &[repeat as u64]);
    let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i] > 0.0).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| labels[i] <= 0.0).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![0; n];
    for (t, &i) in pos.iter().chain(&neg).enumerate() {
        folds[i] = t % k;
    }
    Ok(folds)
}

/// Runs `evaluate(train, test)` on every fold of every repeat. The closure
/// returns predicted labels for `test`. Repeats run in parallel; the report
/// does not depend on scheduling.
pub fn cross_validate_with<F>(labels: &[f64], config: CvConfig, evaluate: F) -> Result<CvReport>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<f64>> + Sync,
{
    if config.repeats == 0 {
        return Err(Error::Parameter("repeats must be at least 1".into()));
    }
    stratified_folds(labels, config.k, config.seed, 0)?;
    let scores = (0..config.repeats)
        .into_par_iter()
        .map(|r| {
            let folds = stratified_folds(labels, config.k, config.seed, r)?;
            let mut total = 0.0;
            for f in 0..config.k {
                let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| folds[i] == f);
                let predicted = evaluate(&train, &test)?;
                if predicted.len() != test.len() {
                    return Err(Error::Shape(format!(
                        "{} predictions for a fold of {}",
                        predicted.len(),
                        test.len()
                    )));
                }
                let wrong = test.iter().zip(&predicted).filter(|(&i, &p)| (labels[i] > 0.0) != (p > 0.0)).count();
                total += wrong as f64 / test.len() as f64;
            }
            Ok(total / config.k as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64;
    Ok(CvReport { k: config.k, repeats: config.repeats, seed: config.seed, mean_score: mean, std_score: var.sqrt() })
}

/// Cross-validates a linear SVM on a fixed feature matrix.
pub fn cross_validate(features: &RealFeatureMatrix, labels: &[f64], c: f64, config: CvConfig) -> Result<CvReport> {
    if features.rows != labels.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", features.rows, labels.len())));
    }
    let select = |idx: &[usize]| -> Result<RealFeatureMatrix> {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| features.row(i).to_vec()).collect();
        RealFeatureMatrix::from_rows(&rows).map(|m| RealFeatureMatrix { cols: features.cols, ..m })
    };
    cross_validate_with(labels, config, |train, test| {
        let y: Vec<f64> = train.iter().map(|&i| labels[i]).collect();
        let model = svm_fit(&select(train)?, &y, c)?;
        model.predict(&select(test)?)
    })
}
