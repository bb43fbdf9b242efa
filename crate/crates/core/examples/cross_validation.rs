//! Repeated stratified 10-fold cross-validation with QPCA refit per fold.

use qpca_eeg::classifier::{cross_validate_with, svm_fit, CvConfig};
use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{embed_all, labels, FeatureSet};
use qpca_eeg::qpca::{self, project, ChannelQuadruple, PcSelection, Projection};
use qpca_eeg::spectral::Band;

fn main() -> qpca_eeg::Result<()> {
    let features = FeatureSet::from_recordings(&synthesize_dataset(&SynthSpec::default(), 42)?, 1.0)?;
    let all = features.all();
    let y = labels(&all);
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse()?;
    let vectors = embed_all(&all, &quad, Band::Alpha)?;

    let cfg = CvConfig { k: 10, repeats: 50, seed: 0 };
    let report = cross_validate_with(&y, cfg, |train, test| {
        let tr: Vec<_> = train.iter().map(|&i| vectors[i].clone()).collect();
        let te: Vec<_> = test.iter().map(|&i| vectors[i].clone()).collect();
        let fit = qpca::fit(&tr, PcSelection::Threshold(0.9))?;
        let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = svm_fit(&project(&fit.transform_all(&tr)?, Projection::Mean), &ytr, 1.0)?;
        model.predict(&project(&fit.transform_all(&te)?, Projection::Mean))
    })?;
    println!(
        "{}-fold x {}: mean misclassification {:.4} (std {:.4}), accuracy {:.2}%",
        report.k,
        report.repeats,
        report.mean_score,
        report.std_score,
        100.0 * (1.0 - report.mean_score)
    );
    Ok(())
}
