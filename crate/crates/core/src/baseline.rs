//! Classical real PCA on concatenated channel features, classified with the
//! same SVM as the quaternion pipeline.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pipeline::{best_over_p, evaluate, labels, FeatureSet, PcChoice, PipelineParams, TrialOutcome};
use crate::qpca::{ChannelQuadruple, PcSelection, RealFeatureMatrix};
use crate::spectral::{write_feature_cache, Band, RecordingFeatures};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPcaModel {
    pub mean: Vec<f64>,
    /// `d x p`, row-major.
    pub basis: Vec<f64>,
    pub dim: usize,
    pub p: usize,
    /// All `d` eigenvalues of the covariance, descending, clamped at 0.
    pub eigenvalues: Vec<f64>,
}

impl RealPcaModel {
    pub fn basis_column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.basis[i * self.p + j]).collect()
    }

    /// Scores `(v - mean) B`, length `p`.
    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::Shape(format!("vector of length {} against a model of dimension {}", v.len(), self.dim)));
        }
        let mut out = vec![0.0; self.p];
        for (i, (x, mu)) in v.iter().zip(&self.mean).enumerate() {
            let d = x - mu;
            for (o, b) in out.iter_mut().zip(&self.basis[i * self.p..(i + 1) * self.p]) {
                *o += d * b;
            }
        }
        Ok(out)
    }

    pub fn transform_all(&self, vectors: &[Vec<f64>]) -> Result<RealFeatureMatrix> {
        let rows = vectors.iter().map(|v| self.transform(v)).collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return RealFeatureMatrix::new(0, self.p, Vec::new());
        }
        RealFeatureMatrix::from_rows(&rows)
    }
}

/// Eigen-decomposition of `(1/m) X~^T X~`. Each eigenvector's largest-magnitude
/// entry is made positive.
pub fn fit_real_pca(training: &[Vec<f64>], selection: PcSelection) -> Result<RealPcaModel> {
    let m = training.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!("PCA needs at least 2 training vectors, got {m}")));
    }
    let dim = training[0].len();
    if dim == 0 {
        return Err(Error::InsufficientData("training vectors are empty".into()));
    }
    if let Some(v) = training.iter().find(|v| v.len() != dim) {
        return Err(Error::Shape(format!("training vectors of length {dim} and {}", v.len())));
    }
    let mut mean = vec![0.0; dim];
    for v in training {
        for (a, x) in mean.iter_mut().zip(v) {
            *a += x;
        }
    }
    mean.iter_mut().for_each(|a| *a /= m as f64);
    let x = DMatrix::from_fn(m, dim, |r, c| training[r][c] - mean[c]);
    let scale = training.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let spread = x.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if spread == 0.0 || spread <= 1e-14 * scale {
        return Err(Error::DegenerateSpectrum("all training vectors are identical".into()));
    }
    let mut cov = x.transpose() * &x / m as f64;
    cov = (&cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let p = selection.resolve(&eigenvalues, m.min(dim))?;
    let mut basis = vec![0.0; dim * p];
    for (j, &k) in order.iter().take(p).enumerate() {
        let col = eig.eigenvectors.column(k);
        let pivot = (0..dim).fold(0, |b, i| if col[i].abs() > col[b].abs() { i } else { b });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            basis[i * p + j] = sign * col[i];
        }
    }
    Ok(RealPcaModel { mean, basis, dim, p, eigenvalues })
}

/// `Ch1 || Ch2 || Ch3 || Ch4`, each channel's segments in time order.
pub fn concatenate(rec: &RecordingFeatures, quadruple: &ChannelQuadruple, band: Band) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(4 * rec.n_segments());
    for name in quadruple.channels() {
        let values = rec.get(name, band).ok_or_else(|| {
            Error::Validation(format!("{} session {} has no channel {name}", rec.subject_id, rec.session_index))
        })?;
        out.extend_from_slice(values);
    }
    Ok(out)
}

fn real_pca_arm(
    train: &[&RecordingFeatures],
    test: &[&RecordingFeatures],
    quadruple: &ChannelQuadruple,
    band: Band,
    params: &PipelineParams,
) -> Result<TrialOutcome> {
    let xtr = train.iter().map(|r| concatenate(r, quadruple, band)).collect::<Result<Vec<_>>>()?;
    let xte = test.iter().map(|r| concatenate(r, quadruple, band)).collect::<Result<Vec<_>>>()?;
    let limit = xtr.len().min(xtr.first().map_or(0, Vec::len));
    let selection = match params.pcs {
        PcChoice::Fixed(p) => PcSelection::Fixed(p),
        PcChoice::Threshold(t) => PcSelection::Threshold(t),
        PcChoice::SweepUpTo(0) => return Err(Error::Parameter("p-sweep limit must be at least 1".into())),
        PcChoice::SweepUpTo(l) => PcSelection::Fixed(l.min(limit)),
    };
    let model = fit_real_pca(&xtr, selection)?;
    let candidates = match params.pcs {
        PcChoice::SweepUpTo(_) => 1..=model.p,
        _ => model.p..=model.p,
    };
    best_over_p(
        &model.transform_all(&xtr)?,
        &labels(train),
        &model.transform_all(&xte)?,
        &labels(test),
        candidates,
        params.svm_c,
    )
}

/// SHA-256 of the feature-cache serialization of `recordings`.
pub fn feature_checksum(recordings: &[&RecordingFeatures]) -> Result<String> {
    let owned: Vec<RecordingFeatures> = recordings.iter().map(|r| (*r).clone()).collect();
    let mut buf = Vec::new();
    write_feature_cache(&mut buf, &owned)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quadruple: ChannelQuadruple,
    pub band: Band,
    pub params: PipelineParams,
    pub qpca: TrialOutcome,
    pub real_pca: TrialOutcome,
    /// Checksum of the features both arms consumed.
    pub feature_checksum: String,
}

/// Both arms on the same split, p rule and SVM C.
pub fn compare(features: &FeatureSet, quadruple: &ChannelQuadruple, band: Band, params: &PipelineParams) -> Result<Comparison> {
    let qpca = evaluate(features, quadruple, band, params).map_err(|e| Error::Arm { arm: "qpca", source: Box::new(e) })?;
    let real_pca = real_pca_arm(&features.training(), &features.testing(), quadruple, band, params)
        .map_err(|e| Error::Arm { arm: "real_pca", source: Box::new(e) })?;
    Ok(Comparison {
        quadruple: quadruple.clone(),
        band,
        params: *params,
        qpca,
        real_pca,
        feature_checksum: feature_checksum(&features.all())?,
    })
}
