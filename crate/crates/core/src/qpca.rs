//! Quaternion PCA over 4-channel band-power vectors.
//!
//! Channel `k` of a quadruple fills quaternion component `k` (scalar, i, j, k),
//! so the embedding is a full quaternion. The covariance is the `N_s x N_s`
//! matrix `C = (1/m) Q~^H Q~`; its QSVD gives the eigenbasis, and features are
//! `Y = Q~ U_p` with the centered data on the left.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{qsvd, row_times, QuaternionMatrix};
use crate::quaternion::Quaternion;
use crate::spectral::{Band, BandFeatureVector, RecordingFeatures};

/// Spectral gaps at or below this fraction of the leading eigenvalue count as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Default cumulative-eigenvalue share for threshold selection.
pub const DEFAULT_PC_THRESHOLD: f64 = 0.90;

/// Four distinct channel names in embedding order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ChannelQuadruple([String; 4]);

impl ChannelQuadruple {
    pub fn new<S: AsRef<str>>(channels: &[S]) -> Result<Self> {
        let names: Vec<String> = channels.iter().map(|s| s.as_ref().trim().to_string()).collect();
        let arr: [String; 4] = names
            .try_into()
            .map_err(|v: Vec<String>| Error::Validation(format!("a quadruple needs 4 channels, got {}", v.len())))?;
        for i in 0..4 {
            if arr[i].is_empty() {
                return Err(Error::Validation("empty channel name in quadruple".into()));
            }
            if arr[..i].contains(&arr[i]) {
                return Err(Error::Validation(format!("channel {} repeated in quadruple", arr[i])));
            }
        }
        Ok(ChannelQuadruple(arr))
    }

    pub fn channels(&self) -> &[String; 4] {
        &self.0
    }

    /// Names sorted, i.e. the unordered combination this ordering belongs to.
    pub fn combination(&self) -> [String; 4] {
        let mut c = self.0.clone();
        c.sort();
        c
    }
}

impl TryFrom<Vec<String>> for ChannelQuadruple {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        ChannelQuadruple::new(&v)
    }
}

impl From<ChannelQuadruple> for Vec<String> {
    fn from(q: ChannelQuadruple) -> Self {
        q.0.to_vec()
    }
}

impl FromStr for ChannelQuadruple {
    type Err = Error;

    /// Comma-separated, e.g. `F8,T7,T8,P4`.
    fn from_str(s: &str) -> Result<Self> {
        ChannelQuadruple::new(&s.split(',').collect::<Vec<_>>())
    }
}

impl fmt::Display for ChannelQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// Quaternion to real reduction applied entrywise to the feature matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Mean,
    Absolute,
    Norm,
    Phase,
}

impl Projection {
    pub const ALL: [Projection; 4] = [Projection::Mean, Projection::Absolute, Projection::Norm, Projection::Phase];

    pub fn as_str(self) -> &'static str {
        match self {
            Projection::Mean => "mean",
            Projection::Absolute => "absolute",
            Projection::Norm => "norm",
            Projection::Phase => "phase",
        }
    }

    /// `mean`: component average; `absolute`: average magnitude; `norm`:
    /// Euclidean norm; `phase`: `atan2(|v|, w)` in `[0, pi]`, with 0 for the
    /// zero quaternion.
    pub fn apply(self, q: Quaternion) -> f64 {
        match self {
            Projection::Mean => (q.w + q.x + q.y + q.z) / 4.0,
            Projection::Absolute => (q.w.abs() + q.x.abs() + q.y.abs() + q.z.abs()) / 4.0,
            Projection::Norm => q.norm(),
            Projection::Phase => {
                let v = q.vector_norm();
                if v == 0.0 && q.w == 0.0 {
                    0.0
                } else {
                    v.atan2(q.w)
                }
            }
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Projection::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown projection {s:?} (expected mean, absolute, norm or phase)")))
    }
}

/// How many principal components to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcSelection {
    Fixed(usize),
    /// Smallest `p` whose leading eigenvalues reach this share of the total.
    Threshold(f64),
}

impl Default for PcSelection {
    fn default() -> Self {
        PcSelection::Threshold(DEFAULT_PC_THRESHOLD)
    }
}

impl PcSelection {
    pub fn resolve(self, eigenvalues: &[f64], limit: usize) -> Result<usize> {
        match self {
            PcSelection::Fixed(p) => {
                if p == 0 || p > limit {
                    return Err(Error::Parameter(format!("p = {p} must lie in 1..={limit}")));
                }
                Ok(p)
            }
            PcSelection::Threshold(t) => {
                if !(t > 0.0 && t <= 1.0) {
                    return Err(Error::Parameter(format!("eigenvalue threshold {t} must lie in (0, 1]")));
                }
                let total: f64 = eigenvalues.iter().sum();
                let mut acc = 0.0;
                for (k, e) in eigenvalues.iter().take(limit).enumerate() {
                    acc += e;
                    if acc >= t * total * (1.0 - 1e-12) {
                        return Ok(k + 1);
                    }
                }
                Ok(limit)
            }
        }
    }
}

/// Full quaternion per segment: channel 1 scalar, channels 2-4 along i, j, k.
pub fn embed_values(channels: [&[f64]; 4]) -> Result<Vec<Quaternion>> {
    let n = channels[0].len();
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::Validation(format!(
            "channel vectors differ in length: {:?}",
            channels.map(<[f64]>::len)
        )));
    }
    Ok((0..n)
        .map(|t| Quaternion::new(channels[0][t], channels[1][t], channels[2][t], channels[3][t]))
        .collect())
}

/// Pure quaternion per segment (`w = 0`), channels along i, j, k.
pub fn embed_pure_values(channels: [&[f64]; 3]) -> Result<Vec<Quaternion>> {
    let n = channels[0].len();
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::Validation(format!(
            "channel vectors differ in length: {:?}",
            channels.map(<[f64]>::len)
        )));
    }
    Ok((0..n)
        .map(|t| Quaternion::pure(channels[0][t], channels[1][t], channels[2][t]))
        .collect())
}

/// Embeds four band feature vectors in the given order; all must share a band.
pub fn embed(features: [&BandFeatureVector; 4], band: Band) -> Result<Vec<Quaternion>> {
    if let Some(f) = features.iter().find(|f| f.band != band) {
        return Err(Error::Validation(format!(
            "channel {} carries {} features, expected {band}",
            f.channel, f.band
        )));
    }
    embed_values(features.map(|f| f.values.as_slice()))
}

/// Quaternion vector of one recording for a quadruple and band.
pub fn embed_recording(rec: &RecordingFeatures, quadruple: &ChannelQuadruple, band: Band) -> Result<Vec<Quaternion>> {
    let mut cols: [&[f64]; 4] = [&[]; 4];
    for (slot, name) in cols.iter_mut().zip(quadruple.channels()) {
        *slot = rec.get(name, band).ok_or_else(|| {
            Error::Validation(format!(
                "{} session {} has no channel {name}",
                rec.subject_id, rec.session_index
            ))
        })?;
    }
    embed_values(cols)
}

/// Mean, eigenbasis and spectrum of a set of quaternion vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpcaFit {
    pub mean_vector: Vec<Quaternion>,
    /// `N_s x p`.
    pub basis: QuaternionMatrix,
    /// All `N_s` eigenvalues of the covariance, descending.
    pub eigenvalues: Vec<f64>,
    pub p: usize,
    /// Set when `sigma_p` and `sigma_{p+1}` coincide, so `U_p` is not unique.
    pub spectrum_tie: bool,
}

/// Hermitian covariance `(1/m) Q~^H Q~` of centered rows, `N_s x N_s`.
pub fn covariance(centered: &[Vec<Quaternion>]) -> QuaternionMatrix {
    let m = centered.len();
    let n = centered.first().map_or(0, Vec::len);
    let mut c = QuaternionMatrix::zeros(n, n);
    let inv_m = 1.0 / m as f64;
    for a in 0..n {
        for b in a..n {
            let mut s = Quaternion::ZERO;
            for row in centered {
                s += row[a].conj() * row[b];
            }
            let s = s * inv_m;
            if a == b {
                c[(a, a)] = Quaternion::real(s.w);
            } else {
                c[(a, b)] = s;
                c[(b, a)] = s.conj();
            }
        }
    }
    c
}

/// Subtracts the column mean from each row; returns `(mean, centered rows)`.
pub fn center(vectors: &[Vec<Quaternion>]) -> Result<(Vec<Quaternion>, Vec<Vec<Quaternion>>)> {
    let m = vectors.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!("QPCA needs at least 2 training vectors, got {m}")));
    }
    let n = vectors[0].len();
    if n == 0 {
        return Err(Error::InsufficientData("training vectors are empty".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::Shape(format!("training vectors of length {n} and {}", v.len())));
    }
    let mut mean = vec![Quaternion::ZERO; n];
    for v in vectors {
        for (acc, q) in mean.iter_mut().zip(v) {
            *acc += *q;
        }
    }
    let mean: Vec<Quaternion> = mean.into_iter().map(|q| q * (1.0 / m as f64)).collect();
    let centered = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(q, mu)| *q - *mu).collect())
        .collect();
    Ok((mean, centered))
}

/// Fits the mean and the leading `p` eigenvectors; `p <= min(m, N_s)`.
pub fn fit(vectors: &[Vec<Quaternion>], selection: PcSelection) -> Result<QpcaFit> {
    let (mean_vector, centered) = center(vectors)?;
    let scale = vectors.iter().flatten().fold(0.0f64, |s, q| s.max(q.norm()));
    let spread = centered.iter().flatten().fold(0.0f64, |s, q| s.max(q.norm()));
    if spread == 0.0 || spread <= 1e-14 * scale {
        return Err(Error::DegenerateSpectrum("all training vectors are identical".into()));
    }
    let c = covariance(&centered);
    let svd = qsvd(&c)?;
    let limit = vectors.len().min(mean_vector.len());
    let p = selection.resolve(&svd.singular_values, limit)?;
    let eigenvalues = svd.singular_values;
    let spectrum_tie = p < eigenvalues.len() && eigenvalues[p - 1] - eigenvalues[p] <= TIE_TOL * eigenvalues[0];
    Ok(QpcaFit {
        mean_vector,
        basis: svd.u.leading_columns(p)?,
        eigenvalues,
        p,
        spectrum_tie,
    })
}

impl QpcaFit {
    /// The same fit keeping only the first `p` basis columns.
    pub fn truncated(&self, p: usize) -> Result<QpcaFit> {
        if p == 0 || p > self.p {
            return Err(Error::Parameter(format!("p = {p} must lie in 1..={}", self.p)));
        }
        let e = &self.eigenvalues;
        Ok(QpcaFit {
            mean_vector: self.mean_vector.clone(),
            basis: self.basis.leading_columns(p)?,
            eigenvalues: e.clone(),
            p,
            spectrum_tie: p < e.len() && e[p - 1] - e[p] <= TIE_TOL * e[0],
        })
    }

    /// `(v - mean) U_p`, a row vector of length `p`.
    pub fn transform(&self, vector: &[Quaternion]) -> Result<Vec<Quaternion>> {
        if vector.len() != self.mean_vector.len() {
            return Err(Error::Shape(format!(
                "vector of length {} against a model with N_s = {}",
                vector.len(),
                self.mean_vector.len()
            )));
        }
        let centered: Vec<Quaternion> = vector.iter().zip(&self.mean_vector).map(|(q, m)| *q - *m).collect();
        row_times(&centered, &self.basis)
    }

    /// Stacked transforms, `m x p`.
    pub fn transform_all(&self, vectors: &[Vec<Quaternion>]) -> Result<QuaternionMatrix> {
        let rows = vectors.iter().map(|v| self.transform(v)).collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(QuaternionMatrix::zeros(0, self.p));
        }
        QuaternionMatrix::from_rows(&rows)
    }
}

/// Real matrix fed to the classifier, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl RealFeatureMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("feature matrix has non-finite entries".into()));
        }
        Ok(RealFeatureMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Shape(format!("rows of length {cols} and {}", r.len())));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(|r| self.row(r))
    }

    /// The first `p` columns.
    pub fn leading_columns(&self, p: usize) -> Result<Self> {
        if p > self.cols {
            return Err(Error::Parameter(format!("{p} columns requested from {}", self.cols)));
        }
        let entries = self.iter_rows().flat_map(|r| r[..p].iter().copied()).collect();
        Ok(RealFeatureMatrix { rows: self.rows, cols: p, entries })
    }
}

/// Entrywise projection of a quaternion feature matrix.
pub fn project(features: &QuaternionMatrix, method: Projection) -> RealFeatureMatrix {
    RealFeatureMatrix {
        rows: features.rows(),
        cols: features.cols(),
        entries: features.entries().iter().map(|&q| method.apply(q)).collect(),
    }
}

/// A fitted QPCA stage together with the settings that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpcaModel {
    pub band: Band,
    pub quadruple: ChannelQuadruple,
    pub segment_seconds: f64,
    pub p: usize,
    pub projection: Projection,
    pub mean_vector: Vec<Quaternion>,
    pub basis: QuaternionMatrix,
    pub eigenvalues: Vec<f64>,
    #[serde(default)]
    pub spectrum_tie: bool,
}

impl QpcaModel {
    pub fn new(fit: QpcaFit, band: Band, quadruple: ChannelQuadruple, segment_seconds: f64, projection: Projection) -> Self {
        QpcaModel {
            band,
            quadruple,
            segment_seconds,
            p: fit.p,
            projection,
            mean_vector: fit.mean_vector,
            basis: fit.basis,
            eigenvalues: fit.eigenvalues,
            spectrum_tie: fit.spectrum_tie,
        }
    }

    pub fn as_fit(&self) -> QpcaFit {
        QpcaFit {
            mean_vector: self.mean_vector.clone(),
            basis: self.basis.clone(),
            eigenvalues: self.eigenvalues.clone(),
            p: self.p,
            spectrum_tie: self.spectrum_tie,
        }
    }

    pub fn transform(&self, vector: &[Quaternion]) -> Result<Vec<Quaternion>> {
        self.as_fit().transform(vector)
    }

    /// Embeds, transforms and projects a batch of recordings.
    pub fn features(&self, recordings: &[&RecordingFeatures]) -> Result<RealFeatureMatrix> {
        let fit = self.as_fit();
        let vectors = recordings
            .iter()
            .map(|r| embed_recording(r, &self.quadruple, self.band))
            .collect::<Result<Vec<_>>>()?;
        Ok(project(&fit.transform_all(&vectors)?, self.projection))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{hermitian_transpose, matmul};
    use rand::{Rng, SeedableRng};

    fn random_vectors(m: usize, n: usize, seed: u64) -> Vec<Vec<Quaternion>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| Quaternion::new(rng.random(), rng.random(), rng.random(), rng.random()))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn embedding_cases() {
        let c = [0.25; 3];
        let q = embed_values([&c, &c, &c, &c]).unwrap();
        assert!(q.iter().all(|&e| e == Quaternion::new(0.25, 0.25, 0.25, 0.25)));
        let (one, zero) = ([1.0; 2], [0.0; 2]);
        let q = embed_values([&one, &zero, &zero, &zero]).unwrap();
        assert!(q.iter().all(|&e| e == Quaternion::ONE));
        let (a, b) = ([0.1, 0.2], [0.3, 0.4]);
        assert_ne!(embed_values([&a, &b, &zero, &zero]).unwrap(), embed_values([&b, &a, &zero, &zero]).unwrap());
        assert!(embed_values([&a, &b, &zero, &[0.0]]).is_err());
        assert!(embed_pure_values([&a, &b, &a]).unwrap().iter().all(|q| q.is_pure()));
    }

    #[test]
    fn quadruple_validation() {
        assert!("F8,T7,T8,P4".parse::<ChannelQuadruple>().is_ok());
        assert!("F8,T7,T8".parse::<ChannelQuadruple>().is_err());
        assert!("F8,T7,T8,F8".parse::<ChannelQuadruple>().is_err());
        let q: ChannelQuadruple = "T8,F8,T7,P4".parse().unwrap();
        assert_eq!(q.combination(), ["F8", "P4", "T7", "T8"].map(String::from));
        assert_eq!(serde_json::to_string(&q).unwrap(), r#"["T8","F8","T7","P4"]"#);
    }

    #[test]
    fn projections() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(Projection::Mean.apply(q), 2.5);
        assert!((Projection::Norm.apply(q) - 30f64.sqrt()).abs() < 1e-15);
        let s = Quaternion::new(1.0, -1.0, 1.0, -1.0);
        assert_eq!(Projection::Mean.apply(s), 0.0);
        assert_eq!(Projection::Absolute.apply(s), 1.0);
        assert!((Projection::Phase.apply(Quaternion::I) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(Projection::Phase.apply(Quaternion::ZERO), 0.0);
        assert_eq!(Projection::Phase.apply(Quaternion::new(-0.0, 0.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn covariance_is_hermitian_and_trace_matches() {
        let v = random_vectors(12, 7, 1);
        let f = fit(&v, PcSelection::Fixed(7)).unwrap();
        let (_, centered) = center(&v).unwrap();
        let c = covariance(&centered);
        let diff = c.sub(&hermitian_transpose(&c)).unwrap().frobenius_norm();
        assert!(diff <= 1e-12 * c.frobenius_norm());
        let trace: f64 = (0..7).map(|i| c[(i, i)].w).sum();
        let sum: f64 = f.eigenvalues.iter().sum();
        assert!((trace - sum).abs() <= 1e-9 * trace);
        let gram = matmul(&hermitian_transpose(&f.basis), &f.basis).unwrap();
        assert!(gram.sub(&QuaternionMatrix::identity(7)).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn sizes_and_selection() {
        let v = random_vectors(55, 40, 2);
        let f = fit(&v, PcSelection::Fixed(19)).unwrap();
        assert_eq!(f.basis.shape(), (40, 19));
        assert_eq!(f.eigenvalues.len(), 40);
        assert!(fit(&v, PcSelection::Fixed(41)).is_err());
        let t = fit(&v, PcSelection::Threshold(0.9)).unwrap();
        let total: f64 = t.eigenvalues.iter().sum();
        let kept: f64 = t.eigenvalues[..t.p].iter().sum();
        let short: f64 = t.eigenvalues[..t.p - 1].iter().sum();
        assert!(kept >= 0.9 * total * (1.0 - 1e-12) && short < 0.9 * total);
        assert!(fit(&v[..1], PcSelection::Fixed(1)).is_err());
        let same = vec![v[0].clone(); 3];
        assert!(matches!(fit(&same, PcSelection::Fixed(1)), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn rank_one_and_centering() {
        let d = vec![Quaternion::new(1.0, 0.0, 2.0, 0.0), Quaternion::new(0.0, -1.0, 0.0, 1.0), Quaternion::J];
        let mu = [Quaternion::new(0.3, 0.1, 0.0, 0.2); 3];
        let plus: Vec<_> = mu.iter().zip(&d).map(|(a, b)| *a + *b).collect();
        let minus: Vec<_> = mu.iter().zip(&d).map(|(a, b)| *a - *b).collect();
        let f = fit(&[plus.clone(), minus], PcSelection::Fixed(1)).unwrap();
        assert!(f.eigenvalues[1] < 1e-12 * f.eigenvalues[0]);
        // rows act on the left, so u1 spans conj(d) and |d u1| = |d|
        let dn = crate::qlinalg::vector_norm(&d);
        let y = f.transform(&plus).unwrap();
        assert!((y[0].norm() - dn).abs() < 1e-12);
        let conj_d: Vec<Quaternion> = d.iter().map(|q| q.conj()).collect();
        let overlap = crate::qlinalg::inner(&f.basis.column(0), &conj_d).norm();
        assert!((overlap - dn).abs() < 1e-12);
        let zero = f.transform(&f.mean_vector).unwrap();
        assert!(zero.iter().all(|q| q.norm() < 1e-15));
    }

    #[test]
    fn truncation_keeps_leading_columns() {
        let v = random_vectors(10, 6, 3);
        let f = fit(&v, PcSelection::Fixed(5)).unwrap();
        let t = f.truncated(2).unwrap();
        assert_eq!(t.basis, f.basis.leading_columns(2).unwrap());
        let full = f.transform(&v[4]).unwrap();
        assert_eq!(t.transform(&v[4]).unwrap(), full[..2]);
        assert!(f.truncated(6).is_err());
    }

    #[test]
    fn model_json_layout() {
        let v = random_vectors(5, 3, 4);
        let f = fit(&v, PcSelection::Fixed(2)).unwrap();
        let model = QpcaModel::new(f, Band::Alpha, "F8,T7,T8,P4".parse().unwrap(), 1.0, Projection::Mean);
        let json = serde_json::to_value(&model).unwrap();
        for key in ["band", "quadruple", "segment_seconds", "p", "projection", "mean_vector", "basis", "eigenvalues"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["band"], "alpha");
        let back: QpcaModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, model);
    }
}
