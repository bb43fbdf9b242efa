//! Connectivity measures from the first quaternion principal component of
//! channel triples (pure quaternions) or quadruples (full quaternions).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::pipeline::FeatureSet;
use crate::qpca::{self, embed_pure_values, embed_values, PcSelection, Projection};
use crate::quaternion::Quaternion;
use crate::search::enumerate_indices;
use crate::spectral::{Band, RecordingFeatures};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Three channels along i, j, k with zero scalar part.
    Triple,
    Quadruple,
}

impl Mode {
    pub fn arity(self) -> usize {
        match self {
            Mode::Triple => 3,
            Mode::Quadruple => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Triple => "triple",
            Mode::Quadruple => "quadruple",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "triple" | "3" | "3d" => Ok(Mode::Triple),
            "quadruple" | "4" | "4d" => Ok(Mode::Quadruple),
            _ => Err(Error::Parameter(format!("unknown connectivity mode {s:?}"))),
        }
    }
}

/// Recordings the shared basis is fitted on, and whose measures are reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitSource {
    #[default]
    Training,
    All,
}

impl FitSource {
    pub fn select(self, features: &FeatureSet) -> Vec<&RecordingFeatures> {
        match self {
            FitSource::Training => features.training(),
            FitSource::All => features.all(),
        }
    }
}

/// Quaternion vector of one recording for a channel tuple of the mode's arity.
pub fn embed_tuple<S: AsRef<str>>(rec: &RecordingFeatures, channels: &[S], band: Band, mode: Mode) -> Result<Vec<Quaternion>> {
    if channels.len() != mode.arity() {
        return Err(Error::Parameter(format!(
            "{mode} mode takes {} channels, got {}",
            mode.arity(),
            channels.len()
        )));
    }
    let cols = channels
        .iter()
        .map(|name| {
            let name = name.as_ref();
            rec.get(name, band).ok_or_else(|| {
                Error::Validation(format!("{} session {} has no channel {name}", rec.subject_id, rec.session_index))
            })
        })
        .collect::<Result<Vec<&[f64]>>>()?;
    match mode {
        Mode::Triple => embed_pure_values([cols[0], cols[1], cols[2]]),
        Mode::Quadruple => embed_values([cols[0], cols[1], cols[2], cols[3]]),
    }
}

/// Mean projection of each sample onto the first principal component of
/// `pooled`. A pooled set without spread yields 0 for samples at its mean.
pub fn measure_values(pooled: &[Vec<Quaternion>], samples: &[Vec<Quaternion>]) -> Result<Vec<f64>> {
    match qpca::fit(pooled, PcSelection::Fixed(1)) {
        Ok(fit) => samples
            .iter()
            .map(|s| Ok(Projection::Mean.apply(fit.transform(s)?[0])))
            .collect(),
        Err(Error::DegenerateSpectrum(reason)) => {
            let mean = &pooled[0];
            if samples.iter().all(|s| s == mean) {
                Ok(vec![0.0; samples.len()])
            } else {
                Err(Error::DegenerateSpectrum(format!("no first component to measure against: {reason}")))
            }
        }
        Err(e) => Err(e),
    }
}

/// `|mean(ns) - mean(ad)|`.
pub fn interclass_distance(ns_measures: &[f64], ad_measures: &[f64]) -> Result<f64> {
    if ns_measures.is_empty() || ad_measures.is_empty() {
        return Err(Error::Parameter(format!(
            "interclass distance needs both classes, got {} NonAD and {} AD measures",
            ns_measures.len(),
            ad_measures.len()
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok((mean(ns_measures) - mean(ad_measures)).abs())
}

/// Per-class measures of one tuple over `recordings`, fitted on them all.
pub fn class_measures<S: AsRef<str>>(
    recordings: &[&RecordingFeatures],
    channels: &[S],
    band: Band,
    mode: Mode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let vectors = recordings
        .iter()
        .map(|r| embed_tuple(r, channels, band, mode))
        .collect::<Result<Vec<_>>>()?;
    let values = measure_values(&vectors, &vectors)?;
    let (mut ns, mut ad) = (Vec::new(), Vec::new());
    for (r, v) in recordings.iter().zip(values) {
        match r.label {
            Label::NonAd => ns.push(v),
            Label::Ad => ad.push(v),
        }
    }
    Ok((ns, ad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub channels: Vec<String>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissingEntry {
    pub channels: Vec<String>,
    pub reason: String,
}

/// What a tensor's values are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Class-mean measure value.
    ClassMean,
    /// Interclass distance.
    Distance,
}

/// Sparse map from ordered distinct channel tuples to values, in
/// lexicographic index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityTensor {
    pub mode: Mode,
    pub band: Band,
    /// `None` for the distance tensor.
    pub class: Option<Label>,
    pub quantity: Quantity,
    pub axis_labels: Vec<String>,
    pub entries: Vec<TensorEntry>,
    #[serde(default)]
    pub missing: Vec<MissingEntry>,
}

impl ConnectivityTensor {
    pub fn get<S: AsRef<str>>(&self, channels: &[S]) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.channels.iter().map(String::as_str).eq(channels.iter().map(AsRef::as_ref)))
            .map(|e| e.value)
    }
}

/// The NonAD, AD and distance tensors of one band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandTensors {
    pub non_ad: ConnectivityTensor,
    pub ad: ConnectivityTensor,
    pub distance: ConnectivityTensor,
}

/// Ordered distinct index tuples of arity `k` in lexicographic order.
pub fn ordered_tuples(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let mut tuples: Vec<Vec<usize>> = enumerate_indices(n, k, true)?.collect();
    tuples.sort_unstable();
    Ok(tuples)
}

/// Connectivity tensors over every ordered tuple of the dataset's montage.
pub fn build_tensor(
    features: &FeatureSet,
    mode: Mode,
    band: Band,
    source: FitSource,
    parallelism: usize,
) -> Result<BandTensors> {
    let axis_labels = features.channels().to_vec();
    let k = mode.arity();
    if axis_labels.len() < k {
        return Err(Error::Parameter(format!(
            "{mode} mode needs at least {k} channels, montage has {}",
            axis_labels.len()
        )));
    }
    if parallelism == 0 {
        return Err(Error::Parameter("parallelism must be at least 1".into()));
    }
    let recordings = source.select(features);
    let tuples = ordered_tuples(axis_labels.len(), k)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(f64, f64, f64)>> = pool.install(|| {
        tuples
            .par_iter()
            .map(|idx| {
                let names: Vec<&str> = idx.iter().map(|&i| axis_labels[i].as_str()).collect();
                let (ns, ad) = class_measures(&recordings, &names, band, mode)?;
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                Ok((mean(&ns), mean(&ad), interclass_distance(&ns, &ad)?))
            })
            .collect()
    });

    let empty = |class, quantity| ConnectivityTensor {
        mode,
        band,
        class,
        quantity,
        axis_labels: axis_labels.clone(),
        entries: Vec::new(),
        missing: Vec::new(),
    };
    let mut out = BandTensors {
        non_ad: empty(Some(Label::NonAd), Quantity::ClassMean),
        ad: empty(Some(Label::Ad), Quantity::ClassMean),
        distance: empty(None, Quantity::Distance),
    };
    for (idx, r) in tuples.iter().zip(results) {
        let channels: Vec<String> = idx.iter().map(|&i| axis_labels[i].clone()).collect();
        match r {
            Ok((ns, ad, dist)) if ns.is_finite() && ad.is_finite() => {
                out.non_ad.entries.push(TensorEntry { channels: channels.clone(), value: ns });
                out.ad.entries.push(TensorEntry { channels: channels.clone(), value: ad });
                out.distance.entries.push(TensorEntry { channels, value: dist });
            }
            other => {
                let reason = match other {
                    Err(e) => e.to_string(),
                    Ok(_) => "non-finite measure".to_string(),
                };
                for t in [&mut out.non_ad, &mut out.ad, &mut out.distance] {
                    t.missing.push(MissingEntry { channels: channels.clone(), reason: reason.clone() });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandDistance {
    pub band: Band,
    pub dist: f64,
    pub non_ad: Vec<f64>,
    pub ad: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    #[serde(rename = "NonAD")]
    pub non_ad: usize,
    #[serde(rename = "AD")]
    pub ad: usize,
}

/// Interclass distance of one channel tuple in every band, with the per-sample
/// measures behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub mode: Mode,
    pub channels: Vec<String>,
    pub source: FitSource,
    pub sample_counts: SampleCounts,
    pub bands: Vec<BandDistance>,
}

impl DistanceReport {
    pub fn dist(&self, band: Band) -> Option<f64> {
        self.bands.iter().find(|b| b.band == band).map(|b| b.dist)
    }

    /// Band with the largest distance; earlier bands win ties.
    pub fn largest(&self) -> Option<Band> {
        self.bands
            .iter()
            .fold(None::<&BandDistance>, |best, b| match best {
                Some(x) if x.dist >= b.dist => Some(x),
                _ => Some(b),
            })
            .map(|b| b.band)
    }
}

pub fn distance_report<S: AsRef<str>>(
    features: &FeatureSet,
    channels: &[S],
    mode: Mode,
    source: FitSource,
) -> Result<DistanceReport> {
    let recordings = source.select(features);
    let bands = Band::ALL
        .iter()
        .map(|&band| {
            let (non_ad, ad) = class_measures(&recordings, channels, band, mode)?;
            Ok(BandDistance { band, dist: interclass_distance(&non_ad, &ad)?, non_ad, ad })
        })
        .collect::<Result<Vec<_>>>()?;
    let ad = recordings.iter().filter(|r| r.label == Label::Ad).count();
    Ok(DistanceReport {
        mode,
        channels: channels.iter().map(|c| c.as_ref().to_string()).collect(),
        source,
        sample_counts: SampleCounts { non_ad: recordings.len() - ad, ad },
        bands,
    })
}
