//! Featurized datasets and the train/evaluate cycle shared by the search,
//! sweep and baseline drivers.

use serde::{Deserialize, Serialize};

use crate::classifier::{svm_fit, ConfusionCounts, LinearSvmModel, Metrics, DEFAULT_C};
use crate::dataset::{split_by_session, DatasetSplit, EegRecording, Label};
use crate::error::{Error, Result};
use crate::qpca::{self, embed_recording, project, ChannelQuadruple, PcSelection, Projection, QpcaModel, RealFeatureMatrix};
use crate::spectral::{featurize_dataset, Band, RecordingFeatures};

/// Number of principal components, either fixed, chosen by eigenvalue share,
/// or the best test accuracy over `1..=L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcChoice {
    Fixed(usize),
    Threshold(f64),
    SweepUpTo(usize),
}

impl Default for PcChoice {
    fn default() -> Self {
        PcChoice::Threshold(qpca::DEFAULT_PC_THRESHOLD)
    }
}

impl PcChoice {
    /// Selection used for the fit, given `min(m, N_s)`.
    fn fit_selection(self, limit: usize) -> Result<PcSelection> {
        match self {
            PcChoice::Fixed(p) => Ok(PcSelection::Fixed(p)),
            PcChoice::Threshold(t) => Ok(PcSelection::Threshold(t)),
            PcChoice::SweepUpTo(0) => Err(Error::Parameter("p-sweep limit must be at least 1".into())),
            PcChoice::SweepUpTo(l) => Ok(PcSelection::Fixed(l.min(limit))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub segment_seconds: f64,
    pub projection: Projection,
    pub pcs: PcChoice,
    pub svm_c: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams { segment_seconds: 1.0, projection: Projection::Mean, pcs: PcChoice::default(), svm_c: DEFAULT_C }
    }
}

/// Band features of a whole dataset plus its session split.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub segment_seconds: f64,
    pub recordings: Vec<RecordingFeatures>,
    pub split: DatasetSplit,
}

impl FeatureSet {
    pub fn new(recordings: Vec<RecordingFeatures>) -> Result<Self> {
        let segment_seconds = recordings
            .first()
            .map(|r| r.segment_seconds)
            .ok_or_else(|| Error::InsufficientData("feature set is empty".into()))?;
        let keys: Vec<(&str, usize, Label)> = recordings
            .iter()
            .map(|r| (r.subject_id.as_str(), r.session_index, r.label))
            .collect();
        let split = split_by_session(&keys)?;
        Ok(FeatureSet { segment_seconds, recordings, split })
    }

    pub fn from_recordings(recordings: &[EegRecording], segment_seconds: f64) -> Result<Self> {
        Self::new(featurize_dataset(recordings, segment_seconds)?)
    }

    pub fn training(&self) -> Vec<&RecordingFeatures> {
        self.split.training.iter().map(|&i| &self.recordings[i]).collect()
    }

    pub fn testing(&self) -> Vec<&RecordingFeatures> {
        self.split.testing.iter().map(|&i| &self.recordings[i]).collect()
    }

    pub fn all(&self) -> Vec<&RecordingFeatures> {
        self.recordings.iter().collect()
    }

    /// Channel labels of the first recording.
    pub fn channels(&self) -> &[String] {
        &self.recordings[0].channels
    }

    pub fn n_segments(&self) -> usize {
        self.recordings[0].n_segments()
    }

    /// The same recordings restricted to `channels`, in the given order.
    pub fn select_channels<S: AsRef<str>>(&self, channels: &[S]) -> Result<FeatureSet> {
        let recordings = self
            .recordings
            .iter()
            .map(|r| {
                let mut out = RecordingFeatures {
                    subject_id: r.subject_id.clone(),
                    session_index: r.session_index,
                    label: r.label,
                    segment_seconds: r.segment_seconds,
                    channels: Vec::new(),
                    values: Vec::new(),
                };
                for name in channels {
                    let name = name.as_ref();
                    let i = r.channel_index(name).ok_or_else(|| {
                        Error::Validation(format!("{} session {} has no channel {name}", r.subject_id, r.session_index))
                    })?;
                    out.channels.push(name.to_string());
                    out.values.push(r.values[i].clone());
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureSet { segment_seconds: self.segment_seconds, recordings, split: self.split.clone() })
    }
}

pub fn labels(recordings: &[&RecordingFeatures]) -> Vec<f64> {
    recordings.iter().map(|r| r.label.sign()).collect()
}

pub fn embed_all(recordings: &[&RecordingFeatures], quadruple: &ChannelQuadruple, band: Band) -> Result<Vec<Vec<crate::Quaternion>>> {
    recordings.iter().map(|r| embed_recording(r, quadruple, band)).collect()
}

/// Outcome of one train/test cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub p_used: usize,
    pub metrics: Metrics,
}

/// Fits an SVM on the leading `p` columns for each candidate `p` and keeps
/// the best test accuracy; ties go to the smaller `p`.
pub fn best_over_p(
    train: &RealFeatureMatrix,
    train_labels: &[f64],
    test: &RealFeatureMatrix,
    test_labels: &[f64],
    candidates: impl IntoIterator<Item = usize>,
    c: f64,
) -> Result<TrialOutcome> {
    let mut best: Option<TrialOutcome> = None;
    for p in candidates {
        let model = svm_fit(&train.leading_columns(p)?, train_labels, c)?;
        let predicted = model.predict(&test.leading_columns(p)?)?;
        let metrics = ConfusionCounts::from_predictions(test_labels, &predicted)?.metrics();
        let better = match &best {
            None => true,
            Some(b) => metrics.acc.unwrap_or(f64::NEG_INFINITY) > b.metrics.acc.unwrap_or(f64::NEG_INFINITY),
        };
        if better {
            best = Some(TrialOutcome { p_used: p, metrics });
        }
    }
    best.ok_or_else(|| Error::Parameter("no principal-component counts to evaluate".into()))
}

/// Train on `train`, evaluate on `test`, with the p rule of `params`.
pub fn evaluate_split(
    train: &[&RecordingFeatures],
    test: &[&RecordingFeatures],
    quadruple: &ChannelQuadruple,
    band: Band,
    params: &PipelineParams,
) -> Result<TrialOutcome> {
    let train_vectors = embed_all(train, quadruple, band)?;
    let test_vectors = embed_all(test, quadruple, band)?;
    let limit = train_vectors.len().min(train_vectors.first().map_or(0, Vec::len));
    let fit = qpca::fit(&train_vectors, params.pcs.fit_selection(limit)?)?;
    let train_x = project(&fit.transform_all(&train_vectors)?, params.projection);
    let test_x = project(&fit.transform_all(&test_vectors)?, params.projection);
    let candidates = match params.pcs {
        PcChoice::SweepUpTo(_) => 1..=fit.p,
        _ => fit.p..=fit.p,
    };
    best_over_p(&train_x, &labels(train), &test_x, &labels(test), candidates, params.svm_c)
}

/// One trial on the dataset's session split.
pub fn evaluate(features: &FeatureSet, quadruple: &ChannelQuadruple, band: Band, params: &PipelineParams) -> Result<TrialOutcome> {
    evaluate_split(&features.training(), &features.testing(), quadruple, band, params)
}

/// QPCA stage and SVM trained together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub qpca: QpcaModel,
    pub svm: LinearSvmModel,
}

impl TrainedPipeline {
    pub fn train(
        train: &[&RecordingFeatures],
        quadruple: &ChannelQuadruple,
        band: Band,
        projection: Projection,
        selection: PcSelection,
        svm_c: f64,
    ) -> Result<Self> {
        let segment_seconds = train
            .first()
            .map(|r| r.segment_seconds)
            .ok_or_else(|| Error::InsufficientData("no training recordings".into()))?;
        let vectors = embed_all(train, quadruple, band)?;
        let fit = qpca::fit(&vectors, selection)?;
        let qpca = QpcaModel::new(fit, band, quadruple.clone(), segment_seconds, projection);
        let x = qpca.features(train)?;
        let svm = svm_fit(&x, &labels(train), svm_c)?;
        Ok(TrainedPipeline { qpca, svm })
    }

    pub fn predict(&self, recordings: &[&RecordingFeatures]) -> Result<Vec<f64>> {
        self.svm.predict(&self.qpca.features(recordings)?)
    }

    pub fn evaluate(&self, recordings: &[&RecordingFeatures]) -> Result<Metrics> {
        let predicted = self.predict(recordings)?;
        Ok(ConfusionCounts::from_predictions(&labels(recordings), &predicted)?.metrics())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize_dataset, SynthSpec};

    fn small_set() -> FeatureSet {
        let spec = SynthSpec { ad_subjects: 3, non_ad_subjects: 3, duration_seconds: 10.0, ..SynthSpec::default() }
            .with_channels(&["F8", "T7", "T8", "P4", "O1"]);
        FeatureSet::from_recordings(&synthesize_dataset(&spec, 4).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn split_and_shapes() {
        let fs = small_set();
        assert_eq!((fs.training().len(), fs.testing().len()), (30, 6));
        assert_eq!(fs.n_segments(), 10);
        let sub = fs.select_channels(&["O1", "F8"]).unwrap();
        assert_eq!(sub.channels(), ["O1", "F8"]);
        assert_eq!(sub.recordings[3].get("F8", Band::Beta), fs.recordings[3].get("F8", Band::Beta));
        assert!(fs.select_channels(&["Cz"]).is_err());
    }

    #[test]
    fn sweep_is_at_least_as_good_as_any_fixed_p() {
        let fs = small_set();
        let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
        let sweep = PipelineParams { pcs: PcChoice::SweepUpTo(5), ..Default::default() };
        let best = evaluate(&fs, &quad, Band::Alpha, &sweep).unwrap();
        assert!((1..=5).contains(&best.p_used));
        for p in 1..=5 {
            let fixed = PipelineParams { pcs: PcChoice::Fixed(p), ..Default::default() };
            let r = evaluate(&fs, &quad, Band::Alpha, &fixed).unwrap();
            assert!(r.metrics.acc <= best.metrics.acc);
            if p == best.p_used {
                assert_eq!(r.metrics, best.metrics);
            }
        }
        assert_eq!(best.metrics.counts.total(), 6);
    }

    #[test]
    fn trained_pipeline_matches_fixed_evaluation() {
        let fs = small_set();
        let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
        let t = TrainedPipeline::train(&fs.training(), &quad, Band::Alpha, Projection::Mean, PcSelection::Fixed(3), 1.0).unwrap();
        let m = t.evaluate(&fs.testing()).unwrap();
        let params = PipelineParams { pcs: PcChoice::Fixed(3), ..Default::default() };
        assert_eq!(m, evaluate(&fs, &quad, Band::Alpha, &params).unwrap().metrics);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<TrainedPipeline>(&json).unwrap(), t);
    }

    #[test]
    fn unknown_channel_is_reported() {
        let fs = small_set();
        let quad: ChannelQuadruple = "F8,T7,T8,Cz".parse().unwrap();
        let err = evaluate(&fs, &quad, Band::Alpha, &PipelineParams::default()).unwrap_err();
        assert!(err.to_string().contains("Cz"));
    }
}
