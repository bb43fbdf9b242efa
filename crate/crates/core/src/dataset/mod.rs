//! Labelled multichannel EEG recordings: validation, CSV + manifest storage,
//! the session-based train/test split, and synthetic two-class datasets.

mod io;
mod split;
mod synth;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, load_recording, manifest_paths, save_dataset, save_recording, Manifest, STANDARD_MONTAGE_TAG};
pub use split::{session_split, split_by_session, DatasetSplit, SESSIONS_PER_SUBJECT};
pub use synth::{synthesize_dataset, BandAmplitudes, ClassProfile, SynthSpec, Tone};

/// The 19 electrodes of the 10/20 montage, in acquisition order.
pub const STANDARD_MONTAGE: [&str; 19] = [
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7", "C3", "Cz", "C4", "T8", "P7", "P3", "Pz",
    "P4", "P8", "O1", "O2",
];

/// Lowest admissible sampling rate: twice the 30 Hz top of the analysis range.
pub const MIN_SAMPLING_RATE_HZ: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "AD")]
    Ad,
    #[serde(rename = "NonAD")]
    NonAd,
}

impl Label {
    /// `+1` for the positive (AD) class, `-1` otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Ad => 1.0,
            Label::NonAd => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ad => "AD",
            Label::NonAd => "NonAD",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AD" => Ok(Label::Ad),
            "NonAD" => Ok(Label::NonAd),
            other => Err(Error::Validation(format!("unknown label {other:?}"))),
        }
    }
}

pub fn is_standard_label(label: &str) -> bool {
    STANDARD_MONTAGE.contains(&label)
}

/// One validated session: equal-length finite channels with unique labels.
#[derive(Clone, Debug, PartialEq)]
pub struct EegRecording {
    pub subject_id: String,
    pub session_index: usize,
    pub label: Label,
    pub sampling_rate_hz: f64,
    pub channel_labels: Vec<String>,
    /// One time series per channel, same order as `channel_labels`.
    pub samples: Vec<Vec<f64>>,
}

impl EegRecording {
    pub fn new(
        subject_id: impl Into<String>,
        session_index: usize,
        label: Label,
        sampling_rate_hz: f64,
        channel_labels: Vec<String>,
        samples: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let rec = EegRecording {
            subject_id: subject_id.into(),
            session_index,
            label,
            sampling_rate_hz,
            channel_labels,
            samples,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.session_index == 0 {
            return Err(Error::Validation("session_index is 1-based".into()));
        }
        if !(self.sampling_rate_hz.is_finite() && self.sampling_rate_hz > MIN_SAMPLING_RATE_HZ) {
            return Err(Error::Validation(format!(
                "sampling rate {} Hz must exceed {MIN_SAMPLING_RATE_HZ} Hz",
                self.sampling_rate_hz
            )));
        }
        if self.channel_labels.is_empty() {
            return Err(Error::Validation("recording has no channels".into()));
        }
        if self.channel_labels.len() != self.samples.len() {
            return Err(Error::Shape(format!(
                "{} channel labels but {} sample series",
                self.channel_labels.len(),
                self.samples.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &self.channel_labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let n = self.samples[0].len();
        for (label, series) in self.channel_labels.iter().zip(&self.samples) {
            if series.len() != n {
                return Err(Error::Shape(format!(
                    "channel {label} has {} samples, expected {n}",
                    series.len()
                )));
            }
            if series.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("channel {label} has non-finite samples")));
            }
        }
        Ok(())
    }

    /// Rejects labels outside the 19-electrode 10/20 set.
    pub fn validate_standard_montage(&self) -> Result<()> {
        match self.channel_labels.iter().find(|l| !is_standard_label(l)) {
            Some(bad) => Err(Error::UnknownMontageLabel(bad.clone())),
            None => Ok(()),
        }
    }

    /// `N_w`, the per-channel sample count.
    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration_seconds(&self) -> f64 {
        self.n_samples() as f64 / self.sampling_rate_hz
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channel_labels.iter().position(|l| l == label)
    }

    pub fn channel(&self, label: &str) -> Option<&[f64]> {
        self.channel_index(label).map(|i| self.samples[i].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validation_errors() {
        let ok = EegRecording::new("s", 1, Label::Ad, 250.0, labels(&["Cz", "Pz"]), vec![vec![0.0; 4]; 2]);
        assert!(ok.is_ok());
        let dup = EegRecording::new("s", 1, Label::Ad, 250.0, labels(&["Cz", "Cz"]), vec![vec![0.0; 4]; 2]);
        assert!(matches!(dup, Err(Error::DuplicateLabel(l)) if l == "Cz"));
        let ragged = EegRecording::new("s", 1, Label::Ad, 250.0, labels(&["Cz", "Pz"]), vec![vec![0.0; 4], vec![0.0; 3]]);
        assert!(matches!(ragged, Err(Error::Shape(_))));
        let slow = EegRecording::new("s", 1, Label::Ad, 60.0, labels(&["Cz"]), vec![vec![0.0; 4]]);
        assert!(slow.is_err());
        let nan = EegRecording::new("s", 1, Label::Ad, 250.0, labels(&["Cz"]), vec![vec![f64::NAN]]);
        assert!(nan.is_err());
        let odd = EegRecording::new("s", 1, Label::Ad, 250.0, labels(&["Cz", "X1"]), vec![vec![0.0]; 2]).unwrap();
        assert!(matches!(odd.validate_standard_montage(), Err(Error::UnknownMontageLabel(l)) if l == "X1"));
    }

    #[test]
    fn label_strings() {
        assert_eq!("AD".parse::<Label>().unwrap(), Label::Ad);
        assert_eq!("NonAD".parse::<Label>().unwrap(), Label::NonAd);
        assert!("ad".parse::<Label>().is_err());
        assert_eq!(serde_json::to_string(&Label::NonAd).unwrap(), "\"NonAD\"");
    }
}
