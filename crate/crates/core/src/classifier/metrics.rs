use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive class is `+1` (AD).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, tn: usize, fp: usize, fn_: usize) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn from_predictions(truth: &[f64], predicted: &[f64]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!("{} labels but {} predictions", truth.len(), predicted.len())));
        }
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t > 0.0, p > 0.0) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn metrics(&self) -> Metrics {
        let pct = |num: usize, den: usize| (den > 0).then(|| 100.0 * num as f64 / den as f64);
        Metrics {
            acc: pct(self.tp + self.tn, self.total()),
            sen: pct(self.tp, self.positives()),
            spe: pct(self.tn, self.negatives()),
            counts: *self,
        }
    }
}

/// Percentages; `None` (JSON `null`) where the denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: Option<f64>,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
    #[serde(flatten)]
    pub counts: ConfusionCounts,
}

pub fn metrics(counts: ConfusionCounts) -> Metrics {
    counts.metrics()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_row() {
        let m = ConfusionCounts::new(5, 5, 1, 0).metrics();
        assert!((m.acc.unwrap() - 90.909).abs() < 0.01);
        assert_eq!(m.sen, Some(100.0));
        assert!((m.spe.unwrap() - 83.333).abs() < 0.01);
    }

    #[test]
    fn degenerate_and_undefined() {
        let m = ConfusionCounts::new(0, 6, 0, 5).metrics();
        assert_eq!((m.sen, m.spe), (Some(0.0), Some(100.0)));
        let m = ConfusionCounts::new(0, 3, 1, 0).metrics();
        assert_eq!(m.sen, None);
        assert_eq!(ConfusionCounts::default().metrics().acc, None);
    }

    #[test]
    fn json_keys() {
        let json = serde_json::to_value(ConfusionCounts::new(1, 2, 0, 0).metrics()).unwrap();
        assert_eq!(json["fn"], 0);
        assert_eq!(json["acc"], 100.0);
        assert!(json["sen"].is_number());
        let m = ConfusionCounts::new(0, 1, 0, 0).metrics();
        assert!(serde_json::to_value(m).unwrap()["sen"].is_null());
    }

    #[test]
    fn counts_from_predictions() {
        let c = ConfusionCounts::from_predictions(&[1.0, 1.0, -1.0, -1.0], &[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 1, 1));
    }
}
