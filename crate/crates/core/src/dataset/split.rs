use std::collections::BTreeMap;

use super::{EegRecording, Label};
use crate::error::{Error, Result};

/// Sessions recorded per subject under the six-stimulus protocol.
pub const SESSIONS_PER_SUBJECT: usize = 6;

/// Indices into the recording list passed to the splitter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSplit {
    pub training: Vec<usize>,
    pub testing: Vec<usize>,
}

impl DatasetSplit {
    pub fn training<'a>(&self, recs: &'a [EegRecording]) -> Vec<&'a EegRecording> {
        self.training.iter().map(|&i| &recs[i]).collect()
    }

    pub fn testing<'a>(&self, recs: &'a [EegRecording]) -> Vec<&'a EegRecording> {
        self.testing.iter().map(|&i| &recs[i]).collect()
    }
}

/// Sessions 1-5 of every subject train, session 6 tests.
pub fn session_split(recordings: &[EegRecording]) -> Result<DatasetSplit> {
    let keys: Vec<(&str, usize, Label)> = recordings
        .iter()
        .map(|r| (r.subject_id.as_str(), r.session_index, r.label))
        .collect();
    split_by_session(&keys)
}

/// `session_split` over `(subject_id, session_index, label)` keys.
pub fn split_by_session(keys: &[(&str, usize, Label)]) -> Result<DatasetSplit> {
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        by_subject.entry(k.0).or_default().push(i);
    }
    for (subject, idx) in &by_subject {
        let mut sessions: Vec<usize> = idx.iter().map(|&i| keys[i].1).collect();
        sessions.sort_unstable();
        let expected: Vec<usize> = (1..=SESSIONS_PER_SUBJECT).collect();
        if sessions != expected {
            return Err(Error::Split {
                subject: subject.to_string(),
                reason: format!("expected sessions 1..={SESSIONS_PER_SUBJECT}, found {sessions:?}"),
            });
        }
        let label = keys[idx[0]].2;
        if idx.iter().any(|&i| keys[i].2 != label) {
            return Err(Error::Split {
                subject: subject.to_string(),
                reason: "sessions carry different labels".into(),
            });
        }
    }
    let (testing, training) = (0..keys.len()).partition(|&i| keys[i].1 == SESSIONS_PER_SUBJECT);
    Ok(DatasetSplit { training, testing })
}
