//! One CSV per session (header of channel labels, one row per sample instant)
//! plus a JSON sidecar manifest naming the CSV.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{is_standard_label, EegRecording, Label};
use crate::error::{Error, Result};

/// Value of `Manifest::montage` that turns on 10/20 label checking.
pub const STANDARD_MONTAGE_TAG: &str = "standard_10_20";

const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject_id: String,
    pub session_index: usize,
    pub label: Label,
    pub sampling_rate_hz: f64,
    /// Path of the CSV, relative to the manifest's directory.
    pub data_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montage: Option<String>,
}

pub fn load_recording(manifest_path: impl AsRef<Path>) -> Result<EegRecording> {
    let manifest_path = manifest_path.as_ref();
    if !manifest_path.is_file() {
        return Err(Error::MissingFile(manifest_path.to_path_buf()));
    }
    let text = fs::read_to_string(manifest_path)?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::MalformedManifest {
        path: manifest_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let standard = match manifest.montage.as_deref() {
        None => false,
        Some(STANDARD_MONTAGE_TAG) => true,
        Some(other) => {
            return Err(Error::MalformedManifest {
                path: manifest_path.to_path_buf(),
                reason: format!("unknown montage {other:?}"),
            })
        }
    };
    let data_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.data_file);
    let (labels, samples) = read_channels_csv(&data_path, standard)?;
    EegRecording::new(
        manifest.subject_id,
        manifest.session_index,
        manifest.label,
        manifest.sampling_rate_hz,
        labels,
        samples,
    )
}

fn read_channels_csv(path: &Path, standard: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r?,
        None => {
            return Err(Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: "file is empty".into(),
            })
        }
    };
    let labels: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    if labels.iter().any(String::is_empty) {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: "empty channel label".into(),
        });
    }
    if let Some(bad) = labels.iter().find(|l| l.parse::<f64>().is_ok()) {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("numeric channel label {bad:?}; the first row must name the channels"),
        });
    }
    let mut seen = HashSet::new();
    for l in &labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
        if standard && !is_standard_label(l) {
            return Err(Error::UnknownMontageLabel(l.clone()));
        }
    }

    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (i, record) in records.enumerate() {
        let record = record?;
        // rows are 1-based in diagnostics, header is row 1
        let row = i + 2;
        if record.len() != labels.len() {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row,
                expected: labels.len(),
                found: record.len(),
            });
        }
        for ((field, series), label) in record.iter().zip(samples.iter_mut()).zip(&labels) {
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::Validation(format!(
                    "{}: row {row}, channel {label}: cannot parse {field:?}",
                    path.display()
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteSample {
                    path: path.to_path_buf(),
                    row,
                    channel: label.clone(),
                });
            }
            series.push(value);
        }
    }
    Ok((labels, samples))
}

fn file_stem(rec: &EegRecording) -> String {
    format!("{}_ses{:02}", rec.subject_id, rec.session_index)
}

/// Writes `<stem>.csv` and `<stem>.manifest.json` into `dir`; returns the manifest path.
/// Values are written in shortest round-trip form, so loading gives back identical bits.
pub fn save_recording(rec: &EegRecording, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let stem = file_stem(rec);
    let data_file = format!("{stem}.csv");

    let mut writer = csv::Writer::from_path(dir.join(&data_file))?;
    writer.write_record(&rec.channel_labels)?;
    let mut row: Vec<String> = Vec::with_capacity(rec.samples.len());
    for t in 0..rec.n_samples() {
        row.clear();
        row.extend(rec.samples.iter().map(|s| format!("{:?}", s[t])));
        writer.write_record(&row)?;
    }
    writer.flush()?;

    let standard = rec.channel_labels.iter().all(|l| is_standard_label(l));
    let manifest = Manifest {
        subject_id: rec.subject_id.clone(),
        session_index: rec.session_index,
        label: rec.label,
        sampling_rate_hz: rec.sampling_rate_hz,
        data_file,
        montage: standard.then(|| STANDARD_MONTAGE_TAG.to_string()),
    };
    let manifest_path = dir.join(format!("{stem}{MANIFEST_SUFFIX}"));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest_path)
}

pub fn save_dataset(recordings: &[EegRecording], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    recordings.iter().map(|r| save_recording(r, dir.as_ref())).collect()
}

/// Manifest files (`*.manifest.json`) in `dir`, sorted by file name.
pub fn manifest_paths(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(MANIFEST_SUFFIX))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads every recording in `dir`, ordered by subject then session.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<EegRecording>> {
    let mut recs = manifest_paths(dir)?
        .iter()
        .map(load_recording)
        .collect::<Result<Vec<_>>>()?;
    recs.sort_by(|a, b| {
        a.subject_id
            .cmp(&b.subject_id)
            .then(a.session_index.cmp(&b.session_index))
    });
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::STANDARD_MONTAGE;

    fn write_manifest(dir: &Path, data_file: &str, montage: Option<&str>) -> PathBuf {
        let m = Manifest {
            subject_id: "S01".into(),
            session_index: 1,
            label: Label::Ad,
            sampling_rate_hz: 250.0,
            data_file: data_file.into(),
            montage: montage.map(str::to_string),
        };
        let p = dir.join("m.manifest.json");
        fs::write(&p, serde_json::to_string(&m).unwrap()).unwrap();
        p
    }

    #[test]
    fn nineteen_channels_ten_thousand_samples() {
        let dir = tempfile::tempdir().unwrap();
        let labels: Vec<String> = STANDARD_MONTAGE.iter().map(|s| s.to_string()).collect();
        let samples: Vec<Vec<f64>> = (0..19)
            .map(|c| (0..10_000).map(|t| ((c * 7 + t) % 13) as f64 * 0.1 - 0.6).collect())
            .collect();
        let rec = EegRecording::new("S01", 1, Label::NonAd, 250.0, labels, samples).unwrap();
        let path = save_recording(&rec, dir.path()).unwrap();
        let back = load_recording(&path).unwrap();
        assert_eq!(back.n_samples(), 10_000);
        assert_eq!(back, rec);
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(manifest.montage.as_deref(), Some(STANDARD_MONTAGE_TAG));
    }

    #[test]
    fn short_row_is_ragged() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("d.csv"), "Cz,Pz\n1.0,2.0\n3.0\n").unwrap();
        let m = write_manifest(dir.path(), "d.csv", None);
        match load_recording(&m) {
            Err(Error::RaggedRow { row, expected, found, .. }) => {
                assert_eq!((row, expected, found), (3, 2, 1));
            }
            other => panic!("expected ragged row, got {other:?}"),
        }
    }

    #[test]
    fn distinct_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();

        fs::write(p.join("dup.csv"), "Cz,Cz\n1,2\n").unwrap();
        let m = write_manifest(p, "dup.csv", None);
        assert!(matches!(load_recording(&m), Err(Error::DuplicateLabel(l)) if l == "Cz"));

        fs::write(p.join("nan.csv"), "Cz,Pz\n1,NaN\n").unwrap();
        let m = write_manifest(p, "nan.csv", None);
        assert!(matches!(load_recording(&m), Err(Error::NonFiniteSample { row: 2, .. })));

        fs::write(p.join("hdr.csv"), "1.0,2.0\n1,2\n").unwrap();
        let m = write_manifest(p, "hdr.csv", None);
        assert!(matches!(load_recording(&m), Err(Error::MalformedHeader { .. })));

        fs::write(p.join("mont.csv"), "Cz,Xx\n1,2\n").unwrap();
        let m = write_manifest(p, "mont.csv", Some(STANDARD_MONTAGE_TAG));
        assert!(matches!(load_recording(&m), Err(Error::UnknownMontageLabel(l)) if l == "Xx"));
        let m = write_manifest(p, "mont.csv", None);
        assert!(load_recording(&m).is_ok());

        let m = write_manifest(p, "absent.csv", None);
        assert!(matches!(load_recording(&m), Err(Error::MissingFile(_))));
        assert!(matches!(load_recording(p.join("nope.json")), Err(Error::MissingFile(_))));

        fs::write(p.join("bad.manifest.json"), "{\"subject_id\": 3}").unwrap();
        assert!(matches!(
            load_recording(p.join("bad.manifest.json")),
            Err(Error::MalformedManifest { .. })
        ));
    }
}
