//! Segmentation and relative band power.
//!
//! Each segment is mean-removed, windowed with a periodic Hann taper and
//! transformed once; the one-sided PSD is then summed over the bins of each
//! half-open band. Relative power divides by the 1-30 Hz total, so the default
//! bands sum to one for every segment.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dataset::{EegRecording, Label};
use crate::error::{Error, Result};

pub const ANALYSIS_LOW_HZ: f64 = 1.0;
pub const ANALYSIS_HIGH_HZ: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Delta, Band::Theta, Band::Alpha, Band::Beta];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn definition(self) -> BandDefinition {
        let (low_hz, high_hz) = match self {
            Band::Delta => (1.0, 4.0),
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.0, 13.0),
            Band::Beta => (13.0, 30.0),
        };
        BandDefinition { name: self, low_hz, high_hz }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Band::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown band {s:?} (expected delta, theta, alpha or beta)")))
    }
}

/// A half-open frequency interval `[low_hz, high_hz)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: Band,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandDefinition {
    pub fn new(name: Band, low_hz: f64, high_hz: f64) -> Result<Self> {
        if !(low_hz.is_finite() && high_hz.is_finite() && 0.0 <= low_hz && low_hz < high_hz) {
            return Err(Error::Parameter(format!("band [{low_hz}, {high_hz}) is empty or invalid")));
        }
        Ok(BandDefinition { name, low_hz, high_hz })
    }

    pub fn contains(&self, hz: f64) -> bool {
        self.low_hz <= hz && hz < self.high_hz
    }
}

/// delta [1,4), theta [4,8), alpha [8,13), beta [13,30).
pub fn default_bands() -> [BandDefinition; 4] {
    Band::ALL.map(Band::definition)
}

/// Segment count and sample boundaries for a recording of `n_samples`.
///
/// Boundaries sit at `round(k * T_s * fs)`, so a segment length such as
/// 312.5 samples alternates between 312 and 313 and the count is
/// `floor(N_w / (T_s * fs))`. The trailing partial segment is dropped.
pub fn segment_bounds(n_samples: usize, sampling_rate_hz: f64, segment_seconds: f64) -> Result<Vec<(usize, usize)>> {
    if !(segment_seconds.is_finite() && segment_seconds > 0.0) {
        return Err(Error::Parameter(format!("segment length {segment_seconds} s must be positive")));
    }
    let per_segment = segment_seconds * sampling_rate_hz;
    if per_segment < 2.0 {
        return Err(Error::Parameter(format!(
            "segment of {segment_seconds} s holds {per_segment} samples; at least 2 are needed"
        )));
    }
    let count = (n_samples as f64 / per_segment + 1e-9).floor() as usize;
    if count == 0 {
        return Err(Error::Parameter(format!(
            "segment of {segment_seconds} s is longer than the recording ({n_samples} samples at {sampling_rate_hz} Hz)"
        )));
    }
    let edge = |k: usize| ((k as f64 * per_segment).round() as usize).min(n_samples);
    Ok((0..count).map(|k| (edge(k), edge(k + 1))).collect())
}

/// Per channel, the list of segment slices.
pub fn segment(recording: &EegRecording, segment_seconds: f64) -> Result<Vec<Vec<&[f64]>>> {
    let bounds = segment_bounds(recording.n_samples(), recording.sampling_rate_hz, segment_seconds)?;
    Ok(recording
        .samples
        .iter()
        .map(|series| bounds.iter().map(|&(a, b)| &series[a..b]).collect())
        .collect())
}

/// Segment length, FFT and window.
type Plan = (usize, Arc<dyn Fft<f64>>, Vec<f64>);

/// Hann-windowed periodogram with a cached FFT plan per segment length.
pub struct Periodogram {
    planner: FftPlanner<f64>,
    cached: Option<Plan>,
    buffer: Vec<Complex<f64>>,
}

impl Default for Periodogram {
    fn default() -> Self {
        Self::new()
    }
}

impl Periodogram {
    pub fn new() -> Self {
        Periodogram { planner: FftPlanner::new(), cached: None, buffer: Vec::new() }
    }

    fn plan(&mut self, n: usize) -> (Arc<dyn Fft<f64>>, &[f64]) {
        if self.cached.as_ref().is_none_or(|(len, _, _)| *len != n) {
            let fft = self.planner.plan_fft_forward(n);
            let window = (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                .collect();
            self.cached = Some((n, fft, window));
        }
        let (_, fft, window) = self.cached.as_ref().expect("plan cached above");
        (Arc::clone(fft), window)
    }

    /// One-sided PSD (units²/Hz) at bins `k * fs / n`, `k = 0..=n/2`.
    pub fn psd(&mut self, segment: &[f64], sampling_rate_hz: f64) -> Result<Vec<f64>> {
        let n = segment.len();
        if n < 2 {
            return Err(Error::Parameter(format!("segment of {n} samples; at least 2 are needed")));
        }
        let mean = segment.iter().sum::<f64>() / n as f64;
        let mut buffer = std::mem::take(&mut self.buffer);
        let (fft, window) = self.plan(n);
        let window_power: f64 = window.iter().map(|w| w * w).sum();
        buffer.clear();
        buffer.extend(segment.iter().zip(window).map(|(x, w)| Complex::new((x - mean) * w, 0.0)));
        fft.process(&mut buffer);
        let scale = 1.0 / (sampling_rate_hz * window_power);
        let psd = (0..=n / 2)
            .map(|k| {
                let p = buffer[k].norm_sqr() * scale;
                // interior bins stand for both signs of frequency
                if k == 0 || 2 * k == n {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect();
        self.buffer = buffer;
        Ok(psd)
    }

    /// Relative power of each band in `bands`, divided by the 1-30 Hz total.
    pub fn relative_powers<const B: usize>(
        &mut self,
        segment: &[f64],
        sampling_rate_hz: f64,
        bands: &[BandDefinition; B],
    ) -> Result<[f64; B]> {
        let n = segment.len();
        let psd = self.psd(segment, sampling_rate_hz)?;
        let df = sampling_rate_hz / n as f64;
        let mut band_power = [0.0; B];
        let mut total = 0.0;
        for (k, p) in psd.iter().enumerate() {
            let hz = k as f64 * df;
            if (ANALYSIS_LOW_HZ..ANALYSIS_HIGH_HZ).contains(&hz) {
                total += p * df;
            }
            for (acc, band) in band_power.iter_mut().zip(bands) {
                if band.contains(hz) {
                    *acc += p * df;
                }
            }
        }
        let peak = segment.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // a constant segment leaves only rounding residue after mean removal
        if total.is_nan() || total <= 0.0 || total <= (1e-24 * peak * peak / sampling_rate_hz) {
            return Err(Error::DegenerateSegment);
        }
        Ok(band_power.map(|p| (p / total).clamp(0.0, 1.0)))
    }
}

/// `BP_band / BP` for one segment.
pub fn relative_band_power(segment: &[f64], sampling_rate_hz: f64, band: &BandDefinition) -> Result<f64> {
    let [r] = Periodogram::new().relative_powers(segment, sampling_rate_hz, &[*band])?;
    Ok(r)
}

/// Relative power of one channel and band across segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandFeatureVector {
    pub channel: String,
    pub band: Band,
    pub segment_seconds: f64,
    pub values: Vec<f64>,
}

/// Channel-major then band-ordered feature vectors of one recording.
pub fn featurize(recording: &EegRecording, segment_seconds: f64) -> Result<Vec<BandFeatureVector>> {
    let segments = segment(recording, segment_seconds)?;
    let bands = default_bands();
    let mut periodogram = Periodogram::new();
    let mut out = Vec::with_capacity(segments.len() * bands.len());
    for (label, channel_segments) in recording.channel_labels.iter().zip(&segments) {
        let mut per_band = vec![Vec::with_capacity(channel_segments.len()); bands.len()];
        for (s, seg) in channel_segments.iter().enumerate() {
            let powers = periodogram
                .relative_powers(seg, recording.sampling_rate_hz, &bands)
                .map_err(|e| Error::Featurize { channel: label.clone(), segment: s, source: Box::new(e) })?;
            for (values, p) in per_band.iter_mut().zip(powers) {
                values.push(p);
            }
        }
        for (band, values) in bands.iter().zip(per_band) {
            out.push(BandFeatureVector { channel: label.clone(), band: band.name, segment_seconds, values });
        }
    }
    Ok(out)
}

/// Band features of one recording, addressable by channel and band.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordingFeatures {
    pub subject_id: String,
    pub session_index: usize,
    pub label: Label,
    pub segment_seconds: f64,
    pub channels: Vec<String>,
    /// `values[channel][band]`, bands in `Band::ALL` order.
    pub values: Vec<[Vec<f64>; 4]>,
}

impl RecordingFeatures {
    pub fn from_recording(recording: &EegRecording, segment_seconds: f64) -> Result<Self> {
        let mut vectors = featurize(recording, segment_seconds)?.into_iter();
        let values = recording
            .channel_labels
            .iter()
            .map(|_| std::array::from_fn(|_| vectors.next().expect("four bands per channel").values))
            .collect();
        Ok(RecordingFeatures {
            subject_id: recording.subject_id.clone(),
            session_index: recording.session_index,
            label: recording.label,
            segment_seconds,
            channels: recording.channel_labels.clone(),
            values,
        })
    }

    pub fn channel_index(&self, channel: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == channel)
    }

    pub fn get(&self, channel: &str, band: Band) -> Option<&[f64]> {
        self.channel_index(channel).map(|c| self.values[c][band.index()].as_slice())
    }

    /// `N_s`.
    pub fn n_segments(&self) -> usize {
        self.values.first().map_or(0, |b| b[0].len())
    }
}

/// Featurizes every recording in parallel; output order follows the input.
pub fn featurize_dataset(recordings: &[EegRecording], segment_seconds: f64) -> Result<Vec<RecordingFeatures>> {
    recordings
        .par_iter()
        .map(|r| {
            RecordingFeatures::from_recording(r, segment_seconds).map_err(|e| {
                Error::Validation(format!("{} session {}: {e}", r.subject_id, r.session_index))
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CacheRow {
    subject_id: String,
    session_index: usize,
    label: Label,
    channel: String,
    band: Band,
    segment_index: usize,
    value: f64,
}

/// Long-format CSV: one row per (recording, channel, band, segment).
pub fn write_feature_cache<W: Write>(writer: W, features: &[RecordingFeatures]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for rec in features {
        for (channel, bands) in rec.channels.iter().zip(&rec.values) {
            for band in Band::ALL {
                for (segment_index, &value) in bands[band.index()].iter().enumerate() {
                    w.serialize(CacheRow {
                        subject_id: rec.subject_id.clone(),
                        session_index: rec.session_index,
                        label: rec.label,
                        channel: channel.clone(),
                        band,
                        segment_index,
                        value,
                    })?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of `write_feature_cache`; lines starting with `#` are skipped.
pub fn read_feature_cache<R: Read>(reader: R, segment_seconds: f64) -> Result<Vec<RecordingFeatures>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut out: Vec<RecordingFeatures> = Vec::new();
    for row in r.deserialize() {
        let row: CacheRow = row?;
        let same_rec = out
            .last()
            .is_some_and(|f| f.subject_id == row.subject_id && f.session_index == row.session_index);
        if !same_rec {
            out.push(RecordingFeatures {
                subject_id: row.subject_id.clone(),
                session_index: row.session_index,
                label: row.label,
                segment_seconds,
                channels: Vec::new(),
                values: Vec::new(),
            });
        }
        let rec = out.last_mut().expect("pushed above");
        let c = match rec.channel_index(&row.channel) {
            Some(c) => c,
            None => {
                rec.channels.push(row.channel.clone());
                rec.values.push(Default::default());
                rec.channels.len() - 1
            }
        };
        let series = &mut rec.values[c][row.band.index()];
        if row.segment_index != series.len() {
            return Err(Error::Validation(format!(
                "feature cache: {} session {} channel {} band {}: segment {} out of order",
                row.subject_id, row.session_index, row.channel, row.band, row.segment_index
            )));
        }
        series.push(row.value);
    }
    Ok(out)
}
