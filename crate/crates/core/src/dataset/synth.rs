//! Two-class synthetic EEG built from band-limited sinusoid mixtures plus
//! white noise. Every (subject, session) pair draws from its own seeded stream.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EegRecording, Label, MIN_SAMPLING_RATE_HZ, STANDARD_MONTAGE};
use crate::error::{Error, Result};
use crate::seed;
use crate::spectral::Band;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandAmplitudes {
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl BandAmplitudes {
    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::Delta => self.delta,
            Band::Theta => self.theta,
            Band::Alpha => self.alpha,
            Band::Beta => self.beta,
        }
    }

    pub fn zero() -> Self {
        BandAmplitudes { delta: 0.0, theta: 0.0, alpha: 0.0, beta: 0.0 }
    }
}

/// A fixed-frequency sinusoid added to every channel of every recording.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Overrides the amplitude of one band (and optionally the noise level) on
/// selected channels for recordings of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub class: Label,
    pub channels_affected: Vec<String>,
    pub band: Band,
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub ad_subjects: usize,
    pub non_ad_subjects: usize,
    pub sessions: usize,
    pub channels: Vec<String>,
    pub duration_seconds: f64,
    pub sampling_rate_hz: f64,
    /// Baseline amplitude of each band's sinusoid mixture.
    pub band_amplitudes: BandAmplitudes,
    pub noise_sigma: f64,
    pub components_per_band: usize,
    /// Depth of the slow amplitude envelope `1 + d sin(2 pi f t + phi)`,
    /// shared by all channels of a recording within a band.
    pub modulation_depth: f64,
    /// Log-normal spread of per-subject band gains.
    pub subject_jitter: f64,
    /// Log-normal spread of per-session band gains.
    pub session_jitter: f64,
    pub tones: Vec<Tone>,
    pub profiles: Vec<ClassProfile>,
}

/// Electrodes whose alpha rhythm is attenuated in the default AD class.
pub const DEFAULT_AD_ALPHA_CHANNELS: [&str; 8] = ["F7", "F8", "T7", "T8", "P7", "P8", "Pz", "P4"];

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            ad_subjects: 5,
            non_ad_subjects: 6,
            sessions: 6,
            channels: STANDARD_MONTAGE.iter().map(|s| s.to_string()).collect(),
            duration_seconds: 40.0,
            sampling_rate_hz: 250.0,
            band_amplitudes: BandAmplitudes { delta: 1.0, theta: 0.8, alpha: 1.0, beta: 0.6 },
            noise_sigma: 0.3,
            components_per_band: 3,
            modulation_depth: 0.5,
            subject_jitter: 0.15,
            session_jitter: 0.05,
            tones: Vec::new(),
            profiles: vec![ClassProfile {
                class: Label::Ad,
                channels_affected: DEFAULT_AD_ALPHA_CHANNELS.iter().map(|s| s.to_string()).collect(),
                band: Band::Alpha,
                amplitude: 0.4,
                noise_sigma: None,
            }],
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(format!("synth spec: {msg}")));
        if self.ad_subjects + self.non_ad_subjects == 0 {
            return fail("no subjects".into());
        }
        if self.sessions == 0 {
            return fail("sessions must be at least 1".into());
        }
        if self.channels.is_empty() {
            return fail("no channels".into());
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.channels.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::DuplicateLabel(dup.clone()));
        }
        if !(self.sampling_rate_hz.is_finite() && self.sampling_rate_hz > MIN_SAMPLING_RATE_HZ) {
            return fail(format!("sampling rate must exceed {MIN_SAMPLING_RATE_HZ} Hz"));
        }
        if !(self.duration_seconds.is_finite() && self.duration_seconds * self.sampling_rate_hz >= 2.0) {
            return fail("duration must cover at least two samples".into());
        }
        for band in Band::ALL {
            let a = self.band_amplitudes.get(band);
            if !(a.is_finite() && a >= 0.0) {
                return fail(format!("{band} amplitude {a} must be finite and >= 0"));
            }
        }
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("synth spec: {name} {v} must be finite and >= 0")))
            }
        };
        nonneg("noise_sigma", self.noise_sigma)?;
        nonneg("subject_jitter", self.subject_jitter)?;
        nonneg("session_jitter", self.session_jitter)?;
        if !(0.0..=1.0).contains(&self.modulation_depth) {
            return fail(format!("modulation_depth {} must lie in [0, 1]", self.modulation_depth));
        }
        if self.components_per_band == 0 {
            return fail("components_per_band must be at least 1".into());
        }
        for t in &self.tones {
            nonneg("tone amplitude", t.amplitude)?;
            if !(t.frequency_hz > 0.0 && t.frequency_hz < self.sampling_rate_hz / 2.0) {
                return fail(format!("tone at {} Hz is outside (0, Nyquist)", t.frequency_hz));
            }
        }
        for p in &self.profiles {
            nonneg("profile amplitude", p.amplitude)?;
            if let Some(s) = p.noise_sigma {
                nonneg("profile noise_sigma", s)?;
            }
            if let Some(c) = p.channels_affected.iter().find(|c| !self.channels.contains(c)) {
                return fail(format!("profile channel {c:?} is not in the channel list"));
            }
        }
        Ok(())
    }

    /// The same spec on a channel subset; profile channel lists are narrowed to match.
    pub fn with_channels<S: AsRef<str>>(mut self, channels: &[S]) -> Self {
        self.channels = channels.iter().map(|c| c.as_ref().to_string()).collect();
        for p in &mut self.profiles {
            p.channels_affected.retain(|c| self.channels.contains(c));
        }
        self
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_seconds * self.sampling_rate_hz).round() as usize
    }

    /// Subject ids `S01, S02, ...` with AD subjects first.
    pub fn subjects(&self) -> Vec<(String, Label)> {
        let n = self.ad_subjects + self.non_ad_subjects;
        let width = n.to_string().len().max(2);
        (0..n)
            .map(|i| {
                let label = if i < self.ad_subjects { Label::Ad } else { Label::NonAd };
                (format!("S{:0width$}", i + 1), label)
            })
            .collect()
    }

    fn channel_plan(&self, label: Label, channel: &str) -> (BandAmplitudes, f64) {
        let mut amps = self.band_amplitudes;
        let mut noise = self.noise_sigma;
        for p in self.profiles.iter().filter(|p| p.class == label) {
            if p.channels_affected.iter().any(|c| c == channel) {
                match p.band {
                    Band::Delta => amps.delta = p.amplitude,
                    Band::Theta => amps.theta = p.amplitude,
                    Band::Alpha => amps.alpha = p.amplitude,
                    Band::Beta => amps.beta = p.amplitude,
                }
                if let Some(s) = p.noise_sigma {
                    noise = s;
                }
            }
        }
        (amps, noise)
    }
}

/// Adds `amp * env[t] * sin(omega t + phase)` using a rotation recurrence,
/// re-anchored with exact sin/cos every 512 samples.
fn add_sinusoid(x: &mut [f64], amp: f64, omega: f64, phase: f64, envelope: Option<&[f64]>) {
    let (step_s, step_c) = omega.sin_cos();
    for (block, chunk) in x.chunks_mut(512).enumerate() {
        let start = block * 512;
        let (mut s, mut c) = (omega * start as f64 + phase).sin_cos();
        for (k, v) in chunk.iter_mut().enumerate() {
            let env = envelope.map_or(1.0, |e| e[start + k]);
            *v += amp * env * s;
            (s, c) = (s * step_c + c * step_s, c * step_c - s * step_s);
        }
    }
}

fn log_normal<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (sigma * z).exp()
}

/// Recordings for every subject and session, subject-major. A pure function of
/// `(spec, seed)`.
pub fn synthesize_dataset(spec: &SynthSpec, seed: u64) -> Result<Vec<EegRecording>> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.sampling_rate_hz;
    let subjects = spec.subjects();
    let mut out = Vec::with_capacity(subjects.len() * spec.sessions);

    for (s_idx, (subject_id, label)) in subjects.iter().enumerate() {
        let mut subject_rng = seed::rng(seed, "synth/subject", &[s_idx as u64]);
        let subject_gain: Vec<[f64; 4]> = spec
            .channels
            .iter()
            .map(|_| std::array::from_fn(|_| log_normal(&mut subject_rng, spec.subject_jitter)))
            .collect();
        let plans: Vec<(BandAmplitudes, f64)> =
            spec.channels.iter().map(|c| spec.channel_plan(*label, c)).collect();

        for session in 1..=spec.sessions {
            let mut rng = seed::rng(seed, "synth/session", &[s_idx as u64, session as u64]);
            let session_gain: [f64; 4] = std::array::from_fn(|_| log_normal(&mut rng, spec.session_jitter));
            // one slow envelope per band, common to all channels
            let envelopes: [Vec<f64>; 4] = std::array::from_fn(|_| {
                let (hz, phase): (f64, f64) = (rng.random_range(0.02..0.25), rng.random_range(0.0..2.0 * PI));
                let mut env = vec![1.0; n];
                add_sinusoid(&mut env, spec.modulation_depth, 2.0 * PI * hz / fs, phase, None);
                env
            });

            let mut samples = Vec::with_capacity(spec.channels.len());
            for (c, (amps, noise)) in plans.iter().enumerate() {
                let mut x = vec![0.0; n];
                for band in Band::ALL {
                    let amp = amps.get(band) * subject_gain[c][band.index()] * session_gain[band.index()];
                    let def = band.definition();
                    let envelope = &envelopes[band.index()];
                    let per = amp / (spec.components_per_band as f64).sqrt();
                    for _ in 0..spec.components_per_band {
                        let f = rng.random_range(def.low_hz..def.high_hz);
                        let phase = rng.random_range(0.0..2.0 * PI);
                        if per == 0.0 {
                            continue;
                        }
                        add_sinusoid(&mut x, per, 2.0 * PI * f / fs, phase, Some(envelope));
                    }
                }
                for tone in &spec.tones {
                    let phase = rng.random_range(0.0..2.0 * PI);
                    add_sinusoid(&mut x, tone.amplitude, 2.0 * PI * tone.frequency_hz / fs, phase, None);
                }
                if *noise > 0.0 {
                    for v in x.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *v += noise * z;
                    }
                }
                samples.push(x);
            }
            out.push(EegRecording::new(
                subject_id.clone(),
                session,
                *label,
                fs,
                spec.channels.clone(),
                samples,
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::featurize;

    fn small() -> SynthSpec {
        SynthSpec {
            ad_subjects: 1,
            non_ad_subjects: 1,
            sessions: 2,
            channels: vec!["T7".into(), "T8".into()],
            duration_seconds: 4.0,
            profiles: vec![ClassProfile {
                class: Label::Ad,
                channels_affected: vec!["T7".into()],
                band: Band::Alpha,
                amplitude: 0.4,
                noise_sigma: None,
            }],
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = synthesize_dataset(&small(), 11).unwrap();
        let b = synthesize_dataset(&small(), 11).unwrap();
        let c = synthesize_dataset(&small(), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 4);
        assert_eq!(a[0].label, Label::Ad);
        assert_eq!(a[3].subject_id, "S02");
    }

    #[test]
    fn recurrence_tracks_sine() {
        let mut x = vec![0.0; 5000];
        add_sinusoid(&mut x, 1.5, 0.37, 0.2, None);
        for (t, v) in x.iter().enumerate() {
            assert!((v - 1.5 * (0.37 * t as f64 + 0.2).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn default_dimensions() {
        let spec = SynthSpec::default();
        assert_eq!(spec.n_samples(), 10_000);
        assert_eq!(spec.subjects().len(), 11);
    }

    #[test]
    fn pure_tone_is_all_alpha() {
        let spec = SynthSpec {
            band_amplitudes: BandAmplitudes::zero(),
            noise_sigma: 0.0,
            tones: vec![Tone { frequency_hz: 10.0, amplitude: 1.0 }],
            profiles: Vec::new(),
            ..small()
        };
        let recs = synthesize_dataset(&spec, 1).unwrap();
        for f in featurize(&recs[0], 1.0).unwrap().iter().filter(|f| f.band == Band::Alpha) {
            assert!(f.values.iter().all(|&v| v >= 0.95));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small();
        s.band_amplitudes.alpha = -1.0;
        assert!(matches!(synthesize_dataset(&s, 0), Err(Error::Validation(_))));
        let mut s = small();
        s.profiles[0].channels_affected = vec!["O1".into()];
        assert!(synthesize_dataset(&s, 0).is_err());
        let mut s = small();
        s.modulation_depth = 1.5;
        assert!(synthesize_dataset(&s, 0).is_err());
    }

    #[test]
    fn json_spec_with_defaults() {
        let s: SynthSpec = serde_json::from_str(r#"{"ad_subjects": 2, "non_ad_subjects": 3}"#).unwrap();
        assert_eq!(s.sessions, 6);
        let back: SynthSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
