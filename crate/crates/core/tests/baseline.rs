use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpca_eeg::baseline::compare;
use qpca_eeg::dataset::Label;
use qpca_eeg::pipeline::{FeatureSet, PcChoice, PipelineParams};
use qpca_eeg::qpca::ChannelQuadruple;
use qpca_eeg::spectral::{Band, RecordingFeatures};

const CHANNELS: [&str; 4] = ["F8", "T7", "T8", "P4"];

/// 11 subjects x 6 sessions of uniform noise features; `shift` is added to
/// every F8 alpha value of AD subjects.
fn features(seed: u64, shift: f64) -> FeatureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recordings = Vec::new();
    for s in 0..11 {
        let label = if s < 5 { Label::Ad } else { Label::NonAd };
        for session in 1..=6 {
            let values = CHANNELS
                .iter()
                .map(|&ch| {
                    std::array::from_fn(|b| {
                        (0..40)
                            .map(|_| {
                                let base = rng.random_range(0.0..1.0);
                                if ch == "F8" && b == Band::Alpha.index() && label == Label::Ad {
                                    base + shift
                                } else {
                                    base
                                }
                            })
                            .collect()
                    })
                })
                .collect();
            recordings.push(RecordingFeatures {
                subject_id: format!("S{s:02}"),
                session_index: session,
                label,
                segment_seconds: 1.0,
                channels: CHANNELS.iter().map(|c| c.to_string()).collect(),
                values,
            });
        }
    }
    FeatureSet::new(recordings).unwrap()
}

fn accuracies(seed: u64, shift: f64) -> (f64, f64) {
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
    let params = PipelineParams { pcs: PcChoice::Fixed(5), ..Default::default() };
    let c = compare(&features(seed, shift), &quad, Band::Alpha, &params).unwrap();
    (c.qpca.metrics.acc.unwrap(), c.real_pca.metrics.acc.unwrap())
}

#[test]
fn mean_level_difference_is_found_by_both_arms() {
    for seed in 0..3 {
        let (q, r) = accuracies(seed, 2.0);
        assert!(q >= 90.0 && r >= 90.0, "seed {seed}: qpca {q}, real {r}");
    }
}

#[test]
fn no_class_signal_gives_chance_accuracy() {
    let runs: Vec<(f64, f64)> = (100..140).map(|seed| accuracies(seed, 0.0)).collect();
    let n = runs.len() as f64;
    let q = runs.iter().map(|r| r.0).sum::<f64>() / n;
    let r = runs.iter().map(|r| r.1).sum::<f64>() / n;
    assert!((45.0..=65.0).contains(&q), "qpca mean accuracy {q}");
    assert!((45.0..=65.0).contains(&r), "real PCA mean accuracy {r}");
}

#[test]
fn both_arms_see_the_same_features() {
    let quad: ChannelQuadruple = "T7,F8,P4,T8".parse().unwrap();
    let fs = features(7, 0.5);
    let params = PipelineParams { pcs: PcChoice::SweepUpTo(6), ..Default::default() };
    let a = compare(&fs, &quad, Band::Alpha, &params).unwrap();
    let b = compare(&fs, &quad, Band::Alpha, &params).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.feature_checksum.len(), 64);
}
