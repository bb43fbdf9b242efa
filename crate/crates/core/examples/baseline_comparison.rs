//! QPCA against real PCA on concatenated channel features.

use qpca_eeg::baseline::compare;
use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{FeatureSet, PcChoice, PipelineParams};
use qpca_eeg::qpca::ChannelQuadruple;
use qpca_eeg::spectral::Band;

fn main() -> qpca_eeg::Result<()> {
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse()?;
    let params = PipelineParams { pcs: PcChoice::SweepUpTo(20), ..Default::default() };
    for seed in 0..3 {
        let features = FeatureSet::from_recordings(&synthesize_dataset(&SynthSpec::default(), seed)?, 1.0)?;
        let c = compare(&features, &quad, Band::Alpha, &params)?;
        println!(
            "seed {seed}: QPCA {:.2}% (p = {}), real PCA {:.2}% (p = {}), features {}",
            c.qpca.metrics.acc.unwrap_or(f64::NAN),
            c.qpca.p_used,
            c.real_pca.metrics.acc.unwrap_or(f64::NAN),
            c.real_pca.p_used,
            &c.feature_checksum[..12]
        );
    }
    Ok(())
}
