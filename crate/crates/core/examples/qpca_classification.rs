//! Train QPCA + SVM on sessions 1-5 and classify session 6.

use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{evaluate, FeatureSet, PcChoice, PipelineParams, TrainedPipeline};
use qpca_eeg::qpca::{ChannelQuadruple, PcSelection, Projection};
use qpca_eeg::spectral::Band;

fn main() -> qpca_eeg::Result<()> {
    let recordings = synthesize_dataset(&SynthSpec::default(), 42)?;
    let features = FeatureSet::from_recordings(&recordings, 1.0)?;
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse()?;

    let model = TrainedPipeline::train(&features.training(), &quad, Band::Alpha, Projection::Mean, PcSelection::Threshold(0.9), 1.0)?;
    let m = model.evaluate(&features.testing())?;
    println!("p = {} by 90% eigenvalue share: {}", model.qpca.p, serde_json::to_string(&m).unwrap());

    for projection in Projection::ALL {
        let params = PipelineParams { projection, pcs: PcChoice::SweepUpTo(20), ..Default::default() };
        let best = evaluate(&features, &quad, Band::Alpha, &params)?;
        println!("{projection:>8}: best accuracy {:?} at p = {}", best.metrics.acc, best.p_used);
    }
    Ok(())
}
