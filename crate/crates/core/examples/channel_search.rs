//! Ordered search over every 4-channel tuple of a 6-channel montage.

use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{FeatureSet, PcChoice, PipelineParams};
use qpca_eeg::search::{lobe, rank, run_search};
use qpca_eeg::spectral::Band;

fn main() -> qpca_eeg::Result<()> {
    let montage = ["Fp1", "F8", "T7", "T8", "P4", "O1"];
    let spec = SynthSpec::default().with_channels(&montage);
    let features = FeatureSet::from_recordings(&synthesize_dataset(&spec, 3)?, 1.0)?;
    let montage: Vec<String> = montage.iter().map(|s| s.to_string()).collect();
    let params = PipelineParams { pcs: PcChoice::SweepUpTo(20), ..Default::default() };
    let threads = std::thread::available_parallelism().map_or(1, usize::from);

    let out = run_search(&features, &montage, Band::Alpha, &params, threads)?;
    let report = rank(&out, 5)?;
    println!("{} trials, {} invalid", report.total_trials, report.invalid_trials);
    for c in report.combinations.iter().take(5) {
        let regions: Vec<&str> = c.combination.iter().map(|ch| lobe(ch)).collect();
        println!("#{} {:?} mean acc {:?} {:?}", c.rank, c.combination, c.mean_acc, regions);
    }
    for p in &report.best_permutations {
        println!("trial {} {} acc {:?}", p.trial_index, p.permutation, p.acc);
    }
    Ok(())
}
