//! Triple-mode connectivity tensors and per-band interclass distances.

use qpca_eeg::connectivity::{build_tensor, distance_report, FitSource, Mode};
use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::FeatureSet;
use qpca_eeg::spectral::Band;

fn main() -> qpca_eeg::Result<()> {
    let spec = SynthSpec::default().with_channels(&["F8", "T7", "T8", "P4", "O1"]);
    let features = FeatureSet::from_recordings(&synthesize_dataset(&spec, 42)?, 1.0)?;

    let t = build_tensor(&features, Mode::Triple, Band::Alpha, FitSource::Training, 1)?;
    println!("{} ordered triples, {} missing", t.distance.entries.len(), t.distance.missing.len());
    let mut top = t.distance.entries.clone();
    top.sort_by(|a, b| b.value.total_cmp(&a.value));
    for e in top.iter().take(5) {
        println!("  {:?}: Dist {:.4}", e.channels, e.value);
    }

    for (mode, channels) in [(Mode::Triple, vec!["T7", "T8", "P4"]), (Mode::Quadruple, vec!["F8", "T7", "T8", "P4"])] {
        let r = distance_report(&features, &channels, mode, FitSource::Training)?;
        let d: Vec<String> = r.bands.iter().map(|b| format!("{} {:.4}", b.band, b.dist)).collect();
        println!("{mode} {channels:?}: {}", d.join(", "));
    }
    Ok(())
}
