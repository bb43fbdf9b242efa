//! Generate a small dataset, write it to disk and load it back.

use qpca_eeg::dataset::{load_dataset, session_split, save_dataset, synthesize_dataset, SynthSpec};

fn main() -> qpca_eeg::Result<()> {
    let spec = SynthSpec { ad_subjects: 2, non_ad_subjects: 2, duration_seconds: 4.0, ..SynthSpec::default() };
    let recordings = synthesize_dataset(&spec, 1)?;
    let dir = std::env::temp_dir().join("qpca_synthetic_example");
    let manifests = save_dataset(&recordings, &dir)?;
    println!("wrote {} recordings to {}", manifests.len(), dir.display());

    let loaded = load_dataset(&dir)?;
    assert_eq!(loaded, recordings);
    let split = session_split(&loaded)?;
    println!("{} training / {} testing recordings", split.training.len(), split.testing.len());
    for r in split.testing(&loaded) {
        println!("  {} session {} {}: {} channels x {} samples", r.subject_id, r.session_index, r.label, r.channel_labels.len(), r.n_samples());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
