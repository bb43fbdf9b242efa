//! Relative band power of one synthetic recording.

use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::spectral::{Band, RecordingFeatures};

fn main() -> qpca_eeg::Result<()> {
    let spec = SynthSpec { ad_subjects: 1, non_ad_subjects: 1, ..SynthSpec::default() };
    let recordings = synthesize_dataset(&spec, 7)?;
    for rec in recordings.iter().filter(|r| r.session_index == 1) {
        let f = RecordingFeatures::from_recording(rec, 1.0)?;
        println!("{} ({}), {} segments of 1 s", rec.subject_id, rec.label, f.n_segments());
        for ch in ["F8", "T7", "O1"] {
            let means: Vec<String> = Band::ALL
                .iter()
                .map(|&b| {
                    let v = f.get(ch, b).unwrap();
                    format!("{b} {:.3}", v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect();
            println!("  {ch}: {}", means.join(", "));
        }
    }
    Ok(())
}
