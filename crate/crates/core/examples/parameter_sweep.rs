//! Accuracy against segmentation interval, projection and component count.

use qpca_eeg::dataset::{synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{PcChoice, PipelineParams};
use qpca_eeg::qpca::ChannelQuadruple;
use qpca_eeg::spectral::Band;
use qpca_eeg::sweep::{sweep_parameters, SweepGrid};

fn main() -> qpca_eeg::Result<()> {
    let spec = SynthSpec::default().with_channels(&["F8", "T7", "T8", "P4"]);
    let recordings = synthesize_dataset(&spec, 42)?;
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse()?;
    let base = PipelineParams { pcs: PcChoice::SweepUpTo(20), ..Default::default() };
    let threads = std::thread::available_parallelism().map_or(1, usize::from);

    for grid in [SweepGrid::default_segments(), SweepGrid::default_projections(), SweepGrid::Pcs((1..=10).collect())] {
        let table = sweep_parameters(&recordings, &quad, Band::Alpha, &base, &grid, threads)?;
        println!("{}:", table.axis);
        for row in &table.rows {
            match &row.error {
                None => println!(
                    "  {:>6}  N_s {:>3}  p {:>2}  acc {:.2}%",
                    row.value,
                    row.n_segments.unwrap_or(0),
                    row.p_used.unwrap_or(0),
                    row.acc.unwrap_or(f64::NAN)
                ),
                Some(e) => println!("  {:>6}  failed: {e}", row.value),
            }
        }
    }
    Ok(())
}
