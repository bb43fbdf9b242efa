//! One-at-a-time parameter sweeps over segmentation interval, projection
//! method and number of principal components.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EegRecording;
use crate::error::{Error, Result};
use crate::pipeline::{evaluate, FeatureSet, PcChoice, PipelineParams};
use crate::qpca::{ChannelQuadruple, Projection};
use crate::spectral::Band;

/// Segmentation intervals in seconds for a 40 s recording.
pub const SEGMENT_GRID: [f64; 12] = [0.1, 0.2, 0.4, 0.5, 0.8, 1.0, 1.25, 2.0, 2.5, 4.0, 5.0, 10.0];

/// Largest component count in the default `pcs` grid.
pub const MAX_PCS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis", content = "values")]
pub enum SweepGrid {
    SegmentSeconds(Vec<f64>),
    Projection(Vec<Projection>),
    Pcs(Vec<usize>),
}

impl SweepGrid {
    pub fn default_segments() -> Self {
        SweepGrid::SegmentSeconds(SEGMENT_GRID.to_vec())
    }

    pub fn default_projections() -> Self {
        SweepGrid::Projection(Projection::ALL.to_vec())
    }

    pub fn default_pcs() -> Self {
        SweepGrid::Pcs((1..=MAX_PCS).collect())
    }

    pub fn axis(&self) -> &'static str {
        match self {
            SweepGrid::SegmentSeconds(_) => "segment_seconds",
            SweepGrid::Projection(_) => "projection",
            SweepGrid::Pcs(_) => "pcs",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepGrid::SegmentSeconds(v) => v.len(),
            SweepGrid::Projection(v) => v.len(),
            SweepGrid::Pcs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn point(&self, i: usize, base: &PipelineParams) -> (GridValue, PipelineParams) {
        match self {
            SweepGrid::SegmentSeconds(v) => (GridValue::Seconds(v[i]), PipelineParams { segment_seconds: v[i], ..*base }),
            SweepGrid::Projection(v) => (GridValue::Projection(v[i]), PipelineParams { projection: v[i], ..*base }),
            SweepGrid::Pcs(v) => (GridValue::Count(v[i]), PipelineParams { pcs: PcChoice::Fixed(v[i]), ..*base }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Seconds(f64),
    Projection(Projection),
    Count(usize),
}

impl fmt::Display for GridValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridValue::Seconds(s) => write!(f, "{s}"),
            GridValue::Projection(p) => write!(f, "{p}"),
            GridValue::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: GridValue,
    /// Features per channel at this point.
    pub n_segments: Option<usize>,
    pub p_used: Option<usize>,
    pub acc: Option<f64>,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: String,
    pub quadruple: ChannelQuadruple,
    pub band: Band,
    pub base: PipelineParams,
    pub rows: Vec<SweepRow>,
}

/// One train/test cycle per grid point, rows in grid order. Failing points are
/// kept with their diagnostic.
pub fn sweep_parameters(
    recordings: &[EegRecording],
    quadruple: &ChannelQuadruple,
    band: Band,
    base: &PipelineParams,
    grid: &SweepGrid,
    parallelism: usize,
) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::Parameter(format!("empty {} grid", grid.axis())));
    }
    if parallelism == 0 {
        return Err(Error::Parameter("parallelism must be at least 1".into()));
    }
    let shared = match grid {
        SweepGrid::SegmentSeconds(_) => None,
        _ => Some(FeatureSet::from_recordings(recordings, base.segment_seconds)?),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (value, params) = grid.point(i, base);
                let run = || -> Result<(usize, crate::pipeline::TrialOutcome)> {
                    let owned;
                    let features = match &shared {
                        Some(f) => f,
                        None => {
                            owned = FeatureSet::from_recordings(recordings, params.segment_seconds)?;
                            &owned
                        }
                    };
                    Ok((features.n_segments(), evaluate(features, quadruple, band, &params)?))
                };
                match run() {
                    Ok((n, out)) => SweepRow {
                        value,
                        n_segments: Some(n),
                        p_used: Some(out.p_used),
                        acc: out.metrics.acc,
                        sen: out.metrics.sen,
                        spe: out.metrics.spe,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        value,
                        n_segments: None,
                        p_used: None,
                        acc: None,
                        sen: None,
                        spe: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    Ok(SweepTable { axis: grid.axis().to_string(), quadruple: quadruple.clone(), band, base: *base, rows })
}

/// `<axis>,n_segments,p_used,acc,sen,spe,error`; undefined values are empty.
pub fn write_sweep_csv<W: Write>(writer: W, table: &SweepTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([table.axis.as_str(), "n_segments", "p_used", "acc", "sen", "spe", "error"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &table.rows {
        w.write_record([
            r.value.to_string(),
            r.n_segments.map(|n| n.to_string()).unwrap_or_default(),
            r.p_used.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.acc),
            opt(r.sen),
            opt(r.spe),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
