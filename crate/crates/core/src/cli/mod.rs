//! Command-line surface: argument definitions, resolved run configuration and
//! one function per command.

pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::baseline::compare;
use crate::classifier::{cross_validate_with, stratified_folds, svm_fit, CvConfig, CvReport, Metrics, DEFAULT_C, DEFAULT_FOLDS, DEFAULT_REPEATS};
use crate::connectivity::{build_tensor, distance_report, FitSource, Mode};
use crate::dataset::{load_dataset, manifest_paths, save_dataset, EegRecording, Manifest, SynthSpec};
use crate::error::{Error, Result};
use crate::pipeline::{embed_all, labels, FeatureSet, PcChoice, TrainedPipeline};
use crate::qpca::{self, project, ChannelQuadruple, PcSelection, Projection};
use crate::search::{rank, run_search, write_results_csv, write_summary_csv};
use crate::spectral::{featurize_dataset, read_feature_cache, write_feature_cache, Band};
use crate::sweep::{sweep_parameters, write_sweep_csv, SweepGrid};

use output::{read_csv_config, read_json_content, OutputDir};

pub const DEFAULT_CHANNELS: [&str; 4] = ["F8", "T7", "T8", "P4"];
pub const DEFAULT_SEGMENT_SECONDS: f64 = 1.0;

#[derive(Parser, Debug)]
#[command(name = "qpca", version, about = "Quaternion PCA of EEG band power for Alzheimer's classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Featurize a dataset directory into a band-power cache.
    Features(CommonArgs),
    /// Train QPCA + SVM on sessions 1-5.
    Train(CommonArgs),
    /// Evaluate a trained model on session 6.
    Eval(EvalArgs),
    /// Evaluate every ordered 4-channel tuple.
    Search(SearchArgs),
    /// Connectivity tensors and interclass distances.
    Connectivity(ConnectivityArgs),
    /// Repeated stratified k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Accuracy over a segmentation, projection or component-count grid.
    Sweep(SweepArgs),
    /// QPCA against real PCA on concatenated channels.
    Baseline(CommonArgs),
    /// Write a synthetic two-class dataset.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Dataset directory of `*.manifest.json` files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Feature cache written by `features`.
    #[arg(long, conflicts_with = "data")]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub band: Option<Band>,
    /// Ordered channels, comma-separated (default F8,T7,T8,P4).
    #[arg(long, value_delimiter = ',')]
    pub channels: Option<Vec<String>>,
    #[arg(long)]
    pub segment_seconds: Option<f64>,
    #[arg(long)]
    pub projection: Option<Projection>,
    /// Fixed number of principal components.
    #[arg(long, conflicts_with_all = ["pc_threshold", "pc_sweep"])]
    pub pcs: Option<usize>,
    /// Smallest p whose eigenvalue share reaches T (default 0.9).
    #[arg(long, conflicts_with = "pc_sweep")]
    pub pc_threshold: Option<f64>,
    /// Best test accuracy over p = 1..=L.
    #[arg(long)]
    pub pc_sweep: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_C)]
    pub svm_c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Channels to search over (default: the dataset montage).
    #[arg(long, value_delimiter = ',')]
    pub montage: Option<Vec<String>>,
    /// Entries kept in the ranked report's permutation list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Triple,
    Quadruple,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitOnArg {
    Training,
    All,
}

#[derive(Args, Clone, Debug)]
pub struct ConnectivityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Triple)]
    pub mode: ModeArg,
    /// Recordings the shared basis is fitted on.
    #[arg(long, value_enum, default_value_t = FitOnArg::Training)]
    pub fit_on: FitOnArg,
    /// Channels spanning the tensors (default: the dataset montage).
    #[arg(long, value_delimiter = ',')]
    pub montage: Option<Vec<String>>,
    /// Only write the distance report.
    #[arg(long)]
    pub skip_tensors: bool,
}

#[derive(Args, Clone, Debug)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    SegmentSeconds,
    Projection,
    Pcs,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = SweepAxis::SegmentSeconds)]
    pub axis: SweepAxis,
    /// Grid values, comma-separated (default: the full grid of the axis).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<String>>,
}

#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON synthesis spec; omitted fields take their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub ad_subjects: Option<usize>,
    #[arg(long)]
    pub non_ad_subjects: Option<usize>,
    #[arg(long)]
    pub duration_seconds: Option<f64>,
}

/// Validated parameters of one run. `parallelism` and `out` do not change
/// results and are left out of the echoed config.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    pub band: Band,
    pub channels: Vec<String>,
    pub segment_seconds: f64,
    pub projection: Projection,
    pub pcs: PcChoice,
    pub svm_c: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub options: Map<String, Value>,
    #[serde(skip)]
    pub parallelism: usize,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub explicit: Explicit,
}

/// Which defaulted flags were given on the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Explicit {
    pub band: bool,
    pub channels: bool,
    pub segment_seconds: bool,
    pub projection: bool,
    pub pcs: bool,
}

impl RunConfig {
    pub fn resolve(command: &'static str, args: &CommonArgs) -> Result<Self> {
        let pcs = match (args.pcs, args.pc_threshold, args.pc_sweep) {
            (Some(p), None, None) => PcChoice::Fixed(p),
            (None, Some(t), None) => PcChoice::Threshold(t),
            (None, None, Some(l)) => PcChoice::SweepUpTo(l),
            (None, None, None) => PcChoice::default(),
            _ => return Err(Error::Config("--pcs, --pc-threshold and --pc-sweep are exclusive".into())),
        };
        let parallelism = match args.parallelism {
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, usize::from),
        };
        let cfg = RunConfig {
            command,
            data: args.data.clone(),
            features: args.features.clone(),
            band: args.band.unwrap_or(Band::Alpha),
            channels: args
                .channels
                .clone()
                .unwrap_or_else(|| DEFAULT_CHANNELS.iter().map(|c| c.to_string()).collect()),
            segment_seconds: args.segment_seconds.unwrap_or(DEFAULT_SEGMENT_SECONDS),
            projection: args.projection.unwrap_or(Projection::Mean),
            pcs,
            svm_c: args.svm_c,
            seed: args.seed,
            options: Map::new(),
            parallelism,
            out: args.out.clone(),
            explicit: Explicit {
                band: args.band.is_some(),
                channels: args.channels.is_some(),
                segment_seconds: args.segment_seconds.is_some(),
                projection: args.projection.is_some(),
                pcs: args.pcs.is_some() || args.pc_threshold.is_some() || args.pc_sweep.is_some(),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.segment_seconds.is_finite() && self.segment_seconds > 0.0) {
            return Err(Error::Config(format!("--segment-seconds must be positive, got {}", self.segment_seconds)));
        }
        if !(self.svm_c.is_finite() && self.svm_c > 0.0) {
            return Err(Error::Config(format!("--svm-c must be positive, got {}", self.svm_c)));
        }
        match self.pcs {
            PcChoice::Fixed(0) => return Err(Error::Config("--pcs must be at least 1".into())),
            PcChoice::SweepUpTo(0) => return Err(Error::Config("--pc-sweep must be at least 1".into())),
            PcChoice::Threshold(t) if !(t > 0.0 && t <= 1.0) => {
                return Err(Error::Config(format!("--pc-threshold must lie in (0, 1], got {t}")))
            }
            _ => {}
        }
        if self.parallelism == 0 {
            return Err(Error::Config("--parallelism must be at least 1".into()));
        }
        if self.channels.iter().any(|c| c.trim().is_empty()) {
            return Err(Error::Config("--channels contains an empty name".into()));
        }
        Ok(())
    }

    pub fn quadruple(&self) -> Result<ChannelQuadruple> {
        ChannelQuadruple::new(&self.channels).map_err(|e| Error::Config(format!("--channels: {e}")))
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.options.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

/// What a command produced, for the exit summary.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub command: String,
    pub outputs: Vec<PathBuf>,
    pub lines: Vec<String>,
    /// Trials, grid points or tuples that failed without failing the run.
    pub partial_failures: usize,
}

pub fn run(cli: Cli) -> Result<RunSummary> {
    match cli.command {
        Command::Features(a) => cmd_features(RunConfig::resolve("features", &a)?),
        Command::Train(a) => cmd_train(RunConfig::resolve("train", &a)?),
        Command::Eval(a) => {
            let cfg = RunConfig::resolve("eval", &a.common)?;
            cmd_eval(cfg, &a.model)
        }
        Command::Search(a) => {
            let mut cfg = RunConfig::resolve("search", &a.common)?;
            cfg.option("top", a.top)?;
            if let Some(m) = &a.montage {
                cfg.option("montage", m)?;
            }
            cmd_search(cfg, a.montage.as_deref(), a.top)
        }
        Command::Connectivity(a) => {
            let mut cfg = RunConfig::resolve("connectivity", &a.common)?;
            let mode = match a.mode {
                ModeArg::Triple => Mode::Triple,
                ModeArg::Quadruple => Mode::Quadruple,
            };
            let source = match a.fit_on {
                FitOnArg::Training => FitSource::Training,
                FitOnArg::All => FitSource::All,
            };
            cfg.option("mode", mode)?;
            cfg.option("fit_on", source)?;
            if let Some(m) = &a.montage {
                cfg.option("montage", m)?;
            }
            cfg.option("skip_tensors", a.skip_tensors)?;
            cmd_connectivity(cfg, mode, source, a.montage.as_deref(), a.skip_tensors)
        }
        Command::Crossval(a) => {
            let mut cfg = RunConfig::resolve("crossval", &a.common)?;
            cfg.option("folds", a.folds)?;
            cfg.option("repeats", a.repeats)?;
            cmd_crossval(cfg, a.folds, a.repeats)
        }
        Command::Sweep(a) => {
            let mut cfg = RunConfig::resolve("sweep", &a.common)?;
            let grid = parse_grid(a.axis, a.grid.as_deref())?;
            cfg.option("grid", &grid)?;
            cmd_sweep(cfg, &grid)
        }
        Command::Baseline(a) => cmd_baseline(RunConfig::resolve("baseline", &a)?),
        Command::Synth(a) => {
            let cfg = RunConfig::resolve("synth", &a.common)?;
            cmd_synth(cfg, &a)
        }
    }
}

fn parse_grid(axis: SweepAxis, values: Option<&[String]>) -> Result<SweepGrid> {
    let bad = |v: &str| Error::Config(format!("bad grid value {v:?}"));
    Ok(match (axis, values) {
        (SweepAxis::SegmentSeconds, None) => SweepGrid::default_segments(),
        (SweepAxis::Projection, None) => SweepGrid::default_projections(),
        (SweepAxis::Pcs, None) => SweepGrid::default_pcs(),
        (SweepAxis::SegmentSeconds, Some(v)) => {
            SweepGrid::SegmentSeconds(v.iter().map(|s| s.trim().parse().map_err(|_| bad(s))).collect::<Result<_>>()?)
        }
        (SweepAxis::Projection, Some(v)) => {
            SweepGrid::Projection(v.iter().map(|s| s.trim().parse().map_err(|_| bad(s))).collect::<Result<_>>()?)
        }
        (SweepAxis::Pcs, Some(v)) => {
            SweepGrid::Pcs(v.iter().map(|s| s.trim().parse().map_err(|_| bad(s))).collect::<Result<_>>()?)
        }
    })
}

/// Manifests of a dataset directory plus the CSV files they reference.
fn dataset_inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifests = manifest_paths(dir)?;
    if manifests.is_empty() {
        return Err(Error::Config(format!("no *.manifest.json files in {}", dir.display())));
    }
    let mut out = Vec::with_capacity(2 * manifests.len());
    for m in manifests {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&m)?)
            .map_err(|e| Error::MalformedManifest { path: m.clone(), reason: e.to_string() })?;
        let data = m.parent().unwrap_or(Path::new(".")).join(&manifest.data_file);
        out.push(m);
        out.push(data);
    }
    Ok(out)
}

fn load_recordings(cfg: &RunConfig) -> Result<(Vec<EegRecording>, Vec<PathBuf>)> {
    let dir = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs --data DIR", cfg.command)))?;
    let inputs = dataset_inputs(dir)?;
    Ok((load_dataset(dir)?, inputs))
}

/// Features from `--features` or by featurizing `--data`. A cache's own
/// segmentation interval wins unless `--segment-seconds` contradicts it.
fn load_features(cfg: &mut RunConfig, pool: &rayon::ThreadPool) -> Result<(FeatureSet, Vec<PathBuf>)> {
    if let Some(path) = cfg.features.clone() {
        let cached = read_csv_config(&path)?
            .and_then(|c| c.get("segment_seconds").and_then(Value::as_f64));
        let segment_seconds = match cached {
            Some(s) if cfg.explicit.segment_seconds && s != cfg.segment_seconds => {
                return Err(Error::Config(format!(
                    "{} holds {s} s segments but --segment-seconds is {}",
                    path.display(),
                    cfg.segment_seconds
                )))
            }
            Some(s) => s,
            None => cfg.segment_seconds,
        };
        cfg.segment_seconds = segment_seconds;
        let file = fs::File::open(&path).map_err(|_| Error::MissingFile(path.clone()))?;
        let features = FeatureSet::new(read_feature_cache(file, segment_seconds)?)?;
        return Ok((features, vec![path]));
    }
    let (recordings, inputs) = load_recordings(cfg)?;
    let features = pool.install(|| featurize_dataset(&recordings, cfg.segment_seconds))?;
    Ok((FeatureSet::new(features)?, inputs))
}

fn fit_selection(cfg: &RunConfig) -> Result<PcSelection> {
    match cfg.pcs {
        PcChoice::Fixed(p) => Ok(PcSelection::Fixed(p)),
        PcChoice::Threshold(t) => Ok(PcSelection::Threshold(t)),
        PcChoice::SweepUpTo(_) => Err(Error::Config(format!(
            "--pc-sweep selects p by test accuracy; {} needs --pcs or --pc-threshold",
            cfg.command
        ))),
    }
}

fn finish(out: OutputDir, cfg: &RunConfig, inputs: &[PathBuf], lines: Vec<String>, partial_failures: usize) -> Result<RunSummary> {
    let mut outputs = out.written().to_vec();
    let summary = json!({ "lines": lines, "partial_failures": partial_failures });
    outputs.push(out.finish(cfg.command, inputs, summary)?);
    Ok(RunSummary { command: cfg.command.to_string(), outputs, lines, partial_failures })
}

pub fn cmd_features(mut cfg: RunConfig) -> Result<RunSummary> {
    if cfg.data.is_none() {
        return Err(Error::Config("features needs --data DIR".into()));
    }
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let mut body = Vec::new();
    write_feature_cache(&mut body, &fs_.recordings)?;
    let rows = fs_.recordings.iter().map(|r| r.channels.len() * 4 * r.n_segments()).sum::<usize>();
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    out.write_csv("features.csv", &body)?;
    let lines = vec![format!(
        "{} recordings, {} segments per channel, {rows} feature rows",
        fs_.recordings.len(),
        fs_.n_segments()
    )];
    finish(out, &cfg, &inputs, lines, 0)
}

pub fn cmd_train(mut cfg: RunConfig) -> Result<RunSummary> {
    let quad = cfg.quadruple()?;
    let selection = fit_selection(&cfg)?;
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let model = TrainedPipeline::train(&fs_.training(), &quad, cfg.band, cfg.projection, selection, cfg.svm_c)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    out.write_json("model.json", &model)?;
    let lines = vec![format!(
        "trained on {} recordings: {quad}, {} band, p = {}",
        fs_.split.training.len(),
        cfg.band,
        model.qpca.p
    )];
    finish(out, &cfg, &inputs, lines, 0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub band: Band,
    pub quadruple: ChannelQuadruple,
    pub projection: Projection,
    pub p: usize,
    pub n_test: usize,
    pub metrics: Metrics,
}

pub fn cmd_eval(mut cfg: RunConfig, model_path: &Path) -> Result<RunSummary> {
    let (_, content) = read_json_content(model_path)?;
    let model: TrainedPipeline = serde_json::from_value(content)?;
    let q = &model.qpca;
    if cfg.explicit.band && cfg.band != q.band {
        return Err(Error::Config(format!("model was trained on the {} band, --band is {}", q.band, cfg.band)));
    }
    if cfg.explicit.channels && cfg.channels.as_slice() != q.quadruple.channels() {
        return Err(Error::Config(format!("model uses channels {}, --channels is {}", q.quadruple, cfg.channels.join(","))));
    }
    if cfg.explicit.projection && cfg.projection != q.projection {
        return Err(Error::Config(format!("model uses {} projection, --projection is {}", q.projection, cfg.projection)));
    }
    if cfg.explicit.segment_seconds && cfg.segment_seconds != q.segment_seconds {
        return Err(Error::Config(format!(
            "model expects {} s segments, --segment-seconds is {}",
            q.segment_seconds, cfg.segment_seconds
        )));
    }
    cfg.band = q.band;
    cfg.channels = q.quadruple.channels().to_vec();
    cfg.projection = q.projection;
    cfg.pcs = PcChoice::Fixed(q.p);
    cfg.segment_seconds = q.segment_seconds;
    cfg.explicit.segment_seconds = true;
    let pool = cfg.pool()?;
    let (fs_, mut inputs) = load_features(&mut cfg, &pool)?;
    inputs.insert(0, model_path.to_path_buf());
    let test = fs_.testing();
    let metrics = model.evaluate(&test)?;
    let report = EvalReport {
        band: q.band,
        quadruple: q.quadruple.clone(),
        projection: q.projection,
        p: q.p,
        n_test: test.len(),
        metrics,
    };
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    out.write_json("metrics.json", &report)?;
    let pct = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.2}%"));
    let lines = vec![format!(
        "ACC {} SEN {} SPE {} on {} test recordings",
        pct(metrics.acc),
        pct(metrics.sen),
        pct(metrics.spe),
        test.len()
    )];
    finish(out, &cfg, &inputs, lines, 0)
}

pub fn cmd_search(mut cfg: RunConfig, montage: Option<&[String]>, top: usize) -> Result<RunSummary> {
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let montage: Vec<String> = match montage {
        Some(m) => m.to_vec(),
        None => fs_.channels().to_vec(),
    };
    if montage.len() < 4 {
        return Err(Error::Config(format!("search needs at least 4 channels, got {}", montage.len())));
    }
    let params = crate::pipeline::PipelineParams {
        segment_seconds: cfg.segment_seconds,
        projection: cfg.projection,
        pcs: cfg.pcs,
        svm_c: cfg.svm_c,
    };
    let result = run_search(&fs_, &montage, cfg.band, &params, cfg.parallelism)?;
    let report = rank(&result, top)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    let mut body = Vec::new();
    write_results_csv(&mut body, &result.trials)?;
    out.write_csv("search_results.csv", &body)?;
    body.clear();
    write_summary_csv(&mut body, &result.summaries)?;
    out.write_csv("search_summary.csv", &body)?;
    out.write_json("search_ranked.json", &report)?;
    let invalid = result.invalid_count();
    let mut lines = vec![format!(
        "{} trials over {} combinations, {invalid} invalid",
        result.trials.len(),
        result.summaries.len()
    )];
    if let Some(best) = report.combinations.first() {
        lines.push(format!(
            "best combination {} mean accuracy {}",
            best.combination.join(","),
            best.mean_acc.map_or("undefined".into(), |a| format!("{a:.2}%"))
        ));
    }
    finish(out, &cfg, &inputs, lines, invalid)
}

pub fn cmd_connectivity(
    mut cfg: RunConfig,
    mode: Mode,
    source: FitSource,
    montage: Option<&[String]>,
    skip_tensors: bool,
) -> Result<RunSummary> {
    let report_channels: Vec<String> = if cfg.explicit.channels {
        if cfg.channels.len() != mode.arity() {
            return Err(Error::Config(format!(
                "{mode} mode takes {} channels, --channels has {}",
                mode.arity(),
                cfg.channels.len()
            )));
        }
        cfg.channels.clone()
    } else {
        cfg.channels[..mode.arity()].to_vec()
    };
    cfg.channels = report_channels.clone();
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let bands: Vec<Band> = if cfg.explicit.band { vec![cfg.band] } else { Band::ALL.to_vec() };
    cfg.option("bands", &bands)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    let mut lines = Vec::new();
    let mut missing = 0;
    if !skip_tensors {
        let tensor_set = match montage {
            Some(m) => fs_.select_channels(m)?,
            None => fs_.clone(),
        };
        for &band in &bands {
            let t = build_tensor(&tensor_set, mode, band, source, cfg.parallelism)?;
            missing += t.distance.missing.len();
            lines.push(format!(
                "{band}: {} tuples, {} missing",
                t.distance.entries.len() + t.distance.missing.len(),
                t.distance.missing.len()
            ));
            out.write_json(&format!("connectivity_{mode}_{band}_nonad.json"), &t.non_ad)?;
            out.write_json(&format!("connectivity_{mode}_{band}_ad.json"), &t.ad)?;
            out.write_json(&format!("connectivity_{mode}_{band}_dist.json"), &t.distance)?;
        }
    }
    let report = distance_report(&fs_, &report_channels, mode, source)?;
    for b in &report.bands {
        lines.push(format!("Dist[{}] for {} = {:.6}", b.band, report_channels.join(","), b.dist));
    }
    out.write_json(&format!("distance_report_{mode}.json"), &report)?;
    finish(out, &cfg, &inputs, lines, missing)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossvalOutput {
    pub quadruple: ChannelQuadruple,
    pub band: Band,
    pub n_samples: usize,
    pub report: CvReport,
    /// Fold of each sample in the first repeat.
    pub first_repeat_folds: Vec<usize>,
}

pub fn cmd_crossval(mut cfg: RunConfig, folds: usize, repeats: usize) -> Result<RunSummary> {
    let quad = cfg.quadruple()?;
    let selection = fit_selection(&cfg)?;
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let all = fs_.all();
    let y = labels(&all);
    let vectors = embed_all(&all, &quad, cfg.band)?;
    let cv = CvConfig { k: folds, repeats, seed: cfg.seed };
    let (projection, c) = (cfg.projection, cfg.svm_c);
    let report = pool.install(|| {
        cross_validate_with(&y, cv, |train, test| {
            let tr: Vec<_> = train.iter().map(|&i| vectors[i].clone()).collect();
            let te: Vec<_> = test.iter().map(|&i| vectors[i].clone()).collect();
            let fit = qpca::fit(&tr, selection)?;
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = svm_fit(&project(&fit.transform_all(&tr)?, projection), &ytr, c)?;
            model.predict(&project(&fit.transform_all(&te)?, projection))
        })
    })?;
    let output = CrossvalOutput {
        quadruple: quad,
        band: cfg.band,
        n_samples: y.len(),
        first_repeat_folds: stratified_folds(&y, folds, cfg.seed, 0)?,
        report,
    };
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    out.write_json("crossval.json", &output)?;
    let lines = vec![format!(
        "{folds}-fold x {repeats}: mean score {:.4} (std {:.4})",
        output.report.mean_score, output.report.std_score
    )];
    finish(out, &cfg, &inputs, lines, 0)
}

pub fn cmd_sweep(cfg: RunConfig, grid: &SweepGrid) -> Result<RunSummary> {
    let quad = cfg.quadruple()?;
    if cfg.features.is_some() {
        return Err(Error::Config("sweep re-featurizes recordings; pass --data instead of --features".into()));
    }
    let (recordings, inputs) = load_recordings(&cfg)?;
    let base = crate::pipeline::PipelineParams {
        segment_seconds: cfg.segment_seconds,
        projection: cfg.projection,
        pcs: cfg.pcs,
        svm_c: cfg.svm_c,
    };
    let table = sweep_parameters(&recordings, &quad, cfg.band, &base, grid, cfg.parallelism)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    let mut body = Vec::new();
    write_sweep_csv(&mut body, &table)?;
    out.write_csv(&format!("sweep_{}.csv", table.axis), &body)?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    let lines = vec![format!("{} grid points over {}, {failed} failed", table.rows.len(), table.axis)];
    finish(out, &cfg, &inputs, lines, failed)
}

pub fn cmd_baseline(mut cfg: RunConfig) -> Result<RunSummary> {
    let quad = cfg.quadruple()?;
    let pool = cfg.pool()?;
    let (fs_, inputs) = load_features(&mut cfg, &pool)?;
    let params = crate::pipeline::PipelineParams {
        segment_seconds: cfg.segment_seconds,
        projection: cfg.projection,
        pcs: cfg.pcs,
        svm_c: cfg.svm_c,
    };
    let c = compare(&fs_, &quad, cfg.band, &params)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    out.write_json("baseline.json", &c)?;
    let pct = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.2}%"));
    let lines = vec![
        format!("qpca accuracy {} (p = {})", pct(c.qpca.metrics.acc), c.qpca.p_used),
        format!("real PCA accuracy {} (p = {})", pct(c.real_pca.metrics.acc), c.real_pca.p_used),
    ];
    finish(out, &cfg, &inputs, lines, 0)
}

pub fn cmd_synth(mut cfg: RunConfig, args: &SynthArgs) -> Result<RunSummary> {
    let mut inputs = Vec::new();
    let mut spec = match &args.spec {
        Some(p) => {
            inputs.push(p.clone());
            let text = fs::read_to_string(p).map_err(|_| Error::MissingFile(p.clone()))?;
            serde_json::from_str::<SynthSpec>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    if let Some(n) = args.ad_subjects {
        spec.ad_subjects = n;
    }
    if let Some(n) = args.non_ad_subjects {
        spec.non_ad_subjects = n;
    }
    if let Some(d) = args.duration_seconds {
        spec.duration_seconds = d;
    }
    if cfg.explicit.channels {
        spec = spec.with_channels(&cfg.channels);
    }
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    cfg.option("spec", &spec)?;
    let recordings = crate::dataset::synthesize_dataset(&spec, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.out, cfg.to_json()?)?;
    for path in save_dataset(&recordings, out.root())? {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&path)?)?;
        out.record(path.with_file_name(&manifest.data_file));
        out.record(path);
    }
    out.write_json("synth_spec.json", &json!({ "seed": cfg.seed, "spec": spec }))?;
    let lines = vec![format!(
        "{} recordings ({} AD, {} NonAD subjects x {} sessions), {} channels x {} samples",
        recordings.len(),
        spec.ad_subjects,
        spec.non_ad_subjects,
        spec.sessions,
        spec.channels.len(),
        spec.n_samples()
    )];
    finish(out, &cfg, &inputs, lines, 0)
}
