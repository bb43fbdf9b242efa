//! Exhaustive channel-subset search: every 4-channel combination and each of
//! its 24 orderings, evaluated with the full pipeline.
//!
//! Trials are numbered by enumeration position, run on a bounded rayon pool
//! and collected by index, so output never depends on scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{evaluate, FeatureSet, PipelineParams};
use crate::qpca::ChannelQuadruple;
use crate::spectral::Band;

/// Lexicographic k-combinations of `0..n`.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still advance
        match (0..k).rev().find(|&i| next[i] < self.n - k + i) {
            Some(i) => {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Lexicographic permutations of a sorted slice.
#[derive(Clone, Debug)]
pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Permutations {
    pub fn new(sorted: Vec<usize>) -> Self {
        Permutations { current: Some(sorted) }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut p = out.clone();
        match (0..p.len().saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) {
            Some(i) => {
                let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
                p.swap(i, j);
                p[i + 1..].reverse();
                self.current = Some(p);
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Index tuples of size `k` from `0..n`: combinations in lexicographic order
/// and, when `ordered`, all `k!` orderings of each combination in turn.
pub fn enumerate_indices(n: usize, k: usize, ordered: bool) -> Result<Box<dyn Iterator<Item = Vec<usize>>>> {
    if k > n {
        return Err(Error::Parameter(format!("cannot choose {k} channels from {n}")));
    }
    let combos = Combinations::new(n, k);
    Ok(if ordered {
        Box::new(combos.flat_map(Permutations::new))
    } else {
        Box::new(combos)
    })
}

/// Channel-name tuples, ordered as `enumerate_indices`.
pub fn enumerate<'a>(montage: &'a [String], k: usize, ordered: bool) -> Result<impl Iterator<Item = Vec<String>> + 'a> {
    Ok(enumerate_indices(montage.len(), k, ordered)?.map(move |idx| idx.iter().map(|&i| montage[i].clone()).collect()))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn falling_factorial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| n - i).product()
}

/// Number of tuples `enumerate` yields.
pub fn count(n: usize, k: usize, ordered: bool) -> u64 {
    if ordered {
        falling_factorial(n as u64, k as u64)
    } else {
        binomial(n as u64, k as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: usize,
    pub permutation: ChannelQuadruple,
    pub band: Band,
    pub p_used: Option<usize>,
    pub acc: Option<f64>,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationSummary {
    /// Channels in montage order.
    pub combination: [String; 4],
    pub band: Band,
    /// Means over valid trials; `None` when no trial defines the metric.
    pub mean_acc: Option<f64>,
    pub mean_sen: Option<f64>,
    pub mean_spe: Option<f64>,
    pub valid_trials: usize,
    pub invalid_trials: usize,
    pub best_permutation: Option<ChannelQuadruple>,
    pub best_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutput {
    pub trials: Vec<TrialResult>,
    pub summaries: Vec<CombinationSummary>,
}

impl SearchOutput {
    pub fn invalid_count(&self) -> usize {
        self.trials.iter().filter(|t| !t.valid).count()
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs one trial per ordered 4-tuple of `montage` on `parallelism` threads.
pub fn run_search(
    features: &FeatureSet,
    montage: &[String],
    band: Band,
    params: &PipelineParams,
    parallelism: usize,
) -> Result<SearchOutput> {
    if parallelism == 0 {
        return Err(Error::Parameter("parallelism must be at least 1".into()));
    }
    let tuples: Vec<Vec<String>> = enumerate(montage, 4, true)?.collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let trials: Vec<TrialResult> = pool.install(|| {
        tuples
            .par_iter()
            .enumerate()
            .map(|(trial_index, names)| {
                let permutation = ChannelQuadruple::new(names)?;
                Ok(match evaluate(features, &permutation, band, params) {
                    Ok(out) => TrialResult {
                        trial_index,
                        permutation,
                        band,
                        p_used: Some(out.p_used),
                        acc: out.metrics.acc,
                        sen: out.metrics.sen,
                        spe: out.metrics.spe,
                        valid: true,
                        error: None,
                    },
                    Err(e) => TrialResult {
                        trial_index,
                        permutation,
                        band,
                        p_used: None,
                        acc: None,
                        sen: None,
                        spe: None,
                        valid: false,
                        error: Some(e.to_string()),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summaries = summarize(&trials, montage);
    Ok(SearchOutput { trials, summaries })
}

/// Groups consecutive runs of 24 trials into combination summaries.
pub fn summarize(trials: &[TrialResult], montage: &[String]) -> Vec<CombinationSummary> {
    let position = |c: &String| montage.iter().position(|m| m == c).unwrap_or(usize::MAX);
    trials
        .chunks(24)
        .map(|group| {
            let mut combination = group[0].permutation.channels().clone();
            combination.sort_by_key(position);
            let valid: Vec<&TrialResult> = group.iter().filter(|t| t.valid).collect();
            let best = valid
                .iter()
                .filter(|t| t.acc.is_some())
                .fold(None::<&&TrialResult>, |b, t| match b {
                    Some(b) if b.acc >= t.acc => Some(b),
                    _ => Some(t),
                });
            CombinationSummary {
                combination,
                band: group[0].band,
                mean_acc: mean_of(valid.iter().map(|t| t.acc)),
                mean_sen: mean_of(valid.iter().map(|t| t.sen)),
                mean_spe: mean_of(valid.iter().map(|t| t.spe)),
                valid_trials: valid.len(),
                invalid_trials: group.len() - valid.len(),
                best_permutation: best.map(|t| t.permutation.clone()),
                best_acc: best.and_then(|t| t.acc),
            }
        })
        .collect()
}

/// Scalp region of a 10/20 electrode.
pub fn lobe(channel: &str) -> &'static str {
    match channel {
        "Fp1" | "Fp2" | "F3" | "F4" | "Fz" => "frontal",
        "F7" | "F8" | "T7" | "T8" | "P7" | "P8" => "temporal",
        "C3" | "Cz" | "C4" | "Pz" | "P3" | "P4" => "parietal",
        "O1" | "O2" => "occipital",
        _ => "unknown",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedCombination {
    pub rank: usize,
    pub combination: [String; 4],
    pub lobes: [String; 4],
    pub mean_acc: Option<f64>,
    pub mean_sen: Option<f64>,
    pub mean_spe: Option<f64>,
    pub valid_trials: usize,
    pub best_permutation: Option<ChannelQuadruple>,
    pub best_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPermutation {
    pub trial_index: usize,
    pub permutation: ChannelQuadruple,
    pub acc: Option<f64>,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
    pub p_used: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionCount {
    pub lobe: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedReport {
    pub band: Band,
    pub total_trials: usize,
    pub invalid_trials: usize,
    pub combinations: Vec<RankedCombination>,
    pub best_permutations: Vec<RankedPermutation>,
    /// Lobe membership counted over the channels of the top combinations.
    pub top_regions: Vec<RegionCount>,
}

/// Combinations by mean accuracy (descending, ties in enumeration order) and
/// the `top` best single permutations.
pub fn rank(output: &SearchOutput, top: usize) -> Result<RankedReport> {
    let band = output
        .trials
        .first()
        .map(|t| t.band)
        .ok_or_else(|| Error::Parameter("no trials to rank".into()))?;
    let key = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    let mut order: Vec<usize> = (0..output.summaries.len()).collect();
    order.sort_by(|&a, &b| {
        key(output.summaries[b].mean_acc)
            .total_cmp(&key(output.summaries[a].mean_acc))
            .then(a.cmp(&b))
    });
    let combinations: Vec<RankedCombination> = order
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let s = &output.summaries[i];
            RankedCombination {
                rank: r + 1,
                combination: s.combination.clone(),
                lobes: s.combination.clone().map(|c| lobe(&c).to_string()),
                mean_acc: s.mean_acc,
                mean_sen: s.mean_sen,
                mean_spe: s.mean_spe,
                valid_trials: s.valid_trials,
                best_permutation: s.best_permutation.clone(),
                best_acc: s.best_acc,
            }
        })
        .collect();

    let mut trials: Vec<&TrialResult> = output.trials.iter().filter(|t| t.valid).collect();
    trials.sort_by(|a, b| key(b.acc).total_cmp(&key(a.acc)).then(a.trial_index.cmp(&b.trial_index)));
    let best_permutations = trials
        .iter()
        .take(top)
        .map(|t| RankedPermutation {
            trial_index: t.trial_index,
            permutation: t.permutation.clone(),
            acc: t.acc,
            sen: t.sen,
            spe: t.spe,
            p_used: t.p_used,
        })
        .collect();

    let mut top_regions: Vec<RegionCount> = ["frontal", "temporal", "parietal", "occipital", "unknown"]
        .iter()
        .map(|l| RegionCount { lobe: l.to_string(), count: 0 })
        .collect();
    for c in combinations.iter().take(top) {
        for l in &c.lobes {
            if let Some(rc) = top_regions.iter_mut().find(|rc| &rc.lobe == l) {
                rc.count += 1;
            }
        }
    }
    top_regions.retain(|rc| rc.lobe != "unknown" || rc.count > 0);

    Ok(RankedReport {
        band,
        total_trials: output.trials.len(),
        invalid_trials: output.invalid_count(),
        combinations,
        best_permutations,
        top_regions,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `trial_index,ch1,ch2,ch3,ch4,band,p_used,acc,sen,spe,valid`; undefined values are empty.
pub fn write_results_csv<W: Write>(writer: W, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial_index", "ch1", "ch2", "ch3", "ch4", "band", "p_used", "acc", "sen", "spe", "valid"])?;
    for t in trials {
        let ch = t.permutation.channels();
        w.write_record([
            t.trial_index.to_string(),
            ch[0].clone(),
            ch[1].clone(),
            ch[2].clone(),
            ch[3].clone(),
            t.band.to_string(),
            t.p_used.map(|p| p.to_string()).unwrap_or_default(),
            opt(t.acc),
            opt(t.sen),
            opt(t.spe),
            t.valid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(writer: W, summaries: &[CombinationSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "ch1", "ch2", "ch3", "ch4", "band", "mean_acc", "mean_sen", "mean_spe", "valid_trials", "invalid_trials",
        "best_permutation", "best_acc",
    ])?;
    for s in summaries {
        let c = &s.combination;
        w.write_record([
            c[0].clone(),
            c[1].clone(),
            c[2].clone(),
            c[3].clone(),
            s.band.to_string(),
            opt(s.mean_acc),
            opt(s.mean_sen),
            opt(s.mean_spe),
            s.valid_trials.to_string(),
            s.invalid_trials.to_string(),
            s.best_permutation.as_ref().map(|p| p.to_string()).unwrap_or_default(),
            opt(s.best_acc),
        ])?;
    }
    w.flush()?;
    Ok(())
}
