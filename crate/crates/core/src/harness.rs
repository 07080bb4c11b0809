//! Seeded experiment runner: repeated online passes, per-round average-loss
//! curves, partial-fraction sweeps and multi-algorithm comparisons.
//!
//! Repeat `r` draws its data, stream order and interval labels from seed
//! `seed ^ r` (see [`crate::rng`]); repeats run in parallel and are merged in
//! repeat order, so results do not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::baselines::{mcp_update, prank_update, round_clip, wh_update, MulticlassModel, RegressionModel, DEFAULT_WH_RATE};
use crate::datagen::{mix_partial, read_dataset, synth_generate, LabelType, LabeledDataset};
use crate::error::{Error, Result};
use crate::kernel::{kpril_update, DualRankModel, Kernel};
use crate::mpril::{mpril_init, mpril_update, MultiplicativeModel, DEFAULT_ETA};
use crate::pril::{pril_init, pril_update};
use crate::ranking::{mae_interval_loss, predict_rank, rank_distance, violation_count, IntervalLabel, LinearRankModel};
use crate::rng::{repeat_seed, rng_for, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Pril,
    KernelPril,
    Mpril,
    Prank,
    WidrowHoff,
    McPerceptron,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Pril,
        Algorithm::KernelPril,
        Algorithm::Mpril,
        Algorithm::Prank,
        Algorithm::WidrowHoff,
        Algorithm::McPerceptron,
    ];

    /// Learners that train on the interval labels rather than the true rank.
    pub fn uses_intervals(&self) -> bool {
        matches!(self, Algorithm::Pril | Algorithm::KernelPril | Algorithm::Mpril)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Pril => "pril",
            Algorithm::KernelPril => "kernel-pril",
            Algorithm::Mpril => "mpril",
            Algorithm::Prank => "prank",
            Algorithm::WidrowHoff => "widrow-hoff",
            Algorithm::McPerceptron => "mc-perceptron",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm '{s}'")))
    }
}

/// What each round's loss is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// Violated threshold constraints of the training interval (the count
    /// the update acts on, `z_i (f - theta_i) <= 0`).
    Interval,
    /// Counting interval loss with its literal strictness (`f < theta_i`
    /// left of the interval, `f >= theta_i` from `hi` on).
    IntervalStrict,
    /// `|predicted - true rank|`.
    Exact,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evaluation::Interval => "interval",
            Evaluation::IntervalStrict => "interval-strict",
            Evaluation::Exact => "exact",
        })
    }
}

impl FromStr for Evaluation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Evaluation::Interval),
            "interval-strict" => Ok(Evaluation::IntervalStrict),
            "exact" => Ok(Evaluation::Exact),
            _ => Err(Error::config(format!("unknown evaluation '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum DatasetSource {
    /// Fresh synthetic points per repeat.
    Synthetic,
    /// A dataset CSV as written by [`crate::datagen::write_dataset`].
    File(PathBuf),
    InMemory(Arc<LabeledDataset>),
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Synthetic => f.write_str("synthetic"),
            DatasetSource::File(p) => write!(f, "{}", p.display()),
            DatasetSource::InMemory(_) => f.write_str("<in-memory>"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub kernel: Option<Kernel>,
    pub dataset: DatasetSource,
    pub label_type: LabelType,
    pub fraction_partial: f64,
    pub rounds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub eta: f64,
    pub lr: f64,
    pub evaluation: Evaluation,
    /// Class count for file datasets; inferred from the file when absent.
    pub k: Option<usize>,
    /// Worker threads for repeats; 0 uses every core.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        RunConfig {
            algorithm,
            kernel: None,
            dataset: DatasetSource::Synthetic,
            label_type: LabelType::Type1,
            fraction_partial: 0.75,
            rounds: 2000,
            repeats: 10,
            seed: 0,
            eta: DEFAULT_ETA,
            lr: DEFAULT_WH_RATE,
            evaluation: Evaluation::Interval,
            k: None,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.repeats == 0 {
            return Err(Error::config("rounds and repeats must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.fraction_partial) {
            return Err(Error::config(format!(
                "fraction_partial must lie in [0, 1], got {}",
                self.fraction_partial
            )));
        }
        match (self.algorithm, self.kernel) {
            (Algorithm::KernelPril, None) => {
                return Err(Error::config("kernel-pril needs a kernel"))
            }
            (a, Some(_)) if a != Algorithm::KernelPril => {
                return Err(Error::config(format!("algorithm {a} takes no kernel")))
            }
            _ => {}
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config(format!("lr must be non-negative, got {}", self.lr)));
        }
        if let Some(k) = self.k {
            if k < 2 {
                return Err(Error::config("k must be at least 2"));
            }
        }
        Ok(())
    }

    /// Fully resolved configuration as ordered key/value pairs.
    pub fn manifest(&self) -> Vec<(&'static str, String)> {
        vec![
            ("algorithm", self.algorithm.to_string()),
            ("kernel", self.kernel.map_or("none".into(), |k| k.to_string())),
            ("dataset", self.dataset.to_string()),
            ("label_type", self.label_type.to_string()),
            ("fraction_partial", self.fraction_partial.to_string()),
            ("rounds", self.rounds.to_string()),
            ("repeats", self.repeats.to_string()),
            ("seed", self.seed.to_string()),
            ("eta", self.eta.to_string()),
            ("lr", self.lr.to_string()),
            ("evaluation", self.evaluation.to_string()),
            ("k", self.k.map_or("auto".into(), |k| k.to_string())),
            ("workers", self.workers.to_string()),
            ("rng", "chacha8; repeat seed = seed xor repeat; streams data=0 labels=1 shuffle=2".into()),
        ]
    }
}

/// Losses of one trial, all measured before the learner updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trial {
    pub predicted: usize,
    pub violations: usize,
    pub interval_mae: usize,
}

impl Trial {
    pub fn loss(&self, evaluation: Evaluation, y_true: usize) -> usize {
        match evaluation {
            Evaluation::Interval => self.violations,
            Evaluation::IntervalStrict => self.interval_mae,
            Evaluation::Exact => self.predicted.abs_diff(y_true),
        }
    }
}

/// Any of the supported learners behind one predict-then-update interface.
#[derive(Clone, Debug)]
pub enum OnlineLearner {
    Pril(LinearRankModel),
    KernelPril(DualRankModel),
    Mpril(MultiplicativeModel),
    Prank(LinearRankModel),
    WidrowHoff { model: RegressionModel, k: usize },
    McPerceptron(MulticlassModel),
}

impl OnlineLearner {
    pub fn new(config: &RunConfig, d: usize, k: usize) -> Result<Self> {
        Ok(match config.algorithm {
            Algorithm::Pril => OnlineLearner::Pril(pril_init(d, k)?),
            Algorithm::KernelPril => {
                let kernel = config.kernel.ok_or_else(|| Error::config("kernel-pril needs a kernel"))?;
                OnlineLearner::KernelPril(DualRankModel::new(kernel, d, k)?)
            }
            Algorithm::Mpril => OnlineLearner::Mpril(mpril_init(d, k, config.eta)?),
            Algorithm::Prank => OnlineLearner::Prank(pril_init(d, k)?),
            Algorithm::WidrowHoff => OnlineLearner::WidrowHoff {
                model: RegressionModel::new(d, config.lr)?,
                k,
            },
            Algorithm::McPerceptron => OnlineLearner::McPerceptron(MulticlassModel::new(d, k)?),
        })
    }

    /// Predicts on `x`, records the losses, then learns. Interval learners
    /// train on `label`; the baselines train on `y_true`.
    pub fn trial(&mut self, x: &[f64], label: IntervalLabel, y_true: usize) -> Result<Trial> {
        let from_step = |s: crate::pril::PrilStep| Trial {
            predicted: s.predicted,
            violations: s.violated.len(),
            interval_mae: s.pre_loss_mae,
        };
        let from_rank = |predicted: usize| Trial {
            predicted,
            violations: rank_distance(predicted, label),
            interval_mae: rank_distance(predicted, label),
        };
        match self {
            OnlineLearner::Pril(m) => pril_update(m, x, label).map(from_step),
            OnlineLearner::KernelPril(m) => kpril_update(m, x, label).map(from_step),
            OnlineLearner::Mpril(m) => mpril_update(m, x, label).map(from_step),
            OnlineLearner::Prank(m) => {
                let score = m.score(x)?;
                let theta = m.thresholds();
                let trial = Trial {
                    predicted: predict_rank(score, theta),
                    violations: violation_count(score, theta, label),
                    interval_mae: mae_interval_loss(score, theta, label),
                };
                prank_update(m, x, y_true)?;
                Ok(trial)
            }
            OnlineLearner::WidrowHoff { model, k } => {
                let prediction = wh_update(model, x, y_true)?;
                Ok(from_rank(round_clip(prediction, *k)))
            }
            OnlineLearner::McPerceptron(m) => mcp_update(m, x, y_true).map(from_rank),
        }
    }
}

/// Pointwise average of the running-mean loss curves of every repeat.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSeries {
    /// `avg[t-1]` is the mean over repeats of `(1/t) sum_{s<=t} loss_s`.
    pub avg: Vec<f64>,
    /// Final running mean of each repeat, in repeat order.
    pub finals: Vec<f64>,
    pub final_mean: f64,
    /// Sample standard deviation of `finals`; zero for a single repeat.
    pub final_std: f64,
}

impl MetricSeries {
    fn from_repeats(curves: Vec<Vec<f64>>) -> Self {
        let r = curves.len() as f64;
        let t = curves[0].len();
        let avg = (0..t)
            .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / r)
            .collect();
        let finals: Vec<f64> = curves.iter().map(|c| c[t - 1]).collect();
        let final_mean = finals.iter().sum::<f64>() / r;
        let final_std = if finals.len() > 1 {
            (finals.iter().map(|v| (v - final_mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricSeries {
            avg,
            finals,
            final_mean,
            final_std,
        }
    }

    pub fn final_value(&self) -> f64 {
        *self.avg.last().expect("series is never empty")
    }
}

fn load_source(config: &RunConfig) -> Result<Option<Arc<LabeledDataset>>> {
    match &config.dataset {
        DatasetSource::Synthetic => Ok(None),
        DatasetSource::File(path) => Ok(Some(Arc::new(read_dataset(path, config.k)?))),
        DatasetSource::InMemory(ds) => Ok(Some(Arc::clone(ds))),
    }
}

/// The labeled stream repeat `repeat` trains on: base rows, shuffled,
/// truncated to `rounds`, then relabeled with the configured partial labels.
pub fn repeat_stream(
    config: &RunConfig,
    source: Option<&LabeledDataset>,
    repeat: usize,
) -> Result<LabeledDataset> {
    let seed = repeat_seed(config.seed, repeat);
    let generated;
    let base = match source {
        Some(ds) => ds,
        None => {
            generated = synth_generate(config.rounds, seed)?;
            &generated
        }
    };
    if base.len() < config.rounds {
        return Err(Error::config(format!(
            "{} rounds requested but the dataset has {} rows",
            config.rounds,
            base.len()
        )));
    }
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.shuffle(&mut rng_for(seed, Purpose::Shuffle));
    order.truncate(config.rounds);
    let rows = base.select(&order);
    mix_partial(
        &rows,
        config.fraction_partial,
        config.label_type,
        &mut rng_for(seed, Purpose::Labels),
    )
}

fn run_repeat(config: &RunConfig, source: Option<&LabeledDataset>, repeat: usize) -> Result<Vec<f64>> {
    let stream = repeat_stream(config, source, repeat)?;
    let mut learner = OnlineLearner::new(config, stream.dim(), stream.k())?;
    let mut total = 0usize;
    let mut curve = Vec::with_capacity(stream.len());
    for ((x, label), &y) in stream.stream().zip(stream.true_ranks()) {
        total += learner.trial(x, label, y)?.loss(config.evaluation, y);
        curve.push(total as f64 / (curve.len() + 1) as f64);
    }
    Ok(curve)
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

pub fn run_experiment(config: &RunConfig) -> Result<MetricSeries> {
    config.validate()?;
    let source = load_source(config)?;
    run_with_source(config, source.as_deref())
}

fn run_with_source(config: &RunConfig, source: Option<&LabeledDataset>) -> Result<MetricSeries> {
    let curves = with_workers(config.workers, || {
        (0..config.repeats)
            .into_par_iter()
            .map(|r| run_repeat(config, source, r))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(MetricSeries::from_repeats(curves))
}

/// One run per fraction, all sharing the base seed.
pub fn sweep_fractions(base: &RunConfig, fractions: &[f64]) -> Result<Vec<(f64, MetricSeries)>> {
    base.validate()?;
    if fractions.is_empty() {
        return Err(Error::config("no fractions given"));
    }
    let source = load_source(base)?;
    fractions
        .iter()
        .map(|&f| {
            let config = RunConfig {
                fraction_partial: f,
                ..base.clone()
            };
            config.validate()?;
            Ok((f, run_with_source(&config, source.as_deref())?))
        })
        .collect()
}

/// Runs each algorithm scored against the true rank. Interval learners train
/// on the base config's partial labels; baselines train on exact ranks.
pub fn compare_algorithms(
    base: &RunConfig,
    algorithms: &[Algorithm],
) -> Result<Vec<(Algorithm, MetricSeries)>> {
    if algorithms.is_empty() {
        return Err(Error::config("no algorithms given"));
    }
    let source = load_source(base)?;
    algorithms
        .iter()
        .map(|&algorithm| {
            let kernel = match algorithm {
                Algorithm::KernelPril => base.kernel.or(Some(Kernel::Dot)),
                _ => None,
            };
            let config = RunConfig {
                algorithm,
                kernel,
                evaluation: Evaluation::Exact,
                ..base.clone()
            };
            config.validate()?;
            Ok((algorithm, run_with_source(&config, source.as_deref())?))
        })
        .collect()
}

pub fn write_series<W: Write>(series: &MetricSeries, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["round", "avg_mae"])?;
    for (t, v) in series.avg.iter().enumerate() {
        out.write_record([(t + 1).to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(table: &[(f64, MetricSeries)], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["fraction", "round", "avg_mae"])?;
    for (f, series) in table {
        for (t, v) in series.avg.iter().enumerate() {
            out.write_record([f.to_string(), (t + 1).to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_comparison<W: Write>(table: &[(Algorithm, MetricSeries)], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["algorithm", "round", "avg_mae"])?;
    for (a, series) in table {
        for (t, v) in series.avg.iter().enumerate() {
            out.write_record([a.to_string(), (t + 1).to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `key=value` lines to `<output>.manifest`.
pub fn write_manifest(output: &Path, entries: &[(&str, String)]) -> Result<PathBuf> {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    let path = PathBuf::from(name);
    let mut file = std::fs::File::create(&path)?;
    for (k, v) in entries {
        writeln!(file, "{k}={v}")?;
    }
    Ok(path)
}
