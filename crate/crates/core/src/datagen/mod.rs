//! Datasets: the synthetic ranking task, interval-label construction,
//! separable streams for the bound tests, and CSV input/output.

mod csv;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ranking::{dot, is_non_decreasing, predict_rank, Instance, IntervalLabel};
use crate::rng::{rng_for, Purpose};

pub use self::csv::{
    load_ordinal_csv, read_dataset, write_dataset, Binning, CategoricalPolicy, LoadOptions,
    LoadedCsv,
};

/// A labeled stream: instances, their true ranks and the intervals shown to
/// the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    instances: Vec<Instance>,
    true_ranks: Vec<usize>,
    intervals: Vec<IntervalLabel>,
    is_partial: Vec<bool>,
    k: usize,
}

impl LabeledDataset {
    pub fn new(
        instances: Vec<Instance>,
        true_ranks: Vec<usize>,
        intervals: Vec<IntervalLabel>,
        is_partial: Vec<bool>,
        k: usize,
    ) -> Result<Self> {
        let n = instances.len();
        if true_ranks.len() != n || intervals.len() != n || is_partial.len() != n {
            return Err(Error::param("dataset columns have different lengths"));
        }
        if let Some(first) = instances.first() {
            let d = first.len();
            if let Some(bad) = instances.iter().find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.len(),
                });
            }
        }
        for i in 0..n {
            intervals[i].validate(k)?;
            if !intervals[i].contains(true_ranks[i]) {
                return Err(Error::param(format!(
                    "row {}: true rank {} outside [{}, {}]",
                    i + 1,
                    true_ranks[i],
                    intervals[i].lo(),
                    intervals[i].hi()
                )));
            }
            if !is_partial[i] && !intervals[i].is_exact() {
                return Err(Error::param(format!(
                    "row {}: exact row with a non-degenerate interval",
                    i + 1
                )));
            }
        }
        Ok(LabeledDataset {
            instances,
            true_ranks,
            intervals,
            is_partial,
            k,
        })
    }

    /// Every row labeled exactly with its true rank.
    pub fn exact(instances: Vec<Instance>, true_ranks: Vec<usize>, k: usize) -> Result<Self> {
        let intervals = true_ranks
            .iter()
            .map(|&y| IntervalLabel::exact(y, k))
            .collect::<Result<Vec<_>>>()?;
        let n = instances.len();
        Self::new(instances, true_ranks, intervals, vec![false; n], k)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.instances.first().map_or(0, |x| x.len())
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn true_ranks(&self) -> &[usize] {
        &self.true_ranks
    }

    pub fn intervals(&self) -> &[IntervalLabel] {
        &self.intervals
    }

    pub fn is_partial(&self) -> &[bool] {
        &self.is_partial
    }

    pub fn partial_count(&self) -> usize {
        self.is_partial.iter().filter(|&&p| p).count()
    }

    /// `(instance, interval)` pairs in stream order.
    pub fn stream(&self) -> impl Iterator<Item = (&[f64], IntervalLabel)> + '_ {
        self.instances
            .iter()
            .map(|x| &x[..])
            .zip(self.intervals.iter().copied())
    }

    /// Largest squared L2 norm of an instance.
    pub fn r_sq(&self) -> f64 {
        self.instances
            .iter()
            .map(|x| dot(x, x))
            .fold(0.0, f64::max)
    }

    /// Narrowest interval width in the stream.
    pub fn min_width(&self) -> usize {
        self.intervals.iter().map(|l| l.width()).min().unwrap_or(0)
    }

    /// Reorders rows by `order`, keeping only the listed rows.
    pub fn select(&self, order: &[usize]) -> LabeledDataset {
        LabeledDataset {
            instances: order.iter().map(|&i| self.instances[i].clone()).collect(),
            true_ranks: order.iter().map(|&i| self.true_ranks[i]).collect(),
            intervals: order.iter().map(|&i| self.intervals[i]).collect(),
            is_partial: order.iter().map(|&i| self.is_partial[i]).collect(),
            k: self.k,
        }
    }
}

/// Rank cut points of the synthetic task, after the implicit `-inf`.
pub const SYNTH_CUTS: [f64; 4] = [-1.0, -0.1, 0.25, 1.0];
pub const SYNTH_K: usize = 5;
pub const SYNTH_NOISE_SD: f64 = 0.125;

/// Rank of a noisy synthetic score: the number of cut points (including
/// the leading `-inf`) strictly below it.
pub fn synth_rank(value: f64) -> usize {
    1 + SYNTH_CUTS.iter().filter(|&&b| value > b).count()
}

/// `n` points uniform on the unit square, ranked by
/// `10 (x1 - 0.5)(x2 - 0.5) + noise` against [`SYNTH_CUTS`]. All labels exact.
pub fn synth_generate(n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::param("need at least one sample"));
    }
    let mut rng = rng_for(seed, Purpose::Data);
    let noise = Normal::new(0.0, SYNTH_NOISE_SD).expect("valid normal");
    let mut instances = Vec::with_capacity(n);
    let mut ranks = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        let v = 10.0 * (x1 - 0.5) * (x2 - 0.5) + noise.sample(&mut rng);
        ranks.push(synth_rank(v));
        instances.push(Instance::new(vec![x1, x2])?);
    }
    LabeledDataset::exact(instances, ranks, SYNTH_K)
}

/// How partial labels are drawn around the true rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelType {
    /// Width one, randomly `[y-1, y]` or `[y, y+1]`.
    Type1,
    /// Width two, `[y-1, y+1]`.
    Type2,
}

impl fmt::Display for LabelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelType::Type1 => "1",
            LabelType::Type2 => "2",
        })
    }
}

impl FromStr for LabelType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(LabelType::Type1),
            "2" => Ok(LabelType::Type2),
            _ => Err(Error::param(format!("label type must be 1 or 2, got '{s}'"))),
        }
    }
}

fn check_rank(y: usize, k: usize) -> Result<()> {
    if k >= 2 && (1..=k).contains(&y) {
        Ok(())
    } else {
        Err(Error::param(format!("rank {y} outside 1..={k}")))
    }
}

pub fn interval_type1<R: Rng + ?Sized>(y: usize, k: usize, rng: &mut R) -> Result<IntervalLabel> {
    check_rank(y, k)?;
    if y == 1 {
        IntervalLabel::new(1, 2, k)
    } else if y == k {
        IntervalLabel::new(k - 1, k, k)
    } else if rng.random::<bool>() {
        IntervalLabel::new(y - 1, y, k)
    } else {
        IntervalLabel::new(y, y + 1, k)
    }
}

pub fn interval_type2(y: usize, k: usize) -> Result<IntervalLabel> {
    check_rank(y, k)?;
    if y == 1 {
        IntervalLabel::new(1, 2, k)
    } else if y == k {
        IntervalLabel::new(k - 1, k, k)
    } else {
        IntervalLabel::new(y - 1, y + 1, k)
    }
}

pub fn draw_interval<R: Rng + ?Sized>(
    label_type: LabelType,
    y: usize,
    k: usize,
    rng: &mut R,
) -> Result<IntervalLabel> {
    match label_type {
        LabelType::Type1 => interval_type1(y, k, rng),
        LabelType::Type2 => interval_type2(y, k),
    }
}

/// Relabels a uniformly random subset of `round(fraction * n)` rows with
/// partial labels; every other row gets its exact true rank.
pub fn mix_partial<R: Rng + ?Sized>(
    dataset: &LabeledDataset,
    fraction: f64,
    label_type: LabelType,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::param(format!("fraction must lie in [0, 1], got {fraction}")));
    }
    let n = dataset.len();
    let k = dataset.k;
    let amount = (fraction * n as f64).round() as usize;
    let mut is_partial = vec![false; n];
    for i in index::sample(rng, n, amount.min(n)).into_vec() {
        is_partial[i] = true;
    }
    let mut intervals = Vec::with_capacity(n);
    for (&y, &partial) in dataset.true_ranks.iter().zip(&is_partial) {
        intervals.push(if partial {
            draw_interval(label_type, y, k, rng)?
        } else {
            IntervalLabel::exact(y, k)?
        });
    }
    Ok(LabeledDataset {
        instances: dataset.instances.clone(),
        true_ranks: dataset.true_ranks.clone(),
        intervals,
        is_partial,
        k,
    })
}

/// Norm a separating comparator is normalized in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparatorNorm {
    /// `||w||_2^2 + ||theta||_2^2 = 1`; instances uniform in `[-a, a]^d`.
    L2,
    /// `||w||_1 + ||theta||_1 = 1` with every component non-negative.
    L1,
}

/// Recipe for a stream that a fixed comparator separates with margin `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableSpec {
    pub w_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub gamma: f64,
    pub n: usize,
    pub norm: ComparatorNorm,
    /// Instances are drawn uniformly from `[-feature_bound, feature_bound]^d`.
    pub feature_bound: f64,
    /// Total candidate draws allowed before giving up.
    pub max_attempts: usize,
}

impl SeparableSpec {
    pub fn new(w_star: Vec<f64>, theta_star: Vec<f64>, gamma: f64, n: usize) -> Self {
        SeparableSpec {
            w_star,
            theta_star,
            gamma,
            n,
            norm: ComparatorNorm::L2,
            feature_bound: 1.0,
            max_attempts: 1000 * n.max(1),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.w_star.is_empty() || self.theta_star.is_empty() {
            return Err(Error::param("comparator needs d >= 1 and k >= 2"));
        }
        if !is_non_decreasing(&self.theta_star) {
            return Err(Error::param("comparator thresholds must be non-decreasing"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::param("margin must be positive"));
        }
        if !(self.feature_bound > 0.0 && self.feature_bound.is_finite()) {
            return Err(Error::param("feature bound must be positive"));
        }
        let params = self.w_star.iter().chain(&self.theta_star);
        let norm = match self.norm {
            ComparatorNorm::L2 => params.map(|v| v * v).sum::<f64>(),
            ComparatorNorm::L1 => {
                if self.w_star.iter().chain(&self.theta_star).any(|&v| v < 0.0) {
                    return Err(Error::param("L1 comparator must be non-negative"));
                }
                params.sum::<f64>()
            }
        };
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("comparator norm is {norm}, expected 1")));
        }
        Ok(())
    }

    /// Smallest signed slack `z_i (w*.x - theta*_i)` over the active thresholds.
    pub fn margin(&self, x: &[f64], label: IntervalLabel) -> f64 {
        let s = dot(&self.w_star, x);
        let left = self.theta_star[..label.lo() - 1].iter().map(|&t| s - t);
        let right = self.theta_star[label.hi() - 1..].iter().map(|&t| t - s);
        left.chain(right).fold(f64::INFINITY, f64::min)
    }
}

/// A separable stream plus the quantities the mistake bounds need.
#[derive(Clone, Debug)]
pub struct SeparableStream {
    pub dataset: LabeledDataset,
    pub r_sq: f64,
    pub c: usize,
    pub min_margin: f64,
}

/// Rejection-samples `(x, interval)` pairs until `spec.n` of them clear the
/// margin. Each candidate label is, with equal odds, exact, type 1 or type 2
/// around the comparator's own rank.
pub fn make_separable(spec: &SeparableSpec, seed: u64) -> Result<SeparableStream> {
    spec.validate()?;
    let d = spec.w_star.len();
    let k = spec.theta_star.len() + 1;
    let mut rng = rng_for(seed, Purpose::Data);
    let a = spec.feature_bound;
    let mut instances = Vec::with_capacity(spec.n);
    let mut ranks = Vec::with_capacity(spec.n);
    let mut intervals = Vec::with_capacity(spec.n);
    let mut partial = Vec::with_capacity(spec.n);
    let mut attempts = 0;
    while instances.len() < spec.n {
        if attempts >= spec.max_attempts {
            return Err(Error::MarginInfeasible { attempts });
        }
        attempts += 1;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-a..=a)).collect();
        let y = predict_rank(dot(&spec.w_star, &x), &spec.theta_star);
        let label = match rng.random_range(0..3) {
            0 => IntervalLabel::exact(y, k)?,
            1 => interval_type1(y, k, &mut rng)?,
            _ => interval_type2(y, k)?,
        };
        if spec.margin(&x, label) >= spec.gamma {
            partial.push(!label.is_exact());
            instances.push(Instance::new(x)?);
            ranks.push(y);
            intervals.push(label);
        }
    }
    let dataset = LabeledDataset::new(instances, ranks, intervals, partial, k)?;
    let min_margin = dataset
        .stream()
        .map(|(x, l)| spec.margin(x, l))
        .fold(f64::INFINITY, f64::min);
    Ok(SeparableStream {
        r_sq: dataset.r_sq(),
        c: dataset.min_width(),
        min_margin,
        dataset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synth_rank_rule() {
        assert_eq!(synth_rank(0.0), 3);
        assert_eq!(synth_rank(-50.0), 1);
        assert_eq!(synth_rank(0.25), 3);
        assert_eq!(synth_rank(1.5), 5);
    }

    #[test]
    fn synth_is_deterministic() {
        let a = synth_generate(500, 9).unwrap();
        assert_eq!(a, synth_generate(500, 9).unwrap());
        assert_ne!(a, synth_generate(500, 10).unwrap());
        assert!(a.true_ranks().iter().all(|r| (1..=5).contains(r)));
        assert!(a.instances().iter().all(|x| x.iter().all(|v| (0.0..1.0).contains(v))));
        assert!(synth_generate(0, 1).is_err());
    }

    #[test]
    fn synth_rank_distribution_has_no_seed_effect() {
        // 10 x 5 contingency table, chi-square with 36 degrees of freedom.
        let n = 10_000;
        let table: Vec<[f64; 5]> = (0..10)
            .map(|seed| {
                let mut counts = [0.0; 5];
                for &r in synth_generate(n, seed).unwrap().true_ranks() {
                    counts[r - 1] += 1.0;
                }
                counts
            })
            .collect();
        let col: Vec<f64> = (0..5).map(|j| table.iter().map(|row| row[j]).sum()).collect();
        let total: f64 = col.iter().sum();
        let mut chi2 = 0.0;
        for row in &table {
            let row_sum: f64 = row.iter().sum();
            for j in 0..5 {
                let expected = row_sum * col[j] / total;
                chi2 += (row[j] - expected).powi(2) / expected;
            }
        }
        // 99th percentile of chi-square(36)
        assert!(chi2 < 58.619, "chi2 = {chi2}");
    }

    #[test]
    fn interval_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = |lo, hi| IntervalLabel::new(lo, hi, 5).unwrap();
        for _ in 0..20 {
            assert_eq!(interval_type1(1, 5, &mut rng).unwrap(), l(1, 2));
            assert_eq!(interval_type1(5, 5, &mut rng).unwrap(), l(4, 5));
        }
        assert_eq!(interval_type2(3, 5).unwrap(), l(2, 4));
        assert_eq!(interval_type2(1, 5).unwrap(), l(1, 2));
        assert_eq!(interval_type2(2, 3).unwrap(), IntervalLabel::new(1, 3, 3).unwrap());
        assert!(interval_type2(6, 5).is_err());
        assert!(interval_type1(0, 5, &mut rng).is_err());
    }

    #[test]
    fn type1_coin_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lower = (0..10_000)
            .filter(|_| interval_type1(3, 5, &mut rng).unwrap().lo() == 2)
            .count();
        let freq = lower as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "freq = {freq}");
    }

    #[test]
    fn mix_partial_counts_and_determinism() {
        let base = synth_generate(1000, 4).unwrap();
        let mix = |f, seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            mix_partial(&base, f, LabelType::Type1, &mut rng).unwrap()
        };
        let none = mix(0.0, 1);
        assert_eq!(none.partial_count(), 0);
        assert!(none.intervals().iter().all(|l| l.is_exact()));
        let all = mix(1.0, 1);
        assert_eq!(all.partial_count(), 1000);
        assert!(all.intervals().iter().all(|l| l.width() == 1));
        let most = mix(0.75, 1);
        assert_eq!(most.partial_count(), 750);
        assert_eq!(most, mix(0.75, 1));
        for ds in [&none, &all, &most] {
            for (l, &y) in ds.intervals().iter().zip(ds.true_ranks()) {
                assert!(l.contains(y));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(mix_partial(&base, 1.5, LabelType::Type2, &mut rng).is_err());
    }

    fn l2_spec(gamma: f64) -> SeparableSpec {
        let theta = [-0.3, -0.1, 0.1, 0.3];
        let t_sq: f64 = theta.iter().map(|t| t * t).sum();
        let w = (1.0 - t_sq).sqrt() / 2f64.sqrt();
        SeparableSpec::new(vec![w, w], theta.to_vec(), gamma, 300)
    }

    #[test]
    fn separable_stream_meets_margin() {
        let s = make_separable(&l2_spec(0.1), 3).unwrap();
        assert_eq!(s.dataset.len(), 300);
        assert!(s.min_margin >= 0.1);
        assert!(s.r_sq <= 2.0);
        for (l, &y) in s.dataset.intervals().iter().zip(s.dataset.true_ranks()) {
            assert!(l.contains(y));
        }
    }

    #[test]
    fn separable_budget_exhaustion() {
        let mut spec = l2_spec(5.0);
        spec.max_attempts = 2000;
        assert!(matches!(
            make_separable(&spec, 1),
            Err(Error::MarginInfeasible { attempts: 2000 })
        ));
        let mut bad = l2_spec(0.1);
        bad.w_star = vec![1.0, 1.0];
        assert!(make_separable(&bad, 1).is_err());
    }
}
