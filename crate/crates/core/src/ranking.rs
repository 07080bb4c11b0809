//! Ordinal prediction with ordered thresholds, and the interval-insensitive
//! losses used to train and score it.
//!
//! Ranks and threshold indices are 1-based throughout the public API: a
//! problem with `k` classes has ranks `1..=k` and thresholds `1..=k-1`.
//! Threshold vectors are stored 0-based, so threshold `i` lives at `theta[i - 1]`.

use std::ops::Deref;

use crate::error::{check_dim, Error, Result};

/// An annotation asserting that the true rank lies in `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntervalLabel {
    lo: usize,
    hi: usize,
}

impl IntervalLabel {
    pub fn new(lo: usize, hi: usize, k: usize) -> Result<Self> {
        let label = IntervalLabel { lo, hi };
        label.validate(k)?;
        Ok(label)
    }

    /// Degenerate interval `[y, y]`.
    pub fn exact(y: usize, k: usize) -> Result<Self> {
        Self::new(y, y, k)
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> usize {
        self.hi - self.lo
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.lo <= rank && rank <= self.hi
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if k >= 2 && 1 <= self.lo && self.lo <= self.hi && self.hi <= k {
            Ok(())
        } else {
            Err(Error::InvalidLabel {
                lo: self.lo,
                hi: self.hi,
                k,
            })
        }
    }

    /// Number of thresholds the label constrains, `k - 1 - (hi - lo)`.
    pub fn active_count(&self, k: usize) -> usize {
        k - 1 - self.width()
    }
}

/// A feature vector with at least one component, all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance(Vec<f64>);

impl Instance {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::param("instance must have at least one feature"));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite feature value {v}")));
        }
        Ok(Instance(x))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Instance {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Instance {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-threshold binary targets derived from an interval label.
///
/// Thresholds left of the interval carry `+1` (score must lie above them),
/// thresholds at or right of `hi` carry `-1` (score must lie below them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DummyLabels {
    entries: Vec<(usize, i8)>,
}

impl DummyLabels {
    /// `(threshold index, sign)` pairs in increasing index order.
    pub fn entries(&self) -> &[(usize, i8)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.entries.iter().copied()
    }
}

pub fn dummy_labels(label: IntervalLabel, k: usize) -> Result<DummyLabels> {
    label.validate(k)?;
    let left = (1..label.lo).map(|i| (i, 1i8));
    let right = (label.hi..k).map(|i| (i, -1i8));
    Ok(DummyLabels {
        entries: left.chain(right).collect(),
    })
}

/// Primal state shared by PRIL and PRank: a weight vector and `k - 1` thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRankModel {
    pub(crate) w: Vec<f64>,
    pub(crate) theta: Vec<f64>,
}

impl LinearRankModel {
    /// All-zero weights and thresholds.
    pub fn zeros(d: usize, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if k < 2 {
            return Err(Error::param("need at least 2 classes"));
        }
        Ok(LinearRankModel {
            w: vec![0.0; d],
            theta: vec![0.0; k - 1],
        })
    }

    /// Builds a model from explicit parameters; thresholds must be non-decreasing.
    pub fn from_parts(w: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if w.is_empty() || theta.is_empty() {
            return Err(Error::param("need d >= 1 and k >= 2"));
        }
        if !is_non_decreasing(&theta) {
            return Err(Error::param("thresholds must be non-decreasing"));
        }
        Ok(LinearRankModel { w, theta })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn k(&self) -> usize {
        self.theta.len() + 1
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(dot(&self.w, x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(predict_rank(self.score(x)?, &self.theta))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn is_non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[0] <= p[1])
}

/// Smallest rank `i` with `score < theta_i`, or `k` when the score clears
/// every threshold. Ties go to the higher rank.
pub fn predict_rank(score: f64, theta: &[f64]) -> usize {
    theta
        .iter()
        .position(|&t| score - t < 0.0)
        .map_or(theta.len() + 1, |i| i + 1)
}

/// Counting interval loss: thresholds left of the interval that the score
/// falls strictly below, plus thresholds from `hi` on that the score reaches.
pub fn mae_interval_loss(score: f64, theta: &[f64], label: IntervalLabel) -> usize {
    let left = theta[..label.lo - 1].iter().filter(|&&t| score < t).count();
    let right = theta[label.hi - 1..].iter().filter(|&&t| score >= t).count();
    left + right
}

/// Number of constraints `z_i (score - theta_i) <= 0` over the active
/// thresholds. This is the count the perceptron update acts on; it differs
/// from [`mae_interval_loss`] only when the score sits exactly on a threshold
/// left of the interval.
pub fn violation_count(score: f64, theta: &[f64], label: IntervalLabel) -> usize {
    let left = theta[..label.lo - 1].iter().filter(|&&t| score <= t).count();
    let right = theta[label.hi - 1..].iter().filter(|&&t| score >= t).count();
    left + right
}

/// Hinge surrogate `sum_i max(0, -z_i (score - theta_i))` over the active thresholds.
pub fn imc_loss(score: f64, theta: &[f64], label: IntervalLabel) -> f64 {
    let left: f64 = theta[..label.lo - 1]
        .iter()
        .map(|&t| (t - score).max(0.0))
        .sum();
    let right: f64 = theta[label.hi - 1..]
        .iter()
        .map(|&t| (score - t).max(0.0))
        .sum();
    left + right
}

/// Distance from a predicted rank to the nearest end of the interval.
///
/// For a threshold model with sorted thresholds this equals
/// [`mae_interval_loss`] of the score that produced the rank, which lets
/// learners without thresholds be scored on the same scale.
pub fn rank_distance(rank: usize, label: IntervalLabel) -> usize {
    label.lo.saturating_sub(rank) + rank.saturating_sub(label.hi)
}
