//! PRIL: the additive perceptron for interval-labeled ordinal data.
//!
//! Each trial checks the active threshold constraints against the current
//! score, and every violated constraint moves the weights by `z_i x` and its
//! threshold by `-z_i`, all against the pre-update model.

use crate::error::{check_dim, Result};
use crate::ranking::{
    dummy_labels, imc_loss, mae_interval_loss, predict_rank, IntervalLabel, LinearRankModel,
};

/// What a single trial did to the model.
#[derive(Clone, Debug, PartialEq)]
pub struct PrilStep {
    /// Per-threshold step in `{-1, 0, +1}`, length `k - 1`.
    pub tau: Vec<i8>,
    /// 1-based indices of the violated constraints.
    pub violated: Vec<usize>,
    /// Counting interval loss of the pre-update model.
    pub pre_loss_mae: usize,
    /// Hinge surrogate of the pre-update model.
    pub pre_loss_imc: f64,
    /// Pre-update score and predicted rank.
    pub score: f64,
    pub predicted: usize,
}

impl PrilStep {
    /// `sum_i tau_i`, the coefficient the instance enters the weights with.
    pub fn coefficient(&self) -> i32 {
        self.tau.iter().map(|&t| i32::from(t)).sum()
    }

    pub fn is_update(&self) -> bool {
        !self.violated.is_empty()
    }
}

/// Evaluates the constraints `z_i (score - theta_i) <= 0` for the active
/// thresholds of `label`. Shared by every learner that uses the PRIL rule.
pub(crate) fn constraint_step(score: f64, theta: &[f64], label: IntervalLabel) -> Result<PrilStep> {
    let k = theta.len() + 1;
    let dummies = dummy_labels(label, k)?;
    let mut tau = vec![0i8; k - 1];
    let mut violated = Vec::new();
    for (i, z) in dummies.iter() {
        if f64::from(z) * (score - theta[i - 1]) <= 0.0 {
            tau[i - 1] = z;
            violated.push(i);
        }
    }
    Ok(PrilStep {
        tau,
        violated,
        pre_loss_mae: mae_interval_loss(score, theta, label),
        pre_loss_imc: imc_loss(score, theta, label),
        score,
        predicted: predict_rank(score, theta),
    })
}

pub fn pril_init(d: usize, k: usize) -> Result<LinearRankModel> {
    LinearRankModel::zeros(d, k)
}

/// One PRIL trial. Weights move by `(sum tau) x`, thresholds by `-tau`.
pub fn pril_update(
    model: &mut LinearRankModel,
    x: &[f64],
    label: IntervalLabel,
) -> Result<PrilStep> {
    check_dim(model.dim(), x.len())?;
    let score = model.score(x)?;
    let step = constraint_step(score, &model.theta, label)?;
    if step.is_update() {
        let c = f64::from(step.coefficient());
        for (w, xi) in model.w.iter_mut().zip(x) {
            *w += c * xi;
        }
        for (t, &tau) in model.theta.iter_mut().zip(&step.tau) {
            *t -= f64::from(tau);
        }
    }
    Ok(step)
}

/// Per-round bookkeeping of an online pass. Losses are those of the model
/// before it saw the round's example.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub predicted: usize,
    pub mae: usize,
    pub violations: usize,
    pub imc: f64,
    pub cum_mae: usize,
    pub cum_violations: usize,
    pub cum_imc: f64,
}

/// Replays a stream through a fresh PRIL model.
pub fn run_online<'a, I>(stream: I, d: usize, k: usize) -> Result<Vec<RoundRecord>>
where
    I: IntoIterator<Item = (&'a [f64], IntervalLabel)>,
{
    let mut model = pril_init(d, k)?;
    let mut records: Vec<RoundRecord> = Vec::new();
    for (x, label) in stream {
        let step = pril_update(&mut model, x, label)?;
        let prev = records.last();
        let violations = step.violated.len();
        records.push(RoundRecord {
            round: records.len() + 1,
            predicted: step.predicted,
            mae: step.pre_loss_mae,
            violations,
            imc: step.pre_loss_imc,
            cum_mae: prev.map_or(0, |r| r.cum_mae) + step.pre_loss_mae,
            cum_violations: prev.map_or(0, |r| r.cum_violations) + violations,
            cum_imc: prev.map_or(0.0, |r| r.cum_imc) + step.pre_loss_imc,
        });
    }
    Ok(records)
}
