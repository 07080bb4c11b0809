//! M-PRIL: exponentiated (Winnow-style) updates on strictly positive weights
//! and thresholds that jointly sum to one.
//!
//! Parameters are stored as logarithms so that long trajectories cannot
//! underflow a component to zero; [`MultiplicativeModel::weights`] and
//! [`MultiplicativeModel::thresholds`] expose the linear-scale values.

use crate::error::{check_dim, Error, Result};
use crate::pril::{constraint_step, PrilStep};
use crate::ranking::{predict_rank, IntervalLabel};

/// Learning rate used when no margin is supplied.
pub const DEFAULT_ETA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativeModel {
    log_w: Vec<f64>,
    log_theta: Vec<f64>,
    eta: f64,
}

impl MultiplicativeModel {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.log_w.len()
    }

    pub fn k(&self) -> usize {
        self.log_theta.len() + 1
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_w.iter().map(|v| v.exp()).collect()
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.log_theta.iter().map(|v| v.exp()).collect()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    pub fn log_thresholds(&self) -> &[f64] {
        &self.log_theta
    }

    /// `sum w + sum theta`; one up to rounding.
    pub fn l1_norm(&self) -> f64 {
        self.log_w.iter().chain(&self.log_theta).map(|v| v.exp()).sum()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.log_w.iter().zip(x).map(|(lw, xi)| lw.exp() * xi).sum())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(predict_rank(self.score(x)?, &self.thresholds()))
    }
}

/// Every weight and threshold set to `1 / (d + k - 1)`.
pub fn mpril_init(d: usize, k: usize, eta: f64) -> Result<MultiplicativeModel> {
    if d == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if k < 2 {
        return Err(Error::param("need at least 2 classes"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param(format!("learning rate must be positive, got {eta}")));
    }
    let v = -((d + k - 1) as f64).ln();
    Ok(MultiplicativeModel {
        log_w: vec![v; d],
        log_theta: vec![v; k - 1],
        eta,
    })
}

/// One M-PRIL trial: `w_i *= exp(eta x_i sum tau)`, `theta_j *= exp(-eta tau_j)`,
/// then everything is divided by the common normalizer.
pub fn mpril_update(
    model: &mut MultiplicativeModel,
    x: &[f64],
    label: IntervalLabel,
) -> Result<PrilStep> {
    let score = model.score(x)?;
    let step = constraint_step(score, &model.thresholds(), label)?;
    if step.is_update() {
        let s = f64::from(step.coefficient());
        for (lw, xi) in model.log_w.iter_mut().zip(x) {
            *lw += model.eta * xi * s;
        }
        for (lt, &tau) in model.log_theta.iter_mut().zip(&step.tau) {
            *lt -= model.eta * f64::from(tau);
        }
        let log_z = log_sum_exp(model.log_w.iter().chain(&model.log_theta).copied());
        for v in model.log_w.iter_mut().chain(model.log_theta.iter_mut()) {
            *v -= log_z;
        }
    }
    Ok(step)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Learning rate that minimizes the mistake bound for margin `gamma`:
/// `1 / (2 (k - c - 1)) * ln((k - c - 1 + gamma) / (k - c - 1 - gamma))`.
pub fn mpril_eta_opt(k: usize, c: usize, gamma: f64) -> Result<f64> {
    if c + 1 >= k {
        return Err(Error::param(format!(
            "no active thresholds for k = {k}, c = {c}"
        )));
    }
    let span = (k - c - 1) as f64;
    if !(gamma > 0.0 && gamma <= 1.0 && gamma < span) {
        return Err(Error::param(format!(
            "margin must lie in (0, min(1, k - c - 1)), got {gamma}"
        )));
    }
    Ok(((span + gamma) / (span - gamma)).ln() / (2.0 * span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_is_uniform() {
        let m = mpril_init(2, 3, 0.1).unwrap();
        for v in m.weights().into_iter().chain(m.thresholds()) {
            assert_relative_eq!(v, 0.25, epsilon = 1e-15);
        }
        let m = mpril_init(1, 2, 0.1).unwrap();
        assert_relative_eq!(m.weights()[0], 0.5, epsilon = 1e-15);
        for (d, k) in [(1, 2), (7, 3), (20, 10)] {
            assert_relative_eq!(mpril_init(d, k, 0.5).unwrap().l1_norm(), 1.0, epsilon = 1e-12);
        }
        assert!(mpril_init(0, 3, 0.1).is_err());
        assert!(mpril_init(2, 3, 0.0).is_err());
    }

    #[test]
    fn first_update_matches_hand_computation() {
        let eta = 0.1;
        let mut m = mpril_init(2, 3, eta).unwrap();
        let label = IntervalLabel::new(1, 1, 3).unwrap();
        let step = mpril_update(&mut m, &[1.0, 0.0], label).unwrap();
        assert_eq!(step.tau, vec![-1, -1]);
        let z = 0.25 * ((-2.0 * eta).exp() + 1.0 + 2.0 * eta.exp());
        let w = [0.25 * (-2.0 * eta).exp() / z, 0.25 / z];
        let th = 0.25 * eta.exp() / z;
        assert_relative_eq!(m.weights()[0], w[0], epsilon = 1e-14);
        assert_relative_eq!(m.weights()[1], w[1], epsilon = 1e-14);
        assert_relative_eq!(m.thresholds()[0], th, epsilon = 1e-14);
        assert_relative_eq!(m.thresholds()[1], th, epsilon = 1e-14);
        assert_relative_eq!(m.l1_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn no_violation_no_change() {
        let mut m = mpril_init(2, 3, 0.3).unwrap();
        let before = m.clone();
        // score 0.5 > both thresholds (1/4) and label [3,3] wants exactly that
        mpril_update(&mut m, &[1.0, 1.0], IntervalLabel::new(3, 3, 3).unwrap()).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn eta_opt_values() {
        assert_relative_eq!(mpril_eta_opt(5, 1, 1.0).unwrap(), 2f64.ln() / 6.0, epsilon = 1e-12);
        assert_relative_eq!(mpril_eta_opt(5, 1, 1.0).unwrap(), 0.11552, epsilon = 1e-5);
        assert_relative_eq!(mpril_eta_opt(3, 0, 1.0).unwrap(), 0.27465, epsilon = 1e-5);
        let tiny = mpril_eta_opt(5, 0, 1e-9).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-9);
        assert!(mpril_eta_opt(3, 0, 0.0).is_err());
        assert!(mpril_eta_opt(3, 0, 1.5).is_err());
        assert!(mpril_eta_opt(3, 1, 1.0).is_err());
        assert!(mpril_eta_opt(3, 1, 0.5).is_ok());
        assert!(mpril_eta_opt(3, 2, 0.5).is_err());
    }

    #[test]
    fn random_updates_preserve_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &eta in &[0.01, 0.1, 0.5] {
            for _ in 0..200 {
                let d = rng.random_range(1..6);
                let k = rng.random_range(2..8);
                let mut m = mpril_init(d, k, eta).unwrap();
                for _ in 0..50 {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let y = rng.random_range(1..=k);
                    let label = IntervalLabel::exact(y, k).unwrap();
                    mpril_update(&mut m, &x, label).unwrap();
                    assert!((m.l1_norm() - 1.0).abs() <= 1e-9);
                    let th = m.thresholds();
                    assert!(th.windows(2).all(|p| p[1] - p[0] >= -1e-12));
                    assert!(m.log_weights().iter().all(|v| v.is_finite()));
                }
            }
        }
    }
}
