//! Exact-label comparison learners: PRank, Widrow-Hoff regression on the rank
//! value, and the multi-class perceptron.

use crate::error::{check_dim, Error, Result};
use crate::ranking::{dot, LinearRankModel};

/// Default Widrow-Hoff step size.
pub const DEFAULT_WH_RATE: f64 = 0.1;

fn check_rank(y: usize, k: usize) -> Result<()> {
    if (1..=k).contains(&y) {
        Ok(())
    } else {
        Err(Error::param(format!("rank {y} outside 1..={k}")))
    }
}

/// One PRank trial on exact rank `y`.
///
/// Written in the original per-threshold form: `y_r = +1` when `y > r`,
/// `-1` otherwise, and every threshold with `y_r (w.x - b_r) <= 0` steps.
pub fn prank_update(model: &mut LinearRankModel, x: &[f64], y: usize) -> Result<()> {
    check_rank(y, model.k())?;
    let score = model.score(x)?;
    let mut total = 0.0;
    for (r, b) in model.theta.iter_mut().enumerate() {
        let yr = if y > r + 1 { 1.0 } else { -1.0 };
        if yr * (score - *b) <= 0.0 {
            total += yr;
            *b -= yr;
        }
    }
    if total != 0.0 {
        for (w, xi) in model.w.iter_mut().zip(x) {
            *w += total * xi;
        }
    }
    Ok(())
}

/// Least-mean-squares regressor on the rank value.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionModel {
    pub(crate) w: Vec<f64>,
    learning_rate: f64,
}

impl RegressionModel {
    pub fn new(d: usize, learning_rate: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::param(format!("invalid learning rate {learning_rate}")));
        }
        Ok(RegressionModel {
            w: vec![0.0; d],
            learning_rate,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.w.len(), x.len())?;
        Ok(dot(&self.w, x))
    }
}

/// Rounds a real prediction to the nearest rank in `1..=k`.
pub fn round_clip(prediction: f64, k: usize) -> usize {
    if prediction.is_nan() {
        return 1;
    }
    prediction.round().clamp(1.0, k as f64) as usize
}

/// One LMS step `w -= 2 lr (w.x - y) x`; returns the pre-update prediction.
pub fn wh_update(model: &mut RegressionModel, x: &[f64], y: usize) -> Result<f64> {
    let prediction = model.predict(x)?;
    let g = 2.0 * model.learning_rate * (prediction - y as f64);
    if g != 0.0 {
        for (w, xi) in model.w.iter_mut().zip(x) {
            *w -= g * xi;
        }
    }
    Ok(prediction)
}

/// One weight vector per class.
#[derive(Clone, Debug, PartialEq)]
pub struct MulticlassModel {
    pub(crate) w: Vec<Vec<f64>>,
}

impl MulticlassModel {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k < 2 {
            return Err(Error::param("need d >= 1 and k >= 2"));
        }
        Ok(MulticlassModel {
            w: vec![vec![0.0; d]; k],
        })
    }

    /// Weights of class `class` (1-based).
    pub fn class_weights(&self, class: usize) -> &[f64] {
        &self.w[class - 1]
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }

    /// Highest-scoring class; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.w[0].len(), x.len())?;
        let mut best = (1, dot(&self.w[0], x));
        for (c, w) in self.w.iter().enumerate().skip(1) {
            let s = dot(w, x);
            if s > best.1 {
                best = (c + 1, s);
            }
        }
        Ok(best.0)
    }
}

/// One multi-class perceptron trial; returns the pre-update prediction.
pub fn mcp_update(model: &mut MulticlassModel, x: &[f64], y: usize) -> Result<usize> {
    check_rank(y, model.k())?;
    let predicted = model.predict(x)?;
    if predicted != y {
        for (w, xi) in model.w[y - 1].iter_mut().zip(x) {
            *w += xi;
        }
        for (w, xi) in model.w[predicted - 1].iter_mut().zip(x) {
            *w -= xi;
        }
    }
    Ok(predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pril::{pril_init, pril_update};
    use crate::ranking::IntervalLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prank_hand_example() {
        let mut m = pril_init(1, 3).unwrap();
        prank_update(&mut m, &[1.0], 2).unwrap();
        assert_eq!(m.weights(), &[0.0]);
        assert_eq!(m.thresholds(), &[-1.0, 1.0]);
    }

    #[test]
    fn prank_leaves_correct_ranking_alone() {
        let mut m = LinearRankModel::from_parts(vec![1.0], vec![-1.0, 1.0]).unwrap();
        let before = m.clone();
        prank_update(&mut m, &[0.0], 2).unwrap();
        assert_eq!(m, before);
        assert!(prank_update(&mut m, &[0.0], 4).is_err());
    }

    #[test]
    fn prank_equals_pril_on_exact_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (d, k) = (3, 6);
        let mut a = pril_init(d, k).unwrap();
        let mut b = a.clone();
        for _ in 0..300 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = rng.random_range(1..=k);
            pril_update(&mut a, &x, IntervalLabel::exact(y, k).unwrap()).unwrap();
            prank_update(&mut b, &x, y).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wh_examples() {
        let mut m = RegressionModel::new(2, 0.1).unwrap();
        let p = wh_update(&mut m, &[1.0, 0.0], 3).unwrap();
        assert_eq!(p, 0.0);
        assert!((m.weights()[0] - 0.6).abs() < 1e-15);
        assert_eq!(m.weights()[1], 0.0);

        let mut m = RegressionModel { w: vec![1.5, 0.0], learning_rate: 0.1 };
        wh_update(&mut m, &[2.0, 7.0], 3).unwrap();
        assert_eq!(m.weights(), &[1.5, 0.0]);

        let mut m = RegressionModel::new(2, 0.0).unwrap();
        wh_update(&mut m, &[1.0, 1.0], 5).unwrap();
        assert_eq!(m.weights(), &[0.0, 0.0]);
    }

    #[test]
    fn round_clip_behaviour() {
        assert_eq!(round_clip(-3.0, 5), 1);
        assert_eq!(round_clip(2.4, 5), 2);
        assert_eq!(round_clip(2.5, 5), 3);
        assert_eq!(round_clip(9.0, 5), 5);
        assert_eq!(round_clip(f64::NAN, 5), 1);
    }

    #[test]
    fn mcp_examples() {
        let mut m = MulticlassModel::new(1, 3).unwrap();
        assert_eq!(m.predict(&[1.0]).unwrap(), 1);
        let p = mcp_update(&mut m, &[1.0], 2).unwrap();
        assert_eq!(p, 1);
        assert_eq!(m.class_weights(2), &[1.0]);
        assert_eq!(m.class_weights(1), &[-1.0]);
        let before = m.clone();
        assert_eq!(mcp_update(&mut m, &[1.0], 2).unwrap(), 2);
        assert_eq!(m, before);
    }
}
