//! Closed-form mistake and regret bounds.
//!
//! Notation: `r_sq` is the largest squared L2 norm of an instance in the
//! stream, `c` the narrowest interval width `min_t (hi - lo)`, and
//! `k - c - 1` the most constraints a single trial can violate.

use crate::error::{Error, Result};
use crate::ranking::{dot, IntervalLabel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub r_sq: f64,
    pub k: usize,
    pub c: usize,
    pub gamma: f64,
    pub d_hinge: f64,
    pub lambda: f64,
    pub t: usize,
    pub dim: usize,
}

impl BoundInputs {
    pub fn new(r_sq: f64, k: usize, c: usize, gamma: f64) -> Self {
        BoundInputs {
            r_sq,
            k,
            c,
            gamma,
            d_hinge: 0.0,
            lambda: 0.0,
            t: 0,
            dim: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_sq >= 0.0) {
            return Err(Error::param("R^2 must be non-negative"));
        }
        if self.k < 2 || self.c > self.k - 1 {
            return Err(Error::param(format!(
                "need k >= 2 and 0 <= c <= k - 1, got k = {}, c = {}",
                self.k, self.c
            )));
        }
        if !(self.d_hinge >= 0.0) || !(self.lambda >= 0.0) {
            return Err(Error::param("D and Lambda must be non-negative"));
        }
        Ok(())
    }

    fn check_gamma(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("margin must be positive, got {}", self.gamma)))
        }
    }

    fn active(&self) -> f64 {
        (self.k - self.c - 1) as f64
    }
}

/// `(R^2 + 1)(k - c - 1) / gamma^2`, for streams separable with margin `gamma`.
pub fn ideal_mistake_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    b.check_gamma()?;
    Ok((b.r_sq + 1.0) * b.active() / (b.gamma * b.gamma))
}

/// `(D + sqrt(R^2 + 1))^2 (k - c - 1) / gamma^2`, with `D` the hinge deficit
/// of any unit-norm comparator.
pub fn general_mistake_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    b.check_gamma()?;
    // expanded so that D = 0 reproduces the ideal bound bit for bit
    let a = b.r_sq + 1.0;
    let s_sq = b.d_hinge * b.d_hinge + 2.0 * b.d_hinge * a.sqrt() + a;
    Ok(s_sq * b.active() / (b.gamma * b.gamma))
}

/// `1/2 [Lambda^2 + T (R^2 + 1)(k - c - 1)]` against comparators in the
/// Lambda-ball.
pub fn regret_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    Ok(0.5 * (b.lambda * b.lambda + b.t as f64 * (b.r_sq + 1.0) * b.active()))
}

/// `(k - c - 1)^2 ln(k + d - 1) / gamma^2` for M-PRIL, with `gamma` the
/// margin of an L1-normalized comparator on instances with sup-norm <= 1.
pub fn mpril_mistake_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    if !(b.gamma > 0.0 && b.gamma <= 1.0) {
        return Err(Error::param(format!("margin must lie in (0, 1], got {}", b.gamma)));
    }
    if b.dim == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    let a = b.active();
    Ok(a * a * ((b.k + b.dim - 1) as f64).ln() / (b.gamma * b.gamma))
}

/// `D = sqrt(sum_t sum_i max(0, gamma - z_i (w.x - theta_i))^2)` for a
/// comparator with `||w||^2 + ||theta||^2 = 1`.
pub fn hinge_deficit<'a, I>(w: &[f64], theta: &[f64], stream: I, gamma: f64) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [f64], IntervalLabel)>,
{
    let norm_sq = dot(w, w) + dot(theta, theta);
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!(
            "comparator must have unit norm, got squared norm {norm_sq}"
        )));
    }
    let k = theta.len() + 1;
    let mut total = 0.0;
    for (x, label) in stream {
        label.validate(k)?;
        crate::error::check_dim(w.len(), x.len())?;
        let s = dot(w, x);
        let left = theta[..label.lo() - 1].iter().map(|&t| s - t);
        let right = theta[label.hi() - 1..].iter().map(|&t| t - s);
        for margin in left.chain(right) {
            let d = (gamma - margin).max(0.0);
            total += d * d;
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ideal_examples() {
        assert_relative_eq!(ideal_mistake_bound(&BoundInputs::new(2.0, 5, 1, 0.1)).unwrap(), 900.0, epsilon = 1e-9);
        assert_eq!(ideal_mistake_bound(&BoundInputs::new(2.0, 5, 4, 0.1)).unwrap(), 0.0);
        assert_eq!(ideal_mistake_bound(&BoundInputs::new(0.0, 2, 0, 1.0)).unwrap(), 1.0);
        assert!(ideal_mistake_bound(&BoundInputs::new(0.0, 2, 0, 0.0)).is_err());
        assert!(ideal_mistake_bound(&BoundInputs::new(0.0, 3, 3, 1.0)).is_err());
    }

    #[test]
    fn general_examples() {
        let mut b = BoundInputs::new(0.0, 3, 0, 1.0);
        b.d_hinge = 1.0;
        assert_eq!(general_mistake_bound(&b).unwrap(), 8.0);
        let b0 = BoundInputs::new(2.0, 5, 1, 0.1);
        assert_eq!(general_mistake_bound(&b0).unwrap(), ideal_mistake_bound(&b0).unwrap());
        assert!(general_mistake_bound(&BoundInputs::new(0.0, 3, 0, -1.0)).is_err());
    }

    #[test]
    fn regret_examples() {
        let mut b = BoundInputs::new(1.0, 3, 0, 1.0);
        b.lambda = 1.0;
        b.t = 10;
        assert_eq!(regret_bound(&b).unwrap(), 20.5);
        b.t = 0;
        assert_eq!(regret_bound(&b).unwrap(), 0.5);
        b.t = 20;
        let r20 = regret_bound(&b).unwrap();
        b.t = 40;
        assert_eq!(regret_bound(&b).unwrap() - r20, r20 - 0.5);
    }

    #[test]
    fn mpril_examples() {
        let b = BoundInputs { dim: 1, ..BoundInputs::new(0.0, 3, 0, 1.0) };
        assert_relative_eq!(mpril_mistake_bound(&b).unwrap(), 4.0 * 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(mpril_mistake_bound(&b).unwrap(), 4.394, epsilon = 1e-3);
        let b = BoundInputs { dim: 4, ..BoundInputs::new(0.0, 3, 2, 0.5) };
        assert_eq!(mpril_mistake_bound(&b).unwrap(), 0.0);
        assert!(mpril_mistake_bound(&BoundInputs::new(0.0, 3, 0, 1.5)).is_err());
        let big = BoundInputs { dim: 1000, ..BoundInputs::new(0.0, 3, 0, 0.5) };
        let small = BoundInputs { dim: 10, ..big };
        assert!(mpril_mistake_bound(&big).unwrap() > mpril_mistake_bound(&small).unwrap());
    }

    #[test]
    fn monotonicity() {
        let base = BoundInputs { d_hinge: 0.5, lambda: 1.0, t: 10, dim: 3, ..BoundInputs::new(1.0, 5, 1, 0.3) };
        let all = |b: &BoundInputs| {
            [
                ideal_mistake_bound(b).unwrap(),
                general_mistake_bound(b).unwrap(),
                regret_bound(b).unwrap(),
                mpril_mistake_bound(b).unwrap(),
            ]
        };
        let v0 = all(&base);
        assert!(v0.iter().all(|v| *v >= 0.0));
        let more_margin = all(&BoundInputs { gamma: 0.4, ..base });
        let more_radius = all(&BoundInputs { r_sq: 2.0, ..base });
        let more_deficit = all(&BoundInputs { d_hinge: 1.0, ..base });
        for i in 0..4 {
            assert!(more_margin[i] <= v0[i]);
            assert!(more_radius[i] >= v0[i]);
            assert!(more_deficit[i] >= v0[i]);
        }
    }

    #[test]
    fn hinge_deficit_examples() {
        let w = [0.6];
        let theta = [0.0, 0.8];
        let k = 3;
        // score 0.6 with label [2,2]: margins 0.6 and 0.2
        let x = [1.0];
        let s = [(&x[..], IntervalLabel::exact(2, k).unwrap())];
        assert_eq!(hinge_deficit(&w, &theta, s, 0.2).unwrap(), 0.0);
        // slack of gamma/2 on one constraint
        let d = hinge_deficit(&w, &theta, s, 0.4).unwrap();
        assert_relative_eq!(d, 0.2, epsilon = 1e-12);
        let d2 = hinge_deficit(&w, &theta, s, 0.5).unwrap();
        assert!(d2 >= d);
        assert!(hinge_deficit(&[1.0], &[1.0, 1.0], s, 0.1).is_err());
    }
}
