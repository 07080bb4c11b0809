//! Kernel PRIL: the same update as [`crate::pril`], with the weight vector
//! replaced by an expansion over the instances that triggered updates.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::pril::{constraint_step, PrilStep};
use crate::ranking::{dot, predict_rank, IntervalLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `a . b`
    Dot,
    /// `(a . b + 1)^degree`
    Poly { degree: u32 },
}

impl Kernel {
    pub fn poly(degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(Error::param("polynomial degree must be at least 1"));
        }
        Ok(Kernel::Poly { degree })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim(a.len(), b.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let ab = dot(a, b);
        match *self {
            Kernel::Dot => ab,
            Kernel::Poly { degree } => (ab + 1.0).powi(degree as i32),
        }
    }
}

pub fn kernel_eval(kernel: Kernel, a: &[f64], b: &[f64]) -> Result<f64> {
    kernel.eval(a, b)
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Dot => f.write_str("dot"),
            Kernel::Poly { degree } => write!(f, "poly:{degree}"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Accepts `dot` or `poly:<degree>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" | "linear" => Ok(Kernel::Dot),
            _ => {
                let degree = s
                    .strip_prefix("poly:")
                    .and_then(|d| d.parse::<u32>().ok())
                    .ok_or_else(|| Error::param(format!("unknown kernel '{s}'")))?;
                Kernel::poly(degree)
            }
        }
    }
}

/// A stored trial: the instance and its per-threshold steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportVector {
    pub x: Vec<f64>,
    pub tau: Vec<i8>,
    coefficient: f64,
}

impl SupportVector {
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }
}

/// Dual state: support set plus explicit thresholds with
/// `theta_i = -sum_s tau_i^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualRankModel {
    support: Vec<SupportVector>,
    theta: Vec<f64>,
    kernel: Kernel,
    dim: usize,
}

impl DualRankModel {
    pub fn new(kernel: Kernel, d: usize, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if k < 2 {
            return Err(Error::param("need at least 2 classes"));
        }
        Ok(DualRankModel {
            support: Vec::new(),
            theta: vec![0.0; k - 1],
            kernel,
            dim: d,
        })
    }

    pub fn support(&self) -> &[SupportVector] {
        &self.support
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.theta
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.theta.len() + 1
    }

    /// `sum_s (sum_i tau_i^s) kappa(x^s, x)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .support
            .iter()
            .map(|sv| sv.coefficient * self.kernel.eval_unchecked(&sv.x, x))
            .sum())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(predict_rank(self.score(x)?, &self.theta))
    }

    /// Drops stored trials whose coefficient is zero. Scores are unchanged;
    /// the per-threshold history of those trials is lost.
    pub fn compact(&mut self) {
        self.support.retain(|sv| sv.coefficient != 0.0);
    }
}

pub fn dual_score(model: &DualRankModel, x: &[f64]) -> Result<f64> {
    model.score(x)
}

/// One kernel PRIL trial. Trials with no violated constraint are not stored.
pub fn kpril_update(model: &mut DualRankModel, x: &[f64], label: IntervalLabel) -> Result<PrilStep> {
    let score = model.score(x)?;
    let step = constraint_step(score, &model.theta, label)?;
    if step.is_update() {
        for (t, &tau) in model.theta.iter_mut().zip(&step.tau) {
            *t -= f64::from(tau);
        }
        model.support.push(SupportVector {
            x: x.to_vec(),
            tau: step.tau.clone(),
            coefficient: f64::from(step.coefficient()),
        });
    }
    Ok(step)
}
