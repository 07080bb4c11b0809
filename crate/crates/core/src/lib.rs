//! Online ordinal regression ("ranking") from interval-labeled data.
//!
//! A ranker scores an instance with a linear or kernel function and cuts the
//! score into `k` ordered classes with `k - 1` non-decreasing thresholds.
//! Training labels may be intervals `[lo, hi]` of admissible ranks; the
//! learners here only push on thresholds outside the interval.
//!
//! - [`ranking`]: labels, the prediction rule and both interval losses.
//! - [`pril`]: the additive perceptron learner.
//! - [`kernel`]: its dual (kernel) form.
//! - [`mpril`]: the multiplicative variant.
//! - [`baselines`]: PRank, Widrow-Hoff and the multi-class perceptron.
//! - [`bounds`]: closed-form mistake and regret bounds.
//! - [`datagen`]: synthetic data, interval labels, separable streams, CSV.
//! - [`harness`]: seeded repeated experiments and their CSV output.

pub mod baselines;
pub mod bounds;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod mpril;
pub mod pril;
pub mod ranking;
pub mod rng;

pub use error::{Error, Result};
pub use kernel::{DualRankModel, Kernel};
pub use mpril::MultiplicativeModel;
pub use pril::{PrilStep, RoundRecord};
pub use ranking::{Instance, IntervalLabel, LinearRankModel};
