//! Shared workloads for the criterion benches.

use pril_core::datagen::{mix_partial, synth_generate, LabelType, LabeledDataset};
use pril_core::rng::{rng_for, Purpose};

/// Synthetic stream with every label partial (type 1).
pub fn synthetic_stream(n: usize, seed: u64) -> LabeledDataset {
    let base = synth_generate(n, seed).expect("n > 0");
    mix_partial(&base, 1.0, LabelType::Type1, &mut rng_for(seed, Purpose::Labels))
        .expect("valid fraction")
}
