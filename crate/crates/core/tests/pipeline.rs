use std::fs::File;
use std::sync::Arc;

use pril_core::bounds::{ideal_mistake_bound, BoundInputs};
use pril_core::datagen::{make_separable, read_dataset, synth_generate, write_dataset, SeparableSpec};
use pril_core::harness::{
    compare_algorithms, repeat_stream, run_experiment, Algorithm, DatasetSource, Evaluation,
    RunConfig,
};
use pril_core::pril::run_online;

fn small(algorithm: Algorithm) -> RunConfig {
    RunConfig {
        rounds: 300,
        repeats: 4,
        seed: 9,
        ..RunConfig::new(algorithm)
    }
}

#[test]
fn file_and_memory_sources_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.csv");
    let ds = synth_generate(800, 21).unwrap();
    write_dataset(&ds, File::create(&path).unwrap()).unwrap();
    let back = read_dataset(&path, None).unwrap();
    assert_eq!(back.true_ranks(), ds.true_ranks());
    assert_eq!(back.instances(), ds.instances());

    let from_file = RunConfig {
        dataset: DatasetSource::File(path),
        ..small(Algorithm::Mpril)
    };
    let in_memory = RunConfig {
        dataset: DatasetSource::InMemory(Arc::new(ds)),
        ..small(Algorithm::Mpril)
    };
    assert_eq!(run_experiment(&from_file).unwrap(), run_experiment(&in_memory).unwrap());
}

#[test]
fn repeats_differ_but_reruns_do_not() {
    let config = small(Algorithm::Pril);
    let a = repeat_stream(&config, None, 0).unwrap();
    let b = repeat_stream(&config, None, 1).unwrap();
    assert_ne!(a.instances(), b.instances());
    assert_eq!(a.partial_count(), 225);
    let again = repeat_stream(&config, None, 0).unwrap();
    assert_eq!(a.intervals(), again.intervals());

    let series = run_experiment(&config).unwrap();
    assert_eq!(series.finals.len(), 4);
    assert_eq!(series.avg.len(), 300);
    assert_eq!(series, run_experiment(&RunConfig { workers: 2, ..config }).unwrap());
}

#[test]
fn comparison_uses_exact_scoring() {
    let config = small(Algorithm::Pril);
    let table = compare_algorithms(&config, &[Algorithm::Pril, Algorithm::Prank]).unwrap();
    let exact = run_experiment(&RunConfig {
        evaluation: Evaluation::Exact,
        ..config
    })
    .unwrap();
    assert_eq!(table[0].1, exact);
    assert!(table.iter().all(|(_, s)| s.avg.iter().all(|v| v.is_finite() && *v >= 0.0)));
}

#[test]
fn separable_stream_stays_within_mistake_bound() {
    let theta = vec![-0.3, -0.1, 0.1, 0.3];
    let w_norm = (1.0 - theta.iter().map(|t: &f64| t * t).sum::<f64>()).sqrt();
    let spec = SeparableSpec::new(vec![w_norm], theta, 0.05, 1000);
    let stream = make_separable(&spec, 5).unwrap();
    assert!(stream.min_margin >= 0.05);
    let records = run_online(stream.dataset.stream(), 1, 5).unwrap();
    let bound = ideal_mistake_bound(&BoundInputs::new(stream.r_sq, 5, stream.c, 0.05)).unwrap();
    assert!(records.last().unwrap().cum_violations as f64 <= bound);
    // no more mistakes once the stream has been learned
    let mut model_records = run_online(stream.dataset.stream().chain(stream.dataset.stream()), 1, 5).unwrap();
    let second_pass = model_records.split_off(1000);
    assert!(second_pass.iter().map(|r| r.violations).sum::<usize>() <= records.last().unwrap().cum_violations);
}
