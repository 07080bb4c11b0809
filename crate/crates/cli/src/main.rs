//! `pril` command-line front end: dataset generation, labeled-stream
//! preparation, experiment runs, and bound reporting. Every command writes
//! CSV with a header row, to `--out` or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use pril_core::bounds::{
    general_mistake_bound, ideal_mistake_bound, mpril_mistake_bound, regret_bound, BoundInputs,
};
use pril_core::datagen::{
    load_ordinal_csv, mix_partial, read_dataset, synth_generate, write_dataset, Binning,
    CategoricalPolicy, LabelType, LoadOptions,
};
use pril_core::harness::{
    compare_algorithms, run_experiment, sweep_fractions, write_comparison, write_manifest,
    write_series, write_sweep, Algorithm, DatasetSource, Evaluation, RunConfig,
};
use pril_core::rng::{rng_for, Purpose};
use pril_core::{Error, Kernel};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "pril", version, about = "Online ordinal regression from interval labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the two-feature synthetic dataset with exact labels.
    GenSynth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace a fraction of exact labels with partial intervals.
    MakeIntervals {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "type", default_value = "1")]
        label_type: LabelType,
        #[arg(long, default_value_t = 0.75)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of ranks; inferred from the file when absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a raw CSV with a numeric target into a ranked dataset.
    LoadCsv(LoadCsvArgs),
    /// Average per-round loss of one algorithm over repeated runs.
    Run {
        #[arg(long)]
        algorithm: Algorithm,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One run per partial-label fraction.
    Sweep {
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        fractions: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Several algorithms scored against the true rank.
    Compare {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        algorithms: Vec<Algorithm>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the closed-form mistake and regret bounds.
    Bounds {
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        d_hinge: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct LoadCsvArgs {
    #[arg(long)]
    input: PathBuf,
    /// Name of the numeric column to bin into ranks.
    #[arg(long)]
    target: String,
    /// Number of equal-width bins over the observed target range.
    #[arg(long, conflicts_with = "edges", required_unless_present = "edges")]
    bins: Option<usize>,
    /// Explicit bin edges; rank is one plus the number of edges below the value.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    edges: Option<Vec<f64>>,
    #[arg(long)]
    normalize: bool,
    /// Columns holding category names. Dropped unless `--one-hot` is given.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    #[arg(long)]
    one_hot: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// `synthetic`, or the path of a dataset CSV.
    #[arg(long, default_value = "synthetic")]
    dataset: String,
    /// `dot` or `poly:<degree>`; kernel-pril only.
    #[arg(long)]
    kernel: Option<Kernel>,
    #[arg(long, default_value_t = 2000)]
    rounds: usize,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "eval", default_value = "interval")]
    evaluation: Evaluation,
    #[arg(long, default_value = "1")]
    label_type: LabelType,
    /// Fraction of rounds that receive a partial label.
    #[arg(long, default_value_t = 0.75)]
    fraction: f64,
    #[arg(long, default_value_t = pril_core::mpril::DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = pril_core::baselines::DEFAULT_WH_RATE)]
    lr: f64,
    /// Number of ranks for file datasets; inferred when absent.
    #[arg(long)]
    k: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the resolved configuration to `<out>.manifest`.
    #[arg(long)]
    manifest: bool,
}

impl CommonArgs {
    fn config(&self, algorithm: Algorithm) -> RunConfig {
        let dataset = if self.dataset == "synthetic" {
            DatasetSource::Synthetic
        } else {
            DatasetSource::File(PathBuf::from(&self.dataset))
        };
        RunConfig {
            algorithm,
            kernel: self.kernel,
            dataset,
            label_type: self.label_type,
            fraction_partial: self.fraction,
            rounds: self.rounds,
            repeats: self.repeats,
            seed: self.seed,
            eta: self.eta,
            lr: self.lr,
            evaluation: self.evaluation,
            k: self.k,
            workers: self.workers,
        }
    }

    fn check_manifest(&self) -> anyhow::Result<()> {
        if self.manifest && self.out.is_none() {
            return Err(Error::InvalidConfig("--manifest needs --out".into()).into());
        }
        Ok(())
    }

    fn finish(&self, entries: &[(&str, String)]) -> anyhow::Result<()> {
        if let (true, Some(out)) = (self.manifest, &self.out) {
            let path = write_manifest(out, entries)?;
            log::info!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::GenSynth { n, seed, out } => {
            let ds = synth_generate(n, seed)?;
            write_dataset(&ds, output(out.as_deref())?)?;
        }
        Command::MakeIntervals {
            input,
            label_type,
            fraction,
            seed,
            k,
            out,
        } => {
            let ds = read_dataset(&input, k)?;
            let mixed = mix_partial(&ds, fraction, label_type, &mut rng_for(seed, Purpose::Labels))?;
            write_dataset(&mixed, output(out.as_deref())?)?;
        }
        Command::LoadCsv(args) => {
            let binning = match (args.bins, args.edges) {
                (Some(n), None) => Binning::EqualWidth(n),
                (None, Some(edges)) => Binning::Cuts(edges),
                _ => return Err(Error::InvalidConfig("give exactly one of --bins and --edges".into()).into()),
            };
            let mut opts = LoadOptions::new(args.target, binning);
            opts.normalize = args.normalize;
            opts.categorical = args.categorical;
            if args.one_hot {
                opts.categorical_policy = CategoricalPolicy::OneHot;
            }
            let loaded = load_ordinal_csv(&args.input, &opts)?;
            for w in &loaded.warnings {
                log::warn!("{w}");
            }
            write_dataset(&loaded.dataset, output(args.out.as_deref())?)?;
        }
        Command::Run { algorithm, common } => {
            common.check_manifest()?;
            let config = common.config(algorithm);
            let series = run_experiment(&config)?;
            log::info!(
                "final average {:.4} (std over repeats {:.4})",
                series.final_mean,
                series.final_std
            );
            write_series(&series, output(common.out.as_deref())?)?;
            common.finish(&config.manifest())?;
        }
        Command::Sweep {
            algorithm,
            fractions,
            common,
        } => {
            common.check_manifest()?;
            let config = common.config(algorithm);
            let table = sweep_fractions(&config, &fractions)?;
            write_sweep(&table, output(common.out.as_deref())?)?;
            let mut entries = config.manifest();
            entries.push(("fractions", list(&fractions)));
            common.finish(&entries)?;
        }
        Command::Compare { algorithms, common } => {
            common.check_manifest()?;
            let config = common.config(algorithms[0]);
            let table = compare_algorithms(&config, &algorithms)?;
            write_comparison(&table, output(common.out.as_deref())?)?;
            let mut entries = config.manifest();
            entries.retain(|(k, _)| *k != "algorithm" && *k != "evaluation");
            entries.push(("algorithms", list(&algorithms)));
            entries.push(("evaluation", Evaluation::Exact.to_string()));
            common.finish(&entries)?;
        }
        Command::Bounds {
            r2,
            k,
            c,
            gamma,
            d_hinge,
            lambda,
            t,
            dim,
            out,
        } => {
            let b = BoundInputs {
                d_hinge,
                lambda,
                t,
                dim,
                ..BoundInputs::new(r2, k, c, gamma)
            };
            let rows = [
                ("ideal_mistake", ideal_mistake_bound(&b)),
                ("general_mistake", general_mistake_bound(&b)),
                ("regret", regret_bound(&b)),
                ("mpril_mistake", mpril_mistake_bound(&b)),
            ];
            if rows.iter().all(|(_, r)| r.is_err()) {
                return Err(rows.into_iter().find_map(|(_, r)| r.err()).map_or_else(
                    || anyhow!("no bound applies"),
                    anyhow::Error::from,
                ));
            }
            let mut w = output(out.as_deref())?;
            writeln!(w, "bound,value")?;
            for (name, value) in rows {
                match value {
                    Ok(v) => writeln!(w, "{name},{v}")?,
                    Err(e) => {
                        log::warn!("{name}: {e}");
                        writeln!(w, "{name},NaN")?;
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_usage() => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
