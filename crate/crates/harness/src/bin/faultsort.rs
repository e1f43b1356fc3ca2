use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faultsort_core::noisy_search::ConstantsMode;
use faultsort_harness::experiments::{self, ExperimentSummary};
use faultsort_harness::{run_trials, write_reports, Algorithm, ExperimentConfig, InputKind, OutputFormat, TrialSet};

#[derive(Parser)]
#[command(name = "faultsort", version, about = "Approximate sorting under persistent comparison faults")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized riffle sort.
    Sort(SortArgs),
    /// Derandomized riffle sort.
    Dsort {
        #[command(flatten)]
        common: SortArgs,
        #[arg(long, default_value_t = faultsort_core::derand::DEFAULT_FARM_FACTOR)]
        farm_factor: usize,
        /// Print bits consumed against farm capacity to stderr.
        #[arg(long)]
        report_bit_usage: bool,
    },
    /// Basket sort on a block-shuffled input.
    Bsort {
        #[command(flatten)]
        common: SortArgs,
        /// Initial window; inputs are shuffled within blocks of this size.
        #[arg(long = "wS", alias = "w-s", default_value_t = 64)]
        w_s: usize,
    },
    /// Noisy rank search on a sorted sequence.
    Search {
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Named statistical experiment; exits 1 if any band is violated.
    Experiment {
        name: ExperimentName,
        /// Overrides the experiment's default trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SortArgs {
    /// Input size; repeat or comma-separate for a size grid.
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Error rate for larger-first observations; defaults to p.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum)]
    input: Option<InputKind>,
    #[arg(long)]
    assume_independent_order: bool,
    /// Record wall-clock time per trial.
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    emit: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Practical,
    Theoretical,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Exactness,
    Persistence,
    Calibration,
    Scaling,
    Search,
    BasketRounds,
    Subset,
    Xor,
    LowerBounds,
    ComparisonScaling,
    Urn,
    Derand,
}

impl SortArgs {
    fn config(&self, algorithm: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            name: algorithm.tag().into(),
            sizes: self.n.clone(),
            trials: self.trials,
            p: self.p,
            q: self.q.unwrap_or(self.p),
            mode: match self.mode {
                ModeArg::Practical => ConstantsMode::Practical,
                ModeArg::Theoretical => ConstantsMode::Theoretical,
            },
            seed: self.seed,
            algorithm,
            input: self.input.unwrap_or(InputKind::Random),
            assume_independent_order: self.assume_independent_order,
            timing: self.timing,
            output: self.out.clone(),
            format: self.emit,
            ..ExperimentConfig::default()
        }
    }
}

fn emit(cfg: &ExperimentConfig) -> Result<TrialSet> {
    let set = run_trials(cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            write_reports(BufWriter::new(file), &set.reports, cfg.format)?;
        }
        None => write_reports(io::stdout().lock(), &set.reports, cfg.format)?,
    }
    Ok(set)
}

fn experiment(name: ExperimentName, trials: Option<usize>, seed: u64) -> Result<ExperimentSummary> {
    let t = |default: usize| trials.unwrap_or(default);
    match name {
        ExperimentName::Exactness => experiments::exactness(&[1, 10, 1_000, 100_000], t(10) as u64, seed),
        ExperimentName::Persistence => experiments::persistence(t(1_000_000), seed),
        ExperimentName::Calibration => experiments::calibration(&[0.05, 0.1, 0.25], t(1_000_000) as u64, seed),
        ExperimentName::Scaling => experiments::dislocation_scaling(&[1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16], t(50), 0.05, seed),
        ExperimentName::Search => experiments::search_accuracy(100_000, 0.1, t(10_000), seed),
        ExperimentName::BasketRounds => experiments::basket_rounds(10_000, 0.1, t(10) as u64, seed),
        ExperimentName::Subset => experiments::subset_sampler(100_000, t(1_000), 10_000, seed),
        ExperimentName::Xor => experiments::xor_bias(t(1_000_000), &[1, 2, 4], seed),
        ExperimentName::LowerBounds => experiments::lower_bounds(1 << 14, 0.1, t(50), seed),
        ExperimentName::ComparisonScaling => experiments::comparison_scaling(&[1 << 14, 1 << 15, 1 << 16], t(3), 1 << 14, &[16, 32, 64, 128], seed),
        ExperimentName::Urn => experiments::urn(1 << 17, 1 << 16, 136, t(1_000), seed),
        ExperimentName::Derand => experiments::derand_comparison(8_000, 0.05, t(10), 8, seed),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sort(args) => emit(&args.config(Algorithm::Riffle)).map(|_| true),
        Command::Dsort { common, farm_factor, report_bit_usage } => {
            let cfg = ExperimentConfig { farm_factor, ..common.config(Algorithm::Derand) };
            let set = emit(&cfg)?;
            if report_bit_usage {
                for r in &set.reports {
                    let flags = if r.flags.is_empty() { "-" } else { r.flags.as_str() };
                    eprintln!("trial {} n={}: {flags}", r.trial_id, r.n);
                }
            }
            Ok(true)
        }
        Command::Bsort { common, w_s } => {
            let mut cfg = common.config(Algorithm::Basket);
            cfg.input = common.input.unwrap_or(InputKind::BlockShuffled);
            cfg.block = w_s;
            cfg.w_s = Some(w_s);
            emit(&cfg).map(|_| true)
        }
        Command::Search { m, p, queries, seed } => {
            let summary = experiments::search_accuracy(m, p, queries, seed)?;
            print!("{summary}");
            Ok(summary.passed())
        }
        Command::Experiment { name, trials, seed, json } => {
            let summary = experiment(name, trials, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{summary}");
            }
            Ok(summary.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            let _ = writeln!(io::stderr(), "error: {err:#}");
            ExitCode::from(1)
        }
    }
}
