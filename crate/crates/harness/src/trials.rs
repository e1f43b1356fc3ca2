use std::time::Instant;

use anyhow::Result;
use faultsort_core::adversary::adversarial_order;
use faultsort_core::basket_sort::BasketConfig;
use faultsort_core::derand::DerandConfig;
use faultsort_core::noisy_search::SearchConfig;
use faultsort_core::rng::{block_shuffled, derive_seed, random_permutation, trial_seed, RngBits};
use faultsort_core::{basket_sort, derand_riffle_sort, riffle_sort, Element, FaultModel, RiffleConfig, Sequence};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig, InputKind};
use crate::report::TrialReport;
use crate::stats::Moments;

/// Caps the worker pool when set.
pub const THREADS_ENV: &str = "FAULTSORT_THREADS";

/// Runs `f` on a pool sized by `FAULTSORT_THREADS`, or the global pool.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&t| t > 0) {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

pub fn build_model(n: usize, p: f64, q: f64, seed: u64) -> Result<FaultModel> {
    Ok(FaultModel::builder(n).p(p).q(q).seed(seed).build()?)
}

pub fn make_input(kind: InputKind, model: &FaultModel, n: usize, block: usize, seed: u64) -> Result<Vec<Element>> {
    let mut src = RngBits::stream(seed, 1);
    Ok(match kind {
        InputKind::Random => random_permutation(n, &mut src),
        InputKind::Sorted => Sequence::identity(n).into_items(),
        InputKind::Reversed => Sequence::reversed(n).into_items(),
        InputKind::BlockShuffled => block_shuffled(n, block, &mut src),
        InputKind::Adversarial => adversarial_order(model, n)?.into_items(),
    })
}

fn flag(flags: &mut Vec<String>, key: &str, value: impl std::fmt::Display, set: bool) {
    if set {
        flags.push(format!("{key}={value}"));
    }
}

/// One seeded trial of `cfg.algorithm` on `n` elements.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial_id: u64) -> Result<TrialReport> {
    Ok(execute_trial(cfg, n, trial_id)?.0)
}

/// Like [`run_trial`], also returning the output sequence.
pub fn execute_trial(cfg: &ExperimentConfig, n: usize, trial_id: u64) -> Result<(TrialReport, Vec<Element>)> {
    let seed = trial_seed(cfg.seed, trial_id);
    let model = build_model(n, cfg.p, cfg.q, seed)?;
    let input = make_input(cfg.input, &model, n, cfg.block, seed)?;
    let started = Instant::now();
    let mut flags = Vec::new();
    let (items, comparisons) = match cfg.algorithm {
        Algorithm::Riffle => {
            let rc = riffle_config(cfg);
            let out = riffle_sort(&model, &input, &rc, derive_seed(seed, 2))?;
            flag(&mut flags, "clamped_ranks", out.clamped_ranks, out.clamped_ranks > 0);
            flag(&mut flags, "search_timeouts", out.search_timeouts, out.search_timeouts > 0);
            (out.items, out.comparisons)
        }
        Algorithm::Derand => {
            let dc = DerandConfig { farm_factor: cfg.farm_factor, riffle: riffle_config(cfg), ..DerandConfig::default() };
            let out = derand_riffle_sort(&model, &input, &dc)?;
            if let Some(why) = out.fallback {
                flags.push(format!("fallback={}", serde_json::to_value(why)?.as_str().unwrap_or("unknown")));
            }
            flag(&mut flags, "bits_exhausted", true, out.bits_exhausted);
            flag(&mut flags, "bits_consumed", out.bits_consumed, out.fallback.is_none());
            flag(&mut flags, "bit_capacity", out.bit_capacity, out.fallback.is_none());
            (out.items, out.comparisons)
        }
        Algorithm::Basket => {
            let out = basket_sort(&model, &input, cfg.window(), &BasketConfig::default())?;
            (out.items, out.comparisons)
        }
    };
    let wall_time_ms = if cfg.timing { started.elapsed().as_millis() as u64 } else { 0 };
    let seq = Sequence::new(items)?;
    let report = seq.dislocation_report();
    let row = TrialReport {
        trial_id,
        seed,
        n,
        p: cfg.p,
        q: cfg.q,
        algorithm: cfg.algorithm.tag().into(),
        max_dislocation: report.max_dislocation,
        total_dislocation: report.total_dislocation,
        comparisons,
        wall_time_ms,
        flags: flags.join(";"),
    };
    Ok((row, seq.into_items()))
}

pub fn riffle_config(cfg: &ExperimentConfig) -> RiffleConfig {
    RiffleConfig {
        mode: cfg.mode,
        search: SearchConfig { mode: cfg.mode, ..SearchConfig::default() },
        assume_independent_order: cfg.assume_independent_order,
        ..RiffleConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub trials: usize,
    pub max_dislocation: Moments,
    pub total_dislocation: Moments,
    pub comparisons: Moments,
}

#[derive(Debug, Clone)]
pub struct TrialSet {
    pub reports: Vec<TrialReport>,
    pub summaries: Vec<SizeSummary>,
}

/// Aggregates reports per size, in order of first appearance.
pub fn summarize(reports: &[TrialReport]) -> Vec<SizeSummary> {
    let mut sizes: Vec<usize> = Vec::new();
    for r in reports {
        if !sizes.contains(&r.n) {
            sizes.push(r.n);
        }
    }
    sizes
        .into_iter()
        .map(|n| {
            let rows: Vec<&TrialReport> = reports.iter().filter(|r| r.n == n).collect();
            SizeSummary {
                n,
                trials: rows.len(),
                max_dislocation: Moments::of(rows.iter().map(|r| r.max_dislocation as f64)),
                total_dislocation: Moments::of(rows.iter().map(|r| r.total_dislocation as f64)),
                comparisons: Moments::of(rows.iter().map(|r| r.comparisons as f64)),
            }
        })
        .collect()
}

/// All trials of `cfg`. Trial ids run across sizes, so every trial of a run
/// has its own seed.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialSet> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64)> = cfg
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..cfg.trials).map(move |t| (n, (i * cfg.trials + t) as u64)))
        .collect();
    let reports = with_pool(|| jobs.par_iter().map(|&(n, id)| run_trial(cfg, n, id)).collect::<Result<Vec<_>>>())?;
    let summaries = summarize(&reports);
    Ok(TrialSet { reports, summaries })
}
