//! End-to-end acceptance gates. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use faultsort_harness::experiments::{self, ExperimentSummary};

const SEED: u64 = 20_240_601;

struct Criterion {
    id: u32,
    name: &'static str,
    budget_s: u64,
    run: fn() -> Result<ExperimentSummary>,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "exactness at p=0", budget_s: 30, run: || experiments::exactness(&[1, 10, 1_000, 100_000], 10, SEED) },
    Criterion { id: 2, name: "persistence and antisymmetry", budget_s: 5, run: || experiments::persistence(1_000_000, SEED) },
    Criterion { id: 3, name: "error-rate calibration", budget_s: 10, run: || experiments::calibration(&[0.05, 0.1, 0.25], 1_000_000, SEED) },
    Criterion {
        id: 4,
        name: "dislocation scaling",
        budget_s: 600,
        run: || experiments::dislocation_scaling(&[1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16], 50, 0.05, SEED),
    },
    Criterion { id: 5, name: "noisy search accuracy", budget_s: 120, run: || experiments::search_accuracy(100_000, 0.1, 10_000, SEED) },
    Criterion { id: 6, name: "basket sort per-round bounds", budget_s: 60, run: || experiments::basket_rounds(10_000, 0.1, 10, SEED) },
    Criterion { id: 7, name: "random subset", budget_s: 60, run: || experiments::subset_sampler(100_000, 1_000, 10_000, SEED) },
    Criterion { id: 8, name: "xor bias", budget_s: 10, run: || experiments::xor_bias(1_000_000, &[1, 2, 4], SEED) },
    Criterion { id: 9, name: "lower-bound floors", budget_s: 180, run: || experiments::lower_bounds(1 << 14, 0.1, 50, SEED) },
    Criterion {
        id: 10,
        name: "comparison scaling",
        budget_s: 300,
        run: || experiments::comparison_scaling(&[1 << 14, 1 << 15, 1 << 16], 3, 1 << 14, &[16, 32, 64, 128], SEED),
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let started = Instant::now();
        let result = (c.run)();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(summary) => {
                let verdict = if summary.passed() { "PASS" } else { "FAIL" };
                println!("{verdict} criterion {}: {} ({secs:.1}s, budget {}s, seed {SEED})", c.id, c.name, c.budget_s);
                for note in &summary.notes {
                    println!("    {note}");
                }
                for check in &summary.checks {
                    println!("    {check}");
                }
                failed += usize::from(!summary.passed());
            }
            Err(err) => {
                println!("FAIL criterion {}: {} ({secs:.1}s): error: {err:#}", c.id, c.name);
                failed += 1;
            }
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
