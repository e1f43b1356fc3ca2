use std::fs;
use std::process::Command;

use faultsort_harness::report::CSV_HEADER;
use faultsort_harness::trials::execute_trial;
use faultsort_harness::{brute_force_oracle, run_trials, write_reports, Algorithm, ExperimentConfig, InputKind, OutputFormat};

fn render(cfg: &ExperimentConfig) -> Vec<u8> {
    let set = run_trials(cfg).unwrap();
    let mut buf = Vec::new();
    write_reports(&mut buf, &set.reports, cfg.format).unwrap();
    buf
}

#[test]
fn single_element_single_row() {
    let cfg = ExperimentConfig { sizes: vec![1], trials: 1, ..ExperimentConfig::default() };
    let text = String::from_utf8(render(&cfg)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, [CSV_HEADER, "0,0,1,0.05,0.05,riffle,0,0,0,0,"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (i, algorithm) in [Algorithm::Riffle, Algorithm::Derand, Algorithm::Basket].into_iter().enumerate() {
        for format in [OutputFormat::Csv, OutputFormat::Jsonl] {
            let cfg = ExperimentConfig { sizes: vec![100, 700], trials: 3, seed: 99, algorithm, format, farm_factor: 2, ..ExperimentConfig::default() };
            let a = dir.path().join(format!("a{i}.out"));
            let b = dir.path().join(format!("b{i}.out"));
            fs::write(&a, render(&cfg)).unwrap();
            fs::write(&b, render(&cfg)).unwrap();
            let bytes = fs::read(&a).unwrap();
            assert!(!bytes.is_empty());
            assert_eq!(bytes, fs::read(&b).unwrap());
        }
    }
}

#[test]
fn per_trial_seeds_are_master_xor_id() {
    let cfg = ExperimentConfig { sizes: vec![16, 32], trials: 4, seed: 0b1010_0000, ..ExperimentConfig::default() };
    let set = run_trials(&cfg).unwrap();
    let ids: Vec<u64> = set.reports.iter().map(|r| r.trial_id).collect();
    assert_eq!(ids, (0..8).collect::<Vec<_>>());
    assert!(set.reports.iter().all(|r| r.seed == cfg.seed ^ r.trial_id));
}

fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    (mean, (m2 / (xs.len() - 1) as f64).sqrt())
}

#[test]
fn aggregates_match_recomputation_from_rows() {
    let cfg = ExperimentConfig { sizes: vec![1 << 14], trials: 50, p: 0.05, q: 0.05, seed: 7, ..ExperimentConfig::default() };
    let set = run_trials(&cfg).unwrap();
    let mut buf = Vec::new();
    write_reports(&mut buf, &set.reports, OutputFormat::Csv).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let column = |name: &str| -> Vec<f64> {
        let at = header.iter().position(|h| *h == name).unwrap();
        text.lines().skip(1).map(|l| l.split(',').nth(at).unwrap().parse().unwrap()).collect()
    };
    let summary = &set.summaries[0];
    assert_eq!(summary.trials, 50);
    for (name, moments) in [("max_dislocation", summary.max_dislocation), ("total_dislocation", summary.total_dislocation), ("comparisons", summary.comparisons)] {
        let (mean, sd) = welford(&column(name));
        assert!((moments.mean - mean).abs() <= 1e-9 * mean.abs().max(1.0), "{name} mean");
        assert!((moments.std_dev - sd).abs() <= 1e-6 * sd.max(1.0), "{name} sd");
    }
}

#[test]
fn reports_agree_with_oracle() {
    for (algorithm, input) in [(Algorithm::Riffle, InputKind::Random), (Algorithm::Basket, InputKind::BlockShuffled), (Algorithm::Derand, InputKind::Reversed)] {
        let cfg = ExperimentConfig { algorithm, input, block: 16, farm_factor: 2, p: 0.1, q: 0.1, seed: 3, ..ExperimentConfig::default() };
        let (row, items) = execute_trial(&cfg, 500, 2).unwrap();
        let oracle = brute_force_oracle(&items);
        assert!(oracle.is_permutation);
        assert_eq!((row.max_dislocation, row.total_dislocation), (oracle.max_dislocation, oracle.total_dislocation));
        assert!(row.max_dislocation <= row.total_dislocation);
    }
}

#[test]
fn adversarial_input_is_sortable() {
    let cfg = ExperimentConfig { input: InputKind::Adversarial, sizes: vec![300], p: 0.1, q: 0.1, ..ExperimentConfig::default() };
    let set = run_trials(&cfg).unwrap();
    assert_eq!(set.reports.len(), 1);
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        ExperimentConfig { trials: 0, ..ExperimentConfig::default() },
        ExperimentConfig { sizes: vec![64, 32], ..ExperimentConfig::default() },
        ExperimentConfig { sizes: vec![], ..ExperimentConfig::default() },
    ] {
        assert!(run_trials(&cfg).is_err());
    }
}

fn faultsort(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_faultsort")).args(args).env("FAULTSORT_THREADS", "1").output().unwrap()
}

#[test]
fn cli_sort_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sort.csv");
    let res = faultsort(&["sort", "--n", "200", "--p", "0.1", "--trials", "2", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn cli_subcommands_emit_rows() {
    let dsort = faultsort(&["dsort", "--n", "400", "--farm-factor", "2", "--emit", "jsonl", "--report-bit-usage"]);
    assert!(dsort.status.success());
    let row: serde_json::Value = serde_json::from_slice(&dsort.stdout).unwrap();
    assert_eq!(row["algorithm"], "derand");
    assert!(String::from_utf8_lossy(&dsort.stderr).contains("trial 0"));
    let bsort = faultsort(&["bsort", "--n", "512", "--wS", "32", "--p", "0.1"]);
    assert!(bsort.status.success());
    assert!(String::from_utf8_lossy(&bsort.stdout).contains(",basket,"));
}

#[test]
fn cli_exit_codes() {
    let ok = faultsort(&["experiment", "persistence", "--trials", "2000"]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    let bad = faultsort(&["sort", "--n", "10", "--p", "0.7"]);
    assert_eq!(bad.status.code(), Some(1));
    let unwritable = faultsort(&["sort", "--n", "10", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(unwritable.status.code(), Some(1));
}
