//! End-to-end tests of the `jungle` binary: argument handling, exit codes,
//! output routing (CSV on stdout vs --out file), and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_jungle")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn run_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/portfolio.json")
}

#[test]
fn solve_binomial_prints_pmf_csv() {
    let out = run(&["solve", "binomial", "--n", "2", "--p", "0.5"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "loss_count,loss_fraction,probability");
    assert_eq!(lines[1], "0,0,0.25");
    assert_eq!(lines[2], "1,0.5,0.5");
    assert_eq!(lines[3], "2,1,0.25");
    assert_eq!(lines.len(), 4);
}

#[test]
fn solve_dandelion_reports_published_risk_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let pmf_path = dir.path().join("pmf.csv");
    let out = run(&[
        "solve",
        "dandelion",
        "--n",
        "800",
        "--p",
        "0.028",
        "--p0",
        "0.028",
        "--rho",
        "0.16",
        "--risk",
        "0.99",
        "--out",
        pmf_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    // CSV went to the file, so the summary owns stdout.
    let text = stdout(&out);
    assert!(text.contains("VaR(0.99) = 0.18875"), "stdout: {text}");
    assert!(text.contains("ES(0.99) = 0.197664495"), "stdout: {text}");
    assert!(text.contains("modes at counts: 18, 146"), "stdout: {text}");
    let csv = std::fs::read_to_string(&pmf_path).unwrap();
    assert_eq!(csv.lines().count(), 802); // header + counts 0..=800
}

#[test]
fn solve_risk_summary_moves_to_stderr_when_csv_owns_stdout() {
    let out = run(&[
        "solve", "diamond", "--n", "20", "--p", "0.4", "--rho", "0.3", "--risk", "0.99",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("loss_count,"), "stdout: {text}");
    assert!(!text.contains("VaR"), "risk lines leaked into the CSV");
    assert!(stderr(&out).contains("VaR(0.99)"));
}

#[test]
fn solve_accepts_raw_parameters() {
    let out = run(&[
        "solve", "diamond", "--n", "10", "--alpha", "-1", "--beta", "0.3",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 12);
}

#[test]
fn solve_rejects_mixed_parameterizations() {
    let out = run(&[
        "solve", "diamond", "--n", "10", "--p", "0.4", "--beta", "0.3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--alpha --beta"));
}

#[test]
fn invalid_probability_exits_one() {
    let out = run(&["solve", "binomial", "--n", "2", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn unknown_flag_exits_one_and_help_exits_zero() {
    let out = run(&["solve", "binomial", "--n", "2", "--p", "0.5", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("solve"));

    let out = run(&["scan", "diamond", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("lo:hi:steps"));
}

#[test]
fn calibrate_dandelion_emits_parameter_json() {
    let out = run(&[
        "calibrate",
        "dandelion",
        "--n",
        "800",
        "--p",
        "0.028",
        "--p0",
        "0.028",
        "--rho",
        "0.08",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["model"], "dandelion");
    let alpha0 = json["alpha0"].as_f64().unwrap();
    let alpha = json["alpha"].as_f64().unwrap();
    let beta = json["beta"].as_f64().unwrap();
    assert!((alpha0 - -72.0939387653857).abs() < 1e-9);
    assert!((alpha - -3.632834778624111).abs() < 1e-12);
    assert!((beta - 1.498032959206099).abs() < 1e-12);
    assert!(json["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn calibrate_diamond_infeasible_exits_one() {
    let out = run(&["calibrate", "diamond", "--n", "20", "--p", "0.4", "--rho", "-0.9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn calibrate_general_exact_roundtrips_the_fixture() {
    let out = run(&[
        "calibrate",
        "general",
        "--config",
        fixture().to_str().unwrap(),
        "--mode",
        "exact",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["model"], "general");
    assert_eq!(json["alpha"].as_array().unwrap().len(), 5);
    assert_eq!(json["beta"].as_array().unwrap().len(), 3);
    assert!(json["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn calibrate_sampled_with_tiny_budget_exits_two() {
    // Strong uniform coupling on 24 nodes cannot be matched in 8 stochastic
    // iterations from the independent start, so the evaluation pass must
    // report a gross residual.
    let spec = jungle::PortfolioSpec::complete(24, 0.1, 0.3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("complete24.json");
    std::fs::write(&path, spec.to_json_string().unwrap()).unwrap();
    let out = run(&[
        "calibrate",
        "general",
        "--config",
        path.to_str().unwrap(),
        "--mode",
        "sampled",
        "--max-iter",
        "8",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn scan_writes_grid_csv_and_summary() {
    let out = run(&[
        "scan", "diamond", "--n", "30", "--alpha", "-4:0:16", "--beta", "0:0.12:16",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,p,rho,grad_norm,on_ridge");
    assert_eq!(lines.len(), 1 + 16 * 16);
    let notes = stderr(&out);
    assert!(notes.contains("ridge samples:"), "stderr: {notes}");
    assert!(notes.contains("scanned 16 x 16 cells"), "stderr: {notes}");
}

#[test]
fn scan_rejects_malformed_range() {
    let out = run(&["scan", "diamond", "--n", "30", "--alpha", "2:-4:16"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_is_deterministic_for_a_fixed_seed() {
    let config = fixture();
    let args = [
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--draws",
        "400",
        "--burn-in",
        "200",
        "--thin",
        "2",
        "--seed",
        "3",
        "--risk",
        "0.95",
    ];
    let a = run(&args);
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    let text = stdout(&a);
    assert!(text.starts_with("draw,chain,loss_count,monetary_loss"));
    assert_eq!(text.lines().count(), 401);
    assert!(stderr(&a).contains("VaR(0.95)"));

    let b = run(&args);
    assert_eq!(text, stdout(&b), "same seed must reproduce the draws");

    // A capped worker pool must not change the draws either.
    let c = run_env(&args, &[("JUNGLE_THREADS", "1")]);
    assert_eq!(text, stdout(&c), "thread count must not affect output");
}

#[test]
fn sample_writes_binary_state_dump() {
    let dir = tempfile::tempdir().unwrap();
    let states = dir.path().join("states.bin");
    let out = run(&[
        "sample",
        "--config",
        fixture().to_str().unwrap(),
        "--draws",
        "50",
        "--burn-in",
        "50",
        "--thin",
        "1",
        "--seed",
        "9",
        "--states",
        states.to_str().unwrap(),
        "--out",
        dir.path().join("losses.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let bytes = std::fs::read(&states).unwrap();
    assert_eq!(&bytes[..4], b"JNGL");
    let decoded = jungle::dataio::read_states(&bytes[..]).unwrap();
    assert_eq!(decoded.n_draws(), 50);
    assert_eq!(decoded.n_nodes(), 5);
}

#[test]
fn risk_reads_a_stored_pmf() {
    let dir = tempfile::tempdir().unwrap();
    let pmf = dir.path().join("pmf.csv");
    let out = run(&[
        "solve",
        "diamond",
        "--n",
        "20",
        "--p",
        "0.4",
        "--rho",
        "0.3",
        "--out",
        pmf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let out = run(&[
        "risk",
        "--pmf",
        pmf.to_str().unwrap(),
        "--confidence",
        "0.95",
        "--confidence",
        "0.999",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("VaR(0.95)"), "stdout: {text}");
    assert!(text.contains("VaR(0.999)"), "stdout: {text}");
    // The calm and systemic humps of this bimodal fixture.
    assert!(text.contains("modes at counts: 3, 16"), "stdout: {text}");
}

#[test]
fn ensemble_reports_regime_counts() {
    let spec = jungle::PortfolioSpec::star(50, 0.028, 0.028, 0.12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("star.json");
    std::fs::write(&path, spec.to_json_string().unwrap()).unwrap();
    let out = run(&[
        "ensemble",
        "--config",
        path.to_str().unwrap(),
        "--dp",
        "0.002",
        "--drho",
        "0.01",
        "--samples",
        "12",
        "--seed",
        "1",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sample,dp,drho,var,es,n_modes,regime,params");
    assert_eq!(lines.len(), 13);
    let notes = stderr(&out);
    assert!(notes.contains("baseline VaR(0.99)"), "stderr: {notes}");
    assert!(notes.contains("regimes:"), "stderr: {notes}");
    assert!(notes.contains("systemic regime present:"), "stderr: {notes}");
}

#[test]
fn histogram_bins_a_rate_series() {
    let records = jungle::dataio::synthetic_series(6, 12, 1990, 0.03, 42);
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rates.csv");
    let file = std::fs::File::create(&data).unwrap();
    jungle::dataio::write_series(&records, file).unwrap();

    let out = run(&["histogram", "--data", data.to_str().unwrap(), "--bins", "6"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_lo,bin_hi,count");
    assert_eq!(lines.len(), 7);
    let total: usize = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 72);
    assert!(stderr(&out).contains("72 records"));
}

#[test]
fn bad_thread_env_exits_one() {
    let out = run_env(
        &["solve", "binomial", "--n", "2", "--p", "0.5"],
        &[("JUNGLE_THREADS", "abc")],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("JUNGLE_THREADS"));
}
