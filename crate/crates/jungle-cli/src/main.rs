//! `jungle` — credit-portfolio loss distributions with default contagion.
//!
//! Subcommands map onto the library one-to-one: `solve` evaluates a
//! closed-form model, `calibrate` inverts empirical moments, `sample` runs
//! the Gibbs sampler over a portfolio, `risk` summarizes a stored pmf,
//! `scan` maps the complete-graph phase plane, `ensemble` propagates input
//! uncertainty, and `histogram` bins a default-rate series.
//!
//! CSV output goes to `--out` when given, otherwise to stdout; human-readable
//! summary lines go to stdout when the CSV is in a file and to stderr when
//! the CSV occupies stdout, so piped output stays machine-parseable.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a solver failed to converge.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jungle::calibrate::{
    calibrate_dandelion, calibrate_diamond, calibrate_general, DandelionEmpirical,
    DiamondEmpirical, FitConfig, FitMode,
};
use jungle::dataio::{
    ensemble_to_csv, histogram, load_series_path, phase_to_csv, pmf_from_csv, pmf_to_csv,
    samples_to_csv, sig9, write_states,
};
use jungle::ensemble::{run_ensemble, RegimeLabel, UncertaintyBox};
use jungle::exact::{
    binomial_pmf, dandelion_pmf, diamond_pmf, pair_contagion_pmf, DandelionParams, DiamondParams,
};
use jungle::risk::{linspace, risk_report, scan_phase_grid, RiskReport};
use jungle::sampler::{gibbs_sample, losses_from_states, McmcConfig};
use jungle::{JungleError, LossPmf, PortfolioSpec, Result};

#[derive(Parser)]
#[command(
    name = "jungle",
    version,
    about = "Loss distributions for credit portfolios with default contagion",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form loss distribution.
    #[command(subcommand)]
    Solve(SolveModel),
    /// Invert empirical default moments into model parameters.
    #[command(subcommand)]
    Calibrate(CalibrateModel),
    /// Gibbs-sample a portfolio and write per-draw losses.
    Sample(SampleArgs),
    /// Risk measures and mode structure of a stored pmf.
    Risk(RiskArgs),
    /// Map moments and their gradient over a parameter window.
    #[command(subcommand)]
    Scan(ScanModel),
    /// Propagate input uncertainty through an ensemble of recalibrations.
    Ensemble(EnsembleArgs),
    /// Bin an annual default-rate series.
    Histogram(HistogramArgs),
}

#[derive(Subcommand)]
enum SolveModel {
    /// Independent names with a common default probability.
    Binomial(BinomialArgs),
    /// Common field with one coupled pair (nodes 1 and 2).
    Pair(PairArgs),
    /// Hub and spokes; the pmf counts peripheral defaults only.
    Dandelion(DandelionArgs),
    /// Complete graph with uniform coupling.
    Diamond(DiamondArgs),
}

#[derive(Args)]
struct BinomialArgs {
    /// Number of names.
    #[arg(long)]
    n: usize,
    /// Default probability.
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    output: SolveOutput,
}

#[derive(Args)]
struct PairArgs {
    /// Number of names (the coupled pair plus n-2 independents).
    #[arg(long)]
    n: usize,
    /// Common field parameter.
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Coupling between nodes 1 and 2.
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[command(flatten)]
    output: SolveOutput,
}

#[derive(Args)]
struct DandelionArgs {
    /// Number of peripheral names (hub excluded).
    #[arg(long)]
    n: usize,
    /// Peripheral default probability (with --p0/--rho: calibrate first).
    #[arg(long)]
    p: Option<f64>,
    /// Hub default probability.
    #[arg(long)]
    p0: Option<f64>,
    /// Hub-peripheral default correlation.
    #[arg(long)]
    rho: Option<f64>,
    /// Hub field (raw-parameter form, with --alpha/--beta).
    #[arg(long, allow_hyphen_values = true)]
    alpha0: Option<f64>,
    /// Peripheral field.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Hub-peripheral coupling.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[command(flatten)]
    output: SolveOutput,
}

#[derive(Args)]
struct DiamondArgs {
    /// Number of names.
    #[arg(long)]
    n: usize,
    /// Common default probability (with --rho: calibrate first).
    #[arg(long)]
    p: Option<f64>,
    /// Common pairwise default correlation.
    #[arg(long)]
    rho: Option<f64>,
    /// Common field (raw-parameter form, with --beta).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Uniform coupling.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[command(flatten)]
    output: SolveOutput,
}

#[derive(Args)]
struct SolveOutput {
    /// Also report VaR/ES/modes at this confidence level.
    #[arg(long)]
    risk: Option<f64>,
    /// Write the pmf CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CalibrateModel {
    /// Closed-form hub-and-spokes inversion.
    Dandelion(CalDandelionArgs),
    /// Newton solve on the complete graph.
    Diamond(CalDiamondArgs),
    /// Moment matching on an arbitrary portfolio (JSON spec).
    General(CalGeneralArgs),
}

#[derive(Args)]
struct CalDandelionArgs {
    /// Number of peripheral names (hub excluded).
    #[arg(long)]
    n: usize,
    /// Peripheral default probability.
    #[arg(long)]
    p: f64,
    /// Hub default probability.
    #[arg(long)]
    p0: f64,
    /// Hub-peripheral default correlation.
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Write the parameter JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalDiamondArgs {
    /// Number of names.
    #[arg(long)]
    n: usize,
    /// Common default probability.
    #[arg(long)]
    p: f64,
    /// Common pairwise default correlation.
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Write the parameter JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalGeneralArgs {
    /// Portfolio JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Gradient mode: exact enumeration or sampled.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Convergence tolerance (library default if omitted).
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep / iteration budget (library default if omitted).
    #[arg(long)]
    max_iter: Option<usize>,
    /// RNG seed for sampled mode; random if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the parameter JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Sampled,
}

impl From<ModeArg> for FitMode {
    fn from(m: ModeArg) -> FitMode {
        match m {
            ModeArg::Auto => FitMode::Auto,
            ModeArg::Exact => FitMode::Exact,
            ModeArg::Sampled => FitMode::Sampled,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Portfolio JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Total retained draws across chains.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Discarded sweeps per chain.
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Sweeps between retained draws.
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// RNG seed; random if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Calibration mode for the portfolio parameters.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Also report empirical VaR/ES at this confidence level.
    #[arg(long)]
    risk: Option<f64>,
    /// Write the per-draw loss CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the raw default states to this binary file.
    #[arg(long)]
    states: Option<PathBuf>,
}

#[derive(Args)]
struct RiskArgs {
    /// Loss pmf CSV (count,loss_fraction,probability).
    #[arg(long)]
    pmf: PathBuf,
    /// Confidence level; may be repeated.
    #[arg(long = "confidence", default_values_t = [0.99])]
    confidence: Vec<f64>,
}

#[derive(Subcommand)]
enum ScanModel {
    /// Complete graph: scan (alpha, beta) and flag the transition ridge.
    Diamond(ScanDiamondArgs),
}

#[derive(Args)]
struct ScanDiamondArgs {
    /// Number of names.
    #[arg(long)]
    n: usize,
    /// Field range as lo:hi:steps.
    #[arg(long, allow_hyphen_values = true, default_value = "-6:2:64")]
    alpha: RangeSpec,
    /// Coupling range as lo:hi:steps.
    #[arg(long, allow_hyphen_values = true, default_value = "0:0.2:64")]
    beta: RangeSpec,
    /// Write the grid CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Portfolio JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Half-width of the default-probability error band.
    #[arg(long)]
    dp: f64,
    /// Half-width of the correlation error band.
    #[arg(long)]
    drho: f64,
    /// Ensemble members to draw.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// RNG seed; random if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-member CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HistogramArgs {
    /// Default-rate series CSV (year,cohort,rate[,count]).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Write the bin CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `lo:hi:steps` axis specification.
#[derive(Clone, Copy, Debug, PartialEq)]
struct RangeSpec {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl RangeSpec {
    fn axis(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.steps)
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:steps, got {s:?}"));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| format!("bad lower bound {:?}", parts[0]))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| format!("bad upper bound {:?}", parts[1]))?;
        let steps: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad step count {:?}", parts[2]))?;
        if !lo.is_finite() || !hi.is_finite() {
            return Err("range bounds must be finite".into());
        }
        if hi <= lo {
            return Err(format!("range needs hi > lo, got {lo}:{hi}"));
        }
        if steps < 2 {
            return Err("range needs at least 2 steps".into());
        }
        Ok(RangeSpec { lo, hi, steps })
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; anything else is bad input.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = setup_threads().and_then(|()| run(cli)) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &JungleError) -> i32 {
    match e {
        JungleError::NonConvergence { .. } => 2,
        _ => 1,
    }
}

/// Cap the worker pool when JUNGLE_THREADS is set. Results are identical at
/// any thread count; this only bounds CPU usage.
fn setup_threads() -> Result<()> {
    match std::env::var("JUNGLE_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let threads: usize = v.parse().map_err(|_| {
                JungleError::Config(format!(
                    "JUNGLE_THREADS must be a positive integer, got {v:?}"
                ))
            })?;
            if threads == 0 {
                return Err(JungleError::Config(
                    "JUNGLE_THREADS must be a positive integer, got 0".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| JungleError::Config(format!("thread pool setup failed: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(model) => solve(model),
        Command::Calibrate(model) => calibrate(model),
        Command::Sample(args) => sample(args),
        Command::Risk(args) => risk(args),
        Command::Scan(ScanModel::Diamond(args)) => scan_diamond(args),
        Command::Ensemble(args) => ensemble(args),
        Command::Histogram(args) => histogram_cmd(args),
    }
}

/// Summary lines share stdout with CSV only when the CSV went to a file.
struct Notes {
    to_stdout: bool,
}

impl Notes {
    fn for_out(out: &Option<PathBuf>) -> Self {
        Notes {
            to_stdout: out.is_some(),
        }
    }

    fn line(&self, text: &str) {
        if self.to_stdout {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

fn out_writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout()),
    })
}

fn emit_risk(report: &RiskReport, notes: &Notes) {
    let c = report.confidence;
    notes.line(&format!("VaR({c}) = {}", sig9(report.var)));
    notes.line(&format!("ES({c}) = {}", sig9(report.es)));
    notes.line(&format!("mean loss rate = {}", sig9(report.mean)));
    let counts: Vec<String> = report.modes.iter().map(|m| m.count.to_string()).collect();
    notes.line(&format!("modes at counts: {}", counts.join(", ")));
}

fn write_solution(pmf: &LossPmf, output: &SolveOutput, notes: &Notes) -> Result<()> {
    if let Some(c) = output.risk {
        let report = risk_report(pmf, c)?;
        emit_risk(&report, notes);
    }
    pmf_to_csv(pmf, out_writer(&output.out)?)
}

fn solve(model: SolveModel) -> Result<()> {
    match model {
        SolveModel::Binomial(args) => {
            let notes = Notes::for_out(&args.output.out);
            let pmf = binomial_pmf(args.n, args.p)?;
            write_solution(&pmf, &args.output, &notes)
        }
        SolveModel::Pair(args) => {
            let notes = Notes::for_out(&args.output.out);
            let sol = pair_contagion_pmf(args.n, args.alpha, args.beta)?;
            notes.line(&format!(
                "p1 = {}, q12 = {}, rho12 = {}",
                sig9(sol.p1),
                sig9(sol.q12),
                sig9(sol.rho12)
            ));
            write_solution(&sol.pmf, &args.output, &notes)
        }
        SolveModel::Dandelion(args) => {
            let notes = Notes::for_out(&args.output.out);
            let params = dandelion_params(&args, &notes)?;
            let pmf = dandelion_pmf(&params)?;
            write_solution(&pmf, &args.output, &notes)
        }
        SolveModel::Diamond(args) => {
            let notes = Notes::for_out(&args.output.out);
            let params = diamond_params(&args, &notes)?;
            let pmf = diamond_pmf(&params)?;
            write_solution(&pmf, &args.output, &notes)
        }
    }
}

fn dandelion_params(args: &DandelionArgs, notes: &Notes) -> Result<DandelionParams> {
    match (args.p, args.p0, args.rho, args.alpha0, args.alpha, args.beta) {
        (Some(p), Some(p0), Some(rho), None, None, None) => {
            let cal = calibrate_dandelion(&DandelionEmpirical {
                n: args.n,
                p,
                p0,
                rho,
            })?;
            notes.line(&format!(
                "calibrated: alpha0 = {}, alpha = {}, beta = {}",
                sig9(cal.params.alpha0),
                sig9(cal.params.alpha),
                sig9(cal.params.beta)
            ));
            Ok(cal.params)
        }
        (None, None, None, Some(alpha0), Some(alpha), Some(beta)) => {
            DandelionParams::new(args.n, alpha0, alpha, beta)
        }
        _ => Err(JungleError::Config(
            "give either --p --p0 --rho or --alpha0 --alpha --beta".into(),
        )),
    }
}

fn diamond_params(args: &DiamondArgs, notes: &Notes) -> Result<DiamondParams> {
    match (args.p, args.rho, args.alpha, args.beta) {
        (Some(p), Some(rho), None, None) => {
            let cal = calibrate_diamond(&DiamondEmpirical { n: args.n, p, rho })?;
            notes.line(&format!(
                "calibrated: alpha = {}, beta = {}",
                sig9(cal.params.alpha),
                sig9(cal.params.beta)
            ));
            if cal.multiple_roots() {
                notes.line(&format!(
                    "note: {} further distinct root(s) match the same moments",
                    cal.alternates.len()
                ));
            }
            Ok(cal.params)
        }
        (None, None, Some(alpha), Some(beta)) => DiamondParams::new(args.n, alpha, beta),
        _ => Err(JungleError::Config(
            "give either --p --rho or --alpha --beta".into(),
        )),
    }
}

fn calibrate(model: CalibrateModel) -> Result<()> {
    match model {
        CalibrateModel::Dandelion(args) => {
            let cal = calibrate_dandelion(&DandelionEmpirical {
                n: args.n,
                p: args.p,
                p0: args.p0,
                rho: args.rho,
            })?;
            let json = serde_json::json!({
                "model": "dandelion",
                "n_peripheral": args.n,
                "alpha0": cal.params.alpha0,
                "alpha": cal.params.alpha,
                "beta": cal.params.beta,
                "residual": cal.residual,
                "iterations": cal.iterations,
            });
            write_json(&json, &args.out)
        }
        CalibrateModel::Diamond(args) => {
            let cal = calibrate_diamond(&DiamondEmpirical {
                n: args.n,
                p: args.p,
                rho: args.rho,
            })?;
            if cal.multiple_roots() {
                eprintln!(
                    "note: {} further distinct root(s) match the same moments",
                    cal.alternates.len()
                );
            }
            let alternates: Vec<_> = cal
                .alternates
                .iter()
                .map(|p| serde_json::json!({"alpha": p.alpha, "beta": p.beta}))
                .collect();
            let json = serde_json::json!({
                "model": "diamond",
                "n": args.n,
                "alpha": cal.params.alpha,
                "beta": cal.params.beta,
                "residual": cal.residual,
                "iterations": cal.iterations,
                "alternates": alternates,
            });
            write_json(&json, &args.out)
        }
        CalibrateModel::General(args) => {
            let spec = PortfolioSpec::from_json_path(&args.config)?;
            let config = FitConfig {
                mode: args.mode.into(),
                tol: args.tol,
                max_iter: args.max_iter,
                seed: args.seed.unwrap_or_else(rand::random),
                ..FitConfig::default()
            };
            let cal = calibrate_general(&spec, &config)?;
            let edges: Vec<_> = cal
                .params
                .beta()
                .iter()
                .map(|(e, &b)| serde_json::json!({"i": e.i(), "j": e.j(), "beta": b}))
                .collect();
            let json = serde_json::json!({
                "model": "general",
                "alpha": cal.params.alpha(),
                "beta": edges,
                "residual": cal.residual,
                "iterations": cal.iterations,
            });
            write_json(&json, &args.out)
        }
    }
}

fn write_json(value: &serde_json::Value, out: &Option<PathBuf>) -> Result<()> {
    let mut w = out_writer(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(JungleError::from)?;
    writeln!(w)?;
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let notes = Notes::for_out(&args.out);
    let spec = PortfolioSpec::from_json_path(&args.config)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let fit = calibrate_general(
        &spec,
        &FitConfig {
            mode: args.mode.into(),
            seed,
            ..FitConfig::default()
        },
    )?;
    let run = gibbs_sample(
        &fit.params,
        &McmcConfig {
            draws: args.draws,
            chains: args.chains,
            burn_in: args.burn_in,
            thin: args.thin,
            seed,
        },
    )?;
    for w in &run.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let dist = losses_from_states(&run.samples, &spec)?;
    if let Some(path) = &args.states {
        write_states(&run.samples, BufWriter::new(File::create(path)?))?;
    }
    if let Some(c) = args.risk {
        let var = dist.quantile(c);
        let es = dist.expected_shortfall(c);
        notes.line(&format!(
            "VaR({c}) = {} ({} of exposure)",
            sig9(var),
            sig9(var / dist.total_exposure)
        ));
        notes.line(&format!(
            "ES({c}) = {} ({} of exposure)",
            sig9(es),
            sig9(es / dist.total_exposure)
        ));
    }
    samples_to_csv(&dist, out_writer(&args.out)?)
}

fn risk(args: RiskArgs) -> Result<()> {
    let pmf = pmf_from_csv(File::open(&args.pmf)?)?;
    let notes = Notes { to_stdout: true };
    for &c in &args.confidence {
        let report = risk_report(&pmf, c)?;
        emit_risk(&report, &notes);
    }
    Ok(())
}

fn scan_diamond(args: ScanDiamondArgs) -> Result<()> {
    let notes = Notes::for_out(&args.out);
    let grid = scan_phase_grid(args.n, &args.alpha.axis(), &args.beta.axis())?;
    notes.line(&format!(
        "scanned {} x {} cells at n = {}",
        args.alpha.steps, args.beta.steps, args.n
    ));
    notes.line(&format!("ridge samples: {}", grid.ridge().len()));
    match grid.critical_point() {
        Some((a, b)) => notes.line(&format!(
            "critical point estimate: alpha = {}, beta = {}",
            sig9(a),
            sig9(b)
        )),
        None => notes.line("no critical point inside the scanned window"),
    }
    phase_to_csv(&grid, out_writer(&args.out)?)
}

fn ensemble(args: EnsembleArgs) -> Result<()> {
    let notes = Notes::for_out(&args.out);
    let spec = PortfolioSpec::from_json_path(&args.config)?;
    let bbox = UncertaintyBox {
        dp: args.dp,
        drho: args.drho,
        samples: args.samples,
        seed: args.seed.unwrap_or_else(rand::random),
    };
    let report = run_ensemble(&spec, &bbox, args.confidence)?;
    let c = args.confidence;
    notes.line(&format!(
        "baseline VaR({c}) = {}, ES({c}) = {}",
        sig9(report.baseline_var),
        sig9(report.baseline_es)
    ));
    let (var_lo, var_hi) = report.var_range();
    notes.line(&format!(
        "ensemble VaR range = [{}, {}], dispersion = {}",
        sig9(var_lo),
        sig9(var_hi),
        sig9(report.dispersion())
    ));
    notes.line(&format!(
        "regimes: unimodal {}, near_transition {}, bimodal {}",
        report.count(RegimeLabel::Unimodal),
        report.count(RegimeLabel::NearTransition),
        report.count(RegimeLabel::Bimodal)
    ));
    notes.line(&format!(
        "systemic regime present: {}",
        if report.any_systemic() { "yes" } else { "no" }
    ));
    if report.skipped > 0 {
        notes.line(&format!(
            "skipped members (no feasible resample): {}",
            report.skipped
        ));
    }
    ensemble_to_csv(&report, out_writer(&args.out)?)
}

fn histogram_cmd(args: HistogramArgs) -> Result<()> {
    let notes = Notes::for_out(&args.out);
    let records = load_series_path(&args.data)?;
    let rates: Vec<f64> = records.iter().map(|r| r.rate).collect();
    let bins = histogram(&rates, args.bins)?;
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    notes.line(&format!(
        "{} records, mean rate = {}",
        records.len(),
        sig9(mean)
    ));
    let mut w = out_writer(&args.out)?;
    writeln!(w, "bin_lo,bin_hi,count")?;
    for (lo, hi, count) in bins {
        writeln!(w, "{},{},{count}", sig9(lo), sig9(hi))?;
    }
    Ok(())
}
