use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracdiff::harness::config::run_params;
use fracdiff::harness::csvio::{format_f64, write_series, write_signal};
use fracdiff::harness::{reference_curve, run_experiment, run_suite, ExperimentConfig, Suite};
use fracdiff::signals::sample_expression;
use fracdiff::{add_noise, sliding_estimate, Error, EstimatorKind, FracOrder, NoiseSpec, OracleSettings, SignalExpr};

/// Sliding-window Jacobi estimators of fractional derivatives.
#[derive(Debug, Parser)]
#[command(name = "fracdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one estimator on a sampled test signal.
    #[command(allow_negative_numbers = true)]
    Estimate(EstimateArgs),
    /// Run the study described by a TOML config.
    Experiment {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a reference derivative curve.
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
    /// Run a property suite: orthogonality, exactness, reduction,
    /// affine-identity, oracle-convergence or all.
    Validate { suite: String },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// exp_sin, monomial:<p>, constant:<c> or frac_taylor:order=..,c=..;..,c_alpha=..
    #[arg(long, default_value = "exp_sin")]
    signal: String,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long = "t-start", default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 4001)]
    count: usize,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Derivative order (required unless --kind integer is given --n).
    #[arg(long)]
    alpha: Option<f64>,
    /// Integer part of alpha; for --kind integer, the derivative order.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Window length; must be a multiple of dt.
    #[arg(long = "T")]
    window: f64,
    #[arg(long = "snr-db")]
    snr_db: Option<f64>,
    #[arg(long, requires = "snr_db")]
    seed: Option<u64>,
    #[arg(long, default_value = "minimal", value_parser = ["minimal", "affine", "integer"])]
    kind: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    alpha: f64,
    /// Closed-form classical derivative instead of the oracle (integer alpha).
    #[arg(long)]
    classical: bool,
    #[arg(long, default_value_t = OracleSettings::default().oversample)]
    oversample: usize,
    #[arg(long, default_value_t = OracleSettings::default().tolerance)]
    tolerance: f64,
    #[arg(long = "gate-from", default_value_t = OracleSettings::default().gate_from)]
    gate_from: f64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult = Result<(), Failure>;

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))
}

fn estimate(a: EstimateArgs) -> CliResult {
    let kind: EstimatorKind = a.kind.parse()?;
    let signal: SignalExpr = a.grid.signal.parse()?;
    let alpha = match (a.alpha, kind, a.n) {
        (Some(alpha), _, _) => alpha,
        (None, EstimatorKind::MinimalInteger, Some(n)) => n as f64,
        _ => return Err(Failure::Input("--alpha is required (or --n with --kind integer)".into())),
    };
    let params = run_params(kind, alpha, a.n, a.k, a.mu, a.window, a.grid.dt)?;
    let clean = sample_expression(&signal, a.grid.t_start, a.grid.dt, a.grid.count)?;
    create_dir(&a.out)?;
    write_signal(&a.out.join("signal_clean.csv"), &clean)?;
    let observed = match a.snr_db {
        Some(snr) => {
            if snr.is_nan() || snr <= 0.0 || snr.is_infinite() {
                return Err(Failure::Input(format!("--snr-db must be finite and > 0, got {snr}")));
            }
            let obs = add_noise(
                &clean,
                &NoiseSpec {
                    target_snr_db: snr,
                    seed: a.seed.unwrap_or(0),
                },
            )?;
            write_signal(&a.out.join("signal_noisy.csv"), &obs.noisy)?;
            println!("noise: sigma={} achieved_snr_db={}", format_f64(obs.sigma), format_f64(obs.achieved_snr_db));
            obs.noisy
        }
        None => clean,
    };
    let est = sliding_estimate(&observed, &params, kind)?;
    write_series(&a.out.join("estimate.csv"), &est.t0s, &est.values)?;
    println!(
        "{kind}: alpha={} k={} mu={} T={} m={} estimates={} -> {}",
        format_f64(alpha),
        format_f64(a.k),
        format_f64(a.mu),
        format_f64(a.window),
        params.m,
        est.len(),
        a.out.join("estimate.csv").display()
    );
    Ok(())
}

fn oracle(a: OracleArgs) -> CliResult {
    let signal: SignalExpr = a.grid.signal.parse()?;
    let order = FracOrder::new(a.alpha)?;
    let kind = if a.classical {
        if !order.is_integer() {
            return Err(Failure::Input(format!("--classical needs an integer alpha, got {}", a.alpha)));
        }
        EstimatorKind::MinimalInteger
    } else {
        EstimatorKind::MinimalFractional
    };
    let settings = OracleSettings {
        oversample: a.oversample,
        tolerance: a.tolerance,
        gate_from: a.gate_from,
    };
    let r = reference_curve(&signal, kind, order, a.grid.t_start, a.grid.dt, a.grid.count, &settings)?;
    create_dir(&a.out)?;
    let path = a.out.join("reference.csv");
    write_signal(&path, &r.curve)?;
    match r.discrepancy {
        Some(d) => println!("reference: {} points, h/2 discrepancy {} -> {}", r.curve.len(), format_f64(d), path.display()),
        None => println!("reference: {} points (closed form) -> {}", r.curve.len(), path.display()),
    }
    Ok(())
}

fn experiment(config: &Path, out: Option<PathBuf>) -> CliResult {
    let cfg = ExperimentConfig::from_path(config)?;
    let out = out.unwrap_or_else(|| cfg.output_dir.clone());
    let report = run_experiment(&cfg, &out)?;
    if let Some(n) = &report.noise {
        println!("noise: target {} dB, achieved {} dB", format_f64(n.target_snr_db), format_f64(n.achieved_snr_db));
    }
    println!("{:<24} {:<20} {:>6} {:>12} {:>5} {:>12} {:>5} {:>12}", "run", "kind", "m", "rmse_clean", "lag", "aligned", "lag_n", "aligned_n");
    for r in &report.runs {
        let cols = |m: Option<&fracdiff::harness::RunMetrics>| match m {
            Some(m) => (format!("{:.4e}", m.rmse_raw), m.lag_samples.to_string(), format!("{:.4e}", m.rmse_aligned)),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let (raw, lag, aligned) = cols(r.clean.as_ref());
        let (_, lag_n, aligned_n) = cols(r.noisy.as_ref());
        println!("{:<24} {:<20} {:>6} {:>12} {:>5} {:>12} {:>5} {:>12}", r.name, r.kind.as_str(), r.m, raw, lag, aligned, lag_n, aligned_n);
        if let Some(f) = &r.failure {
            eprintln!("run {} failed: {f}", r.name);
        }
    }
    println!("wrote {}", out.display());
    let failed: Vec<&str> = report.failures().map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failed runs: {}", failed.join(", "))))
    }
}

fn validate(suite: &str) -> CliResult {
    let suite: Suite = suite.parse()?;
    let results = run_suite(suite);
    for r in &results {
        println!("{}", r.to_json_line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    eprintln!("{suite}: {} checks, {failed} failed", results.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failed} check(s) failed")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Experiment { config, out } => experiment(&config, out),
        Command::Oracle(a) => oracle(a),
        Command::Validate { suite } => validate(&suite),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
