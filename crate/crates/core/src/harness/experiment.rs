//! End-to-end study: sample, add noise, estimate, compare with the oracle.
//!
//! Output layout under the experiment directory:
//!
//! ```text
//! signal_clean.csv
//! signal_noisy.csv            (only with [noise])
//! runs/<name>/estimate_clean.csv
//! runs/<name>/estimate_noisy.csv
//! runs/<name>/reference.csv
//! metrics.csv
//! metrics.json
//! ```

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{sliding_estimate, EstimateSeries, EstimatorKind};
use crate::fraccalc::{jumarie_reference_uniform, FracOrder, OracleSettings};
use crate::signals::{add_noise, sample_expression, SampledSignal, SignalExpr};

use super::config::{ExperimentConfig, RunConfig};
use super::csvio::{format_f64, write_series, write_signal};
use super::metrics::{lag_and_rmse, RunMetrics};

/// A reference derivative curve on the full sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub curve: SampledSignal,
    /// `h` vs `h/2` discrepancy of the oracle; `None` for closed forms.
    pub discrepancy: Option<f64>,
}

/// Reference for `kind` at order `order`: the closed-form classical
/// derivative for the integer estimator, the Grünwald–Letnikov oracle of
/// `(x^(n))^(α-n)` otherwise.
pub fn reference_curve(
    signal: &SignalExpr,
    kind: EstimatorKind,
    order: FracOrder,
    t_start: f64,
    dt: f64,
    count: usize,
    settings: &OracleSettings,
) -> Result<Reference> {
    if kind == EstimatorKind::MinimalInteger {
        let n = order.alpha() as usize;
        let values = (0..count).map(|i| signal.derivative(n, t_start + i as f64 * dt)).collect();
        return Ok(Reference {
            curve: SampledSignal::new(t_start, dt, values)?,
            discrepancy: None,
        });
    }
    let n = order.n();
    let r = jumarie_reference_uniform(|t| signal.derivative(n, t), order, t_start, dt, count, settings)?;
    Ok(Reference {
        curve: SampledSignal::new(t_start, dt, r.values)?,
        discrepancy: Some(r.discrepancy),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub target_snr_db: f64,
    pub seed: u64,
    pub sigma: f64,
    pub achieved_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub kind: EstimatorKind,
    pub alpha: f64,
    pub n: usize,
    pub k: f64,
    pub mu: f64,
    #[serde(rename = "T")]
    pub window: f64,
    pub m: usize,
    pub oracle_discrepancy: Option<f64>,
    pub clean: Option<RunMetrics>,
    pub noisy: Option<RunMetrics>,
    /// `None` on success.
    pub failure: Option<String>,
}

impl RunReport {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub signal: String,
    pub t_start: f64,
    pub dt: f64,
    pub count: usize,
    pub noise: Option<NoiseReport>,
    /// Estimates anchored before this time are excluded from every metric.
    pub metrics_from: f64,
    pub runs: Vec<RunReport>,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunReport> {
        self.runs.iter().filter(|r| r.failed())
    }

    pub fn run(&self, name: &str) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.name == name)
    }
}

fn trimmed(s: &EstimateSeries, from: f64) -> EstimateSeries {
    let first = s.t0s.iter().position(|&t| t >= from - 1e-9 * s.dt).unwrap_or(s.len());
    EstimateSeries {
        t0s: s.t0s[first..].to_vec(),
        values: s.values[first..].to_vec(),
        ..s.clone()
    }
}

struct RunOutput {
    clean: RunMetrics,
    noisy: Option<RunMetrics>,
}

fn run_one(
    run: &RunConfig,
    clean: &SampledSignal,
    noisy: Option<&SampledSignal>,
    reference: &Reference,
    metrics_from: f64,
    dir: &Path,
) -> Result<RunOutput> {
    let est_clean = sliding_estimate(clean, &run.params, run.kind)?;
    write_series(&dir.join("estimate_clean.csv"), &est_clean.t0s, &est_clean.values)?;
    write_signal(&dir.join("reference.csv"), &reference.curve)?;
    let clean_metrics = lag_and_rmse(&trimmed(&est_clean, metrics_from), &reference.curve)?;
    let noisy_metrics = match noisy {
        Some(y) => {
            let est = sliding_estimate(y, &run.params, run.kind)?;
            write_series(&dir.join("estimate_noisy.csv"), &est.t0s, &est.values)?;
            Some(lag_and_rmse(&trimmed(&est, metrics_from), &reference.curve)?)
        }
        None => None,
    };
    Ok(RunOutput {
        clean: clean_metrics,
        noisy: noisy_metrics,
    })
}

/// Runs every configured estimator and writes the files listed in the module
/// docs under `out_dir`.
///
/// A run whose oracle fails to converge (or whose lag exceeds a quarter of
/// the record) is reported with a `failure` entry; the other runs proceed.
/// Errors are returned only for problems that stop the whole study.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let clean = sample_expression(&cfg.signal, cfg.t_start, cfg.dt, cfg.count)?;
    write_signal(&out_dir.join("signal_clean.csv"), &clean)?;
    let (noisy, noise_report) = match &cfg.noise {
        Some(spec) => {
            let obs = add_noise(&clean, spec)?;
            write_signal(&out_dir.join("signal_noisy.csv"), &obs.noisy)?;
            let report = NoiseReport {
                target_snr_db: spec.target_snr_db,
                seed: spec.seed,
                sigma: obs.sigma,
                achieved_snr_db: obs.achieved_snr_db,
            };
            (Some(obs.noisy), Some(report))
        }
        None => (None, None),
    };

    // one oracle evaluation per distinct (order, closed-form-or-not)
    let mut keys: Vec<(u64, bool)> = Vec::new();
    for run in &cfg.runs {
        let key = (run.params.order.alpha().to_bits(), run.kind == EstimatorKind::MinimalInteger);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let references: Vec<Result<Reference>> = keys
        .iter()
        .map(|&(bits, integer)| {
            let order = FracOrder::new(f64::from_bits(bits))?;
            let kind = if integer {
                EstimatorKind::MinimalInteger
            } else {
                EstimatorKind::MinimalFractional
            };
            reference_curve(&cfg.signal, kind, order, cfg.t_start, cfg.dt, cfg.count, &cfg.reference)
        })
        .collect();

    let metrics_from = cfg.reference.gate_from;
    let runs: Vec<RunReport> = cfg
        .runs
        .par_iter()
        .map(|run| {
            let p = &run.params;
            let key = (p.order.alpha().to_bits(), run.kind == EstimatorKind::MinimalInteger);
            let reference = &references[keys.iter().position(|k| *k == key).expect("key collected above")];
            let mut report = RunReport {
                name: run.name.clone(),
                kind: run.kind,
                alpha: p.order.alpha(),
                n: p.order.n(),
                k: p.k,
                mu: p.mu,
                window: p.window,
                m: p.m,
                oracle_discrepancy: reference.as_ref().ok().and_then(|r| r.discrepancy),
                clean: None,
                noisy: None,
                failure: None,
            };
            let dir = out_dir.join("runs").join(&run.name);
            let outcome = reference.as_ref().map_err(|e| e.to_string()).and_then(|reference| {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e).to_string())?;
                run_one(run, &clean, noisy.as_ref(), reference, metrics_from, &dir).map_err(|e| e.to_string())
            });
            match outcome {
                Ok(out) => {
                    let insane = std::iter::once(&out.clean)
                        .chain(out.noisy.as_ref())
                        .any(|m| !m.lag_is_sane(cfg.count));
                    if insane {
                        report.failure = Some(format!("lag reached a quarter of the record ({} samples)", cfg.count / 4));
                    }
                    report.clean = Some(out.clean);
                    report.noisy = out.noisy;
                }
                Err(msg) => report.failure = Some(msg),
            }
            report
        })
        .collect();

    let report = ExperimentReport {
        signal: cfg.signal.to_string(),
        t_start: cfg.t_start,
        dt: cfg.dt,
        count: cfg.count,
        noise: noise_report,
        metrics_from,
        runs,
    };
    write_metrics(out_dir, &report)?;
    Ok(report)
}

fn write_metrics(out_dir: &Path, report: &ExperimentReport) -> Result<()> {
    let mut csv = String::from("run,input,kind,alpha,k,mu,T,m,rmse_raw,lag_samples,rmse_aligned,max_abs_err_aligned,status\n");
    for r in &report.runs {
        let status = if r.failed() { "failed" } else { "ok" };
        let inputs = [("clean", r.clean.as_ref()), ("noisy", r.noisy.as_ref())];
        for (input, m) in inputs {
            if input == "noisy" && report.noise.is_none() {
                continue;
            }
            let cols = match m {
                Some(m) => format!(
                    "{},{},{},{}",
                    format_f64(m.rmse_raw),
                    m.lag_samples,
                    format_f64(m.rmse_aligned),
                    format_f64(m.max_abs_err_aligned)
                ),
                None => ",,,".to_string(),
            };
            csv.push_str(&format!(
                "{},{input},{},{},{},{},{},{},{cols},{status}\n",
                r.name,
                r.kind,
                format_f64(r.alpha),
                format_f64(r.k),
                format_f64(r.mu),
                format_f64(r.window),
                r.m
            ));
        }
    }
    let path = out_dir.join("metrics.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let path = out_dir.join("metrics.json");
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
