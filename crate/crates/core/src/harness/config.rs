//! Experiment configuration (TOML).
//!
//! ```toml
//! schema_version = 1
//! output_dir = "out/exp_sin"     # relative to the working directory
//! t_start = 0.0
//! dt = 1e-3
//! count = 4001
//!
//! [signal]
//! name = "exp_sin"               # or monomial (p), constant (c), frac_taylor
//!
//! [noise]                        # optional
//! target_snr_db = 28.07
//! seed = 7
//!
//! [reference]                    # optional, these are the defaults
//! oversample = 10                # oracle step h = dt / oversample
//! tolerance = 1e-3               # h vs h/2 gate
//! gate_from = 0.5                # metrics and the gate ignore t0 < gate_from
//!
//! [[runs]]
//! name = "alpha05_minimal"
//! kind = "minimal"               # minimal | affine | integer
//! alpha = 0.5
//! n = 0                          # optional, checked against alpha
//! k = 0.0
//! mu = 0.0
//! T = 0.25
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorParams};
use crate::fraccalc::{FracOrder, OracleSettings};
use crate::signals::{NoiseSpec, SignalExpr};

pub const SCHEMA_VERSION: u32 = 1;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    signal: SignalExpr,
    #[serde(default)]
    t_start: f64,
    dt: f64,
    count: usize,
    noise: Option<NoiseSpec>,
    #[serde(default)]
    reference: OracleSettings,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    runs: Vec<RawRun>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    name: String,
    kind: EstimatorKind,
    alpha: f64,
    n: Option<usize>,
    #[serde(default)]
    k: f64,
    #[serde(default)]
    mu: f64,
    #[serde(rename = "T")]
    window: f64,
}

/// One estimator run of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub kind: EstimatorKind,
    pub params: EstimatorParams,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub signal: SignalExpr,
    pub t_start: f64,
    pub dt: f64,
    pub count: usize,
    pub noise: Option<NoiseSpec>,
    pub reference: OracleSettings,
    pub output_dir: PathBuf,
    pub runs: Vec<RunConfig>,
}

fn field_err(field: impl AsRef<str>, e: Error) -> Error {
    let field = field.as_ref();
    match e {
        Error::InvalidParameter { field: f, reason } => Error::Config(format!("{field}.{f}: {reason}")),
        other => Error::Config(format!("{field}: {other}")),
    }
}

fn bad(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

/// Builds the estimator parameters of one run against the sampling step.
pub fn run_params(kind: EstimatorKind, alpha: f64, n: Option<usize>, k: f64, mu: f64, window: f64, dt: f64) -> Result<EstimatorParams> {
    let order = match n {
        Some(n) if kind != EstimatorKind::MinimalInteger => FracOrder::with_n(alpha, n)?,
        _ => FracOrder::new(alpha)?,
    };
    if kind == EstimatorKind::MinimalInteger {
        if !order.is_integer() {
            return Err(Error::invalid("alpha", format!("integer kind needs an integer order, got {alpha}")));
        }
        if let Some(n) = n {
            if n as f64 != alpha {
                return Err(Error::invalid("n", format!("integer kind differentiates n = alpha times, got n = {n}, alpha = {alpha}")));
            }
        }
    }
    EstimatorParams::for_step(order, k, mu, window, dt)
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        Self::validate(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(raw: RawConfig) -> Result<Self> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
            ));
        }
        if !(raw.dt > 0.0) || !raw.dt.is_finite() {
            return Err(bad("dt", format!("must be finite and > 0, got {}", raw.dt)));
        }
        if !raw.t_start.is_finite() {
            return Err(bad("t_start", "must be finite"));
        }
        if raw.count < 2 {
            return Err(bad("count", format!("needs at least 2 samples, got {}", raw.count)));
        }
        if let SignalExpr::FracTaylor(sig) = &raw.signal {
            crate::fraccalc::FracTaylorSignal::new(sig.t0, sig.order, sig.c.clone(), sig.c_alpha, sig.c_2an)
                .map_err(|e| field_err("signal", e))?;
        }
        if let Some(noise) = &raw.noise {
            if !(noise.target_snr_db > 0.0) || !noise.target_snr_db.is_finite() {
                return Err(bad("noise.target_snr_db", format!("must be finite and > 0, got {}", noise.target_snr_db)));
            }
        }
        let r = &raw.reference;
        if r.oversample == 0 {
            return Err(bad("reference.oversample", "must be >= 1"));
        }
        if !(r.tolerance > 0.0) {
            return Err(bad("reference.tolerance", format!("must be > 0, got {}", r.tolerance)));
        }
        if raw.runs.is_empty() {
            return Err(bad("runs", "at least one [[runs]] entry is required"));
        }
        let mut names = HashSet::new();
        let mut runs = Vec::with_capacity(raw.runs.len());
        for (i, run) in raw.runs.iter().enumerate() {
            let field = format!("runs[{i}]");
            if run.name.is_empty() || !run.name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
                return Err(bad(&format!("{field}.name"), format!("`{}` must be non-empty [A-Za-z0-9_.-]", run.name)));
            }
            if !names.insert(run.name.clone()) {
                return Err(bad(&format!("{field}.name"), format!("duplicate run name `{}`", run.name)));
            }
            let params = run_params(run.kind, run.alpha, run.n, run.k, run.mu, run.window, raw.dt)
                .map_err(|e| field_err(&field, e))?;
            if params.m + 1 > raw.count {
                return Err(bad(&format!("{field}.T"), format!("window of {} samples exceeds count = {}", params.m + 1, raw.count)));
            }
            if run.kind == EstimatorKind::AffineFractional {
                crate::estimators::affine_lambda(params.order.alpha(), params.k, params.order.n())
                    .map_err(|e| field_err(&field, e))?;
            }
            runs.push(RunConfig {
                name: run.name.clone(),
                kind: run.kind,
                params,
            });
        }
        Ok(ExperimentConfig {
            signal: raw.signal,
            t_start: raw.t_start,
            dt: raw.dt,
            count: raw.count,
            noise: raw.noise,
            reference: raw.reference,
            output_dir: raw.output_dir,
            runs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
dt = 1e-3
count = 1001

[signal]
name = "exp_sin"

[[runs]]
name = "a"
kind = "affine"
alpha = 0.5
T = 0.26
"#;

    fn expect_err(text: &str, needle: &str) {
        match ExperimentConfig::from_toml_str(text) {
            Err(Error::Config(msg)) => assert!(msg.contains(needle), "`{msg}` lacks `{needle}`"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.runs[0].params.m, 260);
        assert_eq!(cfg.runs[0].kind, EstimatorKind::AffineFractional);
        assert_eq!(cfg.reference, OracleSettings::default());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert!(cfg.noise.is_none());
    }

    #[test]
    fn signal_variants() {
        let cfg = ExperimentConfig::from_toml_str(&BASE.replace(
            "name = \"exp_sin\"",
            "name = \"frac_taylor\"\nt0 = 0.0\norder = 0.5\nc = [1.0]\nc_alpha = 2.0",
        ))
        .unwrap();
        assert!(matches!(cfg.signal, SignalExpr::FracTaylor(_)));
        expect_err(
            &BASE.replace("name = \"exp_sin\"", "name = \"frac_taylor\"\norder = 1.5\nt0 = 0.0\nc = [1.0]\nc_alpha = 2.0"),
            "signal",
        );
        expect_err(&BASE.replace("\"exp_sin\"", "\"chirp\""), "chirp");
    }

    #[test]
    fn field_identification() {
        expect_err(&BASE.replace("schema_version = 1", "schema_version = 2"), "schema_version");
        expect_err(&BASE.replace("T = 0.26", "T = 0.2605"), "runs[0]");
        expect_err(&BASE.replace("alpha = 0.5", "alpha = 0.5\nn = 1"), "runs[0].n");
        expect_err(&BASE.replace("alpha = 0.5", "alpha = 1.0005"), "runs[0]");
        expect_err(&BASE.replace("kind = \"affine\"", "kind = \"integer\""), "runs[0].alpha");
        expect_err(&BASE.replace("count = 1001", "count = 100"), "runs[0].T");
        expect_err(&format!("{BASE}\n[noise]\ntarget_snr_db = -3.0\nseed = 1\n"), "noise.target_snr_db");
        expect_err(&format!("{BASE}\n[[runs]]\nname = \"a\"\nkind = \"minimal\"\nalpha = 0.5\nT = 0.25\n"), "duplicate");
        // unknown keys are reported by the parser together with their line
        expect_err(&BASE.replace("dt = 1e-3", "dt = 1e-3\nbogus = 3"), "bogus");
        expect_err(&BASE.replace("dt = 1e-3", "dt = 1e-3\nbogus = 3"), "line 4");
    }

    #[test]
    fn integer_runs() {
        let text = BASE.replace("kind = \"affine\"\nalpha = 0.5", "kind = \"integer\"\nalpha = 2.0\nn = 2");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.runs[0].params.order.alpha(), 2.0);
        expect_err(&text.replace("n = 2", "n = 1"), "runs[0].n");
    }
}
