//! Property suites behind `fracdiff validate`.
//!
//! Each check yields one [`CheckResult`]; a suite passes when all of its
//! checks do. Results serialize to one JSON object per line.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    affine_fractional_estimate, affine_lambda, minimal_fractional_kernel, minimal_integer_kernel, EstimatorParams,
};
use crate::fraccalc::{gl_fractional_difference, jumarie_reference, rl_monomial, FracOrder, FracTaylorSignal};
use crate::quad::CompositeGauss;
use crate::signals::{GaussianStream, SampledSignal};
use crate::specfun::{jacobi_weight, JacobiParams, JacobiPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Orthogonality,
    Exactness,
    Reduction,
    AffineIdentity,
    OracleConvergence,
    All,
}

impl Suite {
    pub const NAMED: [Suite; 5] = [
        Suite::Orthogonality,
        Suite::Exactness,
        Suite::Reduction,
        Suite::AffineIdentity,
        Suite::OracleConvergence,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Orthogonality => "orthogonality",
            Suite::Exactness => "exactness",
            Suite::Reduction => "reduction",
            Suite::AffineIdentity => "affine-identity",
            Suite::OracleConvergence => "oracle-convergence",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::NAMED
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.as_str() == s || x.as_str().replace('-', "_") == s)
            .copied()
            .ok_or_else(|| {
                Error::invalid(
                    "suite",
                    format!("unknown suite `{s}` (orthogonality, exactness, reduction, affine-identity, oracle-convergence, all)"),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: String,
    /// The measured error (or, for lower-bound checks, the measured quantity).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(suite: Suite, check: String, value: f64, tolerance: f64) -> Self {
        CheckResult {
            suite: suite.as_str(),
            check,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    fn at_least(suite: Suite, check: String, value: f64, bound: f64) -> Self {
        CheckResult {
            suite: suite.as_str(),
            check,
            value,
            tolerance: bound,
            passed: value >= bound,
        }
    }

    fn failed(suite: Suite, check: String, err: &Error) -> Self {
        CheckResult {
            suite: suite.as_str(),
            check: format!("{check}: {err}"),
            value: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    match suite {
        Suite::Orthogonality => orthogonality(),
        Suite::Exactness => exactness(),
        Suite::Reduction => reduction(),
        Suite::AffineIdentity => affine_identity(),
        Suite::OracleConvergence => oracle_convergence(),
        Suite::All => Suite::NAMED.iter().flat_map(|&s| run_suite(s)).collect(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const NORM_REFINEMENT_TOL: f64 = 1e-8;

/// Gram entries `∫ w P_i P_j` for `i <= j <= 6` on a composite Gauss rule.
fn gram(mu: f64, k: f64, rule: &CompositeGauss) -> [[f64; 7]; 7] {
    let polys: Vec<JacobiPoly> = (0..=6)
        .map(|n| JacobiPoly::new(&JacobiParams::new(n, mu, k).expect("exponents > -1")))
        .collect();
    let w = JacobiParams::new(0, mu, k).expect("exponents > -1");
    let mut g = [[0.0; 7]; 7];
    let (nodes, weights) = (rule.nodes(), rule.weights());
    for (&t, &q) in nodes.iter().zip(weights) {
        let wt = q * jacobi_weight(&w, t).expect("interior node");
        let mut minus = [0.0; 7];
        let mut plus = [0.0; 7];
        for e in 0..7 {
            minus[e] = (t - 1.0).powi(e as i32);
            plus[e] = t.powi(e as i32);
        }
        let mut p = [0.0; 7];
        for (slot, poly) in p.iter_mut().zip(&polys) {
            *slot = poly.eval_from_powers(&minus, &plus);
        }
        for i in 0..7 {
            for j in i..7 {
                g[i][j] += wt * p[i] * p[j];
            }
        }
    }
    g
}

fn orthogonality() -> Vec<CheckResult> {
    let s = Suite::Orthogonality;
    let coarse = CompositeGauss::new(0.0, 1.0, 20_000, 5);
    let fine = CompositeGauss::new(0.0, 1.0, 200_000, 5);
    let exps = [0.0, 1.0, 2.5];
    let pairs: Vec<(f64, f64)> = exps.iter().flat_map(|&mu| exps.iter().map(move |&k| (mu, k))).collect();
    pairs
        .par_iter()
        .map(|&(mu, k)| {
            let mut out = Vec::new();
            let g = gram(mu, k, &coarse);
            let gf = gram(mu, k, &fine);
            for n in 1..=6 {
                for m in 0..n {
                    out.push(CheckResult::at_most(
                        s,
                        format!("mu={mu} k={k} <P{m},P{n}>"),
                        g[m][n].abs(),
                        ORTHOGONALITY_TOL,
                    ));
                }
            }
            for n in 0..=6 {
                let check = format!("mu={mu} k={k} |P{n}|^2 refinement");
                if g[n][n] > 0.0 {
                    out.push(CheckResult::at_most(s, check, rel(g[n][n], gf[n][n]), NORM_REFINEMENT_TOL));
                } else {
                    out.push(CheckResult::at_least(s, check.replace("refinement", "positive"), g[n][n], f64::MIN_POSITIVE));
                }
            }
            out
        })
        .flatten()
        .collect()
}

pub const EXACTNESS_M: usize = 10_000;
pub const MINIMAL_EXACTNESS_TOL: f64 = 1e-5;
pub const AFFINE_EXACTNESS_TOL: f64 = 1e-4;
/// Smallest relative miss of a minimal sub-estimate on a second-order
/// truncation that still counts as a real (not round-off) bias.
pub const SUB_ESTIMATE_MIN_BIAS: f64 = 1e-3;
/// Integer estimator on monomials of degree `<= n`: the trapezoid rule leaves
/// an `O(h²)` term (`2h²` relative for `n = 1`, about `2e-8` at `m = 1e4`).
/// Errors below this are treated as round-off.
pub const INTEGER_ROUNDOFF: f64 = 1e-12;
/// Allowed deviation of `err(m) / err(2m)` from 4.
pub const INTEGER_RATIO_TOL: f64 = 1e-3;

/// Fractional Taylor test cases `(α, k, μ, c, c_α, c_{2α-n})`.
pub fn exactness_cases() -> Vec<(f64, f64, f64, Vec<f64>, f64, f64)> {
    vec![
        (0.5, 0.0, 0.0, vec![1.3], 5.0, 4.0),
        (0.7, 0.0, 0.0, vec![-0.4], 2.5, -3.0),
        (0.5, 1.0, 1.0, vec![0.2], -1.5, 2.0),
        (1.5, 0.0, 0.0, vec![1.0, -2.0], 3.0, 1.5),
    ]
}

const EXACTNESS_T: f64 = 0.5;

fn window_samples(sig: &FracTaylorSignal, m: usize) -> SampledSignal {
    let dt = EXACTNESS_T / m as f64;
    let values = (0..=m).map(|i| sig.eval(i as f64 * dt)).collect();
    SampledSignal::new(0.0, dt, values).expect("dt > 0")
}

fn exactness() -> Vec<CheckResult> {
    let s = Suite::Exactness;
    let mut out = Vec::new();
    for (alpha, k, mu, c, c_alpha, c2) in exactness_cases() {
        let label = format!("alpha={alpha} k={k} mu={mu}");
        let res = (|| -> Result<Vec<CheckResult>> {
            let order = FracOrder::new(alpha)?;
            let p = EstimatorParams::new(order, k, mu, EXACTNESS_T, EXACTNESS_M)?;
            let mut checks = Vec::new();

            let first = FracTaylorSignal::new(0.0, order, c.clone(), c_alpha, None)?;
            let y = window_samples(&first, EXACTNESS_M);
            let est = minimal_fractional_kernel(&p)?.apply(y.values())?;
            checks.push(CheckResult::at_most(s, format!("minimal {label} first-order truncation"), rel(est, c_alpha), MINIMAL_EXACTNESS_TOL));

            let second = FracTaylorSignal::new(0.0, order, c.clone(), c_alpha, Some(c2))?;
            let y = window_samples(&second, EXACTNESS_M);
            let est = affine_fractional_estimate(&y, &p, 0.0)?;
            checks.push(CheckResult::at_most(s, format!("affine {label} second-order truncation"), rel(est, c_alpha), AFFINE_EXACTNESS_TOL));
            for (name, (kk, mm)) in [("E(k,mu+1)", (k, mu + 1.0)), ("E(k+1,mu)", (k + 1.0, mu))] {
                let table = minimal_fractional_kernel(&p.with_exponents(kk, mm)?)?;
                let a = table.apply(y.values())?;
                let b = table.apply(y.values())?;
                let bias = if a.to_bits() == b.to_bits() { rel(a, c_alpha) } else { 0.0 };
                checks.push(CheckResult::at_least(s, format!("{name} {label} reproducible bias"), bias, SUB_ESTIMATE_MIN_BIAS));
            }
            Ok(checks)
        })();
        match res {
            Ok(c) => out.extend(c),
            Err(e) => out.push(CheckResult::failed(s, label, &e)),
        }
    }
    // integer estimator on monomials of degree <= n: exact up to the
    // trapezoid h² term, so the error must drop fourfold when m doubles
    for n in 1..=3usize {
        for deg in 0..=n {
            let err = |m: usize| {
                let table = minimal_integer_kernel(n, 0.0, 0.0, EXACTNESS_T, m).expect("valid parameters");
                let samples: Vec<f64> = table.taus().iter().map(|tau| (0.3 + EXACTNESS_T * tau).powi(deg as i32)).collect();
                let est = table.apply(&samples).expect("matching length");
                // d^n/dt^n t^deg at t0 = 0.3
                let exact = if deg == n { (1..=n).product::<usize>() as f64 } else { 0.0 };
                if exact == 0.0 {
                    est.abs()
                } else {
                    rel(est, exact)
                }
            };
            let (coarse, fine) = (err(EXACTNESS_M), err(2 * EXACTNESS_M));
            let check = format!("integer n={n} on t^{deg}");
            if coarse < INTEGER_ROUNDOFF {
                out.push(CheckResult::at_most(s, format!("{check} exact"), coarse, INTEGER_ROUNDOFF));
            } else {
                out.push(CheckResult::at_most(s, format!("{check} error ratio m/2m - 4"), (coarse / fine - 4.0).abs(), INTEGER_RATIO_TOL));
            }
        }
    }
    out
}

pub const REDUCTION_TOL: f64 = 1e-14;

fn reduction() -> Vec<CheckResult> {
    let s = Suite::Reduction;
    let mut out = Vec::new();
    for n in 0..=2usize {
        for &k in &[0.0, 1.0] {
            for &mu in &[0.0, 1.0] {
                let label = format!("n={n} k={k} mu={mu}");
                let res = (|| -> Result<Vec<CheckResult>> {
                    let order = FracOrder::new((n + 1) as f64)?;
                    let m = 200;
                    let f = minimal_fractional_kernel(&EstimatorParams::new(order, k, mu, 0.3, m)?)?;
                    let i = minimal_integer_kernel(n + 1, k, mu, 0.3, m)?;
                    let node = f
                        .kvals()
                        .iter()
                        .zip(i.kvals())
                        .zip(f.qweights().iter().zip(i.qweights()))
                        .map(|((a, b), (qa, qb))| rel(*a, *b).max(rel(*qa, *qb)))
                        .fold(0.0, f64::max);
                    Ok(vec![
                        CheckResult::at_most(s, format!("{label} kernel values"), node, REDUCTION_TOL),
                        CheckResult::at_most(s, format!("{label} scale"), rel(f.scale(), i.scale()), REDUCTION_TOL),
                    ])
                })();
                match res {
                    Ok(c) => out.extend(c),
                    Err(e) => out.push(CheckResult::failed(s, label, &e)),
                }
            }
        }
    }
    out
}

pub const AFFINE_IDENTITY_TOL: f64 = 1e-12;

/// `(α, k, μ, n)` cases of the affine identity check.
pub const AFFINE_IDENTITY_CASES: [(f64, f64, f64, usize); 3] = [(0.5, 0.0, 0.0, 0), (0.7, 0.0, 0.0, 0), (1.5, 1.0, 0.5, 1)];

fn affine_identity() -> Vec<CheckResult> {
    let s = Suite::AffineIdentity;
    let mut g = GaussianStream::new(20_240);
    let values: Vec<f64> = (0..1000).map(|_| g.next_standard()).collect();
    let y = SampledSignal::new(0.0, 1e-3, values).expect("dt > 0");
    let mut out = Vec::new();
    out.push(CheckResult::at_most(
        s,
        "lambda(0.5, 0, 0) == 4".into(),
        (affine_lambda(0.5, 0.0, 0).unwrap_or(f64::NAN) - 4.0).abs(),
        0.0,
    ));
    for (alpha, k, mu, n) in AFFINE_IDENTITY_CASES {
        let label = format!("alpha={alpha} k={k} mu={mu} n={n}");
        let res = (|| -> Result<CheckResult> {
            let p = EstimatorParams::for_step(FracOrder::with_n(alpha, n)?, k, mu, 0.25, y.dt())?;
            let lambda = affine_lambda(alpha, k, n)?;
            let e1 = minimal_fractional_kernel(&p.with_exponents(k, mu + 1.0)?)?;
            let e2 = minimal_fractional_kernel(&p.with_exponents(k + 1.0, mu)?)?;
            let mut worst: f64 = 0.0;
            for i0 in [0usize, 137, 500, 749] {
                let a = affine_fractional_estimate(&y, &p, y.time(i0))?;
                let w = &y.values()[i0..=i0 + p.m];
                let expected = lambda * e1.apply(w)? + (1.0 - lambda) * e2.apply(w)?;
                worst = worst.max(rel(a, expected));
            }
            Ok(CheckResult::at_most(s, label.clone(), worst, AFFINE_IDENTITY_TOL))
        })();
        out.push(res.unwrap_or_else(|e| CheckResult::failed(s, label, &e)));
    }
    out
}

pub const ORACLE_TOL: f64 = 1e-3;
pub const ORACLE_STEP: f64 = 1e-5;
pub const CONSTANT_TOL: f64 = 1e-10;
pub const ORACLE_MIN_ORDER: f64 = 0.9;

fn oracle_convergence() -> Vec<CheckResult> {
    let s = Suite::OracleConvergence;
    let mut out = Vec::new();
    for &p in &[0.5, 1.0, 2.0, 2.5] {
        for &alpha in &[0.3, 0.5, 0.7, 1.0] {
            let f = move |t: f64| t.powf(p);
            for &t in &[1.0, 2.0] {
                let label = format!("t^{p} alpha={alpha} t={t}");
                let exact = match rl_monomial(p, alpha, t) {
                    Ok(v) => v,
                    Err(e) => {
                        out.push(CheckResult::failed(s, label, &e));
                        continue;
                    }
                };
                let gl = |h: f64| gl_fractional_difference(f, alpha, t, h, crate::fraccalc::gl_default_terms(t, h));
                let fine = rel(gl(ORACLE_STEP), exact);
                out.push(CheckResult::at_most(s, format!("{label} h=1e-5"), fine, ORACLE_TOL));
                let coarse = rel(gl(1e-3), exact);
                if coarse > 1e-12 && fine > 0.0 {
                    let order = (coarse / fine).log10() / 2.0;
                    out.push(CheckResult::at_least(s, format!("{label} empirical order"), order, ORACLE_MIN_ORDER));
                }
            }
        }
    }
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    for &alpha in &[0.3, 0.5, 1.0, 1.5] {
        let label = format!("constant alpha={alpha}");
        let order = FracOrder::new(alpha).expect("positive");
        let n = order.n();
        // f = 3, so f^(n) is 3 for n = 0 and 0 above
        let res = jumarie_reference(move |_| if n == 0 { 3.0 } else { 0.0 }, order, &grid, 1e-4, 1e-3);
        match res {
            Ok(r) => {
                let worst = r.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                out.push(CheckResult::at_most(s, label, worst, CONSTANT_TOL));
            }
            Err(e) => out.push(CheckResult::failed(s, label, &e)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in Suite::NAMED {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("affine_identity".parse::<Suite>().unwrap(), Suite::AffineIdentity);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Reduction, Suite::AffineIdentity] {
            let r = run_suite(s);
            assert!(!r.is_empty());
            for c in &r {
                assert!(c.passed, "{}", c.to_json_line());
            }
        }
    }

    #[test]
    fn json_lines() {
        let c = CheckResult::at_most(Suite::Reduction, "x".into(), 0.5, 1.0);
        assert_eq!(
            c.to_json_line(),
            r#"{"suite":"reduction","check":"x","value":0.5,"tolerance":1.0,"passed":true}"#
        );
    }
}
