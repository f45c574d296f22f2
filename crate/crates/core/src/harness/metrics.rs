use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimateSeries;
use crate::signals::SampledSignal;

/// Error of an estimate curve against a reference, with and without the
/// best integer time shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rmse_raw: f64,
    /// Shift `s` such that `estimate[i]` is compared with `reference[i + s]`.
    pub lag_samples: usize,
    pub rmse_aligned: f64,
    pub max_abs_err_aligned: f64,
    /// Number of estimate points entering every RMSE.
    pub points: usize,
}

impl RunMetrics {
    /// `lag_samples < count / 4`.
    pub fn lag_is_sane(&self, count: usize) -> bool {
        self.lag_samples * 4 < count
    }
}

fn rmse_at(est: &[f64], reference: &[f64], shift: usize) -> f64 {
    let sum: f64 = est.iter().zip(&reference[shift..]).map(|(e, r)| (e - r) * (e - r)).sum();
    (sum / est.len() as f64).sqrt()
}

/// Searches shifts `s ∈ [0, m]` and keeps the first minimizer of the RMSE.
///
/// Every shift is scored on the same estimate points: those whose reference
/// partner exists for the largest shift.
pub fn lag_and_rmse(estimate: &EstimateSeries, reference: &SampledSignal) -> Result<RunMetrics> {
    if estimate.is_empty() {
        return Err(Error::invalid("estimate", "no estimate points"));
    }
    if (estimate.dt - reference.dt()).abs() > 1e-12 * reference.dt() {
        return Err(Error::GridMisalignment {
            what: "estimate step",
            value: estimate.dt,
            dt: reference.dt(),
        });
    }
    let span = || Error::WindowOutOfRange {
        start: estimate.t0s[0],
        end: *estimate.t0s.last().expect("non-empty"),
        support_start: reference.t_start(),
        support_end: reference.end_time(),
    };
    let j0 = reference.index_of(estimate.t0s[0]).map_err(|_| span())?;
    if j0 + estimate.len() > reference.len() {
        return Err(span());
    }
    let max_shift = estimate.params.m;
    let usable = (reference.len() - j0).saturating_sub(max_shift).min(estimate.len());
    if usable == 0 {
        return Err(span());
    }
    let est = &estimate.values[..usable];
    let refv = &reference.values()[j0..];

    let rmse_raw = rmse_at(est, refv, 0);
    let (mut lag, mut best) = (0, rmse_raw);
    for s in 1..=max_shift {
        let r = rmse_at(est, refv, s);
        if r < best {
            best = r;
            lag = s;
        }
    }
    let max_abs = est
        .iter()
        .zip(&refv[lag..])
        .map(|(e, r)| (e - r).abs())
        .fold(0.0, f64::max);
    Ok(RunMetrics {
        rmse_raw,
        lag_samples: lag,
        rmse_aligned: best,
        max_abs_err_aligned: max_abs,
        points: usable,
    })
}
