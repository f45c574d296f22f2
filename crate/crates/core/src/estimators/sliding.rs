use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signals::SampledSignal;

use super::kernel::{minimal_fractional_kernel, minimal_integer_kernel, KernelTable};
use super::{affine_lambda, EstimatorKind, EstimatorParams};

/// The two minimal kernels behind the affine estimator:
/// `λ · E(k, μ+1) + (1 - λ) · E(k+1, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineKernels {
    pub lambda: f64,
    pub upper_mu: KernelTable,
    pub upper_k: KernelTable,
}

impl AffineKernels {
    pub fn new(p: &EstimatorParams) -> Result<Self> {
        let lambda = affine_lambda(p.order.alpha(), p.k, p.order.n())?;
        let upper_mu = minimal_fractional_kernel(&p.with_exponents(p.k, p.mu + 1.0)?)?;
        let upper_k = minimal_fractional_kernel(&p.with_exponents(p.k + 1.0, p.mu)?)?;
        Ok(AffineKernels {
            lambda,
            upper_mu,
            upper_k,
        })
    }

    pub fn combine(&self, e_upper_mu: f64, e_upper_k: f64) -> f64 {
        self.lambda * e_upper_mu + (1.0 - self.lambda) * e_upper_k
    }

    pub fn apply(&self, samples: &[f64]) -> Result<f64> {
        Ok(self.combine(self.upper_mu.apply(samples)?, self.upper_k.apply(samples)?))
    }
}

/// Kernels for one `(params, kind)` pair, built once and shared across windows.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparedEstimator {
    Single(KernelTable),
    Affine(AffineKernels),
}

impl PreparedEstimator {
    pub fn new(p: &EstimatorParams, kind: EstimatorKind) -> Result<Self> {
        match kind {
            EstimatorKind::MinimalInteger => {
                if !p.order.is_integer() {
                    return Err(Error::invalid(
                        "alpha",
                        format!("integer estimator needs an integer order, got {}", p.order.alpha()),
                    ));
                }
                let table = minimal_integer_kernel(p.order.n() + 1, p.k, p.mu, p.window, p.m)?;
                Ok(PreparedEstimator::Single(table))
            }
            EstimatorKind::MinimalFractional => Ok(PreparedEstimator::Single(minimal_fractional_kernel(p)?)),
            EstimatorKind::AffineFractional => Ok(PreparedEstimator::Affine(AffineKernels::new(p)?)),
        }
    }

    /// Samples per window.
    pub fn len(&self) -> usize {
        match self {
            PreparedEstimator::Single(t) => t.len(),
            PreparedEstimator::Affine(a) => a.upper_mu.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, samples: &[f64]) -> Result<f64> {
        match self {
            PreparedEstimator::Single(t) => t.apply(samples),
            PreparedEstimator::Affine(a) => a.apply(samples),
        }
    }

    fn apply_unchecked(&self, samples: &[f64]) -> f64 {
        match self {
            PreparedEstimator::Single(t) => t.apply_unchecked(samples),
            PreparedEstimator::Affine(a) => {
                a.combine(a.upper_mu.apply_unchecked(samples), a.upper_k.apply_unchecked(samples))
            }
        }
    }
}

fn window_start(y: &SampledSignal, p: &EstimatorParams, t0: f64) -> Result<usize> {
    p.check_against(y)?;
    let out_of_range = || Error::WindowOutOfRange {
        start: t0,
        end: t0 + p.window,
        support_start: y.t_start(),
        support_end: y.end_time(),
    };
    let i0 = match y.index_of(t0) {
        Ok(i) => i,
        Err(Error::WindowOutOfRange { .. }) => return Err(out_of_range()),
        Err(e) => return Err(e),
    };
    if i0 + p.m >= y.len() {
        return Err(out_of_range());
    }
    Ok(i0)
}

/// Affine fractional estimate of `x^(α)(t0)` from the window `[t0, t0 + T]`.
pub fn affine_fractional_estimate(y: &SampledSignal, p: &EstimatorParams, t0: f64) -> Result<f64> {
    let kernels = AffineKernels::new(p)?;
    let i0 = window_start(y, p, t0)?;
    kernels.apply(&y.values()[i0..=i0 + p.m])
}

/// Estimates at every `t0` on the grid whose forward window fits in the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub t0s: Vec<f64>,
    pub values: Vec<f64>,
    pub params: EstimatorParams,
    pub kind: EstimatorKind,
    pub dt: f64,
}

impl EstimateSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_signal(&self) -> Result<SampledSignal> {
        SampledSignal::new(self.t0s[0], self.dt, self.values.clone())
    }

    /// Same estimates labelled with the window end `t0 + T`, i.e. the time at
    /// which a causal implementation would have them.
    pub fn anchored_at_window_end(&self) -> EstimateSeries {
        let mut out = self.clone();
        let shift = self.params.m as f64 * self.dt;
        for t in &mut out.t0s {
            *t += shift;
        }
        out
    }
}

/// Runs one estimator over every admissible window of `y`.
pub fn sliding_estimate(y: &SampledSignal, p: &EstimatorParams, kind: EstimatorKind) -> Result<EstimateSeries> {
    p.check_against(y)?;
    let est = PreparedEstimator::new(p, kind)?;
    Ok(sliding_with(y, p, kind, &est))
}

pub(crate) fn sliding_with(
    y: &SampledSignal,
    p: &EstimatorParams,
    kind: EstimatorKind,
    est: &PreparedEstimator,
) -> EstimateSeries {
    let width = p.m + 1;
    let count = y.len() + 1 - width;
    let values = y.values().par_windows(width).map(|w| est.apply_unchecked(w)).collect();
    EstimateSeries {
        t0s: (0..count).map(|i| y.time(i)).collect(),
        values,
        params: *p,
        kind,
        dt: y.dt(),
    }
}
