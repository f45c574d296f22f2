//! Sliding-window Jacobi differentiators.
//!
//! Every estimator is a weighted integral of the signal over the forward
//! window `[t0, t0 + T]`, discretized on the `m + 1` samples it covers, and
//! the estimate is assigned to the window start `t0`.

mod kernel;
mod sliding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::FracOrder;
use crate::signals::SampledSignal;

pub use kernel::{minimal_fractional_kernel, minimal_integer_kernel, quadrature_apply, KernelTable, QuadratureRule};
pub use sliding::{affine_fractional_estimate, sliding_estimate, AffineKernels, EstimateSeries, PreparedEstimator};

/// Smallest `α - n` accepted by the affine estimator; its coefficient
/// `λ = (2α-n+1+k)/(α-n)` is unbounded as `α → n⁺`.
pub const AFFINE_MIN_GAP: f64 = 1e-3;

/// Which differentiator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Classical derivative of integer order `α` (`α` must be a positive integer).
    #[serde(alias = "integer")]
    MinimalInteger,
    #[serde(alias = "minimal")]
    MinimalFractional,
    #[serde(alias = "affine")]
    AffineFractional,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::MinimalInteger => "minimal_integer",
            EstimatorKind::MinimalFractional => "minimal_fractional",
            EstimatorKind::AffineFractional => "affine_fractional",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integer" | "minimal_integer" => Ok(EstimatorKind::MinimalInteger),
            "minimal" | "minimal_fractional" => Ok(EstimatorKind::MinimalFractional),
            "affine" | "affine_fractional" => Ok(EstimatorKind::AffineFractional),
            other => Err(Error::invalid("kind", format!("unknown estimator kind `{other}`"))),
        }
    }
}

/// One differentiator instance: order, Jacobi exponents, window length `T`
/// and number of intervals `m` (the window holds `m + 1` samples).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub order: FracOrder,
    pub k: f64,
    pub mu: f64,
    pub window: f64,
    pub m: usize,
}

impl EstimatorParams {
    pub fn new(order: FracOrder, k: f64, mu: f64, window: f64, m: usize) -> Result<Self> {
        if !(k > -1.0) || !k.is_finite() {
            return Err(Error::invalid("k", format!("must be finite and > -1, got {k}")));
        }
        if !(mu > -1.0) || !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite and > -1, got {mu}")));
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::invalid("T", format!("must be finite and > 0, got {window}")));
        }
        if m == 0 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        Ok(EstimatorParams {
            order,
            k,
            mu,
            window,
            m,
        })
    }

    /// Parameters whose window spans `T / dt` samples; `T` must be an integer
    /// multiple of `dt`.
    pub fn for_step(order: FracOrder, k: f64, mu: f64, window: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let m = (window / dt).round();
        let p = Self::new(order, k, mu, window, m.max(1.0) as usize)?;
        p.check_step(dt)?;
        Ok(p)
    }

    /// `T = m dt` to within a few ulps.
    pub fn check_step(&self, dt: f64) -> Result<()> {
        let span = self.m as f64 * dt;
        if (span - self.window).abs() > 8.0 * f64::EPSILON * self.window.max(span) {
            return Err(Error::GridMisalignment {
                what: "window length T",
                value: self.window,
                dt,
            });
        }
        Ok(())
    }

    /// Same order, window and `m` with different Jacobi exponents.
    pub fn with_exponents(&self, k: f64, mu: f64) -> Result<Self> {
        Self::new(self.order, k, mu, self.window, self.m)
    }

    pub(crate) fn check_against(&self, y: &SampledSignal) -> Result<()> {
        self.check_step(y.dt())?;
        if y.len() < self.m + 1 {
            return Err(Error::SignalTooShort {
                len: y.len(),
                needed: self.m + 1,
            });
        }
        Ok(())
    }
}

/// `λ = (2α - n + 1 + k) / (α - n)`.
pub fn affine_lambda(alpha: f64, k: f64, n: usize) -> Result<f64> {
    let gap = alpha - n as f64;
    if !(gap >= AFFINE_MIN_GAP) {
        return Err(Error::NearIntegerOrder {
            gap,
            min: AFFINE_MIN_GAP,
        });
    }
    Ok((2.0 * alpha - n as f64 + 1.0 + k) / gap)
}
