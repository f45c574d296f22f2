//! Non-asymptotic fractional-order differentiators for noisy sampled signals.
//!
//! The estimators integrate the signal over a sliding window `[t0, t0 + T]`
//! against a Jacobi-polynomial kernel and return the Jumarie modified
//! Riemann–Liouville derivative at `t0`:
//!
//! - [`estimators::minimal_integer_kernel`]: classical `n`-th derivative.
//! - [`estimators::minimal_fractional_kernel`]: order `α` from the first
//!   fractional Taylor truncation.
//! - [`estimators::affine_fractional_estimate`]: affine combination of two
//!   minimal estimators that also cancels the next fractional Taylor term.
//!
//! [`fraccalc`] holds the independent ground truth (closed forms and a
//! Grünwald–Letnikov oracle), [`signals`] the test signals and calibrated
//! noise, and [`harness`] the experiment runner, CSV I/O and metrics used by
//! the `fracdiff` command-line tool.

// `!(x > 0.0)` is used throughout to reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod error;
pub mod estimators;
pub mod fraccalc;
pub mod harness;
pub mod quad;
pub mod signals;
pub mod specfun;

pub use error::{Error, Result};
pub use estimators::{
    affine_fractional_estimate, affine_lambda, minimal_fractional_kernel, minimal_integer_kernel, sliding_estimate,
    AffineKernels, EstimateSeries, EstimatorKind, EstimatorParams, KernelTable, PreparedEstimator, QuadratureRule,
};
pub use fraccalc::{FracOrder, FracTaylorSignal, OracleSettings, ReferenceCurve};
pub use signals::{add_noise, snr_db, NoiseSpec, NoisyObservation, SampledSignal, SignalExpr};
pub use specfun::{JacobiParams, JacobiPoly};
