//! Ground-truth fractional calculus for the Jumarie modified Riemann–Liouville
//! derivative.
//!
//! Two independent routes are provided: closed forms (`rl_monomial`,
//! `jumarie_from_rl`) and a brute-force Grünwald–Letnikov sum
//! (`gl_fractional_difference`). The latter backs `jumarie_reference`, which
//! produces reference derivative curves for arbitrary signals.
//!
//! The lower terminal is `t = 0`: the difference sum treats `f - f(0)` as zero
//! for negative arguments, so it sees exactly the data the defining integral
//! over `[0, t]` sees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma, ln_gamma_signed};

/// Derivative order `α > 0` with its integer strip `n = ⌈α⌉ - 1`, so that
/// `n < α <= n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder {
    alpha: f64,
    n: usize,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        let n = alpha.ceil() as usize - 1;
        Ok(FracOrder { alpha, n })
    }

    /// Like [`FracOrder::new`], additionally checking a caller-supplied `n`.
    pub fn with_n(alpha: f64, n: usize) -> Result<Self> {
        let order = Self::new(alpha)?;
        if order.n != n {
            return Err(Error::invalid(
                "n",
                format!("alpha = {alpha} requires n = {}, got {n}", order.n),
            ));
        }
        Ok(order)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `γ = α - n`, in `(0, 1]`.
    pub fn frac(&self) -> f64 {
        self.alpha - self.n as f64
    }

    pub fn is_integer(&self) -> bool {
        self.alpha == (self.n + 1) as f64
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        FracOrder::new(alpha)
    }
}

impl From<FracOrder> for f64 {
    fn from(o: FracOrder) -> f64 {
        o.alpha
    }
}

/// Truncated fractional Taylor polynomial anchored at `t0`:
///
/// `x(t0 + t) = Σ_{j<=n} c_j t^j / j! + c_α t^α / Γ(α+1) [+ c_{2α-n} t^{2α-n} / Γ(2α-n+1)]`
///
/// The last term is present only for the second-order truncation used by the
/// affine estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracTaylorSignal {
    pub t0: f64,
    pub order: FracOrder,
    pub c: Vec<f64>,
    pub c_alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_2an: Option<f64>,
}

impl FracTaylorSignal {
    pub fn new(t0: f64, order: FracOrder, c: Vec<f64>, c_alpha: f64, c_2an: Option<f64>) -> Result<Self> {
        if c.len() != order.n() + 1 {
            return Err(Error::LengthMismatch {
                expected: order.n() + 1,
                actual: c.len(),
            });
        }
        Ok(FracTaylorSignal {
            t0,
            order,
            c,
            c_alpha,
            c_2an,
        })
    }

    /// Exponents and coefficients of every term, as `(q, coeff)` meaning
    /// `coeff · t^q / Γ(q+1)`.
    pub(crate) fn terms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.c.iter().enumerate().map(|(j, &c)| (j as f64, c)).collect();
        out.push((self.order.alpha(), self.c_alpha));
        if let Some(c2) = self.c_2an {
            out.push((2.0 * self.order.alpha() - self.order.n() as f64, c2));
        }
        out
    }

    /// Value at offset `t >= 0` from the anchor.
    pub fn eval(&self, t: f64) -> f64 {
        frac_taylor_eval(self, t)
    }
}

/// Evaluates a [`FracTaylorSignal`] at offset `t` from its anchor.
pub fn frac_taylor_eval(sig: &FracTaylorSignal, t: f64) -> f64 {
    let alpha = sig.order.alpha();
    let mut sum = 0.0;
    let mut fact = 1.0;
    for (j, &c) in sig.c.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        sum += c * t.powi(j as i32) / fact;
    }
    sum += sig.c_alpha * t.powf(alpha) / gamma(alpha + 1.0).expect("alpha > 0");
    if let Some(c2) = sig.c_2an.filter(|&c2| c2 != 0.0) {
        let q = 2.0 * alpha - sig.order.n() as f64;
        sum += c2 * t.powf(q) / gamma(q + 1.0).expect("q > 0");
    }
    sum
}

/// Riemann–Liouville derivative of `t^p`: `Γ(p+1) / Γ(p+1-α) · t^{p-α}`.
///
/// When `p + 1 - α` is a pole of Γ the reciprocal vanishes and the result is
/// exactly 0 (e.g. the `α`-th derivative of `t^{α-1}` for integer `α`).
pub fn rl_monomial(p: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("rl_monomial t", t));
    }
    if !(p >= 0.0) {
        return Err(Error::domain("rl_monomial exponent", p));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("rl_monomial alpha", alpha));
    }
    let den = p + 1.0 - alpha;
    if den <= 0.0 && den.fract() == 0.0 {
        return Ok(0.0);
    }
    let (ln_num, _) = ln_gamma_signed(p + 1.0)?;
    let (ln_den, sign) = ln_gamma_signed(den)?;
    Ok(sign * (ln_num - ln_den + (p - alpha) * t.ln()).exp())
}

/// Jumarie derivative from the Riemann–Liouville one for `0 < α < 1`:
/// `f^(α)(t) = D^α f(t) - t^{-α} / Γ(1-α) · f(0)`.
pub fn jumarie_from_rl(rl_value: f64, f0: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("jumarie_from_rl alpha (needs 0 < alpha < 1)", alpha));
    }
    if !(t > 0.0) {
        return Err(Error::domain("jumarie_from_rl t", t));
    }
    Ok(rl_value - t.powf(-alpha) / gamma(1.0 - alpha)? * f0)
}

/// Default number of Grünwald–Letnikov terms: every node down to the lower
/// terminal, plus 64.
pub fn gl_default_terms(t: f64, h: f64) -> usize {
    (t / h).ceil().max(0.0) as usize + 64
}

/// `(-1)^i C(α, i)` for `i = 0..len`, by the ratio recurrence.
pub fn gl_weights(alpha: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    let mut c = 1.0;
    for i in 0..len {
        if i > 0 {
            c *= 1.0 - (alpha + 1.0) / i as f64;
        }
        w.push(c);
    }
    w
}

/// A Grünwald–Letnikov sum together with the magnitude of its last retained
/// term, which bounds the truncation tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlSum {
    pub value: f64,
    pub last_term: f64,
    pub terms: usize,
}

/// Jumarie derivative oracle by the fractional difference
/// `h^{-α} Σ_{i=0}^{terms} (-1)^i C(α, i) g(t + (α - i) h)`, `g = f - f(0)`.
pub fn gl_fractional_difference(f: impl Fn(f64) -> f64, alpha: f64, t: f64, h: f64, terms: usize) -> f64 {
    gl_fractional_difference_detailed(f, alpha, t, h, terms).value
}

pub fn gl_fractional_difference_detailed(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    t: f64,
    h: f64,
    terms: usize,
) -> GlSum {
    let f0 = f(0.0);
    let mut sum = 0.0;
    let mut c = 1.0;
    let mut last_term = 0.0;
    for i in 0..=terms {
        if i > 0 {
            c *= 1.0 - (alpha + 1.0) / i as f64;
        }
        let s = t + (alpha - i as f64) * h;
        if s < 0.0 {
            break;
        }
        let term = c * (f(s) - f0);
        sum += term;
        last_term = term;
    }
    let scale = h.powf(alpha);
    GlSum {
        value: sum / scale,
        last_term: last_term.abs() / scale,
        terms,
    }
}

/// Reference derivative curve with its step-halving certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    pub values: Vec<f64>,
    pub refined: Vec<f64>,
    /// `max |r_h - r_{h/2}| / max |r_{h/2}|` over the gated points.
    pub discrepancy: f64,
}

fn all_finite(a: &[f64], b: &[f64]) -> bool {
    a.iter().chain(b).all(|v| v.is_finite())
}

fn normwise_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if num == 0.0 {
        return 0.0;
    }
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den.max(f64::MIN_POSITIVE)
}

/// Jumarie derivative of order `α` at each grid time, computed as the
/// `γ = α - n` derivative of `fn_deriv = f^(n)`.
///
/// Values come from the step-`h` sum; the `h/2` sum certifies them and a
/// discrepancy above `tolerance` is reported as [`Error::NonConvergence`].
pub fn jumarie_reference(
    fn_deriv: impl Fn(f64) -> f64 + Sync,
    order: FracOrder,
    grid: &[f64],
    h: f64,
    tolerance: f64,
) -> Result<ReferenceCurve> {
    if let Some(&t) = grid.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::domain("reference grid time", t));
    }
    if !(h > 0.0) {
        return Err(Error::domain("oracle step h", h));
    }
    let gamma_order = order.frac();
    let eval = |step: f64| -> Vec<f64> {
        grid.par_iter()
            .map(|&t| gl_fractional_difference(&fn_deriv, gamma_order, t, step, gl_default_terms(t, step)))
            .collect()
    };
    let values = eval(h);
    let refined = eval(0.5 * h);
    let discrepancy = if all_finite(&values, &refined) {
        normwise_discrepancy(&values, &refined)
    } else {
        f64::NAN
    };
    if !(discrepancy <= tolerance) {
        return Err(Error::NonConvergence {
            discrepancy,
            tolerance,
        });
    }
    Ok(ReferenceCurve {
        values,
        refined,
        discrepancy,
    })
}

/// Settings for [`jumarie_reference_uniform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Oracle step is `dt / oversample`.
    pub oversample: usize,
    /// Gate on the normwise `h` vs `h/2` discrepancy.
    pub tolerance: f64,
    /// Points before this time are computed but excluded from the gate.
    pub gate_from: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            oversample: 10,
            tolerance: 1e-3,
            gate_from: 0.5,
        }
    }
}

/// Same oracle as [`jumarie_reference`], on the uniform grid
/// `t_j = t_start + j dt`, with `h = dt / oversample`.
///
/// All difference nodes then lie on one lattice, so `f^(n)` is evaluated once
/// per lattice point and each grid value is a dot product with the weights.
pub fn jumarie_reference_uniform(
    fn_deriv: impl Fn(f64) -> f64 + Sync,
    order: FracOrder,
    t_start: f64,
    dt: f64,
    count: usize,
    settings: &OracleSettings,
) -> Result<ReferenceCurve> {
    if !(t_start >= 0.0) {
        return Err(Error::domain("reference t_start", t_start));
    }
    if !(dt > 0.0) {
        return Err(Error::domain("reference dt", dt));
    }
    if settings.oversample == 0 {
        return Err(Error::invalid("oversample", "must be >= 1"));
    }
    let gamma_order = order.frac();
    let f0 = fn_deriv(0.0);
    let g = |s: f64| fn_deriv(s) - f0;

    let lattice_sum = |os: usize| -> Vec<f64> {
        let h = dt / os as f64;
        // node for grid j, term i: t_start + (os j - i + γ) h
        let q_min = (-(t_start / h) - gamma_order).ceil() as i64;
        let q_max = (os * count.saturating_sub(1)) as i64;
        let lattice: Vec<f64> = (q_min..=q_max)
            .into_par_iter()
            .map(|q| g(t_start + (q as f64 + gamma_order) * h))
            .collect();
        let weights = gl_weights(gamma_order, (q_max - q_min) as usize + 1);
        let scale = h.powf(gamma_order);
        (0..count)
            .into_par_iter()
            .map(|j| {
                let t = t_start + j as f64 * dt;
                let top = (os * j) as i64;
                let imax = ((top - q_min) as usize).min(gl_default_terms(t, h));
                let mut sum = 0.0;
                for (i, w) in weights[..=imax].iter().enumerate() {
                    sum += w * lattice[(top - i as i64 - q_min) as usize];
                }
                sum / scale
            })
            .collect()
    };

    let values = lattice_sum(settings.oversample);
    let refined = lattice_sum(2 * settings.oversample);
    let first = (0..count)
        .find(|&j| t_start + j as f64 * dt >= settings.gate_from)
        .unwrap_or(count);
    let discrepancy = if all_finite(&values, &refined) {
        normwise_discrepancy(&values[first..], &refined[first..])
    } else {
        f64::NAN
    };
    if !(discrepancy <= settings.tolerance) {
        return Err(Error::NonConvergence {
            discrepancy,
            tolerance: settings.tolerance,
        });
    }
    Ok(ReferenceCurve {
        values,
        refined,
        discrepancy,
    })
}
