use crate::error::{Error, Result};
use crate::specfun::{jacobi_weight, ln_beta, ln_gamma, JacobiParams, JacobiPoly};

use super::EstimatorParams;

/// How the window integral is discretized on the `m + 1` uniform nodes
/// `τ_i = i / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Composite trapezoid; requires a weight that is finite at both ends.
    Trapezoid,
    /// Composite midpoint on the `m` cells for weights singular at an end
    /// (`k < 0` or `μ < 0`). The kernel is evaluated at cell midpoints and the
    /// sample at each midpoint is the mean of the two neighbouring samples;
    /// folding that back onto the nodes gives trapezoid weights with
    /// `kvals[i]` equal to the mean of the kernel on the adjacent midpoints.
    Midpoint,
}

impl QuadratureRule {
    pub fn for_exponents(k: f64, mu: f64) -> Self {
        if k.min(mu) < 0.0 {
            QuadratureRule::Midpoint
        } else {
            QuadratureRule::Trapezoid
        }
    }
}

/// Precomputed discretization of one estimator kernel over a window of
/// `m + 1` samples. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    taus: Vec<f64>,
    qweights: Vec<f64>,
    kvals: Vec<f64>,
    scale: f64,
    rule: QuadratureRule,
    // qweights[i] * kvals[i]
    coeffs: Vec<f64>,
}

fn trapezoid_weights(m: usize) -> Vec<f64> {
    let h = 1.0 / m as f64;
    let mut w = vec![h; m + 1];
    w[0] = 0.5 * h;
    w[m] = 0.5 * h;
    w
}

impl KernelTable {
    fn build(p: &JacobiParams, scale: f64, m: usize) -> Result<Self> {
        let rule = QuadratureRule::for_exponents(p.k(), p.mu());
        let taus: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let qweights = trapezoid_weights(m);
        let poly = JacobiPoly::new(p);
        let kernel = |tau: f64| -> Result<f64> { Ok(jacobi_weight(p, tau)? * poly.eval(tau)?) };
        let kvals = match rule {
            QuadratureRule::Trapezoid => taus.iter().map(|&t| kernel(t)).collect::<Result<Vec<_>>>()?,
            QuadratureRule::Midpoint => {
                let mids = (0..m)
                    .map(|i| kernel((i as f64 + 0.5) / m as f64))
                    .collect::<Result<Vec<_>>>()?;
                (0..=m)
                    .map(|i| match i {
                        0 => mids[0],
                        _ if i == m => mids[m - 1],
                        _ => 0.5 * (mids[i - 1] + mids[i]),
                    })
                    .collect()
            }
        };
        if let Some(i) = kvals.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain("kernel value at tau", taus[i]));
        }
        let coeffs = qweights.iter().zip(&kvals).map(|(w, k)| w * k).collect();
        Ok(KernelTable {
            taus,
            qweights,
            kvals,
            scale,
            rule,
            coeffs,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn qweights(&self) -> &[f64] {
        &self.qweights
    }

    pub fn kvals(&self) -> &[f64] {
        &self.kvals
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Samples per window (`m + 1`).
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// `scale · Σ qweights[i] kvals[i] samples[i]`.
    pub fn apply(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: self.coeffs.len(),
                actual: samples.len(),
            });
        }
        Ok(self.apply_unchecked(samples))
    }

    pub(crate) fn apply_unchecked(&self, samples: &[f64]) -> f64 {
        let dot: f64 = self.coeffs.iter().zip(samples).map(|(c, s)| c * s).sum();
        self.scale * dot
    }
}

/// Free-function form of [`KernelTable::apply`].
pub fn quadrature_apply(table: &KernelTable, samples: &[f64]) -> Result<f64> {
    table.apply(samples)
}

fn check_window(window: f64, m: usize, min_m: usize) -> Result<()> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::invalid("T", format!("window length must be finite and > 0, got {window}")));
    }
    if m < min_m {
        return Err(Error::invalid("m", format!("needs at least {min_m} intervals, got {m}")));
    }
    Ok(())
}

/// Kernel of the minimal integer-order differentiator for `x^(n)(t0)`:
/// `n! / T^n / B(n+k+1, n+μ+1) · ∫ w_{μ,k} P_n^{(μ,k)} y(t0 + Tτ) dτ`.
pub fn minimal_integer_kernel(n: usize, k: f64, mu: f64, window: f64, m: usize) -> Result<KernelTable> {
    check_window(window, m, n + 1)?;
    let p = JacobiParams::new(n, mu, k)?;
    let nf = n as f64;
    let ln_scale = ln_gamma(nf + 1.0)? - nf * window.ln() + 0.0 - ln_beta(nf + k + 1.0, nf + mu + 1.0)?;
    KernelTable::build(&p, ln_scale.exp(), m)
}

/// Kernel of the minimal fractional differentiator for `x^(α)(t0)`:
/// `(n+1)! / T^α · Γ(α-n) / B(α+1+k, n+μ+2) · ∫ w_{μ,k} P_{n+1}^{(μ,k)} y(t0 + Tτ) dτ`.
pub fn minimal_fractional_kernel(params: &EstimatorParams) -> Result<KernelTable> {
    let n = params.order.n();
    let alpha = params.order.alpha();
    let (k, mu, window, m) = (params.k, params.mu, params.window, params.m);
    check_window(window, m, n + 2)?;
    let p = JacobiParams::new(n + 1, mu, k)?;
    let nf = n as f64;
    // Same association as the integer kernel so that α = n + 1 reproduces it bitwise.
    let ln_scale =
        ln_gamma(nf + 2.0)? - alpha * window.ln() + ln_gamma(alpha - nf)? - ln_beta(alpha + 1.0 + k, nf + mu + 2.0)?;
    KernelTable::build(&p, ln_scale.exp(), m)
}
