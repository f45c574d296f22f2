//! Real-argument special functions and Jacobi polynomials on `[0, 1]`.
//!
//! Gamma uses the 14-term Lanczos series with `g = 671/128` for `x >= 0.5`
//! and the reflection formula below that. Small positive integers are served
//! from exact factorials so that ratios such as `Γ(1) / B(a, b)` carry no
//! spurious rounding.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Arguments above this overflow `f64` in [`gamma`].
pub const GAMMA_OVERFLOW_LIMIT: f64 = 171.624_376_956_302_7;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Largest `n` for which `n!` is exactly representable in `f64`.
const EXACT_FACTORIAL_MAX: u32 = 22;

fn exact_factorial(n: u32) -> f64 {
    debug_assert!(n <= EXACT_FACTORIAL_MAX);
    (2..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

fn small_positive_integer(x: f64) -> Option<u32> {
    if x >= 1.0 && x <= f64::from(EXACT_FACTORIAL_MAX + 1) && x.fract() == 0.0 {
        Some(x as u32)
    } else {
        None
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `sin(πx)` with the argument reduced before multiplying by π, so that
/// integers give exactly zero and near-integers keep their relative accuracy.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (r, sign) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// Lanczos series sum `A(x)` for `x >= 0.5`.
fn lanczos_sum(x: f64) -> f64 {
    let mut y = x;
    let mut ser = LANCZOS_C0;
    for c in LANCZOS_COEF {
        y += 1.0;
        ser += c / y;
    }
    ser
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let tmp = x + LANCZOS_G;
    (x + 0.5) * tmp.ln() - tmp + (SQRT_2PI * lanczos_sum(x) / x).ln()
}

/// Γ(x) for real `x`.
///
/// Poles at zero and the negative integers are reported as [`Error::Pole`];
/// arguments beyond [`GAMMA_OVERFLOW_LIMIT`] as [`Error::Overflow`].
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma argument", x));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x > GAMMA_OVERFLOW_LIMIT {
        return Err(Error::Overflow(x));
    }
    if let Some(n) = small_positive_integer(x) {
        return Ok(exact_factorial(n - 1));
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let g = gamma(1.0 - x)?;
        return Ok(PI / (sin_pi(x) * g));
    }
    if x > 140.0 {
        return Ok(ln_gamma_lanczos(x).exp());
    }
    let tmp = x + LANCZOS_G;
    let half = tmp.powf(0.5 * (x + 0.5));
    Ok(SQRT_2PI * lanczos_sum(x) / x * half * (half * (-tmp).exp()))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::domain("ln_gamma argument", x));
    }
    if let Some(n) = small_positive_integer(x) {
        return Ok(exact_factorial(n - 1).ln());
    }
    if x < 0.5 {
        return Ok((PI / sin_pi(x)).ln() - ln_gamma_lanczos(1.0 - x));
    }
    Ok(ln_gamma_lanczos(x))
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
pub(crate) fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x > 0.0 {
        return Ok((ln_gamma(x)?, 1.0));
    }
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x)?;
    Ok((lg, s.signum()))
}

/// Euler beta function `B(a, b) = Γ(a) Γ(b) / Γ(a + b)`, via `ln_gamma`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

pub(crate) fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("beta first argument", a));
    }
    if !(b > 0.0) {
        return Err(Error::domain("beta second argument", b));
    }
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// Generalized binomial coefficient `Γ(a+1) / (Γ(j+1) Γ(a-j+1))` for real `a`.
///
/// Pole cases resolve to their finite limits:
/// - `a` a non-negative integer and `j > a`: the denominator pole gives 0.
/// - `a` a negative integer: numerator and denominator poles cancel, giving
///   `(-1)^j C(j - a - 1, j)`.
///
/// Small `j` use the falling-factorial product, which is the limit form in
/// every case; larger `j` go through `ln_gamma` with explicit sign tracking.
pub fn gen_binomial(a: f64, j: u64) -> f64 {
    if a.fract() == 0.0 && a >= 0.0 && (j as f64) > a {
        return 0.0;
    }
    if j <= 32 {
        let mut acc = 1.0;
        for i in 0..j {
            // multiply before dividing: exact for integer `a` while C(a, j) < 2^53
            acc = acc * (a - i as f64) / (i + 1) as f64;
        }
        return acc;
    }
    let jf = j as f64;
    let parity = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    if is_nonpositive_integer(a + 1.0) {
        // C(a, j) = (-1)^j C(j - a - 1, j) with j - a - 1 >= j
        let m = -a;
        let (lg_num, _) = ln_gamma_signed(m + jf).expect("positive argument");
        let lg = lg_num - ln_gamma(jf + 1.0).expect("positive") - ln_gamma(m).expect("positive");
        return parity * lg.exp();
    }
    let (lg_num, s_num) = ln_gamma_signed(a + 1.0).expect("checked pole");
    let (lg_den, s_den) = ln_gamma_signed(a - jf + 1.0).expect("integer case handled above");
    let lg = lg_num - ln_gamma(jf + 1.0).expect("positive") - lg_den;
    s_num * s_den * lg.exp()
}

/// Degree and exponents of a Jacobi polynomial `P_n^{(μ,k)}` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    n: usize,
    mu: f64,
    k: f64,
}

impl JacobiParams {
    pub fn new(n: usize, mu: f64, k: f64) -> Result<Self> {
        if !(mu > -1.0) || !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be a finite value > -1, got {mu}")));
        }
        if !(k > -1.0) || !k.is_finite() {
            return Err(Error::invalid("k", format!("must be a finite value > -1, got {k}")));
        }
        Ok(JacobiParams { n, mu, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// `P_n^{(μ,k)}(τ) = Σ_j C(n+μ, j) C(n+k, n-j) (τ-1)^{n-j} τ^j`, summed as written.
pub fn jacobi_eval(p: &JacobiParams, tau: f64) -> Result<f64> {
    JacobiPoly::new(p).eval(tau)
}

/// [`jacobi_eval`] with the binomial products precomputed, for evaluation on
/// many nodes. Results are bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPoly {
    coeffs: Vec<f64>,
}

impl JacobiPoly {
    pub fn new(p: &JacobiParams) -> Self {
        let n = p.n;
        let upper_mu = n as f64 + p.mu;
        let upper_k = n as f64 + p.k;
        let coeffs = (0..=n)
            .map(|j| gen_binomial(upper_mu, j as u64) * gen_binomial(upper_k, (n - j) as u64))
            .collect();
        JacobiPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::domain("jacobi_eval tau", tau));
        }
        let n = self.degree();
        let mut sum = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            sum += c * (tau - 1.0).powi((n - j) as i32) * tau.powi(j as i32);
        }
        Ok(sum)
    }

    /// Same sum from precomputed `minus[e] = (τ-1).powi(e)` and
    /// `plus[e] = τ.powi(e)`, `e <= degree`; bitwise equal to [`JacobiPoly::eval`].
    pub fn eval_from_powers(&self, minus: &[f64], plus: &[f64]) -> f64 {
        let n = self.degree();
        let mut sum = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            sum += c * minus[n - j] * plus[j];
        }
        sum
    }
}

/// Weight `w_{μ,k}(τ) = (1-τ)^μ τ^k`.
///
/// Endpoints are allowed when the exponent vanishing there is non-negative.
pub fn jacobi_weight(p: &JacobiParams, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::domain("jacobi_weight tau", tau));
    }
    if tau == 0.0 && p.k < 0.0 {
        return Err(Error::SingularEndpoint { tau, exponent: p.k });
    }
    if tau == 1.0 && p.mu < 0.0 {
        return Err(Error::SingularEndpoint { tau, exponent: p.mu });
    }
    Ok((1.0 - tau).powf(p.mu) * tau.powf(p.k))
}
