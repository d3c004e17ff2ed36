//! Special functions with explicit error bounds.
//!
//! Airy functions and their zeros are evaluated in fixed-point arithmetic at
//! a configurable number of digits. The remaining functions run in double
//! precision; their `error_bound` is a bound on the absolute error that scales
//! like `1e-15·max(1, |value|)`.

mod airy;
mod elementary;
mod kummer;
pub mod quad;

use std::f64::consts::PI;

use thiserror::Error;

use crate::hp::HpReal;

pub use airy::{
    airy_ai, airy_ai_prime, airy_ai_prime_with, airy_ai_with, airy_bi, airy_bi_prime, airy_bi_prime_with, airy_bi_with,
    airy_f64, airy_hp, airy_zero, airy_zero_with, airy_zeros_f64, mcmahon, zero_lower_bound, zero_sum_tail, AiryF64,
    AiryValues, AIRY_RANGE, MAX_ZERO_INDEX,
};
pub use elementary::EULER_GAMMA;
pub use quad::QuadResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("{function}: argument {arg} outside the supported range")]
    RangeExceeded { function: &'static str, arg: f64 },
    #[error("{function}: pole at {arg}")]
    Pole { function: &'static str, arg: f64 },
    #[error("{function} did not converge ({detail})")]
    NotConverged { function: &'static str, detail: String },
    #[error("quadrature error estimate {error:e} above tolerance {tol:e}")]
    QuadratureFailed { error: f64, tol: f64 },
}

/// A value together with a bound on its absolute error.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub value: HpReal,
    pub error_bound: f64,
}

impl EvalResult {
    pub fn new(value: HpReal, error_bound: f64) -> EvalResult {
        EvalResult { value, error_bound }
    }

    /// Wraps a double, represented exactly.
    pub fn from_f64(value: f64, error_bound: f64) -> EvalResult {
        let bits = if value == 0.0 { 64 } else { (60 - value.abs().log2().floor() as i64).clamp(64, 1200) as u32 };
        EvalResult { value: HpReal::from_f64(value, bits), error_bound }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn wrap(r: Result<(f64, f64), SpecialFnError>) -> Result<EvalResult, SpecialFnError> {
    let (v, e) = r?;
    if !v.is_finite() {
        return Err(SpecialFnError::NotConverged { function: "evaluation", detail: "non-finite result".into() });
    }
    Ok(EvalResult::from_f64(v, e))
}

pub fn erfc(x: f64) -> Result<EvalResult, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::RangeExceeded { function: "erfc", arg: x });
    }
    wrap(Ok(elementary::erfc(x)))
}

/// `e^{x²} erfc(x)`, finite where `erfc` underflows.
pub fn erfcx(x: f64) -> Result<EvalResult, SpecialFnError> {
    if !x.is_finite() || x < -26.0 {
        return Err(SpecialFnError::RangeExceeded { function: "erfcx", arg: x });
    }
    wrap(Ok(elementary::erfcx(x)))
}

/// `∫₁^∞ e^{−tz}/t dt` for `z > 0`, the exponential integral `E₁(z)`.
pub fn ei(z: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(elementary::e1(z, false))
}

/// `e^z·ei(z)`.
pub fn ei_scaled(z: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(elementary::e1(z, true))
}

pub fn gamma_fn(x: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(elementary::gamma(x))
}

/// Real dilogarithm, `x ≤ 1`.
pub fn dilog(x: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(elementary::dilog(x))
}

/// `Φ(z, 1, v) = Σ_{n≥0} z^n/(v+n)`, `|z| < 1`, `v > 0`.
pub fn lerch_phi(z: f64, v: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(elementary::lerch_phi(z, v))
}

/// Kummer's `U(a, b, z)` for real `z > 0`.
pub fn kummer_u(a: f64, b: f64, z: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(kummer::kummer_u(a, b, z))
}

/// `₁F₁(a; b; z)`.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(kummer::kummer_m(a, b, z))
}

/// `U(a, b, z)` through the `₁F₁` combination, for non-integer `b`.
pub fn kummer_u_via_m(a: f64, b: f64, z: f64) -> Result<EvalResult, SpecialFnError> {
    wrap(kummer::kummer_u_series(a, b, z))
}

pub(crate) fn erfcx_f64(x: f64) -> f64 {
    elementary::erfcx(x).0
}

pub(crate) fn kummer_u_f64(a: f64, b: f64, z: f64) -> Result<f64, SpecialFnError> {
    kummer::kummer_u(a, b, z).map(|g| g.0)
}

/// `∫₀^x Ai(t) dt` (negative `x` allowed).
pub fn airy_ai_integral(x: f64) -> Result<QuadResult, SpecialFnError> {
    let panels = (x.abs() / 2.0).ceil().max(1.0) as usize;
    quad::integrate_panels(|t| airy_f64(t).ai, 0.0, x, 1e-15, panels)
}

/// `Ai(x)` from its integral representation rotated onto the ray `t = r e^{iπ/6}`:
/// `Ai(x) = (1/π) Re[e^{iπ/6} ∫₀^∞ exp(−r³/3 − xr/2 + i√3 xr/2) dr]`.
pub fn airy_ai_by_quadrature(x: f64) -> Result<QuadResult, SpecialFnError> {
    if x.abs() > 8.0 {
        return Err(SpecialFnError::RangeExceeded { function: "airy_ai_by_quadrature", arg: x });
    }
    let (s6, c6) = (PI / 6.0).sin_cos();
    let k = 3f64.sqrt() / 2.0 * x;
    let f = |r: f64| {
        let m = (-r * r * r / 3.0 - x * r / 2.0).exp();
        let (s, c) = (k * r).sin_cos();
        m * (c6 * c - s6 * s)
    };
    // tail beyond R: the integrand modulus is below e^{−R³/3 + |x|R/2}
    let r_max = 5.0 + x.abs().sqrt() * 2.0;
    let tail = (-r_max.powi(3) / 3.0 + x.abs() * r_max / 2.0).exp() / (r_max * r_max - x.abs() / 2.0);
    let r = quad::integrate_panels(f, 0.0, r_max, 1e-16, 8)?;
    Ok(QuadResult { value: r.value / PI, error: (r.error + tail) / PI })
}

const PHI_CUT: f64 = 12.0;

/// `φ_k = 2^{k+1}·3/(4π²)·∫₀^∞ x^{3(k−1)/2}/(Ai(x)² + Bi(x)²) dx`.
///
/// The integral is truncated at `X = 12`. Past `X`, `Ai² + Bi² ≥ Bi² ≥ e^{2ζ}/(π√x)`
/// and the integrand is log-concave, which bounds the tail by
/// `π X^s e^{−(4/3)X^{3/2}}/λ` with `s = 3(k−1)/2 + 1/2` and `λ = 2X^{1/2} − s/X`.
pub fn phi_via_integral(k: u32) -> Result<EvalResult, SpecialFnError> {
    if k == 0 {
        return Err(SpecialFnError::RangeExceeded { function: "phi_via_integral", arg: 0.0 });
    }
    let p = 3.0 * (k as f64 - 1.0) / 2.0;
    let f = |x: f64| {
        let a = airy_f64(x);
        x.powf(p) / (a.ai * a.ai + a.bi * a.bi)
    };
    let r = quad::integrate_panels(f, 0.0, PHI_CUT, 1e-13, 12)?;
    let x = PHI_CUT;
    let s = p + 0.5;
    let lambda = 2.0 * x.sqrt() - s / x;
    if lambda <= 0.0 {
        return Err(SpecialFnError::NotConverged { function: "phi_via_integral", detail: format!("k = {k}") });
    }
    let tail = PI * x.powf(s) * (-(4.0 / 3.0) * x.powf(1.5)).exp() / lambda;
    let pref = 2f64.powi(k as i32 + 1) * 3.0 / (4.0 * PI * PI);
    let value = pref * r.value;
    let bound = pref * (r.error + tail) + 8.0 * f64::EPSILON * value.abs() * (k as f64 + 1.0);
    if bound > 1e-8 {
        return Err(SpecialFnError::QuadratureFailed { error: bound, tol: 1e-8 });
    }
    Ok(EvalResult::from_f64(value, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_low_orders() {
        let p1 = phi_via_integral(1).unwrap();
        assert!((p1.to_f64() - 0.5).abs() < 1e-8, "{}", p1.to_f64());
        let p2 = phi_via_integral(2).unwrap();
        assert!((p2.to_f64() - 0.625).abs() < 1e-8, "{}", p2.to_f64());
    }

    #[test]
    fn airy_by_quadrature_matches_series() {
        for x in [-2.0, 0.0, 1.0, 5.0] {
            let q = airy_ai_by_quadrature(x).unwrap();
            let s = airy_ai(x).unwrap().to_f64();
            assert!((q.value - s).abs() < 1e-14 + q.error, "{x}: {} {s}", q.value);
        }
    }

    #[test]
    fn eval_result_wraps_exactly() {
        let e = EvalResult::from_f64(1.0e-30, 0.0);
        assert_eq!(e.to_f64(), 1.0e-30);
    }
}
