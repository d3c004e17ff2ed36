//! Closed-form scaling functions near `(x_c, 1)` and their comparison with
//! directly evaluated generating functions.

use std::f64::consts::PI;

use thiserror::Error;

use crate::model::{ratio_to_f64, ModelSpec, PolygonClass};
use crate::qfunc::{self, builtin_equation, evaluate_p, staircase_anisotropic_equation, QFuncError};
use crate::specialfn::{self, airy_f64, airy_zeros_f64, SpecialFnError};

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("{what}: argument outside the domain ({detail})")]
    Domain { what: &'static str, detail: String },
    #[error("Airy argument {arg} lies within 1e-3 of the zero −{zero} (simple pole of Ai'/Ai)")]
    PoleProximity { arg: f64, zero: f64 },
    #[error("no scaling function for {0}")]
    Unsupported(PolygonClass),
    #[error(transparent)]
    QFunc(#[from] QFuncError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

fn domain(what: &'static str, detail: impl Into<String>) -> ScalingError {
    ScalingError::Domain { what, detail: detail.into() }
}

/// An approximation together with a bound on `|direct − approx|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approximation {
    pub approx: f64,
    pub remainder_bound: f64,
}

/// A direct evaluation with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direct {
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingVariable {
    /// `s = (1 − x/x_c)/(1 − q)^φ`.
    Standard,
    /// `s = |log x|/√|log q|`.
    SquaresLog,
    /// `s = (1 − 4x)/ε^{2/3}`, `q = e^{−ε}`.
    StaircaseEps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSpec {
    pub model: PolygonClass,
    pub theta: f64,
    pub phi: f64,
    pub variable: ScalingVariable,
    /// `P^(reg)` near the critical point.
    pub regular_part: f64,
    pub domain: (f64, f64),
}

impl ScalingSpec {
    /// Squares and staircase; rectangles lack a scaling function with
    /// `s_− ≤ 0` and Ferrers only has an amplitude function.
    pub fn of(class: PolygonClass) -> Result<ScalingSpec, ScalingError> {
        let m = ModelSpec::of(class);
        let (theta, phi) = (ratio_to_f64(&m.theta), ratio_to_f64(&m.phi));
        match class {
            PolygonClass::Squares => Ok(ScalingSpec {
                model: class,
                theta,
                phi,
                variable: ScalingVariable::SquaresLog,
                regular_part: 0.5,
                domain: (0.0, f64::INFINITY),
            }),
            PolygonClass::Staircase => Ok(ScalingSpec {
                model: class,
                theta,
                phi,
                variable: ScalingVariable::StaircaseEps,
                regular_part: 0.25,
                domain: (-airy_zeros_f64(1)[0] / 4f64.powf(1.0 / 3.0), f64::INFINITY),
            }),
            _ => Err(ScalingError::Unsupported(class)),
        }
    }

    pub fn evaluate(&self, s: f64) -> Result<f64, ScalingError> {
        if !(s > self.domain.0 && s < self.domain.1) {
            return Err(domain("scaling function", format!("s = {s} outside ({}, {})", self.domain.0, self.domain.1)));
        }
        match self.model {
            PolygonClass::Squares => Ok(squares_scaling_fn(s)),
            _ => staircase_scaling_fn(s),
        }
    }
}

/// `F(s) = √π e^{s²} erfc(s)`.
pub fn squares_scaling_fn(s: f64) -> f64 {
    PI.sqrt() * specialfn::erfcx_f64(s)
}

/// `F(s) = ¼ d/ds log Ai(4^{1/3}s) = 4^{−2/3} Ai'(4^{1/3}s)/Ai(4^{1/3}s)`.
pub fn staircase_scaling_fn(s: f64) -> Result<f64, ScalingError> {
    Ok(4f64.powf(-2.0 / 3.0) * airy_log_derivative(4f64.powf(1.0 / 3.0) * s)?)
}

fn airy_log_derivative(z: f64) -> Result<f64, ScalingError> {
    if z < 0.0 {
        let n = (((-z).powf(1.5) * 2.0 / (3.0 * PI)) as usize + 3).max(4);
        for b in airy_zeros_f64(n) {
            if (z + b).abs() < 1e-3 {
                return Err(ScalingError::PoleProximity { arg: z, zero: b });
            }
        }
    }
    let a = airy_f64(z);
    if a.ai == 0.0 {
        return Err(domain("Ai'/Ai", format!("Ai underflows at {z}")));
    }
    Ok(a.aip / a.ai)
}

/// `Σ_{m≥0} x^m q^{m²/4}`; terms past `M` shrink by at least `x q^{M/2}`.
pub fn squares_direct(x: f64, q: f64) -> Result<Direct, ScalingError> {
    if !(x > 0.0 && x < 1.0 && q > 0.0 && q < 1.0) {
        return Err(domain("squares", "need 0 < x, q < 1"));
    }
    let (lx, lq) = (x.ln(), q.ln());
    let mut sum = 0.0;
    for m in 0u64.. {
        let mf = m as f64;
        let t = (mf * lx + mf * mf * lq / 4.0).exp();
        sum += t;
        let ratio = x * q.powf((mf + 1.0) / 2.0);
        let next = t * x * q.powf((2.0 * mf + 1.0) / 4.0);
        let tail = next / (1.0 - ratio);
        if tail < 1e-17 * sum {
            return Ok(Direct { value: sum, tail_bound: tail + 1e-16 * sum });
        }
    }
    unreachable!()
}

/// `P ≈ F(|log x|/√|log q|)/√|log q| + 1/2` with `|R| ≤ |log x|/6`.
pub fn squares_scaling(x: f64, q: f64) -> Result<Approximation, ScalingError> {
    if !(x > 0.0 && x < 1.0 && q > 0.0 && q < 1.0) {
        return Err(domain("squares", "need 0 < x, q < 1"));
    }
    let (a, b) = (x.ln().abs(), q.ln().abs().sqrt());
    Ok(Approximation { approx: squares_scaling_fn(a / b) / b + 0.5, remainder_bound: a / 6.0 })
}

/// `Σ_{r≥1} x(qx)^r/(1 − q^r x)`; the tail after `R` is below `x(qx)^{R+1}/(1−qx)²`.
pub fn rectangles_direct(x: f64, q: f64) -> Result<Direct, ScalingError> {
    if !(q > 0.0 && q < 1.0 && x > 0.0 && q * x < 1.0) {
        return Err(domain("rectangles", "need 0 < q < 1 and 0 < qx < 1"));
    }
    let qx = q * x;
    let mut sum = 0.0;
    let mut p = qx;
    let mut qr = q;
    loop {
        sum += x * p / (1.0 - qr * x);
        p *= qx;
        qr *= q;
        let tail = x * p / ((1.0 - qx) * (1.0 - qx));
        if tail < 1e-17 * sum {
            return Ok(Direct { value: sum, tail_bound: tail + 1e-15 * sum });
        }
    }
}

/// `P ≈ x/|log q|·(Φ(qx, 1, |log x|/|log q|) − |log q|/|log x|)`, with
/// `|R| ≤ x²q/(1−qx)·(1/2 + |log x|/6) + x²q/(1−qx)²·|log q|/6`.
pub fn rectangles_scaling(x: f64, q: f64) -> Result<Approximation, ScalingError> {
    if !(q > 0.0 && q < 1.0 && x > 0.0 && q * x < 1.0) {
        return Err(domain("rectangles", "need 0 < q < 1 and 0 < qx < 1"));
    }
    if x == 1.0 {
        return Err(domain("rectangles", "x = 1 makes |log x| vanish"));
    }
    let (lx, lq) = (x.ln().abs(), q.ln().abs());
    let phi = specialfn::lerch_phi(q * x, lx / lq)?.to_f64();
    let approx = x / lq * (phi - lq / lx);
    let qx = q * x;
    let bound = x * x * q / (1.0 - qx) * (0.5 + lx / 6.0) + x * x * q / ((1.0 - qx) * (1.0 - qx)) * lq / 6.0;
    Ok(Approximation { approx, remainder_bound: bound })
}

/// `P(x, q) ≈ 1/4 + 4^{−2/3}ε^{1/3}Ai'(z)/Ai(z)`, `z = 4^{4/3}(1/4 − x)ε^{−2/3}`, `q = e^{−ε}`.
pub fn staircase_scaling_iso(x: f64, q: f64) -> Result<f64, ScalingError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("staircase", "need 0 < q < 1"));
    }
    let eps = -q.ln();
    let z = 4f64.powf(4.0 / 3.0) * (0.25 - x) * eps.powf(-2.0 / 3.0);
    Ok(0.25 + 4f64.powf(-2.0 / 3.0) * eps.powf(1.0 / 3.0) * airy_log_derivative(z)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StairScalingParams {
    pub x: f64,
    pub y: f64,
    pub eps: f64,
    pub z_m: f64,
    pub d: f64,
    pub alpha: f64,
    /// `|(4/3)α^{3/2} − rhs|`.
    pub residual: f64,
}

/// `α` from `(4/3)α^{3/2} = log(x)·log((z_m−√d)/(z_m+√d)) + 2Li₂(z_m−√d) − 2Li₂(z_m+√d)`,
/// on the region `d > 0`, `z_m + √d ≤ 1` where the right side is positive.
pub fn stair_alpha(x: f64, y: f64, eps: f64) -> Result<StairScalingParams, ScalingError> {
    let z_m = (1.0 + y - x) / 2.0;
    let d = z_m * z_m - y;
    if !(x > 0.0 && y > 0.0 && d > 0.0) {
        return Err(domain("anisotropic staircase", format!("need x, y > 0 and d > 0 (d = {d})")));
    }
    let r = d.sqrt();
    let (lo, hi) = (z_m - r, z_m + r);
    if !(lo > 0.0 && hi <= 1.0) {
        return Err(domain("anisotropic staircase", format!("z_m ± √d = ({lo}, {hi}) leaves (0, 1]")));
    }
    let rhs = x.ln() * (lo / hi).ln() + 2.0 * specialfn::dilog(lo)?.to_f64() - 2.0 * specialfn::dilog(hi)?.to_f64();
    if !(rhs > 0.0) {
        return Err(domain("anisotropic staircase", format!("α^{{3/2}} = {} is not positive", 0.75 * rhs)));
    }
    let alpha = (0.75 * rhs).powf(2.0 / 3.0);
    let residual = (4.0 / 3.0 * alpha.powf(1.5) - rhs).abs();
    Ok(StairScalingParams { x, y, eps, z_m, d, alpha, residual })
}

/// `(1−x−y)/2`, the regular part of the anisotropic form.
pub fn stair_leading(x: f64, y: f64) -> f64 {
    (1.0 - x - y) / 2.0
}

/// `(1−x−y)/2 + α^{−1/2}ε^{1/3}(Ai'/Ai)(αε^{−2/3})·√(((1−x−y)/2)² − xy)`, `q = e^{−ε}`.
pub fn staircase_scaling_aniso(x: f64, y: f64, q: f64) -> Result<f64, ScalingError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("staircase", "need 0 < q < 1"));
    }
    let eps = -q.ln();
    let lead = stair_leading(x, y);
    let w = lead * lead - x * y;
    if !(w > 0.0) {
        return Err(domain("anisotropic staircase", "on or beyond the critical curve √x + √y = 1"));
    }
    let p = stair_alpha(x, y, eps)?;
    let ld = airy_log_derivative(p.alpha * eps.powf(-2.0 / 3.0))?;
    Ok(lead + p.alpha.powf(-0.5) * eps.powf(1.0 / 3.0) * ld * w.sqrt())
}

/// Anisotropic staircase generating function by iteration of its equation.
pub fn staircase_aniso_direct(x: f64, y: f64, q: f64, tol: f64) -> Result<f64, ScalingError> {
    Ok(qfunc::evaluate_p_bivariate(&staircase_anisotropic_equation(), x, y, q, tol)?)
}

/// `F(s) = √(π/8) e^{2s²} erfc(√2 s)`: Ferrers amplitude function, `F' = 4sF − 1`.
pub fn ferrers_amplitude_fn(s: f64) -> f64 {
    (PI / 8.0).sqrt() * specialfn::erfcx_f64(2f64.sqrt() * s)
}

/// `F(s) = e^{s²}E₁(s²)`: rectangle amplitude function, `sF' + 2 − 2s²F = 0`.
pub fn rect_amplitude_fn(s: f64) -> Result<f64, ScalingError> {
    if !(s > 0.0) {
        return Err(domain("rectangle amplitude", "need s > 0"));
    }
    Ok(specialfn::ei_scaled(s * s)?.to_f64())
}

/// Central differences at `h, h/2, h/4` combined by Richardson extrapolation;
/// error `O(h⁶)`.
pub fn derivative(f: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    let c = |h: f64| (f(s + h) - f(s - h)) / (2.0 * h);
    let (d1, d2, d3) = (c(h), c(h / 2.0), c(h / 4.0));
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * e2 - e1) / 15.0
}

/// One scan point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub model: PolygonClass,
    pub s: f64,
    pub eps: f64,
    pub x: f64,
    pub q: f64,
    pub direct: f64,
    pub approx: f64,
    /// `|direct − approx|/|direct|`.
    pub rel_error: f64,
    /// Remainder bound divided by `|direct|`, where one is known.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    /// CSV `model,s,eps,x,q,direct,approx,rel_error,bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,s,eps,x,q,direct,approx,rel_error,bound\n");
        for r in &self.rows {
            let bound = r.bound.map(|b| format!("{b:.6e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e},{}\n",
                r.model, r.s, r.eps, r.x, r.q, r.direct, r.approx, r.rel_error, bound
            ));
        }
        out
    }

    /// Whether the error decreases strictly along `ε ↓` at every `s`.
    pub fn decreasing_in_eps(&self) -> bool {
        let mut by_s: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for r in &self.rows {
            match by_s.iter_mut().find(|(s, _)| *s == r.s) {
                Some((_, v)) => v.push((r.eps, r.rel_error)),
                None => by_s.push((r.s, vec![(r.eps, r.rel_error)])),
            }
        }
        by_s.into_iter().all(|(_, mut v)| {
            v.sort_by(|a, b| b.0.total_cmp(&a.0));
            v.windows(2).all(|w| w[1].1 < w[0].1)
        })
    }
}

/// Compares direct evaluation with the scaling approximation on a grid,
/// `q = e^{−ε}`:
/// squares `x = e^{−s√ε}`; rectangles `x = e^{−sε}`; staircase `x = (1 − sε^{2/3})/4`.
pub fn scaling_error_scan(model: PolygonClass, s_grid: &[f64], eps_grid: &[f64]) -> Result<ScanTable, ScalingError> {
    let mut rows = Vec::new();
    for &s in s_grid {
        for &eps in eps_grid {
            let q = (-eps).exp();
            let (x, direct, approx, bound) = match model {
                PolygonClass::Squares => {
                    let x = (-s * eps.sqrt()).exp();
                    let a = squares_scaling(x, q)?;
                    (x, squares_direct(x, q)?.value, a.approx, Some(a.remainder_bound))
                }
                PolygonClass::Rectangles => {
                    let x = (-s * eps).exp();
                    let a = rectangles_scaling(x, q)?;
                    (x, rectangles_direct(x, q)?.value, a.approx, Some(a.remainder_bound))
                }
                PolygonClass::Staircase => {
                    let x = (1.0 - s * eps.powf(2.0 / 3.0)) / 4.0;
                    let spec = builtin_equation(PolygonClass::Staircase);
                    (x, evaluate_p(&spec, x, q, 1e-13)?, staircase_scaling_iso(x, q)?, None)
                }
                other => return Err(ScalingError::Unsupported(other)),
            };
            rows.push(ScanRow {
                model,
                s,
                eps,
                x,
                q,
                direct,
                approx,
                rel_error: ((direct - approx) / direct).abs(),
                bound: bound.map(|b| b / direct.abs()),
            });
        }
    }
    Ok(ScanTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_simple_points() {
        assert!((ferrers_amplitude_fn(0.0) - (PI / 8.0).sqrt()).abs() < 1e-15);
        let e = std::f64::consts::E;
        // E₁(1) = 0.21938393439552027368
        assert!((rect_amplitude_fn(1.0).unwrap() - e * 0.219_383_934_395_520_27).abs() < 1e-14);
        assert!((squares_scaling_fn(0.0) - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_exp() {
        assert!((derivative(f64::exp, 1.0, 0.1) - std::f64::consts::E).abs() < 1e-11);
    }

    #[test]
    fn unsupported_models() {
        assert_eq!(ScalingSpec::of(PolygonClass::Ferrers), Err(ScalingError::Unsupported(PolygonClass::Ferrers)));
        assert!(scaling_error_scan(PolygonClass::DirectedConvex, &[1.0], &[0.1]).is_err());
        assert!(scaling_error_scan(PolygonClass::Staircase, &[], &[0.1]).unwrap().rows.is_empty());
    }
}
