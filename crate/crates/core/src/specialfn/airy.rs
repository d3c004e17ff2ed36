//! Airy functions: Maclaurin series in fixed-point arithmetic, asymptotic
//! expansions for the fast path, and the zeros `−β_k` of `Ai`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use super::{EvalResult, SpecialFnError};
use crate::hp::{gamma_one_third, HpReal, Precision};

/// Largest |x| accepted by the high-precision evaluators.
pub const AIRY_RANGE: f64 = 100.0;

/// Largest zero index served by [`airy_zero`].
pub const MAX_ZERO_INDEX: usize = 20;

const CONST_BITS: u32 = 2048;

struct AiryConstants {
    /// `Ai(0) = 3^{-1/6} Γ(1/3) / (2π)`
    c1: HpReal,
    /// `−Ai'(0) = 3^{-1/3} / Γ(1/3)`
    c2: HpReal,
    sqrt3: HpReal,
}

fn compute_constants(bits: u32) -> AiryConstants {
    let wp = bits + 32;
    let g = gamma_one_third(wp);
    let three = HpReal::from_int(3, wp);
    let pi = HpReal::pi(wp);
    let c1 = g.div(&three.nth_root(6)).div(&pi.mul_int(2));
    let c2 = three.nth_root(3).mul(&g).recip();
    AiryConstants { c1: c1.with_bits(bits), c2: c2.with_bits(bits), sqrt3: three.sqrt().with_bits(bits) }
}

fn constants(bits: u32) -> AiryConstants {
    static CACHE: OnceLock<AiryConstants> = OnceLock::new();
    if bits + 8 > CONST_BITS {
        return compute_constants(bits);
    }
    let c = CACHE.get_or_init(|| compute_constants(CONST_BITS));
    AiryConstants { c1: c.c1.with_bits(bits), c2: c.c2.with_bits(bits), sqrt3: c.sqrt3.with_bits(bits) }
}

/// `Ai, Ai', Bi, Bi'` at one point with a common absolute error bound.
#[derive(Clone, Debug)]
pub struct AiryValues {
    pub ai: HpReal,
    pub aip: HpReal,
    pub bi: HpReal,
    pub bip: HpReal,
    pub error_bound: f64,
}

/// Maclaurin evaluation with `digits` correct digits relative to
/// `max(1, |value|)`; for `x > 0` the budget also covers `Ai`'s decay.
pub fn airy_hp(x: &HpReal, prec: Precision) -> Result<AiryValues, SpecialFnError> {
    let xf = x.to_f64();
    if !(xf.abs() <= AIRY_RANGE) {
        return Err(SpecialFnError::RangeExceeded { function: "airy", arg: xf });
    }
    let zeta = 2.0 / 3.0 * xf.abs().powf(1.5);
    // cancellation: terms reach e^ζ; Ai(x) ~ e^{-ζ} for x > 0
    let lost = if xf > 0.0 { 2.0 * zeta } else { zeta } / std::f64::consts::LN_2;
    let wp = prec.bits() + lost.ceil() as u32 + 40;
    let xw = x.with_bits(wp);
    let x3 = xw.mul(&xw).mul(&xw);
    let eps = HpReal::from_f64(2f64.powi(-(wp as i32) + 8), wp);

    // f = Σ a_k, g = Σ b_k, f' = Σ fp_k, g' = Σ gp_k
    let one = HpReal::from_int(1, wp);
    let (mut a, mut b) = (one.clone(), xw.clone());
    let (mut fp, mut gp) = (xw.mul(&xw).div_int(2), one.clone());
    let (mut sf, mut sg, mut sfp, mut sgp) = (a.clone(), b.clone(), fp.clone(), gp.clone());
    let mut abs_sum: f64 = 2.0 + xf.abs() + xf * xf;
    let mut k: i64 = 1;
    loop {
        a = a.mul(&x3).div_int((3 * k - 1) * (3 * k));
        b = b.mul(&x3).div_int((3 * k) * (3 * k + 1));
        gp = gp.mul(&x3).div_int((3 * k) * (3 * k - 2));
        if k >= 2 {
            fp = fp.mul(&x3).div_int((3 * k - 1) * (3 * k - 3));
        }
        sf = sf.add(&a);
        sg = sg.add(&b);
        sgp = sgp.add(&gp);
        if k >= 2 {
            sfp = sfp.add(&fp);
        }
        abs_sum += a.abs().to_f64() + b.abs().to_f64() + fp.abs().to_f64() + gp.abs().to_f64();
        let kf = k as f64;
        let decreasing = 9.0 * kf * kf > 2.0 * xf.abs().powi(3) + 1.0;
        let small = [&a, &b, &fp, &gp].iter().all(|t| t.abs().cmp_value(&eps).is_lt());
        if decreasing && small {
            break;
        }
        k += 1;
    }
    let c = constants(wp);
    let ai = c.c1.mul(&sf).sub(&c.c2.mul(&sg));
    let aip = c.c1.mul(&sfp).sub(&c.c2.mul(&sgp));
    let bi = c.sqrt3.mul(&c.c1.mul(&sf).add(&c.c2.mul(&sg)));
    let bip = c.sqrt3.mul(&c.c1.mul(&sfp).add(&c.c2.mul(&sgp)));
    // tail ≤ 2·last term per series; rounding ≤ a few ulps per step on the sum of magnitudes
    let ulp = 2f64.powi(-(wp as i32));
    let trunc = 8.0 * 2f64.powi(-(wp as i32) + 8);
    let round = (k as f64 + 16.0) * 16.0 * ulp * abs_sum.max(1.0);
    let out = prec.bits();
    let error_bound = trunc + round + 2f64.powi(-(out as i32));
    Ok(AiryValues {
        ai: ai.with_bits(out),
        aip: aip.with_bits(out),
        bi: bi.with_bits(out),
        bip: bip.with_bits(out),
        error_bound,
    })
}

fn eval_at(x: f64, prec: Precision) -> Result<AiryValues, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::RangeExceeded { function: "airy", arg: x });
    }
    airy_hp(&HpReal::from_f64(x, prec.bits() + 64), prec)
}

pub fn airy_ai_with(x: f64, prec: Precision) -> Result<EvalResult, SpecialFnError> {
    let v = eval_at(x, prec)?;
    Ok(EvalResult::new(v.ai, v.error_bound))
}

pub fn airy_ai_prime_with(x: f64, prec: Precision) -> Result<EvalResult, SpecialFnError> {
    let v = eval_at(x, prec)?;
    Ok(EvalResult::new(v.aip, v.error_bound))
}

pub fn airy_bi_with(x: f64, prec: Precision) -> Result<EvalResult, SpecialFnError> {
    let v = eval_at(x, prec)?;
    Ok(EvalResult::new(v.bi, v.error_bound))
}

pub fn airy_bi_prime_with(x: f64, prec: Precision) -> Result<EvalResult, SpecialFnError> {
    let v = eval_at(x, prec)?;
    Ok(EvalResult::new(v.bip, v.error_bound))
}

/// `Ai(x)` at the default precision, `|x| ≤ 100`.
pub fn airy_ai(x: f64) -> Result<EvalResult, SpecialFnError> {
    airy_ai_with(x, Precision::default())
}

pub fn airy_ai_prime(x: f64) -> Result<EvalResult, SpecialFnError> {
    airy_ai_prime_with(x, Precision::default())
}

pub fn airy_bi(x: f64) -> Result<EvalResult, SpecialFnError> {
    airy_bi_with(x, Precision::default())
}

pub fn airy_bi_prime(x: f64) -> Result<EvalResult, SpecialFnError> {
    airy_bi_prime_with(x, Precision::default())
}

/// Double-precision Airy values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryF64 {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

const ASYMPTOTIC_FROM: f64 = 12.0;
const FAST_PREC: Precision = Precision(19);

/// `u_k`, `v_k` of the large-argument expansions.
fn uv(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

fn asymptotic(x: f64) -> AiryF64 {
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let q = z.powf(0.25);
    let sp = PI.sqrt();
    let (u, v) = uv(20);
    if x > 0.0 {
        let (mut su_a, mut sv_a, mut su_b, mut sv_b) = (0.0, 0.0, 0.0, 0.0);
        let mut p = 1.0;
        for k in 0..u.len() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            su_a += sign * u[k] * p;
            sv_a += sign * v[k] * p;
            su_b += u[k] * p;
            sv_b += v[k] * p;
            p /= zeta;
            if u[k] * p < 1e-18 {
                break;
            }
        }
        let e = (-zeta).exp();
        AiryF64 {
            ai: e / (2.0 * sp * q) * su_a,
            aip: -q * e / (2.0 * sp) * sv_a,
            bi: 1.0 / (e * sp * q) * su_b,
            bip: q / (e * sp) * sv_b,
        }
    } else {
        // even/odd parts of the alternating series in 1/ζ
        let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
        let mut p = 1.0;
        for k in 0..u.len() {
            let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                ue += s * u[k] * p;
                ve += s * v[k] * p;
            } else {
                uo += s * u[k] * p;
                vo += s * v[k] * p;
            }
            p /= zeta;
            if u[k] * p < 1e-18 {
                break;
            }
        }
        let (sn, cs) = (zeta - FRAC_PI_4).sin_cos();
        AiryF64 {
            ai: (cs * ue + sn * uo) / (sp * q),
            bi: (-sn * ue + cs * uo) / (sp * q),
            aip: q / sp * (sn * ve - cs * vo),
            bip: q / sp * (cs * ve + sn * vo),
        }
    }
}

/// Airy values to about double precision (relative for `Ai`, `Bi` on
/// `x > 0`); Maclaurin series for `|x| < 12`, asymptotic expansions beyond.
pub fn airy_f64(x: f64) -> AiryF64 {
    if x.abs() >= ASYMPTOTIC_FROM {
        return asymptotic(x);
    }
    let v = airy_hp(&HpReal::from_f64(x, FAST_PREC.bits() + 64), FAST_PREC).expect("in range");
    AiryF64 { ai: v.ai.to_f64(), aip: v.aip.to_f64(), bi: v.bi.to_f64(), bip: v.bip.to_f64() }
}

/// McMahon's expansion of `β_k`.
pub fn mcmahon(k: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0)
        * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77125.0 / 82944.0 + t2 * (-108056875.0 / 6967296.0)))))
}

/// Lower bound `β_k ≥ (3π(4k−1)/8)^{2/3}`.
pub fn zero_lower_bound(k: usize) -> f64 {
    (3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0).powf(2.0 / 3.0)
}

fn zero_hp(k: usize, prec: Precision) -> Result<(HpReal, f64), SpecialFnError> {
    let work = Precision(prec.0 + 10);
    let bits = work.bits();
    // refine in f64 first, then in fixed point
    let mut b = mcmahon(k);
    for _ in 0..4 {
        let v = airy_f64(-b);
        b += v.ai / v.aip;
    }
    let mut beta = HpReal::from_f64(b, bits);
    let target = 10f64.powi(-(prec.0 as i32));
    for _ in 0..64 {
        let v = airy_hp(&beta.neg(), work)?;
        let step = v.ai.div(&v.aip);
        beta = beta.add(&step);
        let s = step.abs().to_f64();
        if s < target * 1e-3 {
            let slope = v.aip.abs().to_f64();
            let bound = 2.0 * s + v.error_bound / slope.max(1e-300) + 2f64.powi(-(bits as i32));
            return Ok((beta.with_bits(prec.bits()), bound));
        }
    }
    Err(SpecialFnError::NotConverged { function: "airy_zero", detail: format!("k = {k}") })
}

/// `β_k > 0`, where `−β_k` is the `k`-th zero of `Ai`, for `1 ≤ k ≤ 20`.
pub fn airy_zero_with(k: usize, prec: Precision) -> Result<EvalResult, SpecialFnError> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(SpecialFnError::RangeExceeded { function: "airy_zero", arg: k as f64 });
    }
    let (v, e) = zero_hp(k, prec)?;
    Ok(EvalResult::new(v, e))
}

pub fn airy_zero(k: usize) -> Result<EvalResult, SpecialFnError> {
    airy_zero_with(k, Precision::default())
}

/// `β_1, …, β_n` in double precision: Newton-refined for small `k`, McMahon beyond.
pub fn airy_zeros_f64(n: usize) -> Vec<f64> {
    static SMALL: OnceLock<Vec<f64>> = OnceLock::new();
    let small = SMALL.get_or_init(|| {
        (1..=MAX_ZERO_INDEX).map(|k| zero_hp(k, Precision(20)).expect("small Airy zero").0.to_f64()).collect()
    });
    (1..=n).map(|k| if k <= MAX_ZERO_INDEX { small[k - 1] } else { mcmahon(k) }).collect()
}

/// Upper bound on `Σ_{k>K} e^{−τ β_k}`, from `β_k ≥ (3π(4k−1)/8)^{2/3}`.
pub fn zero_sum_tail(kmax: usize, tau: f64) -> f64 {
    // Σ_{k>K} ≤ ∫_K^∞ e^{−τ b(k)} dk with dk = √b/π db
    let b = zero_lower_bound(kmax);
    (-tau * b).exp() / PI * (b.sqrt() / tau + 1.0 / (2.0 * tau * tau * b.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        let ai = airy_ai(0.0).unwrap();
        assert_eq!(ai.value.to_decimal(24), "0.355028053887817239260063");
        let aip = airy_ai_prime(0.0).unwrap();
        assert_eq!(aip.value.to_decimal(24), "-0.258819403792806798405184");
        assert!(ai.error_bound <= 1e-20);
    }

    #[test]
    fn asymptotic_matches_series_at_switch() {
        for x in [-12.0, 12.0, -13.5, 14.0] {
            let a = asymptotic(x);
            let s = airy_hp(&HpReal::from_f64(x, 200), Precision(25)).unwrap();
            let rel = |u: f64, v: &HpReal| (u - v.to_f64()).abs() / v.to_f64().abs().max(1e-300);
            if x > 0.0 {
                assert!(rel(a.ai, &s.ai) < 1e-14, "{x}");
                assert!(rel(a.bi, &s.bi) < 1e-14, "{x}");
            } else {
                assert!((a.ai - s.ai.to_f64()).abs() < 1e-14, "{x}");
                assert!((a.bip - s.bip.to_f64()).abs() < 1e-13, "{x}");
            }
        }
    }

    #[test]
    fn first_zeros() {
        let z = airy_zero(1).unwrap();
        assert_eq!(z.value.to_decimal(19), "2.3381074104597670385");
        let z3 = airy_zero(3).unwrap();
        assert_eq!(z3.value.to_decimal(19), "5.5205598280955510591");
        assert!(airy_zero(21).is_err());
    }

    #[test]
    fn mcmahon_is_accurate_past_the_table() {
        let b = zero_hp(20, Precision(20)).unwrap().0.to_f64();
        assert!((mcmahon(20) - b).abs() < 1e-14);
        assert!(zero_lower_bound(20) < b);
    }
}
