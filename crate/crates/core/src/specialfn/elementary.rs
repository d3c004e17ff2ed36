//! Double-precision evaluators: erfc, E₁, Γ, Li₂ and the Lerch transcendent with a = 1.

use std::f64::consts::PI;

use super::SpecialFnError;
use crate::hp::{euler_gamma, HpReal};

const EPS: f64 = f64::EPSILON;

/// A value with a bound on its absolute error.
pub(crate) type Approx = (f64, f64);

/// `erf(x)` by its Maclaurin series, for `|x| < 1`.
fn erf_series(x: f64) -> Approx {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut abs = x.abs();
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x2 / n;
        let t = term / (2.0 * n + 1.0);
        sum += t;
        abs += t.abs();
        if t.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    let c = 2.0 / PI.sqrt();
    (c * sum, c * (4.0 * EPS * abs + 1e-18 * sum.abs()))
}

/// `e^{x²} erfc(x)` for `x ≥ 0.5` by the Laplace continued fraction (modified Lentz).
fn erfcx_cf(x: f64) -> Approx {
    // erfc(x) e^{x²} √π = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    let mut n = 1;
    loop {
        let a = n as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        n += 1;
        if (delta - 1.0).abs() < 1e-17 || n > 200_000 {
            break;
        }
    }
    let v = 1.0 / (f * PI.sqrt());
    (v, v * (8.0 * EPS + 1e-16))
}

/// Upper end of the fixed-point erfc/erfcx route.
pub(crate) const ERF_HP_LIMIT: f64 = 6.0;

/// `(erfc(x), e^{x²}erfc(x))` in fixed point for `|x| < 6`, with a relative error bound.
pub(crate) fn erfc_hp(x: f64) -> (HpReal, HpReal, f64) {
    // erf = 2/√π Σ (−1)^n x^{2n+1}/(n!(2n+1)); the terms reach e^{x²}, erfc falls to e^{−x²}
    let wp = 96 + (2.0 * x * x / std::f64::consts::LN_2).ceil() as u32;
    let xh = HpReal::from_f64(x, wp);
    let x2 = xh.mul(&xh);
    let mut p = xh.clone();
    let mut sum = xh.clone();
    let mut n = 1i64;
    loop {
        p = p.mul(&x2).div_int(n).neg();
        let t = p.div_int(2 * n + 1);
        if t.is_zero() {
            break;
        }
        sum = sum.add(&t);
        n += 1;
    }
    let two_over_sqrt_pi = HpReal::from_int(2, wp).div(&HpReal::pi(wp).sqrt());
    let erfc = HpReal::from_int(1, wp).sub(&two_over_sqrt_pi.mul(&sum));
    let erfcx = erfc.mul(&x2.exp());
    let rel = (n as f64 + 8.0) * 2f64.powi(-(wp as i32) + 2) * (2.0 * x * x).exp();
    (erfc, erfcx, rel)
}

/// `e^{x²} erfc(x)`.
pub(crate) fn erfcx(x: f64) -> Approx {
    if x.abs() < ERF_HP_LIMIT {
        let (_, v, rel) = erfc_hp(x);
        let v = v.to_f64();
        return (v, v.abs() * (rel + EPS / 2.0));
    }
    if x >= 0.5 {
        erfcx_cf(x)
    } else if x > -0.5 {
        let (e, de) = erf_series(x);
        let s = (x * x).exp();
        (s * (1.0 - e), s * (de + 2.0 * EPS))
    } else {
        // erfc(−y) = 2 − erfc(y)
        let y = -x;
        let (v, dv) = erfcx_cf(y);
        let s = (y * y).exp();
        (2.0 * s - v, dv + 4.0 * EPS * s)
    }
}

pub(crate) fn erfc(x: f64) -> Approx {
    if x.abs() < ERF_HP_LIMIT {
        let (v, _, rel) = erfc_hp(x);
        let v = v.to_f64();
        return (v, v.abs() * (rel + EPS / 2.0));
    }
    if x.abs() < 0.5 {
        let (e, de) = erf_series(x);
        (1.0 - e, de + EPS)
    } else if x > 0.0 {
        if x > 27.3 {
            return (0.0, f64::MIN_POSITIVE);
        }
        let (v, dv) = erfcx_cf(x);
        let s = (-x * x).exp();
        (v * s, (dv + 2.0 * EPS * v) * s)
    } else {
        let (v, dv) = erfc(-x);
        (2.0 - v, dv + 2.0 * EPS)
    }
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper end of the fixed-point E₁ route.
pub(crate) const E1_HP_LIMIT: f64 = 2.0;

/// `(E₁(z), e^z E₁(z))` in fixed point for `0 < z ≤ 2`, with a relative error bound.
pub(crate) fn e1_hp(z: f64) -> (HpReal, HpReal, f64) {
    let wp = 128;
    let zh = HpReal::from_f64(z, wp);
    let mut p = HpReal::from_int(1, wp);
    let mut sum = HpReal::zero(wp);
    let mut k = 1i64;
    loop {
        p = p.mul(&zh).div_int(k).neg();
        let t = p.div_int(k);
        if t.is_zero() {
            break;
        }
        sum = sum.add(&t);
        k += 1;
    }
    let v = euler_gamma(wp).add(&zh.ln()).add(&sum).neg();
    let vs = v.mul(&zh.exp());
    // E₁ ≥ 0.037 on (0, 2], so an absolute 2^{-110} is a small relative error
    (v, vs, 1e-30)
}

/// `E₁(z) = ∫₁^∞ e^{−zt}/t dt` for `z > 0`, scaled by `e^z` when `scaled`.
pub(crate) fn e1(z: f64, scaled: bool) -> Result<Approx, SpecialFnError> {
    if !(z > 0.0) {
        return Err(SpecialFnError::RangeExceeded { function: "ei", arg: z });
    }
    if z <= E1_HP_LIMIT {
        let (v, vs, rel) = e1_hp(z);
        let v = if scaled { vs.to_f64() } else { v.to_f64() };
        return Ok((v, v.abs() * (rel + EPS / 2.0)));
    }
    if z <= 1.0 {
        // −γ − ln z − Σ_{k≥1} (−z)^k / (k·k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut abs = 0.0;
        let mut k = 1.0;
        loop {
            term *= -z / k;
            let t = term / k;
            sum += t;
            abs += t.abs();
            if t.abs() < 1e-18 {
                break;
            }
            k += 1.0;
        }
        let v = -EULER_GAMMA - z.ln() - sum;
        let err = 4.0 * EPS * (abs + EULER_GAMMA + z.ln().abs());
        if scaled {
            let s = z.exp();
            Ok((v * s, (err + EPS * v.abs()) * s))
        } else {
            Ok((v, err))
        }
    } else {
        // e^z E₁(z) = 1/(z+1− 1/(z+3− 4/(z+5− …)))
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        loop {
            let an = -i * i;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-17 || i > 100_000.0 {
                break;
            }
            i += 1.0;
        }
        let err = h * 16.0 * EPS;
        if scaled {
            Ok((h, err))
        } else {
            let s = (-z).exp();
            Ok((h * s, err * s))
        }
    }
}

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// `Γ(x)` for real `x`, by Lanczos' approximation and reflection.
pub(crate) fn gamma(x: f64) -> Result<Approx, SpecialFnError> {
    if x <= 0.0 && x == x.floor() {
        return Err(SpecialFnError::Pole { function: "gamma_fn", arg: x });
    }
    if x > 171.6 {
        return Err(SpecialFnError::RangeExceeded { function: "gamma_fn", arg: x });
    }
    if x < 0.5 {
        let (g, dg) = gamma(1.0 - x)?;
        let s = (PI * x).sin();
        let v = PI / (s * g);
        return Ok((v, v.abs() * (dg / g.abs() + 8.0 * EPS)));
    }
    if x == x.floor() && x <= 30.0 {
        let mut f = 1.0;
        for i in 2..(x as u64) {
            f *= i as f64;
        }
        return Ok((f, 0.0));
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let p = t.powf((z + 0.5) / 2.0);
    let v = (2.0 * PI).sqrt() * a * p * (p * (-t).exp());
    // Lanczos truncation ≈ 2e-16 relative; powf of a large base loses ~|ln t|·(z+1/2) ulps
    let cond = 1.0 + (z + 0.5).abs() * t.ln().abs();
    Ok((v, v.abs() * EPS * (4.0 + cond)))
}

/// `Li₂(x) = −∫₀^x log(1−u)/u du` for real `x ≤ 1`.
pub(crate) fn dilog(x: f64) -> Result<Approx, SpecialFnError> {
    let zeta2 = PI * PI / 6.0;
    if x > 1.0 || !x.is_finite() {
        return Err(SpecialFnError::RangeExceeded { function: "dilog", arg: x });
    }
    if x == 1.0 {
        return Ok((zeta2, EPS * zeta2));
    }
    if x.abs() <= 0.5 {
        let mut p = x;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            let t = p / (k * k);
            sum += t;
            if t.abs() < 1e-18 {
                break;
            }
            p *= x;
            k += 1.0;
        }
        return Ok((sum, 4.0 * EPS * sum.abs().max(1e-300)));
    }
    if x > 0.5 {
        // Li₂(x) = ζ(2) − ln x ln(1−x) − Li₂(1−x)
        let (r, dr) = dilog(1.0 - x)?;
        let l = x.ln() * (1.0 - x).ln();
        let v = zeta2 - l - r;
        return Ok((v, dr + 4.0 * EPS * (zeta2 + l.abs())));
    }
    if x >= -1.0 {
        // Li₂(x) = Li₂(x²)/2 − Li₂(−x)
        let (a, da) = dilog(x * x)?;
        let (b, db) = dilog(-x)?;
        return Ok((a / 2.0 - b, da / 2.0 + db + 2.0 * EPS * (a.abs() + b.abs())));
    }
    // x < −1: Li₂(x) = −ζ(2) − ln²(−x)/2 − Li₂(1/x)
    let (r, dr) = dilog(1.0 / x)?;
    let l = (-x).ln();
    let v = -zeta2 - l * l / 2.0 - r;
    Ok((v, dr + 4.0 * EPS * (zeta2 + l * l)))
}

/// `Φ(z, 1, v) = Σ_{n≥0} z^n/(v+n)` for `|z| < 1`, `v > 0`.
pub(crate) fn lerch_phi(z: f64, v: f64) -> Result<Approx, SpecialFnError> {
    if !(z.abs() < 1.0) {
        return Err(SpecialFnError::RangeExceeded { function: "lerch_phi", arg: z });
    }
    if !(v > 0.0) {
        return Err(SpecialFnError::RangeExceeded { function: "lerch_phi", arg: v });
    }
    let mut p = 1.0;
    let mut sum = 0.0;
    let mut abs = 0.0;
    let mut n = 0u64;
    loop {
        let t = p / (v + n as f64);
        sum += t;
        abs += t.abs();
        n += 1;
        p *= z;
        // remaining terms are bounded by |z|^n / ((v+n)(1−|z|))
        let tail = p.abs() / ((v + n as f64) * (1.0 - z.abs()));
        if tail < 1e-17 * abs {
            return Ok((sum, tail + 2.0 * EPS * abs + (n as f64).sqrt() * EPS * abs));
        }
        if n > 50_000_000 {
            return Err(SpecialFnError::NotConverged { function: "lerch_phi", detail: format!("z = {z}") });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_known_values() {
        assert_eq!(erfc(0.0).0, 1.0);
        assert!((erfc(1.0).0 - 0.157_299_207_050_285_13).abs() < 3e-17);
        assert!((erfc(-1.0).0 - 1.842_700_792_949_715).abs() < 1e-15);
        assert!((erfc(3.0).0 / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn e1_known_values() {
        assert!((e1(1.0, false).unwrap().0 - 0.219_383_934_395_520_27).abs() < 3e-17);
        let (v, b) = e1(2.5, false).unwrap();
        assert!((v - 0.024_914_917_870_269_736).abs() <= b && b < 1e-15);
        assert!((e1(0.1, false).unwrap().0 - 1.822_923_958_419_390_7).abs() < 1e-15);
        let (s, _) = e1(2.0, true).unwrap();
        assert!((s - 0.048_900_510_708_061_12 * 2f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5).unwrap().0 - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma(5.0).unwrap().0, 24.0);
        assert!((gamma(-0.5).unwrap().0 + 2.0 * PI.sqrt()).abs() < 1e-14);
        assert!(gamma(-2.0).is_err());
    }

    #[test]
    fn dilog_values() {
        assert!((dilog(1.0).unwrap().0 - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0).unwrap().0 + PI * PI / 12.0).abs() < 1e-15);
        let h = dilog(0.5).unwrap().0;
        assert!((h - (PI * PI / 12.0 - 2f64.ln().powi(2) / 2.0)).abs() < 1e-15);
        assert!(dilog(1.5).is_err());
    }

    #[test]
    fn lerch_half() {
        let (v, _) = lerch_phi(0.5, 1.0).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(lerch_phi(1.0, 1.0).is_err());
    }
}
