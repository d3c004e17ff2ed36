//! Growth-constant estimation and Richardson acceleration.
//!
//! A sequence `a_m ∼ A x_c^{−m} m^{γ−1}(1 + c_1/m + …)` has ratios
//! `a_m/a_{m−1} = x_c^{−1}(1 + (γ−1)/m + O(m^{−2}))`. Each of `1/x_c`, `γ` and
//! `A` is read off from a per-m trail by fitting `L + Σ_j b_j m^{−j}` through the
//! last few trail points.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtrapolateError {
    #[error("need at least {need} terms, got {have}")]
    TooFewTerms { have: usize, need: usize },
    #[error("sequence has a zero or a sign change at index {0}")]
    IrregularSequence(usize),
    #[error("singular fit")]
    SingularFit,
}

/// One-step Richardson elimination of a `c·m^{−p}` error term between
/// consecutive points `(m, a_m)`.
pub fn richardson(seq: &[(f64, f64)], p: f64) -> Result<Vec<(f64, f64)>, ExtrapolateError> {
    if seq.len() < 3 {
        return Err(ExtrapolateError::TooFewTerms { have: seq.len(), need: 3 });
    }
    Ok(seq
        .windows(2)
        .map(|w| {
            let (m1, a1) = w[0];
            let (m2, a2) = w[1];
            let (w1, w2) = (m1.powf(p), m2.powf(p));
            (m2, (w2 * a2 - w1 * a1) / (w2 - w1))
        })
        .collect())
}

/// Value `L` of the interpolant `L + Σ_j b_j m^{−p_j}` through the last
/// `exponents.len() + 1` points.
pub fn richardson_fit(seq: &[(f64, f64)], exponents: &[f64]) -> Result<f64, ExtrapolateError> {
    let mut all = vec![0.0];
    all.extend(exponents.iter().map(|p| -p));
    Ok(power_fit(seq, &all)?[0])
}

/// Coefficients `c_j` of the interpolant `Σ_j c_j m^{p_j}` through the last
/// `powers.len()` points.
pub fn power_fit(seq: &[(f64, f64)], powers: &[f64]) -> Result<Vec<f64>, ExtrapolateError> {
    let n = powers.len();
    if seq.len() < n {
        return Err(ExtrapolateError::TooFewTerms { have: seq.len(), need: n });
    }
    let pts = &seq[seq.len() - n..];
    let mut a: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(m, v)| {
            let mut row: Vec<f64> = powers.iter().map(|&p| m.powf(p)).collect();
            row.push(v);
            row
        })
        .collect();
    solve(&mut a).ok_or(ExtrapolateError::SingularFit)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c] == 0.0 {
            return None;
        }
        a.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthMethod {
    /// Ratio method with Richardson fits in `1/m`.
    RatioRichardson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrailEntry {
    pub m: usize,
    pub x_c: f64,
    pub gamma: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthEstimate {
    pub x_c_hat: f64,
    pub gamma_hat: f64,
    pub a_hat: f64,
    pub trail: Vec<TrailEntry>,
    pub method: GrowthMethod,
}

impl GrowthEstimate {
    /// CSV `m,x_c_hat,gamma_hat,A_hat`.
    pub fn trail_csv(&self) -> String {
        let mut out = String::from("m,x_c_hat,gamma_hat,A_hat\n");
        for t in &self.trail {
            out.push_str(&format!("{},{:.15e},{:.15e},{:.15e}\n", t.m, t.x_c, t.gamma, t.amplitude));
        }
        out
    }
}

const FIT_EXPONENTS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
const MIN_TERMS: usize = 8;

/// Ratio-method estimate of `(x_c, γ, A)` for `a_m ∼ A x_c^{−m} m^{γ−1}`;
/// `seq[m] = a_m`. Leading zeros are skipped.
pub fn estimate_growth(seq: &[BigRational]) -> Result<GrowthEstimate, ExtrapolateError> {
    let first =
        seq.iter().position(|a| !a.is_zero()).ok_or(ExtrapolateError::TooFewTerms { have: 0, need: MIN_TERMS })?;
    let positive = seq[first].is_positive();
    for (i, a) in seq.iter().enumerate().skip(first) {
        if a.is_zero() || a.is_positive() != positive {
            return Err(ExtrapolateError::IrregularSequence(i));
        }
    }
    let n = seq.len() - first;
    if n < MIN_TERMS {
        return Err(ExtrapolateError::TooFewTerms { have: n, need: MIN_TERMS });
    }
    let sign = if positive { 1.0 } else { -1.0 };
    // divide out the first term exactly so that rescaling the input only
    // rescales A
    let scale = seq[first].abs();
    let seq: Vec<BigRational> = seq.iter().map(|a| a / &scale).collect();
    let scale = scale.to_f64().unwrap_or(f64::NAN);
    // ratios a_m/a_{m−1}, exact before rounding
    let ratios: Vec<(f64, f64)> =
        (first + 1..seq.len()).map(|m| (m as f64, (&seq[m] / &seq[m - 1]).to_f64().unwrap_or(f64::NAN))).collect();
    let log_abs: Vec<f64> = seq.iter().map(|a| ln_abs(a)).collect();
    let k = FIT_EXPONENTS.len();
    let mut trail = Vec::new();
    // trail entry at m uses data up to m; needs k+1 ratios for μ and again for γ
    for end in (k + 1)..=ratios.len() {
        let r = &ratios[..end];
        let mu = richardson_fit(r, &FIT_EXPONENTS)?;
        let g: Vec<(f64, f64)> = r.iter().map(|&(m, v)| (m, m * (v / mu - 1.0))).collect();
        let gamma = richardson_fit(&g, &FIT_EXPONENTS[..k - 1])? + 1.0;
        let x_c = 1.0 / mu;
        let amp: Vec<(f64, f64)> = r
            .iter()
            .map(|&(m, _)| {
                let la = log_abs[m as usize] + m * x_c.ln() + (1.0 - gamma) * m.ln();
                (m, sign * la.exp())
            })
            .collect();
        let amplitude = richardson_fit(&amp, &FIT_EXPONENTS[..k - 1])? * scale;
        trail.push(TrailEntry { m: r.last().map(|p| p.0 as usize).unwrap_or(0), x_c, gamma, amplitude });
    }
    let last = trail.last().cloned().ok_or(ExtrapolateError::TooFewTerms { have: n, need: MIN_TERMS })?;
    Ok(GrowthEstimate {
        x_c_hat: last.x_c,
        gamma_hat: last.gamma,
        a_hat: last.amplitude,
        trail,
        method: GrowthMethod::RatioRichardson,
    })
}

/// Same estimator for floating-point input.
pub fn estimate_growth_f64(seq: &[f64]) -> Result<GrowthEstimate, ExtrapolateError> {
    let exact: Option<Vec<BigRational>> = seq.iter().map(|&v| BigRational::from_float(v)).collect();
    estimate_growth(&exact.ok_or(ExtrapolateError::IrregularSequence(0))?)
}

/// `ln|a|` for rationals beyond the `f64` range.
fn ln_abs(a: &BigRational) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (n, d) = (a.numer().abs(), a.denom().clone());
    let bits = |v: &num_bigint::BigInt| v.bits() as i64;
    let shift_n = (bits(&n) - 60).max(0) as usize;
    let shift_d = (bits(&d) - 60).max(0) as usize;
    let nf = (&n >> shift_n).to_f64().unwrap_or(f64::NAN);
    let df = (&d >> shift_d).to_f64().unwrap_or(f64::NAN);
    nf.ln() - df.ln() + (shift_n as f64 - shift_d as f64) * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn one_over_m_is_removed_exactly() {
        let seq: Vec<(f64, f64)> = (1..=8).map(|m| (m as f64, 1.0 + 1.0 / m as f64)).collect();
        for (_, v) in richardson(&seq, 1.0).unwrap() {
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert!(richardson(&seq[..2], 1.0).is_err());
    }

    #[test]
    fn geometric_fixed_point() {
        let seq: Vec<BigRational> = (0..16).map(|m| BigRational::from_integer(BigInt::from(1u64 << m))).collect();
        let e = estimate_growth(&seq).unwrap();
        assert!((e.x_c_hat - 0.5).abs() < 1e-14);
        assert!((e.gamma_hat - 1.0).abs() < 1e-12);
        assert!((e.a_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_periodic_sequences() {
        let seq: Vec<BigRational> =
            (0..20).map(|m| BigRational::from_integer(BigInt::from(if m % 2 == 0 { 1 } else { 0 }))).collect();
        assert!(matches!(estimate_growth(&seq), Err(ExtrapolateError::IrregularSequence(_))));
    }
}
