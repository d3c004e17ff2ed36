//! Exact series containers: polynomials in `q`, rational power series and
//! Laurent polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("division by a series with vanishing constant term")]
    NonUnitDivisor,
    #[error("composition requires an inner series without constant term")]
    InnerConstant,
    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
}

/// Polynomial in `q` with integer coefficients, lowest degree first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QPoly(pub Vec<BigInt>);

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly(Vec::new())
    }

    pub fn from_coeffs<I: IntoIterator<Item = i64>>(c: I) -> QPoly {
        let mut p = QPoly(c.into_iter().map(BigInt::from).collect());
        p.trim();
        p
    }

    pub fn monomial(c: i64, deg: usize) -> QPoly {
        let mut v = vec![BigInt::zero(); deg + 1];
        v[deg] = BigInt::from(c);
        let mut p = QPoly(v);
        p.trim();
        p
    }

    pub fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn coeff(&self, d: usize) -> BigInt {
        self.0.get(d).cloned().unwrap_or_default()
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> BigInt {
        self.0.iter().sum()
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * q + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = c.abs();
            let coef = if mag.is_one() && d > 0 { String::new() } else { mag.to_string() };
            let var = match d {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{d}"),
            };
            write!(f, "{sign}{coef}{var}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Truncated series in `x` with polynomial coefficients `p_m(q)`, `m = 0..=order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPolynomialSeries {
    pub order: usize,
    pub coeffs: Vec<QPoly>,
    /// Degree cap applied during computation, `None` when exact.
    pub q_truncation: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct QPolyRecord {
    m: usize,
    coeffs: Vec<String>,
}

impl QPolynomialSeries {
    pub fn coeff(&self, m: usize) -> QPoly {
        self.coeffs.get(m).cloned().unwrap_or_default()
    }

    /// JSON array of `{m, coeffs}` with decimal integer strings.
    pub fn to_json(&self) -> String {
        let recs: Vec<QPolyRecord> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, p)| QPolyRecord { m, coeffs: p.0.iter().map(|c| c.to_string()).collect() })
            .collect();
        serde_json::to_string_pretty(&recs).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<QPolynomialSeries, String> {
        let recs: Vec<QPolyRecord> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut coeffs = Vec::with_capacity(recs.len());
        for (i, r) in recs.into_iter().enumerate() {
            if r.m != i {
                return Err(format!("record {i} has m = {}", r.m));
            }
            let mut c = Vec::with_capacity(r.coeffs.len());
            for s in r.coeffs {
                c.push(s.parse::<BigInt>().map_err(|e| e.to_string())?);
            }
            coeffs.push(QPoly(c));
        }
        let order = coeffs.len().saturating_sub(1);
        Ok(QPolynomialSeries { order, coeffs, q_truncation: None })
    }
}

/// Truncated power series with exact rational coefficients, known up to `x^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    pub order: usize,
    coeffs: Vec<BigRational>,
}

pub(crate) fn ri(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl PowerSeries {
    pub fn new(order: usize, mut coeffs: Vec<BigRational>) -> PowerSeries {
        coeffs.resize(order + 1, BigRational::zero());
        PowerSeries { order, coeffs }
    }

    pub fn zero(order: usize) -> PowerSeries {
        PowerSeries::new(order, Vec::new())
    }

    pub fn one(order: usize) -> PowerSeries {
        PowerSeries::new(order, vec![BigRational::one()])
    }

    /// The series of `x`.
    pub fn x(order: usize) -> PowerSeries {
        PowerSeries::new(order, vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_ints(order: usize, c: &[i64]) -> PowerSeries {
        PowerSeries::new(order, c.iter().map(|&v| ri(v)).collect())
    }

    pub fn coeff(&self, m: usize) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> PowerSeries {
        let order = order.min(self.order);
        PowerSeries::new(order, self.coeffs[..=order].to_vec())
    }

    fn common(&self, other: &PowerSeries) -> usize {
        self.order.min(other.order)
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let o = self.common(other);
        PowerSeries::new(o, (0..=o).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        let o = self.common(other);
        PowerSeries::new(o, (0..=o).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> PowerSeries {
        PowerSeries::new(self.order, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let o = self.common(other);
        let mut out = vec![BigRational::zero(); o + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(o + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(o + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        PowerSeries::new(o, out)
    }

    pub fn pow(&self, e: u32) -> PowerSeries {
        let mut acc = PowerSeries::one(self.order);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Quotient by a series whose constant term is nonzero.
    pub fn div(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        let b0 = other.coeff(0);
        if b0.is_zero() {
            return Err(SeriesError::NonUnitDivisor);
        }
        let o = self.common(other);
        let mut out: Vec<BigRational> = Vec::with_capacity(o + 1);
        for n in 0..=o {
            let mut acc = self.coeff(n);
            for i in 1..=n {
                let b = other.coeff(i);
                if !b.is_zero() {
                    acc -= &b * &out[n - i];
                }
            }
            out.push(acc / &b0);
        }
        Ok(PowerSeries::new(o, out))
    }

    pub fn derivative(&self) -> PowerSeries {
        if self.order == 0 {
            return PowerSeries::zero(0);
        }
        let o = self.order - 1;
        PowerSeries::new(o, (0..=o).map(|i| self.coeff(i + 1) * ri(i as i64 + 1)).collect())
    }

    /// `self(inner(x))` for an inner series with zero constant term.
    pub fn compose(&self, inner: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        if !inner.coeff(0).is_zero() {
            return Err(SeriesError::InnerConstant);
        }
        let o = self.common(inner);
        let mut acc = PowerSeries::zero(o);
        for c in self.coeffs[..=o].iter().rev() {
            acc = acc.mul(inner).add(&PowerSeries::new(o, vec![c.clone()]));
        }
        Ok(acc)
    }

    /// `(1 − c·x)^{−e}` to the given order.
    pub fn inverse_power(order: usize, c: &BigRational, e: u32) -> PowerSeries {
        let base = PowerSeries::new(order, vec![BigRational::one(), -c.clone()]);
        let inv = PowerSeries::one(order).div(&base).expect("unit constant term");
        inv.pow(e)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// Laurent polynomial with rational coefficients in one variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigRational>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly::default()
    }

    pub fn monomial(c: BigRational, e: i64) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        p.add_term(e, c);
        p
    }

    pub fn constant(c: BigRational) -> LaurentPoly {
        LaurentPoly::monomial(c, 0)
    }

    fn add_term(&mut self, e: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn coeff(&self, e: i64) -> BigRational {
        self.terms.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn add(&self, o: &LaurentPoly) -> LaurentPoly {
        let mut r = self.clone();
        for (&e, c) in &o.terms {
            r.add_term(e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &LaurentPoly) -> LaurentPoly {
        self.add(&o.scale(&ri(-1)))
    }

    pub fn scale(&self, c: &BigRational) -> LaurentPoly {
        let mut r = LaurentPoly::zero();
        for (&e, a) in &self.terms {
            r.add_term(e, a * c);
        }
        r
    }

    pub fn shift(&self, k: i64) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }

    pub fn mul(&self, o: &LaurentPoly) -> LaurentPoly {
        let mut r = LaurentPoly::zero();
        for (&e1, a) in &self.terms {
            for (&e2, b) in &o.terms {
                r.add_term(e1 + e2, a * b);
            }
        }
        r
    }

    pub fn derivative(&self) -> LaurentPoly {
        let mut r = LaurentPoly::zero();
        for (&e, a) in &self.terms {
            r.add_term(e - 1, a * ri(e));
        }
        r
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.terms.iter().map(|(&e, c)| c.to_f64().unwrap_or(f64::NAN) * s.powi(e as i32)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpoly_display() {
        assert_eq!(QPoly::from_coeffs([0, 0, 0, 4, 1]).to_string(), "q^4+4q^3");
        assert_eq!(QPoly::zero().to_string(), "0");
    }

    #[test]
    fn power_series_division() {
        let o = 8;
        let one_minus_x = PowerSeries::from_ints(o, &[1, -1]);
        let inv = PowerSeries::one(o).div(&one_minus_x).unwrap();
        assert!((0..=o).all(|i| inv.coeff(i) == ri(1)));
        assert_eq!(PowerSeries::one(o).div(&PowerSeries::x(o)), Err(SeriesError::NonUnitDivisor));
        let sq = PowerSeries::inverse_power(o, &ri(1), 2);
        assert_eq!(sq.coeff(5), ri(6));
    }

    #[test]
    fn compose_and_derivative() {
        let o = 6;
        let geo = PowerSeries::inverse_power(o, &ri(1), 1);
        let two_x = PowerSeries::from_ints(o, &[0, 2]);
        let g = geo.compose(&two_x).unwrap();
        assert_eq!(g.coeff(4), ri(16));
        assert_eq!(geo.derivative().coeff(3), ri(4));
    }

    #[test]
    fn laurent_ops() {
        let s = LaurentPoly::monomial(ri(1), 1);
        let inv = LaurentPoly::monomial(ri(1), -1);
        assert_eq!(s.mul(&inv), LaurentPoly::constant(ri(1)));
        assert_eq!(inv.derivative(), LaurentPoly::monomial(ri(-1), -2));
        assert_eq!(s.sub(&s), LaurentPoly::zero());
    }
}
