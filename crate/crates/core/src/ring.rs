//! Coefficient rings for the series engine.
//!
//! The engine works with series in a grading variable `t` whose coefficients
//! live in one of these rings. Every ring knows how to multiply an element by
//! a power of `q`, which is all a shift `P(x) → P(qx)` needs.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("inexact division")]
    Inexact,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation `{0}` unsupported in this ring")]
    Unsupported(&'static str),
}

pub trait Ring: Clone {
    type E: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::E;
    fn from_int(&self, v: i64) -> Self::E;
    /// The area variable `q`.
    fn q(&self) -> Self::E;
    /// The width marker `a` of a graded ring.
    fn width_marker(&self) -> Result<Self::E, RingError> {
        Err(RingError::Unsupported("width marker"))
    }
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// Exact quotient `a/b`.
    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, RingError>;
    fn is_one(&self, a: &Self::E) -> bool {
        *a == self.from_int(1)
    }
    /// Multiplies by `q^e` and maps each `a^w` to `q^{s·w} a^w`.
    fn scale(&self, a: &Self::E, e: u64, s: i64) -> Result<Self::E, RingError>;
}

/// Integer polynomials in `q`, optionally truncated above `max_deg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    pub max_deg: Option<usize>,
}

impl PolyRing {
    fn cap(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        if let Some(d) = self.max_deg {
            v.truncate(d + 1);
        }
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    }
}

impl Ring for PolyRing {
    type E = Vec<BigInt>;

    fn zero(&self) -> Self::E {
        Vec::new()
    }

    fn from_int(&self, v: i64) -> Self::E {
        self.cap(vec![BigInt::from(v)])
    }

    fn q(&self) -> Self::E {
        self.cap(vec![BigInt::zero(), BigInt::one()])
    }

    fn is_zero(&self, a: &Self::E) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E {
        let n = a.len().max(b.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => v.push(x + y),
                (Some(x), None) => v.push(x.clone()),
                (None, Some(y)) => v.push(y.clone()),
                (None, None) => unreachable!(),
            }
        }
        self.cap(v)
    }

    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }

    fn neg(&self, a: &Self::E) -> Self::E {
        a.iter().map(|c| -c).collect()
    }

    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut len = a.len() + b.len() - 1;
        if let Some(d) = self.max_deg {
            len = len.min(d + 1);
        }
        let mut v = vec![BigInt::zero(); len];
        for (i, x) in a.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                if !y.is_zero() {
                    v[i + j] += x * y;
                }
            }
        }
        self.cap(v)
    }

    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, RingError> {
        let d = b.iter().position(|c| !c.is_zero()).ok_or(RingError::DivisionByZero)?;
        if self.is_zero(a) {
            return Ok(Vec::new());
        }
        // a truncated product has lost its top coefficients, so only constants divide exactly
        if self.max_deg.is_some() && b.len() > 1 {
            return Err(RingError::Unsupported("non-constant division in a truncated ring"));
        }
        let lead = &b[d];
        let bdeg = b.len() - 1;
        let mut rem: Vec<BigInt> = a.clone();
        if rem.len() < bdeg + 1 {
            return Err(RingError::Inexact);
        }
        let qlen = rem.len() - bdeg;
        let mut quo = vec![BigInt::zero(); qlen];
        // divide from the low end; an exact quotient leaves no remainder
        for i in 0..qlen {
            let c = &rem[i + d];
            if c.is_zero() {
                continue;
            }
            let (qi, r) = c.div_rem(lead);
            if !r.is_zero() {
                return Err(RingError::Inexact);
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    rem[i + j] -= &qi * bj;
                }
            }
            quo[i] = qi;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(RingError::Inexact);
        }
        Ok(self.cap(quo))
    }

    fn scale(&self, a: &Self::E, e: u64, s: i64) -> Result<Self::E, RingError> {
        if s != 0 {
            return Err(RingError::Unsupported("width shift"));
        }
        if a.is_empty() {
            return Ok(Vec::new());
        }
        let e = e as usize;
        if let Some(d) = self.max_deg {
            if e > d {
                return Ok(Vec::new());
            }
        }
        let mut v = vec![BigInt::zero(); e];
        v.extend(a.iter().cloned());
        Ok(self.cap(v))
    }
}

/// Jets `Z[u]/(u^{k+1})` with `q = 1 + u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetRing {
    pub k: usize,
}

impl JetRing {
    fn norm(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        v.resize(self.k + 1, BigInt::zero());
        v
    }

    /// `(1+u)^e` truncated.
    fn q_pow(&self, e: u64) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.k + 1];
        let mut c = BigInt::one();
        for (i, slot) in v.iter_mut().enumerate() {
            if i as u64 > e {
                break;
            }
            *slot = c.clone();
            c = c * BigInt::from(e - i as u64) / BigInt::from(i as u64 + 1);
        }
        v
    }
}

impl Ring for JetRing {
    type E = Vec<BigInt>;

    fn zero(&self) -> Self::E {
        vec![BigInt::zero(); self.k + 1]
    }

    fn from_int(&self, v: i64) -> Self::E {
        self.norm(vec![BigInt::from(v)])
    }

    fn q(&self) -> Self::E {
        self.norm(vec![BigInt::one(), BigInt::one()])
    }

    fn is_zero(&self, a: &Self::E) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn neg(&self, a: &Self::E) -> Self::E {
        a.iter().map(|c| -c).collect()
    }

    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E {
        let mut v = vec![BigInt::zero(); self.k + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(self.k + 1 - i) {
                if !y.is_zero() {
                    v[i + j] += x * y;
                }
            }
        }
        v
    }

    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, RingError> {
        let b0 = &b[0];
        if b0.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let mut out: Vec<BigInt> = Vec::with_capacity(self.k + 1);
        for n in 0..=self.k {
            let mut acc = a[n].clone();
            for i in 1..=n {
                if !b[i].is_zero() {
                    acc -= &b[i] * &out[n - i];
                }
            }
            let (qn, r) = acc.div_rem(b0);
            if !r.is_zero() {
                return Err(RingError::Inexact);
            }
            out.push(qn);
        }
        Ok(out)
    }

    fn scale(&self, a: &Self::E, e: u64, s: i64) -> Result<Self::E, RingError> {
        if s != 0 {
            return Err(RingError::Unsupported("width shift"));
        }
        if e == 0 {
            return Ok(a.clone());
        }
        Ok(self.mul(a, &self.q_pow(e)))
    }
}

/// Real numbers with `q` fixed to a value.
#[derive(Clone, Debug, PartialEq)]
pub struct NumRing {
    pub q: f64,
}

impl Ring for NumRing {
    type E = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn from_int(&self, v: i64) -> f64 {
        v as f64
    }

    fn q(&self) -> f64 {
        self.q
    }

    fn is_zero(&self, a: &f64) -> bool {
        *a == 0.0
    }

    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }

    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }

    fn neg(&self, a: &f64) -> f64 {
        -a
    }

    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }

    fn div(&self, a: &f64, b: &f64) -> Result<f64, RingError> {
        if *b == 0.0 {
            Err(RingError::DivisionByZero)
        } else {
            Ok(a / b)
        }
    }

    fn scale(&self, a: &f64, e: u64, s: i64) -> Result<f64, RingError> {
        if s != 0 {
            return Err(RingError::Unsupported("width shift"));
        }
        Ok(a * self.q.powf(e as f64))
    }
}

/// Polynomials in the width marker `a` over an inner ring, truncated at `max_w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graded<R: Ring> {
    pub inner: R,
    pub max_w: usize,
}

impl<R: Ring> Graded<R> {
    fn trim(&self, mut v: Vec<R::E>) -> Vec<R::E> {
        v.truncate(self.max_w + 1);
        while v.last().is_some_and(|c| self.inner.is_zero(c)) {
            v.pop();
        }
        v
    }

    /// Sets the width marker to 1.
    pub fn specialize(&self, a: &[R::E]) -> R::E {
        a.iter().fold(self.inner.zero(), |acc, c| self.inner.add(&acc, c))
    }
}

impl<R: Ring> Ring for Graded<R> {
    type E = Vec<R::E>;

    fn zero(&self) -> Self::E {
        Vec::new()
    }

    fn from_int(&self, v: i64) -> Self::E {
        self.trim(vec![self.inner.from_int(v)])
    }

    fn q(&self) -> Self::E {
        self.trim(vec![self.inner.q()])
    }

    fn width_marker(&self) -> Result<Self::E, RingError> {
        Ok(self.trim(vec![self.inner.zero(), self.inner.from_int(1)]))
    }

    fn is_zero(&self, a: &Self::E) -> bool {
        a.iter().all(|c| self.inner.is_zero(c))
    }

    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E {
        let n = a.len().max(b.len());
        let z = self.inner.zero();
        let v = (0..n).map(|i| self.inner.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
        self.trim(v)
    }

    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        let n = a.len().max(b.len());
        let z = self.inner.zero();
        let v = (0..n).map(|i| self.inner.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
        self.trim(v)
    }

    fn neg(&self, a: &Self::E) -> Self::E {
        a.iter().map(|c| self.inner.neg(c)).collect()
    }

    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let len = (a.len() + b.len() - 1).min(self.max_w + 1);
        let mut v = vec![self.inner.zero(); len];
        for (i, x) in a.iter().enumerate().take(len) {
            if self.inner.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                if !self.inner.is_zero(y) {
                    v[i + j] = self.inner.add(&v[i + j], &self.inner.mul(x, y));
                }
            }
        }
        self.trim(v)
    }

    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, RingError> {
        if self.is_zero(b) {
            return Err(RingError::DivisionByZero);
        }
        if b.len() > 1 {
            return Err(RingError::Unsupported("division by a width-dependent element"));
        }
        let v = a.iter().map(|c| self.inner.div(c, &b[0])).collect::<Result<Vec<_>, _>>()?;
        Ok(self.trim(v))
    }

    fn scale(&self, a: &Self::E, e: u64, s: i64) -> Result<Self::E, RingError> {
        let mut v = Vec::with_capacity(a.len());
        for (w, c) in a.iter().enumerate() {
            let total = e as i64 + s * w as i64;
            if total < 0 {
                return Err(RingError::Unsupported("negative power of q"));
            }
            v.push(self.inner.scale(c, total as u64, 0)?);
        }
        Ok(self.trim(v))
    }
}

/// `true` when every coefficient is nonnegative.
pub fn nonnegative(p: &[BigInt]) -> bool {
    p.iter().all(|c| !c.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&v| BigInt::from(v)).collect()
    }

    #[test]
    fn poly_exact_division() {
        let r = PolyRing { max_deg: None };
        let a = r.mul(&p(&[1, 2, 1]), &p(&[0, 1]));
        assert_eq!(r.div(&a, &p(&[0, 1])).unwrap(), p(&[1, 2, 1]));
        assert_eq!(r.div(&p(&[1, 1]), &p(&[0, 1])), Err(RingError::Inexact));
        assert_eq!(r.div(&a, &p(&[1, 1])).unwrap(), p(&[0, 1, 1]));
    }

    #[test]
    fn jet_shift_is_binomial() {
        let r = JetRing { k: 3 };
        let one = r.from_int(1);
        assert_eq!(r.scale(&one, 5, 0).unwrap(), p(&[1, 5, 10, 10]));
        let inv = r.div(&one, &r.q()).unwrap();
        assert_eq!(inv, p(&[1, -1, 1, -1]));
    }

    #[test]
    fn graded_width_shift() {
        let g = Graded { inner: PolyRing { max_deg: None }, max_w: 4 };
        let a = g.width_marker().unwrap();
        let a2 = g.mul(&a, &a);
        let shifted = g.scale(&a2, 1, 2).unwrap();
        assert_eq!(shifted[2], p(&[0, 0, 0, 0, 0, 1]));
        assert_eq!(g.specialize(&g.add(&a, &g.from_int(3))), p(&[4]));
    }
}
