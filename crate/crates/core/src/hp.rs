//! Binary fixed-point reals `mant / 2^bits` on top of `BigInt`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Environment variable consulted by [`Precision::from_env`].
pub const PRECISION_ENV: &str = "POLYLAB_DIGITS";

/// Working precision in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(pub u32);

impl Default for Precision {
    fn default() -> Self {
        Precision(50)
    }
}

impl Precision {
    /// Fractional bits that resolve `10^-digits`, plus guard bits.
    pub fn bits(self) -> u32 {
        (self.0 as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
    }

    pub fn doubled(self) -> Precision {
        Precision(self.0 * 2)
    }

    /// `POLYLAB_DIGITS` when set to a positive integer, else the default.
    pub fn from_env() -> Precision {
        std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&d| d > 0)
            .map(Precision)
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpReal {
    mant: BigInt,
    bits: u32,
}

fn shr_round(v: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return v.clone();
    }
    let half = BigInt::one() << (s - 1);
    if v.is_negative() {
        -((-v + half) >> s)
    } else {
        (v + half) >> s
    }
}

impl HpReal {
    pub fn zero(bits: u32) -> HpReal {
        HpReal { mant: BigInt::zero(), bits }
    }

    pub fn from_int(v: i64, bits: u32) -> HpReal {
        HpReal { mant: BigInt::from(v) << bits, bits }
    }

    pub fn from_bigint(v: BigInt, bits: u32) -> HpReal {
        HpReal { mant: v << bits, bits }
    }

    /// Exact whenever `v` has no bits below `2^-bits`.
    pub fn from_f64(v: f64, bits: u32) -> HpReal {
        assert!(v.is_finite(), "non-finite input to HpReal::from_f64");
        if v == 0.0 {
            return HpReal::zero(bits);
        }
        let raw = v.abs().to_bits();
        let exp = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let mut mant = BigInt::from(m);
        let shift = e + bits as i64;
        mant = if shift >= 0 { mant << (shift as u32) } else { shr_round(&mant, (-shift) as u32) };
        if v < 0.0 {
            mant = -mant;
        }
        HpReal { mant, bits }
    }

    pub fn from_ratio(r: &BigRational, bits: u32) -> HpReal {
        let num = r.numer() << bits;
        let den = r.denom();
        let (q, rem) = num.div_rem(den);
        let twice = rem.abs() * 2u32;
        let q = if twice >= den.abs() {
            if num.is_negative() != den.is_negative() {
                q - 1
            } else {
                q + 1
            }
        } else {
            q
        };
        HpReal { mant: q, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn with_bits(&self, bits: u32) -> HpReal {
        let mant = match bits.cmp(&self.bits) {
            Ordering::Equal => self.mant.clone(),
            Ordering::Greater => &self.mant << (bits - self.bits),
            Ordering::Less => shr_round(&self.mant, self.bits - bits),
        };
        HpReal { mant, bits }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> HpReal {
        HpReal { mant: self.mant.abs(), bits: self.bits }
    }

    pub fn neg(&self) -> HpReal {
        HpReal { mant: -&self.mant, bits: self.bits }
    }

    fn same(&self, o: &HpReal) {
        assert_eq!(self.bits, o.bits, "HpReal precision mismatch");
    }

    pub fn add(&self, o: &HpReal) -> HpReal {
        self.same(o);
        HpReal { mant: &self.mant + &o.mant, bits: self.bits }
    }

    pub fn sub(&self, o: &HpReal) -> HpReal {
        self.same(o);
        HpReal { mant: &self.mant - &o.mant, bits: self.bits }
    }

    pub fn mul(&self, o: &HpReal) -> HpReal {
        self.same(o);
        HpReal { mant: shr_round(&(&self.mant * &o.mant), self.bits), bits: self.bits }
    }

    pub fn div(&self, o: &HpReal) -> HpReal {
        self.same(o);
        assert!(!o.mant.is_zero(), "HpReal division by zero");
        let num = &self.mant << self.bits;
        HpReal { mant: round_div(&num, &o.mant), bits: self.bits }
    }

    pub fn mul_int(&self, v: i64) -> HpReal {
        HpReal { mant: &self.mant * v, bits: self.bits }
    }

    pub fn div_int(&self, v: i64) -> HpReal {
        HpReal { mant: round_div(&self.mant, &BigInt::from(v)), bits: self.bits }
    }

    pub fn sqrt(&self) -> HpReal {
        assert!(!self.mant.is_negative(), "square root of a negative HpReal");
        HpReal { mant: (&self.mant << self.bits).sqrt(), bits: self.bits }
    }

    /// Real `n`-th root of a nonnegative value.
    pub fn nth_root(&self, n: u32) -> HpReal {
        assert!(!self.mant.is_negative(), "root of a negative HpReal");
        HpReal { mant: (&self.mant << (self.bits * (n - 1))).nth_root(n), bits: self.bits }
    }

    pub fn recip(&self) -> HpReal {
        HpReal::from_int(1, self.bits).div(self)
    }

    pub fn powi(&self, e: u32) -> HpReal {
        let mut acc = HpReal::from_int(1, self.bits);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let nb = self.mant.bits();
        let shift = nb.saturating_sub(60);
        let top = (&self.mant >> shift).to_f64().unwrap_or(0.0);
        let e = shift as i64 - self.bits as i64;
        top * 2f64.powi(e.clamp(-1100, 1100) as i32)
    }

    /// Decimal rendering rounded to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = round_div(&(&self.mant * scale), &(BigInt::one() << self.bits));
        let neg = scaled.sign() == Sign::Minus;
        let s = scaled.abs().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// π by Machin's formula.
    pub fn pi(bits: u32) -> HpReal {
        let wp = bits + 32;
        let pi = arctan_inv(5, wp).mul_int(16).sub(&arctan_inv(239, wp).mul_int(4));
        pi.with_bits(bits)
    }

    /// Parses a plain decimal such as `-12.5e-3` (exponent optional).
    pub fn parse_decimal(text: &str, bits: u32) -> Option<HpReal> {
        let t = text.trim();
        let (mant, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
            None => (t, 0),
        };
        let neg = mant.starts_with('-');
        let mant = mant.trim_start_matches(['-', '+']);
        let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
        if ip.is_empty() && fp.is_empty() {
            return None;
        }
        let digits: String = format!("{ip}{fp}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = digits.parse().ok()?;
        let e10 = exp - fp.len() as i32;
        let ten = BigInt::from(10u32);
        let r = if e10 >= 0 {
            BigRational::from_integer(n * ten.pow(e10 as u32))
        } else {
            BigRational::new(n, ten.pow((-e10) as u32))
        };
        let v = HpReal::from_ratio(&r, bits);
        Some(if neg { v.neg() } else { v })
    }

    /// `e^x` by argument halving and Taylor series.
    pub fn exp(&self) -> HpReal {
        let mag = self.to_f64().abs();
        let r = if mag > 1e-3 { (mag.log2() + 10.0).max(0.0).ceil() as u32 } else { 0 };
        let wp = self.bits + 2 * r + 32 + (mag / std::f64::consts::LN_2).ceil() as u32;
        let y = HpReal { mant: &self.with_bits(wp).mant >> r, bits: wp };
        let mut term = HpReal::from_int(1, wp);
        let mut sum = term.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            term = term.mul(&y).div_int(k);
            sum = sum.add(&term);
            k += 1;
        }
        for _ in 0..r {
            sum = sum.mul(&sum);
        }
        sum.with_bits(self.bits)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> HpReal {
        assert!(self.mant.is_positive(), "logarithm of a nonpositive HpReal");
        let wp = self.bits + 32;
        let x = self.with_bits(wp);
        // x = m·2^e with m ∈ [1/2, 1)
        let e = x.mant.bits() as i64 - wp as i64;
        let m = if e >= 0 {
            HpReal { mant: &x.mant >> e as u32, bits: wp }
        } else {
            HpReal { mant: &x.mant << (-e) as u32, bits: wp }
        };
        let one = HpReal::from_int(1, wp);
        let t = m.sub(&one).div(&m.add(&one));
        let ln2 = atanh_series(&HpReal::from_int(1, wp).div_int(3)).mul_int(2);
        let v = atanh_series(&t).mul_int(2).add(&ln2.mul_int(e));
        v.with_bits(self.bits)
    }

    pub fn cmp_value(&self, o: &HpReal) -> Ordering {
        self.same(o);
        self.mant.cmp(&o.mant)
    }
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if (r.abs() * 2u32) >= b.abs() {
        if a.is_negative() != b.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// `atanh(t)` for `|t| ≤ 1/3`.
fn atanh_series(t: &HpReal) -> HpReal {
    let t2 = t.mul(t);
    let mut p = t.clone();
    let mut sum = t.clone();
    let mut k = 1i64;
    while !p.is_zero() {
        p = p.mul(&t2);
        sum = sum.add(&p.div_int(2 * k + 1));
        k += 1;
    }
    sum
}

/// Euler's constant γ (60 digits).
pub fn euler_gamma(bits: u32) -> HpReal {
    assert!(bits <= 190, "euler_gamma is tabulated to 60 digits");
    HpReal::parse_decimal("0.577215664901532860606512090082402431042159335939923598805767", bits).expect("constant")
}

/// `atan(1/n)` by its Taylor series.
fn arctan_inv(n: i64, bits: u32) -> HpReal {
    let mut power = HpReal::from_int(1, bits).div_int(n);
    let n2 = n * n;
    let mut sum = power.clone();
    let mut k = 1i64;
    loop {
        power = power.div_int(n2);
        if power.is_zero() {
            break;
        }
        let term = power.div_int(2 * k + 1);
        sum = if k % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        k += 1;
    }
    sum
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.bits as f64) / std::f64::consts::LOG2_10) as usize);
        write!(f, "{}", self.to_decimal(digits))
    }
}

/// Arithmetic-geometric mean.
pub fn agm(a: &HpReal, b: &HpReal) -> HpReal {
    let (mut a, mut b) = (a.clone(), b.clone());
    loop {
        let diff = a.sub(&b).abs();
        if diff.mantissa() <= &BigInt::from(4) {
            return a;
        }
        let an = a.add(&b).div_int(2);
        let bn = a.mul(&b).sqrt();
        a = an;
        b = bn;
    }
}

/// `Γ(1/3) = 2^{7/9} 3^{-1/12} π^{1/3} K(k)^{1/3}` with `k = sin(π/12)`
/// and `K(k) = π / (2·agm(1, √(1−k²)))`.
pub fn gamma_one_third(bits: u32) -> HpReal {
    let wp = bits + 32;
    let one = HpReal::from_int(1, wp);
    let pi = HpReal::pi(wp);
    // sin(π/12) = (√6 − √2)/4, so 1 − k² = (2 + √3)/4
    let kp = HpReal::from_int(2, wp).add(&HpReal::from_int(3, wp).sqrt()).div_int(4).sqrt();
    let big_k = pi.div(&agm(&one, &kp).mul_int(2));
    let two79 = HpReal::from_int(128, wp).nth_root(9);
    let three112 = HpReal::from_int(3, wp).nth_root(12);
    two79.div(&three112).mul(&pi.nth_root(3)).mul(&big_k.nth_root(3)).with_bits(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let pi = HpReal::pi(200);
        assert_eq!(pi.to_decimal(40), "3.1415926535897932384626433832795028841972");
    }

    #[test]
    fn gamma_third_digits() {
        let g = gamma_one_third(200);
        assert_eq!(g.to_decimal(45), "2.678938534707747633655692940974677644128689378");
    }

    #[test]
    fn f64_round_trip() {
        for v in [1.5, -0.375, 3.0e-7, 12345.678] {
            assert_eq!(HpReal::from_f64(v, 80).to_f64(), v);
        }
    }

    #[test]
    fn roots() {
        let two = HpReal::from_int(2, 120);
        let r = two.sqrt();
        assert!((r.mul(&r).sub(&two)).abs().to_f64() < 1e-34);
        let c = HpReal::from_int(27, 120).nth_root(3);
        assert!((c.to_f64() - 3.0).abs() < 1e-30);
    }

    #[test]
    fn exp_and_ln() {
        let x = HpReal::parse_decimal("2.5", 150).unwrap();
        let e = x.exp();
        assert_eq!(e.to_decimal(30), "12.182493960703473438070175951168");
        assert_eq!(e.ln().to_decimal(30), "2.500000000000000000000000000000");
        let small = HpReal::parse_decimal("1e-5", 150).unwrap();
        assert_eq!(small.ln().to_decimal(25), "-11.5129254649702284200899573");
        assert_eq!(HpReal::from_int(-3, 150).exp().to_decimal(30), "0.049787068367863942979342415650");
    }

    #[test]
    fn negative_decimal() {
        assert_eq!(HpReal::from_f64(-0.25, 40).to_decimal(3), "-0.250");
        assert_eq!(HpReal::from_f64(0.0009765625, 40).to_decimal(4), "0.0010");
    }
}
