//! Limit laws of the area: moments, generating functions, densities, and the
//! comparison of finite-size area laws against them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::amplitudes::{airy_phi, meander_omega};
use crate::enumerate::{empirical_area_law, CountTable, EnumerateError};
use crate::extrapolate::{richardson, richardson_fit, ExtrapolateError};
use crate::model::{ModelSpec, PolygonClass};
use crate::series::PowerSeries;
use crate::specialfn::{self, airy_f64, airy_zeros_f64, quad, zero_sum_tail, SpecialFnError};

#[derive(Debug, Error, PartialEq)]
pub enum LimitLawError {
    #[error("row m = {0} has zero mean area")]
    Degenerate(u32),
    #[error("{what}: series tail bound not attainable at {arg} (usable range {range})")]
    TailBound { what: &'static str, arg: f64, range: &'static str },
    #[error("{0} is not available for this law")]
    NotAvailable(&'static str),
    #[error("series known to order {have}, need {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("unknown law `{0}` (expected airy, meander, beta_1_half, dirac:<p/q> or gaussian:<mean>,<sd>)")]
    UnknownLaw(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Extrapolate(#[from] ExtrapolateError),
}

fn ri(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// `coeff · √π^{sqrt_pi} · √2^{sqrt2}` with `sqrt2 ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMoment {
    pub coeff: BigRational,
    pub sqrt_pi: i32,
    pub sqrt2: i32,
}

impl ExactMoment {
    pub fn new(coeff: BigRational, sqrt_pi: i32, sqrt2: i32) -> ExactMoment {
        let half = Integer::div_floor(&sqrt2, &2);
        let coeff = coeff * pow2(half);
        ExactMoment { coeff, sqrt_pi, sqrt2: sqrt2 - 2 * half }
    }

    pub fn rational(coeff: BigRational) -> ExactMoment {
        ExactMoment { coeff, sqrt_pi: 0, sqrt2: 0 }
    }

    pub fn mul(&self, o: &ExactMoment) -> ExactMoment {
        ExactMoment::new(&self.coeff * &o.coeff, self.sqrt_pi + o.sqrt_pi, self.sqrt2 + o.sqrt2)
    }

    pub fn div(&self, o: &ExactMoment) -> ExactMoment {
        ExactMoment::new(&self.coeff / &o.coeff, self.sqrt_pi - o.sqrt_pi, self.sqrt2 - o.sqrt2)
    }

    pub fn powi(&self, e: u32) -> ExactMoment {
        let mut acc = ExactMoment::rational(ri(1));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.ln_abs().exp() * if self.coeff.is_negative() { -1.0 } else { 1.0 }
    }

    /// `ln|value|`, finite beyond the double range.
    pub fn ln_abs(&self) -> f64 {
        ln_abs_ratio(&self.coeff) + self.sqrt_pi as f64 * 0.5 * PI.ln() + self.sqrt2 as f64 * 0.5 * 2f64.ln()
    }
}

impl fmt::Display for ExactMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.coeff.is_one() || (self.sqrt2 == 0 && self.sqrt_pi == 0) {
            parts.push(self.coeff.to_string());
        }
        if self.sqrt2 != 0 {
            parts.push("√2".into());
        }
        match self.sqrt_pi {
            0 => {}
            1 => parts.push("√π".into()),
            e => parts.push(format!("π^({e}/2)")),
        }
        f.write_str(&parts.join("·"))
    }
}

fn pow2(e: i32) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn ln_abs_ratio(r: &BigRational) -> f64 {
    let big = |v: &BigInt| {
        let v = v.abs();
        let shift = (v.bits() as i64 - 60).max(0) as usize;
        (&v >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * 2f64.ln()
    };
    big(r.numer()) - big(r.denom())
}

/// `Γ(num/2)` for `num ≥ −1`.
fn gamma_half(num: i64) -> ExactMoment {
    assert!(num >= -1 && num != 0, "Γ at a pole or unsupported argument");
    if num == -1 {
        return ExactMoment::new(ri(-2), 1, 0);
    }
    if num % 2 == 0 {
        return ExactMoment::rational(BigRational::from_integer(factorial(num as u64 / 2 - 1)));
    }
    let n = (num as u64 - 1) / 2;
    let c = BigRational::new(factorial(2 * n), (BigInt::one() << (2 * n) as usize) * factorial(n));
    ExactMoment::new(c, 1, 0)
}

/// An area limit law.
#[derive(Clone, Debug, PartialEq)]
pub enum LimitLaw {
    /// Density `1/(2√(1−x))` on `[0,1]`.
    BetaHalf,
    Airy,
    /// Area of the Brownian meander.
    Meander,
    Dirac(BigRational),
    Gaussian {
        mean: f64,
        sd: f64,
    },
}

impl LimitLaw {
    pub fn name(&self) -> String {
        match self {
            LimitLaw::BetaHalf => "beta_1_half".into(),
            LimitLaw::Airy => "airy".into(),
            LimitLaw::Meander => "meander".into(),
            LimitLaw::Dirac(p) => format!("dirac:{p}"),
            LimitLaw::Gaussian { mean, sd } => format!("gaussian:{mean},{sd}"),
        }
    }

    pub fn support(&self) -> &'static str {
        match self {
            LimitLaw::BetaHalf => "[0, 1]",
            LimitLaw::Airy | LimitLaw::Meander => "(0, ∞)",
            LimitLaw::Dirac(_) => "single point",
            LimitLaw::Gaussian { .. } => "(−∞, ∞)",
        }
    }

    /// Law matched to a class: rectangles → beta, squares and Ferrers → Dirac,
    /// staircase → Airy, directed convex → meander.
    pub fn for_class(class: PolygonClass) -> LimitLaw {
        match class {
            PolygonClass::Rectangles => LimitLaw::BetaHalf,
            PolygonClass::Squares => LimitLaw::Dirac(ri(1) / ri(4)),
            PolygonClass::Ferrers => LimitLaw::Dirac(ri(1) / ri(8)),
            PolygonClass::Staircase => LimitLaw::Airy,
            PolygonClass::DirectedConvex => LimitLaw::Meander,
        }
    }
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LimitLaw {
    type Err = LimitLawError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LimitLawError::UnknownLaw(s.to_string());
        match s {
            "airy" => return Ok(LimitLaw::Airy),
            "meander" => return Ok(LimitLaw::Meander),
            "beta_1_half" | "beta" => return Ok(LimitLaw::BetaHalf),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("dirac:") {
            return p.parse::<BigRational>().map(LimitLaw::Dirac).map_err(|_| bad());
        }
        if let Some(p) = s.strip_prefix("gaussian:") {
            let (a, b) = p.split_once(',').ok_or_else(bad)?;
            let mean = a.trim().parse::<f64>().map_err(|_| bad())?;
            let sd = b.trim().parse::<f64>().map_err(|_| bad())?;
            return Ok(LimitLaw::Gaussian { mean, sd });
        }
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LawMoment {
    Exact(ExactMoment),
    Numeric(f64),
}

impl LawMoment {
    pub fn to_f64(&self) -> f64 {
        match self {
            LawMoment::Exact(e) => e.to_f64(),
            LawMoment::Numeric(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&ExactMoment> {
        match self {
            LawMoment::Exact(e) => Some(e),
            LawMoment::Numeric(_) => None,
        }
    }
}

/// `E[Y^k]/k! = 2√π φ_k/Γ(γ_k)` for the Airy law.
fn airy_moment_over_factorial(k: u32, phi: &[BigRational]) -> ExactMoment {
    let g = gamma_half(3 * k as i64 - 1);
    ExactMoment::new(&phi[k as usize] * ri(2), 1, 0).div(&g)
}

/// `E[Z^k]/k! = √π ω_k 2^{−k/2}/Γ(α_k)` for the meander law.
fn meander_moment_over_factorial(k: u32, omega: &[BigRational]) -> ExactMoment {
    let g = gamma_half(3 * k as i64 + 1);
    ExactMoment::new(omega[k as usize].clone(), 1, -(k as i32)).div(&g)
}

/// `k`-th moment of a law.
pub fn law_moment(law: &LimitLaw, k: u32) -> LawMoment {
    let kf = ExactMoment::rational(BigRational::from_integer(factorial(k as u64)));
    match law {
        LimitLaw::BetaHalf => {
            // ½B(k+1, 1/2) = 4^k (k!)²/(2k+1)!
            let f = factorial(k as u64);
            LawMoment::Exact(ExactMoment::rational(BigRational::new(
                (BigInt::one() << (2 * k) as usize) * &f * &f,
                factorial(2 * k as u64 + 1),
            )))
        }
        LimitLaw::Airy => {
            let phi = airy_phi(k);
            LawMoment::Exact(kf.mul(&airy_moment_over_factorial(k, phi.exact_values().expect("exact"))))
        }
        LimitLaw::Meander => {
            let w = meander_omega(k);
            LawMoment::Exact(kf.mul(&meander_moment_over_factorial(k, w.exact_values().expect("exact"))))
        }
        LimitLaw::Dirac(p) => LawMoment::Exact(ExactMoment::rational(num_traits::pow(p.clone(), k as usize))),
        LimitLaw::Gaussian { mean, sd } => {
            let mut m = vec![1.0, *mean];
            for j in 2..=k as usize {
                m.push(mean * m[j - 1] + (j - 1) as f64 * sd * sd * m[j - 2]);
            }
            LawMoment::Numeric(m[k as usize])
        }
    }
}

/// `E[Y^k]/E[Y]^k = k! Γ(γ_1)^k φ_kφ_0^{k−1}/(Γ(γ_k)Γ(γ_0)^{k−1}φ_1^k)` for the Airy law.
pub fn universal_ratio(k: u32) -> ExactMoment {
    let phi = airy_phi(k.max(1));
    let v = phi.exact_values().expect("exact");
    let kf = ExactMoment::rational(BigRational::from_integer(factorial(k as u64)));
    let num = kf
        .mul(&gamma_half(2).powi(k))
        .mul(&ExactMoment::rational(&v[k as usize] * num_traits::pow(v[0].clone(), k.saturating_sub(1) as usize)));
    let den = gamma_half(3 * k as i64 - 1)
        .mul(&gamma_half(-1).powi(k.saturating_sub(1)))
        .mul(&ExactMoment::rational(num_traits::pow(v[1].clone(), k as usize)));
    num.div(&den)
}

/// `Σ_{k=1}^{K} M_{2k}^{−1/(2k)}` for `K = 1, …, k_max`.
pub fn carleman_partial_sums(law: &LimitLaw, k_max: u32) -> Vec<f64> {
    let mut acc = 0.0;
    (1..=k_max)
        .map(|k| {
            let ln = match law_moment(law, 2 * k) {
                LawMoment::Exact(e) => e.ln_abs(),
                LawMoment::Numeric(v) => v.abs().ln(),
            };
            acc += (-ln / (2.0 * k as f64)).exp();
            acc
        })
        .collect()
}

/// A value with a bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawValue {
    pub value: f64,
    pub error_bound: f64,
}

const TAYLOR_TERMS: u32 = 110;
/// Largest number of Airy zeros used by a zero sum.
pub const MAX_ZEROS: usize = 20_000;

fn zeros(n: usize) -> &'static [f64] {
    static Z: OnceLock<Vec<f64>> = OnceLock::new();
    let z = Z.get_or_init(|| airy_zeros_f64(MAX_ZEROS));
    &z[..n.min(MAX_ZEROS)]
}

/// `c_k = E[X^k]/k!` as doubles.
fn taylor_coefficients(law: &LimitLaw) -> &'static [f64] {
    static AIRY: OnceLock<Vec<f64>> = OnceLock::new();
    static MEANDER: OnceLock<Vec<f64>> = OnceLock::new();
    match law {
        LimitLaw::Airy => AIRY.get_or_init(|| {
            let phi = airy_phi(TAYLOR_TERMS);
            let v = phi.exact_values().expect("exact");
            (0..=TAYLOR_TERMS).map(|k| airy_moment_over_factorial(k, v).to_f64()).collect()
        }),
        _ => MEANDER.get_or_init(|| {
            let w = meander_omega(TAYLOR_TERMS);
            let v = w.exact_values().expect("exact");
            (0..=TAYLOR_TERMS).map(|k| meander_moment_over_factorial(k, v).to_f64()).collect()
        }),
    }
}

/// `Σ_k c_k (−t)^k`, stopping once terms fall below `1e-18`; bound from the
/// last terms and summation rounding.
fn taylor_mgf(c: &[f64], t: f64) -> Result<LawValue, LimitLawError> {
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut p = 1.0;
    for (k, ck) in c.iter().enumerate() {
        let term = ck * p;
        sum += term;
        abs_sum += term.abs();
        if k > 4 && term.abs() < 1e-18 && (ck * p * t).abs() < 1e-18 {
            return Ok(LawValue { value: sum, error_bound: 2e-18 + 4.0 * f64::EPSILON * abs_sum });
        }
        p *= -t;
    }
    Err(LimitLawError::TailBound { what: "mgf Taylor series", arg: t, range: "small arguments" })
}

/// `Σ_{k≤K} w_k e^{−τβ_k}` with `K` chosen so that `|w|_max·tail ≤ tol`.
fn zero_sum(tau: f64, w_bound: f64, tol: f64, w: impl Fn(usize) -> f64) -> Result<(f64, f64), LimitLawError> {
    let mut k = 16;
    while w_bound * zero_sum_tail(k, tau) > tol {
        k *= 2;
        if k > MAX_ZEROS {
            return Err(LimitLawError::TailBound { what: "Airy zero sum", arg: tau, range: "τ ≥ 0.02" });
        }
    }
    let z = zeros(k);
    let s: f64 = z.iter().enumerate().map(|(i, b)| w(i) * (-tau * b).exp()).sum();
    Ok((s, w_bound * zero_sum_tail(k, tau) + 1e-16 * s.abs()))
}

/// `M(t) = 4√π t Σ_k e^{−β_k(2t)^{2/3}}`, the zero-sum form of `E[e^{−tY}]`.
pub fn airy_mgf_zero_sum(t: f64) -> Result<LawValue, LimitLawError> {
    if !(t > 0.0) {
        return Err(LimitLawError::TailBound { what: "Airy mgf zero sum", arg: t, range: "t > 0" });
    }
    let tau = (2.0 * t).powf(2.0 / 3.0);
    let pref = 4.0 * PI.sqrt() * t;
    let (s, e) = zero_sum(tau, 1.0, 1e-17 / pref, |_| 1.0)?;
    Ok(LawValue { value: pref * s, error_bound: pref * e })
}

/// `Σ_k (−t)^k E[Y^k]/k!`.
pub fn airy_mgf_taylor(t: f64) -> Result<LawValue, LimitLawError> {
    taylor_mgf(taylor_coefficients(&LimitLaw::Airy), t)
}

const AIRY_MGF_SWITCH: f64 = 0.3;

/// `E[e^{−tY}]`, `t ≥ 0`: Taylor series for `t ≤ 0.3`, zero sum beyond.
pub fn airy_mgf(t: f64) -> Result<LawValue, LimitLawError> {
    if t < 0.0 {
        return Err(LimitLawError::TailBound { what: "Airy mgf", arg: t, range: "t ≥ 0" });
    }
    if t <= AIRY_MGF_SWITCH {
        airy_mgf_taylor(t)
    } else {
        airy_mgf_zero_sum(t)
    }
}

/// Density of the Airy law from
/// `2^{3/2}p(2^{3/2}x) = (2√6/x²) Σ_k e^{−v_k}v_k^{2/3}U(−5/6, 4/3; v_k)`, `v_k = 2β_k³/(27x²)`.
pub fn airy_density(y: f64) -> Result<LawValue, LimitLawError> {
    if !(y > 0.0) {
        return Err(LimitLawError::TailBound { what: "Airy density", arg: y, range: "y > 0" });
    }
    let x = y / 2f64.powf(1.5);
    let pref = 2.0 * 6f64.sqrt() / (x * x) / 2f64.powf(1.5);
    let v = |b: f64| 2.0 * b * b * b / (27.0 * x * x);
    density_like_sum(pref, v, |vk| {
        specialfn::kummer_u_f64(-5.0 / 6.0, 4.0 / 3.0, vk).map(|u| (-vk).exp() * vk.powf(2.0 / 3.0) * u)
    })
}

/// `pref·Σ_k term(v(β_k))`, summed until `v ≥ 60`; beyond, terms are below
/// `2e^{−v/2}` (checked at the cut) and the `v_k` have growing increments.
fn density_like_sum(
    pref: f64,
    v: impl Fn(f64) -> f64,
    term: impl Fn(f64) -> Result<f64, SpecialFnError>,
) -> Result<LawValue, LimitLawError> {
    let mut sum = 0.0;
    let mut k = 0;
    let v1 = v(zeros(1)[0]);
    if v1 > 700.0 {
        // every term is below 2e^{−v/2} and the sum is below e^{−v_1/2}/(1 − e^{−v_1/2})·2
        return Ok(LawValue { value: 0.0, error_bound: (pref.ln() + 2f64.ln() - v1 / 2.0).exp() * 2.0 });
    }
    loop {
        let z = zeros(k + 2);
        if k + 1 >= z.len() {
            return Err(LimitLawError::TailBound { what: "zero sum", arg: v(z[0]), range: "moderate arguments" });
        }
        let vk = v(z[k]);
        if vk >= 60.0 {
            let t = term(vk)?;
            if t.abs() > 2.0 * (-vk / 2.0).exp() {
                return Err(LimitLawError::TailBound { what: "zero sum", arg: vk, range: "moderate arguments" });
            }
            let dv = v(z[k + 1]) - vk;
            let tail = 2.0 * (-vk / 2.0).exp() / (1.0 - (-dv / 2.0).exp());
            return Ok(LawValue { value: pref * sum, error_bound: pref * (tail + 1e-15 * sum.abs()) });
        }
        sum += term(vk)?;
        k += 1;
    }
}

/// Quantities attached to the zeros: `β_k`, `r_k = R_k/β_k` and `R_k`.
struct MeanderResidues {
    beta: Vec<f64>,
    r: Vec<f64>,
}

const RESIDUES: usize = 400;
/// `|r_k| ≤ 3` for every `k` (the numerator is at most `1 + 3·max|∫Ai(−t)| ≤ 4.3`
/// and `|Ai'(−β_k)| ≥ |Ai'(−β_1)| > 0.7`).
const RESIDUE_BOUND: f64 = 3.0;

fn residues() -> &'static MeanderResidues {
    static R: OnceLock<MeanderResidues> = OnceLock::new();
    R.get_or_init(|| {
        let mut beta: Vec<f64> = zeros(RESIDUES).to_vec();
        for b in beta.iter_mut().skip(specialfn::MAX_ZERO_INDEX) {
            let v = airy_f64(-*b);
            *b += v.ai / v.aip;
        }
        let mut integral = 0.0;
        let mut prev = 0.0;
        let mut r = Vec::with_capacity(RESIDUES);
        for &b in &beta {
            integral += quad::integrate(|t| airy_f64(-t).ai, prev, b, 1e-14).map(|q| q.value).unwrap_or(f64::NAN);
            prev = b;
            r.push((1.0 + 3.0 * integral) / (3.0 * airy_f64(-b).aip));
        }
        MeanderResidues { beta, r }
    })
}

/// `R_k = β_k(1 + 3∫₀^{β_k}Ai(−t)dt)/(3Ai'(−β_k))`, `1 ≤ k ≤ 400`.
pub fn meander_r(k: usize) -> Option<f64> {
    let res = residues();
    (k >= 1 && k <= RESIDUES).then(|| res.r[k - 1] * res.beta[k - 1])
}

/// `Σ_k (−v)^k E[Z^k]/k!`.
pub fn meander_mgf_taylor(v: f64) -> Result<LawValue, LimitLawError> {
    taylor_mgf(taylor_coefficients(&LimitLaw::Meander), v)
}

/// `M(v) = √π τ^{1/2} Σ_k (R_k/β_k) e^{−β_kτ}`, `τ = (v/√2)^{2/3}`.
pub fn meander_mgf_zero_sum(v: f64) -> Result<LawValue, LimitLawError> {
    if !(v > 0.0) {
        return Err(LimitLawError::TailBound { what: "meander mgf zero sum", arg: v, range: "v > 0" });
    }
    let tau = (v / 2f64.sqrt()).powf(2.0 / 3.0);
    let pref = PI.sqrt() * tau.sqrt();
    let res = residues();
    let n = (1..=RESIDUES)
        .find(|&k| RESIDUE_BOUND * zero_sum_tail(k, tau) * pref < 1e-17)
        .ok_or(LimitLawError::TailBound { what: "meander mgf zero sum", arg: v, range: "v ≥ 0.5" })?;
    let s: f64 = (0..n).map(|i| res.r[i] * (-tau * res.beta[i]).exp()).sum();
    Ok(LawValue { value: pref * s, error_bound: 1e-17 + 1e-15 * (pref * s).abs() })
}

const MEANDER_MGF_SWITCH: f64 = std::f64::consts::SQRT_2;

/// `E[e^{−vZ}]`, `v ≥ 0`: Taylor series for `v ≤ √2`, zero sum beyond.
pub fn meander_mgf(v: f64) -> Result<LawValue, LimitLawError> {
    if v < 0.0 {
        return Err(LimitLawError::TailBound { what: "meander mgf", arg: v, range: "v ≥ 0" });
    }
    if v <= MEANDER_MGF_SWITCH {
        meander_mgf_taylor(v)
    } else {
        meander_mgf_zero_sum(v)
    }
}

/// `R(x) = √π/(18^{1/6}x) Σ_k R_k e^{−v_k}v_k^{−1/3}Ai((3v_k/2)^{2/3})`, `v_k = β_k³/(27x²)`.
pub fn meander_cdf(x: f64) -> Result<LawValue, LimitLawError> {
    if !(x > 0.0) {
        return Err(LimitLawError::TailBound { what: "meander cdf", arg: x, range: "x > 0" });
    }
    let res = residues();
    let pref = PI.sqrt() / (18f64.powf(1.0 / 6.0) * x);
    let v = |b: f64| b * b * b / (27.0 * x * x);
    let mut sum = 0.0;
    for k in 0..RESIDUES - 1 {
        let vk = v(res.beta[k]);
        // Ai(z) ≤ e^{−2z^{3/2}/3}/(2√π z^{1/4}), so terms are below 3β_k e^{−2v_k}
        if vk > 30.0 {
            let dv = v(res.beta[k + 1]) - vk;
            let tail = RESIDUE_BOUND * res.beta[k] * (-2.0 * vk).exp() / (1.0 - (-2.0 * dv).exp());
            return Ok(LawValue { value: pref * sum, error_bound: pref * (tail + 1e-15 * sum.abs()) });
        }
        let z = (1.5 * vk).powf(2.0 / 3.0);
        sum += res.r[k] * res.beta[k] * (-vk).exp() * vk.powf(-1.0 / 3.0) * airy_f64(z).ai;
    }
    Err(LimitLawError::TailBound { what: "meander cdf", arg: x, range: "x ≤ 25" })
}

/// Both sides of `(1/√(2π))∫₀^∞(e^{−st}−1)M(2^{−3/2}t^{3/2})t^{−3/2}dt
/// = 2^{1/3}(Ai'(2^{1/3}s)/Ai(2^{1/3}s) − Ai'(0)/Ai(0))`.
pub fn airy_laplace_identity(s: f64) -> Result<(LawValue, f64), LimitLawError> {
    let c = 2f64.powf(-1.5);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let fail = |e: LimitLawError| e;
    // t = w² on [0, 1]
    let near = quad::integrate_panels(
        |w| {
            if w == 0.0 {
                return -2.0 * s * norm;
            }
            let t = w * w;
            let m = airy_mgf(c * t.powf(1.5)).map(|v| v.value).unwrap_or(f64::NAN);
            2.0 * (-s * t).exp_m1() * m / t * norm
        },
        0.0,
        1.0,
        1e-14,
        4,
    )?;
    // for t ≥ 1 the integrand is (e^{−st}−1)Σ_k e^{−2^{−1/3}β_k t}
    let b1 = zeros(1)[0];
    let t_max = 1.0 + 45.0 / (2f64.powf(-1.0 / 3.0) * b1);
    let far = quad::integrate_panels(
        |t| {
            let m = airy_mgf(c * t.powf(1.5)).map(|v| v.value).unwrap_or(f64::NAN);
            (-s * t).exp_m1() * m * t.powf(-1.5) * norm
        },
        1.0,
        t_max,
        1e-14,
        16,
    )
    .map_err(LimitLawError::from)
    .map_err(fail)?;
    let tail = (-2f64.powf(-1.0 / 3.0) * b1 * t_max).exp() * 10.0;
    let lhs = LawValue { value: near.value + far.value, error_bound: near.error + far.error + tail };
    let a = airy_f64(2f64.powf(1.0 / 3.0) * s);
    let a0 = airy_f64(0.0);
    let rhs = 2f64.powf(1.0 / 3.0) * (a.aip / a.ai - a0.aip / a0.ai);
    Ok((lhs, rhs))
}

/// `Ω(s) = (1 − 3∫₀^s Ai)/(3Ai(s))`.
pub fn meander_omega_fn(s: f64) -> Result<f64, LimitLawError> {
    let i = specialfn::airy_ai_integral(s)?;
    Ok((1.0 - 3.0 * i.value) / (3.0 * airy_f64(s).ai))
}

/// Both sides of `∫₀^∞ e^{−st}M(√2 t^{3/2})t^{−1/2}dt = √π Ω(s)`.
pub fn meander_laplace_identity(s: f64) -> Result<(LawValue, f64), LimitLawError> {
    let r2 = 2f64.sqrt();
    let near = quad::integrate_panels(
        |w| {
            let m = meander_mgf(r2 * w * w * w).map(|v| v.value).unwrap_or(f64::NAN);
            2.0 * (-s * w * w).exp() * m
        },
        0.0,
        1.0,
        1e-14,
        4,
    )?;
    let b1 = residues().beta[0];
    let t_max = 1.0 + 45.0 / (s + b1);
    let far = quad::integrate_panels(
        |t| {
            let m = meander_mgf(r2 * t.powf(1.5)).map(|v| v.value).unwrap_or(f64::NAN);
            (-s * t).exp() * m / t.sqrt()
        },
        1.0,
        t_max,
        1e-14,
        16,
    )?;
    let tail = 10.0 * (-(s + b1) * t_max).exp();
    let lhs = LawValue { value: near.value + far.value, error_bound: near.error + far.error + tail };
    Ok((lhs, PI.sqrt() * meander_omega_fn(s)?))
}

// Finite-size comparison.

/// One row of a moment comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub m: u32,
    pub k: u32,
    /// Exact empirical statistic when it is rational.
    pub empirical_exact: Option<BigRational>,
    pub empirical: f64,
    pub law_value: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub model: PolygonClass,
    pub law: LimitLaw,
    pub rows: Vec<MomentRow>,
    /// Normalization conventions used for the rows.
    pub notes: Vec<String>,
}

impl MomentReport {
    /// CSV `model,law,m,k,empirical,law_value,rel_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,law,m,k,empirical,law_value,rel_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.12e},{:.12e},{:.6e}\n",
                self.model, self.law, r.m, r.k, r.empirical, r.law_value, r.rel_error
            ));
        }
        out
    }

    pub fn rows_for_k(&self, k: u32) -> Vec<&MomentRow> {
        self.rows.iter().filter(|r| r.k == k).collect()
    }
}

/// Raw moments `E[X̃_m^j]`, `j ≤ k_max`, of the uniform area law of row `m`.
pub fn raw_moments_from_table(table: &CountTable, m: u32, k_max: u32) -> Result<Vec<BigRational>, LimitLawError> {
    let law = empirical_area_law(table, m)?;
    Ok((0..=k_max).map(|j| law.moment(j)).collect())
}

/// Stirling numbers of the second kind `S(n, i)`, `n ≤ k_max`.
fn stirling2(k_max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); k_max + 1]; k_max + 1];
    s[0][0] = BigInt::one();
    for n in 1..=k_max {
        for i in 1..=n {
            s[n][i] = &s[n - 1][i - 1] + BigInt::from(i) * &s[n - 1][i];
        }
    }
    s
}

/// Raw moments of row `m` from `g_0, …, g_k` (`[x^m]g_i/[x^m]g_0 = E[C(X̃_m, i)]`).
pub fn raw_moments_from_series(gks: &[PowerSeries], m: u32, k_max: u32) -> Result<Vec<BigRational>, LimitLawError> {
    let k_max = k_max as usize;
    if gks.len() <= k_max {
        return Err(LimitLawError::InsufficientOrder { have: gks.len().saturating_sub(1), need: k_max });
    }
    if gks[0].order < m as usize {
        return Err(LimitLawError::InsufficientOrder { have: gks[0].order, need: m as usize });
    }
    let total = gks[0].coeff(m as usize);
    if total.is_zero() {
        return Err(LimitLawError::Enumerate(EnumerateError::EmptyRow(m)));
    }
    let binom: Vec<BigRational> = (0..=k_max).map(|i| gks[i].coeff(m as usize) / &total).collect();
    let st = stirling2(k_max);
    Ok((0..=k_max)
        .map(|j| (0..=j).map(|i| &binom[i] * BigRational::from_integer(&st[j][i] * factorial(i as u64))).sum())
        .collect())
}

fn compare_rows(
    class: PolygonClass,
    law: &LimitLaw,
    m: u32,
    raw: &[BigRational],
    k_max: u32,
) -> Result<Vec<MomentRow>, LimitLawError> {
    let mean = &raw[1];
    if mean.is_zero() {
        return Err(LimitLawError::Degenerate(m));
    }
    let mut rows = Vec::new();
    match law {
        LimitLaw::Dirac(p) => {
            // scaled by m^{1/φ}; mean normalization would be identically 1
            let spec = ModelSpec::of(class);
            let inv_phi = BigRational::one() / &spec.phi;
            for k in 1..=k_max {
                let e = &inv_phi * ri(k as i64);
                let (exact, value) = if e.is_integer() {
                    let d = num_traits::pow(ri(m as i64), e.to_integer().to_usize().unwrap_or(0));
                    let r = &raw[k as usize] / d;
                    let f = r.to_f64().unwrap_or(f64::NAN);
                    (Some(r), f)
                } else {
                    let lf = ln_abs_ratio(&raw[k as usize]) - e.to_f64().unwrap_or(f64::NAN) * (m as f64).ln();
                    (None, lf.exp())
                };
                let lv = num_traits::pow(p.clone(), k as usize).to_f64().unwrap_or(f64::NAN);
                rows.push(MomentRow {
                    m,
                    k,
                    empirical_exact: exact,
                    empirical: value,
                    law_value: lv,
                    rel_error: ((value - lv) / lv).abs(),
                });
            }
        }
        _ => {
            let m1 = law_moment(law, 1);
            for k in 1..=k_max {
                let r = &raw[k as usize] / num_traits::pow(mean.clone(), k as usize);
                let lv = match (&law_moment(law, k), &m1) {
                    (LawMoment::Exact(a), LawMoment::Exact(b)) => a.div(&b.powi(k)).to_f64(),
                    (a, b) => a.to_f64() / b.to_f64().powi(k as i32),
                };
                let f = r.to_f64().unwrap_or(f64::NAN);
                rows.push(MomentRow {
                    m,
                    k,
                    empirical_exact: Some(r),
                    empirical: f,
                    law_value: lv,
                    rel_error: ((f - lv) / lv).abs(),
                });
            }
        }
    }
    Ok(rows)
}

fn notes_for(law: &LimitLaw) -> Vec<String> {
    match law {
        LimitLaw::Dirac(_) => vec!["empirical = E[X̃_m^k]/m^{k/φ}".into()],
        _ => vec![
            "empirical = E[X̃_m^k]/E[X̃_m]^k, law_value = E[X^k]/E[X]^k".into(),
            "staircase scaled convention: 4X̃_m/m^{3/2} → Y with E[Y] = √π".into(),
        ],
    }
}

/// Compares the area law of each row in `m_list` with `law`, for `1 ≤ k ≤ k_max`.
pub fn compare_moments(
    table: &CountTable,
    law: &LimitLaw,
    m_list: &[u32],
    k_max: u32,
) -> Result<MomentReport, LimitLawError> {
    let mut rows = Vec::new();
    for &m in m_list {
        let raw = raw_moments_from_table(table, m, k_max)?;
        rows.extend(compare_rows(table.model, law, m, &raw, k_max)?);
    }
    Ok(MomentReport { model: table.model, law: law.clone(), rows, notes: notes_for(law) })
}

/// Same comparison from factorial moment generating functions `g_0, …, g_k`.
pub fn compare_moments_from_series(
    class: PolygonClass,
    gks: &[PowerSeries],
    law: &LimitLaw,
    m_list: &[u32],
    k_max: u32,
) -> Result<MomentReport, LimitLawError> {
    let mut rows = Vec::new();
    for &m in m_list {
        let raw = raw_moments_from_series(gks, m, k_max)?;
        rows.extend(compare_rows(class, law, m, &raw, k_max)?);
    }
    Ok(MomentReport { model: class, law: law.clone(), rows, notes: notes_for(law) })
}

/// Richardson acceleration of the `k`-th column of a report in `m^{−p}`.
pub fn accelerate_column(report: &MomentReport, k: u32, p: f64) -> Result<Vec<(f64, f64)>, LimitLawError> {
    let pts: Vec<(f64, f64)> = report.rows_for_k(k).iter().map(|r| (r.m as f64, r.empirical)).collect();
    Ok(richardson(&pts, p)?)
}

// Fixed-area ensemble.

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianRow {
    pub n: usize,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCheck {
    pub rows: Vec<GaussianRow>,
    pub mu_limit: f64,
    pub sigma2_limit: f64,
}

/// Fits `L + b_1/n + b_2/n² + b_3/n³` through the last four points.
const GAUSS_FIT: [f64; 3] = [1.0, 2.0, 3.0];

/// `μ̂_n = S_1/(S_0 n)` and `σ̂²_n = (S_2/S_0 − (S_1/S_0)²)/n` from
/// `S_{j,n} = Σ_m m^j p_{m,n}`, with limits extrapolated in `1/n`.
pub fn gaussian_fixed_area_check(
    s0: &PowerSeries,
    s1: &PowerSeries,
    s2: &PowerSeries,
    n_max: usize,
) -> Result<GaussianCheck, LimitLawError> {
    let have = s0.order.min(s1.order).min(s2.order);
    if have < n_max {
        return Err(LimitLawError::InsufficientOrder { have, need: n_max });
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let a0 = s0.coeff(n);
        if a0.is_zero() {
            continue;
        }
        let e1 = s1.coeff(n) / &a0;
        let e2 = s2.coeff(n) / &a0;
        let var = &e2 - &e1 * &e1;
        let nn = ri(n as i64);
        rows.push(GaussianRow {
            n,
            mu_hat: (e1 / &nn).to_f64().unwrap_or(f64::NAN),
            sigma2_hat: (var / nn).to_f64().unwrap_or(f64::NAN),
        });
    }
    let mu: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mu_hat)).collect();
    let s2v: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.sigma2_hat)).collect();
    Ok(GaussianCheck {
        mu_limit: richardson_fit(&mu, &GAUSS_FIT)?,
        sigma2_limit: richardson_fit(&s2v, &GAUSS_FIT)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_first_moments() {
        let m = law_moment(&LimitLaw::Airy, 1);
        assert_eq!(m.exact().unwrap(), &ExactMoment::new(ri(1), 1, 0));
        let z = law_moment(&LimitLaw::Meander, 1);
        assert_eq!(z.exact().unwrap(), &ExactMoment::new(BigRational::new(3.into(), 8.into()), 1, 1));
        assert_eq!(
            law_moment(&LimitLaw::Airy, 2).exact().unwrap(),
            &ExactMoment::rational(BigRational::new(10.into(), 3.into()))
        );
        assert_eq!(law_moment(&LimitLaw::BetaHalf, 1).to_f64(), 2.0 / 3.0);
        assert_eq!(law_moment(&LimitLaw::Airy, 0).to_f64(), 1.0);
    }

    #[test]
    fn universal_ratio_two() {
        let r = universal_ratio(2);
        assert_eq!(r, ExactMoment::new(BigRational::new(10.into(), 3.into()), -2, 0));
        assert_eq!(universal_ratio(1), ExactMoment::rational(ri(1)));
    }

    #[test]
    fn law_names_round_trip() {
        for s in ["airy", "meander", "beta_1_half", "dirac:1/8"] {
            assert_eq!(s.parse::<LimitLaw>().unwrap().name(), s);
        }
        assert!("cauchy".parse::<LimitLaw>().is_err());
    }
}
