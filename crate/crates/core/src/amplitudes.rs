//! Dominant-balance amplitudes: the coefficient sequences of the area
//! amplitude series and of the limit-law moments.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::hp::{HpReal, Precision};
use crate::qfunc::{Expr, QFuncError};
use crate::series::{LaurentPoly, PowerSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmplitudeError {
    #[error("r = 0 is not a puncture")]
    NotAPuncture,
    #[error("g0 diverges at the critical point")]
    DivergentCriticalValue,
    #[error("g0 series known to order {have}, need {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("unsupported equation: {0}")]
    Unsupported(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("invariant violated: {0}")]
    InvariantBreach(String),
    #[error("critical point search failed: {0}")]
    NotConverged(String),
    #[error(transparent)]
    QFunc(#[from] QFuncError),
}

fn ri(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AmplitudeLabel {
    Phi,
    StairF,
    Omega,
    DirconvexH,
    RectangleF,
    GeneralF,
}

impl AmplitudeLabel {
    pub fn tag(self) -> &'static str {
        match self {
            AmplitudeLabel::Phi => "phi",
            AmplitudeLabel::StairF => "stair_f",
            AmplitudeLabel::Omega => "omega",
            AmplitudeLabel::DirconvexH => "dirconvex_h",
            AmplitudeLabel::RectangleF => "rectangle_f",
            AmplitudeLabel::GeneralF => "general_f",
        }
    }
}

impl fmt::Display for AmplitudeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Singular exponent attached to the k-th amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExponentRule {
    /// `γ_k = 3k/2 − 1/2`
    Gamma,
    /// `α_k = 3k/2 + 1/2`
    Alpha,
    /// `2k + 2`
    Rectangle,
}

impl ExponentRule {
    pub fn exponent(self, k: u32) -> BigRational {
        let k = k as i64;
        match self {
            ExponentRule::Gamma => rat(3 * k - 1, 2),
            ExponentRule::Alpha => rat(3 * k + 1, 2),
            ExponentRule::Rectangle => ri(2 * k + 2),
        }
    }
}

/// `γ_k = 3k/2 − 1/2`.
pub fn gamma_k(k: u32) -> BigRational {
    ExponentRule::Gamma.exponent(k)
}

/// `α_k = 3k/2 + 1/2`.
pub fn alpha_k(k: u32) -> BigRational {
    ExponentRule::Alpha.exponent(k)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AmplitudeValues {
    Exact(Vec<BigRational>),
    Numeric(Vec<HpReal>),
}

/// Amplitudes `A_0, A_1, …` with exponents `rule(k + offset)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSequence {
    pub label: AmplitudeLabel,
    pub rule: ExponentRule,
    /// Index shift of the exponent ladder (nonzero for punctured sequences).
    pub offset: u32,
    pub values: AmplitudeValues,
}

impl AmplitudeSequence {
    fn exact(label: AmplitudeLabel, rule: ExponentRule, values: Vec<BigRational>) -> AmplitudeSequence {
        AmplitudeSequence { label, rule, offset: 0, values: AmplitudeValues::Exact(values) }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            AmplitudeValues::Exact(v) => v.len(),
            AmplitudeValues::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k_max(&self) -> u32 {
        self.len().saturating_sub(1) as u32
    }

    pub fn exponent(&self, k: u32) -> BigRational {
        self.rule.exponent(k + self.offset)
    }

    pub fn exact_value(&self, k: u32) -> Option<&BigRational> {
        match &self.values {
            AmplitudeValues::Exact(v) => v.get(k as usize),
            AmplitudeValues::Numeric(_) => None,
        }
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        match &self.values {
            AmplitudeValues::Exact(v) => Some(v),
            AmplitudeValues::Numeric(_) => None,
        }
    }

    pub fn value_f64(&self, k: u32) -> Option<f64> {
        match &self.values {
            AmplitudeValues::Exact(v) => v.get(k as usize).and_then(|r| r.to_f64()),
            AmplitudeValues::Numeric(v) => v.get(k as usize).map(HpReal::to_f64),
        }
    }

    /// Residual of the defining recursion at `k ≥ 1`; `None` where no rational
    /// recursion applies.
    pub fn residual(&self, k: u32) -> Option<BigRational> {
        let v = self.exact_values()?;
        if k == 0 || k as usize >= v.len() || self.offset != 0 {
            return None;
        }
        let k = k as usize;
        let conv = |a: &[BigRational], b: &[BigRational]| -> BigRational { (0..=k).map(|l| &a[l] * &b[k - l]).sum() };
        match self.label {
            AmplitudeLabel::Phi => Some(gamma_k(k as u32 - 1) * &v[k - 1] + conv(v, v) / ri(2)),
            AmplitudeLabel::StairF => Some(gamma_k(k as u32 - 1) * &v[k - 1] + conv(v, v) * ri(4)),
            AmplitudeLabel::Omega => {
                let phi = phi_values(k);
                let scaled: Vec<BigRational> = (0..=k).map(|l| &phi[l] / pow2(l as u32)).collect();
                Some(alpha_k(k as u32 - 1) * &v[k - 1] + conv(&scaled, v))
            }
            AmplitudeLabel::DirconvexH => {
                let f = stair_values(k);
                Some(alpha_k(k as u32 - 1) * &v[k - 1] + conv(&f, v) * ri(4))
            }
            AmplitudeLabel::RectangleF => Some(&v[k] - &v[k - 1] * ri(k as i64)),
            AmplitudeLabel::GeneralF => None,
        }
    }

    /// CSV rows `label,k,gamma_k,value`; exact values as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,k,gamma_k,value\n");
        for k in 0..self.len() as u32 {
            let value = match &self.values {
                AmplitudeValues::Exact(v) => fraction(&v[k as usize]),
                AmplitudeValues::Numeric(v) => v[k as usize].to_decimal(30),
            };
            out.push_str(&format!("{},{},{},{}\n", self.label, k, fraction(&self.exponent(k)), value));
        }
        out
    }
}

/// `p/q` rendering, also for integers.
pub fn fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

fn phi_values(k_max: usize) -> Vec<BigRational> {
    let mut v = vec![ri(-1)];
    for k in 1..=k_max {
        let s: BigRational = (1..k).map(|l| &v[l] * &v[k - l]).sum();
        v.push(gamma_k(k as u32 - 1) * &v[k - 1] + s / ri(2));
    }
    v
}

fn stair_values(k_max: usize) -> Vec<BigRational> {
    let mut v = vec![rat(-1, 2)];
    for k in 1..=k_max {
        let s: BigRational = (1..k).map(|l| &v[l] * &v[k - l]).sum();
        v.push((gamma_k(k as u32 - 1) * &v[k - 1] + s * ri(4)) / ri(4));
    }
    v
}

/// `φ_0 = −1`, `γ_{k−1}φ_{k−1} + ½Σ_{l=0}^k φ_lφ_{k−l} = 0`.
pub fn airy_phi(k_max: u32) -> AmplitudeSequence {
    AmplitudeSequence::exact(AmplitudeLabel::Phi, ExponentRule::Gamma, phi_values(k_max as usize))
}

/// `f_0 = −1/2`, `γ_{k−1}f_{k−1} + 4Σ_{l=0}^k f_lf_{k−l} = 0`.
pub fn stair_f(k_max: u32) -> AmplitudeSequence {
    AmplitudeSequence::exact(AmplitudeLabel::StairF, ExponentRule::Gamma, stair_values(k_max as usize))
}

/// `ω_0 = 1`, `α_{k−1}ω_{k−1} + Σ_{l=0}^k φ_l2^{−l}ω_{k−l} = 0`.
pub fn meander_omega(k_max: u32) -> AmplitudeSequence {
    let k_max = k_max as usize;
    let phi = phi_values(k_max);
    let mut v = vec![ri(1)];
    for k in 1..=k_max {
        let s: BigRational = (1..=k).map(|l| &phi[l] / pow2(l as u32) * &v[k - l]).sum();
        v.push(alpha_k(k as u32 - 1) * &v[k - 1] + s);
    }
    AmplitudeSequence::exact(AmplitudeLabel::Omega, ExponentRule::Alpha, v)
}

/// `h_0 = 1/16`, `α_{k−1}h_{k−1} + 4Σ_{l=0}^k f_lh_{k−l} = 0`.
pub fn dirconvex_h(k_max: u32) -> AmplitudeSequence {
    let k_max = k_max as usize;
    let f = stair_values(k_max);
    let mut v = vec![rat(1, 16)];
    for k in 1..=k_max {
        let s: BigRational = (1..=k).map(|l| &f[l] * &v[k - l]).sum();
        v.push((alpha_k(k as u32 - 1) * &v[k - 1] + s * ri(4)) / ri(2));
    }
    AmplitudeSequence::exact(AmplitudeLabel::DirconvexH, ExponentRule::Alpha, v)
}

/// `k!`, the amplitude of `g_k(x) ∼ k!/(1−x)^{2k+2}`.
pub fn rectangle_f(k: u32) -> BigRational {
    BigRational::from_integer((1..=k as u64).map(BigInt::from).product())
}

pub fn rectangle_sequence(k_max: u32) -> AmplitudeSequence {
    AmplitudeSequence::exact(
        AmplitudeLabel::RectangleF,
        ExponentRule::Rectangle,
        (0..=k_max).map(rectangle_f).collect(),
    )
}

/// Coefficient `N(1)` of a rational series `g = N(x)/(1−x)^e` with polynomial `N`.
///
/// Returns `None` when `(1−x)^e·g` does not terminate within the known order,
/// keeping a margin of half the coefficients above the numerator degree.
pub fn pole_amplitude(g: &PowerSeries, e: u32) -> Option<BigRational> {
    let order = g.order;
    let mut prod = g.clone();
    let one_minus_x = PowerSeries::from_ints(order, &[1, -1]);
    for _ in 0..e {
        prod = prod.mul(&one_minus_x);
    }
    let c = prod.coeffs();
    let deg = c.iter().rposition(|a| !a.is_zero())?;
    if 2 * deg + 2 > order {
        return None;
    }
    Some(c.iter().sum())
}

// Staircase factorial-moment generating functions as Laurent polynomials in s = √(1−4x).

fn lp(c: BigRational, e: i64) -> LaurentPoly {
    LaurentPoly::monomial(c, e)
}

/// `d/dx` on Laurent polynomials in `s = √(1−4x)`: `ds/dx = −2/s`.
fn d_dx(p: &LaurentPoly) -> LaurentPoly {
    p.derivative().shift(-1).scale(&ri(-2))
}

/// `g_0, …, g_{k_max}` of the staircase model as Laurent polynomials in `s = √(1−4x)`.
pub fn staircase_laurent(k_max: u32) -> Vec<LaurentPoly> {
    let k_max = k_max as usize;
    // x = (1 − s²)/4
    let x = lp(rat(1, 4), 0).add(&lp(rat(-1, 4), 2));
    let one = lp(ri(1), 0);
    let x2 = x.mul(&x);
    let g0 = one.sub(&x.scale(&ri(2))).sub(&lp(ri(1), 1)).scale(&rat(1, 2));
    let mut g = vec![g0.clone()];
    // derivs[i][j] = x^j g_i^{(j)}/j!
    let mut derivs: Vec<Vec<LaurentPoly>> = Vec::new();
    let push_derivs = |gi: &LaurentPoly, derivs: &mut Vec<Vec<LaurentPoly>>| {
        let mut row = vec![gi.clone()];
        let mut d = gi.clone();
        let mut xp = one.clone();
        for j in 1..=k_max {
            d = d_dx(&d);
            xp = xp.mul(&x);
            row.push(xp.mul(&d).scale(&(BigRational::one() / rectangle_f(j as u32))));
        }
        derivs.push(row);
    };
    push_derivs(&g0, &mut derivs);
    // D_j: coefficients of 1 − 2xq − P(qx) in u = q − 1
    let mut dcoef = vec![one.sub(&x.scale(&ri(2))).sub(&g0)];
    for k in 1..=k_max {
        // E_k = −2x[k=1] − Σ_{i<k} x^{k−i}g_i^{(k−i)}/(k−i)!
        let mut e = LaurentPoly::zero();
        if k == 1 {
            e = e.sub(&x.scale(&ri(2)));
        }
        for i in 0..k {
            e = e.sub(&derivs[i][k - i]);
        }
        let mut rhs = if k == 1 { x2.clone() } else { LaurentPoly::zero() };
        rhs = rhs.sub(&g0.mul(&e));
        for i in 1..k {
            rhs = rhs.sub(&g[i].mul(&dcoef[k - i]));
        }
        let gk = rhs.shift(-1);
        dcoef.push(e.sub(&gk));
        push_derivs(&gk, &mut derivs);
        g.push(gk);
    }
    g
}

/// Coefficient of `s^{−2γ_k}` in the Laurent expansion of the staircase `g_k`.
pub fn staircase_laurent_amplitudes(k_max: u32) -> Vec<BigRational> {
    staircase_laurent(k_max).iter().enumerate().map(|(k, g)| g.coeff(1 - 3 * k as i64)).collect()
}

// Critical-point analysis of P = G(x, q, P(x), P(qx), …, P(q^N x)).

trait Scalar: Clone {
    fn int(&self, v: i64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    /// `None` on a zero divisor.
    fn over(&self, o: &Self) -> Option<Self>;
    fn zero_like(&self) -> bool;
}

impl Scalar for BigRational {
    fn int(&self, v: i64) -> Self {
        ri(v)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Option<Self> {
        (!o.is_zero()).then(|| self / o)
    }
    fn zero_like(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for HpReal {
    fn int(&self, v: i64) -> Self {
        HpReal::from_int(v, self.bits())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn over(&self, o: &Self) -> Option<Self> {
        (!o.is_zero()).then(|| self.div(o))
    }
    fn zero_like(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    fn int(&self, v: i64) -> Self {
        v as f64
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Option<Self> {
        (*o != 0.0 && o.is_finite()).then(|| self / o)
    }
    fn zero_like(&self) -> bool {
        *self == 0.0
    }
}

/// Second-order Taylor jet in two infinitesimals `(ε_x, ε_y)`:
/// `v + x ε_x + y ε_y + xx ε_x² + xy ε_xε_y + yy ε_y²`.
#[derive(Clone, Debug)]
struct Jet2<S> {
    v: S,
    x: S,
    y: S,
    xx: S,
    xy: S,
    yy: S,
}

impl<S: Scalar> Jet2<S> {
    fn constant(v: S) -> Self {
        let z = v.int(0);
        Jet2 { v, x: z.clone(), y: z.clone(), xx: z.clone(), xy: z.clone(), yy: z }
    }

    fn add(&self, o: &Self) -> Self {
        Jet2 {
            v: self.v.plus(&o.v),
            x: self.x.plus(&o.x),
            y: self.y.plus(&o.y),
            xx: self.xx.plus(&o.xx),
            xy: self.xy.plus(&o.xy),
            yy: self.yy.plus(&o.yy),
        }
    }

    fn neg(&self) -> Self {
        let z = self.v.int(0);
        Jet2 {
            v: z.minus(&self.v),
            x: z.minus(&self.x),
            y: z.minus(&self.y),
            xx: z.minus(&self.xx),
            xy: z.minus(&self.xy),
            yy: z.minus(&self.yy),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self, o);
        Jet2 {
            v: a.v.times(&b.v),
            x: a.x.times(&b.v).plus(&a.v.times(&b.x)),
            y: a.y.times(&b.v).plus(&a.v.times(&b.y)),
            xx: a.xx.times(&b.v).plus(&a.x.times(&b.x)).plus(&a.v.times(&b.xx)),
            xy: a.xy.times(&b.v).plus(&a.x.times(&b.y)).plus(&a.y.times(&b.x)).plus(&a.v.times(&b.xy)),
            yy: a.yy.times(&b.v).plus(&a.y.times(&b.y)).plus(&a.v.times(&b.yy)),
        }
    }

    fn recip(&self) -> Option<Self> {
        let one = self.v.int(1);
        let r = one.over(&self.v)?;
        let r2 = r.times(&r);
        let r3 = r2.times(&r);
        let z = self.v.int(0);
        Some(Jet2 {
            v: r.clone(),
            x: z.minus(&self.x.times(&r2)),
            y: z.minus(&self.y.times(&r2)),
            xx: self.x.times(&self.x).times(&r3).minus(&self.xx.times(&r2)),
            xy: self.x.int(2).times(&self.x).times(&self.y).times(&r3).minus(&self.xy.times(&r2)),
            yy: self.y.times(&self.y).times(&r3).minus(&self.yy.times(&r2)),
        })
    }
}

/// Evaluates `G` at `q = 1`, `x → x + ε_x`, `y_k → y + w(k)·ε_y`.
fn eval_jet<S: Scalar>(e: &Expr, x: &S, y: &S, w: &dyn Fn(u32) -> i64) -> Result<Jet2<S>, AmplitudeError> {
    let z = x.int(0);
    Ok(match e {
        Expr::X => Jet2 { v: x.clone(), x: x.int(1), ..Jet2::constant(z) },
        Expr::Q => Jet2::constant(x.int(1)),
        Expr::Int(v) => Jet2::constant(x.int(*v)),
        Expr::Y => return Err(AmplitudeError::Unsupported("two-variable equation".into())),
        Expr::P { unknown, x_shift, y_shift } => {
            if *unknown != 0 || *y_shift != 0 {
                return Err(AmplitudeError::Unsupported("systems of equations".into()));
            }
            Jet2 { v: y.clone(), y: x.int(w(*x_shift)), ..Jet2::constant(z) }
        }
        Expr::Add(a, b) => eval_jet(a, x, y, w)?.add(&eval_jet(b, x, y, w)?),
        Expr::Sub(a, b) => eval_jet(a, x, y, w)?.add(&eval_jet(b, x, y, w)?.neg()),
        Expr::Mul(a, b) => eval_jet(a, x, y, w)?.mul(&eval_jet(b, x, y, w)?),
        Expr::Div(a, b) => {
            let d = eval_jet(b, x, y, w)?;
            let r = d.recip().ok_or_else(|| AmplitudeError::NotConverged("zero denominator".into()))?;
            eval_jet(a, x, y, w)?.mul(&r)
        }
        Expr::Neg(a) => eval_jet(a, x, y, w)?.neg(),
        Expr::Pow(a, n) => {
            let b = eval_jet(a, x, y, w)?;
            let mut acc = Jet2::constant(x.int(1));
            for _ in 0..*n {
                acc = acc.mul(&b);
            }
            acc
        }
    })
}

/// Data of `Q(x,y) = G(x,1,y,…,y)` at a point.
#[derive(Clone, Debug)]
struct Local<S> {
    q: S,
    qx: S,
    qy: S,
    qxy: S,
    /// `½∂²Q/∂y²`
    b: S,
    /// `Σ_k k ∂G/∂y_k`
    shift_sum: S,
}

fn local<S: Scalar>(g: &Expr, x: &S, y: &S) -> Result<Local<S>, AmplitudeError> {
    let j = eval_jet(g, x, y, &|_| 1)?;
    let s = eval_jet(g, x, y, &|k| k as i64)?;
    Ok(Local { q: j.v, qx: j.x, qy: j.y, qxy: j.xy, b: j.yy, shift_sum: s.y })
}

/// Checks assumption (ii): `Q(x,0) ≢ 0` and `Q` nonlinear in `y`.
fn check_shape(g: &Expr) -> Result<(), AmplitudeError> {
    let samples = [(rat(1, 7), rat(1, 11)), (rat(1, 5), rat(1, 13)), (rat(1, 9), rat(1, 17))];
    let mut nonlinear = false;
    let mut q0 = false;
    for (x, y) in &samples {
        if let Ok(l) = local(g, x, y) {
            nonlinear |= !l.b.zero_like();
        }
        if let Ok(l) = local(g, x, &ri(0)) {
            q0 |= !l.q.zero_like();
        }
    }
    if !q0 {
        return Err(AmplitudeError::AssumptionViolated("Q(x,0) vanishes identically".into()));
    }
    if !nonlinear {
        return Err(AmplitudeError::AssumptionViolated("Q(x,y) has degree below two in y".into()));
    }
    Ok(())
}

/// Critical data of an algebraic q-difference equation at high precision.
#[derive(Clone, Debug, PartialEq)]
pub struct QDiffAnalysis {
    pub x_c: HpReal,
    pub y_c: HpReal,
    /// `½ ∂²Q/∂y²` at the critical point.
    pub b: HpReal,
    /// `∂Q/∂x` at the critical point.
    pub c: HpReal,
    /// `Σ_k k ∂G/∂y_k` at the critical point.
    pub shift_sum: HpReal,
    /// `max(|Q − y|, |∂Q/∂y − 1|)` at the returned point.
    pub residual: f64,
}

/// The same data computed exactly from a known rational critical point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactQDiffAnalysis {
    pub x_c: BigRational,
    pub y_c: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub shift_sum: BigRational,
}

/// Fixed-point iteration `y ← Q(x,y)` from `0`; `None` when it diverges.
fn fixed_point(g: &Expr, x: f64) -> Option<f64> {
    let mut y = 0.0f64;
    for _ in 0..200_000 {
        let l = local(g, &x, &y).ok()?;
        let ny = l.q;
        if !ny.is_finite() || ny > 1e6 || ny < 0.0 {
            return None;
        }
        if (ny - y).abs() <= 1e-15 * ny.abs().max(1e-300) {
            return Some(ny);
        }
        y = ny;
    }
    Some(y)
}

fn newton_step<S: Scalar>(l: &Local<S>, y: &S) -> Option<(S, S)> {
    let one = y.int(1);
    let f1 = l.q.minus(y);
    let qy1 = l.qy.minus(&one);
    let qyy = l.b.int(2).times(&l.b);
    let det = l.qx.times(&qyy).minus(&qy1.times(&l.qxy));
    // F = (Q − y, ∂Q/∂y − 1), Jacobian [[Q_x, Q_y − 1], [Q_xy, Q_yy]]
    let dx = f1.times(&qyy).minus(&qy1.times(&qy1)).over(&det)?;
    let dy = l.qx.times(&qy1).minus(&l.qxy.times(&f1)).over(&det)?;
    Some((dx, dy))
}

impl QDiffAnalysis {
    /// Locates `Q(x_c,y_c) = y_c`, `∂Q/∂y(x_c,y_c) = 1` for `P = G(x,q,P(x),P(qx),…)`,
    /// with `y_k` written as `P(q^k x)`.
    pub fn from_equation(g: &Expr, prec: Precision) -> Result<QDiffAnalysis, AmplitudeError> {
        check_shape(g)?;
        // bracket the radius of convergence of the fixed-point iteration
        let mut hi = 1e-3;
        while fixed_point(g, hi).is_some() {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(AmplitudeError::NotConverged("no singularity below x = 1000".into()));
            }
        }
        let mut lo = hi / 2.0;
        if fixed_point(g, lo).is_none() {
            lo = 0.0;
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if fixed_point(g, mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = lo;
        let mut y = fixed_point(g, lo).ok_or_else(|| AmplitudeError::NotConverged("bracket".into()))?;
        for _ in 0..60 {
            let l = local(g, &x, &y)?;
            let (dx, dy) =
                newton_step(&l, &y).ok_or_else(|| AmplitudeError::NotConverged("singular Jacobian".into()))?;
            x -= dx;
            y -= dy;
            if dx.abs() + dy.abs() < 1e-15 * (x.abs() + y.abs()) {
                break;
            }
        }
        let bits = prec.bits() + 32;
        let mut hx = HpReal::from_f64(x, bits);
        let mut hy = HpReal::from_f64(y, bits);
        let eps = HpReal::from_int(1, bits).div(&HpReal::from_bigint(BigInt::one() << (bits - 8), bits));
        let mut converged = false;
        for _ in 0..200 {
            let l = local(g, &hx, &hy)?;
            let (dx, dy) =
                newton_step(&l, &hy).ok_or_else(|| AmplitudeError::NotConverged("singular Jacobian".into()))?;
            hx = hx.sub(&dx);
            hy = hy.sub(&dy);
            if dx.abs().add(&dy.abs()).cmp_value(&eps).is_le() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(AmplitudeError::NotConverged("Newton iteration".into()));
        }
        let l = local(g, &hx, &hy)?;
        let residual = l.q.sub(&hy).to_f64().abs().max(l.qy.sub(&HpReal::from_int(1, bits)).to_f64().abs());
        let fin = |v: &HpReal| v.with_bits(prec.bits());
        let a = QDiffAnalysis {
            x_c: fin(&hx),
            y_c: fin(&hy),
            b: fin(&l.b),
            c: fin(&l.qx),
            shift_sum: fin(&l.shift_sum),
            residual,
        };
        if !(a.x_c.to_f64() > 0.0) {
            return Err(AmplitudeError::NotConverged("nonpositive critical point".into()));
        }
        Ok(a)
    }
}

impl ExactQDiffAnalysis {
    /// Exact analysis at a given rational critical point, which is verified.
    pub fn at_point(g: &Expr, x_c: BigRational, y_c: BigRational) -> Result<ExactQDiffAnalysis, AmplitudeError> {
        check_shape(g)?;
        let l = local(g, &x_c, &y_c)?;
        if l.q != y_c || !l.qy.is_one() {
            return Err(AmplitudeError::InvariantBreach(format!(
                "({x_c}, {y_c}) is not critical: Q = {}, dQ/dy = {}",
                l.q, l.qy
            )));
        }
        Ok(ExactQDiffAnalysis { x_c, y_c, b: l.b, c: l.qx, shift_sum: l.shift_sum })
    }
}

/// `f_0 = −√(C x_c/B)`, `f_1 = Σ k∂G/∂y_k/(4B)`.
pub fn general_f0_f1(a: &QDiffAnalysis) -> Result<(HpReal, HpReal), AmplitudeError> {
    if a.b.is_negative() || a.b.is_zero() {
        return Err(AmplitudeError::InvariantBreach(format!("B = {} is not positive", a.b.to_f64())));
    }
    if a.c.is_negative() || a.c.is_zero() {
        return Err(AmplitudeError::InvariantBreach(format!("C = {} is not positive", a.c.to_f64())));
    }
    let f0 = a.c.mul(&a.x_c).div(&a.b).sqrt().neg();
    let f1 = a.shift_sum.div(&a.b).div_int(4);
    if f1.is_negative() || f1.is_zero() {
        return Err(AmplitudeError::InvariantBreach("f_1 is not positive".into()));
    }
    Ok((f0, f1))
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| BigRational::new(n, d))
}

/// Exact `(f_0, f_1)`; fails unless `C x_c/B` is a rational square.
pub fn general_f0_f1_exact(a: &ExactQDiffAnalysis) -> Result<(BigRational, BigRational), AmplitudeError> {
    if !a.b.is_positive() || !a.c.is_positive() {
        return Err(AmplitudeError::InvariantBreach(format!("B = {}, C = {} must be positive", a.b, a.c)));
    }
    let f0 = -rational_sqrt(&(&a.c * &a.x_c / &a.b))
        .ok_or_else(|| AmplitudeError::Unsupported("C x_c/B is not a rational square".into()))?;
    let f1 = &a.shift_sum / (&a.b * ri(4));
    Ok((f0, f1))
}

/// `f_0, …, f_{k_max}` from `γ_{k−1}f_{k−1} + (1/(4f_1))Σ_{l=0}^k f_lf_{k−l} = 0`, `k ≥ 2`.
pub fn general_f(a: &QDiffAnalysis, k_max: u32) -> Result<AmplitudeSequence, AmplitudeError> {
    let (f0, f1) = general_f0_f1(a)?;
    let mut v = vec![f0.clone()];
    if k_max >= 1 {
        v.push(f1.clone());
    }
    let four_f1 = f1.mul_int(4);
    let den = f0.mul_int(-2);
    for k in 2..=k_max as usize {
        let mut s = HpReal::zero(f0.bits());
        for l in 1..k {
            s = s.add(&v[l].mul(&v[k - l]));
        }
        let g = HpReal::from_ratio(&gamma_k(k as u32 - 1), f0.bits());
        v.push(four_f1.mul(&g).mul(&v[k - 1]).add(&s).div(&den));
    }
    Ok(AmplitudeSequence {
        label: AmplitudeLabel::GeneralF,
        rule: ExponentRule::Gamma,
        offset: 0,
        values: AmplitudeValues::Numeric(v),
    })
}

// Punctured polygons.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PunctureSize {
    /// Punctures with half-perimeter sum exactly `s`.
    Bounded(u32),
    Unbounded,
}

/// Perimeter generating function data of the puncture shape.
#[derive(Clone, Debug, PartialEq)]
pub struct PunctureContext {
    pub g0: PowerSeries,
    pub x_c: BigRational,
    /// `g_0(x_c)` when finite.
    pub g0_at_xc: Option<BigRational>,
}

/// `A_k^{(r,s)} = (A_{k+r}/r!)·x_c^s·[x^s]g_0^r`, or
/// `A_k^{(r)} = A_{k+r}g_0(x_c)^r/r!` for unbounded punctures.
pub fn punctured_amplitudes(
    base: &AmplitudeSequence,
    r: u32,
    size: &PunctureSize,
    ctx: &PunctureContext,
) -> Result<AmplitudeSequence, AmplitudeError> {
    if r == 0 {
        return Err(AmplitudeError::NotAPuncture);
    }
    let vals = base
        .exact_values()
        .ok_or_else(|| AmplitudeError::Unsupported("punctures need exact base amplitudes".into()))?;
    let factor = match size {
        PunctureSize::Bounded(s) => {
            let s = *s as usize;
            if ctx.g0.order < s {
                return Err(AmplitudeError::InsufficientOrder { have: ctx.g0.order, need: s });
            }
            let pw = ctx.g0.truncate(s).pow(r);
            pw.coeff(s) * num_traits::pow(ctx.x_c.clone(), s)
        }
        PunctureSize::Unbounded => {
            let g = ctx.g0_at_xc.clone().ok_or(AmplitudeError::DivergentCriticalValue)?;
            num_traits::pow(g, r as usize)
        }
    } / rectangle_f(r);
    let shifted: Vec<BigRational> = vals.iter().skip(r as usize).map(|a| a * &factor).collect();
    Ok(AmplitudeSequence {
        label: base.label,
        rule: base.rule,
        offset: base.offset + r,
        values: AmplitudeValues::Exact(shifted),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        let phi = airy_phi(2);
        assert_eq!(phi.exact_values().unwrap(), &[ri(-1), rat(1, 2), rat(5, 8)]);
        let f = stair_f(1);
        assert_eq!(f.exact_values().unwrap(), &[rat(-1, 2), rat(1, 16)]);
        let w = meander_omega(1);
        assert_eq!(w.exact_value(1), Some(&rat(3, 4)));
        let h = dirconvex_h(1);
        assert_eq!(h.exact_value(1), Some(&rat(3, 128)));
        assert_eq!(rectangle_f(5), ri(120));
    }

    #[test]
    fn csv_header_and_fraction() {
        let csv = airy_phi(1).to_csv();
        assert_eq!(csv, "label,k,gamma_k,value\nphi,0,-1/2,-1/1\nphi,1,1/1,1/2\n");
    }

    #[test]
    fn laurent_low_orders() {
        let a = staircase_laurent_amplitudes(3);
        assert_eq!(a, stair_values(3));
    }
}
