//! q-difference equations of the polygon models: exact series, factorial
//! moment generating functions and numeric evaluation of `P(x,q)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::engine::{Engine, EngineError, NodeId};
use crate::model::{ModelSpec, PolygonClass};
use crate::ring::{Graded, JetRing, NumRing, PolyRing, Ring};
use crate::series::{PowerSeries, QPoly, QPolynomialSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QFuncError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("expression uses `{0}`, which this equation form does not support")]
    Unsupported(&'static str),
    #[error("(x, q) = ({x}, {q}) is outside the convergence region")]
    Divergent { x: f64, q: f64 },
    #[error("tail bound {bound:e} not achievable at tolerance {tol:e}")]
    TailNotAchievable { bound: f64, tol: f64 },
    #[error("series order {have} too small, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Expression over `x`, `y`, `q` and shifted unknowns `P_u(q^i x, q^j y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    X,
    Y,
    Q,
    Int(i64),
    P { unknown: usize, x_shift: u32, y_shift: u32 },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// `P_u(q^i x)` in a one-variable equation.
    pub fn p(unknown: usize, i: u32) -> Expr {
        Expr::P { unknown, x_shift: i, y_shift: 0 }
    }

    /// `P_u(q^i x, q^j y)`.
    pub fn p2(unknown: usize, i: u32, j: u32) -> Expr {
        Expr::P { unknown, x_shift: i, y_shift: j }
    }

    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    pub fn pow(self, e: u32) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    /// Largest `x`-shift applied to `unknown`.
    pub fn max_shift(&self, unknown: usize) -> u32 {
        match self {
            Expr::P { unknown: u, x_shift, y_shift } if *u == unknown => (*x_shift).max(*y_shift),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_shift(unknown).max(b.max_shift(unknown))
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_shift(unknown),
            _ => 0,
        }
    }

    fn uses_y(&self) -> bool {
        match self {
            Expr::Y => true,
            Expr::P { y_shift, .. } => *y_shift > 0,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.uses_y() || b.uses_y(),
            Expr::Neg(a) | Expr::Pow(a, _) => a.uses_y(),
            _ => false,
        }
    }

    fn refs(&self, out: &mut Vec<(usize, u32, u32)>) {
        match self {
            Expr::P { unknown, x_shift, y_shift } => out.push((*unknown, *x_shift, *y_shift)),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.refs(out);
                b.refs(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.refs(out),
            _ => {}
        }
    }

    /// Numeric value; `None` signals a nonpositive denominator.
    fn eval_f64(&self, x: f64, y: f64, q: f64, p: &dyn Fn(usize, u32, u32) -> f64) -> Option<f64> {
        Some(match self {
            Expr::X => x,
            Expr::Y => y,
            Expr::Q => q,
            Expr::Int(v) => *v as f64,
            Expr::P { unknown, x_shift, y_shift } => p(*unknown, *x_shift, *y_shift),
            Expr::Add(a, b) => a.eval_f64(x, y, q, p)? + b.eval_f64(x, y, q, p)?,
            Expr::Sub(a, b) => a.eval_f64(x, y, q, p)? - b.eval_f64(x, y, q, p)?,
            Expr::Mul(a, b) => a.eval_f64(x, y, q, p)? * b.eval_f64(x, y, q, p)?,
            Expr::Div(a, b) => {
                let d = b.eval_f64(x, y, q, p)?;
                if !(d > 0.0) {
                    return None;
                }
                a.eval_f64(x, y, q, p)? / d
            }
            Expr::Neg(a) => -a.eval_f64(x, y, q, p)?,
            Expr::Pow(a, e) => a.eval_f64(x, y, q, p)?.powi(*e as i32),
        })
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $v:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
        impl ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $f(self, rhs: i64) -> Expr {
                Expr::$v(Box::new(self), Box::new(Expr::Int(rhs)))
            }
        }
        impl ops::$tr<Expr> for i64 {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(Expr::Int(self)), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::X => write!(f, "x"),
            Expr::Y => write!(f, "y"),
            Expr::Q => write!(f, "q"),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::P { unknown, x_shift, y_shift } => {
                let name = ["P", "Q", "R", "S"].get(*unknown).copied().unwrap_or("U");
                let arg = |s: u32, v: &str| match s {
                    0 => v.to_string(),
                    1 => format!("q{v}"),
                    k => format!("q^{k}{v}"),
                };
                write!(f, "{name}({}", arg(*x_shift, "x"))?;
                if *y_shift > 0 {
                    write!(f, ",{}", arg(*y_shift, "y"))?;
                }
                write!(f, ")")
            }
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/{b}"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Pow(a, e) => write!(f, "{a}^{e}"),
        }
    }
}

/// One defining equation `P_u = expr` with `P_u = O(t^valuation)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub expr: Expr,
    pub valuation: usize,
}

/// A system of q-difference equations; `target` is the generating function of the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalEquationSpec {
    pub class: Option<PolygonClass>,
    pub equations: Vec<Equation>,
    pub target: usize,
    /// Whether the system distinguishes `x` (width) from `y` (height).
    pub bivariate: bool,
    /// When bivariate, the target is read off at `y = x`.
    pub isotropic_target: bool,
}

impl FunctionalEquationSpec {
    /// Highest shift of the target in its own equation.
    pub fn arity(&self) -> u32 {
        self.equations[self.target].expr.max_shift(self.target)
    }

    pub fn rule(&self) -> String {
        let names = ["P", "Q", "R", "S"];
        self.equations
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{} = {}", names.get(i).copied().unwrap_or("U"), e.expr))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn x() -> Expr {
    Expr::X
}
fn y() -> Expr {
    Expr::Y
}
fn q() -> Expr {
    Expr::Q
}

/// The anisotropic staircase equation `P = xyq/(1 − xq − yq − P(qx,qy))`.
pub fn staircase_anisotropic_equation() -> FunctionalEquationSpec {
    let p = x() * y() * q() / (1 - x() * q() - y() * q() - Expr::p2(0, 1, 1));
    FunctionalEquationSpec {
        class: Some(PolygonClass::Staircase),
        equations: vec![Equation { expr: p, valuation: 2 }],
        target: 0,
        bivariate: true,
        isotropic_target: false,
    }
}

/// Built-in equation of a class.
pub fn builtin_equation(class: PolygonClass) -> FunctionalEquationSpec {
    let single = |expr: Expr| FunctionalEquationSpec {
        class: Some(class),
        equations: vec![Equation { expr, valuation: 2 }],
        target: 0,
        bivariate: false,
        isotropic_target: false,
    };
    match class {
        PolygonClass::Rectangles => {
            single(x().pow(2) * q() * Expr::p(0, 1) + x().pow(2) * q() * (1 + q() * x()) / (1 - q() * x()))
        }
        PolygonClass::Squares => single(x().pow(2) * q() * (1 + Expr::p(0, 1))),
        PolygonClass::Ferrers => single(q() * x().pow(2) / (1 - q() * x()).pow(2) * (Expr::p(0, 1) + 1)),
        PolygonClass::Staircase => single(x().pow(2) * q() / (1 - 2 * x() * q() - Expr::p(0, 1))),
        PolygonClass::DirectedConvex => {
            let p = || Expr::p2(0, 0, 0);
            let stair = staircase_anisotropic_equation().equations.remove(0);
            let rhs = (1 + q()) * (p() + y()) * Expr::p2(1, 1, 0)
                + (x() * y() * q() - y().pow(2) + p() * (q() * x() - y() - 1)) * Expr::p2(1, 2, 0)
                - q().pow(2) * x() * y() * (y() + p() - 1);
            let qeq = rhs / (q() * (1 - q() * x()));
            FunctionalEquationSpec {
                class: Some(class),
                equations: vec![stair, Equation { expr: qeq, valuation: 2 }],
                target: 1,
                bivariate: true,
                isotropic_target: true,
            }
        }
    }
}

struct Compiled<R: Ring> {
    engine: Engine<R>,
}

fn compile<R: Ring>(spec: &FunctionalEquationSpec, ring: R) -> Result<Compiled<R>, QFuncError> {
    if !spec.bivariate && spec.equations.iter().any(|e| e.expr.uses_y()) {
        return Err(QFuncError::Unsupported("y"));
    }
    let mut engine = Engine::new(ring);
    let mut unknowns = Vec::new();
    for eq in &spec.equations {
        unknowns.push(engine.unknown(eq.valuation));
    }
    let mut memo: HashMap<(usize, u32, u32), NodeId> = HashMap::new();
    for (u, eq) in spec.equations.iter().enumerate() {
        let root = build(&eq.expr, &mut engine, &unknowns, &mut memo, spec.bivariate)?;
        engine.set_root(unknowns[u].0, root);
    }
    Ok(Compiled { engine })
}

fn build<R: Ring>(
    e: &Expr,
    eng: &mut Engine<R>,
    unknowns: &[(usize, NodeId)],
    memo: &mut HashMap<(usize, u32, u32), NodeId>,
    bivariate: bool,
) -> Result<NodeId, QFuncError> {
    let node = match e {
        Expr::X => {
            let c = if bivariate {
                eng.ring().width_marker().map_err(|_| QFuncError::Unsupported("width marker"))?
            } else {
                eng.ring().from_int(1)
            };
            eng.mono(1, c)
        }
        Expr::Y => {
            let one = eng.ring().from_int(1);
            eng.mono(1, one)
        }
        Expr::Q => {
            let c = eng.ring().q();
            eng.mono(0, c)
        }
        Expr::Int(v) => {
            let c = eng.ring().from_int(*v);
            eng.mono(0, c)
        }
        Expr::P { unknown, x_shift, y_shift } => {
            let key = (*unknown, *x_shift, *y_shift);
            if let Some(&id) = memo.get(&key) {
                return Ok(id);
            }
            let base = unknowns
                .get(*unknown)
                .ok_or(QFuncError::InvalidArgument(format!("unknown {unknown} has no equation")))?
                .1;
            let id = if bivariate {
                eng.shift(base, *y_shift as u64, *x_shift as i64 - *y_shift as i64)
            } else {
                eng.shift(base, *x_shift as u64, 0)
            };
            memo.insert(key, id);
            id
        }
        Expr::Add(a, b) => {
            let (a, b) = (build(a, eng, unknowns, memo, bivariate)?, build(b, eng, unknowns, memo, bivariate)?);
            eng.add(a, b)
        }
        Expr::Sub(a, b) => {
            let (a, b) = (build(a, eng, unknowns, memo, bivariate)?, build(b, eng, unknowns, memo, bivariate)?);
            eng.sub(a, b)
        }
        Expr::Mul(a, b) => {
            let (a, b) = (build(a, eng, unknowns, memo, bivariate)?, build(b, eng, unknowns, memo, bivariate)?);
            eng.mul(a, b)
        }
        Expr::Div(a, b) => {
            let (a, b) = (build(a, eng, unknowns, memo, bivariate)?, build(b, eng, unknowns, memo, bivariate)?);
            eng.div(a, b)?
        }
        Expr::Neg(a) => {
            let a = build(a, eng, unknowns, memo, bivariate)?;
            eng.neg(a)
        }
        Expr::Pow(a, k) => {
            let base = build(a, eng, unknowns, memo, bivariate)?;
            let one = eng.ring().from_int(1);
            let mut acc = eng.mono(0, one);
            for _ in 0..*k {
                acc = eng.mul(acc, base);
            }
            acc
        }
    };
    Ok(node)
}

/// Coefficients of the target in ring `R`, with the width marker set to 1
/// for isotropic targets of bivariate systems.
fn solve_in<R: Ring>(spec: &FunctionalEquationSpec, ring: R, order: usize) -> Result<Vec<R::E>, QFuncError> {
    if spec.bivariate {
        let graded = Graded { inner: ring, max_w: order };
        let mut c = compile(spec, graded.clone())?;
        let coeffs = c.engine.solve(spec.target, order)?;
        if spec.isotropic_target {
            Ok(coeffs.iter().map(|e| graded.specialize(e)).collect())
        } else {
            Err(QFuncError::Unsupported("anisotropic target without specialization"))
        }
    } else {
        let mut c = compile(spec, ring)?;
        Ok(c.engine.solve(spec.target, order)?)
    }
}

/// Exact `p_m(q)` for `m ≤ order`.
pub fn iterate_series(spec: &FunctionalEquationSpec, order: usize) -> Result<QPolynomialSeries, QFuncError> {
    iterate_series_truncated(spec, order, None)
}

/// Like [`iterate_series`] with every `p_m(q)` truncated above `q^max_deg`.
pub fn iterate_series_truncated(
    spec: &FunctionalEquationSpec,
    order: usize,
    max_deg: Option<usize>,
) -> Result<QPolynomialSeries, QFuncError> {
    let coeffs = solve_in(spec, PolyRing { max_deg }, order)?;
    Ok(QPolynomialSeries {
        order,
        coeffs: coeffs
            .into_iter()
            .map(|c| {
                let mut p = QPoly(c);
                p.trim();
                p
            })
            .collect(),
        q_truncation: max_deg,
    })
}

/// Width/height refined coefficients of a bivariate target: entry `[m][w]` is
/// the polynomial in `q` of polygons with half-perimeter `m` and width `w`.
pub fn iterate_series_bivariate(spec: &FunctionalEquationSpec, order: usize) -> Result<Vec<Vec<QPoly>>, QFuncError> {
    if !spec.bivariate {
        return Err(QFuncError::Unsupported("bivariate refinement of a one-variable equation"));
    }
    let graded = Graded { inner: PolyRing { max_deg: None }, max_w: order };
    let mut c = compile(spec, graded)?;
    let coeffs = c.engine.solve(spec.target, order)?;
    Ok(coeffs.into_iter().map(|row| row.into_iter().map(QPoly).collect()).collect())
}

fn jets(spec: &FunctionalEquationSpec, k: usize, order: usize) -> Result<Vec<Vec<BigInt>>, QFuncError> {
    solve_in(spec, JetRing { k }, order)
}

/// `g_k(x)` to order `x^order`.
pub fn moment_pump(spec: &FunctionalEquationSpec, k: usize, order: usize) -> Result<PowerSeries, QFuncError> {
    Ok(moment_pump_all(spec, k, order)?.pop().expect("k+1 series"))
}

/// `g_0, …, g_k` from a single jet computation.
pub fn moment_pump_all(spec: &FunctionalEquationSpec, k: usize, order: usize) -> Result<Vec<PowerSeries>, QFuncError> {
    let j = jets(spec, k, order)?;
    Ok((0..=k)
        .map(|i| PowerSeries::new(order, j.iter().map(|c| BigRational::from_integer(c[i].clone())).collect()))
        .collect())
}

/// `S_{j,n} = Σ_m m^j p_{m,n}` for `n ≤ n_max`, as a series in `q`.
pub fn area_ensemble_series(spec: &FunctionalEquationSpec, j: u32, n_max: usize) -> Result<PowerSeries, QFuncError> {
    let series = iterate_series_truncated(spec, n_max + 1, Some(n_max))?;
    area_ensemble_from(&series, j, n_max)
}

/// Same as [`area_ensemble_series`] from precomputed coefficients.
pub fn area_ensemble_from(series: &QPolynomialSeries, j: u32, n_max: usize) -> Result<PowerSeries, QFuncError> {
    if j > 2 {
        return Err(QFuncError::InvalidArgument(format!("perimeter moment order {j} > 2")));
    }
    if series.order < n_max + 1 {
        return Err(QFuncError::InsufficientOrder { have: series.order, need: n_max + 1 });
    }
    if let Some(d) = series.q_truncation {
        if d < n_max {
            return Err(QFuncError::InsufficientOrder { have: d, need: n_max });
        }
    }
    let mut s = vec![BigInt::zero(); n_max + 1];
    for (m, p) in series.coeffs.iter().enumerate().take(n_max + 2) {
        let w = BigInt::from(m).pow(j);
        for (n, c) in p.0.iter().enumerate().take(n_max + 1) {
            if !c.is_zero() {
                s[n] += &w * c;
            }
        }
    }
    Ok(PowerSeries::new(n_max, s.into_iter().map(BigRational::from_integer).collect()))
}

/// Evaluation strategy for [`evaluate_p_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalRoute {
    /// `Σ_m p_m(q) x^m` with a geometric tail bound from the row-sum growth.
    Series,
    /// Backward iteration of the equation from deep shifts `q^k x`.
    Numeric,
}

const SERIES_MAX_ORDER: usize = 1200;

/// Bound on `Σ_{m>order} p_m(q) x^m`, `None` outside the geometric region.
pub fn series_tail_bound(class: PolygonClass, x: f64, q: f64, order: usize) -> Option<f64> {
    let r = q * x;
    let m1 = (order + 1) as f64;
    match class {
        PolygonClass::Rectangles => {
            if r >= 1.0 {
                return None;
            }
            // Σ_{m>M} (m−1) r^m / q
            Some(r.powf(m1) * ((m1 - 1.0) / (1.0 - r) + r / ((1.0 - r) * (1.0 - r))) / q)
        }
        PolygonClass::Ferrers => {
            if 2.0 * r >= 1.0 {
                return None;
            }
            Some((2.0 * r).powf(m1) / (1.0 - 2.0 * r) / (4.0 * q))
        }
        PolygonClass::Staircase | PolygonClass::DirectedConvex => {
            if 4.0 * r >= 1.0 {
                return None;
            }
            Some((4.0 * r).powf(m1) / (1.0 - 4.0 * r) / (16.0 * q))
        }
        PolygonClass::Squares => {
            if x >= 1.0 {
                return None;
            }
            let mut m = order + 1;
            if m % 2 == 1 {
                m += 1;
            }
            let mf = m as f64;
            let term = x.powf(mf) * q.powf(mf * mf / 4.0);
            let ratio = x * x * q.powf(mf + 1.0);
            Some(term / (1.0 - ratio))
        }
    }
}

/// `P(x,q)` with absolute error at most `tol`, choosing the route automatically.
pub fn evaluate_p(spec: &FunctionalEquationSpec, x: f64, q: f64, tol: f64) -> Result<f64, QFuncError> {
    let series_ok = spec.class.is_some_and(|c| {
        (0..=SERIES_MAX_ORDER / 4).step_by(25).any(|m| series_tail_bound(c, x, q, m).is_some_and(|b| b <= tol / 2.0))
    });
    if series_ok {
        evaluate_p_with(spec, x, q, tol, EvalRoute::Series)
    } else {
        evaluate_p_with(spec, x, q, tol, EvalRoute::Numeric)
    }
}

fn check_args(x: f64, q: f64, tol: f64) -> Result<(), QFuncError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(QFuncError::InvalidArgument(format!("q = {q} must lie in (0,1)")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(QFuncError::InvalidArgument(format!("x = {x} must be nonnegative")));
    }
    if !(tol > 0.0) {
        return Err(QFuncError::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    Ok(())
}

pub fn evaluate_p_with(
    spec: &FunctionalEquationSpec,
    x: f64,
    q: f64,
    tol: f64,
    route: EvalRoute,
) -> Result<f64, QFuncError> {
    check_args(x, q, tol)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    match route {
        EvalRoute::Series => {
            let class = spec.class.ok_or(QFuncError::Unsupported("series route without a model class"))?;
            let mut order = None;
            let mut last = f64::INFINITY;
            for m in 0..=SERIES_MAX_ORDER {
                match series_tail_bound(class, x, q, m) {
                    None => return Err(QFuncError::Divergent { x, q }),
                    Some(b) => {
                        last = b;
                        if b <= tol / 2.0 {
                            order = Some(m);
                            break;
                        }
                    }
                }
            }
            let order = order.ok_or(QFuncError::TailNotAchievable { bound: last, tol })?;
            let c = solve_in(spec, NumRing { q }, order)?;
            let v = c.iter().rev().fold(0.0, |acc, a| acc * x + a);
            if !v.is_finite() {
                return Err(QFuncError::Divergent { x, q });
            }
            Ok(v)
        }
        EvalRoute::Numeric => {
            let y = x;
            let coarse = numeric_fixed_point(spec, x, y, q, (tol * 1e-3).min(1e-12))?;
            let fine = numeric_fixed_point(spec, x, y, q, (tol * 1e-7).min(1e-16))?;
            if (coarse - fine).abs() > tol / 2.0 {
                return Err(QFuncError::TailNotAchievable { bound: (coarse - fine).abs(), tol });
            }
            Ok(fine)
        }
    }
}

/// `P(x, y, q)` of a bivariate system's target by backward iteration.
pub fn evaluate_p_bivariate(
    spec: &FunctionalEquationSpec,
    x: f64,
    y: f64,
    q: f64,
    tol: f64,
) -> Result<f64, QFuncError> {
    check_args(x, q, tol)?;
    check_args(y, q, tol)?;
    if !spec.bivariate {
        return Err(QFuncError::Unsupported("bivariate evaluation of a one-variable equation"));
    }
    let coarse = numeric_fixed_point(spec, x, y, q, (tol * 1e-3).min(1e-12))?;
    let fine = numeric_fixed_point(spec, x, y, q, (tol * 1e-7).min(1e-16))?;
    if (coarse - fine).abs() > tol / 2.0 {
        return Err(QFuncError::TailNotAchievable { bound: (coarse - fine).abs(), tol });
    }
    Ok(fine)
}

/// Value of the target at `(x, y)`; unknowns at shifted points whose
/// `x'·y'` falls below `delta` are set to zero.
fn numeric_fixed_point(spec: &FunctionalEquationSpec, x: f64, y: f64, q: f64, delta: f64) -> Result<f64, QFuncError> {
    let lq = q.ln();
    let point = |i: u32, j: u32| -> (f64, f64) { (x * (lq * i as f64).exp(), y * (lq * j as f64).exp()) };
    let norm = |i: u32, j: u32| if spec.bivariate { (i, j) } else { (i, i) };
    type Key = (usize, u32, u32);
    let mut memo: HashMap<Key, f64> = HashMap::new();
    let mut expanding: HashSet<Key> = HashSet::new();
    let start = (spec.target, 0, 0);
    let mut stack = vec![start];
    let mut refs = Vec::new();
    while let Some(&key) = stack.last() {
        if memo.contains_key(&key) {
            stack.pop();
            continue;
        }
        let (u, i, j) = key;
        let (xv, yv) = point(i, j);
        if xv * yv < delta {
            memo.insert(key, 0.0);
            stack.pop();
            continue;
        }
        refs.clear();
        spec.equations[u].expr.refs(&mut refs);
        let mut missing = false;
        for &(u2, di, dj) in &refs {
            let (a, b) = norm(i + di, if spec.bivariate { j + dj } else { j + di });
            let k2 = (u2, a, b);
            if !memo.contains_key(&k2) {
                if k2 == key || expanding.contains(&k2) {
                    return Err(EngineError::NonContractive { unknown: u2, index: 0 }.into());
                }
                stack.push(k2);
                missing = true;
            }
        }
        if missing {
            expanding.insert(key);
            continue;
        }
        expanding.remove(&key);
        let lookup = |u2: usize, di: u32, dj: u32| {
            let (a, b) = norm(i + di, if spec.bivariate { j + dj } else { j + di });
            memo[&(u2, a, b)]
        };
        let v = spec.equations[u].expr.eval_f64(xv, yv, q, &lookup).ok_or(QFuncError::Divergent { x, q })?;
        if !v.is_finite() || v < 0.0 {
            return Err(QFuncError::Divergent { x, q });
        }
        memo.insert(key, v);
        stack.pop();
    }
    Ok(memo[&start])
}

/// The model's equation, but with the row-sum bound of its class for tolerance checks.
pub fn model_spec(spec: &FunctionalEquationSpec) -> Option<ModelSpec> {
    spec.class.map(ModelSpec::of)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> QPoly {
        QPoly::from_coeffs(c.iter().copied())
    }

    #[test]
    fn staircase_first_coefficients() {
        let s = iterate_series(&builtin_equation(PolygonClass::Staircase), 4).unwrap();
        assert_eq!(s.coeff(2), poly(&[0, 1]));
        assert_eq!(s.coeff(3), poly(&[0, 0, 2]));
        assert_eq!(s.coeff(4), poly(&[0, 0, 0, 4, 1]));
    }

    #[test]
    fn rectangles_first_coefficients() {
        let s = iterate_series(&builtin_equation(PolygonClass::Rectangles), 3).unwrap();
        assert_eq!(s.coeff(2), poly(&[0, 1]));
        assert_eq!(s.coeff(3), poly(&[0, 0, 2]));
    }

    #[test]
    fn zero_order_is_zero() {
        for c in PolygonClass::ALL {
            let s = iterate_series(&builtin_equation(c), 0).unwrap();
            assert!(s.coeff(0).is_zero());
        }
    }

    #[test]
    fn arity_and_rule() {
        let st = builtin_equation(PolygonClass::Staircase);
        assert_eq!(st.arity(), 1);
        assert!(st.rule().contains("P(qx)"));
        assert_eq!(builtin_equation(PolygonClass::DirectedConvex).arity(), 2);
    }

    #[test]
    fn staircase_g1_is_geometric() {
        let g1 = moment_pump(&builtin_equation(PolygonClass::Staircase), 1, 5).unwrap();
        let want = [0, 0, 1, 4, 16, 64];
        for (m, w) in want.iter().enumerate() {
            assert_eq!(g1.coeff(m), BigRational::from_integer((*w).into()));
        }
    }

    #[test]
    fn non_contractive_detection() {
        let bad = FunctionalEquationSpec {
            class: None,
            equations: vec![Equation { expr: Expr::X + Expr::p(0, 0), valuation: 1 }],
            target: 0,
            bivariate: false,
            isotropic_target: false,
        };
        assert!(matches!(iterate_series(&bad, 3), Err(QFuncError::Engine(EngineError::NonContractive { .. }))));
    }

    #[test]
    fn evaluate_at_zero() {
        for c in PolygonClass::ALL {
            assert_eq!(evaluate_p(&builtin_equation(c), 0.0, 0.5, 1e-12).unwrap(), 0.0);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let st = builtin_equation(PolygonClass::Staircase);
        assert!(matches!(evaluate_p_with(&st, 0.6, 0.9, 1e-10, EvalRoute::Series), Err(QFuncError::Divergent { .. })));
        assert!(matches!(evaluate_p_with(&st, 0.6, 0.9, 1e-10, EvalRoute::Numeric), Err(QFuncError::Divergent { .. })));
    }
}
