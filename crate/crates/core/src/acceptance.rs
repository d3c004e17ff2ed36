//! Acceptance checks, one function per criterion, shared by the test suite and the CLI.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::amplitudes::{airy_phi, dirconvex_h, general_f0_f1, meander_omega, stair_f, QDiffAnalysis};
use crate::enumerate::{dyck_peak_area_counts, enumerate_counts, factorial_area_moment};
use crate::extrapolate::estimate_growth;
use crate::hp::Precision;
use crate::limitlaws::*;
use crate::qfunc::{area_ensemble_series, builtin_equation, iterate_series, moment_pump, moment_pump_all};
use crate::scaling::*;
use crate::series::PowerSeries;
use crate::specialfn::phi_via_integral;
use crate::PolygonClass;

/// Detail line on success, reason on failure.
pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

fn oracle_equivalence() -> Outcome {
    for class in PolygonClass::ALL {
        let table = enumerate_counts(class, 14).map_err(|e| e.to_string())?;
        let s = iterate_series(&builtin_equation(class), 14).map_err(|e| e.to_string())?;
        for m in 0..=14u32 {
            let p = s.coeff(m as usize);
            let top = p.degree().unwrap_or(0).max(table.row(m).last().map(|r| r.0 as usize).unwrap_or(0));
            for n in 0..=top {
                ensure!(p.coeff(n) == BigInt::from(table.get(m, n as u64)), "{class} m={m} n={n}");
            }
        }
    }
    Ok("five models, m ≤ 14, every (m, n)".into())
}

fn row_sums() -> Outcome {
    let st = enumerate_counts(PolygonClass::Staircase, 18).map_err(|e| e.to_string())?;
    for m in 2..=18u64 {
        // C_{m−1} = binom(2m−2, m−1)/m
        ensure!(st.row_sum(m as u32) == binom(2 * m - 2, m - 1) / BigUint::from(m), "staircase m={m}");
    }
    let dc = enumerate_counts(PolygonClass::DirectedConvex, 14).map_err(|e| e.to_string())?;
    for m in 2..=14u64 {
        ensure!(dc.row_sum(m as u32) == binom(2 * m - 4, m - 2), "directed convex m={m}");
    }
    let fe = enumerate_counts(PolygonClass::Ferrers, 20).map_err(|e| e.to_string())?;
    for m in 2..=20u32 {
        ensure!(fe.row_sum(m) == BigUint::one() << (m - 2) as usize, "ferrers m={m}");
    }
    Ok("Catalan, central binomial and 2^{m−2} row sums".into())
}

fn dyck_bijection() -> Outcome {
    let d = dyck_peak_area_counts(14).map_err(|e| e.to_string())?;
    let s = enumerate_counts(PolygonClass::Staircase, 14).map_err(|e| e.to_string())?;
    let a: Vec<_> = d.entries().map(|(m, n, c)| (m, n, c.clone())).collect();
    let b: Vec<_> = s.entries().map(|(m, n, c)| (m, n, c.clone())).collect();
    ensure!(a == b, "peak-height table differs from the staircase table");
    Ok(format!("{} (m, n) cells identical", a.len()))
}

fn closed_form(num: &[i64], shift: usize, pole: u32, order: usize) -> PowerSeries {
    let mut c = vec![0i64; shift];
    c.extend_from_slice(num);
    let n = PowerSeries::from_ints(order, &c);
    let den = PowerSeries::from_ints(order, &[1, -1]).pow(pole);
    n.div(&den).expect("unit constant term")
}

fn moment_pumping() -> Outcome {
    for class in PolygonClass::ALL {
        let table = enumerate_counts(class, 14).map_err(|e| e.to_string())?;
        let g = moment_pump_all(&builtin_equation(class), 4, 14).map_err(|e| e.to_string())?;
        for (k, gk) in g.iter().enumerate() {
            for m in 1..=14u32 {
                let want = factorial_area_moment(&table, m, k as u32).map_err(|e| e.to_string())?;
                ensure!(gk.coeff(m as usize) == want, "{class} k={k} m={m}");
            }
        }
    }
    let spec = builtin_equation(PolygonClass::Rectangles);
    let forms = [
        (2, closed_form(&[2], 3, 6, 20)),
        (3, closed_form(&[6], 4, 8, 20)),
        (4, closed_form(&[1, 22, 1], 4, 10, 20)),
        (5, closed_form(&[12, 96, 12], 5, 12, 20)),
    ];
    for (k, want) in forms {
        let g = moment_pump(&spec, k, 20).map_err(|e| e.to_string())?;
        ensure!(g == want, "rectangles g_{k} differs from its closed form");
    }
    Ok("k ≤ 4 against enumeration; rectangle g_2..g_5 closed forms to order 20".into())
}

fn rectangles_law() -> Outcome {
    let m = 400u32;
    let table = enumerate_counts(PolygonClass::Rectangles, m).map_err(|e| e.to_string())?;
    let raw = raw_moments_from_table(&table, m, 5).map_err(|e| e.to_string())?;
    // exact mean Σ l(m−l)/(m−1)
    let mean: BigRational = (1..m as i64).map(|l| rat(l * (m as i64 - l), m as i64 - 1)).sum();
    ensure!(raw[1] == mean, "mean differs from Σ l(m−l)/(m−1)");
    let m2 = f(&rat(m as i64 * m as i64, 1));
    let e_mean = (6.0 * f(&mean) / m2 - 1.0).abs();
    let var = &raw[2] - &raw[1] * &raw[1];
    let e_var = (180.0 * f(&var) / (m2 * m2) - 1.0).abs();
    ensure!(e_mean <= 0.02 && e_var <= 0.05, "mean error {e_mean:.4}, variance error {e_var:.4}");
    let mut worst: f64 = 0.0;
    for k in 1..=5u32 {
        let emp = f(&raw[k as usize]) * (4.0 / m2).powi(k as i32);
        let law = law_moment(&LimitLaw::BetaHalf, k).to_f64();
        worst = worst.max(((emp - law) / law).abs());
    }
    ensure!(worst <= 0.02, "normalized moment error {worst:.4}");
    Ok(format!("mean {e_mean:.2e}, variance {e_var:.2e}, moments k ≤ 5 {worst:.2e}"))
}

fn airy_cross_check() -> Outcome {
    let phi = airy_phi(6);
    let mut worst: f64 = 0.0;
    for k in 1..=6u32 {
        let a = phi.value_f64(k).ok_or("missing value")?;
        let b = phi_via_integral(k).map_err(|e| e.to_string())?.to_f64();
        worst = worst.max((a - b).abs());
    }
    ensure!(worst < 1e-7, "max difference {worst:e}");
    Ok(format!("max |recursion − integral| = {worst:.1e}"))
}

fn first_moments() -> Outcome {
    let y = law_moment(&LimitLaw::Airy, 1).to_f64();
    let z = law_moment(&LimitLaw::Meander, 1).to_f64();
    let (ey, ez) = ((y - PI.sqrt()).abs(), (z - 3.0 * (2.0 * PI).sqrt() / 8.0).abs());
    ensure!(ey < 1e-12 && ez < 1e-12, "E[Y] error {ey:e}, E[Z] error {ez:e}");
    let exact = law_moment(&LimitLaw::Airy, 1);
    Ok(format!("E[Y] = {}, E[Z] = {}", exact.exact().unwrap(), law_moment(&LimitLaw::Meander, 1).exact().unwrap()))
}

fn laplace() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [1.0, 2.0] {
        let (l, r) = airy_laplace_identity(s).map_err(|e| e.to_string())?;
        worst = worst.max((l.value - r).abs());
    }
    for s in [1.5, 2.0, 3.0] {
        let (l, r) = meander_laplace_identity(s).map_err(|e| e.to_string())?;
        worst = worst.max((l.value - r).abs());
    }
    ensure!(worst < 1e-6, "max |lhs − rhs| = {worst:e}");
    Ok(format!("max |lhs − rhs| = {worst:.1e}"))
}

fn staircase_airy() -> Outcome {
    let ms = [6u32, 8, 10, 12, 14];
    let table = enumerate_counts(PolygonClass::Staircase, 14).map_err(|e| e.to_string())?;
    let rep = compare_moments(&table, &LimitLaw::Airy, &ms, 2).map_err(|e| e.to_string())?;
    let target = universal_ratio(2).to_f64();
    let e2: Vec<f64> = rep.rows_for_k(2).iter().map(|r| (r.empirical - target).abs()).collect();
    ensure!(e2.windows(2).all(|w| w[1] < w[0]), "k=2 errors not decreasing: {e2:?}");
    // k = 1 in the scaled convention 4E[X̃_m]/m^{3/2} → √π
    let e1: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let raw = raw_moments_from_table(&table, m, 1).unwrap();
            (4.0 * f(&raw[1]) / (m as f64).powf(1.5) - PI.sqrt()).abs()
        })
        .collect();
    ensure!(e1.windows(2).all(|w| w[1] < w[0]), "k=1 errors not decreasing: {e1:?}");
    let acc = accelerate_column(&rep, 2, 0.5).map_err(|e| e.to_string())?;
    let last = acc.last().ok_or("empty acceleration")?.1;
    let rel = ((last - target) / target).abs();
    ensure!(rel <= 0.05, "accelerated k=2 ratio {last} is {rel:.3} from 10/(3π)");
    Ok(format!("errors decrease for k = 1, 2; accelerated ratio {last:.5} ({:.2}% off)", 100.0 * rel))
}

fn ferrers_concentration() -> Outcome {
    let m = 200u32;
    let gks = moment_pump_all(&builtin_equation(PolygonClass::Ferrers), 2, m as usize).map_err(|e| e.to_string())?;
    let raw = raw_moments_from_series(&gks, m, 2).map_err(|e| e.to_string())?;
    let mf = m as f64;
    let mean = f(&raw[1]) / (mf * mf);
    let var = f(&(&raw[2] - &raw[1] * &raw[1])) / mf.powi(3);
    let (em, ev) = ((mean * 8.0 - 1.0).abs(), (var * 48.0 - 1.0).abs());
    ensure!(em <= 0.02 && ev <= 0.10, "mean error {em:.4}, variance error {ev:.4}");
    Ok(format!("E/m² = {mean:.5}, Var/m³ = {var:.5}"))
}

fn fixed_area_gaussian() -> Outcome {
    let spec = builtin_equation(PolygonClass::Staircase);
    let s: Vec<_> =
        (0..=2).map(|j| area_ensemble_series(&spec, j, 128)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let g = gaussian_fixed_area_check(&s[0], &s[1], &s[2], 128).map_err(|e| e.to_string())?;
    let (em, es) = ((g.mu_limit - 0.841_762_015_6).abs(), (g.sigma2_limit - 0.179_95).abs());
    ensure!(em <= 1e-2 && es <= 5e-2, "μ = {}, σ² = {}", g.mu_limit, g.sigma2_limit);
    Ok(format!("μ = {:.10}, σ² = {:.6}", g.mu_limit, g.sigma2_limit))
}

fn squares_scaling_bound() -> Outcome {
    let mut n = 0;
    for q in [0.9, 0.99, 0.999] {
        for x in [0.9, 0.99, 0.999] {
            let d = squares_direct(x, q).map_err(|e| e.to_string())?;
            let a = squares_scaling(x, q).map_err(|e| e.to_string())?;
            ensure!((d.value - a.approx).abs() + d.tail_bound <= a.remainder_bound, "bound fails at x={x}, q={q}");
            n += 1;
        }
    }
    Ok(format!("|P − approx| ≤ |log x|/6 at {n} points"))
}

fn rectangles_scaling_bound() -> Outcome {
    let mut n = 0;
    for q in [0.9, 0.95, 0.99] {
        for x in [0.5, 0.9, 0.99] {
            let d = rectangles_direct(x, q).map_err(|e| e.to_string())?;
            let a = rectangles_scaling(x, q).map_err(|e| e.to_string())?;
            ensure!((d.value - a.approx).abs() + d.tail_bound <= a.remainder_bound, "bound fails at x={x}, q={q}");
            n += 1;
        }
    }
    Ok(format!("remainder bound holds at {n} points"))
}

fn staircase_scaling() -> Outcome {
    let t = scaling_error_scan(PolygonClass::Staircase, &[0.5, 1.0, 2.0], &[1e-1, 1e-2, 1e-3])
        .map_err(|e| e.to_string())?;
    ensure!(t.decreasing_in_eps(), "error not decreasing in ε");
    let worst = t.rows.iter().filter(|r| r.eps == 1e-3).map(|r| r.rel_error).fold(0.0, f64::max);
    ensure!(worst <= 0.03, "relative error {worst:.4} at ε = 1e-3");
    Ok(format!("decreasing in ε; max relative error {:.2}% at ε = 1e-3", 100.0 * worst))
}

fn extrapolation() -> Outcome {
    let g0 = moment_pump(&builtin_equation(PolygonClass::Staircase), 0, 40).map_err(|e| e.to_string())?;
    let e = estimate_growth(g0.coeffs()).map_err(|e| e.to_string())?;
    let a = 1.0 / (4.0 * PI.sqrt());
    let (ex, eg, ea) = ((e.x_c_hat - 0.25).abs(), (e.gamma_hat + 0.5).abs(), ((e.a_hat - a) / a).abs());
    ensure!(ex <= 1e-6 && eg <= 1e-2 && ea <= 0.01, "x_c {}, γ {}, A {}", e.x_c_hat, e.gamma_hat, e.a_hat);
    Ok(format!("x_c = {:.9}, γ = {:.5}, A = {:.6}", e.x_c_hat, e.gamma_hat, e.a_hat))
}

fn amplitude_identities() -> Outcome {
    let (phi, sf, w, h) = (airy_phi(10), stair_f(10), meander_omega(10), dirconvex_h(10));
    for k in 0..=10u32 {
        let p2 = BigRational::from_integer(BigInt::one() << (2 * k + 1) as usize);
        ensure!(phi.exact_value(k) == Some(&(sf.exact_value(k).unwrap() * p2)), "φ_{k} ≠ 2^{{2k+1}} f_{k}");
        let inv = BigRational::new(BigInt::one(), BigInt::one() << (k + 4) as usize);
        ensure!(h.exact_value(k) == Some(&(w.exact_value(k).unwrap() * inv)), "h_{k} ≠ 2^{{−k−4}} ω_{k}");
    }
    let g = builtin_equation(PolygonClass::Staircase).equations[0].expr.clone();
    let a = QDiffAnalysis::from_equation(&g, Precision(40)).map_err(|e| e.to_string())?;
    let (f0, f1) = general_f0_f1(&a).map_err(|e| e.to_string())?;
    let (e0, e1) = ((f0.to_f64() + 0.5).abs(), (f1.to_f64() - 1.0 / 16.0).abs());
    ensure!(e0 < 1e-10 && e1 < 1e-10, "(f_0, f_1) = ({}, {})", f0.to_f64(), f1.to_f64());
    Ok("exact for k ≤ 10; (f_0, f_1) = (−1/2, 1/16)".into())
}

/// A numbered end-to-end check.
pub struct Criterion {
    pub number: u32,
    pub name: &'static str,
    pub check: fn() -> Outcome,
}

pub const CRITERIA: [Criterion; 16] = [
    Criterion { number: 1, name: "oracle equivalence", check: oracle_equivalence },
    Criterion { number: 2, name: "row sums", check: row_sums },
    Criterion { number: 3, name: "Dyck bijection", check: dyck_bijection },
    Criterion { number: 4, name: "moment pumping", check: moment_pumping },
    Criterion { number: 5, name: "rectangles limit law", check: rectangles_law },
    Criterion { number: 6, name: "Airy cross-check", check: airy_cross_check },
    Criterion { number: 7, name: "first moments", check: first_moments },
    Criterion { number: 8, name: "Laplace identities", check: laplace },
    Criterion { number: 9, name: "staircase → Airy", check: staircase_airy },
    Criterion { number: 10, name: "Ferrers concentration", check: ferrers_concentration },
    Criterion { number: 11, name: "fixed-area Gaussian", check: fixed_area_gaussian },
    Criterion { number: 12, name: "squares scaling", check: squares_scaling_bound },
    Criterion { number: 13, name: "rectangles scaling", check: rectangles_scaling_bound },
    Criterion { number: 14, name: "staircase scaling", check: staircase_scaling },
    Criterion { number: 15, name: "extrapolation", check: extrapolation },
    Criterion { number: 16, name: "amplitude identities", check: amplitude_identities },
];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub number: u32,
    pub name: &'static str,
    pub outcome: Outcome,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    /// `criterion  9 PASS  name: detail (1.2s)`; timing omitted when `timed` is false.
    pub fn line(&self, timed: bool) -> String {
        let (tag, detail) = match &self.outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let mut s = format!("criterion {:>2} {tag}  {}: {detail}", self.number, self.name);
        if timed {
            s.push_str(&format!(" ({:.1}s)", self.seconds));
        }
        s
    }
}

/// Runs criterion `number` (1-based); a panic counts as failure.
pub fn run_criterion(number: u32) -> Option<CriterionReport> {
    let c = CRITERIA.iter().find(|c| c.number == number)?;
    let t = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|_| Err("panicked".into()));
    Some(CriterionReport { number, name: c.name, outcome, seconds: t.elapsed().as_secs_f64() })
}
