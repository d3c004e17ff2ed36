use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use polylab::amplitudes::*;
use polylab::hp::Precision;
use polylab::qfunc::{builtin_equation, moment_pump, Expr};
use polylab::series::{LaurentPoly, PowerSeries};
use polylab::PolygonClass;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Series of `(1−4x)^{a}` for half-integer or integer `a = num/2`.
fn binomial_series(num: i64, order: usize) -> PowerSeries {
    let a = rat(num, 2);
    let mut c = vec![BigRational::one()];
    for n in 0..order {
        let next = &c[n] * (&a - rat(n as i64, 1)) / rat(n as i64 + 1, 1) * rat(-4, 1);
        c.push(next);
    }
    PowerSeries::new(order, c)
}

/// Re-expands a Laurent polynomial in `s = √(1−4x)` as a power series in `x`.
fn to_x_series(p: &LaurentPoly, lo: i64, hi: i64, order: usize) -> PowerSeries {
    let mut acc = PowerSeries::zero(order);
    for e in lo..=hi {
        let c = p.coeff(e);
        if !c.is_zero() {
            acc = acc.add(&binomial_series(e, order).scale(&c));
        }
    }
    acc
}

#[test]
fn recursions_have_zero_residual() {
    for seq in [airy_phi(14), stair_f(14), meander_omega(14), dirconvex_h(14), rectangle_sequence(14)] {
        for k in 1..=14 {
            assert!(seq.residual(k).unwrap().is_zero(), "{} at k={k}", seq.label);
        }
    }
}

#[test]
fn phi_and_stair_f_are_proportional() {
    let phi = airy_phi(10);
    let f = stair_f(10);
    for k in 0..=10u32 {
        assert_eq!(phi.exact_value(k).unwrap(), &(f.exact_value(k).unwrap() * pow2(2 * k as i64 + 1)));
    }
}

#[test]
fn h_and_omega_are_proportional() {
    let h = dirconvex_h(10);
    let w = meander_omega(10);
    for k in 0..=10u32 {
        assert_eq!(h.exact_value(k).unwrap(), &(w.exact_value(k).unwrap() * pow2(-(k as i64) - 4)));
    }
    assert_eq!(h.exact_value(2).unwrap(), &(w.exact_value(2).unwrap() * pow2(-6)));
}

#[test]
fn sign_patterns() {
    let phi = airy_phi(12);
    assert!(phi.exact_value(0).unwrap().is_negative());
    assert!((1..=12).all(|k| phi.exact_value(k).unwrap().is_positive()));
    let f = stair_f(12);
    assert!((1..=12).all(|k| f.exact_value(k).unwrap().is_positive()));
    for s in [meander_omega(12), dirconvex_h(12)] {
        assert!((0..=12).all(|k| s.exact_value(k).unwrap().is_positive()));
    }
}

#[test]
fn exponent_rules() {
    assert_eq!(gamma_k(0), rat(-1, 2));
    assert_eq!(alpha_k(1), rat(2, 1));
    assert_eq!(rectangle_sequence(3).exponent(3), rat(8, 1));
}

#[test]
fn rectangle_amplitudes_from_pole_expansion() {
    let spec = builtin_equation(PolygonClass::Rectangles);
    for k in 0..=5u32 {
        let g = moment_pump(&spec, k as usize, 4 * k as usize + 16).unwrap();
        let a = pole_amplitude(&g, 2 * k + 2).expect("rational with pole of order 2k+2");
        assert_eq!(a, rectangle_f(k), "k={k}");
    }
    assert_eq!(rectangle_f(3), rat(6, 1));
}

#[test]
fn staircase_laurent_expansion_matches_moment_series() {
    let order = 20;
    let spec = builtin_equation(PolygonClass::Staircase);
    let lau = staircase_laurent(4);
    let f = stair_f(4);
    for k in 0..=4usize {
        let g = moment_pump(&spec, k, order).unwrap();
        let lo = 1 - 3 * k as i64;
        let back = to_x_series(&lau[k], lo.min(0), 6 * k as i64 + 8, order);
        assert_eq!(back, g, "k={k}");
        assert_eq!(lau[k].valuation(), Some(lo.min(0)));
        assert_eq!(lau[k].coeff(lo), *f.exact_value(k as u32).unwrap());
    }
}

fn staircase_g() -> Expr {
    builtin_equation(PolygonClass::Staircase).equations[0].expr.clone()
}

#[test]
fn general_constants_for_staircase() {
    let a = QDiffAnalysis::from_equation(&staircase_g(), Precision(50)).unwrap();
    assert!((a.x_c.to_f64() - 0.25).abs() < 1e-15);
    assert!(a.residual < 1e-40);
    assert!(a.b.to_f64() > 0.0 && a.c.to_f64() > 0.0);
    let (f0, f1) = general_f0_f1(&a).unwrap();
    assert!((f0.to_f64() + 0.5).abs() < 1e-10);
    assert!((f1.to_f64() - 1.0 / 16.0).abs() < 1e-10);
    let seq = general_f(&a, 8).unwrap();
    let exact = stair_f(8);
    for k in 0..=8 {
        assert!((seq.value_f64(k).unwrap() - exact.value_f64(k).unwrap()).abs() < 1e-10);
    }

    let e = ExactQDiffAnalysis::at_point(&staircase_g(), rat(1, 4), rat(1, 4)).unwrap();
    assert_eq!((e.b.clone(), e.c.clone()), (rat(4, 1), rat(4, 1)));
    assert_eq!(general_f0_f1_exact(&e).unwrap(), (rat(-1, 2), rat(1, 16)));
}

#[test]
fn polynomial_form_of_staircase() {
    // P = x²q + 2xq·P + P·P(qx)
    let g = Expr::X.pow(2) * Expr::Q + 2 * Expr::X * Expr::Q * Expr::p(0, 0) + Expr::p(0, 0) * Expr::p(0, 1);
    let e = ExactQDiffAnalysis::at_point(&g, rat(1, 4), rat(1, 4)).unwrap();
    assert_eq!(general_f0_f1_exact(&e).unwrap(), (rat(-1, 2), rat(1, 16)));
    let a = QDiffAnalysis::from_equation(&g, Precision(40)).unwrap();
    let (f0, f1) = general_f0_f1(&a).unwrap();
    assert!((f0.to_f64() + 0.5).abs() < 1e-12 && (f1.to_f64() - 0.0625).abs() < 1e-12);
}

#[test]
fn rescaled_staircase() {
    // P̃(x) = P(x/2): P̃ = x²q/(4(1 − xq − P̃(qx)))
    let g = Expr::X.pow(2) * Expr::Q / (4 * (1 - Expr::X * Expr::Q - Expr::p(0, 1)));
    let a = QDiffAnalysis::from_equation(&g, Precision(40)).unwrap();
    assert!((a.x_c.to_f64() - 0.5).abs() < 1e-14);
    let (f0, _) = general_f0_f1(&a).unwrap();
    assert!((f0.to_f64() + 0.5).abs() < 1e-12);
    let seq = general_f(&a, 6).unwrap();
    // γ_{k−1}f_{k−1} + (1/(4f_1))Σ_{l=0}^k f_lf_{k−l} = 0 for k ≥ 2
    let v: Vec<f64> = (0..=6).map(|k| seq.value_f64(k).unwrap()).collect();
    for k in 2..=6usize {
        let s: f64 = (0..=k).map(|l| v[l] * v[k - l]).sum();
        let g = (3.0 * (k as f64 - 1.0) - 1.0) / 2.0;
        assert!((g * v[k - 1] + s / (4.0 * v[1])).abs() < 1e-12 * v[k].abs().max(1.0));
    }
}

#[test]
fn linear_equations_are_rejected() {
    for class in [PolygonClass::Ferrers, PolygonClass::Rectangles, PolygonClass::Squares] {
        let g = builtin_equation(class).equations[0].expr.clone();
        assert!(matches!(QDiffAnalysis::from_equation(&g, Precision(30)), Err(AmplitudeError::AssumptionViolated(_))));
    }
}

fn staircase_context() -> PunctureContext {
    let spec = builtin_equation(PolygonClass::Staircase);
    PunctureContext { g0: moment_pump(&spec, 0, 12).unwrap(), x_c: rat(1, 4), g0_at_xc: Some(rat(1, 4)) }
}

#[test]
fn punctures() {
    let base = stair_f(6);
    let ctx = staircase_context();
    let p = punctured_amplitudes(&base, 1, &PunctureSize::Bounded(2), &ctx).unwrap();
    for k in 0..=4u32 {
        assert_eq!(p.exact_value(k).unwrap(), &(base.exact_value(k + 1).unwrap() * rat(1, 16)));
        assert_eq!(p.exponent(k), gamma_k(k + 1));
    }
    let u = punctured_amplitudes(&base, 1, &PunctureSize::Unbounded, &ctx).unwrap();
    assert_eq!(u.exact_value(0).unwrap(), &(base.exact_value(1).unwrap() * rat(1, 4)));
    let z = punctured_amplitudes(&base, 2, &PunctureSize::Bounded(3), &ctx).unwrap();
    assert!(z.exact_values().unwrap().iter().all(|a| a.is_zero()));
    assert_eq!(punctured_amplitudes(&base, 0, &PunctureSize::Unbounded, &ctx), Err(AmplitudeError::NotAPuncture));
    let divergent = PunctureContext { g0_at_xc: None, ..ctx };
    assert_eq!(
        punctured_amplitudes(&base, 1, &PunctureSize::Unbounded, &divergent),
        Err(AmplitudeError::DivergentCriticalValue)
    );
}

proptest! {
    #[test]
    fn residual_vanishes(k in 1u32..20) {
        for seq in [airy_phi(k), stair_f(k), meander_omega(k), dirconvex_h(k)] {
            prop_assert!(seq.residual(k).unwrap().is_zero());
        }
    }

    #[test]
    fn csv_has_one_row_per_value(k in 0u32..12) {
        let csv = meander_omega(k).to_csv();
        prop_assert_eq!(csv.lines().count() as u32, k + 2);
    }
}
