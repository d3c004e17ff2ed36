use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use polylab::extrapolate::*;
use polylab::qfunc::{builtin_equation, moment_pump};
use polylab::PolygonClass;

fn synthetic(a: f64, x_c: f64, gamma: f64, c: f64, m_max: usize) -> Vec<f64> {
    (0..=m_max)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                let m = m as f64;
                a * x_c.powf(-m) * m.powf(gamma - 1.0) * (1.0 + c / m)
            }
        })
        .collect()
}

#[test]
fn staircase_row_sums() {
    let g0 = moment_pump(&builtin_equation(PolygonClass::Staircase), 0, 40).unwrap();
    let e = estimate_growth(g0.coeffs()).unwrap();
    assert!((e.x_c_hat - 0.25).abs() < 1e-6, "{}", e.x_c_hat);
    assert!((e.gamma_hat + 0.5).abs() < 1e-2, "{}", e.gamma_hat);
    let a = 1.0 / (4.0 * PI.sqrt());
    assert!(((e.a_hat - a) / a).abs() < 0.01, "{}", e.a_hat);
    assert!(e.trail.len() >= 3);
    assert!(e.trail_csv().starts_with("m,x_c_hat,gamma_hat,A_hat\n"));
}

#[test]
fn rectangles_mean_area_sums() {
    // Σ_n n p_{m,n} = C(m+1, 3)
    let seq: Vec<BigRational> =
        (0..=40i64).map(|m| BigRational::from_integer(BigInt::from((m + 1) * m * (m - 1) / 6))).collect();
    let e = estimate_growth(&seq).unwrap();
    assert!((e.x_c_hat - 1.0).abs() < 1e-6);
    assert!((e.gamma_hat - 4.0).abs() < 1e-2);
    assert!(((e.a_hat - 1.0 / 6.0) * 6.0).abs() < 0.01);
    let g1 = moment_pump(&builtin_equation(PolygonClass::Rectangles), 1, 40).unwrap();
    assert_eq!(g1.coeffs(), &seq[..]);
}

#[test]
fn half_power_ladder() {
    // a_m = 1 + m^{−1/2} + m^{−1}: one p = 1/2 step leaves O(1/m)
    let seq: Vec<(f64, f64)> = (16..=64)
        .map(|m| {
            let m = m as f64;
            (m, 1.0 + m.powf(-0.5) + 1.0 / m)
        })
        .collect();
    let acc = richardson(&seq, 0.5).unwrap();
    for &(m, v) in &acc {
        assert!((v - 1.0).abs() < 3.0 / m, "m={m}");
        assert!((v - 1.0).abs() > 0.1 / m);
    }
}

#[test]
fn rejects_bad_input() {
    let alt: Vec<f64> = (0..20).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert!(matches!(estimate_growth_f64(&alt), Err(ExtrapolateError::IrregularSequence(_))));
    assert!(matches!(estimate_growth_f64(&[1.0, 2.0, 4.0]), Err(ExtrapolateError::TooFewTerms { .. })));
}

#[test]
fn power_fit_recovers_polynomial() {
    let pts: Vec<(f64, f64)> = (1..=6)
        .map(|m| {
            let m = m as f64;
            (m, 2.0 - 3.0 / m + 0.5 / (m * m))
        })
        .collect();
    let c = power_fit(&pts, &[0.0, -1.0, -2.0]).unwrap();
    assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 3.0).abs() < 1e-12 && (c[2] - 0.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn synthetic_recovery(a in 0.1f64..10.0, x_c in 0.1f64..0.9, gamma in -1.5f64..3.0, c in -0.5f64..2.0) {
        let e = estimate_growth_f64(&synthetic(a, x_c, gamma, c, 40)).unwrap();
        prop_assert!((e.x_c_hat - x_c).abs() < 1e-6);
        prop_assert!((e.gamma_hat - gamma).abs() < 1e-2);
        prop_assert!(((e.a_hat - a) / a).abs() < 0.01);
    }

    #[test]
    fn scale_equivariance(k in -20i32..20) {
        let base = synthetic(1.3, 0.3, 0.5, 0.7, 30);
        let lambda = 2f64.powi(k);
        let scaled: Vec<f64> = base.iter().map(|v| v * lambda).collect();
        let (e, s) = (estimate_growth_f64(&base).unwrap(), estimate_growth_f64(&scaled).unwrap());
        prop_assert_eq!(e.x_c_hat, s.x_c_hat);
        prop_assert_eq!(e.gamma_hat, s.gamma_hat);
        prop_assert!((s.a_hat - lambda * e.a_hat).abs() <= 1e-12 * s.a_hat.abs());
    }
}
