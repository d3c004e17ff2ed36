use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use polylab::enumerate::enumerate_counts;
use polylab::limitlaws::*;
use polylab::qfunc::{area_ensemble_series, builtin_equation, moment_pump_all};
use polylab::specialfn::quad;
use polylab::{ModelSpec, PolygonClass};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn airy_mgf_routes_agree_on_overlap() {
    for t in [0.2, 0.3, 0.4, 0.5] {
        let a = airy_mgf_taylor(t).unwrap();
        let b = airy_mgf_zero_sum(t).unwrap();
        assert!((a.value - b.value).abs() < 1e-13, "t={t}: {} vs {}", a.value, b.value);
    }
    assert_eq!(airy_mgf(0.0).unwrap().value, 1.0);
}

#[test]
fn airy_mgf_slope_at_zero_is_the_mean() {
    // second route only: zero sums at small t, Richardson in h
    let pts: Vec<(f64, f64)> =
        [0.04, 0.02, 0.01].iter().map(|&h| (1.0 / h, (1.0 - airy_mgf_zero_sum(h).unwrap().value) / h)).collect();
    let acc = polylab::extrapolate::richardson_fit(&pts, &[1.0, 2.0]).unwrap();
    assert!((acc - PI.sqrt()).abs() < 1e-4, "{acc}");
}

#[test]
fn meander_mgf_routes_agree_on_overlap() {
    for v in [1.0, 1.4, 2.0, 2.5] {
        let a = meander_mgf_taylor(v).unwrap();
        let b = meander_mgf_zero_sum(v).unwrap();
        assert!((a.value - b.value).abs() < 1e-12, "v={v}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn meander_residues_are_bounded() {
    for k in 1..=400 {
        let r = meander_r(k).unwrap();
        let beta = polylab::specialfn::airy_zeros_f64(k)[k - 1];
        assert!((r / beta).abs() <= 3.0, "k={k}");
    }
    // R_1 = β_1(1 + 3∫₀^{β_1}Ai(−t)dt)/(3Ai'(−β_1)) has the sign of Ai'(−β_1)
    assert!(meander_r(1).unwrap() > 0.0);
}

#[test]
fn laplace_identities() {
    for s in [0.5, 1.0, 2.0] {
        let (l, r) = airy_laplace_identity(s).unwrap();
        assert!((l.value - r).abs() < 1e-6, "airy s={s}: {} vs {r}", l.value);
    }
    for s in [1.0, 1.5, 2.0, 3.0] {
        let (l, r) = meander_laplace_identity(s).unwrap();
        assert!((l.value - r).abs() < 1e-6, "meander s={s}: {} vs {r}", l.value);
    }
}

#[test]
fn airy_density_integrates_to_the_moments() {
    let f = |y: f64| airy_density(y).map(|v| v.value).unwrap_or(f64::NAN);
    for k in 0..=4u32 {
        let q = quad::integrate_panels(|y| if y == 0.0 { 0.0 } else { y.powi(k as i32) * f(y) }, 0.0, 10.0, 1e-11, 16)
            .unwrap();
        let exact = law_moment(&LimitLaw::Airy, k).to_f64();
        assert!((q.value - exact).abs() < 1e-6 * exact.max(1.0), "k={k}: {} vs {exact}", q.value);
    }
    assert!(airy_density(0.0).is_err());
}

#[test]
fn meander_cdf_limits_and_mean() {
    assert!(meander_cdf(0.05).unwrap().value.abs() < 1e-10);
    assert!((meander_cdf(5.0).unwrap().value - 1.0).abs() < 1e-8);
    let mut prev = 0.0;
    for i in 1..=30 {
        let v = meander_cdf(i as f64 * 0.1).unwrap().value;
        assert!(v >= prev - 1e-12);
        prev = v;
    }
    // E[Z] = ∫(1 − R)
    let q = quad::integrate_panels(
        |x| if x == 0.0 { 1.0 } else { 1.0 - meander_cdf(x).unwrap().value },
        0.0,
        5.0,
        1e-11,
        16,
    )
    .unwrap();
    let mean = law_moment(&LimitLaw::Meander, 1).to_f64();
    assert!((q.value - mean).abs() < 1e-7, "{} vs {mean}", q.value);
    assert!((mean - 3.0 / 8.0 * (2.0 * PI).sqrt()).abs() < 1e-15);
}

#[test]
fn airy_moments_match_gamma_formula() {
    // E[Y^k]/k! = Γ(γ_0)φ_k/(Γ(γ_k)φ_0), numerically
    let phi = polylab::amplitudes::airy_phi(10);
    for k in 0..=10u32 {
        let g = |x: f64| polylab::specialfn::gamma_fn(x).unwrap().to_f64();
        let kf: f64 = (1..=k).map(|i| i as f64).product();
        let want =
            kf * g(-0.5) / g((3.0 * k as f64 - 1.0) / 2.0) * phi.value_f64(k).unwrap() / phi.value_f64(0).unwrap();
        let got = law_moment(&LimitLaw::Airy, k).to_f64();
        assert!(((got - want) / want).abs() < 1e-12, "k={k}");
    }
    let r3 = law_moment(&LimitLaw::Airy, 3).to_f64() / law_moment(&LimitLaw::Airy, 1).to_f64().powi(3);
    assert!((universal_ratio(3).to_f64() - r3).abs() < 1e-14);
}

#[test]
fn staircase_moments_converge() {
    let table = enumerate_counts(PolygonClass::Staircase, 14).unwrap();
    let rep = compare_moments(&table, &LimitLaw::Airy, &[6, 8, 10, 12, 14], 3).unwrap();
    for k in [2u32, 3] {
        let e: Vec<f64> = rep.rows_for_k(k).iter().map(|r| r.rel_error).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "k={k}: {e:?}");
    }
    assert!(rep.rows_for_k(1).iter().all(|r| r.rel_error == 0.0));
    let m14 = rep.rows_for_k(2).last().unwrap().empirical;
    assert!((m14 - 10.0 / (3.0 * PI)).abs() / (10.0 / (3.0 * PI)) < 0.15);
}

#[test]
fn beta_and_gaussian_moments() {
    assert_eq!(law_moment(&LimitLaw::BetaHalf, 2).exact().unwrap().coeff, rat(8, 15));
    let r = law_moment(&LimitLaw::BetaHalf, 2).to_f64() / law_moment(&LimitLaw::BetaHalf, 1).to_f64().powi(2);
    assert!((r - 1.2).abs() < 1e-15);
    let g = LimitLaw::Gaussian { mean: 1.0, sd: 2.0 };
    assert_eq!(law_moment(&g, 2).to_f64(), 5.0);
    assert_eq!(law_moment(&g, 4).to_f64(), 1.0 + 6.0 * 4.0 + 3.0 * 16.0);
}

#[test]
fn carleman_sums_grow() {
    for law in [LimitLaw::Airy, LimitLaw::Meander, LimitLaw::BetaHalf] {
        let s = carleman_partial_sums(&law, 20);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn rectangles_approach_beta_moments() {
    let table = enumerate_counts(PolygonClass::Rectangles, 400).unwrap();
    let rep = compare_moments(&table, &LimitLaw::BetaHalf, &[100, 200, 400], 3).unwrap();
    let errs: Vec<f64> = rep.rows_for_k(2).iter().map(|r| r.rel_error).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(rep.to_csv().starts_with("model,law,m,k,empirical,law_value,rel_error\n"));
}

#[test]
fn table_and_series_routes_agree() {
    let spec = builtin_equation(PolygonClass::Staircase);
    let gks = moment_pump_all(&spec, 3, 24).unwrap();
    let table = enumerate_counts(PolygonClass::Staircase, 24).unwrap();
    for m in [10u32, 18, 24] {
        assert_eq!(raw_moments_from_series(&gks, m, 3).unwrap(), raw_moments_from_table(&table, m, 3).unwrap());
    }
}

#[test]
fn ferrers_concentrates_at_one_eighth() {
    let spec = builtin_equation(PolygonClass::Ferrers);
    let gks = moment_pump_all(&spec, 2, 200).unwrap();
    let rep = compare_moments_from_series(PolygonClass::Ferrers, &gks, &LimitLaw::Dirac(rat(1, 8)), &[200], 2).unwrap();
    assert!(rep.rows.iter().all(|r| r.rel_error < 0.05), "{:?}", rep.rows);
    assert!(ModelSpec::of(PolygonClass::Ferrers).phi == rat(1, 2));
}

#[test]
fn fixed_area_gaussian_constants() {
    let spec = builtin_equation(PolygonClass::Staircase);
    let s: Vec<_> = (0..=2).map(|j| area_ensemble_series(&spec, j, 64).unwrap()).collect();
    let g = gaussian_fixed_area_check(&s[0], &s[1], &s[2], 64).unwrap();
    // the unit square: perimeter 2, no spread
    assert_eq!((g.rows[0].n, g.rows[0].mu_hat, g.rows[0].sigma2_hat), (1, 2.0, 0.0));
    assert!((g.mu_limit - 0.8417620156).abs() < 1e-3, "{}", g.mu_limit);
    assert!((g.sigma2_limit - 0.17995).abs() < 1e-2, "{}", g.sigma2_limit);
    let raw: Vec<f64> = g.rows.iter().map(|r| r.mu_hat).collect();
    assert!(raw.windows(2).all(|w| w[1] < w[0]));
    assert!(gaussian_fixed_area_check(&s[0], &s[1], &s[2], 65).is_err());
}

proptest! {
    #[test]
    fn airy_mgf_is_completely_monotone_on_samples(t in 0.0f64..3.0, d in 0.01f64..1.0) {
        let a = airy_mgf(t).unwrap().value;
        let b = airy_mgf(t + d).unwrap().value;
        prop_assert!(b < a && b > 0.0);
    }

    #[test]
    fn law_parsing_round_trips(p in 1i64..50, q in 1i64..50) {
        let law = LimitLaw::Dirac(rat(p, q));
        prop_assert_eq!(law.name().parse::<LimitLaw>().unwrap(), law);
    }
}
