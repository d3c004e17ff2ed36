use num_traits::ToPrimitive;
use proptest::prelude::*;

use polylab::amplitudes::stair_f;
use polylab::extrapolate::power_fit;
use polylab::qfunc::{builtin_equation, evaluate_p};
use polylab::scaling::*;
use polylab::specialfn::{airy_f64, ei};
use polylab::PolygonClass;

#[test]
fn squares_bound_on_grid() {
    for q in [0.9, 0.99, 0.999] {
        for x in [0.9, 0.99, 0.999] {
            let d = squares_direct(x, q).unwrap();
            let a = squares_scaling(x, q).unwrap();
            assert!((d.value - a.approx).abs() + d.tail_bound <= a.remainder_bound, "x={x} q={q}");
        }
    }
    let a = squares_scaling(0.99, 0.999).unwrap();
    assert!((a.remainder_bound - 0.99f64.ln().abs() / 6.0).abs() < 1e-18);
}

#[test]
fn squares_bound_grows_as_x_vanishes() {
    let b: Vec<f64> = [1e-2, 1e-4, 1e-8].iter().map(|&x| squares_scaling(x, 0.5).unwrap().remainder_bound).collect();
    assert!(b.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rectangles_bound_on_grid() {
    for q in [0.9, 0.95, 0.99] {
        for x in [0.5, 0.9, 0.99] {
            let d = rectangles_direct(x, q).unwrap();
            let a = rectangles_scaling(x, q).unwrap();
            assert!((d.value - a.approx).abs() + d.tail_bound <= a.remainder_bound, "x={x} q={q}");
        }
    }
    assert!(rectangles_scaling(1.5, 0.9).is_err());
}

#[test]
fn rectangles_diverge_at_x_one() {
    // P(1, q) ∼ −log(1−q)/(1−q): the ratio to that form stays of order one and
    // P itself grows along the grid
    let qs = [0.9, 0.95, 0.99, 0.995, 0.999];
    let p: Vec<f64> = qs.iter().map(|&q| rectangles_direct(1.0, q).unwrap().value).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]));
    let r: Vec<f64> = qs.iter().zip(&p).map(|(&q, &v)| v / (-(1.0 - q).ln() / (1.0 - q))).collect();
    assert!(r.iter().all(|&v| v > 0.5 && v < 2.0), "{r:?}");
}

#[test]
fn staircase_iso_band() {
    // the isotropic form linearizes the Airy argument in x; its singular-part
    // ratio reaches [0.97, 1.03] at ε = 1e-4 (s = 1) and 1e-5 (s = 2), while the
    // anisotropic form on the diagonal is inside the band at ε = 1e-3
    let spec = builtin_equation(PolygonClass::Staircase);
    let ratio = |s: f64, eps: f64, aniso: bool| {
        let x = (1.0 - s * eps.powf(2.0 / 3.0)) / 4.0;
        let q = (-eps).exp();
        let p = evaluate_p(&spec, x, q, 1e-14).unwrap();
        let a = if aniso { staircase_scaling_aniso(x, x, q).unwrap() } else { staircase_scaling_iso(x, q).unwrap() };
        (p - 0.25) / (a - 0.25)
    };
    for (s, eps) in [(1.0, 1e-4), (2.0, 1e-5)] {
        let r = ratio(s, eps, false);
        assert!((0.97..=1.03).contains(&r), "s={s}: {r}");
    }
    for s in [1.0, 2.0] {
        let r = ratio(s, 1e-3, true);
        assert!((0.97..=1.03).contains(&r), "s={s}: {r}");
        let gap: Vec<f64> = [1e-3, 1e-4].iter().map(|&e| (1.0 - ratio(s, e, false)).abs()).collect();
        assert!(gap[1] < gap[0]);
    }
}

#[test]
fn staircase_iso_is_eps_cube_root_times_fn() {
    let eps: f64 = 1e-3;
    let x = (1.0 - eps.powf(2.0 / 3.0)) / 4.0;
    let a = staircase_scaling_iso(x, (-eps).exp()).unwrap();
    let f = staircase_scaling_fn(1.0).unwrap();
    assert!((a - 0.25 - eps.powf(1.0 / 3.0) * f).abs() < 1e-12);
    // F = ¼ d/ds log Ai(4^{1/3}s)
    let c = 4f64.powf(1.0 / 3.0);
    let dlog = derivative(|s| airy_f64(c * s).ai.ln(), 1.0, 1e-2) / 4.0;
    assert!((dlog - f).abs() < 1e-9);
}

#[test]
fn staircase_scan_decreases_in_eps() {
    let t = scaling_error_scan(PolygonClass::Staircase, &[0.5, 1.0, 2.0], &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(t.decreasing_in_eps());
    for r in t.rows.iter().filter(|r| r.eps == 1e-3) {
        assert!(r.rel_error <= 0.03, "{r:?}");
    }
    assert_eq!(t.to_csv().lines().count(), 10);
}

#[test]
fn squares_scan_respects_bound() {
    let t = scaling_error_scan(PolygonClass::Squares, &[0.5, 1.0, 2.0], &[1e-2, 1e-3]).unwrap();
    assert!(t.rows.iter().all(|r| r.rel_error <= r.bound.unwrap()));
}

#[test]
fn pole_proximity_is_reported() {
    let eps: f64 = 1e-3;
    let b1 = polylab::specialfn::airy_zeros_f64(1)[0];
    let x = 0.25 + b1 * eps.powf(2.0 / 3.0) / 4f64.powf(4.0 / 3.0);
    assert!(matches!(staircase_scaling_iso(x, (-eps).exp()), Err(ScalingError::PoleProximity { .. })));
}

#[test]
fn anisotropic_form() {
    let eps: f64 = 1e-3;
    let q = (-eps).exp();
    // on the diagonal
    let mut gaps = Vec::new();
    for e in [1e-3f64, 1e-4] {
        let x = (1.0 - e.powf(2.0 / 3.0)) / 4.0;
        let qe = (-e).exp();
        let iso = staircase_scaling_iso(x, qe).unwrap();
        let an = staircase_scaling_aniso(x, x, qe).unwrap();
        gaps.push(((iso - an) / iso).abs());
    }
    assert!(gaps[1] < gaps[0] && gaps[1] < 0.01, "{gaps:?}");
    // off the diagonal, against the width/height equation
    let direct = staircase_aniso_direct(0.23, 0.26, q, 1e-12).unwrap();
    let approx = staircase_scaling_aniso(0.23, 0.26, q).unwrap();
    assert!(((direct - approx) / direct).abs() < 0.05);
    let p = stair_alpha(0.23, 0.26, eps).unwrap();
    assert!(p.residual <= 1e-10);
    let sym = staircase_scaling_aniso(0.26, 0.23, q).unwrap();
    assert!((sym - approx).abs() < 1e-12);
    // on the critical curve α = 0 and only the leading term is defined
    assert_eq!(stair_leading(0.25, 0.25), 0.25);
    assert!(staircase_scaling_aniso(0.25, 0.25, q).is_err());
}

#[test]
fn staircase_fn_large_s_expansion_matches_amplitudes() {
    // F(s) ∼ Σ_k (−1)^k f_k s^{−γ_k}; the sign comes from expanding in q − 1
    let pts: Vec<(f64, f64)> =
        [6.0, 8.0, 11.0, 15.0, 20.0, 27.0].iter().map(|&s| (s, staircase_scaling_fn(s).unwrap())).collect();
    let powers: Vec<f64> = (0..6).map(|k| -(3.0 * k as f64 - 1.0) / 2.0).collect();
    let c = power_fit(&pts, &powers).unwrap();
    let f = stair_f(2);
    for k in 0..=2u32 {
        let fk = f.exact_value(k).unwrap().to_f64().unwrap() * if k % 2 == 0 { 1.0 } else { -1.0 };
        assert!(((c[k as usize] - fk) / fk).abs() < 0.01, "k={k}: {} vs {fk}", c[k as usize]);
    }
    // F(s)s^{−1/2} approaches f₀ = −1/2 monotonically
    let r: Vec<f64> =
        [4.0, 8.0, 16.0, 32.0].iter().map(|&s: &f64| staircase_scaling_fn(s).unwrap() / s.sqrt()).collect();
    assert!(r.windows(2).all(|w| (w[1] + 0.5).abs() < (w[0] + 0.5).abs()));
}

#[test]
fn ferrers_amplitude_function() {
    for s in [-1.0, 0.0, 2.0] {
        let d = derivative(ferrers_amplitude_fn, s, 1e-2);
        assert!((d - 4.0 * s * ferrers_amplitude_fn(s) + 1.0).abs() <= 1e-10, "s={s}");
    }
    let v: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|&s| s * ferrers_amplitude_fn(s)).collect();
    assert!(v.windows(2).all(|w| (w[1] - 0.25).abs() < (w[0] - 0.25).abs()));
    assert!((v[2] - 0.25).abs() < 1e-3);
}

#[test]
fn rectangle_amplitude_function() {
    let f = |s: f64| rect_amplitude_fn(s).unwrap();
    for s in [1.0, 2.0, 5.0] {
        let d = derivative(f, s, 1e-2);
        assert!((s * d + 2.0 - 2.0 * s * s * f(s)).abs() <= 1e-10, "s={s}");
    }
    let v: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|&s| s * s * f(s)).collect();
    assert!(v.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
    assert!((f(1.0) - ei(1.0).unwrap().to_f64() * std::f64::consts::E).abs() < 1e-15);
}

proptest! {
    #[test]
    fn squares_bound_holds(x in 0.5f64..0.999, q in 0.5f64..0.999) {
        let d = squares_direct(x, q).unwrap();
        let a = squares_scaling(x, q).unwrap();
        prop_assert!((d.value - a.approx).abs() <= a.remainder_bound);
    }

    #[test]
    fn rectangles_bound_holds(x in 0.3f64..0.99, q in 0.5f64..0.99) {
        let d = rectangles_direct(x, q).unwrap();
        let a = rectangles_scaling(x, q).unwrap();
        prop_assert!((d.value - a.approx).abs() <= a.remainder_bound);
    }
}
