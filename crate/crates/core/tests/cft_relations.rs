use std::f64::consts::{LN_2, PI};

use depthbound::cft::*;

#[test]
fn h_is_positive_and_decreasing() {
    let hs: Vec<f64> = (1..=500).map(|i| h_delta(0.01 * i as f64).unwrap()).collect();
    assert!(hs.iter().all(|&h| h > 0.0));
    assert!(hs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn k2_is_semi_infinite_interval_minus_chi_e() {
    let beta = 13.0;
    for delta in [0.5, 1.0, 1.7] {
        for i in 0..20 {
            let x = beta * (0.01 + 0.99 * i as f64 / 19.0);
            let p = CftParams::at_beta(delta, 0.4, beta, Geometry::SemiInfinite { x_ab: x }).unwrap();
            let k2 = k2_cft(&p, x).unwrap();
            let far = chi2_b_interval(delta, 0.4, 1.0 / beta, x, 1e3 * beta).unwrap();
            let diff = far - chi2_e_cft(&p).unwrap();
            assert!((k2 - diff).abs() <= 1e-9 * k2.abs().max(chi2_e_cft(&p).unwrap()), "{delta} {x}: {k2} {diff}");
        }
    }
}

#[test]
fn k2_scale_invariance() {
    let p1 = CftParams::at_beta(1.3, 1.0, 5.0, Geometry::SemiInfinite { x_ab: 1.0 }).unwrap();
    let p2 = CftParams::at_beta(1.3, 1.0, 15.0, Geometry::SemiInfinite { x_ab: 3.0 }).unwrap();
    let ratio = k2_cft(&p1, 1.0).unwrap() / k2_cft(&p2, 3.0).unwrap();
    assert!((ratio - 3f64.powf(2.6)).abs() < 1e-10 * ratio);
}

#[test]
fn interval_limits() {
    let (delta, kappa) = (1.0, 0.8);
    // T → 0 continuity with the zero-temperature form of the same expression.
    let cold = chi2_b_interval(delta, kappa, 1e-8, 2.0, 7.0).unwrap();
    let zero = chi2_b_interval(delta, kappa, 0.0, 2.0, 7.0).unwrap();
    assert!((cold - zero).abs() < 1e-9 * zero);
    // Symmetric interval growing to the whole line recovers χ_E.
    let beta = 3.0;
    let l = 1e4 * beta;
    let whole = chi2_b_interval(delta, kappa, 1.0 / beta, -l, l).unwrap();
    let p = CftParams::at_beta(delta, kappa, beta, Geometry::SemiInfinite { x_ab: 1.0 }).unwrap();
    assert!((whole / chi2_e_cft(&p).unwrap() - 1.0).abs() < 1e-6);
    // Decreasing in x₁.
    let a = chi2_b_interval(delta, kappa, 0.2, 1.0, 9.0).unwrap();
    let b = chi2_b_interval(delta, kappa, 0.2, 2.0, 9.0).unwrap();
    assert!(b < a);
    assert!(CftParams::new(1.0, 1.0, 0.1, Geometry::Interval { x1: 3.0, x2: 2.0 }).is_err());
}

#[test]
fn depth_bound_forms_coincide() {
    let c = c_constant(1.0, 0.1).unwrap();
    for beta in [10.0, 40.0, 100.0] {
        for eps in [0.0, 1e-7, 1e-5] {
            let a = depth_bound_cft(beta, eps, 1.0, c).unwrap();
            let b = depth_bound_eta(beta, eps, 2.0, c).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(depth_bound_cft(beta, 0.0, 1.0, c).unwrap(), beta * LN_2 / (4.0 * PI));
    }
    let eps: Vec<f64> = (0..10).map(|i| 1e-8 * 3f64.powi(i)).collect();
    let d: Vec<f64> = eps.iter().map(|&e| depth_bound_cft(60.0, e, 1.0, c).unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn c_matches_the_crossing_condition() {
    // At the ε-shifted crossing, K⁽²⁾ equals the weak threshold 12ε.
    let (delta, kappa, beta, eps) = (1.0, 0.37, 25.0, 2e-6);
    let c = c_constant(delta, kappa).unwrap();
    let x = 2.0 * depth_bound_cft(beta, eps, delta, c).unwrap();
    let p = CftParams::at_beta(delta, kappa, beta, Geometry::SemiInfinite { x_ab: x }).unwrap();
    assert!((k2_cft(&p, x).unwrap() - 12.0 * eps).abs() < 1e-12);
}
