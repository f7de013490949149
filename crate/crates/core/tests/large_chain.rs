use depthbound::cft::{fit_kappa, fit_power_law};
use depthbound::freefermion::{bdg_diagonalize, chi2_e_quadratic, subsystem_entropy_gaussian, thermal_covariance};

const N: usize = 301;
const CENTER: usize = 150;

#[test]
fn critical_chi_e_decays_as_inverse_beta_squared() {
    let sp = bdg_diagonalize(N, 1.0).unwrap();
    let pts: Vec<(f64, f64)> =
        (1..=10).map(|i| 10.0 * i as f64).map(|b| (b, chi2_e_quadratic(&sp, b, CENTER).unwrap().value)).collect();
    let (slope, _, _) = fit_power_law(&pts).unwrap();
    assert!((slope + 2.0).abs() <= 0.15, "slope {slope}");
}

#[test]
fn gapped_chi_e_decays_faster_than_a_power() {
    let sp = bdg_diagonalize(N, 1.5).unwrap();
    let chi = |b: f64| chi2_e_quadratic(&sp, b, CENTER).unwrap().value;
    // Local log-slope keeps steepening.
    let slope = |b: f64| (chi(1.2 * b) / chi(b)).ln() / 1.2f64.ln();
    let (s10, s20, s40) = (slope(10.0), slope(20.0), slope(40.0));
    assert!(s20 < s10 && s40 < s20 && s40 < -10.0, "{s10} {s20} {s40}");
}

#[test]
fn critical_gap_closes_as_inverse_length() {
    let pts: Vec<(f64, f64)> = [101usize, 201, 301]
        .iter()
        .map(|&n| (n as f64, *bdg_diagonalize(n, 1.0).unwrap().energies().last().unwrap()))
        .collect();
    let (slope, _, _) = fit_power_law(&pts).unwrap();
    assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn ground_state_xx_decay_exponent() {
    let gamma = thermal_covariance(&bdg_diagonalize(N, 1.0).unwrap(), f64::INFINITY).unwrap();
    let samples: Vec<(f64, f64)> =
        (10..=50).map(|d| (d as f64, gamma.xx_connected(CENTER, CENTER - d).unwrap())).collect();
    let (slope, _, _) = fit_power_law(&samples).unwrap();
    assert!((slope + 2.0).abs() <= 0.2, "slope {slope}");
    let fit = fit_kappa(&samples, 1.0).unwrap();
    assert!(fit.residual_rms < 0.05 && fit.kappa > 0.0);
}

/// With the lattice velocity v = 2 of this normalization, the lattice χ_E
/// approaches κ (πT/v)² / 3, using κ fitted from the ground-state correlator.
#[test]
fn lattice_chi_e_against_fitted_amplitude() {
    let sp = bdg_diagonalize(N, 1.0).unwrap();
    let gamma = thermal_covariance(&sp, f64::INFINITY).unwrap();
    let samples: Vec<(f64, f64)> =
        (10..=50).map(|d| (d as f64, gamma.xx_connected(CENTER, CENTER - d).unwrap())).collect();
    let kappa = fit_kappa(&samples, 1.0).unwrap().kappa;
    for beta in [40.0, 70.0, 100.0] {
        let lattice = chi2_e_quadratic(&sp, beta, CENTER).unwrap().value;
        let t = std::f64::consts::PI / (2.0 * beta);
        let alpha_eff = lattice / (kappa * t * t);
        assert!((3.0 * alpha_eff - 1.0).abs() < 0.05, "beta {beta}: {alpha_eff}");
    }
}

#[test]
fn pure_ground_state_entropy_symmetry() {
    let gamma = thermal_covariance(&bdg_diagonalize(60, 0.8).unwrap(), f64::INFINITY).unwrap();
    let left: Vec<usize> = (0..23).collect();
    let right: Vec<usize> = (23..60).collect();
    let a = subsystem_entropy_gaussian(&gamma, &left).unwrap();
    let b = subsystem_entropy_gaussian(&gamma, &right).unwrap();
    assert!((a - b).abs() < 1e-8);
}

#[test]
fn covariance_is_a_contraction() {
    let gamma = thermal_covariance(&bdg_diagonalize(40, 1.0).unwrap(), 7.0).unwrap();
    assert!(gamma.max_singular_value().unwrap() <= 1.0 + 1e-10);
    let m = gamma.matrix();
    assert!((m + &m.t()).iter().all(|x| x.abs() < 1e-13));
}
