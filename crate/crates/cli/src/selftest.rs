//! Quick numerical self-checks: oracle agreement, route equalities,
//! cross-backend agreement and the proof inequalities on random instances.

use depthbound::bounds::{g_func, k_func};
use depthbound::cft::{alpha_delta, depth_bound_cft, h_delta};
use depthbound::criterion::{theorem_criterion, Channel};
use depthbound::ed::{build_tfim, holevo_finite_difference_oracle, thermal_ed, GibbsSpec, LocalObservable, ORACLE_MU_GRID};
use depthbound::freefermion::{bdg_diagonalize, chi2_e_quadratic, thermal_covariance};
use depthbound::linalg;
use depthbound::perturbative::{chi2_general, lieb_t_map, xi_operator};
use depthbound::purification::canonical_purification;
use depthbound::random::{random_density, random_hermitian, random_pauli_hamiltonian, random_povm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen, or the error message.
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> depthbound::Result<(bool, f64)>;

fn special_values(_: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    use std::f64::consts::{LN_2, PI};
    let devs = [
        h_delta(1.0)? - 2.0 / 3.0,
        h_delta(0.5)? - PI / 4.0,
        alpha_delta(1.0)? - 8.0 / 3.0,
        g_func(1.0)? - 2.0 * LN_2,
        k_func(0.0, 2)?,
        depth_bound_cft(50.0, 0.0, 1.0, 1.0)? - 50.0 * LN_2 / (4.0 * PI),
    ];
    let worst = devs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok((worst <= 1e-12, worst))
}

fn oracle_agreement(rng: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    let mut worst = 0.0f64;
    for case in 0..3 {
        let n = 2 + case % 2;
        let h = random_pauli_hamiltonian(rng, n, 2 * n)?;
        let beta = rng.random_range(0.3..2.0);
        let o = LocalObservable::new(random_hermitian(rng, 2, 1.0)?, vec![0])?;
        let b: Vec<usize> = (1..n).collect();
        let spec = GibbsSpec::new(h, beta)?;
        let oracle = holevo_finite_difference_oracle(&spec, &o, &b, &ORACLE_MU_GRID)?;
        let psi = canonical_purification(&depthbound::ed::gibbs_state(&spec)?)?;
        let gb = chi2_general(&psi, &o.matrix, &[0], &b)?.value;
        worst = worst.max((gb - oracle.chi2_b.value).abs() / oracle.chi2_b.value.abs().max(1e-300));
    }
    Ok((worst <= 1e-4, worst))
}

fn chi_e_routes(_: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    let spec = GibbsSpec::new(build_tfim(6, 1.0)?, 2.0)?;
    let th = thermal_ed(&spec)?;
    let o = LocalObservable::pauli('X', 3)?;
    let eigensum = th.chi2_e_eigensum(&o)?.value;
    let psi = canonical_purification(&th.density()?)?;
    let general = chi2_general(&psi, &o.matrix, &[3], psi.env_sites())?.value;
    let quadratic = chi2_e_quadratic(&bdg_diagonalize(6, 1.0)?, 2.0, 3)?.value;
    let worst = (eigensum - general).abs().max((eigensum - quadratic).abs());
    Ok((worst <= 1e-8, worst))
}

fn cross_backend(_: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    let (n, g, beta) = (8, 1.0, 3.0);
    let th = thermal_ed(&GibbsSpec::new(build_tfim(n, g)?, beta)?)?;
    let gamma = thermal_covariance(&bdg_diagonalize(n, g)?, beta)?;
    let mut worst = (th.energy() - gamma.energy(g)).abs();
    for j in 0..n {
        let ed = th.expectation(&LocalObservable::pauli('X', j)?)?;
        worst = worst.max((ed - gamma.x_expectation(j)?).abs());
    }
    Ok((worst <= 1e-8, worst))
}

fn proof_inequalities(rng: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let rho = random_density(rng, vec![0, 1, 2], 8)?;
        let psi = canonical_purification(&rho)?;
        let o = random_hermitian(rng, 2, 1.0)?;
        for x in [vec![1, 2], psi.env_sites().to_vec()] {
            let (xi, rx) = xi_operator(&psi, &o, &[0], &x)?;
            let (lo, hi) = xi.order_margins(&rx)?;
            let t = linalg::hermitian_op_norm(&lieb_t_map(&rx, &xi.matrix)?)?;
            worst = worst.max(xi.trace_norm()? - 1.0).max(t - 1.0).max(-lo).max(-hi);
        }
    }
    Ok((worst <= 1e-9, worst.max(0.0)))
}

fn criterion_routes(rng: &mut ChaCha8Rng) -> depthbound::Result<(bool, f64)> {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho = random_density(rng, vec![0, 1, 2], 4)?;
        let channel = Channel::Measurement(random_povm(rng, vec![0], 3)?);
        let v = theorem_criterion(&rho, &[0], &channel, &[2])?;
        worst = worst.max((v.route_a - v.route_b).abs());
    }
    Ok((worst <= 1e-9, worst))
}

const CHECKS: [(&str, Check); 6] = [
    ("special values", special_values),
    ("trace formula vs finite-difference oracle", oracle_agreement),
    ("chi_E routes (eigensum, trace formula, quadratic)", chi_e_routes),
    ("dense vs free-fermion observables", cross_backend),
    ("proof inequalities on random states", proof_inequalities),
    ("criterion route equality", criterion_routes),
];

/// Runs every check with a generator seeded from `seed`.
pub fn run_selftest(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CHECKS
        .iter()
        .map(|(name, check)| match check(&mut rng) {
            Ok((passed, worst)) => CheckOutcome { name, passed, detail: format!("worst deviation {worst:.3e}") },
            Err(e) => CheckOutcome { name, passed: false, detail: e.to_string() },
        })
        .collect()
}
