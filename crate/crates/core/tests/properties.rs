use depthbound::bounds::{approx_verdict, exact_verdict, BoundMode};
use depthbound::criterion::{theorem_criterion, Channel};
use depthbound::entropy::{mutual_information, subsystem_entropy, trace_distance, von_neumann_entropy};
use depthbound::linalg::{self, C64};
use depthbound::measurement::{apply_measurement, holevo_information, private_information, MeasurementSpec};
use depthbound::perturbative::{chi2_b_correlator_lb, chi2_general, lieb_r_map, lieb_t_map, xi_operator};
use depthbound::purification::{canonical_purification, ensemble_purification, EnsembleDecomposition};
use depthbound::random::{random_density, random_hermitian, random_isometry, random_povm, random_state};
use depthbound::state::{DensityOperator, QuantumState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn subadditivity_and_pure_state_symmetry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, vec![0, 1, 2], 1 + (seed % 8) as usize).unwrap();
        let sxy = subsystem_entropy(&rho, &[0, 1]).unwrap();
        prop_assert!(sxy <= subsystem_entropy(&rho, &[0]).unwrap() + subsystem_entropy(&rho, &[1]).unwrap() + 1e-10);
        let psi = random_state(&mut r, vec![0, 1, 2]).unwrap();
        let a = subsystem_entropy(&psi, &[0]).unwrap();
        let b = subsystem_entropy(&psi, &[1, 2]).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_triangle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s: Vec<DensityOperator> = (0..3).map(|_| random_density(&mut r, vec![0, 1], 3).unwrap()).collect();
        let ab = trace_distance(&s[0], &s[1]).unwrap();
        let bc = trace_distance(&s[1], &s[2]).unwrap();
        let ac = trace_distance(&s[0], &s[2]).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn iterated_partial_trace(seed in any::<u64>()) {
        let rho = random_density(&mut rng(seed), vec![0, 1, 2], 4).unwrap();
        let two = rho.reduced(&[1, 2]).unwrap().reduced(&[1]).unwrap();
        let one = rho.reduced(&[1]).unwrap();
        prop_assert!((two.matrix() - one.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn purification_round_trip_and_independence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let members: Vec<(f64, _)> = (0..3).map(|_| (r.random_range(0.1..1.0), random_state(&mut r, vec![0, 1, 2]).unwrap())).collect();
        let total: f64 = members.iter().map(|m| m.0).sum();
        let ens = EnsembleDecomposition::new(members.into_iter().map(|(p, s)| (p / total, s)).collect()).unwrap();
        let rho = ens.density().unwrap();
        let canon = canonical_purification(&rho).unwrap();
        let other = ensemble_purification(&ens).unwrap();
        let back = canon.system_state().unwrap();
        prop_assert!(trace_distance(&back, &rho).unwrap() < 1e-10);
        let ia = mutual_information(canon.state(), &[0], canon.env_sites(), None).unwrap();
        let ib = mutual_information(other.state(), &[0], other.env_sites(), None).unwrap();
        prop_assert!((ia - ib).abs() < 1e-9);
        let m = random_povm(&mut r, vec![0], 2).unwrap();
        let ka = private_information(&canon, &m, &[2]).unwrap();
        let kb = private_information(&other, &m, &[2]).unwrap();
        prop_assert!((ka.k - kb.k).abs() < 1e-9);
    }

    #[test]
    fn criterion_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, vec![0, 1, 2], 1 + (seed % 5) as usize).unwrap();
        let channels = vec![
            Channel::Identity,
            Channel::Measurement(random_povm(&mut r, vec![0], 3).unwrap()),
            Channel::Isometry { map: random_isometry(&mut r, 4, 2), kept: 1, discarded: 1 },
            Channel::TraceOut(vec![0]),
        ];
        for ch in &channels {
            let v = theorem_criterion(&rho, &[0], ch, &[2]).unwrap();
            prop_assert!((v.route_a - v.route_b).abs() < 1e-9);
        }
    }

    #[test]
    fn data_processing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, vec![0, 1, 2], 3).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let m = random_povm(&mut r, vec![0], 4).unwrap();
        let ens = apply_measurement(&psi, &m).unwrap();
        let coarse = ens.coarse_grained(&[vec![0, 1], vec![2, 3]]).unwrap();
        for x in [vec![1, 2], vec![2], psi.env_sites().to_vec()] {
            prop_assert!(holevo_information(&coarse, &x).unwrap() <= holevo_information(&ens, &x).unwrap() + 1e-10);
        }
        // Discarding part of B.
        prop_assert!(holevo_information(&ens, &[2]).unwrap() <= holevo_information(&ens, &[1, 2]).unwrap() + 1e-10);
        let i_full = mutual_information(&rho, &[0], &[1, 2], None).unwrap();
        let i_part = mutual_information(&rho, &[0], &[2], None).unwrap();
        prop_assert!(i_part <= i_full + 1e-10);
    }

    #[test]
    fn maximally_mixed_has_no_private_information(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = DensityOperator::maximally_mixed(vec![0, 1]).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let m = random_povm(&mut r, vec![0], 2).unwrap();
        prop_assert!(private_information(&psi, &m, &[1]).unwrap().k <= 1e-10);
    }

    #[test]
    fn proof_inequalities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, vec![0, 1, 2], 8).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let o = random_hermitian(&mut r, 2, 1.0).unwrap();
        for x in [vec![1, 2], vec![2], psi.env_sites().to_vec()] {
            let (xi, rx) = xi_operator(&psi, &o, &[0], &x).unwrap();
            prop_assert!(xi.trace_norm().unwrap() <= 1.0 + 1e-9);
            let (lo, hi) = xi.order_margins(&rx).unwrap();
            prop_assert!(lo >= -1e-9 && hi >= -1e-9);
            let t = lieb_t_map(&rx, &xi.matrix).unwrap();
            prop_assert!(linalg::hermitian_op_norm(&t).unwrap() <= 1.0 + 1e-9);
            let rr = lieb_r_map(&rx, &xi.matrix).unwrap();
            let eig = linalg::eigvalsh(&rr).unwrap();
            prop_assert!(eig[0] >= -1e-9);
            prop_assert!(eig[eig.len() - 1] <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn correlator_bound_is_below_trace_formula(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, vec![0, 1, 2], 8).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let oa = random_hermitian(&mut r, 2, 1.0).unwrap();
        let norm = r.random_range(0.2..1.0);
        let ob = random_hermitian(&mut r, 4, norm).unwrap();
        let lb = chi2_b_correlator_lb(&rho, &oa, &[0], &ob, &[1, 2]).unwrap().value;
        let exact = chi2_general(&psi, &oa, &[0], &[1, 2]).unwrap().value;
        prop_assert!(lb <= exact + 1e-9);
    }

    #[test]
    fn zero_epsilon_matches_exact(criterion in -1.0f64..1.0, x in 0usize..40, d in 1usize..64) {
        let e = exact_verdict(criterion, x);
        let g = approx_verdict(criterion, x, 0.0, BoundMode::ApproxGeneral { d_a_prime: d }).unwrap();
        let w = approx_verdict(criterion, x, 0.0, BoundMode::ApproxWeak).unwrap();
        prop_assert_eq!(e.bound_active, g.bound_active);
        prop_assert_eq!(e.depth_lower_bound, w.depth_lower_bound);
    }
}

#[test]
fn bell_pair_private_information_is_ln2() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = depthbound::state::StateVector::new(
        ndarray::array![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)],
        vec![0, 1],
    )
    .unwrap();
    let psi = depthbound::purification::PurifiedState::without_environment(bell.clone());
    let m = MeasurementSpec::projective(vec![0], &depthbound::state::pauli::z()).unwrap();
    let k = private_information(&psi, &m, &[1]).unwrap();
    assert!((k.k - std::f64::consts::LN_2).abs() < 1e-12);
    assert!(von_neumann_entropy(&bell.reduced_state(&[0, 1]).unwrap()).unwrap().abs() < 1e-12);
}
