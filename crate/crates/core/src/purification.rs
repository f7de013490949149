//! Ensemble decompositions and purifications of mixed states.

use ndarray::Array1;

use crate::entropy::EIGENVALUE_FLOOR;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::state::{check_distinct, DensityOperator, StateVector};

/// A decomposition `ρ = Σ_z p_z |φ_z⟩⟨φ_z|`.
#[derive(Clone, Debug)]
pub struct EnsembleDecomposition {
    members: Vec<(f64, StateVector)>,
}

impl EnsembleDecomposition {
    /// Validates probabilities (nonnegative, summing to 1 ± 1e-10) and that
    /// all members live on the same sites. Members listing the sites in a
    /// different order are permuted to the first member's order.
    pub fn new(members: Vec<(f64, StateVector)>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidProbabilities("empty ensemble".into()))?;
        let sites = first.1.sites().to_vec();
        let mut total = 0.0;
        let mut out = Vec::with_capacity(members.len());
        for (p, phi) in members {
            if !(p >= 0.0) {
                return Err(Error::InvalidProbabilities(format!("negative weight {p}")));
            }
            total += p;
            let phi = if phi.sites() == sites.as_slice() { phi } else { phi.permuted(&sites)? };
            out.push((p, phi));
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidProbabilities(format!("weights sum to {total}")));
        }
        Ok(Self { members: out })
    }

    pub fn members(&self) -> &[(f64, StateVector)] {
        &self.members
    }

    pub fn sites(&self) -> &[usize] {
        self.members[0].1.sites()
    }

    /// The mixed state `Σ p_z φ_z`.
    pub fn density(&self) -> Result<DensityOperator> {
        DensityOperator::mixture(&self.members)
    }
}

/// A pure state on system ⊗ E whose E-marginal-free part is the target state.
#[derive(Clone, Debug)]
pub struct PurifiedState {
    state: StateVector,
    system: Vec<usize>,
    env: Vec<usize>,
}

impl PurifiedState {
    /// Designates `env` sites of `state` as the purifying register.
    pub fn new(state: StateVector, env: Vec<usize>) -> Result<Self> {
        check_distinct(&env)?;
        for s in &env {
            if !state.sites().contains(s) {
                return Err(Error::UnknownSite(*s));
            }
        }
        let system = state.sites().iter().copied().filter(|s| !env.contains(s)).collect::<Vec<_>>();
        if system.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        Ok(Self { state, system, env })
    }

    /// A pure system state with an empty environment.
    pub fn without_environment(state: StateVector) -> Self {
        let system = state.sites().to_vec();
        Self { state, system, env: Vec::new() }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn system_sites(&self) -> &[usize] {
        &self.system
    }

    pub fn env_sites(&self) -> &[usize] {
        &self.env
    }

    /// `Tr_E |Ψ⟩⟨Ψ|`.
    pub fn system_state(&self) -> Result<DensityOperator> {
        self.state.reduced(&self.system)
    }
}

fn env_labels(system: &[usize], count: usize) -> Vec<usize> {
    let base = system.iter().max().map_or(0, |m| m + 1);
    (base..base + count).collect()
}

fn qubits_for(count: usize) -> usize {
    // At least one environment qubit, even for pure inputs.
    (usize::BITS - (count.max(2) - 1).leading_zeros()) as usize
}

/// `Σ_i √λ_i |i⟩ ⊗ |i⟩_E` from the eigendecomposition of `ρ`.
///
/// E holds `⌈log₂ rank⌉` qubits (at least one), labeled above the largest
/// system label and appended after the system sites.
pub fn canonical_purification(rho: &DensityOperator) -> Result<PurifiedState> {
    let (w, v) = linalg::eigh(rho.matrix())?;
    let kept: Vec<usize> = (0..w.len()).rev().filter(|&i| w[i] > EIGENVALUE_FLOOR).collect();
    if kept.is_empty() {
        return Err(Error::InvalidTrace(w.iter().sum()));
    }
    let ne = qubits_for(kept.len());
    let de = 1usize << ne;
    let ds = rho.dim();
    let mut amps = Array1::from_elem(ds * de, ZERO);
    for (e, &i) in kept.iter().enumerate() {
        let amp = w[i].sqrt();
        for s in 0..ds {
            amps[s * de + e] = v[[s, i]] * amp;
        }
    }
    let env = env_labels(rho.sites(), ne);
    let mut sites = rho.sites().to_vec();
    sites.extend_from_slice(&env);
    PurifiedState::new(StateVector::normalized(amps, sites)?, env)
}

/// `Σ_z √p_z |φ_z⟩ ⊗ |z⟩_E`, with E padded to whole qubits (at least one).
pub fn ensemble_purification(ens: &EnsembleDecomposition) -> Result<PurifiedState> {
    let members = ens.members();
    let ne = qubits_for(members.len());
    let de = 1usize << ne;
    let ds = members[0].1.dim();
    let mut amps = Array1::from_elem(ds * de, ZERO);
    for (z, (p, phi)) in members.iter().enumerate() {
        let amp = C64::new(p.sqrt(), 0.0);
        for (s, &x) in phi.amplitudes().iter().enumerate() {
            amps[s * de + z] = x * amp;
        }
    }
    let env = env_labels(ens.sites(), ne);
    let mut sites = ens.sites().to_vec();
    sites.extend_from_slice(&env);
    PurifiedState::new(StateVector::new(amps, sites)?, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{mutual_information, subsystem_entropy, trace_distance};
    use crate::linalg::ONE;
    use ndarray::array;
    use std::f64::consts::LN_2;

    #[test]
    fn pure_input_gets_product_environment() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(array![C64::new(h, 0.0), C64::new(0.0, -h)], vec![0]).unwrap();
        let p = canonical_purification(&DensityOperator::pure(&psi)).unwrap();
        assert_eq!(p.env_sites(), &[1]);
        assert!(subsystem_entropy(p.state(), &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_purifies_to_bell_pair() {
        let p = canonical_purification(&DensityOperator::maximally_mixed(vec![0]).unwrap()).unwrap();
        assert!((subsystem_entropy(p.state(), &[1]).unwrap() - LN_2).abs() < 1e-12);
        assert!((mutual_information(p.state(), &[0], &[1], None).unwrap() - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn ghz_mixture_ensemble_gives_four_qubit_ghz() {
        let zero = StateVector::basis(vec![0, 1, 2], 0).unwrap();
        let one = StateVector::basis(vec![0, 1, 2], 7).unwrap();
        let ens = EnsembleDecomposition::new(vec![(0.5, zero), (0.5, one)]).unwrap();
        let p = ensemble_purification(&ens).unwrap();
        assert_eq!(p.state().sites(), &[0, 1, 2, 3]);
        let a = p.state().amplitudes();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((a[15] - C64::new(h, 0.0)).norm() < 1e-15);
        let back = p.system_state().unwrap();
        assert!(trace_distance(&back, &ens.density().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn single_member_ensemble_is_product() {
        let phi = StateVector::basis(vec![4, 2], 1).unwrap();
        let p = ensemble_purification(&EnsembleDecomposition::new(vec![(1.0, phi)]).unwrap()).unwrap();
        assert_eq!(p.env_sites(), &[5]);
        assert!((p.state().amplitudes()[2] - ONE).norm() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        let phi = StateVector::basis(vec![0], 0).unwrap();
        assert!(EnsembleDecomposition::new(vec![]).is_err());
        assert!(EnsembleDecomposition::new(vec![(0.7, phi.clone()), (0.2, phi.clone())]).is_err());
        assert!(EnsembleDecomposition::new(vec![(1.2, phi.clone()), (-0.2, phi)]).is_err());
    }
}
