//! POVMs with classical outcomes, conditioned ensembles and Holevo quantities.

use ndarray::Array2;

use crate::entropy::{subsystem_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::purification::PurifiedState;
use crate::state::{check_distinct, check_operator, DensityOperator, StateVector, HERMITIAN_TOL, NEGATIVITY_TOL};

/// Outcomes with probability below this are dropped.
pub const OUTCOME_FLOOR: f64 = 1e-14;

/// Eigenvalues closer than this are treated as one projective outcome.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A POVM `{F_a}` on a set of sites.
#[derive(Clone, Debug)]
pub struct MeasurementSpec {
    sites: Vec<usize>,
    effects: Vec<Array2<C64>>,
    roots: Vec<Array2<C64>>,
}

impl MeasurementSpec {
    /// Validates each effect (Hermitian, `F_a ⪰ -1e-10`) and completeness.
    pub fn new(sites: Vec<usize>, effects: Vec<Array2<C64>>) -> Result<Self> {
        check_distinct(&sites)?;
        if sites.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        if effects.is_empty() {
            return Err(Error::InvalidMeasurement("no outcomes".into()));
        }
        let d = 1usize << sites.len();
        let mut total = Array2::<C64>::zeros((d, d));
        let mut roots = Vec::with_capacity(effects.len());
        for f in &effects {
            check_operator(f, &sites)?;
            let defect = linalg::hermiticity_defect(&f.view());
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
            let (w, v) = linalg::eigh(f)?;
            if w[0] < -NEGATIVITY_TOL {
                return Err(Error::InvalidMeasurement(format!("effect has eigenvalue {:.3e}", w[0])));
            }
            roots.push(linalg::reconstruct(&v, &w.iter().map(|x| x.max(0.0).sqrt()).collect::<Vec<_>>()));
            total += f;
        }
        let defect = (&total - &linalg::identity(d)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if defect > 1e-10 {
            return Err(Error::InvalidMeasurement(format!("effects sum to identity only within {defect:.3e}")));
        }
        Ok(Self { sites, effects, roots })
    }

    /// Projective measurement of a Hermitian observable: one projector per
    /// distinct eigenvalue (ascending), degenerate within 1e-9.
    pub fn projective(sites: Vec<usize>, observable: &Array2<C64>) -> Result<Self> {
        check_operator(observable, &sites)?;
        let defect = linalg::hermiticity_defect(&observable.view());
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let (w, v) = linalg::eigh(observable)?;
        let d = w.len();
        let mut effects = Vec::new();
        let mut start = 0;
        while start < d {
            let mut end = start + 1;
            while end < d && w[end] - w[start] < DEGENERACY_TOL {
                end += 1;
            }
            let mut p = Array2::<C64>::zeros((d, d));
            for k in start..end {
                for i in 0..d {
                    for j in 0..d {
                        p[[i, j]] += v[[i, k]] * v[[j, k]].conj();
                    }
                }
            }
            effects.push(p);
            start = end;
        }
        Self::new(sites, effects)
    }

    /// Two-outcome weak measurement `F_a = q_a I + (-1)^a μ O` with
    /// `q₀ + q₁ = 1`, `‖O‖∞ ≤ 1` and `|μ| ≤ min(q₀, q₁)`.
    pub fn weak(sites: Vec<usize>, q0: f64, observable: &Array2<C64>, mu: f64) -> Result<Self> {
        check_operator(observable, &sites)?;
        if !(0.0..=1.0).contains(&q0) {
            return Err(Error::InvalidMeasurement(format!("q0 = {q0} outside [0, 1]")));
        }
        let q1 = 1.0 - q0;
        if mu.abs() > q0.min(q1) + 1e-15 {
            return Err(Error::InvalidMeasurement(format!("|mu| = {} exceeds min(q0, q1)", mu.abs())));
        }
        let norm = linalg::hermitian_op_norm(observable)?;
        if norm > 1.0 + 1e-10 {
            return Err(Error::OperatorNorm(norm));
        }
        let id = linalg::identity(1 << sites.len());
        let f0 = &id * C64::new(q0, 0.0) + observable * C64::new(mu, 0.0);
        let f1 = &id * C64::new(q1, 0.0) - observable * C64::new(mu, 0.0);
        Self::new(sites, vec![f0, f1])
    }

    /// `F_a = ½(I + (-1)^a μ O)`, the family used by the second-order
    /// expansions; equal to [`Self::weak`] with `q₀ = ½` and strength `μ/2`.
    pub fn weak_symmetric(sites: Vec<usize>, observable: &Array2<C64>, mu: f64) -> Result<Self> {
        Self::weak(sites, 0.5, observable, 0.5 * mu)
    }

    /// Merges outcomes: outcome `g` of the result is the sum of the effects
    /// listed in `groups[g]`. Every outcome must appear exactly once.
    pub fn coarse_grained(&self, groups: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; self.effects.len()];
        let mut effects = Vec::with_capacity(groups.len());
        for g in groups {
            let mut f = Array2::<C64>::zeros(self.effects[0].dim());
            for &a in g {
                if a >= seen.len() || seen[a] {
                    return Err(Error::InvalidMeasurement(format!("outcome {a} missing or repeated")));
                }
                seen[a] = true;
                f += &self.effects[a];
            }
            effects.push(f);
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidMeasurement("grouping does not cover all outcomes".into()));
        }
        Self::new(self.sites.clone(), effects)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn effects(&self) -> &[Array2<C64>] {
        &self.effects
    }

    /// `√F_a` for each outcome.
    pub fn roots(&self) -> &[Array2<C64>] {
        &self.roots
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }
}

/// One measurement outcome: its probability and the conditioned global state
/// as a mixture of pure states (a single one unless outcomes were merged).
#[derive(Clone, Debug)]
pub struct MeasuredOutcome {
    pub label: usize,
    pub probability: f64,
    pub components: Vec<(f64, StateVector)>,
}

/// Outcome probabilities and conditioned states after a measurement.
///
/// Conditioned states keep the measured sites (in their post-measurement
/// state); reduced states are only offered on the remaining sites.
#[derive(Clone, Debug)]
pub struct MeasuredEnsemble {
    measured: Vec<usize>,
    outcomes: Vec<MeasuredOutcome>,
}

impl MeasuredEnsemble {
    pub fn outcomes(&self) -> &[MeasuredOutcome] {
        &self.outcomes
    }

    pub fn measured_sites(&self) -> &[usize] {
        &self.measured
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    fn check_region(&self, x: &[usize]) -> Result<()> {
        if let Some(s) = x.iter().find(|s| self.measured.contains(s)) {
            return Err(Error::OverlappingRegions(*s));
        }
        Ok(())
    }

    /// `ρ^X_a` for the outcome at position `index`.
    pub fn conditioned(&self, index: usize, x: &[usize]) -> Result<DensityOperator> {
        self.check_region(x)?;
        let outcome = &self.outcomes[index];
        let mut acc: Option<Array2<C64>> = None;
        for (w, psi) in &outcome.components {
            let r = psi.reduced(x)?;
            let term = r.matrix() * C64::new(*w, 0.0);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        DensityOperator::new(acc.expect("nonempty outcome"), x.to_vec())
    }

    /// `Σ_a p_a ρ^X_a`, the unconditioned marginal on `X`.
    pub fn average(&self, x: &[usize]) -> Result<DensityOperator> {
        let mut acc: Option<Array2<C64>> = None;
        for (i, o) in self.outcomes.iter().enumerate() {
            let term = self.conditioned(i, x)?.matrix() * C64::new(o.probability, 0.0);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        DensityOperator::new(acc.expect("nonempty ensemble"), x.to_vec())
    }

    fn conditioned_entropy(&self, index: usize, x: &[usize]) -> Result<f64> {
        let outcome = &self.outcomes[index];
        if let [(_, psi)] = outcome.components.as_slice() {
            self.check_region(x)?;
            subsystem_entropy(psi, x)
        } else {
            von_neumann_entropy(&self.conditioned(index, x)?)
        }
    }

    /// Merges outcomes by position; see [`MeasurementSpec::coarse_grained`].
    pub fn coarse_grained(&self, groups: &[Vec<usize>]) -> Result<MeasuredEnsemble> {
        let mut seen = vec![false; self.outcomes.len()];
        let mut outcomes = Vec::new();
        for (label, g) in groups.iter().enumerate() {
            let mut probability = 0.0;
            let mut components = Vec::new();
            for &i in g {
                if i >= seen.len() || seen[i] {
                    return Err(Error::InvalidMeasurement(format!("outcome {i} missing or repeated")));
                }
                seen[i] = true;
                probability += self.outcomes[i].probability;
            }
            if probability == 0.0 {
                continue;
            }
            for &i in g {
                let o = &self.outcomes[i];
                for (w, psi) in &o.components {
                    components.push((w * o.probability / probability, psi.clone()));
                }
            }
            outcomes.push(MeasuredOutcome { label, probability, components });
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidMeasurement("grouping does not cover all outcomes".into()));
        }
        Ok(MeasuredEnsemble { measured: self.measured.clone(), outcomes })
    }
}

/// Measures `m` on a pure state, producing the conditioned ensemble.
pub fn measure_pure_state(psi: &StateVector, m: &MeasurementSpec) -> Result<MeasuredEnsemble> {
    for s in m.sites() {
        if !psi.sites().contains(s) {
            return Err(Error::UnknownSite(*s));
        }
    }
    let mut outcomes = Vec::with_capacity(m.num_outcomes());
    let mut dropped = 0.0;
    for (label, root) in m.roots().iter().enumerate() {
        let amps = psi.apply_local(root, m.sites())?;
        let p = linalg::norm_sqr(&amps);
        if p < OUTCOME_FLOOR {
            dropped += p;
            continue;
        }
        let state = StateVector::normalized(amps, psi.sites().to_vec())?;
        outcomes.push(MeasuredOutcome { label, probability: p, components: vec![(1.0, state)] });
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    if dropped > 0.0 {
        log::debug!("dropped outcomes with total probability {dropped:.3e}; renormalizing");
    }
    for o in &mut outcomes {
        o.probability /= total;
    }
    Ok(MeasuredEnsemble { measured: m.sites().to_vec(), outcomes })
}

/// Applies `m` (on system sites) to a purified state.
pub fn apply_measurement(psi: &PurifiedState, m: &MeasurementSpec) -> Result<MeasuredEnsemble> {
    for s in m.sites() {
        if !psi.system_sites().contains(s) {
            return Err(Error::UnknownSite(*s));
        }
    }
    measure_pure_state(psi.state(), m)
}

/// `χ_X = S(ρ^X) - Σ_a p_a S(ρ^X_a)`; zero for the empty region.
pub fn holevo_information(ens: &MeasuredEnsemble, x: &[usize]) -> Result<f64> {
    if x.is_empty() {
        return Ok(0.0);
    }
    let mut chi = von_neumann_entropy(&ens.average(x)?)?;
    for (i, o) in ens.outcomes.iter().enumerate() {
        chi -= o.probability * ens.conditioned_entropy(i, x)?;
    }
    Ok(chi)
}

/// Holevo quantity of an explicit ensemble `{p_a, ρ_a}` of states on the same sites.
pub fn holevo_from_states(ensemble: &[(f64, DensityOperator)]) -> Result<f64> {
    let (_, first) = ensemble.first().ok_or_else(|| Error::InvalidProbabilities("empty ensemble".into()))?;
    let mut avg = Array2::<C64>::zeros(first.matrix().dim());
    let mut conditional = 0.0;
    for (p, rho) in ensemble {
        let rho = if rho.sites() == first.sites() { rho.clone() } else { rho.permuted(first.sites())? };
        avg += &(rho.matrix() * C64::new(*p, 0.0));
        conditional += p * von_neumann_entropy(&rho)?;
    }
    Ok(von_neumann_entropy(&DensityOperator::new(avg, first.sites().to_vec())?)? - conditional)
}

/// `K = χ_B - χ_E` with its two components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivateInformation {
    pub k: f64,
    pub chi_b: f64,
    pub chi_e: f64,
}

/// Private information of the measurement outcome between B and E.
pub fn private_information(psi: &PurifiedState, m: &MeasurementSpec, b: &[usize]) -> Result<PrivateInformation> {
    if let Some(s) = b.iter().find(|s| m.sites().contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    let ens = apply_measurement(psi, m)?;
    let chi_b = holevo_information(&ens, b)?;
    let chi_e = holevo_information(&ens, psi.env_sites())?;
    Ok(PrivateInformation { k: chi_b - chi_e, chi_b, chi_e })
}

/// Post-measurement system states `p_a` and `√F_a ρ √F_a / p_a`, in the
/// order `measured sites, then the rest`.
pub fn system_conditioned_states(rho: &DensityOperator, m: &MeasurementSpec) -> Result<Vec<(f64, DensityOperator)>> {
    let mut out = Vec::new();
    let mut sites = m.sites().to_vec();
    sites.extend(rho.sites().iter().copied().filter(|s| !m.sites().contains(s)));
    for root in m.roots() {
        let sigma = rho.conjugate_map(root, m.sites(), m.sites())?;
        let p = linalg::trace(&sigma).re;
        if p < OUTCOME_FLOOR {
            continue;
        }
        out.push((p, DensityOperator::from_unnormalized(sigma, sites.clone())?));
    }
    let total: f64 = out.iter().map(|(p, _)| p).sum();
    for (p, _) in &mut out {
        *p /= total;
    }
    Ok(out)
}

/// `χ_X` computed from system entropies alone, without building a
/// purification. `None` selects the purifying environment E, using
/// `S(ρ^E_a) = S(√F_a ρ √F_a / p_a)` for a pure global state.
pub fn holevo_system_only(rho: &DensityOperator, m: &MeasurementSpec, x: Option<&[usize]>) -> Result<f64> {
    let conditioned = system_conditioned_states(rho, m)?;
    match x {
        None => {
            let mut chi = von_neumann_entropy(rho)?;
            for (p, sigma) in &conditioned {
                chi -= p * von_neumann_entropy(sigma)?;
            }
            Ok(chi)
        }
        Some(x) => {
            if let Some(s) = x.iter().find(|s| m.sites().contains(s)) {
                return Err(Error::OverlappingRegions(*s));
            }
            if x.is_empty() {
                return Ok(0.0);
            }
            let reduced: Vec<(f64, DensityOperator)> =
                conditioned.iter().map(|(p, s)| Ok((*p, s.reduced(x)?))).collect::<Result<_>>()?;
            holevo_from_states(&reduced)
        }
    }
}
