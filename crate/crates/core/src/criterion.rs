//! The `I(A′:B) - I(A′:E)` criterion for local channels on A.
//!
//! Two independent evaluations are provided: one applies the channel to an
//! explicit purification, the other uses only system entropies of the
//! channel's Stinespring dilation,
//! `S(B) + S(A″BC) - S(ABC) - S(A′B)`.

use ndarray::Array2;

use crate::entropy::{mutual_information, subsystem_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::measurement::{apply_measurement, holevo_information, MeasurementSpec};
use crate::purification::{canonical_purification, PurifiedState};
use crate::state::DensityOperator;

/// Maximum allowed disagreement between the two routes.
pub const ROUTE_TOL: f64 = 1e-9;

/// Local channel on region A.
#[derive(Clone, Debug)]
pub enum Channel {
    Identity,
    /// POVM with a classical output register.
    Measurement(MeasurementSpec),
    /// Isometry `A -> A′A″`: rows are indexed by `(a′, a″)` with `a′` the
    /// high part; `kept` and `discarded` count the qubits of A′ and A″.
    Isometry { map: Array2<C64>, kept: usize, discarded: usize },
    /// Discard the listed sites of A; the rest of A is A′.
    TraceOut(Vec<usize>),
}

/// Both evaluations of the criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionValue {
    pub lhs: f64,
    pub route_a: f64,
    pub route_b: f64,
}

fn fresh_labels(used: &[usize], count: usize) -> Vec<usize> {
    let base = used.iter().max().map_or(0, |m| m + 1);
    (base..base + count).collect()
}

fn check_support(a: &[usize], b: &[usize], sites: &[usize], channel: &Channel) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    for s in a.iter().chain(b) {
        if !sites.contains(s) {
            return Err(Error::UnknownSite(*s));
        }
    }
    if let Some(s) = a.iter().find(|s| b.contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    match channel {
        Channel::Identity => {}
        Channel::Measurement(m) => {
            if m.sites().len() != a.len() || m.sites().iter().any(|s| !a.contains(s)) {
                return Err(Error::InvalidMeasurement("measurement must act on all of A".into()));
            }
        }
        Channel::Isometry { map, kept, discarded } => {
            let expected = (1usize << (kept + discarded), 1usize << a.len());
            if map.dim() != expected {
                return Err(Error::DimensionMismatch { expected: expected.0, found: map.nrows() });
            }
            let defect = (linalg::dagger(map).dot(map) - linalg::identity(expected.1))
                .iter()
                .fold(0.0f64, |m, z| m.max(z.norm()));
            if defect > 1e-10 {
                return Err(Error::InvalidParameter(format!("map is not an isometry ({defect:.3e})")));
            }
        }
        Channel::TraceOut(t) => {
            if let Some(s) = t.iter().find(|s| !a.contains(s)) {
                return Err(Error::UnknownSite(*s));
            }
        }
    }
    Ok(())
}

/// Route a: `I(A′:B) - I(A′:E)` on a given purification after the channel.
pub fn criterion_on_purification(psi: &PurifiedState, a: &[usize], b: &[usize], channel: &Channel) -> Result<f64> {
    check_support(a, b, psi.system_sites(), channel)?;
    let e = psi.env_sites();
    match channel {
        Channel::Identity => {
            Ok(mutual_information(psi.state(), a, b, None)? - mutual_information(psi.state(), a, e, None)?)
        }
        Channel::TraceOut(t) => {
            let a_prime: Vec<usize> = a.iter().copied().filter(|s| !t.contains(s)).collect();
            Ok(mutual_information(psi.state(), &a_prime, b, None)?
                - mutual_information(psi.state(), &a_prime, e, None)?)
        }
        Channel::Isometry { map, kept, discarded } => {
            let labels = fresh_labels(psi.state().sites(), kept + discarded);
            let out = psi.state().apply_map(map, a, &labels, false)?;
            let a_prime = &labels[..*kept];
            Ok(mutual_information(&out, a_prime, b, None)? - mutual_information(&out, a_prime, e, None)?)
        }
        Channel::Measurement(m) => {
            let ens = apply_measurement(psi, m)?;
            Ok(holevo_information(&ens, b)? - holevo_information(&ens, e)?)
        }
    }
}

/// Stinespring dilation of a POVM: `W = Σ_a |a⟩_{A′} ⊗ |a⟩_{R} ⊗ √F_a`.
/// Returns the map and the qubit count of each record register.
pub fn povm_dilation(m: &MeasurementSpec) -> (Array2<C64>, usize) {
    let k = (usize::BITS - (m.num_outcomes().max(2) - 1).leading_zeros()) as usize;
    let rec = 1usize << k;
    let da = 1usize << m.sites().len();
    let mut w = Array2::from_elem((rec * rec * da, da), ZERO);
    for (a, root) in m.roots().iter().enumerate() {
        let row0 = (a * rec + a) * da;
        for i in 0..da {
            for j in 0..da {
                w[[row0 + i, j]] = root[[i, j]];
            }
        }
    }
    (w, k)
}

/// Route b: `S(B) + S(A″BC) - S(ABC) - S(A′B)` from the dilated system state.
fn criterion_system_only(rho: &DensityOperator, a: &[usize], b: &[usize], channel: &Channel) -> Result<f64> {
    let (dilated, a_prime): (DensityOperator, Vec<usize>) = match channel {
        Channel::Identity => (rho.clone(), a.to_vec()),
        Channel::TraceOut(t) => (rho.clone(), a.iter().copied().filter(|s| !t.contains(s)).collect()),
        Channel::Isometry { map, kept, discarded } => {
            let labels = fresh_labels(rho.sites(), kept + discarded);
            (rho.apply_isometry(map, a, &labels)?, labels[..*kept].to_vec())
        }
        Channel::Measurement(m) => {
            let (w, k) = povm_dilation(m);
            let mut labels = fresh_labels(rho.sites(), 2 * k);
            let record = labels[..k].to_vec();
            // A″ = copy of the record plus the post-measurement A qubits.
            labels.extend_from_slice(a);
            (rho.apply_isometry(&w, a, &labels)?, record)
        }
    };
    let s_abc = von_neumann_entropy(rho)?;
    let rest: Vec<usize> = dilated.sites().iter().copied().filter(|s| !a_prime.contains(s)).collect();
    let mut a_prime_b = a_prime.clone();
    a_prime_b.extend_from_slice(b);
    Ok(subsystem_entropy(&dilated, b)? + subsystem_entropy(&dilated, &rest)?
        - s_abc
        - subsystem_entropy(&dilated, &a_prime_b)?)
}

/// Evaluates `I(A′:B) - I(A′:E)` for the channel on A of the state `ρ` on
/// ABC, by both routes, failing if they differ by more than 1e-9.
pub fn theorem_criterion(rho: &DensityOperator, a: &[usize], channel: &Channel, b: &[usize]) -> Result<CriterionValue> {
    check_support(a, b, rho.sites(), channel)?;
    let psi = canonical_purification(rho)?;
    let route_a = criterion_on_purification(&psi, a, b, channel)?;
    let route_b = criterion_system_only(rho, a, b, channel)?;
    if (route_a - route_b).abs() > ROUTE_TOL {
        return Err(Error::RouteMismatch { route_a, route_b });
    }
    Ok(CriterionValue { lhs: route_a, route_a, route_b })
}
