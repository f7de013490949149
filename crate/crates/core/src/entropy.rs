//! Entropic primitives. All entropies are in nats.

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{DensityOperator, QuantumState, NEGATIVITY_TOL};

/// Eigenvalues below this floor contribute nothing to `-Σ λ ln λ`.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// `-Σ λ ln λ` over a spectrum, after the negativity check and flooring.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -NEGATIVITY_TOL {
            return Err(Error::NegativeSpectrum(l));
        }
        if l > EIGENVALUE_FLOOR {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

/// `S(ρ) = -Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let defect = linalg::hermiticity_defect(&rho.matrix().view());
    if defect > crate::state::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    spectrum_entropy(&rho.eigenvalues()?)
}

/// Entropy of the marginal on `region`; the empty region has zero entropy.
///
/// For pure global states the smaller of `region` and its complement is
/// diagonalized.
pub fn subsystem_entropy<S: QuantumState>(state: &S, region: &[usize]) -> Result<f64> {
    if region.is_empty() {
        return Ok(0.0);
    }
    let sites = state.sites();
    for s in region {
        if !sites.contains(s) {
            return Err(Error::UnknownSite(*s));
        }
    }
    if state.is_pure() {
        if region.len() == sites.len() {
            return Ok(0.0);
        }
        if 2 * region.len() > sites.len() {
            let complement: Vec<usize> = sites.iter().copied().filter(|s| !region.contains(s)).collect();
            return von_neumann_entropy(&state.reduced_state(&complement)?);
        }
    }
    von_neumann_entropy(&state.reduced_state(region)?)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u = a.to_vec();
    u.extend_from_slice(b);
    u
}

fn check_disjoint(sets: &[&[usize]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(s) = a.iter().find(|s| b.contains(s)) {
                return Err(Error::OverlappingRegions(*s));
            }
        }
    }
    Ok(())
}

/// `I(X:Y) = S(X) + S(Y) - S(XY)`, or the conditional version
/// `I(X:Y|R) = I(X:YR) - I(X:R)` when `conditioning` is given.
pub fn mutual_information<S: QuantumState>(
    state: &S,
    x: &[usize],
    y: &[usize],
    conditioning: Option<&[usize]>,
) -> Result<f64> {
    let r = conditioning.unwrap_or(&[]);
    check_disjoint(&[x, y, r])?;
    if x.is_empty() || y.is_empty() {
        return Ok(0.0);
    }
    let s = |region: &[usize]| subsystem_entropy(state, region);
    let xr = union(x, r);
    let yr = union(y, r);
    let xyr = union(&xr, y);
    // I(X:Y|R) = S(XR) + S(YR) - S(XYR) - S(R)
    Ok(s(&xr)? + s(&yr)? - s(&xyr)? - s(r)?)
}

/// `T(ρ, σ) = ½‖ρ - σ‖₁`. `σ` may list the same sites in another order.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.num_qubits() != sigma.num_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let sigma = if sigma.sites() == rho.sites() { sigma.clone() } else { sigma.permuted(rho.sites())? };
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * linalg::hermitian_trace_norm(&diff)?)
}
