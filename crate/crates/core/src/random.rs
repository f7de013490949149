//! Random instances for property tests and self-checks.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ed::{PauliString, SpinHamiltonian};
use crate::error::Result;
use crate::linalg::{self, C64};
use crate::measurement::MeasurementSpec;
use crate::state::{DensityOperator, StateVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Complex Ginibre matrix.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_simple_fn((rows, cols), || gaussian(rng))
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, sites: Vec<usize>) -> Result<StateVector> {
    let amps = Array1::from_shape_simple_fn(1 << sites.len(), || gaussian(rng));
    StateVector::normalized(amps, sites)
}

/// `G G† / Tr(G G†)` with `G` a `d x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, sites: Vec<usize>, rank: usize) -> Result<DensityOperator> {
    let g = ginibre(rng, 1 << sites.len(), rank.max(1));
    DensityOperator::from_unnormalized(g.dot(&linalg::dagger(&g)), sites)
}

/// Isometry `d_in → d_out` with orthonormal columns (Gram–Schmidt on Ginibre columns).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, d_out: usize, d_in: usize) -> Array2<C64> {
    assert!(d_in <= d_out);
    let mut q = ginibre(rng, d_out, d_in);
    for j in 0..d_in {
        for k in 0..j {
            let proj = linalg::inner(&q.column(k).to_owned(), &q.column(j).to_owned());
            let col_k = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-proj, &col_k);
        }
        let norm = linalg::norm_sqr(&q.column(j).to_owned()).sqrt();
        q.column_mut(j).mapv_inplace(|z| z / norm);
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Array2<C64> {
    random_isometry(rng, d, d)
}

/// Hermitian matrix with operator norm exactly `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, norm: f64) -> Result<Array2<C64>> {
    let g = ginibre(rng, d, d);
    let mut h = &g + &linalg::dagger(&g);
    linalg::hermitize(&mut h);
    let n = linalg::hermitian_op_norm(&h)?;
    Ok(h.mapv(|z| z * (norm / n)))
}

/// POVM with `outcomes` effects `S^{−1/2} G_a S^{−1/2}`, `G_a` random positive.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, sites: Vec<usize>, outcomes: usize) -> Result<MeasurementSpec> {
    let d = 1 << sites.len();
    let raw: Vec<Array2<C64>> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, d, d);
            g.dot(&linalg::dagger(&g))
        })
        .collect();
    let total = raw.iter().fold(Array2::zeros((d, d)), |acc, g| acc + g);
    let inv_sqrt = linalg::hermitian_function(&total, |x| 1.0 / x.sqrt())?;
    let effects = raw
        .iter()
        .map(|g| {
            let mut f = inv_sqrt.dot(g).dot(&inv_sqrt);
            linalg::hermitize(&mut f);
            f
        })
        .collect();
    MeasurementSpec::new(sites, effects)
}

/// Random Pauli sum on `n` sites with `terms` terms and coefficients in [−1, 1].
pub fn random_pauli_hamiltonian<R: Rng + ?Sized>(rng: &mut R, n: usize, terms: usize) -> Result<SpinHamiltonian> {
    let mut list = Vec::with_capacity(terms);
    while list.len() < terms {
        let ops: Vec<(usize, char)> =
            (0..n).map(|j| (j, ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)])).filter(|&(_, c)| c != 'I').collect();
        if ops.is_empty() {
            continue;
        }
        list.push((rng.random_range(-1.0..1.0), PauliString::new(n, &ops)?));
    }
    SpinHamiltonian::new(n, list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(&mut rng, 4);
        let d = linalg::dagger(&u).dot(&u) - linalg::identity(4);
        assert!(d.iter().all(|z| z.norm() < 1e-12));
        let h = random_hermitian(&mut rng, 4, 0.5).unwrap();
        assert!((linalg::hermitian_op_norm(&h).unwrap() - 0.5).abs() < 1e-12);
        let m = random_povm(&mut rng, vec![0], 3).unwrap();
        assert_eq!(m.num_outcomes(), 3);
        let rho = random_density(&mut rng, vec![0, 1], 2).unwrap();
        assert_eq!(rho.eigenvalues().unwrap().iter().filter(|&&x| x > 1e-12).count(), 2);
    }
}
