//! Dense states over labeled qubit registers.
//!
//! Basis ordering is big-endian in the stored site list: the first site is
//! the most significant bit of the basis index.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};

/// Default cap on the number of system qubits a density operator may carry.
pub const DEFAULT_MAX_QUBITS: usize = 14;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

/// Current cap on density-operator qubits.
pub fn max_dense_qubits() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Changes the density-operator cap. State vectors may carry up to twice the
/// cap plus two ancillas, enough for a purification and a measurement record.
pub fn set_max_dense_qubits(n: usize) {
    MAX_QUBITS.store(n, Ordering::Relaxed);
}

fn vector_cap() -> usize {
    2 * max_dense_qubits() + 2
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

pub(crate) fn check_distinct(sites: &[usize]) -> Result<()> {
    for (i, s) in sites.iter().enumerate() {
        if sites[..i].contains(s) {
            return Err(Error::DuplicateSite(*s));
        }
    }
    Ok(())
}

/// Index tables for viewing a register as `keep ⊗ rest`.
///
/// The full basis index of `(a, r)` is `keep_part[a] | rest_part[r]`, where
/// `a` enumerates `keep` in the given order and `r` the remaining sites in
/// register order.
#[derive(Clone, Debug)]
pub(crate) struct Split {
    pub keep_part: Vec<usize>,
    pub rest_part: Vec<usize>,
    pub rest_sites: Vec<usize>,
}

impl Split {
    pub fn new(sites: &[usize], keep: &[usize]) -> Result<Self> {
        check_distinct(keep)?;
        let m = sites.len();
        let position = |s: usize| sites.iter().position(|&t| t == s).ok_or(Error::UnknownSite(s));
        let keep_masks: Vec<usize> =
            keep.iter().map(|&s| position(s).map(|p| 1usize << (m - 1 - p))).collect::<Result<_>>()?;
        let rest_sites: Vec<usize> = sites.iter().copied().filter(|s| !keep.contains(s)).collect();
        let rest_masks: Vec<usize> = rest_sites.iter().map(|&s| 1usize << (m - 1 - position(s).unwrap())).collect();
        Ok(Self { keep_part: deposit_table(&keep_masks), rest_part: deposit_table(&rest_masks), rest_sites })
    }

    pub fn keep_dim(&self) -> usize {
        self.keep_part.len()
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_part.len()
    }

    #[inline]
    pub fn index(&self, a: usize, r: usize) -> usize {
        self.keep_part[a] | self.rest_part[r]
    }
}

/// For bit masks listed most-significant first, the table mapping a compact
/// index to the OR of the masks of its set bits.
fn deposit_table(masks: &[usize]) -> Vec<usize> {
    let k = masks.len();
    let mut table = vec![0usize; 1 << k];
    for (bit, &mask) in masks.iter().rev().enumerate() {
        let half = 1 << bit;
        for i in 0..half {
            table[i | half] = table[i] | mask;
        }
    }
    table
}

/// `(op ⊗ I) mat`, where the rows of `mat` are ordered `(a, r)` with `a`
/// the operator's index and `r` the spectator index.
fn apply_left_blocked(op: &Array2<C64>, mat: Array2<C64>, spectator_dim: usize) -> Array2<C64> {
    let mat = if mat.is_standard_layout() { mat } else { mat.as_standard_layout().into_owned() };
    let (rows, cols) = mat.dim();
    let kd = rows / spectator_dim;
    let reshaped = mat.into_shape_with_order((kd, spectator_dim * cols)).expect("contiguous");
    let out = op.dot(&reshaped);
    let od = op.nrows();
    out.into_shape_with_order((od * spectator_dim, cols)).expect("contiguous")
}

/// Checks that `op` is a square matrix on `sites`.
pub(crate) fn check_operator(op: &Array2<C64>, sites: &[usize]) -> Result<()> {
    let d = 1usize << sites.len();
    if op.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
    }
    Ok(())
}

/// Unit vector in `C^(2^m)` over labeled sites.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Array1<C64>,
    sites: Vec<usize>,
}

impl StateVector {
    /// Validates length and unit norm (to 1e-12).
    pub fn new(amps: Array1<C64>, sites: Vec<usize>) -> Result<Self> {
        let v = Self::unchecked(amps, sites)?;
        let norm = linalg::norm_sqr(&v.amps).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(v)
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Array1<C64>, sites: Vec<usize>) -> Result<Self> {
        let mut v = Self::unchecked(amps, sites)?;
        let norm = linalg::norm_sqr(&v.amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        v.amps.mapv_inplace(|z| z / norm);
        Ok(v)
    }

    pub(crate) fn unchecked(amps: Array1<C64>, sites: Vec<usize>) -> Result<Self> {
        check_distinct(&sites)?;
        if sites.len() > vector_cap() {
            return Err(Error::TooManyQubits { qubits: sites.len(), cap: vector_cap() });
        }
        let d = 1usize << sites.len();
        if amps.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amps.len() });
        }
        Ok(Self { amps, sites })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(sites: Vec<usize>, index: usize) -> Result<Self> {
        let d = 1usize << sites.len();
        if index >= d {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        let mut amps = Array1::from_elem(d, ZERO);
        amps[index] = ONE;
        Self::new(amps, sites)
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn num_qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        let mut amps = Array1::from_elem(self.dim() * other.dim(), ZERO);
        for (i, &x) in self.amps.iter().enumerate() {
            for (j, &y) in other.amps.iter().enumerate() {
                amps[i * other.dim() + j] = x * y;
            }
        }
        Self::unchecked(amps, sites)
    }

    /// Amplitudes arranged as a `keep x rest` matrix.
    pub(crate) fn matricize(&self, split: &Split) -> Array2<C64> {
        Array2::from_shape_fn((split.keep_dim(), split.rest_dim()), |(a, r)| self.amps[split.index(a, r)])
    }

    /// Same state with sites listed in `order` (a permutation of the sites).
    pub fn permuted(&self, order: &[usize]) -> Result<StateVector> {
        if order.len() != self.sites.len() {
            return Err(Error::DimensionMismatch { expected: self.sites.len(), found: order.len() });
        }
        let split = Split::new(&self.sites, order)?;
        let amps = Array1::from_shape_fn(self.dim(), |a| self.amps[split.keep_part[a]]);
        Ok(Self { amps, sites: order.to_vec() })
    }

    /// Reduced density operator on `keep` (in the given order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        if keep.len() > max_dense_qubits() {
            return Err(Error::TooManyQubits { qubits: keep.len(), cap: max_dense_qubits() });
        }
        let split = Split::new(&self.sites, keep)?;
        let m = self.matricize(&split);
        let mut rho = m.dot(&linalg::dagger(&m));
        linalg::hermitize(&mut rho);
        Ok(DensityOperator { matrix: rho, sites: keep.to_vec() })
    }

    /// `(op ⊗ I)|self⟩` without renormalization; `op` acts on `op_sites`.
    pub fn apply_local(&self, op: &Array2<C64>, op_sites: &[usize]) -> Result<Array1<C64>> {
        check_operator(op, op_sites)?;
        let split = Split::new(&self.sites, op_sites)?;
        let m = self.matricize(&split);
        let out = op.dot(&m);
        let mut amps = Array1::from_elem(self.dim(), ZERO);
        for a in 0..split.keep_dim() {
            for r in 0..split.rest_dim() {
                amps[split.index(a, r)] = out[[a, r]];
            }
        }
        Ok(amps)
    }

    /// `⟨self| op |self⟩` for an operator on `op_sites`.
    pub fn expectation(&self, op: &Array2<C64>, op_sites: &[usize]) -> Result<C64> {
        let applied = self.apply_local(op, op_sites)?;
        Ok(linalg::inner(&self.amps, &applied))
    }

    /// Applies a linear map `w: in_sites -> out_sites` (an isometry, or any
    /// Kraus-type operator when `renormalize` is set). The result lists
    /// `out_sites` first, then the untouched sites in their previous order.
    pub fn apply_map(
        &self,
        w: &Array2<C64>,
        in_sites: &[usize],
        out_sites: &[usize],
        renormalize: bool,
    ) -> Result<StateVector> {
        let split = Split::new(&self.sites, in_sites)?;
        if w.dim() != (1 << out_sites.len(), split.keep_dim()) {
            return Err(Error::DimensionMismatch { expected: 1 << out_sites.len(), found: w.nrows() });
        }
        for s in out_sites {
            if split.rest_sites.contains(s) {
                return Err(Error::OverlappingRegions(*s));
            }
        }
        let out = w.dot(&self.matricize(&split));
        let mut sites = out_sites.to_vec();
        sites.extend_from_slice(&split.rest_sites);
        let amps = Array1::from_iter(out.iter().copied());
        if renormalize {
            Self::normalized(amps, sites)
        } else {
            Self::new(amps, sites)
        }
    }
}

/// Dense density operator over labeled sites.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: Array2<C64>,
    sites: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-10), spectrum (≥ -1e-10) and trace (1 ± 1e-10).
    pub fn new(matrix: Array2<C64>, sites: Vec<usize>) -> Result<Self> {
        check_distinct(&sites)?;
        if sites.len() > max_dense_qubits() {
            return Err(Error::TooManyQubits { qubits: sites.len(), cap: max_dense_qubits() });
        }
        check_operator(&matrix, &sites)?;
        let defect = linalg::hermiticity_defect(&matrix.view());
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let mut matrix = matrix;
        linalg::hermitize(&mut matrix);
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = linalg::eigvalsh(&matrix)?.first().copied().unwrap_or(0.0);
        if min < -NEGATIVITY_TOL {
            return Err(Error::NegativeSpectrum(min));
        }
        Ok(Self { matrix, sites })
    }

    /// Wraps a matrix known to be a valid state (e.g. a partial trace).
    pub(crate) fn from_trusted(mut matrix: Array2<C64>, sites: Vec<usize>) -> Self {
        linalg::hermitize(&mut matrix);
        Self { matrix, sites }
    }

    /// Rescales a PSD Hermitian matrix to unit trace.
    pub fn from_unnormalized(matrix: Array2<C64>, sites: Vec<usize>) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(matrix.mapv(|z| z / tr), sites)
    }

    pub fn pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        let d = v.len();
        let matrix = Array2::from_shape_fn((d, d), |(i, j)| v[i] * v[j].conj());
        Self::from_trusted(matrix, psi.sites().to_vec())
    }

    pub fn maximally_mixed(sites: Vec<usize>) -> Result<Self> {
        if sites.len() > max_dense_qubits() {
            return Err(Error::TooManyQubits { qubits: sites.len(), cap: max_dense_qubits() });
        }
        let d = 1usize << sites.len();
        Self::new(Array2::from_diag_elem(d, C64::new(1.0 / d as f64, 0.0)), sites)
    }

    /// `Σ p_i |ψ_i⟩⟨ψ_i|` for states on identical site lists.
    pub fn mixture(members: &[(f64, StateVector)]) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySiteSet)?;
        let sites = first.1.sites().to_vec();
        let d = first.1.dim();
        let mut matrix = Array2::from_elem((d, d), ZERO);
        for (p, psi) in members {
            let psi = if psi.sites() == sites.as_slice() { psi.clone() } else { psi.permuted(&sites)? };
            let v = psi.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    matrix[[i, j]] += v[i] * v[j].conj() * *p;
                }
            }
        }
        Self::new(matrix, sites)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn num_qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Same operator with sites listed in `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<DensityOperator> {
        if order.len() != self.sites.len() {
            return Err(Error::DimensionMismatch { expected: self.sites.len(), found: order.len() });
        }
        let split = Split::new(&self.sites, order)?;
        let kp = &split.keep_part;
        let matrix = Array2::from_shape_fn(self.matrix.dim(), |(a, b)| self.matrix[[kp[a], kp[b]]]);
        Ok(Self { matrix, sites: order.to_vec() })
    }

    /// Reduced density operator on `keep` (in the given order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        Ok(Self::from_trusted(partial_trace_matrix(&self.matrix, &self.sites, keep)?, keep.to_vec()))
    }

    /// `(op ⊗ I) ρ`, rows and columns in this state's site order.
    pub fn left_multiply(&self, op: &Array2<C64>, op_sites: &[usize]) -> Result<Array2<C64>> {
        check_operator(op, op_sites)?;
        let split = Split::new(&self.sites, op_sites)?;
        let mut out = Array2::from_elem(self.matrix.dim(), ZERO);
        for r in 0..split.rest_dim() {
            for a in 0..split.keep_dim() {
                let mut row = out.row_mut(split.index(a, r));
                for b in 0..split.keep_dim() {
                    let c = op[[a, b]];
                    if c != ZERO {
                        row.scaled_add(c, &self.matrix.row(split.index(b, r)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Tr[ρ op]` (real part) for a Hermitian operator on `op_sites`.
    pub fn expectation(&self, op: &Array2<C64>, op_sites: &[usize]) -> Result<f64> {
        check_operator(op, op_sites)?;
        let red = self.reduced(op_sites)?;
        Ok(linalg::frobenius_inner(op, &red.matrix).re)
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        check_distinct(&sites)?;
        Ok(Self::from_trusted(linalg::kron(&self.matrix, &other.matrix), sites))
    }

    /// `(K ⊗ I) ρ (K ⊗ I)†` for a map `K: in_sites -> out_sites`, without
    /// normalization. The result lists `out_sites` first, then the untouched
    /// sites in their previous order.
    pub fn conjugate_map(&self, k: &Array2<C64>, in_sites: &[usize], out_sites: &[usize]) -> Result<Array2<C64>> {
        let split = Split::new(&self.sites, in_sites)?;
        if k.dim() != (1 << out_sites.len(), split.keep_dim()) {
            return Err(Error::DimensionMismatch { expected: 1 << out_sites.len(), found: k.nrows() });
        }
        for s in out_sites {
            if split.rest_sites.contains(s) {
                return Err(Error::OverlappingRegions(*s));
            }
        }
        let mut order = in_sites.to_vec();
        order.extend_from_slice(&split.rest_sites);
        let rho = self.permuted(&order)?.matrix;
        let rd = split.rest_dim();
        let left = apply_left_blocked(k, rho, rd);
        Ok(apply_left_blocked(k, linalg::dagger(&left), rd))
    }

    /// Applies an isometry `w: in_sites -> out_sites` (see [`Self::conjugate_map`]).
    pub fn apply_isometry(&self, w: &Array2<C64>, in_sites: &[usize], out_sites: &[usize]) -> Result<DensityOperator> {
        let matrix = self.conjugate_map(w, in_sites, out_sites)?;
        let mut sites = out_sites.to_vec();
        sites.extend(self.sites.iter().copied().filter(|s| !in_sites.contains(s)));
        Self::new(matrix, sites)
    }
}

/// `Tr_{rest}[m]` for an arbitrary operator `m` on `sites`, keeping `keep`
/// in the given order.
pub fn partial_trace_matrix(m: &Array2<C64>, sites: &[usize], keep: &[usize]) -> Result<Array2<C64>> {
    if keep.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    let split = Split::new(sites, keep)?;
    if m.dim() != (1 << sites.len(), 1 << sites.len()) {
        return Err(Error::DimensionMismatch { expected: 1 << sites.len(), found: m.nrows() });
    }
    let kd = split.keep_dim();
    let mut out = Array2::from_elem((kd, kd), ZERO);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = ZERO;
            for r in 0..split.rest_dim() {
                acc += m[[split.index(a, r), split.index(b, r)]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

/// Common interface of pure and mixed states for entropic quantities.
pub trait QuantumState {
    fn sites(&self) -> &[usize];
    fn reduced_state(&self, keep: &[usize]) -> Result<DensityOperator>;
    /// Whether the global state is known to be pure.
    fn is_pure(&self) -> bool;
}

impl QuantumState for StateVector {
    fn sites(&self) -> &[usize] {
        &self.sites
    }
    fn reduced_state(&self, keep: &[usize]) -> Result<DensityOperator> {
        self.reduced(keep)
    }
    fn is_pure(&self) -> bool {
        true
    }
}

impl QuantumState for DensityOperator {
    fn sites(&self) -> &[usize] {
        &self.sites
    }
    fn reduced_state(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.len() == self.sites.len() {
            return self.permuted(keep);
        }
        self.reduced(keep)
    }
    fn is_pure(&self) -> bool {
        false
    }
}

/// Partial trace keeping `keep`.
pub fn partial_trace<S: QuantumState>(state: &S, keep: &[usize]) -> Result<DensityOperator> {
    state.reduced_state(keep)
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn i2() -> Array2<C64> {
        linalg::identity(2)
    }
    pub fn x() -> Array2<C64> {
        ndarray::array![[ZERO, ONE], [ONE, ZERO]]
    }
    pub fn y() -> Array2<C64> {
        ndarray::array![[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]
    }
    pub fn z() -> Array2<C64> {
        ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
    }
    /// Pauli by letter `I`, `X`, `Y`, `Z`.
    pub fn by_name(c: char) -> Option<Array2<C64>> {
        match c {
            'I' => Some(i2()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }
}
