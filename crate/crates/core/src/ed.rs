//! Spin Hamiltonians as Pauli sums, exact diagonalization, Gibbs states,
//! dynamical correlators and the finite-difference Holevo oracle.
//!
//! Hamiltonians that commute with the global spin flip `P = ∏_j X_j` are
//! diagonalized block by block in the X basis, where `P` is diagonal. The
//! eigensystem then stores vectors in that frame, and local observables and
//! reduced states are rotated with single-site Hadamards on the fly.

use ndarray::{Array1, Array2, Axis};

use crate::entropy::von_neumann_entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::measurement::{apply_measurement, holevo_information, MeasurementSpec};
use crate::perturbative::{f_beta, Chi2Method, Chi2Result, SpectralLines};
use crate::purification::canonical_purification;
use crate::state::{check_operator, max_dense_qubits, DensityOperator, Split};

/// Tensor product of single-site Paulis on an `n`-site chain.
///
/// Site `j` is bit `n - 1 - j` of a basis index (site 0 most significant).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn new(n: usize, ops: &[(usize, char)]) -> Result<Self> {
        if n > 30 {
            return Err(Error::TooManyQubits { qubits: n, cap: 30 });
        }
        let mut x_mask = 0;
        let mut z_mask = 0;
        for &(site, c) in ops {
            if site >= n {
                return Err(Error::UnknownSite(site));
            }
            let bit = 1usize << (n - 1 - site);
            if (x_mask | z_mask) & bit != 0 {
                return Err(Error::DuplicateSite(site));
            }
            match c {
                'I' => {}
                'X' => x_mask |= bit,
                'Z' => z_mask |= bit,
                'Y' => {
                    x_mask |= bit;
                    z_mask |= bit;
                }
                _ => return Err(Error::InvalidParameter(format!("unknown Pauli '{c}'"))),
            }
        }
        Ok(Self { n, x_mask, z_mask })
    }

    /// Parses space-separated factors such as `"X0 Z3"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for tok in text.split_whitespace() {
            let mut chars = tok.chars();
            let c = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or(' ');
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse Pauli factor '{tok}'")))?;
            ops.push((site, c));
        }
        Self::new(n, &ops)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn num_y(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Real matrix in the computational basis (even number of Y factors).
    pub fn is_real(&self) -> bool {
        self.num_y().is_multiple_of(2)
    }

    /// Whether the string commutes with `∏_j X_j`.
    pub fn commutes_with_parity(&self) -> bool {
        self.z_mask.count_ones().is_multiple_of(2)
    }

    /// `P|s⟩ = phase |s'⟩`, using `Y = iXZ`.
    #[inline]
    pub fn apply_basis(&self, s: usize) -> (usize, C64) {
        let sign = if (s & self.z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let phase = match self.num_y() % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        };
        (s ^ self.x_mask, phase)
    }

    /// The same operator expressed in the Hadamard-rotated basis:
    /// X ↔ Z and Y → −Y. The sign is returned separately.
    fn in_x_frame(&self) -> (Self, f64) {
        let sign = if self.num_y().is_multiple_of(2) { 1.0 } else { -1.0 };
        (Self { n: self.n, x_mask: self.z_mask, z_mask: self.x_mask }, sign)
    }

    /// Sites carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| (self.x_mask | self.z_mask) & (1 << (self.n - 1 - j)) != 0).collect()
    }

    /// Dense matrix on [`Self::support`].
    pub fn local_matrix(&self) -> (Array2<C64>, Vec<usize>) {
        let sites = self.support();
        let mut m = Array2::from_elem((1, 1), ONE);
        for &j in &sites {
            let bit = 1usize << (self.n - 1 - j);
            let c = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (true, false) => 'X',
                (false, true) => 'Z',
                _ => 'Y',
            };
            m = linalg::kron(&m, &crate::state::pauli::by_name(c).unwrap());
        }
        (m, sites)
    }
}

/// `H = Σ_t c_t P_t` on `n` sites.
#[derive(Clone, Debug)]
pub struct SpinHamiltonian {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl SpinHamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySiteSet);
        }
        for (c, p) in &terms {
            if p.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n });
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter(format!("coefficient {c}")));
            }
        }
        Ok(Self { n, terms })
    }

    /// Parses terms of the form `"-1.0 Z0 Z1"`.
    pub fn from_terms(n: usize, lines: &[impl AsRef<str>]) -> Result<Self> {
        let mut terms = Vec::new();
        for line in lines {
            let line = line.as_ref().trim();
            let (coef, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let c: f64 = coef.parse().map_err(|_| Error::InvalidParameter(format!("bad coefficient in '{line}'")))?;
            terms.push((c, PauliString::parse(n, rest)?));
        }
        Self::new(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_real())
    }

    pub fn commutes_with_parity(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.commutes_with_parity())
    }

    /// Dense `2^n x 2^n` matrix in the computational basis.
    pub fn dense(&self) -> Result<Array2<C64>> {
        if self.n > max_dense_qubits() {
            return Err(Error::TooManyQubits { qubits: self.n, cap: max_dense_qubits() });
        }
        let d = 1usize << self.n;
        let mut h = Array2::from_elem((d, d), ZERO);
        for s in 0..d {
            for (c, p) in &self.terms {
                let (t, phase) = p.apply_basis(s);
                h[[t, s]] += phase * *c;
            }
        }
        Ok(h)
    }
}

/// `H = −Σ_j Z_j Z_{j+1} − g Σ_j X_j` with open boundaries.
pub fn build_tfim(n: usize, g: f64) -> Result<SpinHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("TFIM needs n >= 2, got {n}")));
    }
    let mut terms = Vec::with_capacity(2 * n - 1);
    for j in 0..n - 1 {
        terms.push((-1.0, PauliString::new(n, &[(j, 'Z'), (j + 1, 'Z')])?));
    }
    for j in 0..n {
        terms.push((-g, PauliString::new(n, &[(j, 'X')])?));
    }
    SpinHamiltonian::new(n, terms)
}

/// A Hamiltonian at inverse temperature β.
#[derive(Clone, Debug)]
pub struct GibbsSpec {
    pub h: SpinHamiltonian,
    pub beta: f64,
}

impl GibbsSpec {
    pub fn new(h: SpinHamiltonian, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        Ok(Self { h, beta })
    }
}

/// Scalars the eigensystem can be stored in.
pub trait Field: ndarray::LinalgScalar + Send + Sync + std::fmt::Debug {
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn real(self) -> f64;
    fn to_c64(self) -> C64;
    fn from_c64(z: C64) -> Option<Self>;
    fn eigh(a: &Array2<Self>) -> Result<(Vec<f64>, Array2<Self>)>;
}

impl Field for f64 {
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn real(self) -> f64 {
        self
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn from_c64(z: C64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    fn eigh(a: &Array2<Self>) -> Result<(Vec<f64>, Array2<Self>)> {
        linalg::eigh_real(a)
    }
}

impl Field for C64 {
    fn conj(self) -> Self {
        num_complex::Complex::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn from_c64(z: C64) -> Option<Self> {
        Some(z)
    }
    fn eigh(a: &Array2<Self>) -> Result<(Vec<f64>, Array2<Self>)> {
        linalg::eigh(a)
    }
}

/// Basis frame in which eigenvectors are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// Computational (Z) basis.
    Computational,
    /// Every site rotated by a Hadamard.
    Hadamard,
}

/// Eigenvectors restricted to one symmetry sector.
#[derive(Clone, Debug)]
pub struct Sector<S> {
    /// Full basis indices (in the storage frame) spanned by the sector.
    pub basis: Vec<usize>,
    pub energies: Vec<f64>,
    /// `basis.len() x energies.len()`, eigenvectors in columns.
    pub vectors: Array2<S>,
    /// Eigenvalue of `∏ X` on the sector, 0 when unresolved.
    pub parity: i8,
}

#[derive(Clone, Debug)]
enum Store {
    Real(Vec<Sector<f64>>),
    Complex(Vec<Sector<C64>>),
}

/// Full spectral decomposition of a spin Hamiltonian.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    n: usize,
    frame: Frame,
    store: Store,
}

fn build_sector<S: Field>(h: &SpinHamiltonian, basis: Vec<usize>, frame: Frame, parity: i8) -> Result<Sector<S>> {
    let d = 1usize << h.n;
    let mut local = vec![usize::MAX; d];
    for (i, &s) in basis.iter().enumerate() {
        local[s] = i;
    }
    let terms: Vec<(f64, PauliString)> = match frame {
        Frame::Computational => h.terms.clone(),
        Frame::Hadamard => h
            .terms
            .iter()
            .map(|(c, p)| {
                let (q, sign) = p.in_x_frame();
                (c * sign, q)
            })
            .collect(),
    };
    let k = basis.len();
    let mut m = Array2::<S>::zeros((k, k));
    for (j, &s) in basis.iter().enumerate() {
        for (c, p) in &terms {
            let (t, phase) = p.apply_basis(s);
            let i = local[t];
            if i == usize::MAX {
                return Err(Error::InvalidParameter("term leaves its symmetry sector".into()));
            }
            let v = S::from_c64(phase * *c).ok_or_else(|| Error::Unsupported("complex term in real storage".into()))?;
            m[[i, j]] = m[[i, j]] + v;
        }
    }
    let (energies, vectors) = S::eigh(&m)?;
    Ok(Sector { basis, energies, vectors, parity })
}

fn build_store<S: Field>(h: &SpinHamiltonian) -> Result<(Frame, Vec<Sector<S>>)> {
    let d = 1usize << h.n;
    if h.commutes_with_parity() {
        let even: Vec<usize> = (0..d).filter(|s| s.count_ones() % 2 == 0).collect();
        let odd: Vec<usize> = (0..d).filter(|s| s.count_ones() % 2 == 1).collect();
        let sectors = vec![
            build_sector::<S>(h, even, Frame::Hadamard, 1)?,
            build_sector::<S>(h, odd, Frame::Hadamard, -1)?,
        ];
        Ok((Frame::Hadamard, sectors))
    } else {
        Ok((Frame::Computational, vec![build_sector::<S>(h, (0..d).collect(), Frame::Computational, 0)?]))
    }
}

/// Diagonalizes `h`, splitting by spin-flip parity when it is a symmetry.
pub fn diagonalize(h: &SpinHamiltonian) -> Result<Eigensystem> {
    if h.n > max_dense_qubits() {
        return Err(Error::TooManyQubits { qubits: h.n, cap: max_dense_qubits() });
    }
    let (frame, store) = if h.is_real() {
        let (f, s) = build_store::<f64>(h)?;
        (f, Store::Real(s))
    } else {
        let (f, s) = build_store::<C64>(h)?;
        (f, Store::Complex(s))
    };
    Ok(Eigensystem { n: h.n, frame, store })
}

/// `H^{⊗k}` on `k` qubits.
fn hadamard_power(k: usize) -> Array2<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = ndarray::array![[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
    (0..k).fold(Array2::from_elem((1, 1), ONE), |acc, _| linalg::kron(&acc, &one))
}

/// `(op ⊗ I)` applied to the rows of `mat` (rows indexed by full basis index).
fn apply_rows<S: Field>(op: &Array2<S>, mat: &Array2<S>, split: &Split) -> Array2<S> {
    let kd = split.keep_dim();
    let mut out = Array2::<S>::zeros(mat.dim());
    for r in 0..split.rest_dim() {
        for a in 0..kd {
            let mut row = out.row_mut(split.index(a, r));
            for b in 0..kd {
                let c = op[[a, b]];
                if c.abs2() != 0.0 {
                    row.scaled_add(c, &mat.row(split.index(b, r)));
                }
            }
        }
    }
    out
}

/// Matrix elements of an observable between two sectors.
struct ElementBlock {
    rows: usize,
    cols: usize,
    /// `|O_nm|²` with n in the row sector and m in the column sector.
    abs2: Array2<f64>,
    /// `O_nn` when rows == cols.
    diag: Option<Vec<f64>>,
}

fn scatter<S: Field>(sector: &Sector<S>, d: usize) -> Array2<S> {
    let mut full = Array2::<S>::zeros((d, sector.vectors.ncols()));
    for (i, &s) in sector.basis.iter().enumerate() {
        full.row_mut(s).assign(&sector.vectors.row(i));
    }
    full
}

fn element_blocks<S: Field>(
    sectors: &[Sector<S>],
    op: &Array2<S>,
    split: &Split,
    d: usize,
    parity: Option<i8>,
) -> Vec<ElementBlock> {
    let mut out = Vec::new();
    for (cj, col) in sectors.iter().enumerate() {
        let applied = apply_rows(op, &scatter(col, d), split);
        for (ri, row) in sectors.iter().enumerate() {
            let allowed = match (parity, row.parity, col.parity) {
                (Some(p), r, c) if r != 0 && c != 0 => r == p * c,
                _ => true,
            };
            if !allowed {
                continue;
            }
            let gathered = applied.select(Axis(0), &row.basis);
            let conj_rows = row.vectors.mapv(|z| z.conj());
            let block = conj_rows.t().dot(&gathered);
            let diag = (ri == cj).then(|| block.diag().iter().map(|z| z.real()).collect());
            out.push(ElementBlock { rows: ri, cols: cj, abs2: block.mapv(|z| z.abs2()), diag });
        }
    }
    out
}

fn thermal_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Sectorwise `Σ_n p_n |n⟩⟨n|` restricted to region X, in the storage frame.
fn reduced_sectors<S: Field>(sectors: &[Sector<S>], weights: &[Vec<f64>], split: &Split, d: usize) -> Array2<C64> {
    let kd = split.keep_dim();
    let rd = split.rest_dim();
    let mut rho = Array2::from_elem((kd, kd), ZERO);
    for (sector, p) in sectors.iter().zip(weights) {
        let keep: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 1e-300).collect();
        if keep.is_empty() {
            continue;
        }
        let full = scatter(sector, d);
        let mut y = Array2::<S>::zeros((kd, rd * keep.len()));
        for a in 0..kd {
            for r in 0..rd {
                let src = full.row(split.index(a, r));
                for (c, &i) in keep.iter().enumerate() {
                    y[[a, r * keep.len() + c]] = src[i] * S::from_c64(C64::new(p[i].sqrt(), 0.0)).unwrap();
                }
            }
        }
        let part = y.dot(&y.t().mapv(|z| z.conj()));
        rho.zip_mut_with(&part, |acc, &v| *acc += v.to_c64());
    }
    rho
}

/// Gibbs ensemble `p_n ∝ e^{−βE_n}` over an eigensystem.
#[derive(Clone, Debug)]
pub struct ThermalEd {
    eig: Eigensystem,
    beta: f64,
    weights: Vec<Vec<f64>>,
}

/// A local observable: a dense Hermitian matrix on a few sites.
#[derive(Clone, Debug)]
pub struct LocalObservable {
    pub matrix: Array2<C64>,
    pub sites: Vec<usize>,
}

impl LocalObservable {
    pub fn new(matrix: Array2<C64>, sites: Vec<usize>) -> Result<Self> {
        check_operator(&matrix, &sites)?;
        let defect = linalg::hermiticity_defect(&matrix.view());
        if defect > crate::state::HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { matrix, sites })
    }

    /// Single-site Pauli `c ∈ {X, Y, Z}` at `site`.
    pub fn pauli(c: char, site: usize) -> Result<Self> {
        let m = crate::state::pauli::by_name(c).ok_or_else(|| Error::InvalidParameter(format!("Pauli '{c}'")))?;
        Self::new(m, vec![site])
    }

    pub fn from_pauli_string(p: &PauliString) -> Result<Self> {
        let (m, sites) = p.local_matrix();
        if sites.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        Self::new(m, sites)
    }

    /// +1 if the observable commutes with `∏ X`, −1 if it anticommutes,
    /// `None` otherwise.
    fn parity(&self) -> Option<i8> {
        let flip = (0..self.sites.len()).fold(Array2::from_elem((1, 1), ONE), |acc, _| {
            linalg::kron(&acc, &crate::state::pauli::x())
        });
        let conj = flip.dot(&self.matrix).dot(&flip);
        let close = |sign: f64| (&conj - &(&self.matrix * C64::new(sign, 0.0))).iter().all(|z| z.norm() < 1e-12);
        if close(1.0) {
            Some(1)
        } else if close(-1.0) {
            Some(-1)
        } else {
            None
        }
    }
}

impl Eigensystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// All energies, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = match &self.store {
            Store::Real(s) => s.iter().flat_map(|x| x.energies.iter().copied()).collect(),
            Store::Complex(s) => s.iter().flat_map(|x| x.energies.iter().copied()).collect(),
        };
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    fn sector_energies(&self) -> Vec<Vec<f64>> {
        match &self.store {
            Store::Real(s) => s.iter().map(|x| x.energies.clone()).collect(),
            Store::Complex(s) => s.iter().map(|x| x.energies.clone()).collect(),
        }
    }

    pub fn thermal(self, beta: f64) -> Result<ThermalEd> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        let sector_e = self.sector_energies();
        let all: Vec<f64> = sector_e.iter().flatten().copied().collect();
        let flat = thermal_weights(&all, beta);
        let mut weights = Vec::new();
        let mut offset = 0;
        for e in &sector_e {
            weights.push(flat[offset..offset + e.len()].to_vec());
            offset += e.len();
        }
        Ok(ThermalEd { eig: self, beta, weights })
    }

    /// The observable expressed in the storage frame.
    fn framed(&self, o: &LocalObservable) -> Array2<C64> {
        match self.frame {
            Frame::Computational => o.matrix.clone(),
            Frame::Hadamard => {
                let h = hadamard_power(o.sites.len());
                h.dot(&o.matrix).dot(&h)
            }
        }
    }

    fn blocks(&self, o: &LocalObservable) -> Result<Vec<ElementBlock>> {
        for &s in &o.sites {
            if s >= self.n {
                return Err(Error::UnknownSite(s));
            }
        }
        let sites: Vec<usize> = (0..self.n).collect();
        let split = Split::new(&sites, &o.sites)?;
        let op = self.framed(o);
        let parity = o.parity();
        let d = 1usize << self.n;
        Ok(match &self.store {
            Store::Real(sectors) => {
                let real: Option<Array2<f64>> = op.iter().all(|z| z.im.abs() < 1e-15).then(|| op.mapv(|z| z.re));
                match real {
                    Some(r) => element_blocks(sectors, &r, &split, d, parity),
                    None => {
                        let promoted: Vec<Sector<C64>> = sectors
                            .iter()
                            .map(|s| Sector {
                                basis: s.basis.clone(),
                                energies: s.energies.clone(),
                                vectors: linalg::to_complex(&s.vectors),
                                parity: s.parity,
                            })
                            .collect();
                        element_blocks(&promoted, &op, &split, d, parity)
                    }
                }
            }
            Store::Complex(sectors) => element_blocks(sectors, &op, &split, d, parity),
        })
    }
}

impl ThermalEd {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn energy(&self) -> f64 {
        self.eig.sector_energies().iter().zip(&self.weights).flat_map(|(e, p)| e.iter().zip(p).map(|(x, y)| x * y)).sum()
    }

    /// Thermal entropy `−Σ p ln p` of the full state.
    pub fn entropy(&self) -> f64 {
        self.weights.iter().flatten().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }

    /// `Tr[ρ_β O]`, through the reduced state on the support of O.
    pub fn expectation(&self, o: &LocalObservable) -> Result<f64> {
        let rho = self.reduced(&o.sites)?;
        Ok(linalg::trace(&rho.matrix().dot(&o.matrix)).re)
    }

    /// Reduced Gibbs state on `region` (computational basis, sites in the given order).
    pub fn reduced(&self, region: &[usize]) -> Result<DensityOperator> {
        if region.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        let sites: Vec<usize> = (0..self.eig.n).collect();
        let split = Split::new(&sites, region)?;
        let d = 1usize << self.eig.n;
        let mut rho = match &self.eig.store {
            Store::Real(s) => reduced_sectors(s, &self.weights, &split, d),
            Store::Complex(s) => reduced_sectors(s, &self.weights, &split, d),
        };
        if self.eig.frame == Frame::Hadamard {
            let h = hadamard_power(region.len());
            rho = h.dot(&rho).dot(&h);
        }
        DensityOperator::new(rho, region.to_vec())
    }

    /// Entropy of the reduced Gibbs state on `region`.
    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<f64> {
        von_neumann_entropy(&self.reduced(region)?)
    }

    /// The full Gibbs state as a dense density operator.
    pub fn density(&self) -> Result<DensityOperator> {
        let all: Vec<usize> = (0..self.eig.n).collect();
        self.reduced(&all)
    }

    /// `χ⁽²⁾_E = ½ (Σ_{n,m} p_m |O_nm|² f_β(E_n − E_m) − ⟨O⟩²)`.
    pub fn chi2_e_eigensum(&self, o: &LocalObservable) -> Result<Chi2Result> {
        let blocks = self.eig.blocks(o)?;
        let energies = self.eig.sector_energies();
        let mut mean = 0.0;
        let mut acc = 0.0;
        for b in &blocks {
            if let Some(d) = &b.diag {
                mean += d.iter().zip(&self.weights[b.rows]).map(|(o, p)| o * p).sum::<f64>();
            }
            let (er, ec, pc) = (&energies[b.rows], &energies[b.cols], &self.weights[b.cols]);
            for m in 0..ec.len() {
                if pc[m] == 0.0 {
                    continue;
                }
                let mut col = 0.0;
                for (n, &en) in er.iter().enumerate() {
                    col += b.abs2[[n, m]] * f_beta(self.beta, en - ec[m]);
                }
                acc += pc[m] * col;
            }
        }
        Ok(Chi2Result { value: 0.5 * (acc - mean * mean), region: "E".into(), method: Chi2Method::Eigensum })
    }

    /// Connected correlator `C_β(t) = ⟨O(t) O⟩ − ⟨O⟩²` as spectral lines
    /// `ω = E_n − E_m` with weight `p_m |O_nm|²`. Lines at zero frequency are
    /// merged and carry the disconnected subtraction.
    pub fn spectral_lines(&self, o: &LocalObservable) -> Result<SpectralLines> {
        let blocks = self.eig.blocks(o)?;
        let energies = self.eig.sector_energies();
        let mut lines = SpectralLines::default();
        let mut zero = 0.0;
        let mut mean = 0.0;
        for b in &blocks {
            if let Some(d) = &b.diag {
                mean += d.iter().zip(&self.weights[b.rows]).map(|(o, p)| o * p).sum::<f64>();
            }
            let (er, ec, pc) = (&energies[b.rows], &energies[b.cols], &self.weights[b.cols]);
            for m in 0..ec.len() {
                for (n, &en) in er.iter().enumerate() {
                    let w = pc[m] * b.abs2[[n, m]];
                    if w == 0.0 {
                        continue;
                    }
                    let omega = en - ec[m];
                    if omega.abs() < 1e-12 {
                        zero += w;
                    } else {
                        lines.frequencies.push(omega);
                        lines.weights.push(w);
                    }
                }
            }
        }
        let connected_zero = zero - mean * mean;
        if connected_zero.abs() > 1e-14 {
            lines.frequencies.push(0.0);
            lines.weights.push(connected_zero.max(0.0));
        }
        Ok(lines)
    }
}

/// `ρ_β = e^{−βH} / Tr e^{−βH}` (energies shifted by the ground energy).
pub fn gibbs_state(spec: &GibbsSpec) -> Result<DensityOperator> {
    diagonalize(&spec.h)?.thermal(spec.beta)?.density()
}

/// Thermal ensemble for repeated queries at one β.
pub fn thermal_ed(spec: &GibbsSpec) -> Result<ThermalEd> {
    diagonalize(&spec.h)?.thermal(spec.beta)
}

/// Where to evaluate a dynamical correlator.
#[derive(Clone, Debug)]
pub enum CorrelatorQuery {
    Times(Vec<f64>),
    /// Return the exact spectral lines.
    Frequencies,
}

/// Output of [`dynamical_correlation`].
#[derive(Clone, Debug)]
pub enum CorrelatorSamples {
    Times(Vec<(f64, C64)>),
    Lines(SpectralLines),
}

/// `C_β(O, t) = Tr[O(t) O ρ_β] − Tr[O ρ_β]²` in the time or frequency domain.
pub fn dynamical_correlation(spec: &GibbsSpec, o: &LocalObservable, query: &CorrelatorQuery) -> Result<CorrelatorSamples> {
    let lines = thermal_ed(spec)?.spectral_lines(o)?;
    Ok(match query {
        CorrelatorQuery::Frequencies => CorrelatorSamples::Lines(lines),
        CorrelatorQuery::Times(ts) => CorrelatorSamples::Times(ts.iter().map(|&t| (t, lines.time_domain(t))).collect()),
    })
}

/// `χ⁽²⁾_E` from the eigenbasis sum, diagonalizing `h` first.
pub fn chi2_e_eigensum(h: &SpinHamiltonian, beta: f64, o: &LocalObservable) -> Result<Chi2Result> {
    diagonalize(h)?.thermal(beta)?.chi2_e_eigensum(o)
}

/// Richardson-extrapolated estimate of χ⁽²⁾ for one region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub uncertainty: f64,
}

/// Finite-difference estimates of `½ ∂²χ_X/∂μ²` at μ = 0.
#[derive(Clone, Debug)]
pub struct OracleEstimate {
    pub chi2_b: OracleValue,
    pub chi2_e: OracleValue,
    /// `(μ, χ_B(μ), χ_E(μ))` for each grid point.
    pub samples: Vec<(f64, f64, f64)>,
}

/// The default μ grid `{1e-2, 5e-3, 2.5e-3}`.
pub const ORACLE_MU_GRID: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Richardson tableau for `c(μ) = c₀ + c₂μ² + c₄μ⁴ + …` on a halving grid.
fn richardson(values: &[f64]) -> OracleValue {
    let mut row: Vec<f64> = values.to_vec();
    let mut prev_best = row[row.len() - 1];
    let mut factor = 4.0;
    while row.len() > 1 {
        prev_best = row[row.len() - 1];
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    OracleValue { value: row[0], uncertainty: (row[0] - prev_best).abs() }
}

/// Brute-force oracle: canonical purification of the Gibbs state, the exact
/// weak POVM `½(I ± μO)` at each grid μ, exact Holevo quantities, and
/// Richardson extrapolation of `χ(μ)/μ²`.
pub fn holevo_finite_difference_oracle(
    spec: &GibbsSpec,
    o: &LocalObservable,
    b: &[usize],
    mu_grid: &[f64],
) -> Result<OracleEstimate> {
    if mu_grid.len() < 3 {
        return Err(Error::InvalidParameter("at least three mu values are needed".into()));
    }
    for w in mu_grid.windows(2) {
        if (w[1] / w[0] - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidParameter("mu grid must halve at each step".into()));
        }
    }
    if mu_grid.iter().any(|&m| !(m > 0.0 && m <= 0.05)) {
        return Err(Error::InvalidParameter("mu values must lie in (0, 0.05]".into()));
    }
    let rho = gibbs_state(spec)?;
    let psi = canonical_purification(&rho)?;
    let mut samples = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let m = MeasurementSpec::weak_symmetric(o.sites.clone(), &o.matrix, mu)?;
        let ens = apply_measurement(&psi, &m)?;
        samples.push((mu, holevo_information(&ens, b)?, holevo_information(&ens, psi.env_sites())?));
    }
    let cb: Vec<f64> = samples.iter().map(|(m, x, _)| x / (m * m)).collect();
    let ce: Vec<f64> = samples.iter().map(|(m, _, x)| x / (m * m)).collect();
    let (chi2_b, chi2_e) = (richardson(&cb), richardson(&ce));
    for v in [chi2_b, chi2_e] {
        if v.uncertainty > 1e-3 * v.value.abs() + 1e-10 {
            return Err(Error::NonConvergent { value: v.value, uncertainty: v.uncertainty });
        }
    }
    Ok(OracleEstimate { chi2_b, chi2_e, samples })
}

/// Normalized in-place Walsh–Hadamard transform (`H^{⊗n}` on a vector).
pub fn fwht(v: &mut Array1<C64>) {
    let d = v.len();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = 1;
    while h < d {
        for i in (0..d).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = (a + b) * scale;
                v[j + h] = (a - b) * scale;
            }
        }
        h *= 2;
    }
}
