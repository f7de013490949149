//! Open transverse-field Ising chains `H = −Σ Z_j Z_{j+1} − g Σ X_j` as free
//! Majorana fermions.
//!
//! Jordan–Wigner convention:
//!
//! ```text
//! a_{2j}   = (∏_{k<j} X_k) Z_j
//! a_{2j+1} = (∏_{k<j} X_k) Y_j
//! X_j      = i a_{2j} a_{2j+1} = 1 − 2 c†_j c_j,   c_j = (a_{2j} − i a_{2j+1}) / 2
//! ```
//!
//! so `H = (i/4) Σ_pq A_pq a_p a_q` with `A_{2j,2j+1} = −2g` and
//! `A_{2j+1,2j+2} = −2`. Writing the even/odd block of `A` as `M = U Σ Vᵀ`,
//! the Bogoliubov Majoranas are `b_{2k} = Σ_j U_jk a_{2j}` and
//! `b_{2k+1} = Σ_j V_jk a_{2j+1}`, and `H = Σ_k ε_k (½ − n_k)` with `ε_k = Σ_kk`.
//! Covariances are `Γ_pq = i⟨a_p a_q⟩` for `p ≠ q`.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::perturbative::{f_beta, Chi2Method, Chi2Result, SpectralLines};

/// Single-particle data of the open TFIM.
#[derive(Clone, Debug)]
pub struct BogoliubovSpectrum {
    n: usize,
    g: f64,
    energies: Vec<f64>,
    /// `b = W a`, 2n x 2n orthogonal.
    w: Array2<f64>,
}

/// `Γ_pq = i⟨a_p a_q⟩`, real antisymmetric.
#[derive(Clone, Debug)]
pub struct MajoranaCovariance {
    gamma: Array2<f64>,
    beta: f64,
}

/// The Majorana coupling matrix `A` of the chain.
pub fn majorana_couplings(n: usize, g: f64) -> Array2<f64> {
    let mut a = Array2::zeros((2 * n, 2 * n));
    for j in 0..n {
        a[[2 * j, 2 * j + 1]] = -2.0 * g;
        a[[2 * j + 1, 2 * j]] = 2.0 * g;
        if j + 1 < n {
            a[[2 * j + 1, 2 * j + 2]] = -2.0;
            a[[2 * j + 2, 2 * j + 1]] = 2.0;
        }
    }
    a
}

/// Bogoliubov diagonalization of the open chain.
pub fn bdg_diagonalize(n: usize, g: f64) -> Result<BogoliubovSpectrum> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("chain needs n >= 2, got {n}")));
    }
    if !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g = {g}")));
    }
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        m[[j, j]] = -2.0 * g;
        if j + 1 < n {
            m[[j + 1, j]] = 2.0;
        }
    }
    let (u, sigma, vt) = linalg::svd_real(&m)?;
    let mut w = Array2::zeros((2 * n, 2 * n));
    for k in 0..n {
        for j in 0..n {
            w[[2 * k, 2 * j]] = u[[j, k]];
            w[[2 * k + 1, 2 * j + 1]] = vt[[k, j]];
        }
    }
    Ok(BogoliubovSpectrum { n, g, energies: sigma, w })
}

impl BogoliubovSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Single-particle energies `ε_k ≥ 0`, descending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn transformation(&self) -> &Array2<f64> {
        &self.w
    }

    /// `max |WᵀW − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.w.t().dot(&self.w) - Array2::<f64>::eye(2 * self.n);
        d.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |Wᵀ A_b W − A|` against the input couplings.
    pub fn reconstruction_defect(&self) -> f64 {
        let mut ab = Array2::zeros((2 * self.n, 2 * self.n));
        for (k, &e) in self.energies.iter().enumerate() {
            ab[[2 * k, 2 * k + 1]] = e;
            ab[[2 * k + 1, 2 * k]] = -e;
        }
        let d = self.w.t().dot(&ab).dot(&self.w) - majorana_couplings(self.n, self.g);
        d.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Ground-state energy `−½ Σ ε_k`.
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.energies.iter().sum::<f64>()
    }

    /// All `2^n` many-body energies `Σ_k ±ε_k/2`, ascending.
    pub fn many_body_spectrum(&self) -> Result<Vec<f64>> {
        if self.n > 24 {
            return Err(Error::TooManyQubits { qubits: self.n, cap: 24 });
        }
        let mut e = vec![self.ground_energy()];
        for &eps in &self.energies {
            let shifted: Vec<f64> = e.iter().map(|x| x + eps).collect();
            e.extend(shifted);
        }
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(e)
    }

    /// Mode occupation `⟨n_k⟩ = 1/(1 + e^{−βε_k})`.
    fn occupation(&self, k: usize, beta: f64) -> f64 {
        let x = beta * self.energies[k];
        if x.is_infinite() {
            return 1.0;
        }
        1.0 / (1.0 + (-x).exp())
    }
}

/// Thermal covariance `Γ = Wᵀ Γ_b W` with `Γ_b(2k, 2k+1) = −tanh(βε_k/2)`.
/// `β = ∞` gives the ground state.
pub fn thermal_covariance(spec: &BogoliubovSpectrum, beta: f64) -> Result<MajoranaCovariance> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let n = spec.n;
    let mut gb = Array2::zeros((2 * n, 2 * n));
    for (k, &e) in spec.energies.iter().enumerate() {
        let t = if beta.is_infinite() { if e > 0.0 { 1.0 } else { 0.0 } } else { (0.5 * beta * e).tanh() };
        gb[[2 * k, 2 * k + 1]] = -t;
        gb[[2 * k + 1, 2 * k]] = t;
    }
    let gamma = spec.w.t().dot(&gb).dot(&spec.w);
    Ok(MajoranaCovariance { gamma, beta })
}

impl MajoranaCovariance {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_sites(&self) -> usize {
        self.gamma.nrows() / 2
    }

    fn check_site(&self, j: usize) -> Result<()> {
        if j >= self.num_sites() {
            return Err(Error::UnknownSite(j));
        }
        Ok(())
    }

    /// `⟨X_j⟩ = Γ_{2j,2j+1}`.
    pub fn x_expectation(&self, j: usize) -> Result<f64> {
        self.check_site(j)?;
        Ok(self.gamma[[2 * j, 2 * j + 1]])
    }

    /// `⟨∏_{j∈S} X_j⟩` as the Pfaffian of the covariance restricted to S.
    pub fn x_product(&self, sites: &[usize]) -> Result<f64> {
        let mut s = sites.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSite(s.windows(2).find(|w| w[0] == w[1]).unwrap()[0]));
        }
        for &j in &s {
            self.check_site(j)?;
        }
        let idx: Vec<usize> = s.iter().flat_map(|&j| [2 * j, 2 * j + 1]).collect();
        let sub = Array2::from_shape_fn((idx.len(), idx.len()), |(p, q)| self.gamma[[idx[p], idx[q]]]);
        Ok(pfaffian(&sub))
    }

    /// `⟨X_i X_j⟩ − ⟨X_i⟩⟨X_j⟩`. The disconnected Wick pairing is dropped
    /// analytically, so exponentially small values keep their relative accuracy.
    pub fn xx_connected(&self, i: usize, j: usize) -> Result<f64> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            let m = self.x_expectation(i)?;
            return Ok(1.0 - m * m);
        }
        let g = &self.gamma;
        let (p, q, r, s) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        Ok(g[[p, s]] * g[[q, r]] - g[[p, r]] * g[[q, s]])
    }

    /// Energy `¼ Σ A_pq Γ_pq` of the chain with field `g`.
    pub fn energy(&self, g: f64) -> f64 {
        let a = majorana_couplings(self.num_sites(), g);
        0.25 * (&a * &self.gamma).sum()
    }

    /// Largest singular value of Γ.
    pub fn max_singular_value(&self) -> Result<f64> {
        let (_, s, _) = linalg::svd_real(&self.gamma)?;
        Ok(s.first().copied().unwrap_or(0.0))
    }
}

/// Observables accepted by [`connected_correlator`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FermionObservable {
    /// `∏_{j∈S} X_j`, a product of local fermion parities.
    XProduct(Vec<usize>),
    /// Anything involving Jordan–Wigner strings, such as `Z_i Z_j`.
    Unsupported(String),
}

/// `⟨O₁ O₂⟩ − ⟨O₁⟩⟨O₂⟩` for commuting parity products on disjoint sites.
pub fn connected_correlator(
    gamma: &MajoranaCovariance,
    first: &FermionObservable,
    second: &FermionObservable,
) -> Result<f64> {
    let (a, b) = match (first, second) {
        (FermionObservable::XProduct(a), FermionObservable::XProduct(b)) => (a, b),
        (FermionObservable::Unsupported(d), _) | (_, FermionObservable::Unsupported(d)) => {
            return Err(Error::Unsupported(format!("observable {d} is not a parity product")))
        }
    };
    if let Some(s) = a.iter().find(|s| b.contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    let both: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(gamma.x_product(&both)? - gamma.x_product(a)? * gamma.x_product(b)?)
}

/// Entropy of the reduced state on a contiguous block of sites.
///
/// Occupations are `(1 + λ)/2` for the eigenvalues λ of `iΓ_X`. For
/// parity-symmetric states the spin and fermion reductions of a contiguous
/// block share their spectrum.
pub fn subsystem_entropy_gaussian(gamma: &MajoranaCovariance, region: &[usize]) -> Result<f64> {
    if region.is_empty() {
        return Ok(0.0);
    }
    let mut s = region.to_vec();
    s.sort_unstable();
    for w in s.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateSite(w[0]));
        }
        if w[1] != w[0] + 1 {
            return Err(Error::Unsupported("Gaussian spin entropies need a contiguous block".into()));
        }
    }
    gamma.check_site(*s.last().unwrap())?;
    let (lo, hi) = (2 * s[0], 2 * s[s.len() - 1] + 2);
    let sub = gamma.gamma.slice(s![lo..hi, lo..hi]).mapv(|x| C64::new(0.0, x));
    let mut entropy = 0.0;
    for lam in linalg::eigvalsh(&sub)? {
        let nu = 0.5 * (1.0 + lam);
        if !(-1e-10..=1.0 + 1e-10).contains(&nu) {
            return Err(Error::NegativeSpectrum(nu.min(1.0 - nu)));
        }
        if nu > 0.0 && nu < 1.0 {
            entropy -= nu * nu.ln();
        }
    }
    Ok(entropy)
}

/// Exact spectral lines of `C_β(X_j, t) = ⟨X_j(t) X_j⟩ − ⟨X_j⟩²`.
///
/// By Wick's theorem `C = G_pp G_qq − G_pq G_qp` with `G_rs(t) = ⟨a_r(t) a_s⟩`,
/// `p = 2j`, `q = 2j+1`. Each G is a sum over modes of `e^{±iε_k t}` terms, so
/// C consists of pair lines at `ω = ∓(ε_k + ε_l)` and particle-hole lines at
/// `ω = ±(ε_k − ε_l)`. Merging the `(k, l)` and `(l, k)` terms gives the
/// weight `N^σ_k N^σ'_l (U_jk V_jl − σσ' U_jl V_jk)²` at `ω = −(σε_k + σ'ε_l)`,
/// where `N^+ = 1 − n_k` and `N^− = n_k`.
pub fn x_spectral_lines(spec: &BogoliubovSpectrum, beta: f64, j: usize) -> Result<SpectralLines> {
    let mut lines = SpectralLines::default();
    for_each_x_line(spec, beta, j, |omega, w| {
        lines.frequencies.push(omega);
        lines.weights.push(w);
    })?;
    Ok(lines)
}

fn for_each_x_line(spec: &BogoliubovSpectrum, beta: f64, j: usize, mut f: impl FnMut(f64, f64)) -> Result<()> {
    if j >= spec.n {
        return Err(Error::UnknownSite(j));
    }
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let n = spec.n;
    let u: Array1<f64> = (0..n).map(|k| spec.w[[2 * k, 2 * j]]).collect();
    let v: Array1<f64> = (0..n).map(|k| spec.w[[2 * k + 1, 2 * j + 1]]).collect();
    let occ: Vec<f64> = (0..n).map(|k| spec.occupation(k, beta)).collect();
    let eps = &spec.energies;
    for k in 0..n {
        // Diagonal pairs only survive with opposite signs, both at ω = 0.
        let w = 2.0 * (1.0 - occ[k]) * occ[k] * (u[k] * v[k]).powi(2);
        if w != 0.0 {
            f(0.0, w);
            f(0.0, w);
        }
        for l in k + 1..n {
            for (sk, nk) in [(1.0, 1.0 - occ[k]), (-1.0, occ[k])] {
                for (sl, nl) in [(1.0, 1.0 - occ[l]), (-1.0, occ[l])] {
                    let w = nk * nl * (u[k] * v[l] - sk * sl * u[l] * v[k]).powi(2);
                    if w != 0.0 {
                        f(-(sk * eps[k] + sl * eps[l]), w);
                    }
                }
            }
        }
    }
    Ok(())
}

/// `χ⁽²⁾_E = ½ Σ_lines w f_β(ω)` for `O = X_j`, in `O(n²)` time.
pub fn chi2_e_quadratic(spec: &BogoliubovSpectrum, beta: f64, j: usize) -> Result<Chi2Result> {
    let mut acc = 0.0;
    for_each_x_line(spec, beta, j, |omega, w| acc += w * f_beta(beta, omega))?;
    Ok(Chi2Result { value: 0.5 * acc, region: "E".into(), method: Chi2Method::FreeFermion })
}

/// Pfaffian of a real antisymmetric matrix by Householder tridiagonalization.
pub fn pfaffian(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    if n == 0 {
        return 1.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    for i in 0..n - 2 {
        let x: Array1<f64> = a.slice(s![i + 1.., i]).to_owned();
        let sigma: f64 = x.iter().skip(1).map(|v| v * v).sum();
        let (alpha, reflect) = if sigma == 0.0 {
            (x[0], None)
        } else {
            let norm = (x[0] * x[0] + sigma).sqrt();
            let mut v = x.clone();
            let alpha = if x[0] <= 0.0 {
                v[0] -= norm;
                norm
            } else {
                v[0] += norm;
                -norm
            };
            let vn = v.dot(&v).sqrt();
            v /= vn;
            (alpha, Some(v))
        };
        a[[i + 1, i]] = alpha;
        a[[i, i + 1]] = -alpha;
        for r in i + 2..n {
            a[[r, i]] = 0.0;
            a[[i, r]] = 0.0;
        }
        if let Some(v) = reflect {
            let wv = a.slice(s![i + 1.., i + 1..]).dot(&v) * 2.0;
            let m = v.len();
            let mut block = a.slice_mut(s![i + 1.., i + 1..]);
            for r in 0..m {
                for c in 0..m {
                    block[[r, c]] += v[r] * wv[c] - wv[r] * v[c];
                }
            }
            pf = -pf;
        }
        if i % 2 == 0 {
            pf *= -alpha;
        }
    }
    pf * a[[n - 2, n - 1]]
}
