//! Second-order (in the measurement strength μ) Holevo quantities.
//!
//! Weak measurements here are `F_± = ½(I ± μ O)` on region A. For any region
//! X disjoint from A, `χ_X = χ⁽²⁾_X μ² + O(μ³)` with
//!
//! ```text
//! χ⁽²⁾_X = ½ (Tr[ξ T_{ρ^X}[ξ]] − ⟨O⟩²),   ξ = Tr_{X^c}[O |Ψ⟩⟨Ψ|],
//! ```
//!
//! where `T` is Lieb's map. For thermal states and X = E this reduces to a
//! sum over spectral lines of the connected correlator weighted by
//! `f_β(ω) = βω / (e^{βω} − 1)`.

use ndarray::Array2;

use crate::entropy::EIGENVALUE_FLOOR;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::purification::PurifiedState;
use crate::state::{check_operator, DensityOperator, Split};

/// Largest entry of the transformed operator tolerated outside the support
/// of the reference state.
pub const SUPPORT_TOL: f64 = 1e-6;

/// Below this relative spread the three-point kernel switches to a Taylor
/// expansion about the mean.
const TRIPLE_SERIES_SPREAD: f64 = 1e-3;

/// `ln[a, b] = (ln a − ln b) / (a − b)`, with `1/a` on the diagonal.
pub fn log_divided_difference(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let r = (lo - hi) / hi;
    if r.abs() < 1e-8 {
        (1.0 - r / 2.0 + r * r / 3.0) / hi
    } else if r > -0.5 {
        r.ln_1p() / (r * hi)
    } else {
        (hi.ln() - lo.ln()) / (hi - lo)
    }
}

/// `-ln[a, b, c]`, the second divided difference of `−ln`, which equals
/// `∫₀^∞ dz / ((a+z)(b+z)(c+z))`.
pub fn log_second_divided_difference(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let [x, y, z] = v;
    let spread = z - x;
    if spread > TRIPLE_SERIES_SPREAD * z {
        return -(log_divided_difference(y, z) - log_divided_difference(x, y)) / spread;
    }
    let m = (x + y + z) / 3.0;
    let d = [x - m, y - m, z - m];
    // Complete homogeneous symmetric polynomials of the offsets.
    let mut h2 = 0.0;
    let mut h3 = 0.0;
    for i in 0..3 {
        for j in i..3 {
            h2 += d[i] * d[j];
            for k in j..3 {
                h3 += d[i] * d[j] * d[k];
            }
        }
    }
    // ln derivatives: -1/m², 2/m³, -6/m⁴, 24/m⁵; the first-order term vanishes.
    let m2 = m * m;
    -(-1.0 / (2.0 * m2) - h2 / (4.0 * m2 * m2) + h3 / (5.0 * m2 * m2 * m))
}

struct Eigenframe {
    values: Vec<f64>,
    vectors: Array2<C64>,
    support: Vec<bool>,
}

impl Eigenframe {
    fn new(sigma: &Array2<C64>) -> Result<Self> {
        let (values, vectors) = linalg::eigh(sigma)?;
        let support = values.iter().map(|&l| l > EIGENVALUE_FLOOR).collect();
        Ok(Self { values, vectors, support })
    }

    /// `V† x V`, checking that `x` vanishes outside the support.
    fn to_frame(&self, x: &Array2<C64>) -> Result<Array2<C64>> {
        if x.dim() != self.vectors.dim() {
            return Err(Error::DimensionMismatch { expected: self.vectors.nrows(), found: x.nrows() });
        }
        let t = linalg::dagger(&self.vectors).dot(x).dot(&self.vectors);
        let n = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if !(self.support[i] && self.support[j]) {
                    worst = worst.max(t[[i, j]].norm());
                }
            }
        }
        if worst > SUPPORT_TOL {
            return Err(Error::SupportMismatch(worst));
        }
        Ok(t)
    }

    fn to_original(&self, t: &Array2<C64>) -> Array2<C64> {
        let mut out = self.vectors.dot(t).dot(&linalg::dagger(&self.vectors));
        linalg::hermitize(&mut out);
        out
    }
}

/// `T_σ[ξ] = ∫₀^∞ dz (σ+z)⁻¹ ξ (σ+z)⁻¹`, evaluated in σ's eigenbasis with
/// the kernel `ln[λ_i, λ_j]`. Eigenvalues at or below 1e-14 are treated as
/// exact zeros and the map acts on the support of σ.
pub fn lieb_t_map(sigma: &DensityOperator, xi: &Array2<C64>) -> Result<Array2<C64>> {
    lieb_t_map_matrix(sigma.matrix(), xi)
}

pub(crate) fn lieb_t_map_matrix(sigma: &Array2<C64>, xi: &Array2<C64>) -> Result<Array2<C64>> {
    let frame = Eigenframe::new(sigma)?;
    let mut t = frame.to_frame(xi)?;
    let l = &frame.values;
    for ((i, j), z) in t.indexed_iter_mut() {
        *z = if frame.support[i] && frame.support[j] { *z * log_divided_difference(l[i], l[j]) } else { ZERO };
    }
    Ok(frame.to_original(&t))
}

/// `Tr[ξ T_σ[ξ]]` without forming the map's output.
fn t_quadratic_form(sigma: &Array2<C64>, xi: &Array2<C64>) -> Result<f64> {
    let frame = Eigenframe::new(sigma)?;
    let t = frame.to_frame(xi)?;
    let l = &frame.values;
    let mut acc = 0.0;
    for ((i, j), z) in t.indexed_iter() {
        if frame.support[i] && frame.support[j] {
            acc += z.norm_sqr() * log_divided_difference(l[i], l[j]);
        }
    }
    Ok(acc)
}

/// `R_ρ[X] = ∫₀^∞ dz (ρ+z)⁻¹ X (ρ+z)⁻¹ X (ρ+z)⁻¹` via the three-index kernel.
pub fn lieb_r_map(rho: &DensityOperator, x: &Array2<C64>) -> Result<Array2<C64>> {
    let frame = Eigenframe::new(rho.matrix())?;
    let t = frame.to_frame(x)?;
    let l = &frame.values;
    let n = l.len();
    let sup: Vec<usize> = (0..n).filter(|&i| frame.support[i]).collect();
    let mut out = Array2::from_elem((n, n), ZERO);
    for &i in &sup {
        for &k in &sup {
            let mut acc = ZERO;
            for &j in &sup {
                acc += t[[i, j]] * t[[j, k]] * log_second_divided_difference(l[i], l[j], l[k]);
            }
            out[[i, k]] = acc;
        }
    }
    Ok(frame.to_original(&out))
}

/// `ξ^X = Tr_{X^c}[O |Ψ⟩⟨Ψ|]` for an observable on region A.
#[derive(Clone, Debug)]
pub struct XiOperator {
    pub matrix: Array2<C64>,
    pub sites: Vec<usize>,
    pub observable_sites: Vec<usize>,
}

impl XiOperator {
    /// `‖ξ‖₁`.
    pub fn trace_norm(&self) -> Result<f64> {
        linalg::hermitian_trace_norm(&self.matrix)
    }

    /// Smallest eigenvalues of `ρ − ξ` and `ρ + ξ`; both are ≥ 0 when
    /// `−ρ ⪯ ξ ⪯ ρ`.
    pub fn order_margins(&self, rho: &DensityOperator) -> Result<(f64, f64)> {
        let lower = linalg::eigvalsh(&(rho.matrix() - &self.matrix))?[0];
        let upper = linalg::eigvalsh(&(rho.matrix() + &self.matrix))?[0];
        Ok((lower, upper))
    }
}

fn check_observable(o: &Array2<C64>, sites: &[usize]) -> Result<()> {
    check_operator(o, sites)?;
    let defect = linalg::hermiticity_defect(&o.view());
    if defect > crate::state::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let norm = linalg::hermitian_op_norm(o)?;
    if norm > 1.0 + 1e-10 {
        return Err(Error::OperatorNorm(norm));
    }
    Ok(())
}

/// Builds `ξ^X` and `ρ^X` from a purified state.
pub fn xi_operator(psi: &PurifiedState, o: &Array2<C64>, a: &[usize], x: &[usize]) -> Result<(XiOperator, DensityOperator)> {
    if x.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    if let Some(s) = x.iter().find(|s| a.contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    let state = psi.state();
    let phi = crate::state::StateVector::unchecked(state.apply_local(o, a)?, state.sites().to_vec())?;
    let split = Split::new(state.sites(), x)?;
    let m_psi = state.matricize(&split);
    let m_phi = phi.matricize(&split);
    let mut xi = m_phi.dot(&linalg::dagger(&m_psi));
    linalg::hermitize(&mut xi);
    let rho = state.reduced(x)?;
    Ok((XiOperator { matrix: xi, sites: x.to_vec(), observable_sites: a.to_vec() }, rho))
}

/// How a χ⁽²⁾ value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chi2Method {
    General,
    Eigensum,
    Spectral,
    /// A lower bound on χ⁽²⁾_B, not the value itself.
    CorrelatorLowerBound,
    FreeFermion,
    FiniteDifference,
}

/// A second-order Holevo coefficient (nats per μ²).
#[derive(Clone, Debug, PartialEq)]
pub struct Chi2Result {
    pub value: f64,
    pub region: String,
    pub method: Chi2Method,
}

/// χ⁽²⁾_X for the weak measurement `½(I ± μ O)` on A, from the trace formula.
pub fn chi2_general(psi: &PurifiedState, o: &Array2<C64>, a: &[usize], x: &[usize]) -> Result<Chi2Result> {
    check_observable(o, a)?;
    let (xi, rho) = xi_operator(psi, o, a, x)?;
    let mean = psi.state().expectation(o, a)?.re;
    let value = 0.5 * (t_quadratic_form(rho.matrix(), &xi.matrix)? - mean * mean);
    Ok(Chi2Result { value, region: format!("{x:?}"), method: Chi2Method::General })
}

/// χ⁽²⁾_X for a region X of the system disjoint from A, from the system
/// state alone: `ξ^X = Tr_{X^c}[O_A ρ]`.
pub fn chi2_from_density(rho: &DensityOperator, o: &Array2<C64>, a: &[usize], x: &[usize]) -> Result<Chi2Result> {
    check_observable(o, a)?;
    if x.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    if let Some(s) = x.iter().find(|s| a.contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    let mut xi = crate::state::partial_trace_matrix(&rho.left_multiply(o, a)?, rho.sites(), x)?;
    linalg::hermitize(&mut xi);
    let rx = rho.reduced(x)?;
    let mean = rho.expectation(o, a)?;
    let value = 0.5 * (t_quadratic_form(rx.matrix(), &xi)? - mean * mean);
    Ok(Chi2Result { value, region: format!("{x:?}"), method: Chi2Method::General })
}

/// `f_β(ω) = βω / (e^{βω} − 1)` with `f(0) = 1`.
pub fn f_beta(beta: f64, omega: f64) -> f64 {
    let x = beta * omega;
    if x.abs() < 1e-8 {
        1.0 - x / 2.0
    } else if x > 700.0 {
        x * (-x).exp()
    } else {
        x / x.exp_m1()
    }
}

/// Discrete spectral representation of a connected correlator:
/// `C(t) = Σ_l w_l e^{−iω_l t}` and `C(ω) = 2π Σ_l w_l δ(ω − ω_l)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralLines {
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralLines {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `C(t)`.
    pub fn time_domain(&self, t: f64) -> C64 {
        self.frequencies
            .iter()
            .zip(&self.weights)
            .map(|(&w, &a)| C64::from_polar(a, -w * t))
            .sum()
    }

    /// Lossy histogram of `C(ω)/2π` weights on the given bin edges.
    pub fn binned(&self, edges: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; edges.len().saturating_sub(1)];
        for (&w, &a) in self.frequencies.iter().zip(&self.weights) {
            if let Some(i) = edges.windows(2).position(|e| e[0] <= w && w < e[1]) {
                out[i] += a;
            }
        }
        out
    }
}

/// Input to [`chi2_e_spectral`].
#[derive(Clone, Copy, Debug)]
pub enum SpectralInput<'a> {
    Lines(&'a SpectralLines),
    /// Samples `(ω_i, C(ω_i))` of a smooth spectral density on an ascending grid.
    Sampled { omega: &'a [f64], density: &'a [f64] },
}

/// `χ⁽²⁾_E = (1/4π) ∫ dω C_β(ω) f_β(ω)`; an exact sum for discrete lines,
/// trapezoidal quadrature for sampled densities.
pub fn chi2_e_spectral(input: SpectralInput<'_>, beta: f64) -> Result<Chi2Result> {
    let value = match input {
        SpectralInput::Lines(lines) => {
            let mut acc = 0.0;
            for (&w, &a) in lines.frequencies.iter().zip(&lines.weights) {
                if a < -1e-10 {
                    return Err(Error::NegativeSpectrum(a));
                }
                acc += a * f_beta(beta, w);
            }
            0.5 * acc
        }
        SpectralInput::Sampled { omega, density } => {
            if omega.len() != density.len() || omega.len() < 2 {
                return Err(Error::DimensionMismatch { expected: omega.len(), found: density.len() });
            }
            if let Some(&c) = density.iter().find(|&&c| c < -1e-10) {
                return Err(Error::NegativeSpectrum(c));
            }
            let g: Vec<f64> = omega.iter().zip(density).map(|(&w, &c)| c * f_beta(beta, w)).collect();
            let integral: f64 = omega.windows(2).zip(g.windows(2)).map(|(w, y)| 0.5 * (w[1] - w[0]) * (y[0] + y[1])).sum();
            integral / (4.0 * std::f64::consts::PI)
        }
    };
    Ok(Chi2Result { value, region: "E".into(), method: Chi2Method::Spectral })
}

/// Lower bound on χ⁽²⁾_B from post-processing B with the two-outcome POVM
/// `½(I ± O_B)`: `χ⁽²⁾_B ≥ ½ ⟨O_A O_B⟩_c² / (1 − ⟨O_B⟩²)`.
pub fn chi2_b_correlator_lb(
    rho: &DensityOperator,
    o_a: &Array2<C64>,
    a: &[usize],
    o_b: &Array2<C64>,
    b: &[usize],
) -> Result<Chi2Result> {
    check_observable(o_a, a)?;
    check_observable(o_b, b)?;
    if let Some(s) = a.iter().find(|s| b.contains(s)) {
        return Err(Error::OverlappingRegions(*s));
    }
    let mut ab = a.to_vec();
    ab.extend_from_slice(b);
    let mean_a = rho.expectation(o_a, a)?;
    let mean_b = rho.expectation(o_b, b)?;
    let joint = rho.expectation(&linalg::kron(o_a, o_b), &ab)?;
    let value = correlator_bound(joint - mean_a * mean_b, mean_b)?;
    Ok(Chi2Result { value, region: format!("{b:?}"), method: Chi2Method::CorrelatorLowerBound })
}

/// `½ c² / (1 − m_B²)`, failing when the denominator drops below 1e-12.
pub fn correlator_bound(connected: f64, mean_b: f64) -> Result<f64> {
    let denom = 1.0 - mean_b * mean_b;
    if denom < 1e-12 {
        return Err(Error::DenominatorUnderflow(denom));
    }
    Ok(0.5 * connected * connected / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn kernels_match_quadrature_limits() {
        assert!((log_divided_difference(0.3, 0.3) - 1.0 / 0.3).abs() < 1e-12);
        let (a, b) = (0.7f64, 0.2f64);
        assert!((log_divided_difference(a, b) - (a.ln() - b.ln()) / (a - b)).abs() < 1e-14);
        assert!((log_divided_difference(1e-14, 1.0) - 1e-14f64.ln().abs() / (1.0 - 1e-14)).abs() < 1e-10);
        let l = 0.25;
        assert!((log_second_divided_difference(l, l, l) - 1.0 / (2.0 * l * l)).abs() < 1e-10);
        // Continuity across the series switch.
        let near = log_second_divided_difference(0.5, 0.5 * (1.0 + 0.999e-3), 0.5 * (1.0 + 0.5e-3));
        let far = log_second_divided_difference(0.5, 0.5 * (1.0 + 1.001e-3), 0.5 * (1.0 + 0.5e-3));
        assert!((near - far).abs() / far < 1e-5);
        // Closed form for distinct arguments.
        let (x, y, z) = (0.1f64, 0.4f64, 0.9f64);
        let direct = x.ln() / ((x - y) * (x - z)) + y.ln() / ((y - x) * (y - z)) + z.ln() / ((z - x) * (z - y));
        assert!((log_second_divided_difference(x, y, z) + direct).abs() < 1e-12);
    }

    #[test]
    fn f_beta_limits() {
        assert_eq!(f_beta(3.0, 0.0), 1.0);
        assert!((f_beta(1.0, 1e-10) - 1.0).abs() < 1e-9);
        assert!(f_beta(1.0, 800.0) >= 0.0);
        // Detailed balance: f(−ω) = e^{βω} f(ω).
        let (b, w) = (2.0f64, 0.7f64);
        assert!((f_beta(b, -w) - (b * w).exp() * f_beta(b, w)).abs() < 1e-12);
    }

    #[test]
    fn t_map_identities() {
        let sigma = DensityOperator::new(
            array![[C64::new(0.6, 0.0), C64::new(0.1, 0.05)], [C64::new(0.1, -0.05), C64::new(0.4, 0.0)]],
            vec![0],
        )
        .unwrap();
        let t = lieb_t_map(&sigma, sigma.matrix()).unwrap();
        assert!((t - linalg::identity(2)).iter().all(|z| z.norm() < 1e-12));
        let mixed = DensityOperator::maximally_mixed(vec![0, 1]).unwrap();
        let xi = linalg::kron(&crate::state::pauli::x(), &crate::state::pauli::z());
        let t = lieb_t_map(&mixed, &xi).unwrap();
        assert!((t - &xi * C64::new(4.0, 0.0)).iter().all(|z| z.norm() < 1e-12));
        let r = lieb_r_map(&sigma, sigma.matrix()).unwrap();
        assert!((r - linalg::identity(2) * C64::new(0.5, 0.0)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn support_violation_is_reported() {
        let zero = DensityOperator::pure(&crate::state::StateVector::basis(vec![0], 0).unwrap());
        assert!(matches!(lieb_t_map(&zero, &crate::state::pauli::x()), Err(Error::SupportMismatch(_))));
        let ok = lieb_t_map(&zero, zero.matrix()).unwrap();
        assert!((ok[[0, 0]].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlator_bound_guard() {
        assert!(matches!(correlator_bound(0.1, 1.0), Err(Error::DenominatorUnderflow(_))));
        assert!((correlator_bound(1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_and_line_inputs() {
        let lines = SpectralLines { frequencies: vec![0.0], weights: vec![0.8] };
        let v = chi2_e_spectral(SpectralInput::Lines(&lines), 5.0).unwrap().value;
        assert!((v - 0.4).abs() < 1e-15);
        // A narrow Gaussian of total weight 2π·0.8 at ω = 0 approaches the line.
        let omega: Vec<f64> = (0..4001).map(|i| -2.0 + 1e-3 * i as f64).collect();
        let s = 0.01f64;
        let norm = 2.0 * std::f64::consts::PI * 0.8 / (s * (2.0 * std::f64::consts::PI).sqrt());
        let density: Vec<f64> = omega.iter().map(|w| norm * (-w * w / (2.0 * s * s)).exp()).collect();
        let smooth = chi2_e_spectral(SpectralInput::Sampled { omega: &omega, density: &density }, 1e-6).unwrap().value;
        assert!((smooth - 0.4).abs() < 1e-6);
        let bad = SpectralLines { frequencies: vec![0.0], weights: vec![-1.0] };
        assert!(chi2_e_spectral(SpectralInput::Lines(&bad), 1.0).is_err());
    }
}
