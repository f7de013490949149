//! Closed-form predictions for a scalar primary of dimension Δ in a 1+1D CFT
//! at temperature T, and fits of the amplitude κ from lattice data.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `h(Δ) = √π Γ(Δ+1) / (2 Γ(Δ+3/2))`.
pub fn h_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("scaling dimension must be positive, got {delta}")));
    }
    let ratio = if delta < 100.0 {
        libm::tgamma(delta + 1.0) / libm::tgamma(delta + 1.5)
    } else {
        (libm::lgamma(delta + 1.0) - libm::lgamma(delta + 1.5)).exp()
    };
    Ok(0.5 * PI.sqrt() * ratio)
}

/// `α_Δ = 2^{2Δ} h(Δ)`.
pub fn alpha_delta(delta: f64) -> Result<f64> {
    Ok((2.0 * delta).exp2() * h_delta(delta)?)
}

/// Region B relative to the measured point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    /// `[x₁, x₂]`.
    Interval { x1: f64, x2: f64 },
    /// `[x_AB, ∞)`.
    SemiInfinite { x_ab: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CftParams {
    pub delta: f64,
    pub kappa: f64,
    pub temperature: f64,
    pub geometry: Geometry,
}

impl CftParams {
    pub fn new(delta: f64, kappa: f64, temperature: f64, geometry: Geometry) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!("temperature = {temperature}")));
        }
        match geometry {
            Geometry::Interval { x1, x2 } if !(0.0 < x1 && x1 < x2) => {
                return Err(Error::InvalidParameter(format!("interval needs 0 < x1 < x2, got [{x1}, {x2}]")))
            }
            Geometry::SemiInfinite { x_ab } if !(x_ab > 0.0) => {
                return Err(Error::InvalidParameter(format!("x_AB must be positive, got {x_ab}")))
            }
            _ => {}
        }
        Ok(Self { delta, kappa, temperature, geometry })
    }

    /// Parameters with temperature `1/β`.
    pub fn at_beta(delta: f64, kappa: f64, beta: f64, geometry: Geometry) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        Self::new(delta, kappa, 1.0 / beta, geometry)
    }
}

/// `χ⁽²⁾_E = κ α_Δ (πT)^{2Δ}`.
pub fn chi2_e_cft(p: &CftParams) -> Result<f64> {
    Ok(p.kappa * alpha_delta(p.delta)? * (PI * p.temperature).powf(2.0 * p.delta))
}

/// `κ h(Δ) (πT)^{2Δ} |sinh(πT(x₂−x₁)) / (sinh(πTx₁) sinh(πTx₂))|^{2Δ}` for
/// any nonzero `x₁ ≠ x₂`. At `T = 0` this is `κ h(Δ) (|x₂−x₁|/|x₁x₂|)^{2Δ}`.
pub fn chi2_b_interval(delta: f64, kappa: f64, temperature: f64, x1: f64, x2: f64) -> Result<f64> {
    if x1 == 0.0 || x2 == 0.0 || x1 == x2 {
        return Err(Error::InvalidParameter(format!("degenerate interval [{x1}, {x2}]")));
    }
    let h = h_delta(delta)?;
    let ratio = if temperature == 0.0 {
        ((x2 - x1) / (x1 * x2)).abs()
    } else {
        let a = PI * temperature;
        // ln|sinh(a(x₂−x₁))| − ln|sinh(a x₁)| − ln|sinh(a x₂)| without overflow.
        let ln_sinh = |y: f64| {
            let y = y.abs();
            y + (-(-2.0 * y).exp_m1()).ln() - std::f64::consts::LN_2
        };
        a * (ln_sinh(a * (x2 - x1)) - ln_sinh(a * x1) - ln_sinh(a * x2)).exp()
    };
    Ok(kappa * h * ratio.powf(2.0 * delta))
}

/// χ⁽²⁾_B for an interval geometry `0 < x₁ < x₂`.
pub fn chi2_b_cft(p: &CftParams) -> Result<f64> {
    match p.geometry {
        Geometry::Interval { x1, x2 } => chi2_b_interval(p.delta, p.kappa, p.temperature, x1, x2),
        Geometry::SemiInfinite { x_ab } => {
            if p.temperature == 0.0 {
                return Ok(p.kappa * h_delta(p.delta)? * x_ab.powf(-2.0 * p.delta));
            }
            let two_pi_t = 2.0 * PI * p.temperature;
            Ok(p.kappa * h_delta(p.delta)? * two_pi_t.powf(2.0 * p.delta) * (two_pi_t * x_ab).exp_m1().powf(-2.0 * p.delta))
        }
    }
}

/// `K⁽²⁾ = κ h(Δ) (2πT)^{2Δ} [(e^{2πT x_AB} − 1)^{−2Δ} − 1]`.
pub fn k2_cft(p: &CftParams, x_ab: f64) -> Result<f64> {
    if !(x_ab > 0.0) {
        return Err(Error::InvalidParameter(format!("x_AB must be positive, got {x_ab}")));
    }
    if !(p.temperature > 0.0) {
        return Err(Error::InvalidParameter("K2 needs T > 0".into()));
    }
    let two_pi_t = 2.0 * PI * p.temperature;
    let bracket = (two_pi_t * x_ab).exp_m1().powf(-2.0 * p.delta) - 1.0;
    Ok(p.kappa * h_delta(p.delta)? * two_pi_t.powf(2.0 * p.delta) * bracket)
}

/// Zero of `K⁽²⁾` in units of β: `ln 2 / 2π`.
pub fn crossing_u_star() -> f64 {
    std::f64::consts::LN_2 / (2.0 * PI)
}

/// `c = 12 / ((2π)^{2Δ} κ h(Δ))`.
pub fn c_constant(delta: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
    }
    Ok(12.0 / ((2.0 * PI).powf(2.0 * delta) * kappa * h_delta(delta)?))
}

/// `(β/4π) ln(1 + (1 + cβ^{2Δ}ε)^{−1/2Δ})`.
pub fn depth_bound_cft(beta: f64, epsilon: f64, delta: f64, c: f64) -> Result<f64> {
    depth_bound_eta(beta, epsilon, 2.0 * delta, c)
}

/// `(β/4π) ln(1 + 1/(1 + cβ^η ε)^{1/η})`, with `η = 2Δ_min`.
pub fn depth_bound_eta(beta: f64, epsilon: f64, eta: f64, c: f64) -> Result<f64> {
    if !(beta > 0.0) || !(epsilon >= 0.0) || !(eta > 0.0) || !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta={beta}, epsilon={epsilon}, eta={eta}, c={c}")));
    }
    let inner = 1.0 / (1.0 + c * beta.powf(eta) * epsilon).powf(1.0 / eta);
    Ok(beta * (1.0 + inner).ln() / (4.0 * PI))
}

/// Result of a fixed-exponent amplitude fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaFit {
    pub kappa: f64,
    /// RMS of `ln C − ln(κ x^{−2Δ})`.
    pub residual_rms: f64,
    pub samples: usize,
}

/// Samples are rejected above this RMS residual.
pub const KAPPA_FIT_MAX_RMS: f64 = 0.1;

/// Least-squares fit of `ln C = ln κ − 2Δ ln x` with the slope held fixed.
pub fn fit_kappa(samples: &[(f64, f64)], delta: f64) -> Result<KappaFit> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    let usable: Vec<(f64, f64)> = samples.iter().copied().filter(|&(x, _)| x >= 10.0).collect();
    if usable.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 samples at separation >= 10, got {}",
            usable.len()
        )));
    }
    if let Some(&(x, c)) = usable.iter().find(|&&(_, c)| !(c > 0.0)) {
        return Err(Error::InvalidParameter(format!("correlator {c} at x = {x} is not positive")));
    }
    let offsets: Vec<f64> = usable.iter().map(|&(x, c)| c.ln() + 2.0 * delta * x.ln()).collect();
    let ln_kappa = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let rms = (offsets.iter().map(|o| (o - ln_kappa).powi(2)).sum::<f64>() / offsets.len() as f64).sqrt();
    if rms > KAPPA_FIT_MAX_RMS {
        return Err(Error::BadFit(rms));
    }
    Ok(KappaFit { kappa: ln_kappa.exp(), residual_rms: rms, samples: usable.len() })
}

/// Free log-log fit `ln y = a + s ln x`; returns `(s, a, rms)`. Diagnostic only.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if samples.len() < 2 || samples.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidParameter("power-law fit needs >= 2 positive samples".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("power-law fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok((slope, intercept, rms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingSource {
    CftAnalytic,
    LatticeScan,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingResult {
    pub u_star: f64,
    pub x_star: f64,
    pub source: CrossingSource,
    pub epsilon: f64,
}

/// One row of a scan at fixed β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub x_ab: f64,
    pub chi_b: f64,
    pub chi_e: f64,
}

/// First downward crossing of `χ_B/χ_E` through `1 + threshold/χ_E`, by
/// linear interpolation in x. Rows are sorted by x first.
pub fn find_crossing(
    scan: &[ScanPoint],
    beta: f64,
    threshold: f64,
    epsilon: f64,
    source: CrossingSource,
) -> Result<CrossingResult> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let mut rows = scan.to_vec();
    rows.sort_by(|a, b| a.x_ab.partial_cmp(&b.x_ab).unwrap());
    let excess = |p: &ScanPoint| -> Result<f64> {
        if !(p.chi_e > 0.0) {
            return Err(Error::InvalidParameter(format!("chi_E = {} at x = {}", p.chi_e, p.x_ab)));
        }
        Ok(p.chi_b / p.chi_e - (1.0 + threshold / p.chi_e))
    };
    for w in rows.windows(2) {
        let (f0, f1) = (excess(&w[0])?, excess(&w[1])?);
        if f0 > 0.0 && f1 <= 0.0 {
            let x_star = w[0].x_ab + (w[1].x_ab - w[0].x_ab) * f0 / (f0 - f1);
            if !(x_star > 0.0) {
                return Err(Error::NoBracket);
            }
            return Ok(CrossingResult { u_star: x_star / beta, x_star, source, epsilon });
        }
    }
    Err(Error::NoBracket)
}

/// `(x, χ_B, χ_E)` rows from the semi-infinite CFT formulas.
pub fn cft_scan(delta: f64, kappa: f64, beta: f64, xs: &[f64]) -> Result<Vec<ScanPoint>> {
    xs.iter()
        .map(|&x| {
            let p = CftParams::at_beta(delta, kappa, beta, Geometry::SemiInfinite { x_ab: x })?;
            Ok(ScanPoint { x_ab: x, chi_b: chi2_b_cft(&p)?, chi_e: chi2_e_cft(&p)? })
        })
        .collect()
}
