//! Evaluation of one grid point on each backend.

use std::collections::BTreeMap;
use std::time::Instant;

use depthbound::bounds::{approx_verdict, exact_verdict, k_inverse, BoundMode, DepthBoundResult};
use depthbound::cft::{self, CftParams, Geometry, KappaFit};
use depthbound::ed::{build_tfim, thermal_ed, GibbsSpec, LocalObservable, SpinHamiltonian};
use depthbound::freefermion::{bdg_diagonalize, chi2_e_quadratic, thermal_covariance, BogoliubovSpectrum};
use depthbound::graph::chain_geometry;
use depthbound::measurement::{holevo_system_only, MeasurementSpec};
use depthbound::perturbative::{chi2_from_density, correlator_bound};
use depthbound::state::{pauli, DensityOperator};
use serde::Serialize;

use crate::config::{Backend, KappaSource, Measure, Model, ScanConfig, Tolerance};
use crate::error::{CliError, CliResult};

/// Output dimension of the measured register for the general threshold.
pub const D_A_PRIME: usize = 2;

/// Separations used when fitting κ from ground-state correlators.
pub const KAPPA_FIT_SEPARATIONS: std::ops::RangeInclusive<usize> = 10..=40;

/// Everything reported for one (β, x_AB) point.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub beta: f64,
    pub g: Option<f64>,
    pub n: usize,
    pub x_ab: usize,
    pub chi_b: f64,
    pub chi_e: f64,
    pub ratio: f64,
    pub criterion: f64,
    pub threshold: f64,
    pub epsilon: f64,
    pub depth_lb: usize,
    pub backend: &'static str,
    pub error: Option<String>,
    pub details: Details,
}

/// Provenance and intermediate quantities, emitted in JSON only.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Details {
    pub mode: String,
    pub measurement: String,
    pub site_a: usize,
    pub region_b: Vec<usize>,
    pub chi_b_method: String,
    pub chi_e_method: String,
    pub bound_active: bool,
    pub quantities: BTreeMap<String, f64>,
    pub elapsed_ms: f64,
}

impl Record {
    fn failed(cfg: &ScanConfig, beta: f64, x_ab: usize, err: &CliError) -> Self {
        Record {
            beta,
            g: cfg.model.g(),
            n: cfg.model.n(),
            x_ab,
            chi_b: f64::NAN,
            chi_e: f64::NAN,
            ratio: f64::NAN,
            criterion: f64::NAN,
            threshold: f64::NAN,
            epsilon: f64::NAN,
            depth_lb: 0,
            backend: cfg.backend.name(),
            error: Some(err.to_string()),
            details: Details::default(),
        }
    }
}

enum Kind {
    Dense { h: SpinHamiltonian },
    Fermion { spectrum: BogoliubovSpectrum },
    Cft { delta: f64, kappa: f64, c: f64 },
}

/// Backend state shared by every grid point of a run.
pub struct Engine {
    cfg: ScanConfig,
    kind: Kind,
    kappa_fit: Option<KappaFit>,
    epsilon: f64,
}

/// State prepared once per β.
enum Thermal {
    Dense { rho: DensityOperator, chi_e: f64, energy: f64, entropy: f64, mean_a: f64 },
    Fermion { site_bounds: Vec<Option<(f64, f64)>>, chi_e: f64, mean_a: f64 },
    Cft { chi_e: f64, depth: f64 },
}

impl Engine {
    pub fn new(cfg: &ScanConfig) -> CliResult<Self> {
        let epsilon = match cfg.tolerance {
            Tolerance::Epsilon(e) => e,
            Tolerance::KEps(k) => k_inverse(k, D_A_PRIME)?,
        };
        let mut kappa_fit = None;
        let kind = match cfg.backend {
            Backend::Dense => {
                let h = match &cfg.model {
                    Model::Tfim { n, g } => build_tfim(*n, *g)?,
                    Model::Custom { n, terms } => SpinHamiltonian::from_terms(*n, terms)?,
                };
                Kind::Dense { h }
            }
            Backend::Freefermion => {
                let Model::Tfim { n, g } = cfg.model else {
                    return Err(CliError::Capability("freefermion backend needs model = tfim".into()));
                };
                Kind::Fermion { spectrum: bdg_diagonalize(n, g)? }
            }
            Backend::Cft => {
                let delta = cfg.delta.ok_or_else(|| CliError::Capability("cft backend needs delta".into()))?;
                let kappa = match cfg.kappa {
                    Some(KappaSource::Value(k)) => k,
                    Some(KappaSource::Fit) => {
                        let fit = fit_kappa_from_lattice(&cfg.model, delta)?;
                        kappa_fit = Some(fit);
                        fit.kappa
                    }
                    None => return Err(CliError::Capability("cft backend needs a kappa source".into())),
                };
                Kind::Cft { delta, kappa, c: cft::c_constant(delta, kappa)? }
            }
        };
        Ok(Engine { cfg: cfg.clone(), kind, kappa_fit, epsilon })
    }

    pub fn config(&self) -> &ScanConfig {
        &self.cfg
    }

    pub fn kappa_fit(&self) -> Option<KappaFit> {
        self.kappa_fit
    }

    /// ε in use (recovered from k(ε) when a target was configured).
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Measured site and region B for distance `x`.
    pub fn geometry(&self, x: usize) -> CliResult<(usize, Vec<usize>)> {
        match &self.cfg.region_b {
            Some(b) => Ok((self.cfg.site, b.clone())),
            None => Ok(chain_geometry(self.cfg.model.n(), x)?),
        }
    }

    fn general_threshold(&self) -> bool {
        matches!(self.cfg.measure, Measure::Projective { .. })
    }

    /// Verdict for a criterion value under the configured tolerance.
    pub fn verdict(&self, criterion: f64, x_ab: usize, epsilon: f64) -> CliResult<DepthBoundResult> {
        if epsilon == 0.0 {
            return Ok(exact_verdict(criterion, x_ab));
        }
        let mode = if self.general_threshold() { BoundMode::ApproxGeneral { d_a_prime: D_A_PRIME } } else { BoundMode::ApproxWeak };
        Ok(approx_verdict(criterion, x_ab, epsilon, mode)?)
    }

    fn observable(&self) -> ndarray::Array2<depthbound::C64> {
        pauli::by_name(self.cfg.measure.axis()).expect("validated axis")
    }

    fn prepare(&self, beta: f64) -> CliResult<Thermal> {
        let a = self.cfg.site;
        match &self.kind {
            Kind::Dense { h } => {
                let th = thermal_ed(&GibbsSpec::new(h.clone(), beta)?)?;
                let o = LocalObservable::new(self.observable(), vec![a])?;
                let mean_a = th.expectation(&o)?;
                let rho = th.density()?;
                let chi_e = match self.cfg.measure {
                    Measure::Weak { .. } => th.chi2_e_eigensum(&o)?.value,
                    Measure::Projective { .. } => {
                        let m = MeasurementSpec::projective(vec![a], &self.observable())?;
                        holevo_system_only(&rho, &m, None)?
                    }
                };
                Ok(Thermal::Dense { chi_e, energy: th.energy(), entropy: th.entropy(), mean_a, rho })
            }
            Kind::Fermion { spectrum } => {
                let gamma = thermal_covariance(spectrum, beta)?;
                let chi_e = chi2_e_quadratic(spectrum, beta, a)?.value;
                let mean_a = gamma.x_expectation(a)?;
                let mut site_bounds = vec![None; spectrum.n()];
                let sites: Vec<usize> = match &self.cfg.region_b {
                    Some(b) => b.clone(),
                    // The nearest distance gives the widest B, which contains all others.
                    None => chain_geometry(spectrum.n(), self.cfg.xs.iter().min().copied().unwrap_or(1))?.1,
                };
                for b in sites {
                    let c = gamma.xx_connected(a, b)?;
                    let bound = correlator_bound(c, gamma.x_expectation(b)?)?;
                    site_bounds[b] = Some((bound, c));
                }
                Ok(Thermal::Fermion { site_bounds, chi_e, mean_a })
            }
            Kind::Cft { delta, kappa, c } => {
                let p = CftParams::at_beta(*delta, *kappa, beta, Geometry::SemiInfinite { x_ab: 1.0 })?;
                Ok(Thermal::Cft { chi_e: cft::chi2_e_cft(&p)?, depth: cft::depth_bound_cft(beta, self.epsilon, *delta, *c)? })
            }
        }
    }

    fn point(&self, thermal: &Thermal, beta: f64, x: usize) -> CliResult<Record> {
        let start = Instant::now();
        let (a, b) = match self.cfg.backend {
            Backend::Cft => (self.cfg.site, Vec::new()),
            _ => self.geometry(x)?,
        };
        let mut q = BTreeMap::new();
        let (chi_b, chi_e, b_method, e_method) = match thermal {
            Thermal::Dense { rho, chi_e, energy, entropy, mean_a } => {
                q.insert("energy".into(), *energy);
                q.insert("entropy".into(), *entropy);
                q.insert("mean_o_a".into(), *mean_a);
                match self.cfg.measure {
                    Measure::Weak { .. } => {
                        let chi_b = chi2_from_density(rho, &self.observable(), &[a], &b)?.value;
                        (chi_b, *chi_e, "trace-formula", "eigensum")
                    }
                    Measure::Projective { .. } => {
                        let m = MeasurementSpec::projective(vec![a], &self.observable())?;
                        let chi_b = holevo_system_only(rho, &m, Some(&b))?;
                        (chi_b, *chi_e, "holevo", "holevo")
                    }
                }
            }
            Thermal::Fermion { site_bounds, chi_e, mean_a } => {
                q.insert("mean_x_a".into(), *mean_a);
                let mut best: Option<(usize, f64, f64)> = None;
                for &s in &b {
                    let (bound, c) = site_bounds.get(s).copied().flatten().ok_or_else(|| {
                        CliError::Numerical(format!("no correlator prepared for site {s}"))
                    })?;
                    if best.is_none_or(|(_, v, _)| bound > v) {
                        best = Some((s, bound, c));
                    }
                }
                let (site, bound, c) = best.ok_or_else(|| CliError::Config("region B is empty".into()))?;
                q.insert("best_b_site".into(), site as f64);
                q.insert("xx_connected".into(), c);
                (bound, *chi_e, "correlator-lower-bound", "quadratic")
            }
            Thermal::Cft { chi_e, depth } => {
                let Kind::Cft { delta, kappa, c } = self.kind else { unreachable!() };
                let p = CftParams::at_beta(delta, kappa, beta, Geometry::SemiInfinite { x_ab: x as f64 })?;
                q.insert("delta".into(), delta);
                q.insert("kappa".into(), kappa);
                q.insert("c".into(), c);
                q.insert("depth_cft".into(), *depth);
                q.insert("u".into(), x as f64 / beta);
                (cft::chi2_b_cft(&p)?, *chi_e, "cft-semi-infinite", "cft")
            }
        };
        let criterion = chi_b - chi_e;
        let v = self.verdict(criterion, x, self.epsilon)?;
        Ok(Record {
            beta,
            g: self.cfg.model.g(),
            n: self.cfg.model.n(),
            x_ab: x,
            chi_b,
            chi_e,
            ratio: chi_b / chi_e,
            criterion,
            threshold: v.threshold,
            epsilon: self.epsilon,
            depth_lb: v.depth_lower_bound,
            backend: self.cfg.backend.name(),
            error: None,
            details: Details {
                mode: v.mode.name().into(),
                measurement: self.cfg.measure.label(),
                site_a: a,
                region_b: b,
                chi_b_method: b_method.into(),
                chi_e_method: e_method.into(),
                bound_active: v.bound_active,
                quantities: q,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            },
        })
    }

    /// One record per configured distance at this β. Failures are kept as
    /// rows carrying an error message.
    pub fn rows_for_beta(&self, beta: f64) -> Vec<Record> {
        let start = Instant::now();
        let thermal = match self.prepare(beta) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("beta = {beta}: {e}");
                return self.cfg.xs.iter().map(|&x| Record::failed(&self.cfg, beta, x, &e)).collect();
            }
        };
        let prep_ms = start.elapsed().as_secs_f64() * 1e3;
        self.cfg
            .xs
            .iter()
            .map(|&x| match self.point(&thermal, beta, x) {
                Ok(mut r) => {
                    r.details.elapsed_ms += prep_ms / self.cfg.xs.len() as f64;
                    r
                }
                Err(e) => {
                    log::warn!("beta = {beta}, x = {x}: {e}");
                    Record::failed(&self.cfg, beta, x, &e)
                }
            })
            .collect()
    }

    /// The first configured point, with errors propagated.
    pub fn single(&self) -> CliResult<Record> {
        let beta = self.cfg.betas[0];
        let x = self.cfg.xs[0];
        let thermal = self.prepare(beta)?;
        self.point(&thermal, beta, x)
    }
}

/// Validates and evaluates the first (β, x_AB) point of a configuration.
pub fn compute_single_bound(cfg: &ScanConfig) -> CliResult<Record> {
    Engine::new(cfg)?.single()
}

/// Fits κ for the X operator from ground-state correlators of the TFIM
/// chain, measured from the center.
pub fn fit_kappa_from_lattice(model: &Model, delta: f64) -> CliResult<KappaFit> {
    let Model::Tfim { n, g } = *model else {
        return Err(CliError::Capability("kappa fit needs model = tfim".into()));
    };
    let center = (n - 1) / 2;
    if center + KAPPA_FIT_SEPARATIONS.end() >= n {
        return Err(CliError::Config(format!(
            "kappa fit needs separations up to {} from the center, chain of {n} is too short",
            KAPPA_FIT_SEPARATIONS.end()
        )));
    }
    let gamma = thermal_covariance(&bdg_diagonalize(n, g)?, f64::INFINITY)?;
    let samples = KAPPA_FIT_SEPARATIONS
        .map(|x| Ok((x as f64, gamma.xx_connected(center, center + x)?)))
        .collect::<depthbound::Result<Vec<_>>>()?;
    Ok(cft::fit_kappa(&samples, delta)?)
}
