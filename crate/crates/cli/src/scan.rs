//! Parameter scans and the two-panel depth dataset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use depthbound::cft::KappaFit;
use rayon::prelude::*;
use serde::Serialize;

use crate::compute::{Engine, Record};
use crate::config::{Backend, Format, Measure, Model, ScanConfig, Tolerance};
use crate::error::{CliError, CliResult};
use crate::output::{self, fmt_float};

/// Transverse fields of the depth panel.
pub const FIG2_FIELDS: [f64; 3] = [0.5, 1.0, 1.5];

/// k(ε) targets of the depth panel.
pub const FIG2_K_EPS: [f64; 2] = [0.0, 1e-5];

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub rows: usize,
    pub failed_rows: usize,
    pub threads: usize,
}

/// Sidecar contents: config echo, code version and timing.
#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ScanConfig,
    pub epsilon: f64,
    pub kappa_fit: Option<KappaFitEcho>,
    pub timing: Timing,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KappaFitEcho {
    pub kappa: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

impl From<KappaFit> for KappaFitEcho {
    fn from(f: KappaFit) -> Self {
        KappaFitEcho { kappa: f.kappa, residual_rms: f.residual_rms, samples: f.samples }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanOutput {
    pub meta: RunMeta,
    pub records: Vec<Record>,
}

fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Evaluates every (β, x_AB) point. Rows come back with β outer and x inner
/// regardless of the order in which workers finish.
pub fn run_scan(cfg: &ScanConfig) -> CliResult<ScanOutput> {
    let start = Instant::now();
    let engine = Engine::new(cfg)?;
    let rows: Vec<Vec<Record>> = pool(cfg.threads)?.install(|| cfg.betas.par_iter().map(|&b| engine.rows_for_beta(b)).collect());
    let records: Vec<Record> = rows.into_iter().flatten().collect();
    let failed_rows = records.iter().filter(|r| r.error.is_some()).count();
    Ok(ScanOutput {
        meta: RunMeta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
            epsilon: engine.epsilon(),
            kappa_fit: engine.kappa_fit().map(Into::into),
            timing: Timing { total_seconds: start.elapsed().as_secs_f64(), rows: records.len(), failed_rows, threads: cfg.threads },
            note: None,
        },
        records,
    })
}

/// Writes a scan in the configured format. CSV goes with a JSON sidecar
/// when written to a file.
pub fn write_scan(cfg: &ScanConfig, scan: &ScanOutput) -> CliResult<()> {
    match cfg.format {
        Format::Csv => {
            output::emit(cfg.out.as_deref(), &output::scan_csv(&scan.records)?)?;
            if let Some(out) = &cfg.out {
                output::emit(Some(&output::sidecar_path(out)), &output::to_json(&scan.meta)?)?;
            }
            Ok(())
        }
        Format::Json => output::emit(cfg.out.as_deref(), &output::to_json(scan)?),
    }
}

/// One point of a depth curve.
#[derive(Clone, Debug, Serialize)]
pub struct DepthPoint {
    pub g: f64,
    pub beta: f64,
    pub n: usize,
    pub k_eps: f64,
    pub epsilon: f64,
    pub threshold: f64,
    pub depth_lb: usize,
    /// Largest distance with an active bound.
    pub x_active: Option<usize>,
    pub backend: &'static str,
    pub failed_points: usize,
}

pub const PANEL_B_HEADER: [&str; 10] =
    ["g", "beta", "n", "k_eps", "epsilon", "threshold", "depth_lb", "x_active", "backend", "failed_points"];

fn depth_row(p: &DepthPoint) -> Vec<String> {
    vec![
        fmt_float(p.g),
        fmt_float(p.beta),
        p.n.to_string(),
        fmt_float(p.k_eps),
        fmt_float(p.epsilon),
        fmt_float(p.threshold),
        p.depth_lb.to_string(),
        p.x_active.map(|x| x.to_string()).unwrap_or_default(),
        p.backend.to_string(),
        p.failed_points.to_string(),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig2Output {
    /// χ_B/χ_E over (β, x_AB) at the configured field.
    pub panel_a: ScanOutput,
    /// Depth lower bound against β for each field and k(ε).
    pub panel_b: Vec<DepthPoint>,
    pub note: String,
}

const PROXY_NOTE: &str = "freefermion backend: weak X measurement at the center site; chi_B is the \
single-site correlator lower bound, chi_E the exact second-order environment term. This is a proxy \
for the projective measurement, which needs the dense backend (small n).";

const DENSE_NOTE: &str = "dense backend: projective X measurement at the center site with exact \
Holevo quantities.";

/// Builds both panels: the ratio scan at the configured field, and depth
/// curves for every field in [`FIG2_FIELDS`] at ε = 0 and k(ε) = 1e-5.
pub fn emit_fig2_dataset(cfg: &ScanConfig) -> CliResult<Fig2Output> {
    match (cfg.backend, cfg.measure) {
        (Backend::Freefermion, Measure::Weak { axis: 'X' }) | (Backend::Dense, Measure::Projective { axis: 'X' }) => {}
        _ => {
            return Err(CliError::Capability(format!(
                "fig2 needs freefermion with weak-x or dense with projective-x, got {} with {}",
                cfg.backend.name(),
                cfg.measure.label()
            )))
        }
    }
    let Model::Tfim { n, .. } = cfg.model else {
        return Err(CliError::Capability("fig2 needs model = tfim".into()));
    };
    if cfg.region_b.is_some() {
        return Err(CliError::Config("fig2 uses the chain geometry; drop region-b".into()));
    }
    let note = if cfg.backend == Backend::Dense { DENSE_NOTE } else { PROXY_NOTE }.to_string();
    let mut panel_a = run_scan(cfg)?;
    panel_a.meta.note = Some(note.clone());

    let mut panel_b = Vec::new();
    for g in FIG2_FIELDS {
        let exact_cfg = ScanConfig { model: Model::Tfim { n, g }, tolerance: Tolerance::Epsilon(0.0), ..cfg.clone() };
        let scan = run_scan(&exact_cfg)?;
        let engine = Engine::new(&exact_cfg)?;
        for k_eps in FIG2_K_EPS {
            let tcfg = ScanConfig { tolerance: Tolerance::KEps(k_eps), ..exact_cfg.clone() };
            let epsilon = Engine::new(&tcfg)?.epsilon();
            for &beta in &cfg.betas {
                let rows = scan.records.iter().filter(|r| r.beta == beta);
                let mut point = DepthPoint {
                    g,
                    beta,
                    n,
                    k_eps,
                    epsilon,
                    threshold: 0.0,
                    depth_lb: 0,
                    x_active: None,
                    backend: cfg.backend.name(),
                    failed_points: 0,
                };
                for r in rows {
                    if r.error.is_some() {
                        point.failed_points += 1;
                        continue;
                    }
                    let v = engine.verdict(r.criterion, r.x_ab, epsilon)?;
                    point.threshold = v.threshold;
                    if v.bound_active && v.depth_lower_bound >= point.depth_lb {
                        point.depth_lb = v.depth_lower_bound;
                        point.x_active = Some(r.x_ab);
                    }
                }
                panel_b.push(point);
            }
        }
    }
    Ok(Fig2Output { panel_a, panel_b, note })
}

/// Output paths of the two panels inside `dir`.
pub fn fig2_paths(dir: &Path, format: Format) -> (PathBuf, PathBuf) {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    (dir.join(format!("fig2_panel_a.{ext}")), dir.join(format!("fig2_panel_b.{ext}")))
}

/// Writes both panels into the `out` directory (default: current directory),
/// plus `fig2.json` with run metadata in CSV mode.
pub fn write_fig2(cfg: &ScanConfig, fig: &Fig2Output) -> CliResult<()> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let (a, b) = fig2_paths(&dir, cfg.format);
    match cfg.format {
        Format::Csv => {
            output::emit(Some(&a), &output::scan_csv(&fig.panel_a.records)?)?;
            let mut buf = Vec::new();
            output::write_csv(&mut buf, &PANEL_B_HEADER, fig.panel_b.iter().map(depth_row))?;
            output::emit(Some(&b), &buf)?;
            output::emit(Some(&dir.join("fig2.json")), &output::to_json(&(&fig.panel_a.meta, &fig.note))?)
        }
        Format::Json => {
            output::emit(Some(&a), &output::to_json(&fig.panel_a)?)?;
            output::emit(Some(&b), &output::to_json(&(&fig.panel_b, &fig.note))?)
        }
    }
}
