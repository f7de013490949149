//! Run configuration: a TOML file with sections, overridden key by key by
//! command-line flags, then validated against backend capabilities.

use std::path::{Path, PathBuf};

use clap::Args;
use depthbound::ed::SpinHamiltonian;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "DEPTHBOUND_THREADS";

/// Largest chain the dense backend accepts.
pub const DENSE_MAX_SITES: usize = 12;

/// Flags shared by every subcommand. All of them can also be given in the
/// config file; a flag wins over the file.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model: `tfim` or `custom` (custom takes `--terms`).
    #[arg(long)]
    pub model: Option<String>,
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Transverse field of the TFIM.
    #[arg(long)]
    pub g: Option<f64>,
    /// Pauli terms of a custom model, e.g. `"-1.0 Z0 Z1"`. Repeatable.
    #[arg(long = "terms")]
    pub terms: Vec<String>,
    /// Single inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
    /// β grid: `start:stop:step` (inclusive) or a comma list.
    #[arg(long = "beta-grid")]
    pub beta_grid: Option<String>,
    /// Distance grid, same syntax as `--beta-grid`, integer values.
    #[arg(long = "x-grid")]
    pub x_grid: Option<String>,
    /// `dense`, `freefermion` or `cft`.
    #[arg(long)]
    pub backend: Option<String>,
    /// `projective-x` or `weak-{x,y,z}`.
    #[arg(long)]
    pub measure: Option<String>,
    /// Measured site (defaults to the chain center).
    #[arg(long)]
    pub site: Option<usize>,
    /// Explicit region B as a comma list; replaces the distance grid.
    #[arg(long = "region-b")]
    pub region_b: Option<String>,
    /// Preparation error ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Target value of k(ε); ε is recovered by inversion.
    #[arg(long = "k-eps")]
    pub k_eps: Option<f64>,
    /// Scaling dimension for the cft backend.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Correlator amplitude for the cft backend, or `fit`.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Output file (or directory for `fig2`). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
enum NumberList {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
enum KappaValue {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct ModelSection {
    kind: Option<String>,
    n: Option<usize>,
    g: Option<f64>,
    terms: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct RunSection {
    backend: Option<String>,
    beta: Option<f64>,
    beta_grid: Option<NumberList>,
    x_grid: Option<NumberList>,
    threads: Option<usize>,
    seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct MeasurementSection {
    measure: Option<String>,
    site: Option<usize>,
    region_b: Option<NumberList>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct ToleranceSection {
    epsilon: Option<f64>,
    k_eps: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct CftSection {
    delta: Option<f64>,
    kappa: Option<KappaValue>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct OutputSection {
    out: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    model: ModelSection,
    run: RunSection,
    measurement: MeasurementSection,
    tolerance: ToleranceSection,
    cft: CftSection,
    output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Freefermion,
    Cft,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Freefermion => "freefermion",
            Backend::Cft => "cft",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Tfim { n: usize, g: f64 },
    Custom { n: usize, terms: Vec<String> },
}

impl Model {
    pub fn n(&self) -> usize {
        match self {
            Model::Tfim { n, .. } | Model::Custom { n, .. } => *n,
        }
    }

    pub fn g(&self) -> Option<f64> {
        match self {
            Model::Tfim { g, .. } => Some(*g),
            Model::Custom { .. } => None,
        }
    }
}

/// Measurement on the single site A: a projective or a weak measurement of
/// the Pauli operator named by `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Measure {
    Projective { axis: char },
    Weak { axis: char },
}

impl Measure {
    pub fn axis(self) -> char {
        match self {
            Measure::Projective { axis } | Measure::Weak { axis } => axis,
        }
    }

    pub fn label(self) -> String {
        match self {
            Measure::Projective { axis } => format!("projective-{}", axis.to_ascii_lowercase()),
            Measure::Weak { axis } => format!("weak-{}", axis.to_ascii_lowercase()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tolerance {
    Epsilon(f64),
    KEps(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaSource {
    Value(f64),
    Fit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub model: Model,
    pub backend: Backend,
    pub betas: Vec<f64>,
    /// Distances from A to B; a single entry when `region_b` is set.
    pub xs: Vec<usize>,
    pub measure: Measure,
    pub site: usize,
    pub region_b: Option<Vec<usize>>,
    pub tolerance: Tolerance,
    pub delta: Option<f64>,
    pub kappa: Option<KappaSource>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub seed: u64,
}

impl ConfigArgs {
    /// Reads the config file (if any), applies flag overrides and validates.
    pub fn resolve(&self) -> CliResult<ScanConfig> {
        let file = match &self.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        merge(self, file)?.validate()
    }
}

fn load_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Every setting after merging, before validation.
#[derive(Clone, Debug, Default)]
struct Merged {
    model: Option<String>,
    n: Option<usize>,
    g: Option<f64>,
    terms: Vec<String>,
    beta: Option<f64>,
    beta_grid: Option<Vec<f64>>,
    x_grid: Option<Vec<f64>>,
    backend: Option<String>,
    measure: Option<String>,
    site: Option<usize>,
    region_b: Option<Vec<f64>>,
    epsilon: Option<f64>,
    k_eps: Option<f64>,
    delta: Option<f64>,
    kappa: Option<KappaValue>,
    out: Option<PathBuf>,
    format: Option<String>,
    threads: Option<usize>,
    seed: Option<u64>,
}

fn merge(args: &ConfigArgs, file: FileConfig) -> CliResult<Merged> {
    let list = |flag: &Option<String>, file: Option<NumberList>| -> CliResult<Option<Vec<f64>>> {
        match (flag, file) {
            (Some(text), _) => parse_grid(text).map(Some),
            (None, Some(v)) => expand(v).map(Some),
            (None, None) => Ok(None),
        }
    };
    Ok(Merged {
        model: args.model.clone().or(file.model.kind),
        n: args.n.or(file.model.n),
        g: args.g.or(file.model.g),
        terms: if args.terms.is_empty() { file.model.terms.unwrap_or_default() } else { args.terms.clone() },
        beta: args.beta.or(file.run.beta),
        beta_grid: list(&args.beta_grid, file.run.beta_grid)?,
        x_grid: list(&args.x_grid, file.run.x_grid)?,
        backend: args.backend.clone().or(file.run.backend),
        measure: args.measure.clone().or(file.measurement.measure),
        site: args.site.or(file.measurement.site),
        region_b: list(&args.region_b, file.measurement.region_b)?,
        epsilon: args.epsilon.or(file.tolerance.epsilon),
        k_eps: args.k_eps.or(file.tolerance.k_eps),
        delta: args.delta.or(file.cft.delta),
        kappa: args.kappa.clone().map(KappaValue::Text).or(file.cft.kappa),
        out: args.out.clone().or(file.output.out),
        format: args.format.clone().or(file.output.format),
        threads: args.threads.or(file.run.threads),
        seed: args.seed.or(file.run.seed),
    })
}

fn expand(v: NumberList) -> CliResult<Vec<f64>> {
    match v {
        NumberList::One(x) => Ok(vec![x]),
        NumberList::Many(v) => Ok(v),
        NumberList::Text(t) => parse_grid(&t),
    }
}

/// Parses `start:stop[:step]` (inclusive, step 1 by default) or a comma list.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("cannot parse grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() > 3 {
            return Err(bad());
        }
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(CliError::Config(format!("grid {text:?} has {count} points")));
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    let values: Vec<f64> = text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn integers(values: &[f64], what: &str) -> CliResult<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(CliError::Config(format!("{what} entry {v} is not a nonnegative integer")))
            }
        })
        .collect()
}

fn parse_measure(text: &str) -> CliResult<Measure> {
    let lower = text.trim().to_ascii_lowercase();
    let (kind, axis) = lower.split_once('-').ok_or_else(|| CliError::Config(format!("unknown measurement {text:?}")))?;
    let axis = match axis {
        "x" => 'X',
        "y" => 'Y',
        "z" => 'Z',
        _ => return Err(CliError::Config(format!("unknown measurement axis in {text:?}"))),
    };
    match kind {
        "projective" => Ok(Measure::Projective { axis }),
        "weak" => Ok(Measure::Weak { axis }),
        _ => Err(CliError::Config(format!("unknown measurement {text:?}"))),
    }
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

impl Merged {
    fn validate(self) -> CliResult<ScanConfig> {
        let config = |m: String| Err(CliError::Config(m));
        let capability = |m: String| Err(CliError::Capability(m));

        let backend = match self.backend.as_deref().unwrap_or("dense") {
            "dense" => Backend::Dense,
            "freefermion" => Backend::Freefermion,
            "cft" => Backend::Cft,
            other => return config(format!("unknown backend {other:?}")),
        };
        let default_n = if backend == Backend::Dense { 9 } else { 301 };
        let n = self.n.unwrap_or(default_n);
        let model = match self.model.as_deref().unwrap_or("tfim") {
            "tfim" => {
                if !self.terms.is_empty() {
                    return config("terms are only allowed with model = custom".into());
                }
                let g = self.g.unwrap_or(1.0);
                if !g.is_finite() {
                    return config(format!("g = {g}"));
                }
                if n < 2 {
                    return config(format!("TFIM needs at least 2 sites, got {n}"));
                }
                Model::Tfim { n, g }
            }
            "custom" => {
                if self.terms.is_empty() {
                    return config("custom model needs at least one term".into());
                }
                if n == 0 {
                    return config("custom model needs n >= 1".into());
                }
                SpinHamiltonian::from_terms(n, &self.terms).map_err(|e| CliError::Config(e.to_string()))?;
                Model::Custom { n, terms: self.terms.clone() }
            }
            other => return config(format!("unknown model {other:?}")),
        };

        let measure = match &self.measure {
            Some(text) => parse_measure(text)?,
            None if backend == Backend::Dense => Measure::Projective { axis: 'X' },
            None => Measure::Weak { axis: 'X' },
        };
        if let Measure::Projective { axis } = measure {
            if backend != Backend::Dense {
                return capability(format!("projective measurement needs the dense backend, not {}", backend.name()));
            }
            if axis != 'X' {
                return capability("projective measurements are supported for X only".into());
            }
        }
        match backend {
            Backend::Dense if n > DENSE_MAX_SITES => {
                return capability(format!("dense backend handles at most {DENSE_MAX_SITES} sites, got {n}"));
            }
            Backend::Freefermion => {
                if !matches!(model, Model::Tfim { .. }) {
                    return capability("freefermion backend needs model = tfim".into());
                }
                if measure != (Measure::Weak { axis: 'X' }) {
                    return capability(format!("freefermion backend needs weak-x, got {}", measure.label()));
                }
            }
            Backend::Cft if measure != (Measure::Weak { axis: 'X' }) => {
                return capability(format!("cft backend describes weak measurements only, got {}", measure.label()));
            }
            _ => {}
        }

        let delta = self.delta;
        let kappa = match &self.kappa {
            None => None,
            Some(KappaValue::Number(k)) => Some(KappaSource::Value(*k)),
            Some(KappaValue::Text(t)) if t.trim() == "fit" => Some(KappaSource::Fit),
            Some(KappaValue::Text(t)) => match t.trim().parse::<f64>() {
                Ok(k) => Some(KappaSource::Value(k)),
                Err(_) => return config(format!("kappa {t:?} is neither a number nor \"fit\"")),
            },
        };
        if backend == Backend::Cft {
            match delta {
                None => return capability("cft backend needs a scaling dimension (delta)".into()),
                Some(d) if !(d > 0.0) => return config(format!("delta = {d}")),
                _ => {}
            }
            match kappa {
                None => return capability("cft backend needs a kappa source (a value or \"fit\")".into()),
                Some(KappaSource::Value(k)) if !(k > 0.0) => return config(format!("kappa = {k}")),
                Some(KappaSource::Fit) if !matches!(model, Model::Tfim { .. }) => {
                    return capability("kappa = fit needs model = tfim".into());
                }
                _ => {}
            }
        }

        let betas = match (&self.beta_grid, self.beta) {
            (Some(grid), _) => grid.clone(),
            (None, Some(b)) => vec![b],
            (None, None) => return config("no beta given (use --beta or --beta-grid)".into()),
        };
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return config(format!("beta = {b} must be positive and finite"));
        }

        let site = self.site.unwrap_or((n - 1) / 2);
        if site >= n {
            return config(format!("site {site} outside a chain of {n}"));
        }
        let region_b = match &self.region_b {
            None => None,
            Some(v) => {
                let b = integers(v, "region-b")?;
                if let Some(s) = b.iter().find(|&&s| s >= n) {
                    return config(format!("region-b site {s} outside a chain of {n}"));
                }
                if b.contains(&site) {
                    return config(format!("region-b contains the measured site {site}"));
                }
                let mut sorted = b.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != b.len() {
                    return config("region-b lists a site twice".into());
                }
                Some(b)
            }
        };
        let xs = match &region_b {
            Some(b) => vec![b.iter().map(|&s| s.abs_diff(site)).min().unwrap_or(0)],
            None => {
                let center = (n - 1) / 2;
                let xs = match &self.x_grid {
                    Some(v) => integers(v, "x-grid")?,
                    None => (1..=center).collect(),
                };
                if xs.is_empty() {
                    return config(format!("empty distance grid for n = {n}"));
                }
                if backend != Backend::Cft {
                    if n < 3 {
                        return config(format!("chain geometry needs n >= 3, got {n}"));
                    }
                    if site != center {
                        return config("without region-b the measured site must be the chain center".into());
                    }
                    if let Some(x) = xs.iter().find(|&&x| x == 0 || x > center) {
                        return config(format!("x_AB = {x} outside 1..={center}"));
                    }
                } else if xs.contains(&0) {
                    return config("x_AB must be positive".into());
                }
                xs
            }
        };

        let tolerance = match (self.epsilon, self.k_eps) {
            (Some(_), Some(_)) => return config("give either epsilon or k-eps, not both".into()),
            (Some(e), None) if !(0.0..=1.0).contains(&e) => return config(format!("epsilon = {e} outside [0, 1]")),
            (Some(e), None) => Tolerance::Epsilon(e),
            (None, Some(k)) if !(k >= 0.0) => return config(format!("k-eps = {k} is negative")),
            (None, Some(k)) => Tolerance::KEps(k),
            (None, None) => Tolerance::Epsilon(0.0),
        };

        let format = match self.format.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return config(format!("unknown format {other:?}")),
        };
        let threads = match threads_from_env()?.or(self.threads) {
            Some(0) => return config("thread count must be at least 1".into()),
            Some(t) => t,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };

        Ok(ScanConfig {
            model,
            backend,
            betas,
            xs,
            measure,
            site,
            region_b,
            tolerance,
            delta,
            kappa,
            out: self.out,
            format,
            threads,
            seed: self.seed.unwrap_or(0),
        })
    }
}
