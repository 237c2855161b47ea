//! Run configuration and the `simulate`, `fit` and `imbalance` commands.
//!
//! Each run is driven by one flat JSON document. Every artifact written is
//! a pure function of the effective configuration, so re-running a command
//! reproduces its outputs byte for byte. The JSON outputs embed the seed,
//! a SHA-256 of the effective configuration and the tool version, along with
//! the SHA-256 of each CSV written next to them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    fit_samples, spreads_from_ohlc, spreads_from_quotes, FitOptions, FitResult, Ingestion, OhlcMode,
};
use crate::error::{Error, Result};
use crate::io::{self, PdfRow};
use crate::market::{imbalance_moments, q_of_i, simulate_ensemble, simulate_path, PostTrade, Side, SimConfig, SimMode};
use crate::model::ModelParams;
use crate::statistics::{ks_distance, tabulate_law, BinCounts, SpreadCdf, SpreadLaw};
use crate::wave::StateVector;
use crate::VERSION;

/// Configuration shared by `simulate` and `imbalance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationRunConfig {
    #[serde(default)]
    pub seed: u64,
    pub n_steps: usize,
    pub initial_price: f64,
    /// Real-amplitude initial state with this imbalance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_imbalance: Option<f64>,
    /// Explicit initial amplitudes `[[re, im], [re, im]]` for `(ψ_ask, ψ_bid)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<[[f64; 2]; 2]>,
    #[serde(default = "default_mode")]
    pub mode: SimMode,
    #[serde(default)]
    pub c_i: f64,
    #[serde(default = "default_post_trade")]
    pub post_trade: PostTrade,
    pub sigma: f64,
    #[serde(default)]
    pub xi0: f64,
    pub xi1: f64,
    #[serde(default)]
    pub kappa0: f64,
    pub kappa1: f64,
    pub tau: f64,
    pub s0: f64,
    pub dt: f64,
    #[serde(default)]
    pub complex_kappa: bool,
    /// Ensemble size (`imbalance` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Q(I) bins (`imbalance` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_mode() -> SimMode {
    SimMode::Balanced
}

fn default_post_trade() -> PostTrade {
    PostTrade::PhaseScramble
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Quotes,
    Ohlc,
}

/// Configuration of `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Input CSV, relative to the configuration file's directory.
    pub input: String,
    pub format: InputFormat,
    /// `absolute` or `relative` (default) for OHLC input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ohlc_mode: Option<OhlcMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<[f64; 2]>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_fit_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_max_iterations() -> usize {
    500
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_fit_bins() -> usize {
    50
}

/// Default number of Q(I) bins.
pub const DEFAULT_Q_BINS: usize = 40;

/// Provenance block embedded in every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub param_hash: String,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

/// Files written by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

/// Line of the first occurrence of `"key"` in `raw`, 1-based.
fn key_line(raw: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    raw.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn config_error(raw: &str, source: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match key_line(raw, key) {
        Some(line) => Error::validation(format!("{source}: line {line}: {key}: {msg}")),
        None => Error::validation(format!("{source}: {key}: {msg}")),
    }
}

/// Reads and parses a JSON configuration, returning it with its raw text.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<(T, String)> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = serde_json::from_str(&raw).map_err(|e| {
        Error::validation(format!(
            "{}: line {} column {}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    })?;
    Ok((cfg, raw))
}

fn param_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| Error::validation(format!("config serialization: {e}")))?;
    Ok(io::sha256_hex(&bytes))
}

fn meta<T: Serialize>(command: &str, seed: u64, cfg: &T) -> Result<RunMeta> {
    Ok(RunMeta {
        tool: "qcw".to_string(),
        version: VERSION.to_string(),
        command: command.to_string(),
        seed,
        param_hash: param_hash(cfg)?,
    })
}

fn resolve_out_dir(cfg_out: Option<&str>, cfg_path: &Path, overrides: &Overrides) -> PathBuf {
    match (&overrides.out_dir, cfg_out) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => cfg_path.parent().unwrap_or(Path::new(".")).join(d),
        (None, None) => PathBuf::from("."),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| Error::validation(format!("JSON serialization: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

impl SimulationRunConfig {
    /// Converts to the engine's types, reporting the offending key and its line.
    pub fn to_engine(&self, raw: &str, source: &str) -> Result<(SimConfig, ModelParams)> {
        let err = |key: &str, msg: String| config_error(raw, source, key, msg);
        let params = ModelParams {
            sigma: self.sigma,
            xi0: self.xi0,
            xi1: self.xi1,
            kappa0: self.kappa0,
            kappa1: self.kappa1,
            tau: self.tau,
            s0: self.s0,
            dt: self.dt,
            complex_kappa: self.complex_kappa,
        };
        for (key, v, strict) in [
            ("sigma", self.sigma, false),
            ("xi1", self.xi1, false),
            ("kappa1", self.kappa1, false),
            ("tau", self.tau, true),
            ("s0", self.s0, true),
            ("dt", self.dt, true),
        ] {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                let bound = if strict { "> 0" } else { ">= 0" };
                return Err(err(key, format!("must be finite and {bound}, got {v}")));
            }
        }
        for (key, v) in [("xi0", self.xi0), ("kappa0", self.kappa0), ("c_i", self.c_i)] {
            if !v.is_finite() {
                return Err(err(key, format!("must be finite, got {v}")));
            }
        }
        if self.n_steps < 1 {
            return Err(err("n_steps", "must be >= 1".to_string()));
        }
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(err("initial_price", format!("must be > 0, got {}", self.initial_price)));
        }
        let initial_state = match (self.initial_imbalance, self.initial_state) {
            (Some(_), Some(_)) => {
                return Err(err(
                    "initial_state",
                    "give either initial_state or initial_imbalance, not both".to_string(),
                ))
            }
            (Some(i), None) => StateVector::from_imbalance(i).map_err(|e| err("initial_imbalance", e.to_string()))?,
            (None, Some([[ar, ai], [br, bi]])) => StateVector::new(Complex64::new(ar, ai), Complex64::new(br, bi))
                .map_err(|e| err("initial_state", e.to_string()))?,
            (None, None) => StateVector::balanced(),
        };
        let sim = SimConfig {
            n_steps: self.n_steps,
            initial_price: self.initial_price,
            initial_state,
            mode: self.mode,
            c_i: self.c_i,
            post_trade: self.post_trade,
            seed: self.seed,
        };
        sim.validate()?;
        params.validate()?;
        Ok((sim, params))
    }

    fn hashed(&self) -> Self {
        SimulationRunConfig {
            out_dir: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulateSummary<'a> {
    meta: RunMeta,
    config: &'a SimulationRunConfig,
    n_steps: usize,
    final_price: f64,
    net_log_change: f64,
    bid_fraction: f64,
    mean_imbalance: f64,
    /// Largest |(s_ask − s_bid) − √(ξ² + |κ|²)| over the path.
    max_spread_residual: f64,
    /// KS distance of the path's spreads to the analytic law, when it applies.
    spread_law_ks: Option<f64>,
    warnings: Vec<String>,
    artifacts: BTreeMap<String, String>,
}

/// `qcw simulate`: writes `path.csv` and `summary.json`.
pub fn cmd_simulate(config_path: &Path, overrides: &Overrides) -> Result<Outputs> {
    let (mut cfg, raw): (SimulationRunConfig, String) = load_config(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    let source = config_path.display().to_string();
    let (sim, params) = cfg.to_engine(&raw, &source)?;
    let out_dir = resolve_out_dir(cfg.out_dir.as_deref(), config_path, overrides);
    ensure_dir(&out_dir)?;

    log::info!("simulating {} steps (seed {})", sim.n_steps, sim.seed);
    let path = simulate_path(&sim, &params)?;
    let csv = io::path_csv(&path.points)?;

    let mut warnings = Vec::new();
    let spread_law_ks = analytic_spread_check(&cfg, &params, &path, &mut warnings)?;
    let last = path.points.last().expect("n_steps >= 1").s_trade;
    let hashed = cfg.hashed();
    let summary = SimulateSummary {
        meta: meta("simulate", cfg.seed, &hashed)?,
        config: &hashed,
        n_steps: path.len(),
        final_price: last,
        net_log_change: (last / sim.initial_price).ln(),
        bid_fraction: path.bid_fraction(),
        mean_imbalance: path.imbalances().sum::<f64>() / path.len() as f64,
        max_spread_residual: path.max_spread_residual(),
        spread_law_ks,
        warnings,
        artifacts: BTreeMap::from([("path.csv".to_string(), io::sha256_hex(&csv))]),
    };
    let csv_path = out_dir.join("path.csv");
    let json_path = out_dir.join("summary.json");
    io::write_atomic(&csv_path, &csv)?;
    io::write_atomic(&json_path, &json_bytes(&summary)?)?;
    Ok(Outputs {
        files: vec![csv_path, json_path],
    })
}

/// KS distance of simulated spreads to the analytic law; `None` with a
/// warning when the law does not apply (non-zero means or coupled mode).
fn analytic_spread_check(
    cfg: &SimulationRunConfig,
    params: &ModelParams,
    path: &crate::market::PathSeries,
    warnings: &mut Vec<String>,
) -> Result<Option<f64>> {
    if params.xi0 != 0.0 || params.kappa0 != 0.0 || cfg.mode == SimMode::ImbalanceCoupled {
        let msg = "analytic spread law needs xi0 = kappa0 = 0 and balanced mode; compare spreads by Monte Carlo only";
        log::warn!("{msg}");
        warnings.push(msg.to_string());
        return Ok(None);
    }
    if params.xi1 == 0.0 || params.kappa1 == 0.0 {
        return Ok(None);
    }
    let law = SpreadLaw::new(params.xi1, params.kappa1)?;
    let spreads: Vec<f64> = path.points.iter().map(|p| p.s_ask - p.s_bid).collect();
    ks_distance(&spreads, &law).map(Some)
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    meta: RunMeta,
    config: &'a FitRunConfig,
    #[serde(flatten)]
    fit: FitResult,
    input_format: InputFormat,
    ohlc_mode: Option<OhlcMode>,
    /// Denominator of relative high-low ranges.
    denominator: Option<&'static str>,
    ingestion: Ingestion,
    ks_distance: f64,
    artifacts: BTreeMap<String, String>,
}

/// `qcw fit`: writes `fit.json`, `pdf.csv` and `law.csv`.
pub fn cmd_fit(config_path: &Path, overrides: &Overrides) -> Result<Outputs> {
    let (mut cfg, raw): (FitRunConfig, String) = load_config(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    let source = config_path.display().to_string();
    if cfg.bins < 1 {
        return Err(config_error(&raw, &source, "bins", "must be >= 1"));
    }
    if cfg.max_iterations < 1 {
        return Err(config_error(&raw, &source, "max_iterations", "must be >= 1"));
    }
    if !(cfg.tolerance.is_finite() && cfg.tolerance > 0.0) {
        return Err(config_error(&raw, &source, "tolerance", "must be > 0"));
    }
    if cfg.format == InputFormat::Quotes && cfg.ohlc_mode.is_some() {
        return Err(config_error(
            &raw,
            &source,
            "ohlc_mode",
            "only valid with format = ohlc",
        ));
    }
    let init = match cfg.init {
        Some([x, k]) => {
            SpreadLaw::new(x, k).map_err(|e| config_error(&raw, &source, "init", e))?;
            Some((x, k))
        }
        None => None,
    };
    let input = config_path.parent().unwrap_or(Path::new(".")).join(&cfg.input);
    if !input.is_file() {
        return Err(config_error(
            &raw,
            &source,
            "input",
            format!("file not found: {}", input.display()),
        ));
    }
    let out_dir = resolve_out_dir(cfg.out_dir.as_deref(), config_path, overrides);

    let (ingestion, ohlc_mode) = match cfg.format {
        InputFormat::Quotes => (spreads_from_quotes(&io::read_quotes(&input)?), None),
        InputFormat::Ohlc => {
            let mode = cfg.ohlc_mode.unwrap_or(OhlcMode::Relative);
            (spreads_from_ohlc(&io::read_ohlc(&input)?, mode)?, Some(mode))
        }
    };
    log::info!(
        "{} usable spreads from {} rows ({} zero, {} crossed, {} invalid dropped)",
        ingestion.samples.len(),
        ingestion.rows,
        ingestion.dropped_zero,
        ingestion.dropped_crossed,
        ingestion.dropped_invalid
    );
    let opts = FitOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
    };
    let fit = fit_samples(&ingestion.samples, init, &opts)?;
    if !fit.converged {
        log::warn!("fit did not converge after {} iterations", fit.iterations);
    }
    let law = fit.law()?;
    let cdf = SpreadCdf::new(law);
    let values = ingestion.values();
    let ks = crate::statistics::ks_distance_with(&values, |x| cdf.cdf(x))?;

    let hi = values.iter().copied().fold(0.0, f64::max);
    let hist = BinCounts::from_samples(values.iter().copied(), 0.0, hi, cfg.bins)?.normalized()?;
    let pdf_rows: Vec<PdfRow> = (0..hist.bins())
        .map(|k| PdfRow {
            delta: hist.center(k),
            empirical_density: hist.density(k),
            model_density: law.pdf(hist.center(k)),
        })
        .collect();
    let pdf_csv = io::pdf_csv(&pdf_rows)?;
    let law_csv = io::law_csv(&tabulate_law(&cdf, law.support_bound().min(2.0 * hi).max(hi), 201))?;

    let hashed = FitRunConfig {
        out_dir: None,
        ..cfg.clone()
    };
    let report = FitReport {
        meta: meta("fit", cfg.seed, &hashed)?,
        config: &hashed,
        fit,
        input_format: cfg.format,
        ohlc_mode,
        denominator: (ohlc_mode == Some(OhlcMode::Relative)).then_some("close"),
        ingestion,
        ks_distance: ks,
        artifacts: BTreeMap::from([
            ("law.csv".to_string(), io::sha256_hex(&law_csv)),
            ("pdf.csv".to_string(), io::sha256_hex(&pdf_csv)),
        ]),
    };
    ensure_dir(&out_dir)?;
    let files = vec![
        out_dir.join("pdf.csv"),
        out_dir.join("law.csv"),
        out_dir.join("fit.json"),
    ];
    io::write_atomic(&files[0], &pdf_csv)?;
    io::write_atomic(&files[1], &law_csv)?;
    io::write_atomic(&files[2], &json_bytes(&report)?)?;
    Ok(Outputs { files })
}

#[derive(Debug, Serialize)]
struct ImbalanceReport<'a> {
    meta: RunMeta,
    config: &'a SimulationRunConfig,
    n_paths: usize,
    n_samples: u64,
    mean: f64,
    variance: f64,
    skewness: f64,
    /// Fraction of imbalance samples below zero.
    negative_mass_fraction: f64,
    bid_fraction: f64,
    mean_net_log_change: f64,
    artifacts: BTreeMap<String, String>,
}

/// `qcw imbalance`: writes `qi.csv` and `moments.json`.
pub fn cmd_imbalance(config_path: &Path, overrides: &Overrides) -> Result<Outputs> {
    let (mut cfg, raw): (SimulationRunConfig, String) = load_config(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    let source = config_path.display().to_string();
    let n_paths = match cfg.n_paths {
        Some(n) if n >= 1 => n,
        Some(_) => {
            return Err(config_error(
                &raw,
                &source,
                "n_paths",
                "ensemble must contain at least one path",
            ))
        }
        None => {
            return Err(config_error(
                &raw,
                &source,
                "n_paths",
                "required for the imbalance command",
            ))
        }
    };
    let bins = cfg.bins.unwrap_or(DEFAULT_Q_BINS);
    if bins < 1 {
        return Err(config_error(&raw, &source, "bins", "must be >= 1"));
    }
    let (sim, params) = cfg.to_engine(&raw, &source)?;
    let out_dir = resolve_out_dir(cfg.out_dir.as_deref(), config_path, overrides);
    ensure_dir(&out_dir)?;

    log::info!("simulating {n_paths} paths of {} steps", sim.n_steps);
    let ensemble = simulate_ensemble(&sim, &params, n_paths)?;
    let q = q_of_i(&ensemble, bins)?;
    let m = imbalance_moments(&ensemble)?;
    let negatives = ensemble
        .iter()
        .flat_map(|p| p.imbalances())
        .filter(|i| *i < 0.0)
        .count();
    let bids = ensemble
        .iter()
        .flat_map(|p| p.points.iter())
        .filter(|p| p.side == Side::Bid)
        .count();
    let mean_net_log_change = ensemble
        .iter()
        .map(|p| (p.points.last().expect("n_steps >= 1").s_trade / sim.initial_price).ln())
        .sum::<f64>()
        / n_paths as f64;
    let csv = io::histogram_csv(&q)?;

    let hashed = cfg.hashed();
    let report = ImbalanceReport {
        meta: meta("imbalance", cfg.seed, &hashed)?,
        config: &hashed,
        n_paths,
        n_samples: m.n,
        mean: m.mean,
        variance: m.variance,
        skewness: m.skewness,
        negative_mass_fraction: negatives as f64 / m.n as f64,
        bid_fraction: bids as f64 / m.n as f64,
        mean_net_log_change,
        artifacts: BTreeMap::from([("qi.csv".to_string(), io::sha256_hex(&csv))]),
    };
    let csv_path = out_dir.join("qi.csv");
    let json_path = out_dir.join("moments.json");
    io::write_atomic(&csv_path, &csv)?;
    io::write_atomic(&json_path, &json_bytes(&report)?)?;
    Ok(Outputs {
        files: vec![csv_path, json_path],
    })
}
