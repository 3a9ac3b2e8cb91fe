//! Run configuration: a TOML file with optional fields, overridden by CLI
//! flags, resolved into a fully explicit [`RunConfig`] whose canonical form
//! is hashed into every output header.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{io_err, parse_err, CliError, Result};

/// Dirichlet concentration: one value for every cell, or one per order.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Scalar(f64),
    PerOrder(Vec<f64>),
}

/// The config file as written by the user; everything optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub alphabet_size: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub sample_size: Option<usize>,
    pub out_dir: Option<String>,
    pub model_order: Option<usize>,
    pub model_alpha: Option<f64>,
    pub model_tensor: Option<String>,
    pub beta: Option<Vec<f64>>,
    pub alpha: Option<AlphaSpec>,
    pub grid: Option<Vec<usize>>,
    pub svg: Option<bool>,
}

/// CLI flag overrides applied before resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub nmax: Option<usize>,
    pub grid: Option<Vec<usize>>,
}

/// Fully resolved configuration. Field values here, and nothing else,
/// determine every byte a command writes for a given input file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alphabet_size: usize,
    pub n_max: usize,
    pub seed: u64,
    pub sample_size: usize,
    pub out_dir: String,
    pub model_order: Option<usize>,
    pub model_alpha: f64,
    pub model_tensor: Option<String>,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub grid: Option<Vec<usize>>,
    pub svg: bool,
}

impl RunConfig {
    /// Canonical one-line-per-field rendering; the config hash is over this.
    /// Only fields that determine output bytes appear: where files land
    /// (`out_dir`) and whether the plot is written (`svg`) do not change
    /// their contents, so the same parameters hash identically anywhere.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("alphabet_size={}\n", self.alphabet_size));
        out.push_str(&format!("n_max={}\n", self.n_max));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("sample_size={}\n", self.sample_size));
        match self.model_order {
            Some(order) => out.push_str(&format!("model_order={order}\n")),
            None => out.push_str("model_order=auto\n"),
        }
        out.push_str(&format!("model_alpha={}\n", crate::formats::fmt_float(self.model_alpha)));
        match &self.model_tensor {
            Some(path) => out.push_str(&format!("model_tensor={path}\n")),
            None => out.push_str("model_tensor=none\n"),
        }
        let beta: Vec<String> = self.beta.iter().map(|w| crate::formats::fmt_float(*w)).collect();
        out.push_str(&format!("beta={}\n", beta.join(",")));
        let alpha: Vec<String> = self.alpha.iter().map(|a| crate::formats::fmt_float(*a)).collect();
        out.push_str(&format!("alpha={}\n", alpha.join(",")));
        match &self.grid {
            Some(grid) => {
                let grid: Vec<String> = grid.iter().map(|m| m.to_string()).collect();
                out.push_str(&format!("grid={}\n", grid.join(",")));
            }
            None => out.push_str("grid=auto\n"),
        }
        out
    }

    /// First 16 hex characters of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }
}

pub fn load_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| parse_err(path, e.to_string()))
}

/// Applies overrides and defaults, then validates. Config errors name the
/// offending field.
pub fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<RunConfig> {
    let alphabet_size = raw.alphabet_size.unwrap_or(2);
    if alphabet_size < 2 {
        return Err(CliError::Config(format!(
            "alphabet_size: must be at least 2, got {alphabet_size}"
        )));
    }
    let n_max = overrides.nmax.or(raw.n_max).unwrap_or(8);
    let seed = overrides.seed.or(raw.seed).unwrap_or(0);
    let sample_size = raw.sample_size.unwrap_or(10_000);
    if sample_size == 0 {
        return Err(CliError::Config("sample_size: must be positive".into()));
    }
    let out_dir = overrides
        .out
        .clone()
        .or(raw.out_dir)
        .unwrap_or_else(|| ".".into());
    let model_alpha = raw.model_alpha.unwrap_or(1.0);
    if !model_alpha.is_finite() || model_alpha <= 0.0 {
        return Err(CliError::Config(format!(
            "model_alpha: must be positive and finite, got {model_alpha}"
        )));
    }
    if let Some(order) = raw.model_order {
        if order > n_max {
            return Err(CliError::Config(format!(
                "model_order: {order} exceeds n_max {n_max}"
            )));
        }
    }
    let beta = match raw.beta {
        Some(weights) => {
            if weights.len() != n_max + 1 {
                return Err(CliError::Config(format!(
                    "beta: expected {} weights for orders 0..={}, got {}",
                    n_max + 1,
                    n_max,
                    weights.len()
                )));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(CliError::Config("beta: weights must be finite and nonnegative".into()));
            }
            if weights.iter().sum::<f64>() <= 0.0 {
                return Err(CliError::Config("beta: total mass must be positive".into()));
            }
            weights
        }
        None => vec![1.0 / (n_max + 1) as f64; n_max + 1],
    };
    let alpha = match raw.alpha {
        Some(AlphaSpec::Scalar(a)) => vec![a; n_max + 1],
        Some(AlphaSpec::PerOrder(v)) => {
            if v.len() != n_max + 1 {
                return Err(CliError::Config(format!(
                    "alpha: expected {} values for orders 0..={}, got {}",
                    n_max + 1,
                    n_max,
                    v.len()
                )));
            }
            v
        }
        None => vec![1.0; n_max + 1],
    };
    if alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(CliError::Config("alpha: values must be positive and finite".into()));
    }
    let grid = match overrides.grid.clone().or(raw.grid) {
        Some(grid) => {
            if grid.is_empty() {
                return Err(CliError::Config("grid: must not be empty".into()));
            }
            if grid.contains(&0) {
                return Err(CliError::Config("grid: entries must be positive".into()));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Config("grid: entries must be strictly increasing".into()));
            }
            Some(grid)
        }
        None => None,
    };
    Ok(RunConfig {
        alphabet_size,
        n_max,
        seed,
        sample_size,
        out_dir,
        model_order: raw.model_order,
        model_alpha,
        model_tensor: raw.model_tensor,
        beta,
        alpha,
        grid,
        svg: raw.svg.unwrap_or(true),
    })
}

/// Geometric grid from min(100, n) up to n, at most six distinct points.
/// Used when the config leaves the grid automatic.
pub fn auto_grid(n: usize) -> Vec<usize> {
    let lo = 100.min(n) as f64;
    let hi = n as f64;
    let points = 6usize;
    let mut grid: Vec<usize> = (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize
        })
        .collect();
    grid.dedup();
    grid
}

/// Parses a `--grid "m1,m2,…"` flag.
pub fn parse_grid_flag(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Config(format!("grid: bad entry {part:?}: {e}")))
        })
        .collect()
}
