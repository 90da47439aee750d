//! INI-style experiment configuration: `key = value` lines under
//! `[experiment]`, `[params]` and `[tolerances]` sections. Unset fields are
//! filled with per-experiment defaults by the runners.

use anyhow::{bail, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;
use thinshell_core::distributions::Family;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub n_samples: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub t_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
    pub k_list: Option<Vec<usize>>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub overlays: bool,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            seed: 0,
            family: None,
            n: None,
            n_grid: None,
            n_samples: None,
            p_grid: None,
            t_grid: None,
            q_grid: None,
            k_list: None,
            out_dir: PathBuf::from("out"),
            workers: 0,
            overlays: false,
            tolerances: BTreeMap::new(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, line_no: usize) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for piece in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match piece.parse::<T>() {
            Ok(x) => out.push(x),
            Err(_) => bail!("line {line_no}: cannot parse list element `{piece}`"),
        }
    }
    if out.is_empty() {
        bail!("line {line_no}: empty list");
    }
    Ok(out)
}

/// Parse and validate a config file. Errors carry line numbers; duplicate
/// keys within a section are rejected by name.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = String::from("experiment");
    let mut have_seed = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                bail!("line {line_no}: unterminated section header `{line}`");
            }
            section = line[1..line.len() - 1].trim().to_lowercase();
            if !matches!(section.as_str(), "experiment" | "params" | "tolerances") {
                bail!("line {line_no}: unknown section `[{section}]`");
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {line_no}: expected `key = value`, got `{line}`");
        };
        let key = k.trim().to_lowercase();
        let v = v.trim();
        let scoped = format!("{section}.{key}");
        if let Some(first) = seen.insert(scoped.clone(), line_no) {
            bail!("line {line_no}: duplicate key `{key}` (first set on line {first})");
        }
        match (section.as_str(), key.as_str()) {
            ("experiment", "id") | ("experiment", "experiment") => {
                cfg.experiment = v.to_string();
            }
            ("experiment", "seed") => {
                cfg.seed =
                    v.parse().map_err(|e| anyhow::anyhow!("line {line_no}: bad seed: {e}"))?;
                have_seed = true;
            }
            ("experiment", "out") => cfg.out_dir = PathBuf::from(v),
            ("experiment", "workers") => {
                cfg.workers =
                    v.parse().map_err(|e| anyhow::anyhow!("line {line_no}: bad workers: {e}"))?;
            }
            ("experiment", "overlays") => {
                cfg.overlays = matches!(v, "true" | "1" | "yes");
            }
            ("params", "family") => {
                cfg.family = Some(
                    Family::parse(v)
                        .map_err(|e| anyhow::anyhow!("line {line_no}: {e}"))?,
                );
            }
            ("params", "n") => {
                cfg.n = Some(v.parse().map_err(|e| anyhow::anyhow!("line {line_no}: bad n: {e}"))?);
            }
            ("params", "n_grid") => cfg.n_grid = Some(parse_list(v, line_no)?),
            ("params", "samples") | ("params", "n_samples") => {
                cfg.n_samples = Some(
                    v.parse().map_err(|e| anyhow::anyhow!("line {line_no}: bad samples: {e}"))?,
                );
            }
            ("params", "p_grid") => cfg.p_grid = Some(parse_list(v, line_no)?),
            ("params", "t_grid") => cfg.t_grid = Some(parse_list(v, line_no)?),
            ("params", "q_grid") => cfg.q_grid = Some(parse_list(v, line_no)?),
            ("params", "k_list") => cfg.k_list = Some(parse_list(v, line_no)?),
            ("tolerances", name) => {
                let val: f64 = v
                    .parse()
                    .map_err(|e| anyhow::anyhow!("line {line_no}: bad tolerance {name}: {e}"))?;
                cfg.tolerances.insert(name.to_string(), val);
            }
            (sec, key) => bail!("line {line_no}: unknown key `{key}` in section [{sec}]"),
        }
    }
    if !have_seed {
        bail!("validation: field `seed` is required");
    }
    if cfg.experiment.is_empty() {
        bail!("validation: field `id` (experiment) is required");
    }
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if let Some(n) = cfg.n_samples {
        if n < 1000 {
            bail!("validation: field `samples` must be >= 1000, got {n}");
        }
    }
    for (name, grid_len) in [
        ("p_grid", cfg.p_grid.as_ref().map(Vec::len)),
        ("t_grid", cfg.t_grid.as_ref().map(Vec::len)),
        ("q_grid", cfg.q_grid.as_ref().map(Vec::len)),
    ] {
        if grid_len == Some(0) {
            bail!("validation: field `{name}` must be non-empty");
        }
    }
    if let Some(ref ng) = cfg.n_grid {
        if ng.is_empty() {
            bail!("validation: field `n_grid` must be non-empty");
        }
        if ng.windows(2).any(|w| w[1] <= w[0]) {
            bail!("validation: field `n_grid` must be strictly increasing");
        }
    }
    Ok(())
}
