//! Versioned TOML run configuration.
//!
//! Every campaign is fully described by one file plus the seed; there is no
//! wall-clock seeding anywhere, so identical config + seed reproduces
//! identical outputs. See `configs/` at the repo root for commented
//! examples.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use cvqkd_core::channel::SystemParams;
use cvqkd_core::optimizer::SearchSpace;
use cvqkd_core::sim::LadderPolicy;
use cvqkd_core::surface::FitTransform;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub system: SystemSection,
    pub code: CodeSection,
    pub mc: McSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub search: SearchSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub alpha_db_per_km: f64,
    pub eta: f64,
    pub xi_ch_a: f64,
    pub xi_rec: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    /// Path to a protograph file; the embedded default when omitted.
    pub protograph: Option<PathBuf>,
    pub lifting_factor: usize,
    #[serde(default = "default_ext_degree")]
    pub ext_degree: usize,
    pub max_extension: Option<usize>,
}

fn default_ext_degree() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub rates: Vec<f64>,
    #[serde(default = "default_target_errors")]
    pub target_errors: usize,
    #[serde(default = "default_max_frames")]
    pub max_frames: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_llr_clip")]
    pub llr_clip: f64,
}

fn default_target_errors() -> usize {
    50
}
fn default_max_frames() -> usize {
    10_000
}
fn default_max_iterations() -> usize {
    200
}
fn default_llr_clip() -> f64 {
    30.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub beta_low: f64,
    pub beta_high: f64,
    pub points: usize,
    pub fer_window: [f64; 2],
    pub max_expansions: usize,
}

impl Default for LadderSection {
    fn default() -> Self {
        let p = LadderPolicy::default();
        Self {
            beta_low: p.beta_low,
            beta_high: p.beta_high,
            points: p.points,
            fer_window: [p.fer_window.0, p.fer_window.1],
            max_expansions: p.max_expansions,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub degree: usize,
    pub transform: FitTransform,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            degree: 3,
            transform: FitTransform::Direct,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub v_a: [f64; 2],
    pub beta: [f64; 2],
    pub v_a_points: usize,
    pub beta_points: usize,
    pub refine: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let s = SearchSpace::default();
        Self {
            v_a: [s.v_a_range.0, s.v_a_range.1],
            beta: [s.beta_range.0, s.beta_range.1],
            v_a_points: s.v_a_points,
            beta_points: s.beta_points,
            refine: s.refine,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub distances_km: Vec<f64>,
    #[serde(default = "default_baseline_beta")]
    pub baseline_beta: f64,
}

fn default_baseline_beta() -> f64 {
    0.95
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    /// Distance for the single-point `optimize` subcommand; falls back to
    /// the first sweep distance.
    pub distance_km: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Mandatory master seed.
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_workers() -> usize {
    1
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Config {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let text = std::str::from_utf8(&bytes).context("config is not UTF-8")?;
        let cfg: Config = toml::from_str(text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        cfg.validate(path)?;
        Ok((cfg, bytes))
    }

    fn validate(&self, path: &Path) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!(
                "config {} has version {}, this tool reads version {}",
                path.display(),
                self.version,
                CONFIG_VERSION
            );
        }
        if let Some(pg) = &self.code.protograph {
            let resolved = resolve_relative(path, pg);
            if !resolved.exists() {
                bail!("protograph file not found: {}", resolved.display());
            }
        }
        if self.mc.rates.is_empty() {
            bail!("mc.rates must not be empty");
        }
        if self.sweep.distances_km.is_empty() {
            bail!("sweep.distances_km must not be empty");
        }
        if self
            .sweep
            .distances_km
            .windows(2)
            .any(|w| w[0] >= w[1])
        {
            bail!("sweep.distances_km must be strictly ascending");
        }
        Ok(())
    }

    /// Paths inside the config are relative to the config file location.
    pub fn protograph_path(&self, config_path: &Path) -> Option<PathBuf> {
        self.code
            .protograph
            .as_ref()
            .map(|p| resolve_relative(config_path, p))
    }

    pub fn system_params(&self, d_km: f64) -> SystemParams {
        SystemParams {
            d_km,
            alpha_db_per_km: self.system.alpha_db_per_km,
            eta: self.system.eta,
            xi_ch_a: self.system.xi_ch_a,
            xi_rec: self.system.xi_rec,
        }
    }

    pub fn ladder_policy(&self) -> LadderPolicy {
        LadderPolicy {
            beta_low: self.ladder.beta_low,
            beta_high: self.ladder.beta_high,
            points: self.ladder.points,
            fer_window: (self.ladder.fer_window[0], self.ladder.fer_window[1]),
            max_expansions: self.ladder.max_expansions,
        }
    }

    pub fn search_space(&self) -> SearchSpace {
        SearchSpace {
            v_a_range: (self.search.v_a[0], self.search.v_a[1]),
            beta_range: (self.search.beta[0], self.search.beta[1]),
            v_a_points: self.search.v_a_points,
            beta_points: self.search.beta_points,
            refine: self.search.refine,
        }
    }
}

fn resolve_relative(config_path: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(p)
    }
}
