//! Experiment configuration (TOML, schema version 1).
//!
//! ```toml
//! schema_version = 1
//! command = "gs-sre"            # gs-spectrum | gs-sre | quench | benchmark
//! models = ["syk4", "syk2"]
//! sizes = [4, 6, 8]
//! realizations = 20             # or a table: [realizations] 4 = 800 ...
//! alphas = [1, 2, 3]
//! seed = 7
//! output = "runs/gs"
//! workers = 4                   # optional
//!
//! [sampler]                     # any ChainConfig field
//! samples = 100000
//!
//! [spectrum]
//! exact_max_sites = 8
//!
//! [quench]
//! snapshot_times = [0.01, 0.5, 1.0, 2.0, 10.0]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{default_time_grid, merge_times, SATURATION_WINDOW};
use crate::error::{invalid, Error, Result};
use crate::fock::parse_occupation;
use crate::hamiltonian::ModelKind;
use crate::sampler::ChainConfig;
use crate::spectrum::{EXACT_MAX_SITES, MIN_BINS};
use crate::MAX_SITES;

pub const SCHEMA_VERSION: u32 = 1;

/// Disorder realizations per `N` used when the config gives none.
pub const DEFAULT_REALIZATIONS: [(usize, usize); 6] = [(4, 800), (6, 400), (8, 200), (10, 100), (12, 25), (14, 5)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Ground-state spectra, histograms and fits.
    GsSpectrum,
    /// Ground-state SRE only.
    GsSre,
    Quench,
    /// Sampled against exact filtered SRE on ground states.
    Benchmark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Realizations {
    Uniform(usize),
    /// Keys are system sizes written as strings (TOML table keys).
    PerSize(BTreeMap<String, usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    /// Largest `N` evaluated by exhaustive enumeration; larger sizes are sampled.
    pub exact_max_sites: usize,
    /// Histogram bins; Freedman–Diaconis when absent.
    pub bins: Option<usize>,
    /// Write every exact spectrum as `spectra/<model>_N<n>_r<k>.csv`.
    pub write_csv: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { exact_max_sites: EXACT_MAX_SITES, bins: None, write_csv: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    /// Exact up to `spectrum.exact_max_sites`, sampled beyond.
    #[default]
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuenchOptions {
    /// Initial occupation pattern; `1010…` when absent.
    pub pattern: Option<String>,
    /// Evaluation times; the default log grid when absent.
    pub times: Option<Vec<f64>>,
    pub snapshot_times: Vec<f64>,
    pub saturation_window: [f64; 2],
    pub estimator: EstimatorChoice,
}

impl Default for QuenchOptions {
    fn default() -> Self {
        QuenchOptions {
            pattern: None,
            times: None,
            snapshot_times: vec![0.01, 0.5, 1.0, 2.0, 10.0],
            saturation_window: [SATURATION_WINDOW.0, SATURATION_WINDOW.1],
            estimator: EstimatorChoice::Auto,
        }
    }
}

impl QuenchOptions {
    /// Times actually evaluated: the requested grid (or the default grid plus
    /// integer points across the saturation window) merged with the snapshots.
    pub fn effective_times(&self) -> Vec<f64> {
        let base = match &self.times {
            Some(t) => t.clone(),
            None => {
                let [lo, hi] = self.saturation_window;
                let window: Vec<f64> = (lo.ceil() as i64..=hi.floor() as i64).map(|k| k as f64).collect();
                merge_times(&default_time_grid(), &window)
            }
        };
        merge_times(&base, &self.snapshot_times)
    }
}

fn default_alphas() -> Vec<f64> {
    vec![2.0]
}

fn default_coupling() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
    pub models: Vec<ModelKind>,
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub realizations: Option<Realizations>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Coupling scale `J`.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Chain settings; `alphas` and `mode` are overridden per command and
    /// `seed` is mixed into the per-realization chain seeds.
    #[serde(default)]
    pub sampler: ChainConfig,
    #[serde(default)]
    pub spectrum: SpectrumOptions,
    #[serde(default)]
    pub quench: QuenchOptions,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Realizations requested at size `n`.
    pub fn realizations_for(&self, n: usize) -> Result<usize> {
        let count = match &self.realizations {
            Some(Realizations::Uniform(c)) => Some(*c),
            Some(Realizations::PerSize(map)) => map.get(&n.to_string()).copied(),
            None => None,
        }
        .or_else(|| DEFAULT_REALIZATIONS.iter().find(|(m, _)| *m == n).map(|(_, c)| *c));
        count.ok_or_else(|| invalid(format!("no realization count for N = {n}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.models.is_empty() || self.sizes.is_empty() {
            return Err(invalid("models and sizes must be non-empty"));
        }
        for &n in &self.sizes {
            let min = if self.models.contains(&ModelKind::Syk4) { 4 } else { 2 };
            if n % 2 != 0 || n < min || n > MAX_SITES {
                return Err(invalid(format!("N = {n} must be even and in {min}..={MAX_SITES}")));
            }
            if self.realizations_for(n)? == 0 {
                return Err(invalid(format!("realization count for N = {n} must be positive")));
            }
        }
        if let Some(Realizations::PerSize(map)) = &self.realizations {
            if let Some(key) = map.keys().find(|k| k.parse::<usize>().is_err()) {
                return Err(Error::Parse(format!("realization key {key:?} is not a size")));
            }
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite() || *a < 1.0) {
            return Err(invalid("alphas must be finite and ≥ 1"));
        }
        if !self.coupling.is_finite() || self.coupling <= 0.0 || !self.mu.is_finite() {
            return Err(invalid("coupling must be positive and mu finite"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be ≥ 1"));
        }
        self.sampler.validate()?;
        if self.spectrum.bins.is_some_and(|b| b < MIN_BINS) {
            return Err(invalid(format!("bins must be ≥ {MIN_BINS}")));
        }
        let q = &self.quench;
        if let Some(p) = &q.pattern {
            parse_occupation(p)?;
            if let Some(n) = self.sizes.iter().find(|&&n| n != p.chars().count()) {
                return Err(invalid(format!("pattern {p:?} does not fit N = {n}")));
            }
        }
        let times = q.effective_times();
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("quench times must be finite and ≥ 0"));
        }
        if q.saturation_window.iter().any(|w| w.is_nan()) || q.saturation_window[0] > q.saturation_window[1] {
            return Err(invalid("saturation window must be ordered"));
        }
        Ok(())
    }
}

/// Starter config for a command, as TOML text.
pub fn example_config(command: Command) -> String {
    let mut cfg = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        command,
        models: vec![ModelKind::Syk4, ModelKind::Syk2],
        sizes: vec![4, 6, 8],
        realizations: Some(Realizations::Uniform(10)),
        alphas: vec![1.0, 2.0, 3.0],
        coupling: 1.0,
        mu: 0.0,
        seed: 1,
        output: PathBuf::from(format!("out/{}", command_name(command))),
        workers: None,
        sampler: ChainConfig { samples: 100_000, ..Default::default() },
        spectrum: SpectrumOptions::default(),
        quench: QuenchOptions::default(),
    };
    if command == Command::Benchmark {
        cfg.sizes = vec![6];
        cfg.alphas = vec![2.0];
    }
    cfg.to_toml_string()
}

pub fn command_name(command: Command) -> &'static str {
    match command {
        Command::GsSpectrum => "gs-spectrum",
        Command::GsSre => "gs-sre",
        Command::Quench => "quench",
        Command::Benchmark => "benchmark",
    }
}
