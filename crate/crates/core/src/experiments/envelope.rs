//! Result envelope: config echo, per-realization records and disorder statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::dynamics::SeriesPoint;
use crate::error::{Error, Result};
use crate::hamiltonian::ModelKind;
use crate::numfmt::{to_json_compact, to_json_pretty};
use crate::spectrum::{FitComparison, Histogram, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

/// Spectrum captured at one quench time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub histogram: Option<Histogram>,
    pub fits: Option<FitComparison>,
    pub unit_peak: u64,
    pub n_even_zero: u64,
}

/// Everything computed for one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub index: usize,
    pub model: ModelKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub realization: usize,
    pub seed: u64,
    pub status: TaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub observables: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fits: Option<FitComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<SnapshotRecord>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); zero for a single value.
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Stat { mean, std, count: values.len() })
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// Disorder average of `M₂(t)` at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStat {
    pub t: f64,
    pub m2: Stat,
    pub m2_filtered: Stat,
}

/// Disorder statistics for one `(model, N)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub model: ModelKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub requested: usize,
    pub achieved: usize,
    pub stats: BTreeMap<String, Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesStat>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub prng_id: String,
    pub code_version: String,
    /// Seconds since the Unix epoch when the run finished.
    pub timestamp_unix: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub tasks: Vec<TaskRecord>,
    pub summary: Vec<GroupSummary>,
}

impl ResultEnvelope {
    pub fn from_json(s: &str) -> Result<Self> {
        let env: ResultEnvelope = serde_json::from_str(s)?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("envelope schema_version {} is not supported", env.schema_version)));
        }
        env.config.validate()?;
        Ok(env)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_pretty(self)?)
    }

    /// The per-realization records and summaries, without config echo or provenance.
    pub fn numeric_payload(&self) -> Result<String> {
        Ok(to_json_compact(&(&self.tasks, &self.summary))?)
    }

    pub fn group(&self, model: ModelKind, n: usize) -> Option<&GroupSummary> {
        self.summary.iter().find(|g| g.model == model && g.n == n)
    }
}

/// Group successful tasks by `(model, N)` in first-appearance order and
/// compute the statistics of every observable.
pub fn summarize(tasks: &[TaskRecord], requested: impl Fn(ModelKind, usize) -> usize) -> Vec<GroupSummary> {
    let mut keys: Vec<(ModelKind, usize)> = Vec::new();
    for t in tasks {
        if !keys.contains(&(t.model, t.n)) {
            keys.push((t.model, t.n));
        }
    }
    keys.into_iter()
        .map(|(model, n)| {
            let ok: Vec<&TaskRecord> =
                tasks.iter().filter(|t| t.model == model && t.n == n && t.status == TaskStatus::Ok).collect();
            let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for t in &ok {
                for (k, &v) in &t.observables {
                    columns.entry(k.clone()).or_default().push(v);
                }
            }
            let stats = columns.iter().filter_map(|(k, v)| Stat::of(v).map(|s| (k.clone(), s))).collect();
            GroupSummary {
                model,
                n,
                requested: requested(model, n),
                achieved: ok.len(),
                stats,
                series: series_stats(&ok),
            }
        })
        .collect()
}

fn series_stats(tasks: &[&TaskRecord]) -> Option<Vec<SeriesStat>> {
    let all: Vec<&Vec<SeriesPoint>> = tasks.iter().filter_map(|t| t.series.as_ref()).collect();
    let first = all.first()?;
    let stats = first
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let m2: Vec<f64> = all.iter().filter_map(|s| s.get(k)).map(|q| q.m2).collect();
            let mf: Vec<f64> = all.iter().filter_map(|s| s.get(k)).map(|q| q.m2_filtered).collect();
            SeriesStat { t: p.t, m2: Stat::of(&m2).expect("non-empty"), m2_filtered: Stat::of(&mf).expect("non-empty") }
        })
        .collect();
    Some(stats)
}

/// Observable key for an `α`-dependent quantity: `M2`, `M2.5`, ...
pub fn alpha_key(prefix: &str, alpha: f64) -> String {
    if alpha.fract() == 0.0 {
        format!("{prefix}{}", alpha as i64)
    } else {
        format!("{prefix}{alpha}")
    }
}
