//! Task expansion and execution on a bounded worker pool.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Command, EstimatorChoice, ExperimentConfig, SCHEMA_VERSION};
use super::envelope::{alpha_key, summarize, Provenance, ResultEnvelope, SnapshotRecord, TaskRecord, TaskStatus};
use crate::dynamics::{cdw_pattern, saturation_value, Estimator, PreparedQuench, QuenchPlan, SeriesPoint};
use crate::eigen::{eig_hermitian, ground_state, GroundState};
use crate::error::{Error, Result};
use crate::fock::{enumerate_sector, parse_occupation};
use crate::hamiltonian::{build_sector_matrix, realization_tags, sample, ModelInstance, ModelKind};
use crate::rng::{derive_seed, PRNG_ID};
use crate::sampler::{run_chain, ChainConfig, SamplerMode};
use crate::spectrum::{compare_fits, exact_spectrum, histogram, sre_result, write_spectrum_csv, Method, MajoranaSpectrum};

/// Extra tag separating chain seeds from coupling seeds.
const SAMPLER_TAG: u64 = 0x5341_4d50;

/// One `(model, N, realization)` unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub index: usize,
    pub model: ModelKind,
    pub n: usize,
    pub realization: usize,
}

impl Task {
    pub fn seed(&self, master: u64) -> u64 {
        derive_seed(master, &realization_tags(self.model, self.n, self.realization))
    }

    fn sampler_seed(&self, cfg: &ExperimentConfig) -> u64 {
        let [a, b, c] = realization_tags(self.model, self.n, self.realization);
        derive_seed(cfg.seed, &[a, b, c, SAMPLER_TAG, cfg.sampler.seed])
    }
}

/// Tasks in model, size, realization order.
pub fn expand_tasks(cfg: &ExperimentConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for &model in &cfg.models {
        for &n in &cfg.sizes {
            for realization in 0..cfg.realizations_for(n)? {
                tasks.push(Task { index: tasks.len(), model, n, realization });
            }
        }
    }
    Ok(tasks)
}

/// Ground state in the half-filling sector.
pub fn half_filling_ground_state(model: &ModelInstance) -> Result<GroundState> {
    let basis = enumerate_sector(model.n, model.n / 2)?;
    let h = build_sector_matrix(model, &basis)?;
    ground_state(&eig_hermitian(&h)?, &basis)
}

fn resolve_workers(cfg: &ExperimentConfig) -> usize {
    cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Compute every task on `cfg.workers` threads. Spectrum CSVs, when
/// requested, go under `cfg.output`; nothing else touches the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<ResultEnvelope> {
    cfg.validate()?;
    let workers = resolve_workers(cfg);
    let tasks = expand_tasks(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let records: Vec<TaskRecord> = pool.install(|| tasks.par_iter().map(|t| run_task(cfg, t)).collect());
    let summary = summarize(&records, |_, n| cfg.realizations_for(n).unwrap_or(0));
    Ok(ResultEnvelope {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        provenance: Provenance {
            prng_id: PRNG_ID.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            workers,
        },
        tasks: records,
        summary,
    })
}

/// Execute and write `envelope.json` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<(ResultEnvelope, PathBuf)> {
    fs::create_dir_all(&cfg.output)?;
    let env = execute(cfg)?;
    let path = cfg.output.join("envelope.json");
    fs::write(&path, env.to_json()?)?;
    Ok((env, path))
}

fn run_task(cfg: &ExperimentConfig, task: &Task) -> TaskRecord {
    let seed = task.seed(cfg.seed);
    let mut record = TaskRecord {
        index: task.index,
        model: task.model,
        n: task.n,
        realization: task.realization,
        seed,
        status: TaskStatus::Ok,
        error: None,
        method: None,
        observables: BTreeMap::new(),
        histogram: None,
        fits: None,
        series: None,
        snapshots: None,
    };
    let outcome = sample(task.model, task.n, cfg.coupling, seed).and_then(|model| {
        let model = model.with_mu(cfg.mu);
        match cfg.command {
            Command::GsSpectrum | Command::GsSre => ground_state_task(cfg, task, &model, &mut record),
            Command::Quench => quench_task(cfg, task, model, &mut record),
            Command::Benchmark => benchmark_task(cfg, task, &model, &mut record),
        }
    });
    if let Err(e) = outcome {
        record.status = TaskStatus::Failed;
        record.error = Some(e.to_string());
        record.observables.clear();
        record.histogram = None;
        record.fits = None;
        record.series = None;
        record.snapshots = None;
    }
    record
}

fn chain_config(cfg: &ExperimentConfig, task: &Task) -> ChainConfig {
    ChainConfig {
        alphas: cfg.alphas.clone(),
        mode: SamplerMode::Filtered,
        seed: task.sampler_seed(cfg),
        ..cfg.sampler.clone()
    }
}

fn record_exact(spec: &MajoranaSpectrum, cfg: &ExperimentConfig, record: &mut TaskRecord) -> Result<()> {
    let obs = &mut record.observables;
    for &alpha in &cfg.alphas {
        let r = sre_result(spec, alpha)?;
        obs.insert(alpha_key("M", alpha), r.m);
        obs.insert(alpha_key("M", alpha) + "_filtered", r.m_filtered);
    }
    obs.insert("purity".into(), spec.purity());
    obs.insert("n_even_zero".into(), spec.n_even_zero() as f64);
    obs.insert("unit_peak".into(), spec.unit_peak() as f64);
    if let Ok(fits) = compare_fits(spec) {
        obs.insert("loglik_gaussian".into(), fits.gaussian.log_likelihood);
        obs.insert("loglik_laplace".into(), fits.laplace.log_likelihood);
        obs.insert("b_gaussian".into(), fits.gaussian.b_fitted);
        obs.insert("b_laplace".into(), fits.laplace.b_fitted);
        record.fits = Some(fits);
    }
    record.method = Some(Method::Exact);
    Ok(())
}

fn ground_state_task(cfg: &ExperimentConfig, task: &Task, model: &ModelInstance, record: &mut TaskRecord) -> Result<()> {
    let gs = half_filling_ground_state(model)?;
    record.observables.insert("energy".into(), gs.energy);
    if let Some(gap) = gs.gap {
        record.observables.insert("gap".into(), gap);
    }
    let exact = task.n <= cfg.spectrum.exact_max_sites;
    if cfg.command == Command::GsSpectrum || exact {
        let spec = exact_spectrum(&gs.state, exact)?;
        record_exact(&spec, cfg, record)?;
        if cfg.command == Command::GsSpectrum {
            record.histogram = histogram(&spec, cfg.spectrum.bins).ok();
            if cfg.spectrum.write_csv {
                write_spectrum_file(&cfg.output, task, &spec)?;
            }
        }
        return Ok(());
    }
    let report = run_chain(&gs.state, &chain_config(cfg, task))?;
    for r in &report.sre {
        let key = alpha_key("M", r.alpha);
        let obs = &mut record.observables;
        obs.insert(key.clone(), r.m);
        obs.insert(format!("{key}_filtered"), r.m_filtered);
        obs.insert(format!("{key}_stderr"), r.stderr.unwrap_or_default());
        obs.insert(format!("{key}_filtered_stderr"), r.stderr_filtered.unwrap_or_default());
    }
    record.observables.insert("acceptance_rate".into(), report.acceptance_rate);
    record.method = Some(Method::Sampled);
    Ok(())
}

fn write_spectrum_file(out: &Path, task: &Task, spec: &MajoranaSpectrum) -> Result<()> {
    let dir = out.join("spectra");
    fs::create_dir_all(&dir)?;
    let file = fs::File::create(dir.join(format!("{}_N{}_r{}.csv", task.model, task.n, task.realization)))?;
    write_spectrum_csv(spec, BufWriter::new(file))
}

fn quench_task(cfg: &ExperimentConfig, task: &Task, model: ModelInstance, record: &mut TaskRecord) -> Result<()> {
    let q = &cfg.quench;
    let exact = match q.estimator {
        EstimatorChoice::Exact => true,
        EstimatorChoice::Sampled => false,
        EstimatorChoice::Auto => task.n <= cfg.spectrum.exact_max_sites,
    };
    let snapshots_allowed = exact || task.n <= cfg.spectrum.exact_max_sites;
    let initial = match &q.pattern {
        Some(p) => parse_occupation(p)?,
        None => parse_occupation(&cdw_pattern(task.n))?,
    };
    let plan = QuenchPlan {
        model,
        initial,
        times: q.effective_times(),
        snapshot_times: if snapshots_allowed { q.snapshot_times.clone() } else { Vec::new() },
        estimator: if exact { Estimator::Exact } else { Estimator::Sampled(chain_config(cfg, task)) },
        allow_large: exact || snapshots_allowed,
    };
    let prepared = PreparedQuench::new(plan)?;
    let series = prepared.series()?;
    let window = (q.saturation_window[0], q.saturation_window[1]);
    let obs = &mut record.observables;
    obs.insert("M2_saturation".into(), saturation_value(&series, window)?);
    let filtered: Vec<_> = series.iter().map(|p| SeriesPoint { m2: p.m2_filtered, ..p.clone() }).collect();
    obs.insert("M2_filtered_saturation".into(), saturation_value(&filtered, window)?);
    let e0 = series[0].energy;
    obs.insert("energy".into(), e0);
    obs.insert("energy_drift".into(), series.iter().map(|p| (p.energy - e0).abs()).fold(0.0, f64::max));
    if exact {
        let err = series.iter().filter_map(|p| p.purity).map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        obs.insert("purity_error".into(), err);
    }
    let snapshots = prepared
        .snapshots()?
        .into_iter()
        .map(|s| SnapshotRecord {
            t: s.t,
            histogram: histogram(&s.spectrum, cfg.spectrum.bins).ok(),
            fits: s.fits,
            unit_peak: s.spectrum.unit_peak(),
            n_even_zero: s.spectrum.n_even_zero(),
        })
        .collect();
    record.series = Some(series);
    record.snapshots = Some(snapshots);
    record.method = Some(if exact { Method::Exact } else { Method::Sampled });
    Ok(())
}

fn benchmark_task(cfg: &ExperimentConfig, task: &Task, model: &ModelInstance, record: &mut TaskRecord) -> Result<()> {
    let gs = half_filling_ground_state(model)?;
    let spec = exact_spectrum(&gs.state, true)?;
    let report = run_chain(&gs.state, &chain_config(cfg, task))?;
    let obs = &mut record.observables;
    for r in &report.sre {
        let exact = sre_result(&spec, r.alpha)?;
        let key = alpha_key("M", r.alpha) + "_filtered";
        let se = r.stderr_filtered.unwrap_or_default();
        let diff = (r.m_filtered - exact.m_filtered).abs();
        obs.insert(format!("exact_{key}"), exact.m_filtered);
        obs.insert(format!("sampled_{key}"), r.m_filtered);
        obs.insert(format!("sampled_{key}_stderr"), se);
        obs.insert(format!("abs_diff_{key}"), diff);
        obs.insert(format!("z_{key}"), if se > 0.0 { diff / se } else { 0.0 });
    }
    obs.insert("acceptance_rate".into(), report.acceptance_rate);
    record.method = Some(Method::Sampled);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::example_config;

    fn small(command: Command) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::from_toml_str(&example_config(command)).unwrap();
        cfg.sizes = vec![4];
        cfg.realizations = Some(super::super::config::Realizations::Uniform(2));
        cfg.sampler.samples = 2_000;
        cfg.workers = Some(2);
        cfg
    }

    #[test]
    fn task_order_and_seeds() {
        let cfg = small(Command::GsSre);
        let tasks = expand_tasks(&cfg).unwrap();
        assert_eq!(tasks.len(), 4);
        assert_eq!(tasks[2].model, ModelKind::Syk2);
        assert_eq!(tasks[3].realization, 1);
        let ens = crate::hamiltonian::sample_ensemble(ModelKind::Syk2, 4, 1.0, cfg.seed, 2).unwrap();
        assert_eq!(ens[1].seed, tasks[3].seed(cfg.seed));
    }

    #[test]
    fn gs_sre_records() {
        let env = execute(&small(Command::GsSre)).unwrap();
        assert_eq!(env.tasks.len(), 4);
        for t in &env.tasks {
            assert_eq!(t.status, TaskStatus::Ok);
            for k in ["M1", "M2", "M3", "M2_filtered", "energy", "purity"] {
                assert!(t.observables.contains_key(k), "{k}");
            }
        }
        let g = env.group(ModelKind::Syk4, 4).unwrap();
        assert_eq!((g.requested, g.achieved), (2, 2));
    }

    #[test]
    fn failures_are_recorded() {
        let mut cfg = small(Command::GsSpectrum);
        cfg.spectrum.exact_max_sites = 2;
        cfg.sizes = vec![10];
        cfg.models = vec![ModelKind::Syk2];
        cfg.realizations = Some(super::super::config::Realizations::Uniform(1));
        let env = execute(&cfg).unwrap();
        assert_eq!(env.tasks[0].status, TaskStatus::Failed);
        assert!(env.tasks[0].error.as_deref().unwrap().contains("size"));
        assert_eq!(env.summary[0].achieved, 0);
    }

    #[test]
    fn sampled_sizes_report_errors() {
        let mut cfg = small(Command::GsSre);
        cfg.spectrum.exact_max_sites = 2;
        cfg.alphas = vec![2.0];
        let env = execute(&cfg).unwrap();
        let t = &env.tasks[0];
        assert_eq!(t.method, Some(Method::Sampled));
        assert!(t.observables["M2_filtered_stderr"] > 0.0);
    }
}
