//! Quenches from occupation product states.
//!
//! The Hamiltonian is diagonalized once in the particle-number sector of the
//! initial state; every time point is then a phase rotation in the eigenbasis.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{eig_hermitian, energy_expectation, EigenDecomposition, Propagator};
use crate::error::{invalid, Error, Result};
use crate::fock::{embed_sector_vector, enumerate_sector, parse_occupation, FockIndex, PureState, SectorBasis};
use crate::hamiltonian::{build_sector_matrix, ModelInstance};
use crate::numfmt::f64_17;
use crate::rng::derive_seed;
use crate::sampler::{run_chain, ChainConfig, SamplerMode};
use crate::spectrum::{compare_fits, exact_spectrum, filtered_sre, sre, FitComparison, MajoranaSpectrum, EXACT_MAX_SITES};

/// Window over which the long-time value of `M₂` is averaged.
pub const SATURATION_WINDOW: (f64, f64) = (8.0, 12.0);

/// `|s⟩` for an occupation pattern of length `n` (character `i` is site `i`).
pub fn product_state(pattern: &str, n: usize) -> Result<PureState> {
    let len = pattern.chars().count();
    if len != n {
        return Err(Error::DimensionMismatch { expected: n, found: len });
    }
    PureState::basis(n, parse_occupation(pattern)?)
}

/// Charge-density-wave pattern `1010…` on `n` sites.
pub fn cdw_pattern(n: usize) -> String {
    (0..n).map(|i| if i % 2 == 0 { '1' } else { '0' }).collect()
}

/// `t = 0` followed by `points` log-spaced times in `[lo, hi]`.
pub fn log_time_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut times = vec![0.0];
    if points == 1 {
        times.push(lo);
    } else {
        let (a, b) = (lo.ln(), hi.ln());
        times.extend((0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()));
        times[1] = lo;
        times[points] = hi;
    }
    times
}

/// Default grid: `t = 0` plus 40 log-spaced points from `10⁻²` to `10¹`.
pub fn default_time_grid() -> Vec<f64> {
    log_time_grid(1e-2, 1e1, 40)
}

/// Merge and sort time lists. Points of `a` within a relative `1e-9` of a
/// point of `b` are dropped in favour of the latter.
pub fn merge_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let near = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
    let mut out: Vec<f64> = a.iter().copied().filter(|&x| !b.iter().any(|&y| near(x, y))).chain(b.iter().copied()).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// How `M₂(t)` is obtained at each time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Estimator {
    Exact,
    Sampled(ChainConfig),
}

impl Estimator {
    /// Exact enumeration up to `N = 8`, sampling beyond.
    pub fn auto(n: usize, cfg: &ChainConfig) -> Estimator {
        if n <= EXACT_MAX_SITES {
            Estimator::Exact
        } else {
            Estimator::Sampled(cfg.clone())
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuenchPlan {
    pub model: ModelInstance,
    pub initial: FockIndex,
    pub times: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub estimator: Estimator,
    /// Lift the `N ≤ 8` guard on exact enumeration.
    pub allow_large: bool,
}

impl QuenchPlan {
    /// Quench from the `1010…` state on the default grid.
    pub fn cdw(model: ModelInstance, estimator: Estimator) -> Self {
        let initial = parse_occupation(&cdw_pattern(model.n)).expect("valid pattern");
        QuenchPlan {
            model,
            initial,
            times: default_time_grid(),
            snapshot_times: Vec::new(),
            estimator,
            allow_large: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.0 >> self.model.n != 0 {
            return Err(invalid("initial pattern has bits beyond N"));
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("times must be finite and ≥ 0"));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("times must be strictly ascending"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !self.times.contains(t)) {
            return Err(invalid(format!("snapshot time {t} is not on the time grid")));
        }
        Ok(())
    }
}

/// A diagonalized quench ready to be evaluated at any time.
#[derive(Debug, Clone)]
pub struct PreparedQuench {
    pub plan: QuenchPlan,
    pub basis: SectorBasis,
    pub hamiltonian: DMatrix<Complex64>,
    pub decomposition: EigenDecomposition,
    pub psi0: Vec<Complex64>,
}

/// One row of a quench series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub m2: f64,
    pub m2_filtered: f64,
    pub stderr: Option<f64>,
    pub stderr_filtered: Option<f64>,
    pub energy: f64,
    /// `Σ x² / d`; only known for exact points.
    pub purity: Option<f64>,
}

/// Full spectrum at one time with both fits (absent while the connected part is too small).
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub spectrum: MajoranaSpectrum,
    pub fits: Option<FitComparison>,
}

impl PreparedQuench {
    pub fn new(plan: QuenchPlan) -> Result<Self> {
        plan.validate()?;
        let basis = enumerate_sector(plan.model.n, plan.initial.particle_count() as usize)?;
        let hamiltonian = build_sector_matrix(&plan.model, &basis)?;
        let decomposition = eig_hermitian(&hamiltonian)?;
        let mut psi0 = vec![Complex64::default(); basis.len()];
        psi0[basis.rank(plan.initial).expect("initial state lies in its own sector")] = Complex64::new(1.0, 0.0);
        Ok(PreparedQuench { plan, basis, hamiltonian, decomposition, psi0 })
    }

    /// Sector vector at time `t`; `t = 0` returns the initial vector untouched.
    pub fn sector_state(&self, t: f64) -> Result<Vec<Complex64>> {
        if t == 0.0 {
            return Ok(self.psi0.clone());
        }
        Ok(Propagator::new(&self.decomposition, &self.psi0)?.at(t))
    }

    pub fn state(&self, t: f64) -> Result<PureState> {
        embed_sector_vector(&self.sector_state(t)?, &self.basis)
    }

    fn point(&self, index: usize, t: f64) -> Result<SeriesPoint> {
        let v = self.sector_state(t)?;
        let energy = energy_expectation(&self.hamiltonian, &v);
        let psi = embed_sector_vector(&v, &self.basis)?;
        match &self.plan.estimator {
            Estimator::Exact => {
                let spec = exact_spectrum(&psi, self.plan.allow_large)?;
                Ok(SeriesPoint {
                    t,
                    m2: sre(&spec, 2.0)?,
                    m2_filtered: filtered_sre(&spec, 2.0)?,
                    stderr: None,
                    stderr_filtered: None,
                    energy,
                    purity: Some(spec.purity()),
                })
            }
            Estimator::Sampled(cfg) => {
                let cfg = ChainConfig {
                    alphas: vec![2.0],
                    mode: SamplerMode::Filtered,
                    seed: derive_seed(cfg.seed, &[index as u64]),
                    ..cfg.clone()
                };
                let r = &run_chain(&psi, &cfg)?.sre[0];
                Ok(SeriesPoint {
                    t,
                    m2: r.m,
                    m2_filtered: r.m_filtered,
                    stderr: r.stderr,
                    stderr_filtered: r.stderr_filtered,
                    energy,
                    purity: None,
                })
            }
        }
    }

    /// `M₂` at every time of the plan, in time order.
    pub fn series(&self) -> Result<Vec<SeriesPoint>> {
        self.plan.times.par_iter().enumerate().map(|(k, &t)| self.point(k, t)).collect()
    }

    pub fn snapshot(&self, t: f64) -> Result<Snapshot> {
        if !self.plan.snapshot_times.contains(&t) {
            return Err(invalid(format!("t = {t} is not a snapshot time")));
        }
        let spectrum = exact_spectrum(&self.state(t)?, self.plan.allow_large)?;
        let fits = compare_fits(&spectrum).ok();
        Ok(Snapshot { t, spectrum, fits })
    }

    pub fn snapshots(&self) -> Result<Vec<Snapshot>> {
        self.plan.snapshot_times.par_iter().map(|&t| self.snapshot(t)).collect()
    }
}

pub fn quench_series(plan: QuenchPlan) -> Result<Vec<SeriesPoint>> {
    PreparedQuench::new(plan)?.series()
}

pub fn spectrum_snapshot(plan: QuenchPlan, t: f64) -> Result<Snapshot> {
    PreparedQuench::new(plan)?.snapshot(t)
}

/// Mean of `M₂` over the points with `t` in `window` (inclusive).
pub fn saturation_value(series: &[SeriesPoint], window: (f64, f64)) -> Result<f64> {
    let inside: Vec<f64> = series.iter().filter(|p| p.t >= window.0 && p.t <= window.1).map(|p| p.m2).collect();
    if inside.is_empty() {
        return Err(Error::InsufficientData(format!("no time points in [{}, {}]", window.0, window.1)));
    }
    Ok(inside.iter().sum::<f64>() / inside.len() as f64)
}

/// Least-squares slope of `ln M₂` against `ln t` over `window`.
pub fn power_law_exponent(series: &[SeriesPoint], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.t >= window.0 && p.t <= window.1 && p.t > 0.0 && p.m2 > 0.0)
        .map(|p| (p.t.ln(), p.m2.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("power-law fit needs two positive points".into()));
    }
    Ok(linear_fit(&pts).0)
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r²)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, my - a * mx, r2)
}

/// CSV with columns `t,M2,stderr,model,N,seed`.
pub fn write_series_csv<W: Write>(series: &[SeriesPoint], model: &ModelInstance, mut out: W) -> Result<()> {
    writeln!(out, "t,M2,stderr,model,N,seed")?;
    for p in series {
        let se = p.stderr.map(f64_17).unwrap_or_default();
        writeln!(out, "{},{},{se},{},{},{}", f64_17(p.t), f64_17(p.m2), model.kind, model.n, model.seed)?;
    }
    Ok(())
}
