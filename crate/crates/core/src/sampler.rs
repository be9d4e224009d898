//! Metropolis sampling of Majorana strings with weight `σ_v = x_v² / d`.
//!
//! Under `σ`, the average of `x^{2(α−1)}` is `ζ_α`, so `M_α` follows from a
//! sample mean. Filtered chains never visit `I` or `P` and sample
//! `σ̃_v = x_v² / (d − 2)` instead, which gives `M̃_α` directly; the other
//! quantity is reconstructed from the known unit contributions of `I` and `P`.
//! For `α = 1` the estimator is `ln x²` and `M₁ = −⟨ln x²⟩`.
//!
//! Moves replace the operators on two random sites and keep the result only if
//! it is still even.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::majorana::{realize, MajoranaString, SiteOp};
use crate::numfmt::f64_17;
use crate::rng::{derive_seed, stream, Prng};
use crate::spectrum::{unsigned_zero, Method, SreResult};

/// Strings tried when looking for a filtered-mode start.
pub const MAX_START_ATTEMPTS: usize = 1 << 20;
/// A chain that records nothing within this many steps per requested sample fails.
const MAX_STEPS_PER_SAMPLE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    Direct,
    Filtered,
}

/// When a chain records a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recording {
    /// Every step records the current string, accepted or not.
    #[default]
    EveryStep,
    /// Only accepted moves record. Biased; kept for comparison.
    AcceptedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    /// Total recorded samples, split evenly over the chains.
    pub samples: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub mode: SamplerMode,
    pub alphas: Vec<f64>,
    pub chain_count: usize,
    pub seed: u64,
    pub recording: Recording,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            samples: 500_000,
            burn_in: 1_000,
            thinning: 1,
            mode: SamplerMode::Filtered,
            alphas: vec![2.0],
            chain_count: 8,
            seed: 0,
            recording: Recording::EveryStep,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.thinning == 0 || self.chain_count == 0 {
            return Err(Error::InvalidParameter("samples, thinning and chain_count must be ≥ 1".into()));
        }
        if self.samples < self.chain_count as u64 {
            return Err(Error::InvalidParameter("fewer samples than chains".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite() || *a < 1.0) {
            return Err(Error::InvalidParameter("alphas must be finite and ≥ 1".into()));
        }
        Ok(())
    }

    fn samples_for_chain(&self, chain: usize) -> u64 {
        let k = self.chain_count as u64;
        self.samples / k + u64::from((chain as u64) < self.samples % k)
    }
}

/// The state a chain is sitting on.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub string: MajoranaString,
    pub x: f64,
    /// `x² / d`, or `x² / (d − 2)` in filtered mode.
    pub sigma: f64,
}

/// Read-only view of the state that the chains evaluate strings against.
#[derive(Debug, Clone)]
pub struct Target<'a> {
    psi: &'a PureState,
    support: Vec<u32>,
    mode: SamplerMode,
    norm: f64,
}

impl<'a> Target<'a> {
    pub fn new(psi: &'a PureState, mode: SamplerMode) -> Result<Self> {
        let d = psi.dim() as f64;
        if psi.sites() < 2 {
            return Err(Error::InvalidParameter("two-site moves need N ≥ 2".into()));
        }
        let norm = match mode {
            SamplerMode::Direct => d,
            SamplerMode::Filtered => d - 2.0,
        };
        Ok(Target { psi, support: psi.support(), mode, norm })
    }

    pub fn sites(&self) -> usize {
        self.psi.sites()
    }

    pub fn dim(&self) -> f64 {
        self.psi.dim() as f64
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    pub fn record(&self, m: MajoranaString) -> Result<SampleRecord> {
        if self.mode == SamplerMode::Filtered && (m.is_identity() || m.is_parity()) {
            return Ok(SampleRecord { string: m, x: 0.0, sigma: 0.0 });
        }
        let x = if m.is_even() {
            realize(m.compile().raw_expectation(self.psi.amplitudes(), &self.support))?
        } else {
            0.0
        };
        Ok(SampleRecord { string: m, x, sigma: x * x / self.norm })
    }
}

/// Replace the operators on two distinct random sites, redrawing until even.
pub fn propose_two_site_update<R: Rng + ?Sized>(m: MajoranaString, rng: &mut R) -> MajoranaString {
    let n = m.sites();
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    loop {
        let oa = SiteOp::ALL[rng.random_range(0..4)];
        let ob = SiteOp::ALL[rng.random_range(0..4)];
        let next = m.with_site_op(a, oa).with_site_op(b, ob);
        if next.is_even() {
            return next;
        }
    }
}

/// One Metropolis step; returns the new record and whether the move was accepted.
pub fn metropolis_step<R: Rng + ?Sized>(
    current: &SampleRecord,
    target: &Target<'_>,
    rng: &mut R,
) -> Result<(SampleRecord, bool)> {
    let proposal = target.record(propose_two_site_update(current.string, rng))?;
    if proposal.sigma == 0.0 {
        return Ok((current.clone(), false));
    }
    let ratio = proposal.sigma / current.sigma;
    if ratio >= 1.0 || rng.random::<f64>() < ratio {
        Ok((proposal, true))
    } else {
        Ok((current.clone(), false))
    }
}

/// Next integer with the same popcount.
fn next_same_weight(v: u64) -> u64 {
    let c = v & v.wrapping_neg();
    let r = v + c;
    (((r ^ v) >> 2) / c) | r
}

/// Starting string: `I` for direct chains; for filtered chains the first string
/// of weight 2, then 4, ..., in ascending order with nonzero weight.
pub fn initial_record(target: &Target<'_>) -> Result<SampleRecord> {
    let n = target.sites();
    if target.mode == SamplerMode::Direct {
        return target.record(MajoranaString::identity(n)?);
    }
    let top = 1u64 << (2 * n);
    let mut tried = 0;
    for w in (2..2 * n).step_by(2) {
        let mut v = (1u64 << w) - 1;
        while v < top {
            let rec = target.record(MajoranaString::new(n, v)?)?;
            if rec.sigma > 0.0 {
                return Ok(rec);
            }
            tried += 1;
            if tried >= MAX_START_ATTEMPTS {
                return Err(Error::NoStart(tried));
            }
            v = next_same_weight(v);
        }
    }
    Err(Error::NoStart(tried))
}

fn estimator(x: f64, alpha: f64) -> f64 {
    let x2 = x * x;
    if alpha == 1.0 {
        x2.ln()
    } else if alpha == 2.0 {
        x2
    } else {
        x2.powf(alpha - 1.0)
    }
}

/// Per-chain sums of the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTally {
    pub samples: u64,
    pub steps: u64,
    pub accepted: u64,
    pub sums: Vec<f64>,
}

impl ChainTally {
    pub fn means(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s / self.samples as f64).collect()
    }
}

/// Run one chain, calling `visit` on each recorded sample.
fn drive_chain(
    target: &Target<'_>,
    cfg: &ChainConfig,
    chain: usize,
    samples: u64,
    mut visit: impl FnMut(u64, &SampleRecord, bool) -> Result<()>,
) -> Result<ChainTally> {
    let mut rng: Prng = stream(derive_seed(cfg.seed, &[chain as u64]));
    let mut current = initial_record(target)?;
    for _ in 0..cfg.burn_in {
        current = metropolis_step(&current, target, &mut rng)?.0;
    }
    let mut tally = ChainTally { samples: 0, steps: 0, accepted: 0, sums: vec![0.0; cfg.alphas.len()] };
    let max_steps = samples.saturating_mul(MAX_STEPS_PER_SAMPLE).saturating_mul(cfg.thinning);
    while tally.samples < samples {
        if tally.steps >= max_steps {
            return Err(Error::Convergence);
        }
        let (next, accepted) = metropolis_step(&current, target, &mut rng)?;
        current = next;
        tally.steps += 1;
        tally.accepted += u64::from(accepted);
        let record = match cfg.recording {
            Recording::EveryStep => tally.steps.is_multiple_of(cfg.thinning),
            Recording::AcceptedOnly => accepted && tally.accepted.is_multiple_of(cfg.thinning),
        };
        if record {
            for (sum, &alpha) in tally.sums.iter_mut().zip(&cfg.alphas) {
                *sum += estimator(current.x, alpha);
            }
            tally.samples += 1;
            visit(tally.steps, &current, accepted)?;
        }
    }
    Ok(tally)
}

/// Standard error of the mean over batch means.
pub fn standard_error(batches: &[f64]) -> Result<f64> {
    if batches.len() < 2 {
        return Err(Error::InsufficientData("standard error needs at least two batches".into()));
    }
    let k = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / k;
    let var = batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok((var / k).sqrt())
}

/// Turn a mean estimator (and its error) into an entropy (and its error).
fn entropy_from_mean(mean: f64, se: f64, alpha: f64) -> (f64, f64) {
    if alpha == 1.0 {
        (unsigned_zero(-mean), se)
    } else {
        (unsigned_zero(mean.ln() / (1.0 - alpha)), se / ((alpha - 1.0) * mean))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub sre: Vec<SreResult>,
    pub samples: u64,
    pub acceptance_rate: f64,
}

/// Run all chains of `cfg` on `psi` and estimate the SRE at each requested `α`.
///
/// Errors come from batch means over chains, or over ten contiguous blocks
/// when there is only one chain.
pub fn run_chain(psi: &PureState, cfg: &ChainConfig) -> Result<SamplingReport> {
    cfg.validate()?;
    let target = Target::new(psi, cfg.mode)?;
    let tallies: Vec<ChainTally> = if cfg.chain_count == 1 {
        single_chain_blocks(&target, cfg)?
    } else {
        (0..cfg.chain_count)
            .into_par_iter()
            .map(|c| drive_chain(&target, cfg, c, cfg.samples_for_chain(c), |_, _, _| Ok(())))
            .collect::<Result<Vec<_>>>()?
    };
    let total: u64 = tallies.iter().map(|t| t.samples).sum();
    let steps: u64 = tallies.iter().map(|t| t.steps).sum();
    let accepted: u64 = tallies.iter().map(|t| t.accepted).sum();
    let d = target.dim();
    let sre = cfg
        .alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| {
            let mean = tallies.iter().map(|t| t.sums[a]).sum::<f64>() / total as f64;
            let batch_means: Vec<f64> = tallies.iter().map(|t| t.sums[a] / t.samples as f64).collect();
            let se = standard_error(&batch_means)?;
            Ok(assemble(alpha, mean, se, d, cfg.mode))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SamplingReport { sre, samples: total, acceptance_rate: accepted as f64 / steps as f64 })
}

fn single_chain_blocks(target: &Target<'_>, cfg: &ChainConfig) -> Result<Vec<ChainTally>> {
    let per_block = cfg.samples.div_ceil(cfg.samples.min(10));
    let mut tallies: Vec<ChainTally> = Vec::new();
    let whole = drive_chain(target, cfg, 0, cfg.samples, |_, rec, _| {
        if tallies.last().is_none_or(|t| t.samples == per_block) {
            tallies.push(ChainTally { samples: 0, steps: 0, accepted: 0, sums: vec![0.0; cfg.alphas.len()] });
        }
        let t = tallies.last_mut().expect("pushed above");
        for (sum, &alpha) in t.sums.iter_mut().zip(&cfg.alphas) {
            *sum += estimator(rec.x, alpha);
        }
        t.samples += 1;
        Ok(())
    })?;
    // step counts are only kept for the chain as a whole
    tallies[0].steps = whole.steps;
    tallies[0].accepted = whole.accepted;
    Ok(tallies)
}

/// Combine a sampled mean with the exactly known `I`/`P` contributions.
fn assemble(alpha: f64, mean: f64, se: f64, d: f64, mode: SamplerMode) -> SreResult {
    let keep = (d - 2.0) / d;
    match mode {
        SamplerMode::Filtered => {
            let (m_filtered, se_filtered) = entropy_from_mean(mean, se, alpha);
            let (zeta, m, se_m) = if alpha == 1.0 {
                (1.0, keep * m_filtered, keep * se_filtered)
            } else {
                let zeta = keep * mean + 2.0 / d;
                let (m, se_m) = entropy_from_mean(zeta, keep * se, alpha);
                (zeta, m, se_m)
            };
            SreResult {
                alpha,
                zeta,
                m,
                m_filtered,
                method: Method::Sampled,
                stderr: Some(se_m),
                stderr_filtered: Some(se_filtered),
            }
        }
        SamplerMode::Direct => {
            let (m, se_m) = entropy_from_mean(mean, se, alpha);
            let (zeta, m_filtered, se_filtered) = if alpha == 1.0 {
                (1.0, m / keep, se_m / keep)
            } else {
                // may be non-positive for a poor estimate; the entropy is then NaN
                let filtered = (mean - 2.0 / d) / keep;
                let (mf, sf) = entropy_from_mean(filtered, se / keep, alpha);
                (mean, mf, sf)
            };
            SreResult {
                alpha,
                zeta,
                m,
                m_filtered,
                method: Method::Sampled,
                stderr: Some(se_m),
                stderr_filtered: Some(se_filtered),
            }
        }
    }
}

/// Dump one chain as CSV rows `step,string_hex,x,accepted`.
pub fn write_trace<W: Write>(psi: &PureState, cfg: &ChainConfig, chain: usize, mut out: W) -> Result<()> {
    cfg.validate()?;
    let target = Target::new(psi, cfg.mode)?;
    writeln!(out, "step,string_hex,x,accepted")?;
    drive_chain(&target, cfg, chain, cfg.samples_for_chain(chain), |step, rec, accepted| {
        writeln!(out, "{step},{},{},{}", rec.string.to_hex(), f64_17(rec.x), u8::from(accepted))?;
        Ok(())
    })?;
    Ok(())
}
