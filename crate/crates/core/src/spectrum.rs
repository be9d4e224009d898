//! Exact Majorana spectra and the quantities derived from them.
//!
//! For a state on `N` sites (`d = 2^N`) the spectrum is the multiset of
//! `x_v = ⟨ψ|μ(v)|ψ⟩` over all `d²` strings. Odd strings vanish identically
//! and are only counted. From the even values we get
//!
//! ```text
//! ζ_α = Σ_v x_v^{2α} / d
//! M_α = ln ζ_α / (1 − α)                                  (α > 1)
//! M₁  = −Σ_v (x_v²/d) ln x_v²
//! M̃_α = ln[ Σ_{v ∉ {I, P}} x_v^{2α} / (d − 2) ] / (1 − α)
//! ```
//!
//! and fits of the connected component (everything except the atoms at
//! `x = 0` and `|x| = 1`) to a zero-mean Gaussian or Laplace law.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{binomial, PureState};
use crate::majorana::{even_string_at, even_string_count, full_mask, realize, MajoranaString};
use crate::numfmt::f64_17;

/// Even-parity values with `|x|` below this count as exact zeros.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Values with `1 − |x|` below this count toward the unit peak.
pub const UNIT_TOLERANCE: f64 = 1e-10;
/// Default upper bound on `N` for exhaustive enumeration.
pub const EXACT_MAX_SITES: usize = 8;

/// All even-parity expectation values of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaSpectrum {
    n: usize,
    /// `values[k]` belongs to `even_string_at(n, k)`.
    values: Vec<f64>,
    n_even_zero: u64,
    unit_peak: u64,
}

impl MajoranaSpectrum {
    fn from_values(n: usize, values: Vec<f64>) -> Self {
        let n_even_zero = values.iter().filter(|x| x.abs() < ZERO_THRESHOLD).count() as u64;
        let unit_peak = values.iter().filter(|x| 1.0 - x.abs() < UNIT_TOLERANCE).count() as u64;
        MajoranaSpectrum { n, values, n_even_zero, unit_peak }
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> f64 {
        (1u64 << self.n) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(string, x)` pairs in ascending string order.
    pub fn entries(&self) -> impl Iterator<Item = (MajoranaString, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &x)| (even_string_at(self.n, k as u64), x))
    }

    /// Odd strings: `d²/2`, all exactly zero.
    pub fn n_odd_zero(&self) -> u64 {
        even_string_count(self.n)
    }

    /// Even strings whose value is an exact zero.
    pub fn n_even_zero(&self) -> u64 {
        self.n_even_zero
    }

    /// Strings with `|x| = 1` (always includes `I` and `P`).
    pub fn unit_peak(&self) -> u64 {
        self.unit_peak
    }

    /// `(1/d) Σ_v x_v²`; equals one for a pure state.
    pub fn purity(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>() / self.dim()
    }

    fn parity_index(&self) -> usize {
        (full_mask(self.n) >> 1) as usize
    }

    fn is_trivial_index(&self, k: usize) -> bool {
        k == 0 || k == self.parity_index()
    }

    /// Values of the connected component: nonzero, not on the unit peak.
    pub fn connected(&self) -> Vec<f64> {
        self.values
            .iter()
            .copied()
            .filter(|x| x.abs() >= ZERO_THRESHOLD && 1.0 - x.abs() >= UNIT_TOLERANCE)
            .collect()
    }
}

/// Enumerate every even-parity string; `N ≤ 8` unless `allow_large`.
pub fn exact_spectrum(psi: &PureState, allow_large: bool) -> Result<MajoranaSpectrum> {
    let n = psi.sites();
    if n > EXACT_MAX_SITES && !allow_large {
        return Err(Error::SizeGuard { n, limit: EXACT_MAX_SITES });
    }
    let support = psi.support();
    if support.windows(2).any(|w| (w[0] ^ w[1]).count_ones() % 2 == 1) {
        return Err(Error::InvalidParameter(
            "state mixes fermion parities; odd strings would not vanish".into(),
        ));
    }
    let amps = psi.amplitudes();
    let values = (0..even_string_count(n))
        .into_par_iter()
        .map(|k| realize(even_string_at(n, k).compile().raw_expectation(amps, &support)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MajoranaSpectrum::from_values(n, values))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::InvalidParameter(format!("Rényi index α = {alpha} must be ≥ 1")));
    }
    Ok(())
}

#[inline]
fn x_pow(x: f64, alpha: f64) -> f64 {
    let x2 = x * x;
    if alpha == 1.0 {
        x2
    } else if alpha == 2.0 {
        x2 * x2
    } else {
        x2.powf(alpha)
    }
}

#[inline]
fn x2_ln_x2(x: f64) -> f64 {
    let x2 = x * x;
    if x2 == 0.0 {
        0.0
    } else {
        x2 * x2.ln()
    }
}

/// `ζ_α = Σ_v x_v^{2α} / d`.
pub fn moments_zeta(spec: &MajoranaSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(spec.values.iter().map(|&x| x_pow(x, alpha)).sum::<f64>() / spec.dim())
}

/// `Σ_{v ∉ {I,P}} x_v^{2α} / (d − 2)`.
pub fn filtered_moment(spec: &MajoranaSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_filterable(spec.n)?;
    let sum: f64 = spec
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| !spec.is_trivial_index(*k))
        .map(|(_, &x)| x_pow(x, alpha))
        .sum();
    Ok(sum / (spec.dim() - 2.0))
}

fn check_filterable(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter("filtered SRE needs N ≥ 2 (d − 2 > 0)".into()));
    }
    Ok(())
}

/// Map `−0.0` to `0.0` so stabilizer states print as a plain zero.
#[inline]
pub(crate) fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

/// Stabilizer Rényi entropy `M_α`, natural log.
pub fn sre(spec: &MajoranaSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(unsigned_zero(-spec.values.iter().map(|&x| x2_ln_x2(x)).sum::<f64>() / spec.dim()));
    }
    Ok(unsigned_zero(moments_zeta(spec, alpha)?.ln() / (1.0 - alpha)))
}

/// Filtered stabilizer Rényi entropy `M̃_α`.
pub fn filtered_sre(spec: &MajoranaSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_filterable(spec.n)?;
    if alpha == 1.0 {
        let sum: f64 = spec
            .values
            .iter()
            .enumerate()
            .filter(|(k, _)| !spec.is_trivial_index(*k))
            .map(|(_, &x)| x2_ln_x2(x))
            .sum();
        return Ok(unsigned_zero(-sum / (spec.dim() - 2.0)));
    }
    Ok(unsigned_zero(filtered_moment(spec, alpha)?.ln() / (1.0 - alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

/// SRE and filtered SRE at one Rényi index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SreResult {
    pub alpha: f64,
    /// `ζ_α` (for `α = 1`, the value `Σ x² ln x² / d` is not a moment; `ζ₁ = 1`).
    pub zeta: f64,
    pub m: f64,
    pub m_filtered: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub stderr_filtered: Option<f64>,
}

pub fn sre_result(spec: &MajoranaSpectrum, alpha: f64) -> Result<SreResult> {
    Ok(SreResult {
        alpha,
        zeta: moments_zeta(spec, alpha)?,
        m: sre(spec, alpha)?,
        m_filtered: filtered_sre(spec, alpha)?,
        method: Method::Exact,
        stderr: None,
        stderr_filtered: None,
    })
}

/// Histogram of the connected component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Probability density over the connected component (integrates to one).
    pub density: Vec<f64>,
    pub connected_count: u64,
    /// Share of all `d²` strings in the connected component; `density · mass`
    /// is the connected part of `Π(x)`.
    pub mass: f64,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.edges.windows(2).zip(&self.density).map(|(w, p)| (w[1] - w[0]) * p).sum()
    }
}

pub const MIN_BINS: usize = 10;
const MAX_AUTO_BINS: usize = 2000;

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Freedman–Diaconis bin count, at least [`MIN_BINS`].
pub fn freedman_diaconis_bins(values: &[f64]) -> usize {
    if values.len() < 2 {
        return MIN_BINS;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    if iqr <= 0.0 || range <= 0.0 {
        return MIN_BINS;
    }
    let width = 2.0 * iqr / (values.len() as f64).cbrt();
    ((range / width).ceil() as usize).clamp(MIN_BINS, MAX_AUTO_BINS)
}

/// Bin a set of connected values; `total_strings` sets the mass bookkeeping.
pub fn histogram_values(values: &[f64], bins: Option<usize>, total_strings: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InsufficientData("connected component is empty".into()));
    }
    let bins = bins.unwrap_or_else(|| freedman_diaconis_bins(values));
    if bins < MIN_BINS {
        return Err(Error::InvalidParameter(format!("bin count {bins} < {MIN_BINS}")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + f64::EPSILON.max(lo.abs() * 1e-9);
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| lo + width * b as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in values {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = values.len() as f64;
    Ok(Histogram {
        edges,
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        connected_count: values.len() as u64,
        mass: total / total_strings,
    })
}

/// Connected-component histogram of `Π(x)`.
pub fn histogram(spec: &MajoranaSpectrum, bins: Option<usize>) -> Result<Histogram> {
    histogram_values(&spec.connected(), bins, spec.dim() * spec.dim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitFamily {
    Gaussian,
    Laplace,
}

impl FitFamily {
    pub fn name(self) -> &'static str {
        match self {
            FitFamily::Gaussian => "gaussian",
            FitFamily::Laplace => "laplace",
        }
    }
}

/// Maximum-likelihood fit of the connected component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FitFamily,
    /// Gaussian: variance `b`; Laplace: scale `b`.
    pub b_fitted: f64,
    /// Scale fixed by `∫ x² Π(x) dx = 1/d` with the model's zero count.
    pub b_constrained: f64,
    /// Mean log-likelihood per connected value.
    pub log_likelihood: f64,
    /// Zero count assumed by the model (`d²/2` or `d² − C(2N, N)`).
    pub d0_model: f64,
    pub sample_count: u64,
}

pub const MIN_FIT_POINTS: usize = 100;

/// Zero count the model assumes.
pub fn model_zero_count(family: FitFamily, n: usize) -> f64 {
    let d = (1u64 << n) as f64;
    match family {
        FitFamily::Gaussian => d * d / 2.0,
        FitFamily::Laplace => d * d - binomial(2 * n as u64, n as u64) as f64,
    }
}

/// Purity-constrained scale: `2/(d+2)` (Gaussian variance) or
/// `sqrt((d−2) / (2(d² − D₀ − 2)))` (Laplace scale).
pub fn constrained_scale(family: FitFamily, n: usize) -> f64 {
    let d = (1u64 << n) as f64;
    match family {
        FitFamily::Gaussian => 2.0 / (d + 2.0),
        FitFamily::Laplace => ((d - 2.0) / (2.0 * (d * d - model_zero_count(family, n) - 2.0))).sqrt(),
    }
}

/// Fit raw values. `n` only feeds the constrained scale and zero count.
pub fn fit_values(values: &[f64], family: FitFamily, n: usize) -> Result<FitResult> {
    if values.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} connected values, need at least {MIN_FIT_POINTS}",
            values.len()
        )));
    }
    let count = values.len() as f64;
    let (b, ll) = match family {
        FitFamily::Gaussian => {
            let b = values.iter().map(|x| x * x).sum::<f64>() / count;
            (b, -0.5 * (2.0 * std::f64::consts::PI * b).ln() - 0.5)
        }
        FitFamily::Laplace => {
            let b = values.iter().map(|x| x.abs()).sum::<f64>() / count;
            (b, -(2.0 * b).ln() - 1.0)
        }
    };
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Numerical("fitted scale is not positive".into()));
    }
    Ok(FitResult {
        family,
        b_fitted: b,
        b_constrained: constrained_scale(family, n),
        log_likelihood: ll,
        d0_model: model_zero_count(family, n),
        sample_count: values.len() as u64,
    })
}

pub fn fit_connected(spec: &MajoranaSpectrum, family: FitFamily) -> Result<FitResult> {
    fit_values(&spec.connected(), family, spec.n)
}

/// Both fits side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitComparison {
    pub gaussian: FitResult,
    pub laplace: FitResult,
}

impl FitComparison {
    pub fn preferred(&self) -> FitFamily {
        if self.laplace.log_likelihood > self.gaussian.log_likelihood {
            FitFamily::Laplace
        } else {
            FitFamily::Gaussian
        }
    }
}

pub fn compare_fits(spec: &MajoranaSpectrum) -> Result<FitComparison> {
    let connected = spec.connected();
    Ok(FitComparison {
        gaussian: fit_values(&connected, FitFamily::Gaussian, spec.n)?,
        laplace: fit_values(&connected, FitFamily::Laplace, spec.n)?,
    })
}

/// Sample skewness.
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Write `string_hex,x` rows for every even string.
pub fn write_spectrum_csv<W: Write>(spec: &MajoranaSpectrum, mut out: W) -> Result<()> {
    writeln!(out, "string_hex,x")?;
    for (m, x) in spec.entries() {
        writeln!(out, "{},{}", m.to_hex(), f64_17(x))?;
    }
    Ok(())
}

/// Summary record exported next to a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub sre: Vec<SreResult>,
    pub fits: Option<FitComparison>,
    pub n_odd_zero: u64,
    pub n_even_zero: u64,
    pub unit_peak: u64,
    pub purity: f64,
}

impl SpectrumSummary {
    pub fn new(spec: &MajoranaSpectrum, model: Option<String>, seed: Option<u64>, alphas: &[f64]) -> Result<Self> {
        let sre = alphas.iter().map(|&a| sre_result(spec, a)).collect::<Result<Vec<_>>>()?;
        let fits = compare_fits(spec).ok();
        Ok(SpectrumSummary {
            n: spec.n,
            model,
            seed,
            sre,
            fits,
            n_odd_zero: spec.n_odd_zero(),
            n_even_zero: spec.n_even_zero(),
            unit_peak: spec.unit_peak(),
            purity: spec.purity(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockIndex;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};

    fn pi8_state() -> PureState {
        let theta = std::f64::consts::PI / 8.0;
        let mut amps = vec![Complex64::default(); 4];
        amps[0b01] = theta.cos().into();
        amps[0b10] = theta.sin().into();
        PureState::new(2, amps).unwrap()
    }

    #[test]
    fn product_state_structure() {
        let psi = PureState::basis(4, FockIndex(0b0101)).unwrap();
        let spec = exact_spectrum(&psi, false).unwrap();
        assert_eq!(spec.values().len(), 128);
        assert_eq!(spec.unit_peak(), 16);
        assert_eq!(spec.n_even_zero(), 128 - 16);
        assert!((spec.purity() - 1.0).abs() < 1e-14);
        assert!(spec.connected().is_empty());
        assert!(histogram(&spec, None).is_err());
        for alpha in [1.0, 2.0, 3.0] {
            assert!(sre(&spec, alpha).unwrap().abs() < 1e-12);
            assert!(filtered_sre(&spec, alpha).unwrap().abs() < 1e-12);
        }
        assert!((moments_zeta(&spec, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_site_closed_form() {
        let spec = exact_spectrum(&pi8_state(), false).unwrap();
        let mut sq: Vec<f64> = spec.values().iter().map(|x| x * x).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        let want = [1.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0];
        for (a, b) in sq.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((moments_zeta(&spec, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((moments_zeta(&spec, 2.0).unwrap() - 0.75).abs() < 1e-14);
        assert!((sre(&spec, 2.0).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((filtered_sre(&spec, 2.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        // M₁ = −4·(1/2)·ln(1/2)/4
        assert!((sre(&spec, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert!(sre(&spec, 0.5).is_err());
    }

    #[test]
    fn renyi_monotonic_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 4, 6] {
            // random state in the even-parity subspace
            let amps = (0..1u32 << n)
                .map(|s| {
                    if s.count_ones() % 2 == 0 {
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            let psi = PureState::normalized(n, amps).unwrap();
            let spec = exact_spectrum(&psi, false).unwrap();
            let ms: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|&a| sre(&spec, a).unwrap()).collect();
            assert!(ms.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{ms:?}");
            assert!(ms.iter().all(|&m| m >= -1e-10 && m < n as f64 * 2f64.ln()));
        }
    }

    #[test]
    fn size_guard_and_parity_check() {
        let psi = PureState::basis(9, FockIndex(0)).unwrap();
        assert!(matches!(exact_spectrum(&psi, false), Err(Error::SizeGuard { .. })));
        let mixed = PureState::normalized(2, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(exact_spectrum(&mixed, false), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn constrained_scales() {
        assert!((constrained_scale(FitFamily::Gaussian, 12) - 2.0 / 4098.0).abs() < 1e-18);
        assert!((constrained_scale(FitFamily::Gaussian, 12) - 4.8804e-4).abs() < 1e-8);
        assert_eq!(model_zero_count(FitFamily::Laplace, 4), 186.0);
        let b = constrained_scale(FitFamily::Laplace, 4);
        assert!((b * b - 14.0 / 136.0).abs() < 1e-15);
    }

    #[test]
    fn laplace_self_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = 0.1;
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                let e: f64 = Exp1.sample(&mut rng);
                if rng.random::<bool>() { b * e } else { -b * e }
            })
            .collect();
        let lap = fit_values(&xs, FitFamily::Laplace, 8).unwrap();
        let gau = fit_values(&xs, FitFamily::Gaussian, 8).unwrap();
        assert!((lap.b_fitted / b - 1.0).abs() < 0.03);
        assert!(lap.log_likelihood > gau.log_likelihood);
        assert!(fit_values(&xs[..50], FitFamily::Laplace, 8).is_err());
    }

    #[test]
    fn histogram_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() - 0.5).collect();
        let h = histogram_values(&xs, None, 20_000.0).unwrap();
        assert!(h.density.len() >= MIN_BINS);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!((h.mass - 0.25).abs() < 1e-15);
        assert!(histogram_values(&xs, Some(5), 1.0).is_err());
        let h = histogram_values(&xs, Some(40), 1.0).unwrap();
        assert_eq!(h.edges.len(), 41);
    }

    #[test]
    fn csv_has_every_even_string() {
        let spec = exact_spectrum(&pi8_state(), false).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "string_hex,x");
        assert_eq!(lines.len(), 9);
        assert!(lines[1].starts_with("0,1.0000000000000000e0"));
    }
}
