//! Disordered SYK (quartic) and SYK₂ (quadratic) Hamiltonians.
//!
//! ```text
//! H_SYK  = Σ_{ijkl} J_{ijkl} c†_i c†_j c_k c_l − μ Σ_i n_i,   E|J_{ijkl}|² = J²/(2N)³
//! H_SYK2 = Σ_{ij}   J_{ij}   c†_i c_j         − μ Σ_i n_i,   E|J_{ij}|²   = J²/N
//! ```
//!
//! Quartic couplings are drawn independently on ordered pairs-of-pairs
//! `P = (i<j)`, `Q = (k<l)`: the matrix `M_{PQ} = J_{ijkl}` must be Hermitian,
//! so `M_{PQ}` for `P < Q` is a complex Gaussian, `M_{PP}` is real, and
//! antisymmetry fills in the remaining index orders. The stated variance
//! applies to the entries of the final tensor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{annihilate, create, FockIndex, SectorBasis};
use crate::rng::{stream, Prng, PRNG_ID};
use crate::MAX_SITES;

/// Which model a coupling set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Quartic complex SYK.
    #[serde(alias = "syk")]
    Syk4,
    /// Quadratic random free fermions.
    Syk2,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Syk4 => "syk4",
            ModelKind::Syk2 => "syk2",
        }
    }

    pub fn order(self) -> u8 {
        match self {
            ModelKind::Syk4 => 4,
            ModelKind::Syk2 => 2,
        }
    }

    fn tag(self) -> u64 {
        u64::from(self.order())
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "syk4" | "syk" => Ok(ModelKind::Syk4),
            "syk2" => Ok(ModelKind::Syk2),
            other => Err(Error::Parse(format!("unknown model {other:?}"))),
        }
    }
}

/// Dense coupling storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Couplings {
    /// Hermitian `N × N` matrix `J_{ij}`.
    Quadratic(DMatrix<Complex64>),
    /// Row-major `N⁴` tensor `J_{ijkl}`.
    Quartic(Vec<Complex64>),
}

/// One disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub kind: ModelKind,
    pub n: usize,
    pub j: f64,
    pub mu: f64,
    pub seed: u64,
    pub prng_id: String,
    pub couplings: Couplings,
}

fn complex_gaussian(rng: &mut Prng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

fn real_gaussian(rng: &mut Prng, variance: f64) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    Complex64::new(variance.sqrt() * x, 0.0)
}

fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_SITES || !n.is_multiple_of(2) {
        return Err(invalid(format!("N = {n} must be even and lie in {min}..={MAX_SITES}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn quartic_index(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// Ordered pairs `(i, j)` with `i < j`, lexicographic.
fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Draw a SYK₂ realization from the stream keyed by `seed`.
pub fn sample_syk2(n: usize, j: f64, seed: u64) -> Result<ModelInstance> {
    check_size(n, 2)?;
    let variance = j * j / n as f64;
    let mut rng = stream(seed);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = real_gaussian(&mut rng, variance);
        for b in a + 1..n {
            let z = complex_gaussian(&mut rng, variance);
            m[(a, b)] = z;
            m[(b, a)] = z.conj();
        }
    }
    Ok(ModelInstance {
        kind: ModelKind::Syk2,
        n,
        j,
        mu: 0.0,
        seed,
        prng_id: PRNG_ID.to_string(),
        couplings: Couplings::Quadratic(m),
    })
}

/// Draw a quartic SYK realization from the stream keyed by `seed`.
pub fn sample_syk4(n: usize, j: f64, seed: u64) -> Result<ModelInstance> {
    check_size(n, 4)?;
    let variance = j * j / ((2 * n) as f64).powi(3);
    let mut rng = stream(seed);
    let pairs = ordered_pairs(n);
    let mut t = vec![Complex64::default(); n.pow(4)];
    let mut put = |(i, j): (usize, usize), (k, l): (usize, usize), z: Complex64| {
        t[quartic_index(n, i, j, k, l)] = z;
        t[quartic_index(n, j, i, k, l)] = -z;
        t[quartic_index(n, i, j, l, k)] = -z;
        t[quartic_index(n, j, i, l, k)] = z;
    };
    for (p, &pp) in pairs.iter().enumerate() {
        put(pp, pp, real_gaussian(&mut rng, variance));
        for &qq in &pairs[p + 1..] {
            let z = complex_gaussian(&mut rng, variance);
            put(pp, qq, z);
            put(qq, pp, z.conj());
        }
    }
    Ok(ModelInstance {
        kind: ModelKind::Syk4,
        n,
        j,
        mu: 0.0,
        seed,
        prng_id: PRNG_ID.to_string(),
        couplings: Couplings::Quartic(t),
    })
}

/// Draw a realization of either model.
pub fn sample(kind: ModelKind, n: usize, j: f64, seed: u64) -> Result<ModelInstance> {
    match kind {
        ModelKind::Syk4 => sample_syk4(n, j, seed),
        ModelKind::Syk2 => sample_syk2(n, j, seed),
    }
}

/// Seed tag tuple used for ensemble members: `(model order, N, realization)`.
pub fn realization_tags(kind: ModelKind, n: usize, realization: usize) -> [u64; 3] {
    [kind.tag(), n as u64, realization as u64]
}

impl ModelInstance {
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// `J_{ij}` (quadratic) or `J_{ijkl}` (quartic) lookup.
    pub fn quadratic(&self, i: usize, j: usize) -> Option<Complex64> {
        match &self.couplings {
            Couplings::Quadratic(m) => Some(m[(i, j)]),
            Couplings::Quartic(_) => None,
        }
    }

    pub fn quartic(&self, i: usize, j: usize, k: usize, l: usize) -> Option<Complex64> {
        match &self.couplings {
            Couplings::Quartic(t) => Some(t[quartic_index(self.n, i, j, k, l)]),
            Couplings::Quadratic(_) => None,
        }
    }

    /// Mean `|J|²` over the structurally nonzero entries of the stored couplings.
    pub fn coupling_second_moment(&self) -> f64 {
        let n = self.n;
        match &self.couplings {
            Couplings::Quadratic(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * n) as f64,
            Couplings::Quartic(t) => {
                let count = (n * (n - 1)).pow(2);
                t.iter().map(|z| z.norm_sqr()).sum::<f64>() / count as f64
            }
        }
    }

    /// Check the exact structural symmetries of the stored couplings.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        match &self.couplings {
            Couplings::Quadratic(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
                }
                for a in 0..n {
                    for b in 0..n {
                        if m[(a, b)] != m[(b, a)].conj() {
                            return Err(Error::Numerical(format!("J[{a},{b}] is not Hermitian")));
                        }
                    }
                }
            }
            Couplings::Quartic(t) => {
                if t.len() != n.pow(4) {
                    return Err(Error::DimensionMismatch { expected: n.pow(4), found: t.len() });
                }
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let z = t[quartic_index(n, i, j, k, l)];
                                let ok = z == -t[quartic_index(n, j, i, k, l)]
                                    && z == -t[quartic_index(n, i, j, l, k)]
                                    && z == t[quartic_index(n, l, k, j, i)].conj();
                                if !ok {
                                    return Err(Error::Numerical(format!(
                                        "J[{i},{j},{k},{l}] violates antisymmetry or Hermiticity"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Nonzero images `(mask, amplitude)` of `H|s⟩` for one basis state.
fn hamiltonian_column(model: &ModelInstance, s: FockIndex, out: &mut Vec<(FockIndex, Complex64)>) {
    let n = model.n;
    out.clear();
    let occupied = s.particle_count() as f64;
    if model.mu != 0.0 {
        out.push((s, Complex64::new(-model.mu * occupied, 0.0)));
    }
    match &model.couplings {
        Couplings::Quadratic(m) => {
            for b in 0..n {
                let Some((s1, g1)) = annihilate(b, s) else { continue };
                for a in 0..n {
                    let Some((s2, g2)) = create(a, s1) else { continue };
                    let z = m[(a, b)];
                    if z != Complex64::default() {
                        out.push((s2, z * (g1 * g2)));
                    }
                }
            }
        }
        Couplings::Quartic(t) => {
            // Σ_{ijkl} = 4 Σ_{i<j, k<l} by antisymmetry of both J and c†c†cc
            for l in 0..n {
                let Some((s1, g1)) = annihilate(l, s) else { continue };
                for k in 0..l {
                    let Some((s2, g2)) = annihilate(k, s1) else { continue };
                    for j in 0..n {
                        let Some((s3, g3)) = create(j, s2) else { continue };
                        for i in 0..j {
                            let Some((s4, g4)) = create(i, s3) else { continue };
                            let z = t[quartic_index(n, i, j, k, l)];
                            if z != Complex64::default() {
                                out.push((s4, z * (4.0 * g1 * g2 * g3 * g4)));
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Hamiltonian restricted to a particle-number sector, indexed by sector rank.
pub fn build_sector_matrix(model: &ModelInstance, basis: &SectorBasis) -> Result<DMatrix<Complex64>> {
    if model.n != basis.sites() {
        return Err(Error::DimensionMismatch { expected: model.n, found: basis.sites() });
    }
    let dim = basis.len();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let mut images = Vec::new();
    for (col, &s) in basis.states().iter().enumerate() {
        hamiltonian_column(model, s, &mut images);
        for &(t, z) in &images {
            let row = basis
                .rank(t)
                .ok_or_else(|| Error::Numerical("Hamiltonian left the particle-number sector".into()))?;
            h[(row, col)] += z;
        }
    }
    Ok(h)
}

/// Hamiltonian over the full `2^N` Fock space, summing every index tuple
/// literally (no pair-representative shortcut). Intended for cross-checks.
pub fn build_full_matrix(model: &ModelInstance) -> Result<DMatrix<Complex64>> {
    let n = model.n;
    if n > 8 {
        return Err(Error::SizeGuard { n, limit: 8 });
    }
    let d = 1usize << n;
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for col in 0..d {
        let s = FockIndex(col as u32);
        h[(col, col)] -= model.mu * s.particle_count() as f64;
        match &model.couplings {
            Couplings::Quadratic(m) => {
                for a in 0..n {
                    for b in 0..n {
                        let Some((s1, g1)) = annihilate(b, s) else { continue };
                        let Some((s2, g2)) = create(a, s1) else { continue };
                        h[(s2.bits() as usize, col)] += m[(a, b)] * (g1 * g2);
                    }
                }
            }
            Couplings::Quartic(t) => {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let chain = annihilate(l, s)
                                    .and_then(|(s1, g1)| annihilate(k, s1).map(|(s2, g2)| (s2, g1 * g2)))
                                    .and_then(|(s2, g)| create(j, s2).map(|(s3, g3)| (s3, g * g3)))
                                    .and_then(|(s3, g)| create(i, s3).map(|(s4, g4)| (s4, g * g4)));
                                if let Some((s4, g)) = chain {
                                    h[(s4.bits() as usize, col)] += t[quartic_index(n, i, j, k, l)] * g;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Draw several realizations with seeds derived from a master seed.
pub fn sample_ensemble(
    kind: ModelKind,
    n: usize,
    j: f64,
    master_seed: u64,
    count: usize,
) -> Result<Vec<ModelInstance>> {
    (0..count)
        .map(|r| sample(kind, n, j, crate::rng::derive_seed(master_seed, &realization_tags(kind, n, r))))
        .collect()
}

// ---------------------------------------------------------------------------
// Binary coupling sidecar
//
//   offset  size  field
//   0       4     magic "SYKJ"
//   4       2     format version (u16 LE) = 1
//   6       1     model order: 2 or 4
//   7       1     N
//   8       8     seed (u64 LE)
//   16      8     J (f64 LE)
//   24      8     mu (f64 LE)
//   32      2     prng_id byte length L (u16 LE)
//   34      L     prng_id, UTF-8
//   34+L    8     entry count (u64 LE): N² or N⁴
//   42+L    16·c  entries as (re, im) f64 LE pairs, row-major over (i, j[, k, l])
// ---------------------------------------------------------------------------

pub const SIDECAR_MAGIC: &[u8; 4] = b"SYKJ";
pub const SIDECAR_VERSION: u16 = 1;

/// Serialize the couplings with their header.
pub fn encode_sidecar(model: &ModelInstance) -> Vec<u8> {
    let entries: Vec<Complex64> = match &model.couplings {
        Couplings::Quadratic(m) => {
            let n = model.n;
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
        }
        Couplings::Quartic(t) => t.clone(),
    };
    let id = model.prng_id.as_bytes();
    let mut out = Vec::with_capacity(42 + id.len() + 16 * entries.len());
    out.extend_from_slice(SIDECAR_MAGIC);
    out.extend_from_slice(&SIDECAR_VERSION.to_le_bytes());
    out.push(model.kind.order());
    out.push(model.n as u8);
    out.extend_from_slice(&model.seed.to_le_bytes());
    out.extend_from_slice(&model.j.to_le_bytes());
    out.extend_from_slice(&model.mu.to_le_bytes());
    out.extend_from_slice(&(id.len() as u16).to_le_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for z in entries {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Parse(format!("sidecar truncated at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

/// Parse a sidecar, validating header, length, and coupling symmetries.
pub fn decode_sidecar(bytes: &[u8]) -> Result<ModelInstance> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if &r.array::<4>()? != SIDECAR_MAGIC {
        return Err(Error::Parse("bad sidecar magic".into()));
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != SIDECAR_VERSION {
        return Err(Error::Parse(format!("unsupported sidecar version {version}")));
    }
    let [order, n] = r.array::<2>()?;
    let kind = match order {
        2 => ModelKind::Syk2,
        4 => ModelKind::Syk4,
        other => return Err(Error::Parse(format!("unknown model order {other}"))),
    };
    let n = n as usize;
    check_size(n, if kind == ModelKind::Syk4 { 4 } else { 2 }).map_err(|e| Error::Parse(e.to_string()))?;
    let seed = u64::from_le_bytes(r.array()?);
    let j = r.f64()?;
    let mu = r.f64()?;
    let id_len = u16::from_le_bytes(r.array()?) as usize;
    let prng_id = std::str::from_utf8(r.take(id_len)?)
        .map_err(|e| Error::Parse(format!("prng id: {e}")))?
        .to_string();
    let count = u64::from_le_bytes(r.array()?);
    let expected = match kind {
        ModelKind::Syk2 => n * n,
        ModelKind::Syk4 => n.pow(4),
    };
    if count != expected as u64 {
        return Err(Error::Parse(format!("entry count {count}, expected {expected}")));
    }
    let mut entries = Vec::with_capacity(expected);
    for _ in 0..expected {
        let re = r.f64()?;
        let im = r.f64()?;
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Parse("non-finite coupling".into()));
        }
        entries.push(Complex64::new(re, im));
    }
    if r.pos != bytes.len() {
        return Err(Error::Parse(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    if !j.is_finite() || !mu.is_finite() {
        return Err(Error::Parse("non-finite J or mu".into()));
    }
    let couplings = match kind {
        ModelKind::Syk2 => Couplings::Quadratic(DMatrix::from_row_slice(n, n, &entries)),
        ModelKind::Syk4 => Couplings::Quartic(entries),
    };
    let model = ModelInstance { kind, n, j, mu, seed, prng_id, couplings };
    model.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_sector;

    fn hermiticity_error(h: &DMatrix<Complex64>) -> f64 {
        (h - h.adjoint()).camax()
    }

    #[test]
    fn syk2_is_hermitian_and_deterministic() {
        let a = sample_syk2(4, 1.0, 9).unwrap();
        a.validate().unwrap();
        assert_eq!(a, sample_syk2(4, 1.0, 9).unwrap());
        assert_ne!(a, sample_syk2(4, 1.0, 10).unwrap());
        assert!(sample_syk2(3, 1.0, 0).is_err());
        assert!(sample_syk2(0, 1.0, 0).is_err());
    }

    #[test]
    fn syk4_symmetries() {
        let m = sample_syk4(6, 1.0, 4).unwrap();
        m.validate().unwrap();
        let n = 6;
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    assert_eq!(m.quartic(i, i, k, l).unwrap(), Complex64::default());
                }
            }
        }
        // self-conjugate representatives are real
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(m.quartic(i, j, i, j).unwrap().im, 0.0);
            }
        }
        assert_eq!(m, sample_syk4(6, 1.0, 4).unwrap());
        assert!(sample_syk4(2, 1.0, 0).is_err());
    }

    #[test]
    fn syk2_variance() {
        let n = 4;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut seed = 0u64;
        while count < 100_000 {
            let m = sample_syk2(n, 1.0, seed).unwrap();
            seed += 1;
            for a in 0..n {
                for b in a + 1..n {
                    sum += m.quadratic(a, b).unwrap().norm_sqr();
                    count += 1;
                }
            }
        }
        let mean = sum / count as f64;
        assert!((mean * n as f64 - 1.0).abs() < 0.02, "mean |J_ij|² = {mean}");
    }

    #[test]
    fn syk4_variance() {
        let n = 4;
        let target = 1.0 / ((2 * n) as f64).powi(3);
        let mean = (0..100_000u64)
            .map(|seed| sample_syk4(n, 1.0, seed).unwrap().quartic(0, 1, 2, 3).unwrap().norm_sqr())
            .sum::<f64>()
            / 100_000.0;
        assert!((mean / target - 1.0).abs() < 0.02, "mean |J_0123|² = {mean}, want {target}");
    }

    #[test]
    fn syk2_two_site_block() {
        let m = sample_syk2(2, 1.0, 1).unwrap();
        let basis = enumerate_sector(2, 1).unwrap();
        let h = build_sector_matrix(&m, &basis).unwrap();
        // sector order |n₀=1⟩, |n₁=1⟩
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(h[(a, b)], m.quadratic(a, b).unwrap());
            }
        }
    }

    #[test]
    fn syk4_needs_two_particles() {
        let m = sample_syk4(4, 1.0, 2).unwrap();
        for np in [0, 1] {
            let basis = enumerate_sector(4, np).unwrap();
            let h = build_sector_matrix(&m, &basis).unwrap();
            assert_eq!(h.camax(), 0.0);
        }
    }

    #[test]
    fn sector_matrix_matches_full_space() {
        for kind in [ModelKind::Syk2, ModelKind::Syk4] {
            let m = sample(kind, 6, 1.0, 77).unwrap().with_mu(0.3);
            let full = build_full_matrix(&m).unwrap();
            assert!(hermiticity_error(&full) < 1e-12);
            for np in 0..=6 {
                let basis = enumerate_sector(6, np).unwrap();
                let h = build_sector_matrix(&m, &basis).unwrap();
                assert!(hermiticity_error(&h) < 1e-12);
                for (r, &s) in basis.states().iter().enumerate() {
                    for (c, &t) in basis.states().iter().enumerate() {
                        let want = full[(s.bits() as usize, t.bits() as usize)];
                        assert!((h[(r, c)] - want).norm() < 1e-13);
                    }
                }
            }
            // no matrix element connects different particle numbers
            for a in 0..64usize {
                for b in 0..64usize {
                    if a.count_ones() != b.count_ones() {
                        assert_eq!(full[(a, b)], Complex64::default());
                    }
                }
            }
        }
    }

    #[test]
    fn ensemble_spectrum_is_symmetric_on_average() {
        // ⟨Tr H⟩ over the disorder vanishes at μ = 0
        for kind in [ModelKind::Syk2, ModelKind::Syk4] {
            let basis = enumerate_sector(6, 3).unwrap();
            let traces: Vec<f64> = sample_ensemble(kind, 6, 1.0, 5, 200)
                .unwrap()
                .iter()
                .map(|m| build_sector_matrix(m, &basis).unwrap().trace().re / basis.len() as f64)
                .collect();
            let mean = traces.iter().sum::<f64>() / traces.len() as f64;
            let var = traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (traces.len() - 1) as f64;
            let se = (var / traces.len() as f64).sqrt();
            assert!(mean.abs() < 4.0 * se, "{kind}: mean level {mean} ± {se}");
        }
    }

    #[test]
    fn sidecar_round_trip_and_rejections() {
        for m in [sample_syk2(4, 1.0, 3).unwrap(), sample_syk4(4, 1.0, 3).unwrap().with_mu(0.5)] {
            let bytes = encode_sidecar(&m);
            assert_eq!(&bytes[..4], SIDECAR_MAGIC);
            assert_eq!(decode_sidecar(&bytes).unwrap(), m);
            assert!(decode_sidecar(&bytes[..bytes.len() - 1]).is_err());
            let mut extra = bytes.clone();
            extra.push(0);
            assert!(decode_sidecar(&extra).is_err());
            let mut broken = bytes.clone();
            let last = broken.len() - 1;
            broken[last] ^= 0x01;
            assert!(decode_sidecar(&broken).is_err(), "symmetry violation must be rejected");
        }
        assert!(decode_sidecar(b"nope").is_err());
    }
}
