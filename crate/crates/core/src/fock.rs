//! Occupation-number basis of `N` complex fermion sites.
//!
//! A basis state is an `N`-bit mask with bit `i` holding the occupation of
//! site `i` (0-based). Fermion operators carry a Jordan-Wigner string over
//! the lower-indexed sites, so `c_i = Z_0 ⋯ Z_{i-1} σ⁻_i` and the parity
//! operator is `Z_0 ⋯ Z_{N-1}`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::MAX_SITES;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Occupation bitmask of a Fock basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FockIndex(pub u32);

impl FockIndex {
    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn particle_count(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_occupied(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    /// Number of occupied sites strictly below `site`.
    #[inline]
    pub fn occupied_below(self, site: usize) -> u32 {
        (self.0 & ((1u32 << site) - 1)).count_ones()
    }
}

/// The two Majorana modes living on one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// `η = c + c†`
    Eta,
    /// `χ = i(c − c†)`
    Chi,
}

/// Apply a single Majorana mode to a basis state.
///
/// Returns the flipped mask together with the phase: the Jordan-Wigner
/// sign `(−1)^{Σ_{j<site} n_j}`, times `+i` (occupied) or `−i` (empty) for `χ`.
#[inline]
pub fn apply_mode(kind: ModeKind, site: usize, s: FockIndex) -> (FockIndex, Complex64) {
    debug_assert!(site < 32);
    let sign = if s.occupied_below(site).is_multiple_of(2) { ONE } else { -ONE };
    let local = match kind {
        ModeKind::Eta => ONE,
        ModeKind::Chi if s.is_occupied(site) => I,
        ModeKind::Chi => -I,
    };
    (FockIndex(s.0 ^ (1 << site)), sign * local)
}

/// `c_site |s⟩`: `None` if the site is empty, otherwise the new mask and
/// the Jordan-Wigner sign.
#[inline]
pub fn annihilate(site: usize, s: FockIndex) -> Option<(FockIndex, f64)> {
    if !s.is_occupied(site) {
        return None;
    }
    let sign = if s.occupied_below(site).is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((FockIndex(s.0 ^ (1 << site)), sign))
}

/// `c†_site |s⟩`: `None` if the site is already occupied.
#[inline]
pub fn create(site: usize, s: FockIndex) -> Option<(FockIndex, f64)> {
    if s.is_occupied(site) {
        return None;
    }
    let sign = if s.occupied_below(site).is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((FockIndex(s.0 ^ (1 << site)), sign))
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(invalid(format!("site count N = {n} must lie in 1..={MAX_SITES}")));
    }
    Ok(())
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Basis states of fixed particle number, in ascending mask order.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n: usize,
    particles: usize,
    states: Vec<FockIndex>,
    rank: HashMap<FockIndex, usize>,
}

impl SectorBasis {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockIndex] {
        &self.states
    }

    pub fn rank(&self, s: FockIndex) -> Option<usize> {
        self.rank.get(&s).copied()
    }
}

/// All `binomial(N, N_p)` masks with `N_p` set bits, ascending.
pub fn enumerate_sector(n: usize, particles: usize) -> Result<SectorBasis> {
    check_sites(n)?;
    if particles > n {
        return Err(invalid(format!("particle number {particles} exceeds site count {n}")));
    }
    let states: Vec<FockIndex> = (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == particles)
        .map(FockIndex)
        .collect();
    let rank = states.iter().enumerate().map(|(r, &s)| (s, r)).collect();
    Ok(SectorBasis { n, particles, states, rank })
}

/// Normalized pure state stored over the full `2^N` Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
    sector_hint: Option<usize>,
}

pub const NORM_TOLERANCE: f64 = 1e-12;

impl PureState {
    /// Wrap a full-space amplitude vector, checking length and normalization.
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(n)?;
        let d = 1usize << n;
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amplitudes.len() });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Numerical(format!("state norm² = {norm2}, expected 1")));
        }
        let sector_hint = detect_sector(&amplitudes);
        Ok(PureState { n, amplitudes, sector_hint })
    }

    /// Like [`PureState::new`] but rescales to unit norm first.
    pub fn normalized(n: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n, amplitudes)
    }

    /// Occupation basis state `|s⟩`.
    pub fn basis(n: usize, s: FockIndex) -> Result<Self> {
        check_sites(n)?;
        if s.0 >> n != 0 {
            return Err(invalid(format!("mask {:#b} has bits beyond N = {n}", s.0)));
        }
        let mut amplitudes = vec![Complex64::default(); 1 << n];
        amplitudes[s.0 as usize] = ONE;
        Ok(PureState { n, amplitudes, sector_hint: Some(s.particle_count() as usize) })
    }

    /// Construction without the normalization check, for results of unitary maps.
    pub(crate) fn from_raw(n: usize, amplitudes: Vec<Complex64>) -> Self {
        let sector_hint = detect_sector(&amplitudes);
        PureState { n, amplitudes, sector_hint }
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn sector_hint(&self) -> Option<usize> {
        self.sector_hint
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Masks carrying a nonzero amplitude, ascending.
    pub fn support(&self) -> Vec<u32> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::default())
            .map(|(s, _)| s as u32)
            .collect()
    }
}

fn detect_sector(amplitudes: &[Complex64]) -> Option<usize> {
    let mut sector = None;
    for (s, a) in amplitudes.iter().enumerate() {
        if *a == Complex64::default() {
            continue;
        }
        let np = (s as u32).count_ones() as usize;
        match sector {
            None => sector = Some(np),
            Some(p) if p != np => return None,
            _ => {}
        }
    }
    sector
}

/// Place sector coefficients at their ranked masks in the full Fock space.
pub fn embed_sector_vector(v: &[Complex64], basis: &SectorBasis) -> Result<PureState> {
    if v.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: v.len() });
    }
    let mut amplitudes = vec![Complex64::default(); 1 << basis.n];
    for (&c, s) in v.iter().zip(&basis.states) {
        amplitudes[s.0 as usize] = c;
    }
    let mut state = PureState::new(basis.n, amplitudes)?;
    state.sector_hint = Some(basis.particles);
    Ok(state)
}

/// Restrict a full-space state to the coefficients of a sector, in rank order.
pub fn project_to_sector(psi: &PureState, basis: &SectorBasis) -> Result<Vec<Complex64>> {
    if psi.n != basis.n {
        return Err(Error::DimensionMismatch { expected: basis.n, found: psi.n });
    }
    Ok(basis.states.iter().map(|s| psi.amplitudes[s.0 as usize]).collect())
}

/// `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// Parse an occupation pattern such as `"1010"`; character `i` is site `i`.
pub fn parse_occupation(pattern: &str) -> Result<FockIndex> {
    let n = pattern.chars().count();
    if n == 0 || n > MAX_SITES {
        return Err(Error::Parse(format!("occupation pattern length {n} outside 1..={MAX_SITES}")));
    }
    let mut bits = 0u32;
    for (i, c) in pattern.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << i,
            other => return Err(Error::Parse(format!("invalid occupation character {other:?}"))),
        }
    }
    Ok(FockIndex(bits))
}

/// Inverse of [`parse_occupation`].
pub fn format_occupation(s: FockIndex, n: usize) -> String {
    (0..n).map(|i| if s.is_occupied(i) { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sector_listing_small() {
        let b = enumerate_sector(2, 1).unwrap();
        assert_eq!(b.states(), &[FockIndex(0b01), FockIndex(0b10)]);
        assert_eq!(enumerate_sector(4, 2).unwrap().len(), 6);
        assert_eq!(enumerate_sector(14, 7).unwrap().len(), 3432);
        assert_eq!(binomial(14, 7), 3432);
    }

    #[test]
    fn sector_rank_is_inverse() {
        for n in 1..=10 {
            for p in 0..=n {
                let b = enumerate_sector(n, p).unwrap();
                assert_eq!(b.len() as u64, binomial(n as u64, p as u64));
                assert!(b.states().windows(2).all(|w| w[0] < w[1]));
                for (r, &s) in b.states().iter().enumerate() {
                    assert_eq!(b.rank(s), Some(r));
                }
            }
        }
    }

    #[test]
    fn sector_rejects_bad_parameters() {
        assert!(enumerate_sector(4, 5).is_err());
        assert!(enumerate_sector(0, 0).is_err());
        assert!(enumerate_sector(17, 8).is_err());
    }

    #[test]
    fn mode_examples() {
        let (s, ph) = apply_mode(ModeKind::Eta, 0, FockIndex(0));
        assert_eq!(s, FockIndex(1));
        assert!(close(ph, ONE, 0.0));

        let (s, ph) = apply_mode(ModeKind::Eta, 1, FockIndex(0b01));
        assert_eq!(s, FockIndex(0b11));
        assert!(close(ph, -ONE, 0.0));

        // i·c₀ on an occupied site
        let (s, ph) = apply_mode(ModeKind::Chi, 0, FockIndex(1));
        assert_eq!(s, FockIndex(0));
        assert!(close(ph, I, 0.0));
    }

    #[test]
    fn modes_square_to_one() {
        for kind in [ModeKind::Eta, ModeKind::Chi] {
            for site in 0..4 {
                for s in 0..16 {
                    let (s1, p1) = apply_mode(kind, site, FockIndex(s));
                    let (s2, p2) = apply_mode(kind, site, s1);
                    assert_eq!(s2, FockIndex(s));
                    assert!(close(p1 * p2, ONE, 0.0));
                }
            }
        }
    }

    #[test]
    fn modes_anticommute() {
        let modes: Vec<(ModeKind, usize)> =
            (0..4).flat_map(|i| [(ModeKind::Eta, i), (ModeKind::Chi, i)]).collect();
        for (a, &(ka, ia)) in modes.iter().enumerate() {
            for (b, &(kb, ib)) in modes.iter().enumerate() {
                if a == b {
                    continue;
                }
                for s in 0..16 {
                    let (t1, p1) = apply_mode(kb, ib, FockIndex(s));
                    let (u1, q1) = apply_mode(ka, ia, t1);
                    let (t2, p2) = apply_mode(ka, ia, FockIndex(s));
                    let (u2, q2) = apply_mode(kb, ib, t2);
                    assert_eq!(u1, u2);
                    assert!(close(p1 * q1, -(p2 * q2), 0.0));
                }
            }
        }
    }

    #[test]
    fn ladder_operators_from_modes() {
        // c† = (η + iχ)/2 and c = (η − iχ)/2 on every basis state
        for site in 0..3 {
            for s in 0..8u32 {
                let s = FockIndex(s);
                let (fe, pe) = apply_mode(ModeKind::Eta, site, s);
                let (fc, pc) = apply_mode(ModeKind::Chi, site, s);
                assert_eq!(fe, fc);
                let dag = (pe + I * pc) / 2.0;
                let ann = (pe - I * pc) / 2.0;
                let want_dag = create(site, s).map_or(0.0, |(t, sg)| {
                    assert_eq!(t, fe);
                    sg
                });
                let want_ann = annihilate(site, s).map_or(0.0, |(t, sg)| {
                    assert_eq!(t, fe);
                    sg
                });
                assert!(close(dag, want_dag.into(), 1e-15));
                assert!(close(ann, want_ann.into(), 1e-15));
            }
        }
    }

    #[test]
    fn embed_examples() {
        let b = enumerate_sector(2, 1).unwrap();
        let psi = embed_sector_vector(&[ONE, Complex64::default()], &b).unwrap();
        assert_eq!(psi.amplitudes()[0b01], ONE);
        assert_eq!(psi.sector_hint(), Some(1));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = embed_sector_vector(&[h.into(), h.into()], &b).unwrap();
        assert_eq!(psi.support(), vec![0b01, 0b10]);

        let b8 = enumerate_sector(8, 4).unwrap();
        let v: Vec<Complex64> =
            (0..b8.len()).map(|k| Complex64::new(1.0 + k as f64, -(k as f64))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<Complex64> = v.into_iter().map(|c| c / norm).collect();
        let psi = embed_sector_vector(&v, &b8).unwrap();
        assert_eq!(psi.dim(), 256);
        assert_eq!(psi.support().len(), 70);
        assert!((psi.norm() - 1.0).abs() < 1e-14);

        assert!(embed_sector_vector(&[ONE], &b).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::default(); 4];
        amps[1] = h.into();
        amps[2] = Complex64::new(0.0, h);
        let psi = PureState::new(2, amps.clone()).unwrap();
        assert!(close(inner_product(&psi, &psi).unwrap(), ONE, 1e-15));

        let theta = 0.7f64;
        let phase = Complex64::from_polar(1.0, theta);
        let rotated = PureState::new(2, amps.iter().map(|a| a * phase).collect()).unwrap();
        assert!(close(inner_product(&psi, &rotated).unwrap(), phase, 1e-15));

        let e1 = PureState::basis(2, FockIndex(1)).unwrap();
        let e2 = PureState::basis(2, FockIndex(2)).unwrap();
        assert_eq!(inner_product(&e1, &e2).unwrap(), Complex64::default());
        assert!(inner_product(&e1, &PureState::basis(3, FockIndex(1)).unwrap()).is_err());
    }

    #[test]
    fn occupation_patterns() {
        assert_eq!(parse_occupation("10").unwrap(), FockIndex(0b01));
        assert_eq!(parse_occupation("1010").unwrap(), FockIndex(0b0101));
        assert_eq!(format_occupation(FockIndex(0b0101), 4), "1010");
        assert!(parse_occupation("").is_err());
        assert!(parse_occupation("10x").is_err());
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(2, vec![ONE; 4]).is_err());
        assert!(PureState::new(2, vec![ONE; 3]).is_err());
        let psi = PureState::normalized(2, vec![ONE; 4]).unwrap();
        assert_eq!(psi.sector_hint(), None);
    }
}
