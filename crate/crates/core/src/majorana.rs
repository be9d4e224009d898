//! Hermitian Majorana strings `μ(v) = i^{vᵀω_L v} η₁^{v₁} χ₁^{v₂} ⋯ χ_N^{v_{2N}}`.
//!
//! Bit `2i` of `v` selects `η_{i+1}` and bit `2i+1` selects `χ_{i+1}`, so the
//! two Majoranas of a site sit in adjacent bits.
//!
//! Expectation values go through a compiled form `i^k X^x Z^z` of the string
//! (see [`PauliForm`]); [`apply_string`] instead applies the modes one at a
//! time through [`crate::fock::apply_mode`], and [`dense_oracle`] builds the
//! full matrix from `c_i` and `c_i†`. Tests pin the three routes together.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{apply_mode, FockIndex, ModeKind, PureState};
use crate::MAX_SITES;

/// Imaginary residue allowed on an expectation value before it is rejected.
pub const IMAG_TOLERANCE: f64 = 1e-10;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` for `k` mod 4.
#[inline]
pub fn i_pow(k: u8) -> Complex64 {
    I_POWERS[(k & 3) as usize]
}

/// Exponent `vᵀω_L v mod 4` of the Hermitizing phase, i.e. `C(popcount v, 2) mod 4`.
#[inline]
pub fn hermitizing_phase_exponent(v: u64) -> u8 {
    let k = u64::from(v.count_ones());
    ((k * k.saturating_sub(1) / 2) % 4) as u8
}

/// Operator content of one site: which of `η_i`, `χ_i` appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteOp {
    Identity,
    Eta,
    Chi,
    EtaChi,
}

impl SiteOp {
    pub const ALL: [SiteOp; 4] = [SiteOp::Eta, SiteOp::Chi, SiteOp::EtaChi, SiteOp::Identity];

    #[inline]
    pub fn bits(self) -> u64 {
        match self {
            SiteOp::Identity => 0b00,
            SiteOp::Eta => 0b01,
            SiteOp::Chi => 0b10,
            SiteOp::EtaChi => 0b11,
        }
    }

    #[inline]
    pub fn from_bits(b: u64) -> SiteOp {
        match b & 0b11 {
            0b00 => SiteOp::Identity,
            0b01 => SiteOp::Eta,
            0b10 => SiteOp::Chi,
            _ => SiteOp::EtaChi,
        }
    }
}

/// A Hermitian Majorana string on `N` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MajoranaString {
    n: u8,
    bits: u64,
}

impl MajoranaString {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::InvalidParameter(format!("site count N = {n} outside 1..={MAX_SITES}")));
        }
        if bits >> (2 * n) != 0 {
            return Err(Error::InvalidParameter(format!("string bits {bits:#x} exceed 2N = {}", 2 * n)));
        }
        Ok(MajoranaString { n: n as u8, bits })
    }

    pub(crate) fn new_unchecked(n: usize, bits: u64) -> Self {
        debug_assert!(n <= MAX_SITES && bits >> (2 * n) == 0);
        MajoranaString { n: n as u8, bits }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// The fermion parity string `P̂ = Z₁⋯Z_N` (all `2N` bits set).
    pub fn parity_string(n: usize) -> Result<Self> {
        Self::new(n, full_mask(n))
    }

    pub fn sites(self) -> usize {
        self.n as usize
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_even(self) -> bool {
        self.bits.count_ones().is_multiple_of(2)
    }

    pub fn is_identity(self) -> bool {
        self.bits == 0
    }

    pub fn is_parity(self) -> bool {
        self.bits == full_mask(self.sites())
    }

    pub fn phase_exponent(self) -> u8 {
        hermitizing_phase_exponent(self.bits)
    }

    pub fn site_op(self, site: usize) -> SiteOp {
        SiteOp::from_bits(self.bits >> (2 * site))
    }

    pub fn with_site_op(self, site: usize, op: SiteOp) -> Self {
        let shift = 2 * site;
        let bits = (self.bits & !(0b11 << shift)) | (op.bits() << shift);
        MajoranaString { n: self.n, bits }
    }

    /// Ordered list of modes, leftmost factor first.
    pub fn modes(self) -> impl Iterator<Item = (ModeKind, usize)> {
        let bits = self.bits;
        (0..2 * self.sites()).filter(move |b| bits >> b & 1 == 1).map(|b| {
            let kind = if b % 2 == 0 { ModeKind::Eta } else { ModeKind::Chi };
            (kind, b / 2)
        })
    }

    pub fn hex_width(n: usize) -> usize {
        (2 * n).div_ceil(4)
    }

    /// Zero-padded lowercase hex of `v`, least significant bit = `η₁`.
    pub fn to_hex(self) -> String {
        format!("{:0width$x}", self.bits, width = Self::hex_width(self.sites()))
    }

    pub fn from_hex(s: &str, n: usize) -> Result<Self> {
        let width = Self::hex_width(n);
        if s.len() != width {
            return Err(Error::Parse(format!("hex string of length {} (expected {width})", s.len())));
        }
        if !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            return Err(Error::Parse(format!("{s:?} is not lowercase hex")));
        }
        let bits = u64::from_str_radix(s, 16).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(n, bits).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Human form such as `eta1.chi1.eta3`; the identity is `I`.
    pub fn to_human(self) -> String {
        if self.bits == 0 {
            return "I".to_string();
        }
        self.modes()
            .map(|(kind, site)| match kind {
                ModeKind::Eta => format!("eta{}", site + 1),
                ModeKind::Chi => format!("chi{}", site + 1),
            })
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Parse the human form. Modes must appear in canonical order.
    pub fn from_human(s: &str, n: usize) -> Result<Self> {
        if s == "I" {
            return Self::new(n, 0).map_err(|e| Error::Parse(e.to_string()));
        }
        let mut bits = 0u64;
        let mut last: Option<usize> = None;
        for token in s.split('.') {
            let (bit_offset, digits) = if let Some(d) = token.strip_prefix("eta") {
                (0, d)
            } else if let Some(d) = token.strip_prefix("chi") {
                (1, d)
            } else {
                return Err(Error::Parse(format!("unknown mode {token:?}")));
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
                return Err(Error::Parse(format!("bad site index in {token:?}")));
            }
            let site: usize = digits.parse().map_err(|_| Error::Parse(format!("bad site index in {token:?}")))?;
            if site == 0 || site > n {
                return Err(Error::Parse(format!("site {site} outside 1..={n}")));
            }
            let bit = 2 * (site - 1) + bit_offset;
            if last.is_some_and(|l| bit <= l) {
                return Err(Error::Parse(format!("mode {token:?} out of canonical order")));
            }
            last = Some(bit);
            bits |= 1 << bit;
        }
        Self::new(n, bits).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn compile(self) -> PauliForm {
        PauliForm::of(self)
    }
}

impl fmt::Display for MajoranaString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_human())
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * n)) - 1
    }
}

/// A string rewritten as `i^phase · X^flip · Z^zmask` acting on occupation masks:
/// `|s⟩ ↦ i^phase (−1)^{|zmask ∧ s|} |s ⊕ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliForm {
    pub phase: u8,
    pub flip: u32,
    pub zmask: u32,
}

impl PauliForm {
    pub fn of(m: MajoranaString) -> PauliForm {
        let mut acc = PauliForm { phase: m.phase_exponent(), flip: 0, zmask: 0 };
        for (kind, site) in m.modes() {
            let lower = (1u32 << site) - 1;
            let e = 1u32 << site;
            // η = Z_{<i} X_i ;  χ = −Z_{<i} Y_i = i³ X_i Z_{≤i}
            let mode = match kind {
                ModeKind::Eta => PauliForm { phase: 0, flip: e, zmask: lower },
                ModeKind::Chi => PauliForm { phase: 3, flip: e, zmask: lower | e },
            };
            acc = acc.mul(mode);
        }
        acc
    }

    fn mul(self, rhs: PauliForm) -> PauliForm {
        // Z^{z1} X^{x2} = (−1)^{|z1 ∧ x2|} X^{x2} Z^{z1}
        let swap = 2 * ((self.zmask & rhs.flip).count_ones() % 2) as u8;
        PauliForm {
            phase: (self.phase + rhs.phase + swap) % 4,
            flip: self.flip ^ rhs.flip,
            zmask: self.zmask ^ rhs.zmask,
        }
    }

    /// Raw `Σ_s conj(ψ[s ⊕ flip]) · phase(s) · ψ[s]` over the given masks.
    ///
    /// `support` must contain every mask where `amps` is nonzero.
    #[inline]
    pub fn raw_expectation(&self, amps: &[Complex64], support: &[u32]) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for &s in support {
            let a = amps[s as usize];
            let b = amps[(s ^ self.flip) as usize];
            let cr = b.re * a.re + b.im * a.im;
            let ci = b.re * a.im - b.im * a.re;
            if (self.zmask & s).count_ones() & 1 == 0 {
                re += cr;
                im += ci;
            } else {
                re -= cr;
                im -= ci;
            }
        }
        i_pow(self.phase) * Complex64::new(re, im)
    }
}

/// Apply `μ(v)` to `ψ` mode by mode, rightmost factor first.
pub fn apply_string(m: MajoranaString, psi: &PureState) -> Result<PureState> {
    check_sites(m, psi)?;
    let phase = i_pow(m.phase_exponent());
    let modes: Vec<(ModeKind, usize)> = m.modes().collect();
    let mut out = vec![Complex64::default(); psi.dim()];
    for (s, &a) in psi.amplitudes().iter().enumerate() {
        if a == Complex64::default() {
            continue;
        }
        let mut idx = FockIndex(s as u32);
        let mut coeff = phase * a;
        for &(kind, site) in modes.iter().rev() {
            let (next, ph) = apply_mode(kind, site, idx);
            idx = next;
            coeff *= ph;
        }
        out[idx.bits() as usize] += coeff;
    }
    Ok(PureState::from_raw(psi.sites(), out))
}

fn check_sites(m: MajoranaString, psi: &PureState) -> Result<()> {
    if m.sites() != psi.sites() {
        return Err(Error::DimensionMismatch { expected: psi.sites(), found: m.sites() });
    }
    Ok(())
}

/// Convert a raw complex expectation to a real value, rejecting imaginary residue.
pub fn realize(raw: Complex64) -> Result<f64> {
    if raw.im.abs() > IMAG_TOLERANCE {
        return Err(Error::Numerical(format!("expectation has imaginary part {:e}", raw.im)));
    }
    Ok(raw.re)
}

/// `⟨ψ|μ(v)|ψ⟩`; odd strings return exactly 0 without touching amplitudes.
pub fn expectation(m: MajoranaString, psi: &PureState) -> Result<f64> {
    check_sites(m, psi)?;
    if !m.is_even() {
        return Ok(0.0);
    }
    let support = psi.support();
    realize(m.compile().raw_expectation(psi.amplitudes(), &support))
}

/// Largest `N` accepted by [`dense_oracle`].
pub const ORACLE_MAX_SITES: usize = 6;

/// Explicit `2^N × 2^N` matrix of `μ(v)` built from Kronecker products of
/// single-site `c`, `Z`, and identity blocks.
pub fn dense_oracle(m: MajoranaString) -> Result<DMatrix<Complex64>> {
    let n = m.sites();
    if n > ORACLE_MAX_SITES {
        return Err(Error::SizeGuard { n, limit: ORACLE_MAX_SITES });
    }
    let d = 1usize << n;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let z2 = DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
    // annihilator in occupation order (|0⟩, |1⟩)
    let lower = DMatrix::from_row_slice(2, 2, &[zero, one, zero, zero]);

    let annihilator = |site: usize| -> DMatrix<Complex64> {
        // site 0 is the least significant bit, so it is the rightmost Kronecker factor
        let mut acc = DMatrix::<Complex64>::identity(1, 1);
        for j in (0..n).rev() {
            let block = match j.cmp(&site) {
                std::cmp::Ordering::Less => &z2,
                std::cmp::Ordering::Equal => &lower,
                std::cmp::Ordering::Greater => &id2,
            };
            acc = acc.kronecker(block);
        }
        acc
    };

    let mut out = DMatrix::<Complex64>::identity(d, d) * i_pow(m.phase_exponent());
    for (kind, site) in m.modes() {
        let c = annihilator(site);
        let cd = c.adjoint();
        let mode = match kind {
            ModeKind::Eta => &c + &cd,
            ModeKind::Chi => (&c - &cd) * Complex64::new(0.0, 1.0),
        };
        out *= mode;
    }
    Ok(out)
}

/// Number of even-parity strings on `n` sites, `4^N / 2`.
pub fn even_string_count(n: usize) -> u64 {
    1u64 << (2 * n - 1)
}

/// The `k`-th even-parity string in ascending bit order.
///
/// `k ↦ 2k + parity(k)` is an order-preserving bijection onto the even-weight
/// integers, so disjoint index ranges can be enumerated independently.
#[inline]
pub fn even_string_at(n: usize, k: u64) -> MajoranaString {
    MajoranaString::new_unchecked(n, (k << 1) | u64::from(k.count_ones() & 1))
}

/// All `4^N / 2` even-parity strings, ascending.
pub fn enumerate_even_strings(n: usize) -> impl Iterator<Item = MajoranaString> {
    (0..even_string_count(n)).map(move |k| even_string_at(n, k))
}
