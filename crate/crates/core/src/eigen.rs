//! Dense Hermitian eigendecomposition, ground states and exact time evolution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{embed_sector_vector, PureState, SectorBasis};

/// Relative Hermiticity tolerance on eigensolver input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Gap below which the ground state is flagged as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U Λ U†`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let lambda = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&e| Complex64::from(e)));
        &self.eigenvectors * DMatrix::from_diagonal(&lambda) * self.eigenvectors.adjoint()
    }
}

pub fn eig_hermitian(h: &DMatrix<Complex64>) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    if h.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = h.camax().max(1.0);
    let asym = (h - h.adjoint()).camax();
    if asym > HERMITIAN_TOLERANCE * scale || h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(format!("matrix is not Hermitian (max |H − H†| = {asym:e})")));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, MAX_SWEEPS).ok_or(Error::Convergence)?;
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Lowest eigenstate embedded into the full Fock space.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: PureState,
    pub sector_vector: Vec<Complex64>,
    pub energy: f64,
    /// Gap to the first excited level, if there is one.
    pub gap: Option<f64>,
    /// Set when the gap is below [`DEGENERACY_GAP`]; column 0 is returned regardless.
    pub degenerate: bool,
}

pub fn ground_state(dec: &EigenDecomposition, basis: &SectorBasis) -> Result<GroundState> {
    if dec.dim() == 0 {
        return Err(Error::InvalidParameter("empty decomposition".into()));
    }
    if dec.dim() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: dec.dim() });
    }
    let v: Vec<Complex64> = dec.eigenvectors.column(0).iter().copied().collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex64> = v.into_iter().map(|z| z / norm).collect();
    let gap = dec.eigenvalues.get(1).map(|e1| e1 - dec.eigenvalues[0]);
    Ok(GroundState {
        state: embed_sector_vector(&v, basis)?,
        sector_vector: v,
        energy: dec.eigenvalues[0],
        gap,
        degenerate: gap.is_some_and(|g| g < DEGENERACY_GAP),
    })
}

/// Energy-basis amplitudes `c_n = ⟨E_n|ψ₀⟩` of an initial sector vector.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    dec: &'a EigenDecomposition,
    coefficients: DVector<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(dec: &'a EigenDecomposition, psi0: &[Complex64]) -> Result<Self> {
        if psi0.len() != dec.dim() {
            return Err(Error::DimensionMismatch { expected: dec.dim(), found: psi0.len() });
        }
        let coefficients = dec.eigenvectors.adjoint() * DVector::from_column_slice(psi0);
        Ok(Propagator { dec, coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        self.coefficients.as_slice()
    }

    /// `Σ_n c_n e^{−iE_n t} |E_n⟩`.
    pub fn at(&self, t: f64) -> Vec<Complex64> {
        let phased = DVector::from_iterator(
            self.dec.dim(),
            self.coefficients
                .iter()
                .zip(&self.dec.eigenvalues)
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        (&self.dec.eigenvectors * phased).iter().copied().collect()
    }
}

pub fn evolve(dec: &EigenDecomposition, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    Ok(Propagator::new(dec, psi0)?.at(t))
}

/// `⟨ψ|H|ψ⟩` for a sector vector.
pub fn energy_expectation(h: &DMatrix<Complex64>, psi: &[Complex64]) -> f64 {
    let v = DVector::from_column_slice(psi);
    (v.adjoint() * h * &v)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_sector;
    use crate::hamiltonian::{build_sector_matrix, sample_syk2, sample_syk4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_hermitian(dim: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        (&a + a.adjoint()) * c(0.5)
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn diagonal_is_sorted() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0), c(2.0)]));
        let dec = eig_hermitian(&h).unwrap();
        assert_eq!(dec.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let dec = eig_hermitian(&h).unwrap();
        assert!((dec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((dec.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v0 = dec.eigenvectors.column(0);
        // (1, −1)/√2 up to a global phase
        assert!((v0[0] + v0[1]).norm() < 1e-14);
        assert!((v0[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_residuals() {
        let h = random_hermitian(70, 1);
        let dec = eig_hermitian(&h).unwrap();
        let hn = h.norm();
        assert!((dec.reconstruct() - &h).norm() < 1e-10 * hn.max(1.0));
        for k in 0..70 {
            let u = dec.eigenvectors.column(k);
            let r = &h * u - u * c(dec.eigenvalues[k]);
            assert!(r.norm() <= 1e-10 * hn);
        }
        let gram = dec.eigenvectors.adjoint() * &dec.eigenvectors;
        assert!((gram - DMatrix::identity(70, 70)).camax() < 1e-12);
        assert!(dec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(eig_hermitian(&h), Err(Error::Numerical(_))));
        assert!(eig_hermitian(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn ground_state_examples() {
        let basis = enumerate_sector(2, 1).unwrap();
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(2.0)]));
        let gs = ground_state(&eig_hermitian(&h).unwrap(), &basis).unwrap();
        assert!((gs.state.amplitudes()[0b01].norm() - 1.0).abs() < 1e-15);
        assert!(!gs.degenerate);

        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0)]));
        let dec = eig_hermitian(&h).unwrap();
        let gs = ground_state(&dec, &basis).unwrap();
        assert!(gs.degenerate);
        let col0: Vec<Complex64> = dec.eigenvectors.column(0).iter().copied().collect();
        assert_eq!(gs.sector_vector, col0);
    }

    #[test]
    fn syk2_two_sites_matches_closed_form() {
        let m = sample_syk2(2, 1.0, 12).unwrap();
        let basis = enumerate_sector(2, 1).unwrap();
        let h = build_sector_matrix(&m, &basis).unwrap();
        let (a, d, b) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)]);
        let e0 = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        let gs = ground_state(&eig_hermitian(&h).unwrap(), &basis).unwrap();
        assert!((gs.energy - e0).abs() < 1e-14);
        // eigenvector ∝ (b, e0 − a)
        let v = &gs.sector_vector;
        let want = [b, c(e0 - a)];
        let want_norm = norm(&want);
        let overlap: Complex64 = want.iter().zip(v).map(|(w, x)| w.conj() * x).sum();
        assert!((overlap.norm() / want_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_properties() {
        let basis = enumerate_sector(8, 4).unwrap();
        let m = sample_syk4(8, 1.0, 3).unwrap();
        let h = build_sector_matrix(&m, &basis).unwrap();
        let dec = eig_hermitian(&h).unwrap();
        let mut psi0 = vec![Complex64::default(); basis.len()];
        psi0[5] = c(1.0);

        assert_eq!(evolve(&dec, &psi0, 0.0).unwrap().len(), psi0.len());
        let at0 = evolve(&dec, &psi0, 0.0).unwrap();
        assert!(at0.iter().zip(&psi0).all(|(a, b)| (a - b).norm() < 1e-12));

        let prop = Propagator::new(&dec, &psi0).unwrap();
        let e0 = energy_expectation(&h, &psi0);
        for &t in &[0.1, 1.0, 3.7, 10.0] {
            let psi = prop.at(t);
            assert!((norm(&psi) - 1.0).abs() < 1e-12);
            assert!((energy_expectation(&h, &psi) - e0).abs() < 1e-10);
        }

        let eigvec: Vec<Complex64> = dec.eigenvectors.column(3).iter().copied().collect();
        let t = 2.5;
        let out = evolve(&dec, &eigvec, t).unwrap();
        let overlap: Complex64 = eigvec.iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap - Complex64::from_polar(1.0, -dec.eigenvalues[3] * t)).norm() < 1e-12);

        assert!(evolve(&dec, &psi0[1..], 1.0).is_err());
    }
}
