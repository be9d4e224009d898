//! Non-stabilizerness of complex-fermion SYK and SYK₂ states.
//!
//! The crate computes the Majorana spectrum `x_v = <ψ|μ(v)|ψ>` of a pure
//! fermionic state over all Hermitian Majorana strings `μ(v)`, together with
//! the stabilizer Rényi entropies derived from it, either by exhaustive
//! enumeration or by Metropolis sampling of strings with weight `x_v²/d`.
//!
//! States come from exact diagonalization of disordered SYK (quartic) and
//! SYK₂ (quadratic) Hamiltonians in a fixed particle-number sector, or from
//! quench dynamics of an occupation product state.
//!
//! Module map:
//! - [`fock`]: bitmask Fock basis, particle-number sectors, single-mode action
//! - [`majorana`]: Hermitian Majorana strings, expectation values, dense oracle
//! - [`hamiltonian`]: disorder sampling and sector matrices
//! - [`eigen`]: dense Hermitian eigendecomposition and time evolution
//! - [`spectrum`]: exact spectra, moments, SRE, histograms and fits
//! - [`sampler`]: Markov-chain estimation of (filtered) SRE
//! - [`dynamics`]: quench time series and spectrum snapshots
//! - [`experiments`]: configuration-driven disorder sweeps and exports

pub mod dynamics;
pub mod eigen;
mod error;
pub mod experiments;
pub mod fock;
pub mod hamiltonian;
pub mod majorana;
pub mod numfmt;
pub mod rng;
pub mod sampler;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Largest supported number of complex fermion sites.
pub const MAX_SITES: usize = 16;
