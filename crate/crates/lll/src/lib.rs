//! Numerical toolbox for rapidly rotating trapped bosons confined to the
//! lowest Landau level (LLL).
//!
//! States live in Bargmann space: analytic functions of z = x + iy with a
//! Gaussian-weighted inner product, spanned by the orbitals
//! `φ_ℓ(z) = (π ℓ!)^{-1/2} z^ℓ`. The toolbox covers:
//!
//! - [`basis`]: bosonic many-body bases at fixed particle number N and total
//!   angular momentum L (integer partitions of L into at most N parts);
//! - [`operators`]: closed-form contact-interaction matrix elements and
//!   sparse assembly of the interaction and trap Hamiltonians per sector;
//! - [`spectra`]: per-sector eigenanalysis: yrast curve, spectral gaps,
//!   kernel dimensions, ground-state scans over sectors;
//! - [`trial`]: Laughlin and giant-vortex trial states as exact Fock vectors,
//!   with exact energies and vortex-charge optimization;
//! - [`plasma`]: Metropolis Monte Carlo for the 2D Coulomb log-gas that
//!   represents |Ψ|² of the trial states (plasma analogy);
//! - [`meanfield`]: radial mean-field free-energy minimization and the
//!   closed-form annulus/thermal limit profiles;
//! - [`gp`]: the Gross-Pitaevskii energy functional on Bargmann space,
//!   its minimization, the Thomas-Fermi limit and vortex-zero extraction.

pub mod basis;
pub mod gp;
pub mod grid;
pub mod meanfield;
pub mod operators;
pub mod plasma;
pub mod spectra;
pub mod trial;

mod math;

pub use basis::{FockVector, Occupation, SectorBasis};
pub use operators::{HamiltonianParams, SparseSymmetricOperator};
