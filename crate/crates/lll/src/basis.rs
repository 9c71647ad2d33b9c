//! Bosonic many-body bases of the lowest Landau level at fixed particle
//! number N and total angular momentum L.
//!
//! A basis state assigns each of the N bosons to an orbital
//! `φ_ℓ(z) = (π ℓ!)^{-1/2} z^ℓ`; fixing the total momentum `Σ ℓ_i = L`
//! makes the states exactly the integer partitions of L into at most N
//! parts. Sectors are enumerated in lexicographically decreasing partition
//! order, which is deterministic and therefore safe to freeze in golden
//! files.

use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasisError {
    #[error("particle number must be at least 1")]
    EmptySystem,
    #[error("occupation has {found} particles, sector has {expected}")]
    ParticleMismatch { found: usize, expected: usize },
    #[error("occupation has angular momentum {found}, sector has {expected}")]
    MomentumMismatch { found: u64, expected: u64 },
    #[error("occupation not found in sector (N={n}, L={l})")]
    NotInSector { n: u32, l: u32 },
}

/// One bosonic basis state: the orbital index of every particle, sorted
/// descending. This is the partition-of-L picture; it stays compact for
/// any L because its length is the particle number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Occupation {
    parts: Vec<u32>,
}

impl Occupation {
    /// Build from per-particle orbital indices (any order).
    pub fn from_parts(mut parts: Vec<u32>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Occupation { parts }
    }

    /// Build from occupation counts `n[ℓ]`.
    pub fn from_counts(counts: &[u32]) -> Self {
        let mut parts = Vec::new();
        for (orbital, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                parts.push(orbital as u32);
            }
        }
        parts.reverse();
        Occupation { parts }
    }

    /// Number of particles N.
    pub fn particle_count(&self) -> usize {
        self.parts.len()
    }

    /// Total angular momentum `Σ_ℓ ℓ·n[ℓ]`.
    pub fn total_momentum(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// `Σ_ℓ ℓ²·n[ℓ]`, the diagonal of the single-particle L² sum.
    pub fn momentum_squared_sum(&self) -> u64 {
        self.parts.iter().map(|&p| (p as u64) * (p as u64)).sum()
    }

    /// Occupation number of one orbital.
    pub fn count_in(&self, orbital: u32) -> u32 {
        self.parts.iter().filter(|&&p| p == orbital).count() as u32
    }

    /// Per-particle orbitals, descending.
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Distinct `(orbital, count)` pairs, descending in orbital.
    pub fn counts(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((orb, n)) if *orb == p => *n += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Dense count vector of length `len` (`len > max orbital`).
    pub fn to_count_vec(&self, len: usize) -> Vec<u32> {
        let mut counts = vec![0u32; len];
        for &p in &self.parts {
            counts[p as usize] += 1;
        }
        counts
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// All basis states of the (N, L) sector with positional lookup both ways.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n: u32,
    l: u32,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl SectorBasis {
    /// Enumerate the sector. States come out in lexicographically
    /// decreasing partition order, starting from all momentum on a single
    /// particle.
    pub fn new(n: u32, l: u32) -> Result<Self, BasisError> {
        if n == 0 {
            return Err(BasisError::EmptySystem);
        }
        let mut states = Vec::new();
        let mut current = Vec::with_capacity(n as usize);
        enumerate_partitions(l, l, n, &mut current, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(SectorBasis { n, l, states, index })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Sector dimension.
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, position: usize) -> &Occupation {
        &self.states[position]
    }

    /// Position of an occupation in the sector; checks the sector
    /// invariants first so an out-of-sector state reports *why*.
    pub fn index_of(&self, occ: &Occupation) -> Result<usize, BasisError> {
        if occ.particle_count() != self.n as usize {
            return Err(BasisError::ParticleMismatch {
                found: occ.particle_count(),
                expected: self.n as usize,
            });
        }
        if occ.total_momentum() != self.l as u64 {
            return Err(BasisError::MomentumMismatch {
                found: occ.total_momentum(),
                expected: self.l as u64,
            });
        }
        self.index.get(occ).copied().ok_or(BasisError::NotInSector { n: self.n, l: self.l })
    }
}

/// Recursive generation of partitions of `remaining` into at most `slots`
/// parts, each at most `max_part`, largest part first.
fn enumerate_partitions(
    remaining: u32,
    max_part: u32,
    slots: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<Occupation>,
) {
    if remaining == 0 {
        let mut parts = current.clone();
        parts.resize(current.len() + slots as usize, 0);
        out.push(Occupation { parts });
        return;
    }
    if slots == 0 {
        return;
    }
    let hi = remaining.min(max_part);
    // Smallest admissible first part: ceil(remaining / slots).
    let lo = remaining.div_ceil(slots);
    for part in (lo..=hi).rev() {
        current.push(part);
        enumerate_partitions(remaining - part, part, slots - 1, current, out);
        current.pop();
    }
}

/// Number of partitions of L into at most N parts, by dynamic programming
/// (no enumeration). Cross-checks `SectorBasis::new`.
pub fn sector_dimension(n: u32, l: u32) -> Result<u64, BasisError> {
    if n == 0 {
        return Err(BasisError::EmptySystem);
    }
    // table[j] = partitions of j into parts of size <= current k
    let l = l as usize;
    let mut table = vec![0u64; l + 1];
    table[0] = 1;
    for k in 1..=(n as usize).min(l.max(1)) {
        for j in k..=l {
            table[j] += table[j - k];
        }
    }
    Ok(table[l])
}

/// Real coefficient vector over a [`SectorBasis`], unit-normalized at
/// construction. Used for both eigenvectors and trial states.
#[derive(Debug, Clone, Serialize)]
pub struct FockVector {
    basis_tag: (u32, u32),
    coeffs: Vec<f64>,
}

impl FockVector {
    /// Normalize and wrap raw coefficients for the (N, L) sector.
    ///
    /// Panics on a zero vector or a length mismatch with the basis.
    pub fn new(basis: &SectorBasis, mut coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis.dim(), "coefficient count does not match sector dimension");
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize a zero vector");
        for c in &mut coeffs {
            *c /= norm;
        }
        FockVector { basis_tag: (basis.n(), basis.l()), coeffs }
    }

    /// Wrap solver output already associated with a sector tag; normalizes.
    pub(crate) fn from_tag(basis_tag: (u32, u32), mut coeffs: Vec<f64>) -> Self {
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize a zero vector");
        for c in &mut coeffs {
            *c /= norm;
        }
        FockVector { basis_tag, coeffs }
    }

    pub fn basis_tag(&self) -> (u32, u32) {
        self.basis_tag
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Inner product with another vector over the same sector.
    pub fn dot(&self, other: &FockVector) -> f64 {
        assert_eq!(self.basis_tag, other.basis_tag, "sector mismatch in dot product");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }
}
