//! Contact-interaction matrix elements on Bargmann space and sparse
//! assembly of the per-sector operators.
//!
//! The contact potential between two LLL bosons acts on analytic pair
//! wavefunctions as `δ₁₂ φ(z₁,z₂) = (2π)^{-1} φ((z₁+z₂)/2, (z₁+z₂)/2)`,
//! a bounded projection-like operator. Between normalized product orbitals
//! its matrix element has the closed form implemented by
//! [`delta_matrix_element`]; total angular momentum `m₁+m₂ = m₃+m₄` is
//! conserved, which keeps all assembled sector operators sparse.
//!
//! The full trap Hamiltonian with a quartic anharmonicity is, on a fixed
//! momentum sector,
//!
//! `H = (ω+3k)·L + k·Σ_i L_i² + g·I_N`
//!
//! where `I_N = Σ_{i<j} δ_ij` and `Σ_i L_i²` is diagonal in the occupation
//! basis.

use crate::basis::SectorBasis;
use crate::math::ln_factorial;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::io::{self, Read, Write};
use thiserror::Error;

/// Assembled entries below this magnitude are rounding contamination of
/// exact zeros from the momentum selection rule and are dropped.
const ASSEMBLY_DROP_TOL: f64 = 1e-14;

/// Default cap on the sector dimension an assembly will attempt.
pub const DEFAULT_MAX_DIM: usize = 200_000;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("sector dimension {dim} exceeds configured maximum {max}")]
    ResourceLimit { dim: usize, max: usize },
    #[error("invalid Hamiltonian parameters: {0}")]
    InvalidParams(String),
    #[error("operator cache I/O: {0}")]
    Io(#[from] io::Error),
    #[error("operator cache is malformed: {0}")]
    MalformedCache(String),
}

/// Trap/interaction parameters of the sector Hamiltonian.
///
/// `omega` is the difference between trap and rotation frequencies
/// (trap frequency = 1), `g ≥ 0` the contact coupling and `k ≥ 0` the
/// quartic trap strength. A negative `omega` is only stable when `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianParams {
    pub omega: f64,
    pub g: f64,
    pub k: f64,
}

impl HamiltonianParams {
    pub fn new(omega: f64, g: f64, k: f64) -> Result<Self, OperatorError> {
        let p = HamiltonianParams { omega, g, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.omega.is_finite() && self.g.is_finite() && self.k.is_finite()) {
            return Err(OperatorError::InvalidParams("non-finite parameter".into()));
        }
        if self.g < 0.0 {
            return Err(OperatorError::InvalidParams(format!("g = {} < 0", self.g)));
        }
        if self.k < 0.0 {
            return Err(OperatorError::InvalidParams(format!("k = {} < 0", self.k)));
        }
        if self.omega < 0.0 && self.k == 0.0 {
            return Err(OperatorError::InvalidParams(format!(
                "omega = {} < 0 requires k > 0 for stability",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Real symmetric sparse operator on one (N, L) sector; only the upper
/// triangle (row ≤ col) is stored, so symmetry is exact by construction.
#[derive(Debug, Clone)]
pub struct SparseSymmetricOperator {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
    basis_tag: (u32, u32),
}

impl SparseSymmetricOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle triplets (row ≤ col).
    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn basis_tag(&self) -> (u32, u32) {
        self.basis_tag
    }

    /// Dense symmetric completion (small sectors only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] = v;
            m[(c as usize, r as usize)] = v;
        }
        m
    }

    /// Compressed sparse rows of the symmetric completion, the form the
    /// iterative eigensolver multiplies by.
    pub fn to_csr(&self) -> Csr {
        Csr::from_upper_triplets(self.dim, &self.entries)
    }

    /// Infinity norm of the symmetric completion; an upper bound on the
    /// spectral norm used for residual scaling.
    pub fn norm_inf(&self) -> f64 {
        let mut row_sums = vec![0.0f64; self.dim];
        for &(r, c, v) in &self.entries {
            row_sums[r as usize] += v.abs();
            if r != c {
                row_sums[c as usize] += v.abs();
            }
        }
        row_sums.iter().cloned().fold(0.0, f64::max)
    }

    /// Quadratic form x·A·x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for &(r, c, v) in &self.entries {
            let (r, c) = (r as usize, c as usize);
            if r == c {
                acc += v * x[r] * x[r];
            } else {
                acc += 2.0 * v * x[r] * x[c];
            }
        }
        acc
    }

    /// Add `scale` times the identity to the diagonal, in place.
    pub fn shift_diagonal(&mut self, scale: f64) {
        if scale == 0.0 {
            return;
        }
        let mut has_diag = vec![false; self.dim];
        for (r, c, v) in self.entries.iter_mut() {
            if r == c {
                *v += scale;
                has_diag[*r as usize] = true;
            }
        }
        for (i, &present) in has_diag.iter().enumerate() {
            if !present {
                self.entries.push((i as u32, i as u32, scale));
            }
        }
        self.sort_entries();
    }

    fn sort_entries(&mut self) {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    }
}

/// Plain CSR matrix for matvec.
#[derive(Debug, Clone)]
pub struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_upper_triplets(dim: usize, upper: &[(u32, u32, f64)]) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(r, c, _) in upper {
            counts[r as usize + 1] += 1;
            if r != c {
                counts[c as usize + 1] += 1;
            }
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[dim];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0f64; nnz];
        let mut cursor = counts.clone();
        for &(r, c, v) in upper {
            let slot = cursor[r as usize];
            cols[slot] = c;
            vals[slot] = v;
            cursor[r as usize] += 1;
            if r != c {
                let slot = cursor[c as usize];
                cols[slot] = r;
                vals[slot] = v;
                cursor[c as usize] += 1;
            }
        }
        Csr { dim, row_ptr: counts, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (row, y_r) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[idx] * x[self.cols[idx] as usize];
            }
            *y_r = acc;
        }
    }
}

/// Contact matrix element `⟨m₁,m₂|δ₁₂|m₃,m₄⟩` between normalized,
/// non-symmetrized product orbitals.
///
/// Zero unless `m₁+m₂ = m₃+m₄ = M`; otherwise
/// `(2π)^{-1} 2^{-M} M! / sqrt(m₁! m₂! m₃! m₄!)`,
/// evaluated through log-factorials so large M neither overflows nor
/// loses more than ~1e-13 relative accuracy.
pub fn delta_matrix_element(m1: u32, m2: u32, m3: u32, m4: u32) -> f64 {
    let m_bra = m1 as u64 + m2 as u64;
    let m_ket = m3 as u64 + m4 as u64;
    if m_bra != m_ket {
        return 0.0;
    }
    let m = m_bra as usize;
    let log_val = -(2.0 * std::f64::consts::PI).ln() - (m as f64) * std::f64::consts::LN_2
        + ln_factorial(m)
        - 0.5
            * (ln_factorial(m1 as usize)
                + ln_factorial(m2 as usize)
                + ln_factorial(m3 as usize)
                + ln_factorial(m4 as usize));
    log_val.exp()
}

/// Assemble `I_N = Σ_{i<j} δ_ij` on a sector, with the default size cap.
pub fn assemble_interaction(basis: &SectorBasis) -> Result<SparseSymmetricOperator, OperatorError> {
    assemble_interaction_limited(basis, DEFAULT_MAX_DIM)
}

/// Assemble the interaction with an explicit dimension cap.
///
/// The operator is built ket by ket from the normal-ordered two-body sum
/// `½ Σ V(m₁,m₂,m₃,m₄) a†_{m₁} a†_{m₂} a_{m₄} a_{m₃}` over all ordered
/// index pairs; rows are computed independently in parallel and merged in
/// a fixed order so the result is deterministic.
pub fn assemble_interaction_limited(
    basis: &SectorBasis,
    max_dim: usize,
) -> Result<SparseSymmetricOperator, OperatorError> {
    let dim = basis.dim();
    if dim > max_dim {
        return Err(OperatorError::ResourceLimit { dim, max: max_dim });
    }

    let columns: Vec<Vec<(u32, f64)>> =
        (0..dim).into_par_iter().map(|ket_idx| interaction_column(basis, ket_idx)).collect();

    let mut entries = Vec::new();
    for (ket_idx, column) in columns.into_iter().enumerate() {
        for (row, value) in column {
            // keep upper triangle only; the mirror image is implied
            if (row as usize) <= ket_idx && value.abs() >= ASSEMBLY_DROP_TOL {
                entries.push((row, ket_idx as u32, value));
            }
        }
    }
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

    Ok(SparseSymmetricOperator { dim, entries, basis_tag: (basis.n(), basis.l()) })
}

/// All amplitudes ⟨β|I_N|ket⟩ for one ket, as (row, value) pairs.
fn interaction_column(basis: &SectorBasis, ket_idx: usize) -> Vec<(u32, f64)> {
    let ket = basis.state(ket_idx);
    let l_max = basis.l();
    let occupied = ket.counts();
    let mut counts = ket.to_count_vec(l_max as usize + 1);
    let mut amplitudes: HashMap<u32, f64> = HashMap::new();

    // ordered pairs (m3, m4) of annihilated orbitals
    for &(m3, n3) in &occupied {
        for &(m4, n4) in &occupied {
            let pair_amp = if m3 == m4 {
                if n3 < 2 {
                    continue;
                }
                (n3 as f64 * (n3 as f64 - 1.0)).sqrt()
            } else {
                (n3 as f64 * n4 as f64).sqrt()
            };
            counts[m3 as usize] -= 1;
            counts[m4 as usize] -= 1;

            let total_m = m3 + m4;
            for m1 in 0..=total_m.min(l_max) {
                let m2 = total_m - m1;
                if m2 > l_max {
                    continue;
                }
                // sequential creation: a†_{m2} then a†_{m1}
                let c2 = counts[m2 as usize] as f64 + 1.0;
                let c1 = counts[m1 as usize] as f64 + 1.0 + if m1 == m2 { 1.0 } else { 0.0 };
                let create_amp = (c1 * c2).sqrt();

                counts[m2 as usize] += 1;
                counts[m1 as usize] += 1;
                let target = crate::basis::Occupation::from_counts(&counts);
                counts[m1 as usize] -= 1;
                counts[m2 as usize] -= 1;

                let row = basis.index_of(&target).expect("two-body scattering conserves the sector")
                    as u32;
                let element = delta_matrix_element(m1, m2, m3, m4);
                *amplitudes.entry(row).or_insert(0.0) += 0.5 * element * pair_amp * create_amp;
            }

            counts[m3 as usize] += 1;
            counts[m4 as usize] += 1;
        }
    }

    let mut column: Vec<(u32, f64)> = amplitudes.into_iter().collect();
    column.sort_unstable_by_key(|&(row, _)| row);
    column
}

/// Assemble the full sector Hamiltonian `(ω+3k)·L + k·Σ L_i² + g·I_N`.
///
/// Within a sector the total angular momentum is the constant L, so the
/// first term is a diagonal shift; `Σ L_i²` is diagonal in the occupation
/// basis.
pub fn assemble_hamiltonian(
    basis: &SectorBasis,
    params: &HamiltonianParams,
) -> Result<SparseSymmetricOperator, OperatorError> {
    assemble_hamiltonian_limited(basis, params, DEFAULT_MAX_DIM)
}

pub fn assemble_hamiltonian_limited(
    basis: &SectorBasis,
    params: &HamiltonianParams,
    max_dim: usize,
) -> Result<SparseSymmetricOperator, OperatorError> {
    params.validate()?;
    let mut op = if params.g != 0.0 {
        let mut interaction = assemble_interaction_limited(basis, max_dim)?;
        for (_, _, v) in interaction.entries.iter_mut() {
            *v *= params.g;
        }
        interaction
    } else {
        let dim = basis.dim();
        if dim > max_dim {
            return Err(OperatorError::ResourceLimit { dim, max: max_dim });
        }
        SparseSymmetricOperator { dim, entries: Vec::new(), basis_tag: (basis.n(), basis.l()) }
    };

    let shift = (params.omega + 3.0 * params.k) * basis.l() as f64;
    let mut diagonal: Vec<f64> = vec![shift; basis.dim()];
    if params.k != 0.0 {
        for (i, state) in basis.states().iter().enumerate() {
            diagonal[i] += params.k * state.momentum_squared_sum() as f64;
        }
    }

    // merge the diagonal into the stored triangle
    let mut has_diag = vec![false; op.dim];
    for (r, c, v) in op.entries.iter_mut() {
        if r == c {
            *v += diagonal[*r as usize];
            has_diag[*r as usize] = true;
        }
    }
    for (i, &present) in has_diag.iter().enumerate() {
        if !present && diagonal[i] != 0.0 {
            op.entries.push((i as u32, i as u32, diagonal[i]));
        }
    }
    op.sort_entries();
    Ok(op)
}

// ---------------------------------------------------------------------------
// Binary sector cache
//
// Little-endian layout:
//   magic   8 bytes  = b"LLLSECT1"
//   n       u32
//   l       u32
//   dim     u64
//   nnz     u64
//   then nnz triplets of (row u32, col u32, value f64)
//
// Reload is bit-identical: values round-trip through to_bits().
// ---------------------------------------------------------------------------

const CACHE_MAGIC: &[u8; 8] = b"LLLSECT1";

/// Serialize an assembled operator to the documented binary layout.
pub fn write_operator<W: Write>(
    op: &SparseSymmetricOperator,
    w: &mut W,
) -> Result<(), OperatorError> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&op.basis_tag.0.to_le_bytes())?;
    w.write_all(&op.basis_tag.1.to_le_bytes())?;
    w.write_all(&(op.dim as u64).to_le_bytes())?;
    w.write_all(&(op.entries.len() as u64).to_le_bytes())?;
    for &(r, c, v) in &op.entries {
        w.write_all(&r.to_le_bytes())?;
        w.write_all(&c.to_le_bytes())?;
        w.write_all(&v.to_bits().to_le_bytes())?;
    }
    Ok(())
}

/// Read an operator back from the binary layout written by [`write_operator`].
pub fn read_operator<R: Read>(r: &mut R) -> Result<SparseSymmetricOperator, OperatorError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(OperatorError::MalformedCache("bad magic".into()));
    }
    let n = read_u32(r)?;
    let l = read_u32(r)?;
    let dim = read_u64(r)? as usize;
    let nnz = read_u64(r)? as usize;
    let mut entries = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let row = read_u32(r)?;
        let col = read_u32(r)?;
        let mut vb = [0u8; 8];
        r.read_exact(&mut vb)?;
        let value = f64::from_bits(u64::from_le_bytes(vb));
        if row > col || col as usize >= dim {
            return Err(OperatorError::MalformedCache(format!(
                "triplet ({row},{col}) outside the stored upper triangle"
            )));
        }
        entries.push((row, col, value));
    }
    Ok(SparseSymmetricOperator { dim, entries, basis_tag: (n, l) })
}

/// Conventional cache file name for a sector.
pub fn cache_file_name(n: u32, l: u32) -> String {
    format!("sector_n{n}_l{l}.bin")
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, OperatorError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, OperatorError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
