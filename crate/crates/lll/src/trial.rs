//! Laughlin and giant-vortex trial states as exact Fock vectors.
//!
//! The Laughlin state `∏_{i<j}(z_i - z_j)²` is expanded over monomial
//! symmetric polynomials with exact integer coefficients, then converted
//! to normalized bosonic occupation amplitudes. Multiplying by the giant
//! vortex factor `∏_j z_j^m` shifts every particle orbital by m, so the
//! same integer expansion serves the whole family.
//!
//! The expansion uses the antisymmetric-square identity. Writing the
//! Vandermonde determinant as a signed sum over permutations of the
//! staircase exponent δ = (N-1, …, 1, 0), the squared product collapses
//! to a single permutation sum:
//!
//! `coeff(λ) = (Π_v mult_v!) · Σ_ρ sgn(ρ) [sort(δ + ρδ) = λ]`
//!
//! where `mult_v` counts repeated values in the sorted exponent vector λ.
//! One pass over N! permutations yields every coefficient at once, in
//! exact (overflow-checked) integer arithmetic.

use crate::basis::{FockVector, Occupation, SectorBasis};
use crate::math::ln_factorial;
use crate::operators::HamiltonianParams;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

/// Largest particle number the exact polynomial expansion will attempt.
pub const DEFAULT_N_MAX: u32 = 8;

#[derive(Debug, Error, PartialEq)]
pub enum TrialError {
    #[error("Laughlin expansion needs at least 2 particles, got {0}")]
    TooFewParticles(u32),
    #[error("N = {n} exceeds the expansion limit {max}")]
    ResourceLimit { n: u32, max: u32 },
    #[error("vortex-charge optimization with ω = {omega} < 0 requires k > 0")]
    UnstableParams { omega: f64 },
}

/// Energy of a giant-vortex trial state under the full Hamiltonian.
///
/// The interaction part is exactly zero (the state carries the Laughlin
/// factor and lies in Ker I_N), so the energy is purely kinetic/trap.
#[derive(Debug, Clone, Serialize)]
pub struct TrialEnergyRecord {
    pub m: u32,
    /// Sector momentum N(N-1) + N·m.
    pub l_m: u64,
    pub energy: f64,
    /// ⟨Σ_i L_i²⟩ over the Fock expansion.
    pub l2_expect: f64,
}

/// Integer monomial-symmetric expansion of `∏_{i<j}(z_i - z_j)²`:
/// sorted exponent partition → coefficient.
fn vandermonde_squared_coeffs(n: u32) -> HashMap<Vec<u32>, i64> {
    let n = n as usize;
    let staircase: Vec<u32> = (0..n as u32).rev().collect();

    // iterate over all permutations ρ with Heap's algorithm, tracking parity
    let mut accumulator: HashMap<Vec<u32>, i64> = HashMap::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut sign = 1i64;

    let record = |perm: &[usize], sign: i64, acc: &mut HashMap<Vec<u32>, i64>| {
        let mut exponents: Vec<u32> = (0..n).map(|i| staircase[i] + staircase[perm[i]]).collect();
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        let slot = acc.entry(exponents).or_insert(0);
        *slot = slot.checked_add(sign).expect("coefficient overflow");
    };

    record(&perm, sign, &mut accumulator);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            record(&perm, sign, &mut accumulator);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    // signed counts → monomial coefficients: multiply by Π mult_v! and drop
    // the cancelled exponent vectors
    let mut coeffs = HashMap::new();
    for (exponents, signed_count) in accumulator {
        if signed_count == 0 {
            continue;
        }
        let mut mult_factor = 1i64;
        let mut run = 1i64;
        for w in exponents.windows(2) {
            if w[0] == w[1] {
                run += 1;
                mult_factor = mult_factor.checked_mul(run).expect("coefficient overflow");
            } else {
                run = 1;
            }
        }
        coeffs.insert(
            exponents,
            signed_count.checked_mul(mult_factor).expect("coefficient overflow"),
        );
    }
    coeffs
}

/// Normalized occupation amplitudes of `∏ z_j^m ∏_{i<j}(z_i - z_j)²`.
///
/// A monomial coefficient c_λ maps to the occupation amplitude
/// `c_λ · sqrt(Π_i (λ_i+m)! / Π_ℓ n_ℓ!)`; the orbital normalizations
/// supply the factorials of the shifted exponents and the bosonic
/// symmetrization the `Π n_ℓ!`. The support stays the size of the
/// Laughlin expansion for every m, so no sector enumeration is needed.
pub fn expansion_terms(n: u32, m: u32) -> Result<Vec<(Occupation, f64)>, TrialError> {
    if n < 2 {
        return Err(TrialError::TooFewParticles(n));
    }
    if n > DEFAULT_N_MAX {
        return Err(TrialError::ResourceLimit { n, max: DEFAULT_N_MAX });
    }
    let coeffs = vandermonde_squared_coeffs(n);
    // log-magnitude per term: ln|c_λ| + ½(Σ ln (λ_i+m)! - Σ ln n_ℓ!);
    // shifting by the maximum keeps the exponentials finite for any m
    let mut raw: Vec<(Occupation, f64, f64)> = Vec::with_capacity(coeffs.len());
    for (exponents, c) in coeffs {
        let shifted: Vec<u32> = exponents.iter().map(|&e| e + m).collect();
        let occ = Occupation::from_parts(shifted);
        let mut log_mag = (c.abs() as f64).ln();
        for &e in occ.parts() {
            log_mag += 0.5 * ln_factorial(e as usize);
        }
        for (_, count) in occ.counts() {
            log_mag -= 0.5 * ln_factorial(count as usize);
        }
        raw.push((occ, log_mag, if c > 0 { 1.0 } else { -1.0 }));
    }
    // deterministic order before accumulating the norm
    raw.sort_by(|a, b| b.0.parts().cmp(a.0.parts()));
    let shift = raw.iter().map(|(_, w, _)| *w).fold(f64::NEG_INFINITY, f64::max);
    let mut terms: Vec<(Occupation, f64)> = Vec::with_capacity(raw.len());
    let mut norm2 = 0.0;
    for (occ, log_mag, sign) in raw {
        let amplitude = sign * (log_mag - shift).exp();
        norm2 += amplitude * amplitude;
        terms.push((occ, amplitude));
    }
    let norm = norm2.sqrt();
    for (_, a) in &mut terms {
        *a /= norm;
    }
    Ok(terms)
}

/// Densify the expansion into a sector Fock vector (small m only: this
/// enumerates the whole sector).
fn vortex_times_laughlin(n: u32, m: u32) -> Result<(SectorBasis, FockVector), TrialError> {
    let terms = expansion_terms(n, m)?;
    let l = n * (n - 1) + n * m;
    let basis = SectorBasis::new(n, l).expect("n >= 2");
    let mut amplitudes = vec![0.0f64; basis.dim()];
    for (occ, amplitude) in terms {
        let idx = basis.index_of(&occ).expect("expansion monomials have total degree N(N-1)+Nm");
        amplitudes[idx] = amplitude;
    }
    let vector = FockVector::new(&basis, amplitudes);
    Ok((basis, vector))
}

/// Normalized Fock expansion of the Laughlin state `∏_{i<j}(z_i - z_j)²`
/// in the sector L = N(N-1).
pub fn laughlin_fock(n: u32) -> Result<FockVector, TrialError> {
    Ok(vortex_times_laughlin(n, 0)?.1)
}

/// Normalized Fock expansion of the giant-vortex state
/// `∏_j z_j^m ∏_{i<j}(z_i - z_j)²` in the sector L = N(N-1) + Nm.
pub fn giant_vortex_fock(n: u32, m: u32) -> Result<FockVector, TrialError> {
    Ok(vortex_times_laughlin(n, m)?.1)
}

/// Exact trial-state energy under `(ω+3k)L + k ΣL_i² + g I_N`.
///
/// `E = (ω+3k)(N(N-1)+Nm) + k·⟨ΣL_i²⟩`; the g-term vanishes identically.
pub fn trial_energy(
    n: u32,
    m: u32,
    params: &HamiltonianParams,
) -> Result<TrialEnergyRecord, TrialError> {
    let terms = expansion_terms(n, m)?;
    let l_m = (n * (n - 1) + n * m) as u64;
    let l2_expect: f64 =
        terms.iter().map(|(occ, a)| a * a * occ.momentum_squared_sum() as f64).sum();
    let energy = (params.omega + 3.0 * params.k) * l_m as f64 + params.k * l2_expect;
    Ok(TrialEnergyRecord { m, l_m, energy, l2_expect })
}

/// Closed-form optimal vortex charge: 0 for ω ≥ -2kN, else the rounded
/// `|ω|/(2k) - N`.
pub fn optimal_m(omega: f64, k: f64, n: u32) -> Result<u32, TrialError> {
    if omega >= -2.0 * k * n as f64 {
        return Ok(0);
    }
    // here ω < 0 strictly, so a vanishing k has no stable optimum
    if k <= 0.0 {
        return Err(TrialError::UnstableParams { omega });
    }
    let m_star = omega.abs() / (2.0 * k) - n as f64;
    Ok(m_star.round().max(0.0) as u32)
}

/// Numeric oracle for [`optimal_m`]: minimize the exact trial energy over
/// integer m in a bracket wide enough to contain the closed-form optimum.
pub fn numeric_optimal_m(omega: f64, k: f64, n: u32) -> Result<u32, TrialError> {
    if omega < 0.0 && k <= 0.0 {
        return Err(TrialError::UnstableParams { omega });
    }
    let closed = optimal_m(omega, k, n)?;
    let hi = closed + n.max(10);
    let params = HamiltonianParams { omega, g: 0.0, k };
    let mut best = (0u32, f64::INFINITY);
    for m in 0..=hi {
        let record = trial_energy(n, m, &params)?;
        if record.energy < best.1 {
            best = (m, record.energy);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::assemble_interaction;
    use crate::spectra::{correlation_defect, kernel_basis, lowest_eigenpairs};

    /// Brute-force oracle: expand ∏_{i<j}(z_i - z_j)² by repeated sparse
    /// multiplication over dense exponent vectors (no symmetry tricks).
    fn brute_force_expansion(n: usize) -> HashMap<Vec<u32>, i64> {
        let mut poly: HashMap<Vec<u32>, i64> = HashMap::new();
        poly.insert(vec![0; n], 1);
        for i in 0..n {
            for j in (i + 1)..n {
                // multiply twice by (z_i - z_j)
                for _ in 0..2 {
                    let mut next: HashMap<Vec<u32>, i64> = HashMap::new();
                    for (expo, c) in &poly {
                        let mut e1 = expo.clone();
                        e1[i] += 1;
                        *next.entry(e1).or_insert(0) += c;
                        let mut e2 = expo.clone();
                        e2[j] += 1;
                        *next.entry(e2).or_insert(0) -= c;
                    }
                    next.retain(|_, c| *c != 0);
                    poly = next;
                }
            }
        }
        // collapse to sorted representative exponents; all permutations of
        // an exponent vector must carry the same coefficient
        let mut out: HashMap<Vec<u32>, i64> = HashMap::new();
        for (mut expo, c) in poly {
            expo.sort_unstable_by(|a, b| b.cmp(a));
            if let Some(previous) = out.insert(expo, c) {
                assert_eq!(previous, c, "expansion is not symmetric");
            }
        }
        out
    }

    #[test]
    fn expansion_matches_brute_force() {
        for n in 2..=4u32 {
            let fast = vandermonde_squared_coeffs(n);
            let brute = brute_force_expansion(n as usize);
            assert_eq!(fast, brute, "coefficient table mismatch at N={n}");
        }
    }

    #[test]
    fn two_particle_laughlin_amplitudes() {
        // (z1-z2)² = z1² - 2 z1 z2 + z2²: amplitudes ∝ {sqrt(2), -sqrt(2)}
        let v = laughlin_fock(2).unwrap();
        let basis = SectorBasis::new(2, 2).unwrap();
        assert_eq!(v.basis_tag(), (2, 2));
        let i20 = basis.index_of(&Occupation::from_parts(vec![2, 0])).unwrap();
        let i11 = basis.index_of(&Occupation::from_parts(vec![1, 1])).unwrap();
        let (a, b) = (v.coeffs()[i20], v.coeffs()[i11]);
        assert!((a.abs() - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((b.abs() - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((a / b + 1.0).abs() < 1e-14, "amplitude ratio must be -1");
    }

    #[test]
    fn laughlin_is_interaction_free() {
        for n in 2..=6u32 {
            let v = laughlin_fock(n).unwrap();
            let basis = SectorBasis::new(n, n * (n - 1)).unwrap();
            let op = assemble_interaction(&basis).unwrap();
            let expectation = op.quadratic_form(v.coeffs());
            assert!(expectation.abs() <= 1e-10, "N={n}: ⟨Ψ|I|Ψ⟩ = {expectation}");
        }
    }

    #[test]
    fn laughlin_momentum_is_n_n_minus_1() {
        for n in 2..=6u32 {
            let v = laughlin_fock(n).unwrap();
            assert_eq!(v.basis_tag(), (n, n * (n - 1)));
        }
    }

    #[test]
    fn giant_vortex_reduces_to_laughlin_at_m0() {
        for n in 2..=5u32 {
            let a = laughlin_fock(n).unwrap();
            let b = giant_vortex_fock(n, 0).unwrap();
            assert_eq!(a.basis_tag(), b.basis_tag());
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn giant_vortex_momentum_and_kernel_membership() {
        for n in 2..=5u32 {
            for m in 0..=4u32 {
                let v = giant_vortex_fock(n, m).unwrap();
                assert_eq!(v.basis_tag(), (n, n * (n - 1) + n * m));
                let basis = SectorBasis::new(n, n * (n - 1) + n * m).unwrap();
                let op = assemble_interaction(&basis).unwrap();
                assert!(op.quadratic_form(v.coeffs()).abs() <= 1e-10, "N={n}, m={m}");
            }
        }
    }

    #[test]
    fn giant_vortex_defect_is_tiny() {
        for n in 2..=5u32 {
            for m in 0..=4u32 {
                let l = n * (n - 1) + n * m;
                let v = giant_vortex_fock(n, m).unwrap();
                let kernel = kernel_basis(n, l).unwrap();
                let defect = correlation_defect(&v, &kernel).unwrap();
                // the measurable defect bottoms out at the double-precision
                // angle sqrt(ε‖I‖/Δ) between the exact kernel and the
                // numerical kernel of the rounded assembly; the largest
                // sectors here (dim ≳ 1200) sit at ~2e-8
                let dim = crate::basis::sector_dimension(n, l).unwrap();
                let tol = if dim > 1000 { 5e-8 } else { 1e-8 };
                assert!(defect <= tol, "N={n}, m={m}: defect {defect} (dim {dim})");
            }
        }
    }

    #[test]
    fn trial_energy_momentum_term_only() {
        let params = HamiltonianParams { omega: 0.37, g: 2.0, k: 0.0 };
        for (n, m) in [(3u32, 0u32), (4, 2), (5, 1)] {
            let record = trial_energy(n, m, &params).unwrap();
            let l_m = (n * (n - 1) + n * m) as f64;
            assert!((record.energy - 0.37 * l_m).abs() < 1e-12);
        }
    }

    #[test]
    fn trial_l2_matches_quadratic_form() {
        // independent route: ⟨Σ L_i²⟩ = ⟨v|H(ω=0,g=0,k=1)|v⟩ - 3L
        for (n, m) in [(2u32, 0u32), (3, 1), (4, 0)] {
            let record =
                trial_energy(n, m, &HamiltonianParams { omega: 0.0, g: 0.0, k: 1.0 }).unwrap();
            let basis = SectorBasis::new(n, (record.l_m) as u32).unwrap();
            let h = crate::operators::assemble_hamiltonian(
                &basis,
                &HamiltonianParams { omega: 0.0, g: 0.0, k: 1.0 },
            )
            .unwrap();
            let v = giant_vortex_fock(n, m).unwrap();
            let quad = h.quadratic_form(v.coeffs());
            let l2 = quad - 3.0 * record.l_m as f64;
            assert!(
                (l2 - record.l2_expect).abs() < 1e-10,
                "N={n}, m={m}: {l2} vs {}",
                record.l2_expect
            );
        }
    }

    #[test]
    fn trial_energy_respects_lower_bound() {
        let params = HamiltonianParams { omega: -0.4, g: 1.0, k: 0.05 };
        for m in 0..=6u32 {
            let n = 4u32;
            let record = trial_energy(n, m, &params).unwrap();
            let l = record.l_m as f64;
            let lb = (params.omega + 3.0 * params.k) * l + params.k * l * l / n as f64;
            assert!(record.energy >= lb - 1e-9, "m={m}");
        }
    }

    #[test]
    fn laughlin_is_ground_state_overlap() {
        // at k=0 and a small slope the exact ground vector in the Laughlin
        // sector is the Laughlin state itself (one-dimensional kernel)
        for n in 2..=5u32 {
            let l = n * (n - 1);
            let basis = SectorBasis::new(n, l).unwrap();
            let op = assemble_interaction(&basis).unwrap();
            let (e0, ground) = lowest_eigenpairs(&op, 1).unwrap().remove(0);
            assert!(e0.abs() < 1e-10);
            let laughlin = laughlin_fock(n).unwrap();
            let overlap = ground.dot(&laughlin).abs();
            assert!(overlap >= 1.0 - 1e-8, "N={n}: |⟨ground, Laughlin⟩| = {overlap}");
        }
    }

    #[test]
    fn optimal_m_closed_form_examples() {
        assert_eq!(optimal_m(0.1, 0.02, 6).unwrap(), 0);
        // |ω|/(2k) - N = 4/(0.02) - 50 = 200 - 50 = 150
        assert_eq!(optimal_m(-4.0, 0.01, 50).unwrap(), 150);
        // boundary ω = -2kN: both branches give 0
        assert_eq!(optimal_m(-0.24, 0.02, 6).unwrap(), 0);
    }

    #[test]
    fn optimal_m_rejects_unstable() {
        assert_eq!(
            optimal_m(-1.0, 0.0, 4).unwrap_err(),
            TrialError::UnstableParams { omega: -1.0 }
        );
        assert!(numeric_optimal_m(-1.0, 0.0, 4).is_err());
    }

    #[test]
    fn closed_form_tracks_numeric_optimum() {
        let n = 6u32;
        for &k in &[0.01, 0.05, 0.2] {
            for &omega in &[0.3, 0.0, -0.1, -0.3, -0.8, -2.0, -4.0] {
                let closed = optimal_m(omega, k, n).unwrap() as i64;
                let numeric = numeric_optimal_m(omega, k, n).unwrap() as i64;
                assert!(
                    (closed - numeric).abs() <= 1,
                    "ω={omega}, k={k}: closed {closed} vs numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn quasi_hole_momentum_scale() {
        // deep in the giant-vortex branch the optimal momentum is the
        // quasi-hole scale N|ω|/(2k), up to O(N²); this is where the
        // lower-bound parabola (ω+3k)L + kL²/N bottoms out
        let (n, omega, k) = (5u32, -2.0f64, 0.01f64);
        let m = optimal_m(omega, k, n).unwrap();
        let l_opt = (n * (n - 1) + n * m) as f64;
        let l_qh = n as f64 * omega.abs() / (2.0 * k);
        assert!(
            (l_opt - l_qh).abs() <= (n * n) as f64 + n as f64,
            "L_opt = {l_opt}, L_qh = {l_qh}"
        );
        // and it is far beyond the Laughlin momentum
        assert!(l_opt > (n * n) as f64);
    }

    #[test]
    fn expansion_limits() {
        assert_eq!(laughlin_fock(1).unwrap_err(), TrialError::TooFewParticles(1));
        assert_eq!(
            laughlin_fock(9).unwrap_err(),
            TrialError::ResourceLimit { n: 9, max: DEFAULT_N_MAX }
        );
    }
}
