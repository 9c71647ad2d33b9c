//! Mean-field free energy of the plasma and its limiting profiles.
//!
//! The one-particle free energy functional of the 2D log-gas at
//! temperature 1/N is
//!
//! `E[ρ] = ∫ W_m ρ - 2 ∬ ρ(z) log|z-z'| ρ(z') + N⁻¹ ∫ ρ log ρ`,
//!
//! with the external potential `W_m(z) = |z|² - (2m/N) log|z|`. Dropping
//! the entropy term gives the incompressible limit: the flat profile
//! `(2π)⁻¹` on the annulus `√(m/N) ≤ r ≤ √(2+m/N)`. Dropping the
//! electrostatic term instead gives the thermal profile
//! `ρ ∝ r^{2m} e^{-N r²}`. The numeric minimizer iterates the first-order
//! condition `ρ ∝ exp(-N(W_m + 4Φ_ρ - μ))` with damping, where
//! `Φ_ρ(r) = -2π ∫ log(max(r,r')) ρ(r') r' dr'` is the angle-averaged
//! Coulomb potential.

use crate::grid::RadialGrid;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("fixed point did not converge: sup-norm change {residual:.3e} after {iterations} iterations (tolerance {tolerance:.3e})")]
    NonConvergence { residual: f64, iterations: usize, tolerance: f64 },
    #[error("thermal profile needs m >= 1")]
    ThermalNeedsCharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Annulus,
    Thermal,
    Numeric,
}

/// A radial density with its free-energy bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    /// Chemical potential fixing the normalization (0 for the closed
    /// forms, which are normalized by construction).
    pub mu: f64,
    /// Value of the free energy functional on this profile.
    pub energy: f64,
    pub regime: Regime,
    pub iterations: usize,
    /// Set when the grid cannot resolve the profile features (the 1/√N
    /// edge layer and the inner radius).
    pub resolution_warning: Option<String>,
}

impl MeanFieldProfile {
    /// Midpoint of the cell with the largest density.
    pub fn peak_radius(&self) -> f64 {
        let (i, _) =
            self.values.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
        self.grid.midpoint(i)
    }

    /// Maximum density value.
    pub fn peak_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Inner and outer radii of the incompressible annulus.
pub fn annulus_radii(n: usize, m: u32) -> (f64, f64) {
    let ratio = m as f64 / n as f64;
    (ratio.sqrt(), (2.0 + ratio).sqrt())
}

/// The incompressible-limit profile: density `(2π)⁻¹` between the annulus
/// radii, zero outside, represented by exact cell averages so the grid
/// quadrature integrates it to 1 exactly.
pub fn annulus_profile(n: usize, m: u32, grid: &RadialGrid) -> MeanFieldProfile {
    let (r_minus, r_plus) = annulus_radii(n, m);
    let values: Vec<f64> = (0..grid.cells())
        .map(|i| {
            let (lo, hi) = grid.cell_edges(i);
            // overlap of [lo, hi] with [r_minus, r_plus] in area measure
            let a = lo.max(r_minus);
            let b = hi.min(r_plus);
            if b <= a {
                0.0
            } else {
                let overlap_area = PI * (b * b - a * a);
                (1.0 / (2.0 * PI)) * overlap_area / grid.cell_area(i)
            }
        })
        .collect();
    let energy = free_energy(n, m, grid, &values).total;
    MeanFieldProfile {
        grid: grid.clone(),
        values,
        mu: 0.0,
        energy,
        regime: Regime::Annulus,
        iterations: 0,
        resolution_warning: resolution_check(n, m, grid),
    }
}

/// The entropy-dominated profile `ρ ∝ r^{2m} e^{-N r²}`, normalized on
/// the grid in log space so large m neither overflows nor underflows.
pub fn thermal_profile(
    n: usize,
    m: u32,
    grid: &RadialGrid,
) -> Result<MeanFieldProfile, MeanFieldError> {
    if m == 0 {
        return Err(MeanFieldError::ThermalNeedsCharge);
    }
    let log_density: Vec<f64> = (0..grid.cells())
        .map(|i| {
            let r = grid.midpoint(i);
            2.0 * m as f64 * r.ln() - n as f64 * r * r
        })
        .collect();
    let values = normalize_log_density(grid, &log_density);
    let energy = free_energy(n, m, grid, &values).total;
    Ok(MeanFieldProfile {
        grid: grid.clone(),
        values,
        mu: 0.0,
        energy,
        regime: Regime::Thermal,
        iterations: 0,
        resolution_warning: resolution_check(n, m, grid),
    })
}

/// Options for the fixed-point minimizer. The 0.5 damping on log-density
/// updates is the frozen default: the bare iteration oscillates at
/// temperature 1/N.
#[derive(Debug, Clone, Copy)]
pub struct MfOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for MfOptions {
    fn default() -> Self {
        MfOptions { tol: 1e-9, max_iterations: 40_000, damping: 0.5 }
    }
}

/// Free-energy value split into its three terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeEnergyTerms {
    pub potential: f64,
    pub interaction: f64,
    pub entropy: f64,
    pub total: f64,
}

/// Evaluate the free energy functional on a grid profile.
pub fn free_energy(n: usize, m: u32, grid: &RadialGrid, values: &[f64]) -> FreeEnergyTerms {
    let phi = coulomb_potential(grid, values);
    free_energy_with_phi(n, m, grid, values, &phi)
}

fn free_energy_with_phi(
    n: usize,
    m: u32,
    grid: &RadialGrid,
    values: &[f64],
    phi: &[f64],
) -> FreeEnergyTerms {
    let nf = n as f64;
    let mut potential = 0.0;
    let mut interaction = 0.0;
    let mut entropy = 0.0;
    for i in 0..grid.cells() {
        let area = grid.cell_area(i);
        let rho = values[i];
        if rho > 0.0 {
            potential += external_potential(nf, m, grid.midpoint(i)) * rho * area;
            interaction += 2.0 * rho * phi[i] * area;
            entropy += rho * rho.ln() * area / nf;
        }
    }
    FreeEnergyTerms { potential, interaction, entropy, total: potential + interaction + entropy }
}

/// `W_m(r) = r² - (2m/N) log r`.
fn external_potential(n: f64, m: u32, r: f64) -> f64 {
    let mut w = r * r;
    if m > 0 {
        w -= (2.0 * m as f64 / n) * r.ln();
    }
    w
}

/// Angle-averaged Coulomb potential `Φ_ρ(r_i) = -Σ_j log(max(r_i,r_j))
/// ρ_j area_j` (midpoint quadrature of the exact kernel reduction).
pub fn coulomb_potential(grid: &RadialGrid, values: &[f64]) -> Vec<f64> {
    let k = grid.cells();
    let mut phi = vec![0.0; k];
    // split at the diagonal: for j <= i the kernel is log r_i, else log r_j
    let mut inner_mass = 0.0; // Σ_{j<=i} ρ_j area_j
    let masses: Vec<f64> = (0..k).map(|j| values[j] * grid.cell_area(j)).collect();
    let mut outer_sum = 0.0; // Σ_{j>i} log(r_j) ρ_j area_j
    for (j, mass) in masses.iter().enumerate() {
        outer_sum += grid.midpoint(j).ln() * mass;
    }
    for i in 0..k {
        inner_mass += masses[i];
        outer_sum -= grid.midpoint(i).ln() * masses[i];
        phi[i] = -(grid.midpoint(i).ln() * inner_mass + outer_sum);
    }
    phi
}

fn normalize_log_density(grid: &RadialGrid, log_density: &[f64]) -> Vec<f64> {
    let shift = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 =
        log_density.iter().enumerate().map(|(i, s)| (s - shift).exp() * grid.cell_area(i)).sum();
    log_density.iter().map(|s| (s - shift).exp() / z).collect()
}

fn resolution_check(n: usize, m: u32, grid: &RadialGrid) -> Option<String> {
    let h = grid.step();
    let layer = 1.0 / (n as f64).sqrt();
    if h > 0.25 * layer {
        return Some(format!(
            "grid step {h:.4} does not resolve the 1/sqrt(N) edge layer {layer:.4}"
        ));
    }
    let (r_minus, r_plus) = annulus_radii(n, m);
    if m > 0 && r_minus < 2.0 * h {
        return Some(format!("inner radius {r_minus:.4} is below two grid steps"));
    }
    if r_plus + 2.0 * layer > grid.r_max() {
        return Some(format!(
            "outer radius {r_plus:.4} too close to the grid end {:.4}",
            grid.r_max()
        ));
    }
    None
}

/// Minimize the mean-field free energy by damped fixed-point iteration of
/// `ρ ∝ exp(-N(W_m + 4Φ_ρ - μ))`, with μ fixed by normalization at every
/// step. The free energy is checked to descend monotonically (up to
/// rounding slack); convergence is sup-norm stationarity of the density.
pub fn minimize_mf(
    n: usize,
    m: u32,
    grid: &RadialGrid,
    opts: &MfOptions,
) -> Result<MeanFieldProfile, MeanFieldError> {
    let nf = n as f64;
    let k = grid.cells();
    let w: Vec<f64> = (0..k).map(|i| external_potential(nf, m, grid.midpoint(i))).collect();

    // start from the best of the closed forms and the bare Boltzmann weight
    let mut values = best_start(n, m, grid, &w);

    let mut phi = coulomb_potential(grid, &values);
    let mut energy = free_energy_with_phi(n, m, grid, &values, &phi).total;
    // stationarity is measured by the undamped fixed-point residual
    // sup|ρ* - ρ|, which does not shrink with the damping factor
    let mut residual = f64::INFINITY;
    // adaptive relaxation: the configured damping is the ceiling; the
    // factor halves whenever a step would raise the energy, and also when
    // the fixed-point residual stagnates (a marginally stable cycle can
    // hide inside the energy rounding band without ever raising it)
    let mut alpha = opts.damping;
    const ALPHA_FLOOR: f64 = 1e-5;
    let mut best_residual = f64::INFINITY;
    let mut since_improvement = 0usize;

    for iteration in 0..opts.max_iterations {
        // exact fixed-point target for the current Φ
        let target: Vec<f64> = (0..k).map(|i| -nf * (w[i] + 4.0 * phi[i])).collect();
        let shift = target.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 =
            target.iter().enumerate().map(|(i, s)| (s - shift).exp() * grid.cell_area(i)).sum();
        let log_z = z.ln() + shift;
        let mu = -log_z / nf;

        // undamped fixed-point residual: distance to the normalized target
        let fp_values =
            normalize_log_density(grid, &target.iter().map(|s| s - log_z).collect::<Vec<f64>>());
        residual = fp_values.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual < opts.tol {
            let terms = free_energy_with_phi(n, m, grid, &values, &phi);
            let regime = classify_regime(&terms);
            return Ok(MeanFieldProfile {
                grid: grid.clone(),
                values,
                mu,
                energy: terms.total,
                regime,
                iterations: iteration,
                resolution_warning: resolution_check(n, m, grid),
            });
        }

        // backtrack the damping until the free energy descends; the
        // monotonicity invariant then holds by construction. Mixing is
        // linear in the density: a convex combination of normalized
        // densities stays normalized, and mass crosses sharp support
        // edges at rate α instead of creeping through log space.
        let slack = 1e-12 * (1.0 + energy.abs());
        let accepted = loop {
            let trial_values: Vec<f64> =
                (0..k).map(|i| (1.0 - alpha) * values[i] + alpha * fp_values[i]).collect();
            let trial_phi = coulomb_potential(grid, &trial_values);
            let trial_energy = free_energy_with_phi(n, m, grid, &trial_values, &trial_phi).total;
            if trial_energy <= energy + slack {
                break Some((trial_values, trial_phi, trial_energy));
            }
            alpha *= 0.5;
            if alpha < ALPHA_FLOOR {
                break None;
            }
        };
        let Some((trial_values, trial_phi, trial_energy)) = accepted else {
            // no descent direction resolvable above rounding
            return Err(MeanFieldError::NonConvergence {
                residual,
                iterations: iteration,
                tolerance: opts.tol,
            });
        };
        assert!(trial_energy <= energy + slack, "free energy rose at iteration {iteration}");
        values = trial_values;
        phi = trial_phi;
        energy = trial_energy;

        // stagnation of the fixed-point residual: halve the damping to
        // kill marginal cycles; regrow slowly after sustained progress
        if residual < 0.98 * best_residual {
            best_residual = residual;
            since_improvement = 0;
            alpha = (alpha * 1.02).min(opts.damping);
        } else {
            since_improvement += 1;
            if since_improvement >= 60 {
                alpha = (alpha * 0.5).max(ALPHA_FLOOR);
                since_improvement = 0;
            }
        }
    }
    Err(MeanFieldError::NonConvergence {
        residual,
        iterations: opts.max_iterations,
        tolerance: opts.tol,
    })
}

/// Lowest-energy starting guess among the annulus, the thermal profile,
/// and the bare Boltzmann weight e^{-NW}.
fn best_start(n: usize, m: u32, grid: &RadialGrid, w: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    let mut candidates: Vec<Vec<f64>> = vec![annulus_profile(n, m, grid).values];
    if m >= 1 {
        if let Ok(thermal) = thermal_profile(n, m, grid) {
            candidates.push(thermal.values);
        }
    }
    candidates
        .push(normalize_log_density(grid, &w.iter().map(|wi| -nf * wi).collect::<Vec<f64>>()));

    candidates
        .into_iter()
        .min_by(|a, b| {
            let ea = free_energy(n, m, grid, a).total;
            let eb = free_energy(n, m, grid, b).total;
            ea.partial_cmp(&eb).unwrap()
        })
        .unwrap()
}

/// Diagnostic tag: interaction below 10% of the energy magnitude reads
/// as the thermal regime, entropy below 1% as the incompressible one.
/// The thermal branch is checked first: at large vortex charge the
/// external potential dominates the total, which would make the entropy
/// fraction vanish even deep in the thermal phase.
fn classify_regime(terms: &FreeEnergyTerms) -> Regime {
    let scale = terms.total.abs().max(f64::MIN_POSITIVE);
    if terms.interaction.abs() < 0.10 * scale {
        Regime::Thermal
    } else if terms.entropy.abs() < 0.01 * scale {
        Regime::Annulus
    } else {
        Regime::Numeric
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn default_grid(n: usize, m: u32) -> RadialGrid {
        let (_, r_plus) = annulus_radii(n, m);
        let r_max = r_plus + 5.0 / (n as f64).sqrt();
        let layer = 1.0 / (n as f64).sqrt();
        let cells = ((r_max / (0.2 * layer)).ceil() as usize).max(128);
        RadialGrid::new(r_max, cells)
    }

    #[test]
    fn annulus_m0_is_flat_disk() {
        let grid = default_grid(64, 0);
        let profile = annulus_profile(64, 0, &grid);
        // bulk cells carry exactly (2π)⁻¹
        let bulk = grid.cell_of(0.7).unwrap();
        assert_eq!(profile.values[bulk], 1.0 / (2.0 * PI));
        // normalization exact up to float summation
        assert!((grid.integrate(&profile.values) - 1.0).abs() < 1e-12);
        // support edge at √2
        let edge_cell = grid.cell_of(2f64.sqrt() + 2.0 * grid.step()).unwrap();
        assert_eq!(profile.values[edge_cell], 0.0);
    }

    #[test]
    fn annulus_radii_examples() {
        let (lo, hi) = annulus_radii(64, 128);
        assert!((lo - 2f64.sqrt()).abs() < 1e-14);
        assert!((hi - 2.0).abs() < 1e-14);
        // area × height = 1 for every m: R₊² - R₋² = 2
        for m in [0u32, 5, 64, 500] {
            let (lo, hi) = annulus_radii(32, m);
            assert!((hi * hi - lo * lo - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn annulus_normalization_for_charged_case() {
        let grid = default_grid(64, 128);
        let profile = annulus_profile(64, 128, &grid);
        assert!((grid.integrate(&profile.values) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_profile_peaks_at_sqrt_m_over_n() {
        let (n, m) = (16usize, 2048u32);
        let grid = default_grid(n, m);
        let profile = thermal_profile(n, m, &grid).unwrap();
        let expected = (m as f64 / n as f64).sqrt();
        assert!(
            (profile.peak_radius() - expected).abs() <= grid.step(),
            "peak at {} expected {expected}",
            profile.peak_radius()
        );
        assert!((grid.integrate(&profile.values) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn thermal_peak_height_scales_like_n_over_sqrt_m() {
        // for m ≫ N² the maximum value scales as N/√m
        let n = 16usize;
        let mut ratios = Vec::new();
        for m in [1024u32, 2048, 4096, 8192] {
            let grid = default_grid(n, m);
            let profile = thermal_profile(n, m, &grid).unwrap();
            ratios.push(profile.peak_value() * (m as f64).sqrt() / n as f64);
        }
        for w in ratios.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.05, "scaling constant drifted: {ratios:?}");
        }
    }

    #[test]
    fn thermal_requires_charge() {
        let grid = default_grid(16, 0);
        assert!(matches!(thermal_profile(16, 0, &grid), Err(MeanFieldError::ThermalNeedsCharge)));
    }

    #[test]
    fn log_kernel_angle_average_identity() {
        // (2π)⁻¹ ∫ log|z - z'| dθ = log max(|z|, |z'|), checked against 2D
        // angular quadrature at seeded random radius pairs
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let r1: f64 = 0.2 + 1.8 * rng.random::<f64>();
            let mut r2: f64 = 0.2 + 1.8 * rng.random::<f64>();
            // keep pairs off the kernel kink
            if (r1 - r2).abs() < 0.05 {
                r2 += 0.1;
            }
            let steps = 200_000;
            let mut acc = 0.0;
            for k in 0..steps {
                let theta = 2.0 * PI * (k as f64 + 0.5) / steps as f64;
                let dx = r1 - r2 * theta.cos();
                let dy = r2 * theta.sin();
                acc += 0.5 * (dx * dx + dy * dy).ln();
            }
            acc /= steps as f64;
            let expected = r1.max(r2).ln();
            assert!((acc - expected).abs() < 1e-6, "r1={r1}, r2={r2}: {acc} vs {expected}");
        }
    }

    #[test]
    fn coulomb_potential_of_point_ring() {
        // a thin ring of unit mass at radius R gives Φ(r) = -log max(r, R)
        let grid = RadialGrid::new(4.0, 400);
        let ring_cell = grid.cell_of(1.5).unwrap();
        let mut values = vec![0.0; grid.cells()];
        values[ring_cell] = 1.0 / grid.cell_area(ring_cell);
        let phi = coulomb_potential(&grid, &values);
        let r_ring = grid.midpoint(ring_cell);
        for probe in [0.3, 0.9, 2.0, 3.5] {
            let i = grid.cell_of(probe).unwrap();
            let expected = -grid.midpoint(i).max(r_ring).ln();
            assert!((phi[i] - expected).abs() < 1e-10, "probe {probe}: {} vs {expected}", phi[i]);
        }
    }

    #[test]
    fn minimizer_recovers_flat_disk() {
        let n = 64usize;
        let grid = default_grid(n, 0);
        let profile = minimize_mf(n, 0, &grid, &MfOptions::default()).unwrap();
        assert!(profile.resolution_warning.is_none());
        // bulk value within 2% of (2π)⁻¹
        let flat = 1.0 / (2.0 * PI);
        for probe in [0.4, 0.7, 1.0] {
            let v = profile.values[grid.cell_of(probe).unwrap()];
            assert!((v - flat).abs() < 0.02 * flat, "ρ({probe}) = {v}, flat value {flat}");
        }
        // support edge near √2: density falls through half maximum there
        let half = flat / 2.0;
        let mut edge = None;
        for i in (1..grid.cells()).rev() {
            if profile.values[i] < half && profile.values[i - 1] >= half {
                edge = Some(grid.midpoint(i));
                break;
            }
        }
        let edge = edge.expect("profile has a support edge");
        assert!((edge - 2f64.sqrt()).abs() < 0.1, "edge at {edge}, expected ~{}", 2f64.sqrt());
    }

    #[test]
    fn minimizer_beats_both_closed_forms() {
        let (n, m) = (32usize, 32u32);
        let grid = default_grid(n, m);
        let profile = minimize_mf(n, m, &grid, &MfOptions::default()).unwrap();
        let annulus = annulus_profile(n, m, &grid);
        let thermal = thermal_profile(n, m, &grid).unwrap();
        let tol = 1e-9;
        assert!(
            profile.energy <= annulus.energy + tol,
            "minimizer {} vs annulus {}",
            profile.energy,
            annulus.energy
        );
        assert!(
            profile.energy <= thermal.energy + tol,
            "minimizer {} vs thermal {}",
            profile.energy,
            thermal.energy
        );
    }

    #[test]
    fn minimizer_approaches_thermal_at_huge_charge() {
        // the minimizer converges to the entropy-only thermal law as
        // m/N² → ∞, at rate N/√m (the electrostatic repulsion shifts the
        // shell peak to √(m/N + 1), which is N/√m of the shell width).
        // Verify the convergence and its rate: L¹ halves as √m doubles.
        let n = 16usize;
        let mut distances = Vec::new();
        for m in [2048u32, 8192, 32768] {
            let grid = default_grid(n, m);
            let profile = minimize_mf(n, m, &grid, &MfOptions::default()).unwrap();
            let thermal = thermal_profile(n, m, &grid).unwrap();
            distances.push(grid.l1_distance(&profile.values, &thermal.values));
        }
        eprintln!("L1(minimizer, thermal) at m = 2048/8192/32768: {distances:?}");
        assert!(distances[0] < 0.35, "m=2048: {}", distances[0]);
        for w in distances.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.5).abs() < 0.12, "L¹ should halve as √m doubles: {distances:?}");
        }
        assert!(distances[2] < 0.1);
    }

    #[test]
    fn exact_quantum_density_confirms_interaction_shift() {
        // zero-approximation oracle: the exact scaled radial density of
        // the giant-vortex Fock state, ρ(r) = Σ_ℓ ⟨n_ℓ⟩ (πℓ!)⁻¹ (Nr²)^ℓ
        // e^{-Nr²}, peaks at √(m/N + 1), not at the thermal law's √(m/N)
        let (n, m) = (6u32, 288u32); // same N/√m as (16, 2048)
        let terms = crate::trial::expansion_terms(n, m).unwrap();
        let l_top = m + 2 * (n - 1);
        let mut occupancy = vec![0.0f64; l_top as usize + 1];
        for (occ, a) in &terms {
            for &p in occ.parts() {
                occupancy[p as usize] += a * a;
            }
        }
        let nf = n as f64;
        let grid = default_grid(n as usize, m);
        let mut exact: Vec<f64> = (0..grid.cells())
            .map(|i| {
                let x = nf * grid.midpoint(i).powi(2);
                occupancy
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(l, w)| {
                        let log_term =
                            (l as f64) * x.ln() - x - crate::math::ln_factorial(l) - PI.ln();
                        w * log_term.exp()
                    })
                    .sum()
            })
            .collect();
        let z = grid.integrate(&exact);
        for v in &mut exact {
            *v /= z;
        }
        let peak = grid.midpoint(
            exact.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0,
        );
        let shifted = (m as f64 / nf + 1.0).sqrt();
        let thermal_peak = (m as f64 / nf).sqrt();
        assert!(
            (peak - shifted).abs() < 0.3 * (shifted - thermal_peak),
            "exact peak {peak} vs interaction-shifted {shifted} vs thermal {thermal_peak}"
        );
        // and the mean-field minimizer reproduces the exact density far
        // better than the thermal law does
        let mf = minimize_mf(n as usize, m, &grid, &MfOptions::default()).unwrap();
        let thermal = thermal_profile(n as usize, m, &grid).unwrap();
        let d_mf = grid.ks_distance(&exact, &mf.values);
        let d_th = grid.ks_distance(&exact, &thermal.values);
        assert!(2.5 * d_mf < d_th, "KS(exact, mf) = {d_mf}, KS(exact, thermal) = {d_th}");
    }

    #[test]
    fn non_convergence_reported() {
        let grid = default_grid(16, 0);
        let opts = MfOptions { max_iterations: 2, tol: 1e-14, damping: 0.5 };
        assert!(matches!(
            minimize_mf(16, 0, &grid, &opts),
            Err(MeanFieldError::NonConvergence { .. })
        ));
    }

    #[test]
    fn resolution_warning_on_coarse_grid() {
        let grid = RadialGrid::new(3.0, 8);
        let profile = annulus_profile(64, 0, &grid);
        assert!(profile.resolution_warning.is_some());
    }

    #[test]
    fn regime_tags() {
        // incompressible tag needs the entropy below 1% of the energy
        // scale, i.e. N ≳ 250 in the flat-disk case
        let n = 400usize;
        let grid = default_grid(n, 0);
        let profile = minimize_mf(n, 0, &grid, &MfOptions::default()).unwrap();
        assert_eq!(profile.regime, Regime::Annulus);
        // thermal case: interaction negligible
        let (n, m) = (16usize, 2048u32);
        let grid = default_grid(n, m);
        let profile = minimize_mf(n, m, &grid, &MfOptions::default()).unwrap();
        assert_eq!(profile.regime, Regime::Thermal);
    }
}
