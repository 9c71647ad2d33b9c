//! Subcommand implementations: resolve parameters, run, write artifacts.

use crate::config::{parse_grid, resolve, KvConfig, ResolvedConfig};
use crate::output::{fmt_f64, RunDir};
use crate::{CliError, Command, Common};
use lll::grid::RadialGrid;
use lll::operators::HamiltonianParams;
use serde_json::json;
use std::path::Path;

pub(crate) fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Yrast { common, n, lmax } => yrast(common, n, lmax),
        Command::Gaps { common, n, lmax } => gaps(common, n, lmax),
        Command::Ground { common, n, omega, g, k, lmax } => ground(common, n, omega, g, k, lmax),
        Command::Phases { common, n, g, omega_grid, k_grid, exact_dim_cap } => {
            phases(common, n, g, omega_grid, k_grid, exact_dim_cap)
        }
        Command::Trial { common, n, omega, g, k, mmax, emit_fock } => {
            trial(common, n, omega, g, k, mmax, emit_fock)
        }
        Command::Plasma {
            common,
            n,
            m,
            sweeps,
            burn_in,
            step,
            thin,
            seed,
            chains,
            rmax,
            cells,
        } => plasma(common, n, m, sweeps, burn_in, step, thin, seed, chains, rmax, cells),
        Command::Meanfield { common, n, m, profile, rmax, cells, tol, max_iters, damping } => {
            meanfield(common, n, m, profile, rmax, cells, tol, max_iters, damping)
        }
        Command::Gp { common, omega, ng, lmax, restarts, seed, max_iters } => {
            gp(common, omega, ng, lmax, restarts, seed, max_iters)
        }
        Command::Compare { common, n, g, omega_grid, lmax, gp_lmax, restarts } => {
            compare(common, n, g, omega_grid, lmax, gp_lmax, restarts)
        }
    }
}

fn load_config(common: &Common) -> Result<KvConfig, CliError> {
    let cfg = match &common.config {
        Some(path) => KvConfig::load(path)?,
        None => KvConfig::default(),
    };
    let workers = resolve(common.workers, &cfg, "workers", 0usize)?;
    if workers > 0 {
        // ignore the error if a pool already exists (tests call in-process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    Ok(cfg)
}

fn run_dir(common: &Common, resolved: &ResolvedConfig, command: &str) -> Result<RunDir, CliError> {
    RunDir::create(Path::new(&common.out), resolved, command)
}

/// Histogram extent covering the annulus support plus the edge layer.
fn auto_rmax(n: usize, m: u32) -> f64 {
    let (_, r_plus) = lll::meanfield::annulus_radii(n, m);
    r_plus + 5.0 / (n as f64).sqrt()
}

fn auto_cells(n: usize, rmax: f64) -> usize {
    ((rmax / (0.2 / (n as f64).sqrt())).ceil() as usize).max(128)
}

// ---------------------------------------------------------------------------

fn yrast(common: Common, n: Option<u32>, lmax: Option<u32>) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 4u32)?;
    let lmax = resolve(lmax, &cfg, "lmax", n * n.saturating_sub(1) + 4)?;

    let mut resolved = ResolvedConfig::new("yrast");
    resolved.set("n", n);
    resolved.set("lmax", lmax);
    let mut dir = run_dir(&common, &resolved, "yrast")?;

    let points = lll::spectra::yrast_curve(n, lmax)?;
    dir.write_csv(
        "yrast.csv",
        "l,dim,i_l,gap,kernel_dim",
        points.iter().map(|p| {
            format!("{},{},{},{},{}", p.l, p.dim, fmt_f64(p.i_of_l), fmt_f64(p.gap), p.kernel_dim)
        }),
    )?;
    dir.note("sectors", json!(points.len()));
    dir.finalize(&resolved)
}

fn gaps(common: Common, n: Option<u32>, lmax: Option<u32>) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 4u32)?;
    let lmax = resolve(lmax, &cfg, "lmax", n * n.saturating_sub(1))?;

    let mut resolved = ResolvedConfig::new("gaps");
    resolved.set("n", n);
    resolved.set("lmax", lmax);
    let mut dir = run_dir(&common, &resolved, "gaps")?;

    let scan = lll::spectra::spectral_gap_scan(n, lmax)?;
    dir.write_csv(
        "gaps.csv",
        "l,gap",
        scan.gaps.iter().map(|(l, g)| format!("{l},{}", fmt_f64(*g))),
    )?;
    dir.write_json(
        "gaps.json",
        &json!({
            "n": scan.n,
            "min_gap": scan.min_gap,
            "min_gap_location": scan.min_gap_location,
            "reference_gap": scan.reference_gap,
            "conjecture_holds": scan.conjecture_holds,
        }),
    )?;
    dir.note("conjecture_holds", json!(scan.conjecture_holds));
    dir.finalize(&resolved)
}

fn ground(
    common: Common,
    n: Option<u32>,
    omega: Option<f64>,
    g: Option<f64>,
    k: Option<f64>,
    lmax: Option<u32>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 4u32)?;
    let omega = resolve(omega, &cfg, "omega", 0.05f64)?;
    let g = resolve(g, &cfg, "g", 1.0f64)?;
    let k = resolve(k, &cfg, "k", 0.0f64)?;
    let lmax = resolve(lmax, &cfg, "lmax", 4 * n * n)?;

    let mut resolved = ResolvedConfig::new("ground");
    resolved.set("n", n);
    resolved.set("omega", omega);
    resolved.set("g", g);
    resolved.set("k", k);
    resolved.set("lmax", lmax);
    let mut dir = run_dir(&common, &resolved, "ground")?;

    let params = HamiltonianParams::new(omega, g, k)?;
    let record = lll::spectra::ground_state_scan(n, &params, lmax)?;
    dir.write_csv(
        "scan.csv",
        "l,energy",
        record.scan.iter().map(|(l, e)| format!("{l},{}", fmt_f64(*e))),
    )?;
    dir.write_json(
        "ground.json",
        &serde_json::to_value(&record).map_err(|e| CliError::Io(e.to_string()))?,
    )?;
    dir.note("l_star", json!(record.l_star));
    dir.note("correlation_defect", json!(record.correlation_defect));
    dir.finalize(&resolved)
}

fn phases(
    common: Common,
    n: Option<u32>,
    g: Option<f64>,
    omega_grid: Option<String>,
    k_grid: Option<String>,
    exact_dim_cap: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 5u32)?;
    let g = resolve(g, &cfg, "g", 1.0f64)?;
    let omega_spec = resolve(omega_grid, &cfg, "omega-grid", "-0.4:0.2:7".to_string())?;
    let k_spec = resolve(k_grid, &cfg, "k-grid", "0.005:0.05:4".to_string())?;
    let cap = resolve(exact_dim_cap, &cfg, "exact-dim-cap", 2000usize)?;

    let mut resolved = ResolvedConfig::new("phases");
    resolved.set("n", n);
    resolved.set("g", g);
    resolved.set("omega-grid", &omega_spec);
    resolved.set("k-grid", &k_spec);
    resolved.set("exact-dim-cap", cap);
    let mut dir = run_dir(&common, &resolved, "phases")?;

    let omegas = parse_grid(&omega_spec)?;
    let ks = parse_grid(&k_spec)?;
    let mut rows = Vec::new();
    let mut exact_points = 0usize;
    for &k in &ks {
        for &omega in &omegas {
            let (m_opt, regime) = match lll::trial::optimal_m(omega, k, n) {
                Ok(m) => {
                    let tag = if m == 0 {
                        "laughlin"
                    } else if m <= n * n {
                        "annulus"
                    } else {
                        "thermal"
                    };
                    (Some(m), tag)
                }
                Err(_) => (None, "unstable"),
            };
            let l_m = m_opt.map(|m| n * n.saturating_sub(1) + n * m);

            // exact cross-check where the sectors stay affordable
            let mut l_star = String::new();
            let mut defect = String::new();
            if let (Some(_), Ok(params)) = (m_opt, HamiltonianParams::new(omega, g, k)) {
                let l_cap = l_m.unwrap() + 4 * n;
                let affordable = (0..=l_cap)
                    .all(|l| lll::basis::sector_dimension(n, l).unwrap_or(u64::MAX) <= cap as u64);
                if affordable {
                    if let Ok(record) = lll::spectra::ground_state_scan(n, &params, l_cap) {
                        l_star = record.l_star.to_string();
                        defect = fmt_f64(record.correlation_defect);
                        exact_points += 1;
                    }
                }
            }
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                fmt_f64(omega),
                fmt_f64(k),
                m_opt.map(|m| m.to_string()).unwrap_or_default(),
                l_m.map(|l| l.to_string()).unwrap_or_default(),
                regime,
                l_star,
                defect,
            ));
        }
    }
    dir.write_csv("phases.csv", "omega,k,m_opt,l_m,regime,l_star,defect", rows)?;
    dir.note("grid_points", json!(omegas.len() * ks.len()));
    dir.note("exact_points", json!(exact_points));
    dir.finalize(&resolved)
}

fn trial(
    common: Common,
    n: Option<u32>,
    omega: Option<f64>,
    g: Option<f64>,
    k: Option<f64>,
    mmax: Option<u32>,
    emit_fock: bool,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 4u32)?;
    let omega = resolve(omega, &cfg, "omega", -0.2f64)?;
    let g = resolve(g, &cfg, "g", 1.0f64)?;
    let k = resolve(k, &cfg, "k", 0.02f64)?;
    let mmax = resolve(mmax, &cfg, "mmax", 12u32)?;
    let emit_fock = emit_fock || cfg.get("emit-fock") == Some("true");

    let mut resolved = ResolvedConfig::new("trial");
    resolved.set("n", n);
    resolved.set("omega", omega);
    resolved.set("g", g);
    resolved.set("k", k);
    resolved.set("mmax", mmax);
    resolved.set("emit-fock", emit_fock);
    let mut dir = run_dir(&common, &resolved, "trial")?;

    let params = HamiltonianParams::new(omega, g, k)?;
    let mut rows = Vec::new();
    for m in 0..=mmax {
        let record = lll::trial::trial_energy(n, m, &params)?;
        rows.push(format!(
            "{},{},{},{}",
            record.m,
            record.l_m,
            fmt_f64(record.energy),
            fmt_f64(record.l2_expect)
        ));
        if emit_fock {
            let terms = lll::trial::expansion_terms(n, m)?;
            let json_terms: Vec<_> = terms
                .iter()
                .map(|(occ, a)| json!({ "orbitals": occ.parts(), "amplitude": a }))
                .collect();
            dir.write_json(
                &format!("fock_m{m}.json"),
                &json!({ "n": n, "m": m, "l": record.l_m, "terms": json_terms }),
            )?;
        }
    }
    dir.write_csv("trial.csv", "m,l_m,energy,l2_expect", rows)?;

    let closed = lll::trial::optimal_m(omega, k, n);
    let numeric = lll::trial::numeric_optimal_m(omega, k, n);
    if let (Ok(c), Ok(x)) = (&closed, &numeric) {
        dir.note("m_opt_closed_form", json!(c));
        dir.note("m_opt_numeric", json!(x));
    }
    dir.finalize(&resolved)
}

#[allow(clippy::too_many_arguments)]
fn plasma(
    common: Common,
    n: Option<usize>,
    m: Option<u32>,
    sweeps: Option<usize>,
    burn_in: Option<usize>,
    step: Option<f64>,
    thin: Option<usize>,
    seed: Option<u64>,
    chains: Option<usize>,
    rmax: Option<f64>,
    cells: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 64usize)?;
    let m = resolve(m, &cfg, "m", 0u32)?;
    let sweeps = resolve(sweeps, &cfg, "sweeps", 20_000usize)?;
    let burn_in = resolve(burn_in, &cfg, "burn-in", sweeps / 10)?;
    let step = resolve(step, &cfg, "step", 0.3f64)?;
    let thin = resolve(thin, &cfg, "thin", 1usize)?;
    let seed = resolve(seed, &cfg, "seed", 1u64)?;
    let chains = resolve(chains, &cfg, "chains", 1usize)?;
    let rmax = resolve(rmax, &cfg, "rmax", auto_rmax(n, m))?;
    let cells = resolve(cells, &cfg, "cells", auto_cells(n, rmax))?;

    let mut resolved = ResolvedConfig::new("plasma");
    resolved.set("n", n);
    resolved.set("m", m);
    resolved.set("sweeps", sweeps);
    resolved.set("burn-in", burn_in);
    resolved.set("step", step);
    resolved.set("thin", thin);
    resolved.set("seed", seed);
    resolved.set("chains", chains);
    resolved.set("rmax", rmax);
    resolved.set("cells", cells);
    let mut dir = run_dir(&common, &resolved, "plasma")?;

    let params = lll::plasma::McParams { n, m, sweeps, burn_in, step_scale: step, thin, seed };
    let runs = lll::plasma::run_chains(&params, chains)?;
    let samples: Vec<Vec<[f64; 2]>> = runs.iter().flat_map(|r| r.samples.iter().cloned()).collect();
    let grid = RadialGrid::new(rmax, cells);
    let density = lll::plasma::radial_density(&samples, &grid)?;

    dir.write_csv(
        "density.csv",
        "r_lo,r_hi,rho,std_error",
        (0..grid.cells()).map(|i| {
            let (lo, hi) = grid.cell_edges(i);
            format!(
                "{},{},{},{}",
                fmt_f64(lo),
                fmt_f64(hi),
                fmt_f64(density.values[i]),
                fmt_f64(density.std_error[i])
            )
        }),
    )?;
    dir.note("acceptance_rates", json!(runs.iter().map(|r| r.acceptance_rate).collect::<Vec<_>>()));
    dir.note(
        "max_energy_drift",
        json!(runs.iter().map(|r| r.max_energy_drift).fold(0.0f64, f64::max)),
    );
    dir.note("particle_samples", json!(runs.iter().map(|r| r.particle_samples()).sum::<usize>()));
    dir.note("outside_grid", json!(density.outside));
    dir.finalize(&resolved)
}

#[allow(clippy::too_many_arguments)]
fn meanfield(
    common: Common,
    n: Option<usize>,
    m: Option<u32>,
    profile: Option<String>,
    rmax: Option<f64>,
    cells: Option<usize>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    damping: Option<f64>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 64usize)?;
    let m = resolve(m, &cfg, "m", 0u32)?;
    let kind = resolve(profile, &cfg, "profile", "numeric".to_string())?;
    let rmax = resolve(rmax, &cfg, "rmax", auto_rmax(n, m))?;
    let cells = resolve(cells, &cfg, "cells", auto_cells(n, rmax))?;
    let defaults = lll::meanfield::MfOptions::default();
    let tol = resolve(tol, &cfg, "tol", defaults.tol)?;
    let max_iters = resolve(max_iters, &cfg, "max-iters", defaults.max_iterations)?;
    let damping = resolve(damping, &cfg, "damping", defaults.damping)?;

    let mut resolved = ResolvedConfig::new("meanfield");
    resolved.set("n", n);
    resolved.set("m", m);
    resolved.set("profile", &kind);
    resolved.set("rmax", rmax);
    resolved.set("cells", cells);
    resolved.set("tol", tol);
    resolved.set("max-iters", max_iters);
    resolved.set("damping", damping);
    let mut dir = run_dir(&common, &resolved, "meanfield")?;

    let grid = RadialGrid::new(rmax, cells);
    let profile = match kind.as_str() {
        "numeric" => {
            let opts = lll::meanfield::MfOptions { tol, max_iterations: max_iters, damping };
            lll::meanfield::minimize_mf(n, m, &grid, &opts)?
        }
        "annulus" => lll::meanfield::annulus_profile(n, m, &grid),
        "thermal" => lll::meanfield::thermal_profile(n, m, &grid)?,
        other => {
            return Err(CliError::Input(format!(
                "unknown profile kind `{other}` (numeric, annulus or thermal)"
            )))
        }
    };

    let regime = format!("{:?}", profile.regime).to_lowercase();
    dir.write_csv(
        "profile.csv",
        "r,rho,regime",
        (0..grid.cells()).map(|i| {
            format!("{},{},{regime}", fmt_f64(grid.midpoint(i)), fmt_f64(profile.values[i]))
        }),
    )?;
    dir.write_json(
        "meanfield.json",
        &json!({
            "n": n,
            "m": m,
            "mu": profile.mu,
            "energy": profile.energy,
            "iterations": profile.iterations,
            "regime": regime,
            "resolution_warning": profile.resolution_warning,
        }),
    )?;
    dir.note("energy", json!(profile.energy));
    dir.note("iterations", json!(profile.iterations));
    dir.finalize(&resolved)
}

fn gp(
    common: Common,
    omega: Option<f64>,
    ng: Option<f64>,
    lmax: Option<usize>,
    restarts: Option<usize>,
    seed: Option<u64>,
    max_iters: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let omega = resolve(omega, &cfg, "omega", 0.2f64)?;
    let ng = resolve(ng, &cfg, "ng", 10.0f64)?;
    let defaults = lll::gp::GpOptions::default();
    let lmax = resolve(lmax, &cfg, "lmax", defaults.l_max)?;
    let restarts = resolve(restarts, &cfg, "restarts", defaults.restarts)?;
    let seed = resolve(seed, &cfg, "seed", defaults.seed)?;
    let max_iters = resolve(max_iters, &cfg, "max-iters", defaults.max_iterations)?;

    let mut resolved = ResolvedConfig::new("gp");
    resolved.set("omega", omega);
    resolved.set("ng", ng);
    resolved.set("lmax", lmax);
    resolved.set("restarts", restarts);
    resolved.set("seed", seed);
    resolved.set("max-iters", max_iters);
    let mut dir = run_dir(&common, &resolved, "gp")?;

    let opts =
        lll::gp::GpOptions { l_max: lmax, restarts, seed, max_iterations: max_iters, ..defaults };
    let minimum = lll::gp::minimize_gp(omega, ng, &opts)?;
    let tf = lll::gp::tf_profile_and_energy(omega, ng);

    dir.write_csv(
        "coeffs.csv",
        "l,re,im,weight",
        minimum.state.coeffs().iter().enumerate().map(|(l, c)| {
            format!("{l},{},{},{}", fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm_sqr()))
        }),
    )?;

    // angle-averaged density Σ_ℓ |c_ℓ|² r^{2ℓ} e^{-r²} / (π ℓ!)
    let r_top = (2.0 * (minimum.l_max_used as f64)).sqrt() + 2.0;
    let grid = RadialGrid::new(r_top, 512);
    dir.write_csv(
        "density.csv",
        "r,rho",
        (0..grid.cells()).map(|i| {
            let r = grid.midpoint(i);
            let x = r * r;
            let rho: f64 = minimum
                .state
                .coeffs()
                .iter()
                .enumerate()
                .map(|(l, c)| {
                    let w = c.norm_sqr();
                    if w == 0.0 {
                        0.0
                    } else {
                        let lnfact: f64 = (2..=l).map(|k| (k as f64).ln()).sum();
                        w * ((l as f64) * x.ln() - x - lnfact - std::f64::consts::PI.ln()).exp()
                    }
                })
                .sum();
            format!("{},{}", fmt_f64(r), fmt_f64(rho))
        }),
    )?;

    let zeros = lll::gp::vortex_zeros(&minimum.state)?;
    let tf_radius = tf.map(|(p, _)| p.radius).unwrap_or(f64::INFINITY);
    dir.write_csv(
        "zeros.csv",
        "re,im,radius,bulk",
        zeros.zeros.iter().map(|z| {
            format!(
                "{},{},{},{}",
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(z.norm()),
                (z.norm() < tf_radius) as u8
            )
        }),
    )?;

    dir.write_json(
        "gp.json",
        &json!({
            "omega": omega,
            "ng": ng,
            "energy": minimum.energy,
            "grad_norm": minimum.grad_norm,
            "l_max_used": minimum.l_max_used,
            "tail_weight": minimum.tail_weight,
            "tf_radius_resolved": minimum.tf_radius_resolved,
            "restarts_converged": minimum.restarts_converged,
            "bulk_vortices": zeros.bulk_count(tf_radius),
            "trimmed_leading": zeros.trimmed_leading,
            "tf": tf.map(|(p, e)| json!({
                "lambda": p.lambda,
                "radius": p.radius,
                "abrikosov": p.e_ab,
                "energy": e,
            })),
        }),
    )?;
    dir.note("energy", json!(minimum.energy));
    dir.finalize(&resolved)
}

fn compare(
    common: Common,
    n: Option<u32>,
    g: Option<f64>,
    omega_grid: Option<String>,
    lmax: Option<u32>,
    gp_lmax: Option<usize>,
    restarts: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let n = resolve(n, &cfg, "n", 4u32)?;
    let g = resolve(g, &cfg, "g", 1.0f64)?;
    let spec = resolve(omega_grid, &cfg, "omega-grid", "0.05:2:10".to_string())?;
    let lmax = resolve(lmax, &cfg, "lmax", 300u32)?;
    let gp_lmax = resolve(gp_lmax, &cfg, "gp-lmax", 24usize)?;
    let restarts = resolve(restarts, &cfg, "restarts", 8usize)?;

    let mut resolved = ResolvedConfig::new("compare");
    resolved.set("n", n);
    resolved.set("g", g);
    resolved.set("omega-grid", &spec);
    resolved.set("lmax", lmax);
    resolved.set("gp-lmax", gp_lmax);
    resolved.set("restarts", restarts);
    let mut dir = run_dir(&common, &resolved, "compare")?;

    let opts = lll::gp::GpOptions { l_max: gp_lmax, restarts, ..lll::gp::GpOptions::default() };
    let mut rows = Vec::new();
    let mut bound_ok = true;
    for omega in parse_grid(&spec)? {
        let cmp = lll::gp::compare_gp_exact(n, omega, g, lmax, &opts)?;
        bound_ok &= cmp.e_gp >= cmp.e_exact - 1e-8;
        rows.push(format!(
            "{},{},{},{}",
            fmt_f64(omega),
            fmt_f64(cmp.e_gp),
            fmt_f64(cmp.e_exact),
            fmt_f64(cmp.ratio)
        ));
    }
    dir.write_csv("compare.csv", "omega,e_gp,e_exact,ratio", rows)?;
    dir.note("upper_bound_holds", json!(bound_ok));
    dir.finalize(&resolved)
}
