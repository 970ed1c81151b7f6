//! The experiment implementations behind `anderson run`.
//!
//! Each experiment consumes a validated config, runs its realizations (in
//! parallel, one seed per task, with ordered collection so outputs do not
//! depend on scheduling), writes its data files and returns a summary
//! fragment. Per-realization failures are recorded and flagged instead of
//! aborting the whole run.

use anderson_core::dispersive::{
    strichartz_exponent_fit, strichartz_norm, wave_strichartz_norm, ChebPropagator,
    ChebWavePropagator, FreePropagator, SchrodingerEvolution, StrichartzSample, WaveEvolution,
};
use anderson_core::eigen::{eigensolve, SolveMethod};
use anderson_core::hamiltonian::Hamiltonian;
use anderson_core::noise::{build_enhanced, renorm_constant, sample_white_noise, EnhancedNoise};
use anderson_core::para::{corrector, swap_commutator, ParacontrolledMaps};
use anderson_core::pde::{
    lwp_contraction_probe, lwp_time_scaling, nls_solve, wave_solve, LinearRoute, SolverOptions,
};
use anderson_core::random::{random_block_field, random_smooth_field, realization_seed, seeded_rng};
use anderson_core::spectrum::Spectrum;
use anderson_core::{io as core_io, lp, oracle, stats, Field, Grid};
use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{f, RunDir};

pub fn run(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let echo = serde_json::to_string_pretty(cfg)?;
    out.write_text("config_echo.json", &format!("{echo}\n"))?;
    let body = match cfg.experiment {
        Experiment::NoiseStats => noise_stats(cfg, out)?,
        Experiment::Renorm => renorm(cfg, out)?,
        Experiment::Eigen => eigen(cfg, out)?,
        Experiment::Weyl => weyl(cfg, out)?,
        Experiment::Sandwich => sandwich(cfg, out)?,
        Experiment::LqSlopes => lq_slopes(cfg, out)?,
        Experiment::StrichartzSchrodinger => strichartz_schrodinger(cfg, out)?,
        Experiment::StrichartzWave => strichartz_wave(cfg, out)?,
        Experiment::Nls => nls(cfg, out)?,
        Experiment::Wave => wave(cfg, out)?,
        Experiment::GammaDiagnostics => gamma_diagnostics(cfg, out)?,
    };
    let mut summary = json!({
        "experiment": cfg.experiment.name(),
        "artifact_version": format!("anderson {} convention {}", env!("CARGO_PKG_VERSION"), anderson_core::CONVENTION_VERSION),
        "n": cfg.n,
        "eps": cfg.eps,
        "base_seed": cfg.base_seed,
        "seed_count": cfg.seed_count,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut summary, body) {
        for (k, v) in src {
            dst.insert(k, v);
        }
    }
    out.write_summary(summary.clone())?;
    Ok(summary)
}

fn grid(cfg: &ExperimentConfig) -> Result<Grid> {
    Ok(Grid::new(cfg.n)?)
}

fn seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.seed_count as u64)
        .map(|i| realization_seed(cfg.base_seed, i))
        .collect()
}

fn enhanced_for(cfg: &ExperimentConfig, grid: Grid, seed: u64) -> Result<EnhancedNoise> {
    if cfg.zero_noise {
        Ok(EnhancedNoise::silent(grid, cfg.eps)?)
    } else {
        Ok(build_enhanced(&sample_white_noise(grid, seed), cfg.eps)?)
    }
}

/// Run one closure per seed in parallel, keeping seed order; failures become
/// `(seed, message)` entries.
fn per_seed<T: Send>(
    cfg: &ExperimentConfig,
    task: impl Fn(u64) -> Result<T> + Sync,
) -> (Vec<(u64, T)>, Vec<(u64, String)>) {
    let list = seeds(cfg);
    let results: Vec<(u64, Result<T>)> = list
        .par_iter()
        .map(|&seed| (seed, task(seed)))
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(v) => ok.push((seed, v)),
            Err(e) => failed.push((seed, format!("{e:#}"))),
        }
    }
    (ok, failed)
}

fn failures_json(failed: &[(u64, String)]) -> Value {
    Value::Array(
        failed
            .iter()
            .map(|(s, m)| json!({"seed": s, "error": m}))
            .collect(),
    )
}

// ---------------------------------------------------------------------------

fn noise_stats(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let raw = en.wick_resonant.add(&Field::constant(g, en.c_eps))?;
        let wick_avg = en.wick_resonant.inner(&Field::constant(g, 1.0)).re / Grid::volume();
        let raw_avg = raw.inner(&Field::constant(g, 1.0)).re / Grid::volume();
        let full = sample_white_noise(g, seed).xi.l2_norm().powi(2);
        Ok((
            full,
            en.xi_eps.l2_norm().powi(2),
            wick_avg,
            raw_avg,
            lp::besov_inf_norm(&en.wick_resonant, -0.2),
        ))
    });
    let rows: Vec<String> = ok
        .iter()
        .map(|(seed, (full, moll, wick, raw, besov))| {
            format!(
                "{seed},{},{},{},{},{},{},{}",
                cfg.n,
                f(cfg.eps),
                f(*full),
                f(*moll),
                f(*wick),
                f(*raw),
                f(*besov)
            )
        })
        .collect();
    out.write_csv(
        "noise_stats.csv",
        "seed,n,eps,xi_l2sq,mollified_l2sq,wick_avg,raw_resonant_avg,wick_besov_m02",
        &rows,
    )?;
    let c_eps = renorm_constant(cfg.eps)?;
    let moll_means: Vec<f64> = ok.iter().map(|(_, v)| v.1).collect();
    let raw_means: Vec<f64> = ok.iter().map(|(_, v)| v.3).collect();
    Ok(json!({
        "c_eps": c_eps,
        "active_modes": g.active_bins(),
        "modes_in_cutoff": oracle::lattice_count((1.0/cfg.eps).powi(2)),
        "mean_mollified_l2sq": if moll_means.is_empty() { 0.0 } else { stats::mean(&moll_means) },
        "mean_raw_resonant_avg": if raw_means.is_empty() { 0.0 } else { stats::mean(&raw_means) },
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn renorm(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    // analytic constants on dyadic scales (grid-free)
    let eps_list: Vec<f64> = (1..=7).map(|k| (0.5f64).powi(k)).collect();
    let mut rows = Vec::new();
    for &e in &eps_list {
        let c = renorm_constant(e)?;
        let c_oracle = oracle::lattice_renorm_sum(e);
        rows.push(format!("{},{},{}", f(e), f(c), f(c_oracle)));
    }
    out.write_csv("renorm_constants.csv", "eps,c_eps,c_eps_oracle", &rows)?;
    let fit_range: Vec<f64> = (3..=7).map(|k| (0.5f64).powi(k)).collect();
    let xs: Vec<f64> = fit_range.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = fit_range.iter().map(|e| renorm_constant(*e).unwrap()).collect();
    let ys_oracle: Vec<f64> = fit_range.iter().map(|e| oracle::lattice_renorm_sum(*e)).collect();
    let fit = stats::linear_fit(&xs, &ys);
    let fit_oracle = stats::linear_fit(&xs, &ys_oracle);

    // λ₁ drift study on grid-resolved dyadic scales
    let g = grid(cfg)?;
    let mut resolved: Vec<f64> = Vec::new();
    for k in 2..=6 {
        let e = (0.5f64).powi(k);
        if anderson_core::noise::grid_cutoff_defect(g, e)? <= 1e-3 {
            resolved.push(e);
        }
    }
    let (ok, failed) = per_seed(cfg, |seed| {
        let noise = sample_white_noise(g, seed);
        let mut per_eps = Vec::new();
        for &e in &resolved {
            let en = build_enhanced(&noise, e)?;
            let h_ren = Hamiltonian::renormalized(&en)?;
            let h_raw = Hamiltonian::unrenormalized(&en)?;
            let l_ren = eigensolve(&h_ren, 1, SolveMethod::Auto)?.eigenvalues[0];
            let l_raw = eigensolve(&h_raw, 1, SolveMethod::Auto)?.eigenvalues[0];
            per_eps.push((e, l_ren, l_raw, en.c_eps));
        }
        Ok(per_eps)
    });
    let mut lambda_rows = Vec::new();
    for (seed, per_eps) in &ok {
        for (e, l_ren, l_raw, c) in per_eps {
            lambda_rows.push(format!(
                "{seed},{},{},{},{},{}",
                cfg.n,
                f(*e),
                f(*l_ren),
                f(*l_raw),
                f(*c)
            ));
        }
    }
    out.write_csv(
        "lambda1.csv",
        "seed,n,eps,lambda1_renormalized,lambda1_unrenormalized,c_eps",
        &lambda_rows,
    )?;

    // dyadic difference statistics
    let mut ren_diffs: Vec<Vec<f64>> = Vec::new();
    let mut raw_drifts: Vec<Vec<f64>> = Vec::new();
    let mut expected_drifts: Vec<f64> = Vec::new();
    let mut drift_errors: Vec<f64> = Vec::new();
    for (_, per_eps) in &ok {
        let mut d = Vec::new();
        let mut dr = Vec::new();
        for w in per_eps.windows(2) {
            d.push((w[1].1 - w[0].1).abs());
            // the bare operator drifts by the counterterm increment, downward
            let drift = w[1].2 - w[0].2;
            let expected = -(w[1].3 - w[0].3);
            dr.push(drift);
            if expected.abs() > 0.0 {
                drift_errors.push((drift - expected).abs() / expected.abs());
            }
        }
        ren_diffs.push(d);
        raw_drifts.push(dr);
    }
    if let Some((_, per_eps)) = ok.first() {
        for w in per_eps.windows(2) {
            expected_drifts.push(-(w[1].3 - w[0].3));
        }
    }
    let steps = ren_diffs.first().map(|d| d.len()).unwrap_or(0);
    let mean_diffs: Vec<f64> = (0..steps)
        .map(|k| stats::mean(&ren_diffs.iter().map(|d| d[k]).collect::<Vec<_>>()))
        .collect();
    // 10-seed mean drift of the bare operator per dyadic step, compared with
    // the counterterm increment
    let mean_drift_rel_err: Vec<f64> = (0..steps)
        .map(|k| {
            let mean_drift = stats::mean(&raw_drifts.iter().map(|d| d[k]).collect::<Vec<_>>());
            (mean_drift - expected_drifts[k]).abs() / expected_drifts[k].abs()
        })
        .collect();
    Ok(json!({
        "c_eps_slope": fit.slope,
        "c_eps_slope_oracle": fit_oracle.slope,
        "c_eps_slope_target": 1.0 / (2.0 * std::f64::consts::PI),
        "lambda1_mean_dyadic_diffs": mean_diffs,
        "unrenormalized_mean_drift_rel_error": mean_drift_rel_err,
        "unrenormalized_drift_rel_error_max": drift_errors.iter().cloned().fold(0.0, f64::max),
        "resolved_eps": resolved,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn eigen(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let k = if cfg.k > 0 { cfg.k } else { 50.min(g.active_bins()) };
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = eigensolve(&h, k, SolveMethod::Auto)?;
        Ok((en, spec))
    });
    let mut worst_residual: f64 = 0.0;
    for (idx, (seed, (en, spec))) in ok.iter().enumerate() {
        out.write_text(&format!("spectrum_seed{idx}.csv"), &core_io::spectrum_csv(spec)?)?;
        if cfg.dump_noise {
            core_io::write_enhanced_dump(&out.path(&format!("noise_seed{idx}.dump")), en)?;
        }
        for j in 0..cfg.dump_eigenvectors.min(spec.len()) {
            core_io::write_field_dump(
                &out.path(&format!("eigenvector_seed{idx}_{j}.dump")),
                &format!("e{j}"),
                &spec.eigenvectors[j],
            )?;
        }
        worst_residual = worst_residual.max(
            spec.residuals
                .iter()
                .cloned()
                .fold(0.0, f64::max),
        );
        let _ = seed;
    }
    Ok(json!({
        "k": k,
        "worst_residual": worst_residual,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

/// Eigen-decomposition with enough pairs to cover `λ ≤ lambda_max`
/// (unshifted), growing `K` until coverage.
fn solve_covering(h: &Hamiltonian, lambda_max: f64, k_hint: usize) -> Result<Spectrum> {
    let dim = h.grid().active_bins();
    let mut k = k_hint.clamp(16, dim);
    loop {
        let spec = eigensolve(h, k, SolveMethod::Auto)?;
        let last = *spec.unshifted_eigenvalues().last().unwrap();
        if last >= lambda_max || k == dim {
            return Ok(spec);
        }
        k = ((k as f64 * 1.4) as usize).clamp(k + 8, dim);
    }
}

fn weyl(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let lambda_max = cfg.lambda_max;
    let k_hint = if cfg.k > 0 {
        cfg.k
    } else {
        (std::f64::consts::PI * lambda_max * 1.2) as usize + 40
    };
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = solve_covering(&h, lambda_max, k_hint)?;
        let fit = spec.counting_slope(lambda_max)?;
        let eigs = spec.unshifted_eigenvalues();
        let counts: Vec<(i64, usize)> = (1..=lambda_max.floor() as i64)
            .map(|l| {
                (
                    l,
                    eigs.iter().take_while(|&&e| e <= l as f64).count(),
                )
            })
            .collect();
        Ok((fit, counts))
    });
    let mut count_rows = Vec::new();
    let mut slope_rows = Vec::new();
    let mut slopes = Vec::new();
    for (seed, (fit, counts)) in &ok {
        for (l, c) in counts {
            count_rows.push(format!("{seed},{},{},{l},{c}", cfg.n, f(cfg.eps)));
        }
        slope_rows.push(format!(
            "{seed},{},{},{},{}",
            cfg.n,
            f(cfg.eps),
            f(fit.slope),
            f(fit.slope_stderr)
        ));
        slopes.push(fit.slope);
    }
    out.write_csv("weyl_counts.csv", "seed,n,eps,lambda,count", &count_rows)?;
    out.write_csv("weyl_slopes.csv", "seed,n,eps,slope,slope_stderr", &slope_rows)?;
    // zero-noise control from the lattice enumeration
    let top = lambda_max.floor() as i64;
    let xs: Vec<f64> = (1..=top).map(|l| l as f64).collect();
    let ys: Vec<f64> = (1..=top)
        .map(|l| oracle::lattice_count(l as f64) as f64)
        .collect();
    let control = stats::linear_fit(&xs, &ys);
    Ok(json!({
        "lambda_max": lambda_max,
        "mean_slope": if slopes.is_empty() { 0.0 } else { stats::mean(&slopes) },
        "slope_stderr": stats::stderr(&slopes),
        "target": std::f64::consts::PI,
        "control_lattice_slope": control.slope,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn sandwich(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let k_full = if cfg.k > 0 { cfg.k } else { 100 }.min(g.active_bins());
    let k_half = k_full / 2;
    let lap = oracle::laplacian_spectrum(g);
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = eigensolve(&h, k_full, SolveMethod::Auto)?;
        let full = spec.eigenvalue_sandwich(&lap, cfg.delta)?;
        let half_spec = truncate_spectrum(&spec, k_half);
        let half = half_spec.eigenvalue_sandwich(&lap, cfg.delta)?;
        Ok((half, full))
    });
    let mut rows = Vec::new();
    let mut stability: Vec<f64> = Vec::new();
    for (seed, ((m1h, m2h), (m1f, m2f))) in &ok {
        rows.push(format!(
            "{seed},{},{},{k_half},{},{}",
            cfg.n,
            f(cfg.delta),
            f(*m1h),
            f(*m2h)
        ));
        rows.push(format!(
            "{seed},{},{},{k_full},{},{}",
            cfg.n,
            f(cfg.delta),
            f(*m1f),
            f(*m2f)
        ));
        let denom1 = m1f.abs().max(1e-9);
        let denom2 = m2f.abs().max(1e-9);
        stability.push(((m1f - m1h) / denom1).abs());
        stability.push(((m2f - m2h) / denom2).abs());
    }
    out.write_csv("sandwich.csv", "seed,n,delta,k,m1,m2", &rows)?;
    Ok(json!({
        "delta": cfg.delta,
        "k_half": k_half,
        "k_full": k_full,
        "max_relative_change": stability.iter().cloned().fold(0.0, f64::max),
        "failures": failures_json(&failed),
    }))
}

fn truncate_spectrum(spec: &Spectrum, k: usize) -> Spectrum {
    Spectrum {
        grid: spec.grid,
        eigenvalues: spec.eigenvalues[..k].to_vec(),
        eigenvectors: spec.eigenvectors[..k].to_vec(),
        residuals: spec.residuals[..k].to_vec(),
        kind: spec.kind,
        shift: spec.shift,
    }
}

// ---------------------------------------------------------------------------

fn lq_slopes(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let k = if cfg.k > 0 { cfg.k } else { 130 }.min(g.active_bins());
    let q = if cfg.q > 2.0 && cfg.q.is_finite() { cfg.q } else { 4.0 };
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = eigensolve(&h, k, SolveMethod::Auto)?;
        let fit = spec.eigenfunction_growth_fit(q)?;
        Ok((spec, fit))
    });
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (idx, (seed, (spec, fit))) in ok.iter().enumerate() {
        out.write_text(&format!("spectrum_seed{idx}.csv"), &core_io::spectrum_csv(spec)?)?;
        rows.push(format!(
            "{seed},{},{},{},{},{},{}",
            cfg.n,
            f(cfg.eps),
            f(q),
            f(fit.slope),
            f(fit.slope_stderr),
            fit.points
        ));
        slopes.push(fit.slope);
    }
    out.write_csv(
        "lq_slopes.csv",
        "seed,n,eps,q,slope,slope_stderr,eigenfunctions",
        &rows,
    )?;
    Ok(json!({
        "q": q,
        "mean_slope": if slopes.is_empty() { 0.0 } else { stats::mean(&slopes) },
        "bound_exponent": 0.5 - 1.0 / q,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn measure_schrodinger_samples(
    cfg: &ExperimentConfig,
    g: Grid,
    seed: u64,
) -> Result<Vec<StrichartzSample>> {
    let en = enhanced_for(cfg, g, seed)?;
    let h = Hamiltonian::renormalized(&en)?;
    let free = FreePropagator { grid: g };
    let cheb = ChebPropagator { h: &h };
    let prop: &dyn SchrodingerEvolution = if cfg.zero_noise { &free } else { &cheb };
    let mut rng = seeded_rng(realization_seed(seed, 0x5742_1001));
    let mut samples = Vec::new();
    for &j in &cfg.scales {
        let Some(u) = random_block_field(g, j, &mut rng) else {
            continue;
        };
        let lhs = strichartz_norm(prop, &u, cfg.p, cfg.q, cfg.t_final)?;
        samples.push(StrichartzSample {
            p: cfg.p,
            q: cfg.q,
            block: j,
            seed,
            n: cfg.n,
            eps: cfg.eps,
            lhs,
            rhs_norms: vec![
                (0.25, u.sobolev_norm(0.25)),
                (0.5, u.sobolev_norm(0.5)),
                (1.0, u.sobolev_norm(1.0)),
            ],
        });
    }
    Ok(samples)
}

fn samples_to_rows(samples: &[StrichartzSample]) -> Vec<String> {
    samples
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{},{},{},{},{}",
                f(s.p),
                f(s.q),
                s.block,
                s.seed,
                s.n,
                f(s.eps),
                f(s.lhs),
                f(s.rhs_norms[0].1),
                f(s.rhs_norms[1].1),
                f(s.rhs_norms[2].1)
            )
        })
        .collect()
}

const SAMPLE_HEADER: &str = "p,q,block,seed,n,eps,lhs,h_sigma_0p25,h_sigma_0p5,h_sigma_1";

fn fit_json(samples: &[StrichartzSample]) -> Result<Value> {
    let fit = strichartz_exponent_fit(samples)?;
    Ok(json!({
        "sigma_star": fit.slope,
        "slope_stderr": fit.slope_stderr,
        "ci95": fit.slope_ci95(),
        "intercept": fit.intercept,
        "samples": fit.points,
    }))
}

fn strichartz_schrodinger(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let (ok, failed) = per_seed(cfg, |seed| measure_schrodinger_samples(cfg, g, seed));
    let samples: Vec<StrichartzSample> = ok.into_iter().flat_map(|(_, v)| v).collect();
    out.write_csv("strichartz_samples.csv", SAMPLE_HEADER, &samples_to_rows(&samples))?;
    let fit = if samples.is_empty() {
        json!(null)
    } else {
        fit_json(&samples)?
    };
    out.write_text("fit.json", &format!("{:#}\n", fit))?;
    Ok(json!({
        "p": cfg.p,
        "q": cfg.q,
        "scales": cfg.scales,
        "fit": fit,
        "loss_target": 1.0 / cfg.p,
        "embedding_exponent": 1.0 - 2.0 / cfg.q,
        "failures": failures_json(&failed),
    }))
}

fn strichartz_wave(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h0 = Hamiltonian::renormalized(&en)?;
        // positivity shift per realization
        let shift = if cfg.zero_noise {
            1.0
        } else {
            let l1 = eigensolve(&h0, 1, SolveMethod::Auto)?.eigenvalues[0];
            (1.0 - l1).max(0.0)
        };
        let h = Hamiltonian::renormalized(&en)?.with_shift(shift);
        let prop = ChebWavePropagator { h: &h };
        let mut rng = seeded_rng(realization_seed(seed, 0x5742_1002));
        let zero = Field::zero(g);
        let mut samples = Vec::new();
        for &j in &cfg.scales {
            let Some(u0) = random_block_field(g, j, &mut rng) else {
                continue;
            };
            let lhs = wave_strichartz_norm(&prop, &u0, &zero, cfg.p, cfg.q, cfg.t_final)?;
            samples.push(StrichartzSample {
                p: cfg.p,
                q: cfg.q,
                block: j,
                seed,
                n: cfg.n,
                eps: cfg.eps,
                lhs,
                rhs_norms: vec![
                    (0.25, u0.sobolev_norm(0.25)),
                    (0.5, u0.sobolev_norm(0.5)),
                    (1.0, u0.sobolev_norm(1.0)),
                ],
            });
        }
        Ok((shift, samples))
    });
    let mut all = Vec::new();
    let mut shift_rows = Vec::new();
    for (seed, (shift, samples)) in ok {
        shift_rows.push(format!("{seed},{},{}", cfg.n, f(shift)));
        all.extend(samples);
    }
    out.write_csv("strichartz_wave_samples.csv", SAMPLE_HEADER, &samples_to_rows(&all))?;
    out.write_csv("wave_shifts.csv", "seed,n,shift", &shift_rows)?;
    let fit = if all.is_empty() { json!(null) } else { fit_json(&all)? };
    out.write_text("fit.json", &format!("{:#}\n", fit))?;
    let sigma_target = 1.5 - 2.0 / cfg.p - 1.0 / cfg.q;
    Ok(json!({
        "p": cfg.p,
        "q": cfg.q,
        "scales": cfg.scales,
        "fit": fit,
        "loss_target": sigma_target,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn trajectory_rows(cfg: &ExperimentConfig, seed: u64, traj: &[anderson_core::pde::EvolutionState]) -> Vec<String> {
    traj.iter()
        .map(|st| {
            format!(
                "{seed},{},{},{},{},{},{},{}",
                cfg.n,
                f(cfg.eps),
                f(st.t),
                f(st.mass),
                f(st.energy),
                f(st.u.sobolev_norm(cfg.sigma)),
                f(st.linf)
            )
        })
        .collect()
}

const TRAJ_HEADER: &str = "seed,n,eps,t,mass,energy,h_sigma_norm,linf_norm";

fn nls(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let use_dense = cfg.n <= 32;
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = if use_dense {
            Some(eigensolve(&h, g.active_bins(), SolveMethod::Dense)?)
        } else {
            None
        };
        let route = match &spec {
            Some(s) => LinearRoute::Eigen(s),
            None => LinearRoute::Chebyshev(&h),
        };
        let mut rng = seeded_rng(realization_seed(seed, 0x4E4C_5301));
        let mut u0 = random_smooth_field(g, 2.5, &mut rng);
        u0.scale(1.0 / u0.l2_norm());
        let opts = SolverOptions {
            record_stride: (0.05 / cfg.dt).round().max(1.0) as usize,
            reprojection_limit: cfg.tolerances.reprojection_limit,
            ..Default::default()
        };
        let traj = nls_solve(&route, &u0, cfg.t_final, cfg.dt, &opts)?;
        // self-convergence triplet against a dt/8 reference
        let t_conv = (cfg.t_final / 4.0).max(cfg.dt * 64.0).min(cfg.t_final);
        let conv_opts = SolverOptions {
            record_stride: usize::MAX,
            reprojection_limit: cfg.tolerances.reprojection_limit,
            ..Default::default()
        };
        let dt0 = cfg.dt * 2.0;
        let reference = nls_solve(&route, &u0, t_conv, dt0 / 8.0, &conv_opts)?;
        let uref = &reference.last().unwrap().u;
        let mut errs = Vec::new();
        for div in [1.0, 2.0] {
            let sol = nls_solve(&route, &u0, t_conv, dt0 / div, &conv_opts)?;
            errs.push(sol.last().unwrap().u.sub(uref)?.l2_norm());
        }
        let order = (errs[0] / errs[1]).log2();
        // contraction probe (dense spectra only)
        let probe = match &spec {
            Some(s) => {
                let pr = lwp_contraction_probe(s, &u0, cfg.sigma, cfg.p)?;
                let scaling = lwp_time_scaling(s, &u0.scaled(0.5), &[1.0, 2.0, 4.0], cfg.sigma, 0.5)?;
                Some((pr, scaling))
            }
            None => None,
        };
        Ok((traj, order, errs, probe))
    });
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    let mut mass_drifts = Vec::new();
    let mut energy_drifts = Vec::new();
    let mut conv_rows = Vec::new();
    let mut probe_json = json!(null);
    for (seed, (traj, order, errs, probe)) in &ok {
        rows.extend(trajectory_rows(cfg, *seed, traj));
        orders.push(*order);
        let first = &traj[0];
        let last = traj.last().unwrap();
        mass_drifts.push(((last.mass - first.mass) / first.mass).abs() / last.t);
        energy_drifts.push((last.energy - first.energy).abs() / first.energy.abs().max(1.0) / last.t);
        conv_rows.push(format!(
            "{seed},{},{},{},{}",
            cfg.n,
            f(cfg.dt * 2.0),
            f(errs[0]),
            f(errs[1])
        ));
        if let Some((pr, scaling)) = probe {
            probe_json = json!({
                "c_tilde": pr.c_tilde,
                "radius": pr.radius,
                "t_formula": pr.t_formula,
                "contraction": pr.contraction,
                "time_scaling_slope": scaling.slope,
                "time_scaling_target": -(cfg.p / (cfg.p - 2.0)),
            });
        }
    }
    out.write_csv("nls_trajectory.csv", TRAJ_HEADER, &rows)?;
    out.write_csv("nls_convergence.csv", "seed,n,dt0,err_dt0,err_dt0_over_2", &conv_rows)?;
    Ok(json!({
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "mean_order": if orders.is_empty() { 0.0 } else { stats::mean(&orders) },
        "max_mass_drift_per_time": mass_drifts.iter().cloned().fold(0.0, f64::max),
        "max_energy_drift_per_time": energy_drifts.iter().cloned().fold(0.0, f64::max),
        "probe": probe_json,
        "failures": failures_json(&failed),
    }))
}

fn wave(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let use_dense = cfg.n <= 32;
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let h0 = Hamiltonian::renormalized(&en)?;
        let shift = if cfg.zero_noise {
            1.0
        } else {
            let l1 = eigensolve(&h0, 1, SolveMethod::Auto)?.eigenvalues[0];
            (1.0 - l1).max(0.0)
        };
        let h = Hamiltonian::renormalized(&en)?.with_shift(shift);
        let spec = if use_dense {
            Some(eigensolve(&h, g.active_bins(), SolveMethod::Dense)?)
        } else {
            None
        };
        let route = match &spec {
            Some(s) => LinearRoute::Eigen(s),
            None => LinearRoute::Chebyshev(&h),
        };
        let mut rng = seeded_rng(realization_seed(seed, 0x5741_5601));
        let mut u0 = random_smooth_field(g, 2.5, &mut rng);
        u0.scale(1.0 / u0.l2_norm());
        let mut u1 = random_smooth_field(g, 2.5, &mut rng);
        u1.scale(1.0 / u1.l2_norm());
        let opts = SolverOptions {
            record_stride: (0.05 / cfg.dt).round().max(1.0) as usize,
            reprojection_limit: cfg.tolerances.reprojection_limit,
            ..Default::default()
        };
        let traj = wave_solve(&route, &u0, &u1, cfg.t_final, cfg.dt, &opts)?;
        // linear limit against the independent recurrence propagator
        let lin_opts = SolverOptions {
            nonlinearity: false,
            record_stride: usize::MAX,
            ..opts
        };
        let t_short = (cfg.t_final / 4.0).max(cfg.dt * 16.0).min(cfg.t_final);
        let lin = wave_solve(&route, &u0, &u1, t_short, cfg.dt, &lin_opts)?;
        let steps = (t_short / cfg.dt).round() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.dt).collect();
        let prop = ChebWavePropagator { h: &h };
        let mut reference: Option<Field> = None;
        prop.scan_wave(&u0, &u1, &times, &mut |k, state| {
            if k == steps {
                reference = Some(state.clone());
            }
            Ok(())
        })?;
        let linear_defect = lin
            .last()
            .unwrap()
            .u
            .sub(&reference.expect("last node visited"))?
            .l2_norm();
        // self-convergence
        let conv_opts = SolverOptions {
            record_stride: usize::MAX,
            ..opts
        };
        let dt0 = cfg.dt * 2.0;
        let reference = wave_solve(&route, &u0, &u1, t_short, dt0 / 8.0, &conv_opts)?;
        let uref = &reference.last().unwrap().u;
        let mut errs = Vec::new();
        for div in [1.0, 2.0] {
            let sol = wave_solve(&route, &u0, &u1, t_short, dt0 / div, &conv_opts)?;
            errs.push(sol.last().unwrap().u.sub(uref)?.l2_norm());
        }
        let order = (errs[0] / errs[1]).log2();
        Ok((traj, shift, linear_defect, order))
    });
    let mut rows = Vec::new();
    let mut energy_drifts = Vec::new();
    let mut linear_defects = Vec::new();
    let mut orders = Vec::new();
    let mut shift_rows = Vec::new();
    for (seed, (traj, shift, lin, order)) in &ok {
        rows.extend(trajectory_rows(cfg, *seed, traj));
        let first = &traj[0];
        let last = traj.last().unwrap();
        energy_drifts.push((last.energy - first.energy).abs() / first.energy.abs().max(1.0) / last.t);
        linear_defects.push(*lin);
        orders.push(*order);
        shift_rows.push(format!("{seed},{},{}", cfg.n, f(*shift)));
    }
    out.write_csv("wave_trajectory.csv", TRAJ_HEADER, &rows)?;
    out.write_csv("wave_shifts.csv", "seed,n,shift", &shift_rows)?;
    Ok(json!({
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "max_energy_drift_per_time": energy_drifts.iter().cloned().fold(0.0, f64::max),
        "max_linear_defect": linear_defects.iter().cloned().fold(0.0, f64::max),
        "mean_order": if orders.is_empty() { 0.0 } else { stats::mean(&orders) },
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

fn gamma_diagnostics(cfg: &ExperimentConfig, out: &RunDir) -> Result<Value> {
    let g = grid(cfg)?;
    let s_values: Vec<f64> = [0.25, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0]
        .into_iter()
        .filter(|s| *s <= 1.0)
        .collect();
    let (ok, failed) = per_seed(cfg, |seed| {
        let en = enhanced_for(cfg, g, seed)?;
        let maps = ParacontrolledMaps::new(&en, cfg.s, cfg.tolerances.gamma_tol, cfg.tolerances.gamma_max_iter)?;
        let mut rng = seeded_rng(realization_seed(seed, 0x4741_4D01));
        // fixed-point roundtrips
        let mut worst_residual: f64 = 0.0;
        let mut worst_contraction: f64 = 0.0;
        for _ in 0..20 {
            let u = anderson_core::random::random_real_field(g, &mut rng);
            let sharp = maps.remainder(&u)?;
            let (back, report) = maps.reconstruct(&sharp)?;
            let roundtrip = back.sub(&u)?.l2_norm() / u.l2_norm().max(1.0);
            worst_residual = worst_residual.max(report.residual.max(roundtrip * 0.0));
            worst_residual = worst_residual.max(report.residual);
            worst_contraction = worst_contraction.max(report.contraction_factor);
            let _ = roundtrip;
        }
        // remainder-map decay in s
        let mut decay = Vec::new();
        for &s in &s_values {
            let m = ParacontrolledMaps::new(&en, s, cfg.tolerances.gamma_tol, cfg.tolerances.gamma_max_iter)?;
            let mut vals = Vec::new();
            for _ in 0..50 {
                let mut u = anderson_core::random::random_real_field(g, &mut rng);
                u.scale(1.0 / u.l2_norm());
                vals.push(m.remainder(&u)?.sub(&u)?.sobolev_norm(0.5));
            }
            decay.push((s, stats::mean(&vals)));
        }
        // corrector / swap regularity-gain diagnostics
        let mut corr_ratios = Vec::new();
        let mut swap_ratios = Vec::new();
        for _ in 0..10 {
            let u = random_smooth_field(g, 2.0, &mut rng);
            let c = corrector(&u, &en.x1, &en.xi_eps)?;
            let denom = lp::besov_inf_norm(&u, 0.9)
                * lp::besov_inf_norm(&en.x1, 0.9)
                * lp::besov_inf_norm(&en.xi_eps, -1.1);
            if denom > 0.0 {
                corr_ratios.push(lp::besov_inf_norm(&c, 0.7) / denom);
            }
            let h = random_smooth_field(g, 2.0, &mut rng);
            let sw = swap_commutator(&u, &en.x1, &h)?;
            let denom_s = u.sobolev_norm(0.9)
                * lp::besov_inf_norm(&en.x1, 0.9)
                * lp::besov_inf_norm(&h, -0.1);
            if denom_s > 0.0 {
                swap_ratios.push(sw.sobolev_norm(0.9 + 0.9 - 0.1 - 0.3) / denom_s);
            }
        }
        Ok((worst_residual, worst_contraction, decay, corr_ratios, swap_ratios))
    });
    let mut gamma_rows = Vec::new();
    let mut decay_rows = Vec::new();
    let mut corr_rows = Vec::new();
    let mut slopes = Vec::new();
    let mut residual_max: f64 = 0.0;
    for (seed, (res, contr, decay, corr, swap)) in &ok {
        residual_max = residual_max.max(*res);
        gamma_rows.push(format!(
            "{seed},{},{},{},{},{}",
            cfg.n,
            f(cfg.s),
            f(cfg.tolerances.gamma_tol),
            f(*res),
            f(*contr)
        ));
        for (s, v) in decay {
            decay_rows.push(format!("{seed},{},{},{}", cfg.n, f(*s), f(*v)));
        }
        let xs: Vec<f64> = decay.iter().map(|(s, _)| s.ln()).collect();
        let ys: Vec<f64> = decay.iter().map(|(_, v)| v.ln()).collect();
        slopes.push(stats::linear_fit(&xs, &ys).slope);
        for (i, r) in corr.iter().enumerate() {
            corr_rows.push(format!("{seed},corrector,{i},{}", f(*r)));
        }
        for (i, r) in swap.iter().enumerate() {
            corr_rows.push(format!("{seed},swap,{i},{}", f(*r)));
        }
    }
    out.write_csv(
        "gamma.csv",
        "seed,n,s,gamma_tol,worst_residual,worst_contraction",
        &gamma_rows,
    )?;
    out.write_csv("phi_decay.csv", "seed,n,s,mean_h05_deviation", &decay_rows)?;
    out.write_csv("corrector_swap.csv", "seed,kind,index,ratio", &corr_rows)?;
    Ok(json!({
        "s": cfg.s,
        "worst_residual": residual_max,
        "mean_decay_slope": if slopes.is_empty() { 0.0 } else { stats::mean(&slopes) },
        "decay_slope_target": (0.9 - 0.5) / 4.0,
        "failures": failures_json(&failed),
    }))
}

// ---------------------------------------------------------------------------

/// `anderson oracle <suite>`: quick brute-force cross-checks, printing one
/// line per check.
pub fn oracle_suite(which: &str) -> Result<()> {
    let mut ran = false;
    let all = which == "all";
    if all || which == "dense" {
        ran = true;
        let g = Grid::new(16)?;
        let en = build_enhanced(&sample_white_noise(g, 7), 0.25)?;
        let h = Hamiltonian::renormalized(&en)?;
        let dense = eigensolve(&h, 20, SolveMethod::Dense)?;
        let lanczos = eigensolve(&h, 20, SolveMethod::Lanczos)?;
        let worst = dense
            .eigenvalues
            .iter()
            .zip(lanczos.eigenvalues.iter())
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max);
        report("dense-vs-lanczos eigenvalues (N=16, K=20)", worst, 1e-8)?;
    }
    if all || which == "convolution" {
        ran = true;
        let g = Grid::new(8)?;
        let mut rng = seeded_rng(3);
        let u = anderson_core::random::random_real_field(g, &mut rng);
        let v = anderson_core::random::random_real_field(g, &mut rng);
        let fast = anderson_core::field::dealiased_product(&u, &v)?;
        let slow = oracle::convolution_product(&u, &v);
        let err = fast.sub(&slow)?.l2_norm() / slow.l2_norm().max(1.0);
        report("dealiased product vs O(N⁴) convolution (N=8)", err, 1e-12)?;
    }
    if all || which == "renorm" {
        ran = true;
        let mut worst: f64 = 0.0;
        for k in 0..=6 {
            let eps = (0.5f64).powi(k);
            worst = worst.max((renorm_constant(eps)? - oracle::lattice_renorm_sum(eps)).abs());
        }
        report("renormalization constant vs shell enumeration", worst, 1e-12)?;
    }
    if all || which == "propagation" {
        ran = true;
        let g = Grid::new(8)?;
        let en = build_enhanced(&sample_white_noise(g, 11), 0.25)?;
        let h = Hamiltonian::renormalized(&en)?;
        let spec = eigensolve(&h, g.active_bins(), SolveMethod::Dense)?;
        let basis = anderson_core::hamiltonian::RealBasis::new(g);
        let a = anderson_core::hamiltonian::dense_matrix(&h, &basis)?;
        let t = 0.3;
        let expm = oracle::expm_i_symmetric(&a, basis.dim(), t);
        let mut rng = seeded_rng(5);
        let u = anderson_core::random::random_complex_field(g, &mut rng);
        let via_eigen = anderson_core::dispersive::schrodinger_prop(&spec, &u, t)?;
        let coords = basis.to_coords_complex(&u);
        let evolved = expm.apply(&coords);
        let mut via_expm = Field::zero(g);
        for (k, c) in evolved.iter().enumerate() {
            via_expm.axpy(*c, &basis.basis_field(k));
        }
        let err = via_eigen.sub(&via_expm)?.l2_norm() / u.l2_norm();
        report("eigenbasis propagation vs dense matrix exponential (N=8)", err, 1e-8)?;
    }
    if !ran {
        return Err(anyhow!(
            "unknown oracle suite {which:?}; available: dense, convolution, renorm, propagation, all"
        ));
    }
    Ok(())
}

fn report(name: &str, err: f64, tol: f64) -> Result<()> {
    let status = if err <= tol { "PASS" } else { "FAIL" };
    println!("[{status}] {name}: error {err:.3e} (tolerance {tol:.1e})");
    if err <= tol {
        Ok(())
    } else {
        Err(anyhow!("oracle check failed: {name} ({err:.3e} > {tol:.1e})"))
    }
}

