use roadfront::spectra::{
    dispersion_lambda, effective_diffusivity_at_depth, gaussian_oracle_error, lambda0, lambda1,
    mu_thresholds, DispersionResult,
};
use roadfront::{BoundarySpec, Frame, RunOptions};
use serde::Serialize;
use serde_json::json;

use super::{build_model, strictly_increasing, Artifacts, Check, Findings};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result, RunContext};

/// Normalised sup distance to the Gaussian at the last sampled time.
pub const HEAT_ERROR_MAX: f64 = 0.10;
/// Relative distance of the dispersion root to `a xi^2`.
pub const DISPERSION_TOL: f64 = 0.05;

/// Wavenumbers of the exported dispersion table.
const TABLE_XI: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];

fn dispersion_table(mu: f64, eps: f64, depth: f64) -> Result<Vec<DispersionResult>> {
    TABLE_XI
        .iter()
        .map(|&xi| dispersion_lambda(xi, mu, eps, depth).map_err(Into::into))
        .collect()
}

fn table_rows(rows: &[DispersionResult]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| vec![r.xi, r.lambda, r.asymptotic, r.rel_error])
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct HeatSample {
    t: f64,
    error: f64,
}

/// Linear road dynamics against the Gaussian of diffusivity
/// `a = (1 + mu eps^2) / (1 + mu L)`, plus the dispersion root at `heat.xi`.
/// Integrated in the rescaled frame with the reaction switched off.
pub fn heat_kernel_check(cfg: &ExperimentConfig) -> Result<Findings> {
    let params = cfg.params();
    if params.frame != Frame::Rescaled {
        return Err(config_err(
            "params.frame",
            "heat_kernel_check runs in the rescaled frame",
        ));
    }
    if cfg.scheme.reaction {
        return Err(config_err(
            "scheme.reaction",
            "heat_kernel_check needs the reaction off",
        ));
    }
    let (mu, depth) = (params.exchange_rate, params.depth);
    let eps = params.road_diffusivity.sqrt().recip();
    let a = effective_diffusivity_at_depth(mu, eps, depth);

    let t_end = cfg.heat.times.iter().copied().fold(0.0, f64::max);
    let grid = cfg.grid.resolve(&params, None, t_end)?;
    let model = build_model(cfg, "heat", params, grid, BoundarySpec::exchange())?;
    let initial = cfg.initial.build(&grid, mu);
    let u0 = initial.u.clone();
    let rec = model
        .run(
            initial,
            &RunOptions::until(t_end).snapshots(&cfg.heat.times),
            &mut [],
        )
        .in_run("heat")?;
    let samples = rec
        .snapshots
        .iter()
        .map(|s| {
            Ok(HeatSample {
                t: s.t,
                error: gaussian_oracle_error(&u0, &s.u, &grid, s.t, a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let root = dispersion_lambda(cfg.heat.xi, mu, eps, depth)?;
    let lam0 = lambda0(depth)?;
    let errors: Vec<f64> = samples.iter().map(|s| s.error).collect();
    let last = errors.last().copied().unwrap_or(f64::NAN);
    let reversed: Vec<f64> = errors.iter().rev().copied().collect();
    let checks = vec![
        Check::new(
            "heat_error_final",
            last,
            format!("< {HEAT_ERROR_MAX}"),
            last < HEAT_ERROR_MAX,
        ),
        Check::new(
            "heat_error_decreasing",
            errors
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max),
            "< 0 (largest increment)",
            strictly_increasing(&reversed),
        ),
        Check::new(
            "dispersion_root",
            root.rel_error,
            format!("< {DISPERSION_TOL}"),
            root.rel_error < DISPERSION_TOL,
        ),
    ];
    let table = dispersion_table(mu, eps, depth)?;
    let mut artifacts = Artifacts::default();
    artifacts.tables.push((
        "heat_errors".into(),
        vec!["t", "error"],
        samples.iter().map(|s| vec![s.t, s.error]).collect(),
    ));
    artifacts.tables.push((
        "dispersion".into(),
        vec!["xi", "lambda", "asymptotic", "rel_error"],
        table_rows(&table),
    ));
    Ok(Findings {
        results: json!({
            "effective_diffusivity": a,
            "eps": eps,
            "heat": samples,
            "dispersion": root,
            "lambda0": lam0,
        }),
        checks,
        artifacts,
    })
}

/// Spectral quantities of the configured constants, without time stepping:
/// the dispersion table, `lambda0`, `lambda1` and the exchange-rate bounds.
pub fn spectra_report(cfg: &ExperimentConfig) -> Result<Findings> {
    let params = cfg.params();
    let (mu, depth, d) = (params.exchange_rate, params.depth, params.field_diffusivity);
    let eps = params.road_diffusivity.sqrt().recip();
    let table = dispersion_table(mu, eps, depth)?;
    let consts = cfg.reaction.derive_constants()?;
    let l0 = cfg.steady.invasion_depth.unwrap_or(0.5 * depth);
    let bounds = mu_thresholds(&consts, &params, cfg.reaction.threshold, l0).ok();
    let mut artifacts = Artifacts::default();
    artifacts.tables.push((
        "dispersion".into(),
        vec!["xi", "lambda", "asymptotic", "rel_error"],
        table_rows(&table),
    ));
    Ok(Findings {
        results: json!({
            "effective_diffusivity": effective_diffusivity_at_depth(mu, eps, depth),
            "lambda0": lambda0(depth)?,
            "lambda1": lambda1(depth, d)?,
            "mu_thresholds": bounds,
            "dispersion": table,
        }),
        checks: Vec::new(),
        artifacts,
    })
}
