use rayon::prelude::*;
use roadfront::certificates::{
    build_certificate, derive_cert_params, residual, CertOptions, CertificateKind, ResidualOptions,
    ResidualReport, Zone, RESIDUAL_CONSTANT,
};
use roadfront::waves::{travelling_wave, WaveKind, WaveOptions};
use roadfront::Frame;
use serde::Serialize;
use serde_json::json;

use super::{Artifacts, Check, Findings};
use crate::config::{ExperimentConfig, Resolution};
use crate::error::{config_err, Result, RunContext};

/// Smallest accepted reduction of the violation from one resolution to the next.
pub const CONVERGENCE_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct CertificateRow {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    pub wave_speed: f64,
    pub reports: Vec<ResidualReport>,
}

fn kind_code(k: CertificateKind) -> f64 {
    match k {
        CertificateKind::FrontlikeSuper => 0.0,
        CertificateKind::FrontlikeSub => 1.0,
        CertificateKind::PairwaveSub => 2.0,
        CertificateKind::PairwaveSuperMin => 3.0,
    }
}

fn options(cfg: &ExperimentConfig, kind: CertificateKind) -> CertOptions {
    let mut o = match kind {
        CertificateKind::FrontlikeSuper | CertificateKind::FrontlikeSub => {
            CertOptions::frontlike(cfg.certificate.alpha0)
        }
        CertificateKind::PairwaveSub | CertificateKind::PairwaveSuperMin => CertOptions::pairwave(),
    };
    o.closure = cfg.certificate.closure;
    o
}

fn at_resolution(cfg: &ExperimentConfig, res: &Resolution) -> Result<CertificateRow> {
    let run = format!("nx={},ny={}", res.nx, res.ny);
    let params = cfg.params();
    let mut opts: WaveOptions = cfg.wave.clone();
    opts.nx = res.nx;
    opts.ny = res.ny;
    opts.scheme.road_substeps = res.road_substeps;
    let wave = travelling_wave(&params, &cfg.reaction, WaveKind::FullSystem, &opts).in_run(&run)?;
    let consts = cfg.reaction.derive_constants()?;
    let ropts = ResidualOptions {
        margin_cells: cfg.certificate.margin_cells,
        residual_constant: cfg
            .certificate
            .residual_constant
            .unwrap_or(RESIDUAL_CONSTANT),
    };
    let reports = cfg
        .certificate
        .kinds
        .iter()
        .map(|&kind| {
            let cp = derive_cert_params(&wave, &consts, &options(cfg, kind)).in_run(&run)?;
            let gamma = cp.gamma().in_run(&run)?;
            let cert = build_certificate(&wave, &cp, &gamma, kind).in_run(&run)?;
            residual(&cert, &cfg.certificate.sample_times, &ropts).in_run(&run)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CertificateRow {
        nx: res.nx,
        ny: res.ny,
        dx: wave.grid.dx,
        dt: wave.dt,
        wave_speed: wave.speed,
        reports,
    })
}

/// Residuals of the configured certificates, built from a wave computed at
/// each resolution; each resolution should halve the spacing of the previous.
pub fn certificate_check(cfg: &ExperimentConfig) -> Result<Findings> {
    if cfg.params().frame != Frame::Rescaled {
        return Err(config_err(
            "params.frame",
            "certificates are built in the rescaled frame",
        ));
    }
    let rows = cfg
        .certificate
        .resolutions
        .par_iter()
        .map(|r| at_resolution(cfg, r))
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    for row in &rows {
        for rep in &row.reports {
            checks.push(Check::new(
                format!("residual[{:?}@nx={}]", rep.kind, row.nx),
                rep.violation,
                format!("<= {:e} in every zone", rep.tol),
                rep.pass,
            ));
        }
    }
    for pair in rows.windows(2) {
        for (a, b) in pair[0].reports.iter().zip(&pair[1].reports) {
            // A finer grid without violation has nothing left to shrink.
            let ratio = if b.violation > 0.0 {
                a.violation / b.violation
            } else {
                f64::INFINITY
            };
            checks.push(Check::at_least(
                format!(
                    "convergence[{:?}@nx={}->{}]",
                    a.kind, pair[0].nx, pair[1].nx
                ),
                ratio,
                CONVERGENCE_FACTOR,
            ));
        }
    }

    let mut table = Vec::new();
    for row in &rows {
        for rep in &row.reports {
            let zones = rep.zones.iter().map(|(z, s)| {
                let code = match z {
                    Zone::Behind => 0.0,
                    Zone::Middle => 1.0,
                    Zone::Ahead => 2.0,
                };
                (code, s)
            });
            for (code, s) in zones.chain(std::iter::once((3.0, &rep.boundary))) {
                table.push(vec![
                    row.nx as f64,
                    row.dx,
                    row.dt,
                    kind_code(rep.kind),
                    code,
                    s.min,
                    s.max,
                    rep.tol,
                ]);
            }
        }
    }
    let mut artifacts = Artifacts::default();
    artifacts.tables.push((
        "residuals".into(),
        vec!["nx", "dx", "dt", "kind", "zone", "min", "max", "tol"],
        table,
    ));
    Ok(Findings {
        results: json!({ "resolutions": rows }),
        checks,
        artifacts,
    })
}
