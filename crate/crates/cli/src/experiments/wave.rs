use roadfront::waves::{travelling_wave, WaveKind};
use serde::Serialize;
use serde_json::json;

use super::{sweep, Artifacts, Findings};
use crate::config::ExperimentConfig;
use crate::error::{Result, RunContext};

#[derive(Debug, Clone, Serialize)]
struct WaveRow {
    id: String,
    c: f64,
    speed_stderr: f64,
    lambda: f64,
    lambda_tilde: f64,
    fit_rms: f64,
    shape_rate: f64,
}

/// Travelling wave of the given kind at every sweep point. Each profile is
/// kept as a single snapshot with a JSON sidecar next to it.
pub fn wave_profiles(cfg: &ExperimentConfig, kind: WaveKind) -> Result<Findings> {
    let waves = sweep(cfg, |p| {
        travelling_wave(&p.params, &cfg.reaction, kind, &cfg.wave).in_run(&p.id)
    })?;
    let mut artifacts = Artifacts::default();
    let mut rows = Vec::new();
    for (p, w) in waves {
        rows.push(WaveRow {
            id: p.id.clone(),
            c: w.speed,
            speed_stderr: w.speed_stderr,
            lambda: w.lambda,
            lambda_tilde: w.lambda_tilde,
            fit_rms: w.fit_rms,
            shape_rate: w.shape_rate,
        });
        let sidecar = serde_json::to_value(w.sidecar())?;
        artifacts.json.push((
            format!("snapshots/{}/wave.json", crate::output::sanitize(&p.id)),
            sidecar,
        ));
        artifacts.snapshots.push((p.id, w.grid, vec![w.state()]));
    }
    Ok(Findings {
        results: json!({ "kind": kind, "waves": rows }),
        checks: Vec::new(),
        artifacts,
    })
}
