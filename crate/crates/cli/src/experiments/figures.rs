use roadfront::diagnostics::{band_area, inf_norms, sup_norms, FrontObserver, MassObserver, Slice};
use roadfront::{BoundarySpec, Control, FnObserver, Observer, RunOptions};
use serde::Serialize;
use serde_json::json;

use super::{build_model, sentinel, stride, sweep, Artifacts, Check, Findings};
use crate::config::ExperimentConfig;
use crate::error::{Result, RunContext};

/// Bounds of the invariant region `0 <= mu u, v <= 1`, up to rounding.
pub const INVARIANT_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
struct FigureRun {
    id: String,
    dt: f64,
    steps: usize,
    t_end: f64,
    road_substeps: usize,
    snapshot_times: Vec<f64>,
    min_value: f64,
    max_value: f64,
    final_mass: f64,
}

/// Runs the configured data and keeps snapshots at `run.snapshot_times`,
/// sampling the range of `(mu u, v)` to check the invariant region.
pub fn reproduce_figures(cfg: &ExperimentConfig) -> Result<Findings> {
    let runs = sweep(cfg, |point| {
        let id = &point.id;
        let params = point.params;
        let grid = cfg
            .grid
            .resolve(&params, None, cfg.run.t_end.unwrap_or(0.0))?;
        let model = build_model(cfg, id, params, grid, BoundarySpec::exchange())?;
        let t_end = cfg.t_end(model.max_dt())?;
        let initial = super::initial_state(cfg, id, params, &grid)?;
        let theta = cfg.reaction.threshold;

        let mut mass = MassObserver;
        let mut road = FrontObserver::new("road_front", Slice::Road, theta);
        let mut top = FrontObserver::new("top_front", Slice::Top, theta);
        let mut range = FnObserver::new(
            "range",
            &[
                "min_mu_u",
                "max_mu_u",
                "min_v",
                "max_v",
                "area_below_threshold",
            ],
            |m: &roadfront::Model, s: &roadfront::State, out: &mut Vec<f64>| {
                let mu = m.params.exchange_rate;
                let (lu, lv) = inf_norms(s, mu);
                let (su, sv) = sup_norms(s, mu);
                out.extend([lu, su, lv, sv, band_area(s, &m.grid, 0.0, theta)]);
                Control::Continue
            },
        );
        let mut guard = sentinel(cfg);
        let mut observers: Vec<&mut dyn Observer> =
            vec![&mut range, &mut mass, &mut road, &mut top];
        if cfg.run.sentinel {
            observers.push(&mut guard);
        }
        let opts = RunOptions::until(t_end)
            .every(stride(cfg, model.max_dt()))
            .with_initial()
            .snapshots(&cfg.run.snapshot_times);
        let rec = model.run(initial, &opts, &mut observers).in_run(id)?;

        let r = rec.series("range").expect("range observer");
        let col = |n: &str| r.column(n).unwrap_or_default();
        let min_value = col("min_mu_u")
            .into_iter()
            .chain(col("min_v"))
            .fold(f64::INFINITY, f64::min);
        let max_value = col("max_mu_u")
            .into_iter()
            .chain(col("max_v"))
            .fold(f64::NEG_INFINITY, f64::max);
        let final_mass = rec
            .series("mass")
            .and_then(|s| s.column("mass"))
            .and_then(|m| m.last().copied())
            .unwrap_or(f64::NAN);

        let summary = FigureRun {
            id: id.clone(),
            dt: rec.dt,
            steps: rec.steps,
            t_end,
            road_substeps: model.scheme.road_substeps,
            snapshot_times: rec.snapshots.iter().map(|s| s.t).collect(),
            min_value,
            max_value,
            final_mass,
        };
        let mut art = Artifacts::default();
        art.series
            .extend(rec.series.into_iter().map(|s| (id.clone(), s)));
        art.snapshots.push((id.clone(), grid, rec.snapshots));
        Ok((summary, art))
    })?;

    let min_value = runs
        .iter()
        .map(|(_, (r, _))| r.min_value)
        .fold(f64::INFINITY, f64::min);
    let max_value = runs
        .iter()
        .map(|(_, (r, _))| r.max_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::at_least("invariant_region_min", min_value, -INVARIANT_SLACK),
        Check::at_most("invariant_region_max", max_value, 1.0 + INVARIANT_SLACK),
    ];
    let (summaries, arts): (Vec<_>, Vec<_>) = runs.into_iter().map(|(_, r)| r).unzip();
    Ok(Findings {
        results: json!({ "runs": summaries }),
        checks,
        artifacts: super::merge(arts),
    })
}
