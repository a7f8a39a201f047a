use roadfront::diagnostics::{waiting_time, FrontObserver, Slice, WaitingProbe};
use roadfront::roots::fit_line;
use roadfront::waves::{travelling_wave, WaveKind, WaveProfile};
use roadfront::{BoundarySpec, Frame, Observer, PhysicalParams, RunOptions, Series};
use serde::Serialize;
use serde_json::json;

use super::{
    build_model, consecutive_variation, sentinel, strictly_increasing, stride, sweep, Artifacts,
    Check, Findings,
};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result, RunContext};

/// Largest accepted change of `c(D) / sqrt(D)` between consecutive `D`.
pub const SPEED_VARIATION: f64 = 0.15;
/// Accepted relative mismatch of each phase speed.
pub const PHASE_SPEED_TOL: f64 = 0.15;

/// Speed in the units of the normal frame.
fn physical_speed(w: &WaveProfile) -> f64 {
    match (w.kind, w.params.frame) {
        (WaveKind::FullSystem, Frame::Rescaled) => w.speed * w.params.road_diffusivity.sqrt(),
        _ => w.speed,
    }
}

#[derive(Debug, Clone, Serialize)]
struct SpeedRow {
    id: String,
    #[serde(rename = "D")]
    road_diffusivity: f64,
    /// Speed in the integration frame.
    frame_speed: f64,
    c: f64,
    c_over_sqrt_d: f64,
    lambda: f64,
    lambda_tilde: f64,
}

fn sorted_by_d<T: Clone>(rows: &[(f64, T)]) -> Vec<T> {
    let mut v = rows.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.into_iter().map(|(_, t)| t).collect()
}

/// Travelling-wave speed for each swept `D`.
pub fn speed_scaling(cfg: &ExperimentConfig) -> Result<Findings> {
    let rows = sweep(cfg, |p| {
        let w = travelling_wave(&p.params, &cfg.reaction, WaveKind::FullSystem, &cfg.wave)
            .in_run(&p.id)?;
        let c = physical_speed(&w);
        let dd = p.params.road_diffusivity;
        Ok(SpeedRow {
            id: p.id.clone(),
            road_diffusivity: dd,
            frame_speed: w.speed,
            c,
            c_over_sqrt_d: c / dd.sqrt(),
            lambda: w.lambda,
            lambda_tilde: w.lambda_tilde,
        })
    })?;
    let rows: Vec<SpeedRow> = rows.into_iter().map(|(_, r)| r).collect();
    let ratios = sorted_by_d(
        &rows
            .iter()
            .map(|r| (r.road_diffusivity, r.c_over_sqrt_d))
            .collect::<Vec<_>>(),
    );
    let variation = consecutive_variation(&ratios);
    let mut checks = Vec::new();
    if ratios.len() >= 2 {
        checks.push(Check::new(
            "speed_ratio_variation",
            variation,
            format!("< {SPEED_VARIATION}"),
            variation < SPEED_VARIATION,
        ));
    }
    let table = rows
        .iter()
        .map(|r| vec![r.road_diffusivity, r.c, r.c_over_sqrt_d, r.frame_speed])
        .collect();
    let mut artifacts = Artifacts::default();
    artifacts.tables.push((
        "speeds".into(),
        vec!["D", "c", "c_over_sqrt_D", "frame_speed"],
        table,
    ));
    Ok(Findings {
        results: json!({ "speeds": rows, "max_consecutive_variation": variation }),
        checks,
        artifacts,
    })
}

#[derive(Debug, Clone, Serialize)]
struct WaitingRow {
    id: String,
    #[serde(rename = "D")]
    road_diffusivity: f64,
    wave_speed: f64,
    half_width: f64,
    waiting_time: Option<f64>,
    /// First time the road front exists.
    road_ignition: Option<f64>,
    first_phase_bottom_speed: Option<f64>,
    last_phase_road_speed: Option<f64>,
}

fn fit_slope(ts: &[f64], xs: &[f64]) -> Option<f64> {
    (ts.len() >= 3)
        .then(|| fit_line(ts, xs).ok().map(|f| f.slope))
        .flatten()
}

/// Speeds over the two phases of a run started from a field datum.
///
/// The first phase ends when the road first carries a `theta` crossing; its
/// leading `skip` fraction is discarded. The last phase is the trailing
/// `last` fraction of the samples where the road front exists.
pub(crate) fn phase_speeds(
    bottom: &Series,
    road: &Series,
    skip: f64,
    last: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let b = bottom.column("right").unwrap_or_default();
    let r = road.column("right").unwrap_or_default();
    let ignition = r.iter().position(|x| !x.is_nan());
    let end = ignition.unwrap_or(r.len());
    let start = (skip * end as f64) as usize;
    let (ts, xs): (Vec<f64>, Vec<f64>) = (start..end)
        .filter(|&k| !b[k].is_nan())
        .map(|k| (bottom.times[k], b[k]))
        .unzip();
    let first = fit_slope(&ts, &xs);

    let valid: Vec<usize> = (0..r.len()).filter(|&k| !r[k].is_nan()).collect();
    let from = ((1.0 - last) * valid.len() as f64) as usize;
    let (ts, xs): (Vec<f64>, Vec<f64>) =
        valid[from..].iter().map(|&k| (road.times[k], r[k])).unzip();
    let second = fit_slope(&ts, &xs);
    (ignition.map(|k| road.times[k]), first, second)
}

/// Two-speed invasion from a field datum of bounded support, for each swept
/// `D`: phase speeds against the Robin-only and full wave speeds, and the
/// time `t_D` to fill `|x| < M sqrt(D)` up to `1 - delta`.
pub fn waiting_time_scaling(cfg: &ExperimentConfig) -> Result<Findings> {
    let t_end = cfg
        .run
        .t_end
        .ok_or_else(|| config_err("run.t_end", "required for waiting_time_scaling"))?;
    let w = &cfg.waiting;
    let base = cfg.params();
    let robin = travelling_wave(&base, &cfg.reaction, WaveKind::RobinOnly, &cfg.wave)
        .in_run("robin_only_wave")?;
    let robin_speed = robin.speed;

    let rows = sweep(cfg, |p| {
        let id = &p.id;
        let params: PhysicalParams = p.params;
        let wave = travelling_wave(
            &params.with_frame(Frame::Rescaled),
            &cfg.reaction,
            WaveKind::FullSystem,
            &cfg.wave,
        )
        .in_run(&format!("{id}/wave"))?;
        let c = physical_speed(&wave);
        let grid = cfg.grid.resolve(&params, Some(c), t_end)?;
        let model = build_model(cfg, id, params, grid, BoundarySpec::exchange())?;
        let theta = cfg.reaction.threshold;
        let mut bottom = FrontObserver::new("bottom_front", Slice::Row(0), theta);
        let mut road = FrontObserver::new("road_front", Slice::Road, theta);
        let mut probe = WaitingProbe {
            half_width: w.m * params.road_diffusivity.sqrt(),
            depth: w.depth.unwrap_or(params.depth),
        };
        let mut guard = sentinel(cfg);
        let mut observers: Vec<&mut dyn Observer> = vec![&mut bottom, &mut road, &mut probe];
        if cfg.run.sentinel {
            observers.push(&mut guard);
        }
        let opts = RunOptions::until(t_end)
            .every(stride(cfg, model.max_dt()))
            .with_initial();
        let initial = super::initial_state(cfg, id, params, &grid)?;
        let rec = model.run(initial, &opts, &mut observers).in_run(id)?;

        let b = rec.series("bottom_front").expect("bottom observer");
        let r = rec.series("road_front").expect("road observer");
        let (road_ignition, first, second) = phase_speeds(b, r, w.skip, w.last);
        let t_d = waiting_time(rec.series("waiting").expect("waiting probe"), w.delta);
        let row = WaitingRow {
            id: id.clone(),
            road_diffusivity: params.road_diffusivity,
            wave_speed: c,
            half_width: grid.x_max,
            waiting_time: t_d,
            road_ignition,
            first_phase_bottom_speed: first,
            last_phase_road_speed: second,
        };
        let mut art = Artifacts::default();
        art.series
            .extend(rec.series.into_iter().map(|s| (id.clone(), s)));
        Ok((row, art))
    })?;

    let (rows, arts): (Vec<WaitingRow>, Vec<Artifacts>) = rows.into_iter().map(|(_, r)| r).unzip();
    let mut by_d: Vec<&WaitingRow> = rows.iter().collect();
    by_d.sort_by(|a, b| a.road_diffusivity.total_cmp(&b.road_diffusivity));
    let mut checks = Vec::new();
    if let Some(top) = by_d.last() {
        let rel =
            |v: Option<f64>, target: f64| v.map_or(f64::INFINITY, |v| (v / target - 1.0).abs());
        let e1 = rel(top.first_phase_bottom_speed, robin_speed);
        let e2 = rel(top.last_phase_road_speed, top.wave_speed);
        checks.push(Check::new(
            "first_phase_speed",
            e1,
            format!("< {PHASE_SPEED_TOL}"),
            e1 < PHASE_SPEED_TOL,
        ));
        checks.push(Check::new(
            "last_phase_speed",
            e2,
            format!("< {PHASE_SPEED_TOL}"),
            e2 < PHASE_SPEED_TOL,
        ));
    }
    if by_d.len() >= 2 {
        let times: Option<Vec<f64>> = by_d.iter().map(|r| r.waiting_time).collect();
        let ok = times.as_deref().is_some_and(strictly_increasing);
        let worst = times.as_deref().map_or(f64::NAN, |t| {
            t.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
        });
        checks.push(Check::new(
            "waiting_time_increasing",
            worst,
            "> 0 (smallest increment)",
            ok,
        ));
    }
    let mut artifacts = super::merge(arts);
    let table = by_d
        .iter()
        .map(|r| {
            let o = |x: Option<f64>| x.unwrap_or(f64::NAN);
            vec![
                r.road_diffusivity,
                o(r.waiting_time),
                r.wave_speed,
                o(r.first_phase_bottom_speed),
                o(r.last_phase_road_speed),
            ]
        })
        .collect();
    artifacts.tables.push((
        "waiting_times".into(),
        vec!["D", "t_D", "c", "first_phase_speed", "last_phase_speed"],
        table,
    ));
    Ok(Findings {
        results: json!({ "robin_only_speed": robin_speed, "runs": rows }),
        checks,
        artifacts,
    })
}
