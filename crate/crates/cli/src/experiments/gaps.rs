use rayon::prelude::*;
use roadfront::diagnostics::{coupling_time, field_gap, lockstep, pair_gap, GapSeries};
use roadfront::{BoundarySpec, Grid, State};
use serde::Serialize;
use serde_json::json;

use super::{build_model, strictly_increasing, sweep, Artifacts, Check, Findings};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result, RunContext};

/// The gap ratio must lie within this factor of `exp(-(a2 - a1))`.
pub const FLOW_RATIO_FACTOR: f64 = 10.0;

fn gap_table(g: &GapSeries) -> Vec<Vec<f64>> {
    g.times
        .iter()
        .zip(&g.gap)
        .map(|(&t, &v)| vec![t, v])
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct GapRow {
    id: String,
    #[serde(rename = "D")]
    road_diffusivity: f64,
    level: f64,
    coupling_time: Option<f64>,
    max_gap: f64,
}

/// Time until the field of the full system and of the Robin-only problem,
/// started from the same data, differ by `D^(-alpha/2)`.
pub fn coupling_gap(cfg: &ExperimentConfig) -> Result<Findings> {
    let t_end = cfg
        .run
        .t_end
        .ok_or_else(|| config_err("run.t_end", "required for coupling_gap"))?;
    let alpha = cfg.gap.alpha;
    let rows = sweep(cfg, |p| {
        let params = p.params;
        let grid = cfg.grid.resolve(&params, None, t_end)?;
        let full = build_model(cfg, &p.id, params, grid, BoundarySpec::exchange())?;
        let robin = build_model(cfg, &p.id, params, grid, BoundarySpec::robin_zero())?;
        let initial = super::initial_state(cfg, &p.id, params, &grid)?;
        let gaps = lockstep(
            (&full, initial.clone()),
            (&robin, initial),
            t_end,
            cfg.gap.every,
            |a, b| field_gap(a, b, &grid, None),
        )
        .in_run(&p.id)?;
        let dd = params.road_diffusivity;
        let row = GapRow {
            id: p.id.clone(),
            road_diffusivity: dd,
            level: dd.powf(-0.5 * alpha),
            coupling_time: coupling_time(&gaps, dd, alpha),
            max_gap: gaps.max(),
        };
        Ok((row, gaps))
    })?;
    let mut artifacts = Artifacts::default();
    let mut out = Vec::new();
    for (_, (row, gaps)) in rows {
        artifacts.tables.push((
            format!("gap_{}", crate::output::sanitize(&row.id)),
            vec!["t", "gap"],
            gap_table(&gaps),
        ));
        out.push(row);
    }
    let mut by_d: Vec<&GapRow> = out.iter().collect();
    by_d.sort_by(|a, b| a.road_diffusivity.total_cmp(&b.road_diffusivity));
    let mut checks = Vec::new();
    if by_d.len() >= 2 {
        let times: Option<Vec<f64>> = by_d.iter().map(|r| r.coupling_time).collect();
        let worst = times.as_deref().map_or(f64::NAN, |t| {
            t.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
        });
        checks.push(Check::new(
            "coupling_time_increasing",
            worst,
            "> 0 (smallest increment)",
            times.as_deref().is_some_and(strictly_increasing),
        ));
    }
    Ok(Findings {
        results: json!({ "alpha": alpha, "runs": out }),
        checks,
        artifacts,
    })
}

/// `sup e^{-|x|} |a - b|` over road (`mu u`) and field nodes.
fn weighted_gap(a: &State, b: &State, grid: &Grid, mu: f64) -> f64 {
    let mut gap: f64 = 0.0;
    for i in 0..grid.nx {
        let w = (-grid.x(i).abs()).exp();
        gap = gap.max(w * mu * (a.u[i] - b.u[i]).abs());
        for j in 0..grid.ny {
            gap = gap.max(w * (a.v_at(i, j) - b.v_at(i, j)).abs());
        }
    }
    gap
}

#[derive(Debug, Clone, Serialize)]
struct FlowRow {
    a: f64,
    /// `sup |difference|` over `[0, t_end] x [-window, window]`.
    window_gap: f64,
    /// `sup e^{-|x|} |difference|` over the same times and the whole domain.
    weighted_gap: f64,
}

/// Dependence of the solution near the origin on data far away: runs whose
/// data differ by `height` on `|x| > a`, for each `a`.
pub fn flow_continuity(cfg: &ExperimentConfig) -> Result<Findings> {
    let params = cfg.params();
    let flow = &cfg.flow;
    let grid = cfg.grid.resolve(&params, None, flow.t_end)?;
    if flow.a_values.iter().any(|&a| a >= grid.x_max) {
        return Err(config_err(
            "flow.a_values",
            "every a must lie inside the domain",
        ));
    }
    let mu = params.exchange_rate;
    let model = build_model(cfg, "flow", params, grid, BoundarySpec::exchange())?;
    let base = super::initial_state(cfg, "flow", params, &grid)?;
    let rows = flow
        .a_values
        .par_iter()
        .map(|&a| {
            let mut far = base.clone();
            for i in 0..grid.nx {
                if grid.x(i).abs() > a {
                    far.u[i] += flow.height / mu;
                    for j in 0..grid.ny {
                        far.v[j * grid.nx + i] += flow.height;
                    }
                }
            }
            let run = format!("a={a}");
            let mut weighted: f64 = 0.0;
            let gaps = lockstep(
                (&model, base.clone()),
                (&model, far),
                flow.t_end,
                1,
                |x, y| {
                    weighted = weighted.max(weighted_gap(x, y, &grid, mu));
                    pair_gap(x, y, &grid, mu, Some(flow.window))
                },
            )
            .in_run(&run)?;
            Ok(FlowRow {
                a,
                window_gap: gaps.max(),
                weighted_gap: weighted,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    for w in rows.windows(2) {
        let ratio = w[1].window_gap / w[0].window_gap;
        let expected = (-(w[1].a - w[0].a)).exp();
        let (lo, hi) = (expected / FLOW_RATIO_FACTOR, expected * FLOW_RATIO_FACTOR);
        checks.push(Check::new(
            format!("flow_gap_ratio[a={}->{}]", w[0].a, w[1].a),
            ratio,
            format!("in [{lo:e}, {hi:e}]"),
            ratio >= lo && ratio <= hi,
        ));
    }
    let mut artifacts = Artifacts::default();
    artifacts.tables.push((
        "flow_gaps".into(),
        vec!["a", "window_gap", "weighted_gap"],
        rows.iter()
            .map(|r| vec![r.a, r.window_gap, r.weighted_gap])
            .collect(),
    ));
    Ok(Findings {
        results: json!({ "runs": rows }),
        checks,
        artifacts,
    })
}
