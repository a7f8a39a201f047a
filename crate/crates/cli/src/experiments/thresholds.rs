use roadfront::diagnostics::{classify_outcome, ClassifyOptions, Outcome, OutcomeProbe};
use roadfront::spectra::{mu_thresholds, MuThresholds};
use roadfront::{
    BoundarySpec, ColumnModel, ColumnState, Control, Model, Observer, PhysicalParams, RunOptions,
    State,
};
use serde::Serialize;
use serde_json::json;

use super::{build_model, sentinel, spread, stride, sweep, Check, Findings};
use crate::bisect::{bisect_threshold, Bracket, Tolerance};
use crate::config::{BisectSpec, ExperimentConfig, Profile};
use crate::error::{config_err, Result, RunContext};

/// Largest accepted spread (`max/min - 1`) of the road threshold across `D`.
pub const ROAD_THRESHOLD_SPREAD: f64 = 0.20;
/// Relative slack on both ends of `[mu_minus, mu_plus]`.
pub const MU_CONTAINMENT_SLACK: f64 = 0.05;
/// Relative distance to the uniform limit at the end of the decay run.
pub const UNIFORM_LIMIT_TOL: f64 = 0.01;

fn tolerance(b: &BisectSpec) -> Tolerance {
    match b.rel_tol {
        Some(r) => Tolerance::Relative(r),
        None => Tolerance::Absolute(b.tol.unwrap_or(f64::INFINITY)),
    }
}

/// Stops a run as soon as both sup norms are below the threshold, which
/// settles quenching.
struct QuenchStop {
    probe: OutcomeProbe,
}

impl Observer for QuenchStop {
    fn name(&self) -> &str {
        self.probe.name()
    }
    fn columns(&self) -> Vec<String> {
        self.probe.columns()
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        let c = self.probe.observe(model, state, out);
        if c == Control::Continue && out[0] < self.probe.threshold && out[1] < self.probe.threshold
        {
            return Control::Stop;
        }
        c
    }
}

#[derive(Debug, Clone, Serialize)]
struct RoadRow {
    id: String,
    #[serde(rename = "D")]
    road_diffusivity: f64,
    bracket: Bracket,
}

/// Bisects the half-width `a` of the road datum `mu u0 = 1{|x| < a}` for
/// each swept `D`.
pub fn road_quench_threshold(cfg: &ExperimentConfig) -> Result<Findings> {
    let b = cfg.bisect.expect("validated");
    let classify = ClassifyOptions {
        threshold: cfg.reaction.threshold,
        delta: b.delta,
        confirm: b.confirm,
    };
    let height = match cfg.initial.road {
        Profile::Indicator { value, .. } => value,
        _ => 1.0,
    };
    let rows = sweep(cfg, |p| {
        let params = p.params;
        let grid = cfg.grid.resolve(&params, None, b.horizon)?;
        let model = build_model(cfg, &p.id, params, grid, BoundarySpec::exchange())?;
        let every = stride(cfg, model.max_dt());
        let mu = params.exchange_rate;
        let probe = |a: f64, horizon: f64| -> Result<Outcome> {
            let run = format!("{}/a={a}", p.id);
            let initial = State::from_fn(
                &grid,
                |x| if x.abs() < a { height / mu } else { 0.0 },
                |x, y| {
                    let depth = cfg.initial.field_depth.unwrap_or(f64::INFINITY);
                    if y >= -depth - 1e-12 {
                        cfg.initial.field.eval(x)
                    } else {
                        0.0
                    }
                },
            );
            let mut stop = QuenchStop {
                probe: OutcomeProbe {
                    core: b.core,
                    threshold: cfg.reaction.threshold,
                },
            };
            let mut guard = sentinel(cfg);
            let mut observers: Vec<&mut dyn Observer> = vec![&mut stop];
            if cfg.run.sentinel {
                observers.push(&mut guard);
            }
            let rec = model
                .run(
                    initial,
                    &RunOptions::until(horizon).every(every).with_initial(),
                    &mut observers,
                )
                .in_run(&run)?;
            Ok(classify_outcome(
                rec.series("outcome").expect("outcome probe"),
                &classify,
            ))
        };
        let bracket = bisect_threshold(b.lo, b.hi, tolerance(&b), b.horizon, b.max_horizon, probe)?;
        Ok(RoadRow {
            id: p.id.clone(),
            road_diffusivity: params.road_diffusivity,
            bracket,
        })
    })?;
    let rows: Vec<RoadRow> = rows.into_iter().map(|(_, r)| r).collect();
    let mids: Vec<f64> = rows.iter().map(|r| r.bracket.midpoint()).collect();
    let mut checks = Vec::new();
    if mids.len() >= 2 {
        let s = spread(&mids);
        checks.push(Check::new(
            "road_threshold_spread",
            s,
            format!("< {ROAD_THRESHOLD_SPREAD}"),
            s < ROAD_THRESHOLD_SPREAD,
        ));
    }
    let mut artifacts = super::Artifacts::default();
    artifacts.tables.push((
        "road_thresholds".into(),
        vec!["D", "lo", "hi"],
        rows.iter()
            .map(|r| vec![r.road_diffusivity, r.bracket.lo, r.bracket.hi])
            .collect(),
    ));
    Ok(Findings {
        results: json!({ "brackets": rows, "spread": spread(&mids) }),
        checks,
        artifacts,
    })
}

/// Fate of x-uniform data, decided as soon as it is certain: all values at
/// least `1 - delta` counts as invasion, all values below the threshold as
/// quenching (the reaction is then off for good).
pub fn column_outcome(
    params: PhysicalParams,
    cfg: &ExperimentConfig,
    delta: f64,
    horizon: f64,
    run: &str,
) -> Result<(Outcome, ColumnState)> {
    let mu = params.exchange_rate;
    let model =
        ColumnModel::new(params, cfg.grid.ny, cfg.reaction, cfg.scheme.safety).in_run(run)?;
    let initial = ColumnState {
        t: 0.0,
        u: cfg.initial.road.eval(0.0) / mu,
        v: vec![cfg.initial.field.eval(0.0); cfg.grid.ny],
    };
    let theta = cfg.reaction.threshold;
    let mut outcome = Outcome::Undecided;
    let end = model
        .run(initial, horizon, |s| {
            let (lo, hi) =
                s.v.iter()
                    .fold((mu * s.u, mu * s.u), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo >= 1.0 - delta {
                outcome = Outcome::Invasion;
                Control::Stop
            } else if hi < theta {
                outcome = Outcome::Quenching;
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .in_run(run)?;
    Ok((outcome, end))
}

#[derive(Debug, Clone, Serialize)]
struct MuRow {
    id: String,
    thresholds: MuThresholds,
    bracket: Bracket,
    contained: bool,
    /// Decay run above `mu_plus`.
    decay_mu: f64,
    limit: f64,
    limit_error: f64,
}

/// Bisects the exchange rate for x-uniform data and compares the bracket with
/// `[mu_minus, mu_plus]`; also checks the decay to `1 / (1 + mu L)` above `mu_plus`.
pub fn mu_thresholds_check(cfg: &ExperimentConfig) -> Result<Findings> {
    let b = cfg.bisect.expect("validated");
    if !matches!(cfg.initial.road, Profile::Constant { .. })
        || !matches!(cfg.initial.field, Profile::Constant { .. } | Profile::Zero)
    {
        return Err(config_err(
            "initial",
            "mu_thresholds_check needs x-uniform (constant) data",
        ));
    }
    let consts = cfg.reaction.derive_constants()?;
    let rows = sweep(cfg, |p| {
        let params = p.params;
        let l0 = cfg.steady.invasion_depth.unwrap_or(0.5 * params.depth);
        let th = mu_thresholds(&consts, &params, cfg.reaction.threshold, l0).in_run(&p.id)?;
        let probe = |mu: f64, horizon: f64| -> Result<Outcome> {
            let q = PhysicalParams {
                exchange_rate: mu,
                ..params
            };
            column_outcome(q, cfg, b.delta, horizon, &format!("{}/mu={mu}", p.id)).map(|(o, _)| o)
        };
        let bracket = bisect_threshold(b.lo, b.hi, tolerance(&b), b.horizon, b.max_horizon, probe)?;
        let contained = bracket.lo >= th.mu_minus * (1.0 - MU_CONTAINMENT_SLACK)
            && bracket.hi <= th.mu_plus * (1.0 + MU_CONTAINMENT_SLACK);

        let decay_mu = cfg.steady.plus_factor * th.mu_plus;
        let q = PhysicalParams {
            exchange_rate: decay_mu,
            ..params
        };
        let model =
            ColumnModel::new(q, cfg.grid.ny, cfg.reaction, cfg.scheme.safety).in_run(&p.id)?;
        let start = ColumnState {
            t: 0.0,
            u: cfg.initial.road.eval(0.0) / decay_mu,
            v: vec![cfg.initial.field.eval(0.0); cfg.grid.ny],
        };
        let mass = start.u + params.depth * start.v[0];
        let end = model
            .run(start, cfg.steady.t_end, |_| Control::Continue)
            .in_run(&p.id)?;
        // mu u = v = w with u + L w = mass.
        let limit = decay_mu * mass / (1.0 + decay_mu * params.depth);
        let limit_error = std::iter::once(decay_mu * end.u)
            .chain(end.v.iter().copied())
            .map(|x| (x / limit - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(MuRow {
            id: p.id.clone(),
            thresholds: th,
            bracket,
            contained,
            decay_mu,
            limit,
            limit_error,
        })
    })?;
    let rows: Vec<MuRow> = rows.into_iter().map(|(_, r)| r).collect();
    let mut checks = Vec::new();
    for r in &rows {
        let sfx = if rows.len() > 1 {
            format!("[{}]", r.id)
        } else {
            String::new()
        };
        checks.push(Check::new(
            format!("mu_bracket_contained{sfx}"),
            r.bracket.midpoint(),
            format!(
                "bracket [{:e}, {:e}] within [{:e}, {:e}] up to {MU_CONTAINMENT_SLACK}",
                r.bracket.lo, r.bracket.hi, r.thresholds.mu_minus, r.thresholds.mu_plus
            ),
            r.contained,
        ));
        checks.push(Check::new(
            format!("uniform_limit{sfx}"),
            r.limit_error,
            format!("< {UNIFORM_LIMIT_TOL}"),
            r.limit_error < UNIFORM_LIMIT_TOL,
        ));
    }
    Ok(Findings {
        results: json!({ "runs": rows }),
        checks,
        artifacts: super::Artifacts::default(),
    })
}
