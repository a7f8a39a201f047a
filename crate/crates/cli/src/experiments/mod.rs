//! Named experiments. Each computes its runs (in parallel across sweep
//! points), then hands results, checks and artifacts to a single writer.

mod certify;
mod figures;
mod gaps;
mod scaling;
mod spectral;
mod thresholds;
mod wave;

use std::path::Path;

use rayon::prelude::*;
use roadfront::diagnostics::Sentinel;
use roadfront::waves::{travelling_wave, WaveKind};
use roadfront::{BoundarySpec, Grid, Model, PhysicalParams, Series, State};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, ExperimentKind, SweepPoint};
use crate::error::{config_err, Result, RunContext};
use crate::output::OutputDir;

pub use certify::{certificate_check, CertificateRow};
pub use figures::reproduce_figures;
pub use gaps::{coupling_gap, flow_continuity};
pub use scaling::{speed_scaling, waiting_time_scaling};
pub use spectral::{heat_kernel_check, spectra_report};
pub use thresholds::{mu_thresholds_check, road_quench_threshold};
pub use wave::wave_profiles;

/// Fraction of the domain at each end that a front must not enter.
pub const SENTINEL_BAND: f64 = 0.05;

/// One pass/fail property evaluated by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `< 0.15`.
    pub bound: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            bound: bound.into(),
        }
    }

    /// `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, format!("<= {limit:e}"), value <= limit)
    }

    /// `value >= limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, format!(">= {limit:e}"), value >= limit)
    }
}

/// Name, column headers and rows of a CSV table.
pub type Table = (String, Vec<&'static str>, Vec<Vec<f64>>);

/// Files produced by an experiment, written after all runs finish.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub series: Vec<(String, Series)>,
    pub snapshots: Vec<(String, Grid, Vec<State>)>,
    pub tables: Vec<Table>,
    /// Extra JSON files, keyed by path relative to the output root.
    pub json: Vec<(String, Value)>,
}

impl Artifacts {
    fn extend(&mut self, other: Artifacts) {
        self.series.extend(other.series);
        self.snapshots.extend(other.snapshots);
        self.tables.extend(other.tables);
        self.json.extend(other.json);
    }
}

/// What an experiment hands back to the writer.
#[derive(Debug, Default)]
pub struct Findings {
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Artifacts,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: ExperimentKind,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub results: Value,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSettings<'a> {
    /// Artifact directory; nothing is written when `None`.
    pub out: Option<&'a Path>,
    pub force: bool,
    /// Worker threads for sweeps; 0 lets the pool decide.
    pub jobs: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<Report> {
    cfg.validate()?;
    run_with(cfg, settings, dispatch)
}

/// Runs `f` in a pool of `settings.jobs` threads and writes what it found.
/// The output directory is checked before any work starts.
pub fn run_with<F>(cfg: &ExperimentConfig, settings: &RunSettings, f: F) -> Result<Report>
where
    F: FnOnce(&ExperimentConfig) -> Result<Findings> + Send,
{
    let dir = settings
        .out
        .map(|p| OutputDir::create(p, settings.force))
        .transpose()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .map_err(|e| config_err("jobs", e.to_string()))?;
    let findings = pool.install(|| f(cfg))?;
    let report = Report {
        name: cfg.name.clone(),
        kind: cfg.kind,
        pass: findings.checks.iter().all(|c| c.pass),
        checks: findings.checks,
        results: findings.results,
    };
    if let Some(mut dir) = dir {
        let a = findings.artifacts;
        for (run, s) in &a.series {
            dir.write_series(run, s)?;
        }
        for (run, grid, states) in &a.snapshots {
            dir.write_snapshots(run, grid, states)?;
        }
        for (name, cols, rows) in &a.tables {
            dir.write_table(&format!("tables/{name}.csv"), cols, rows)?;
        }
        for (rel, value) in &a.json {
            dir.write_json(rel, value)?;
        }
        let text = toml::to_string(cfg).map_err(|e| config_err("config", e.to_string()))?;
        dir.write_text("config.toml", "toml", &text)?;
        dir.write_json("summary.json", &report)?;
        dir.finish(&cfg.name, cfg.kind.as_str())?;
    }
    Ok(report)
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Findings> {
    use ExperimentKind::*;
    match cfg.kind {
        ReproduceFigures => reproduce_figures(cfg),
        SpeedScaling => speed_scaling(cfg),
        WaitingTimeScaling => waiting_time_scaling(cfg),
        RoadQuenchThreshold => road_quench_threshold(cfg),
        MuThresholdsCheck => mu_thresholds_check(cfg),
        HeatKernelCheck => heat_kernel_check(cfg),
        CertificateCheck => certificate_check(cfg),
        CouplingGap => coupling_gap(cfg),
        FlowContinuity => flow_continuity(cfg),
    }
}

/// Runs `f` on every sweep point in parallel; results keep the sweep order.
pub(crate) fn sweep<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<(SweepPoint, T)>>
where
    T: Send,
    F: Fn(&SweepPoint) -> Result<T> + Sync,
{
    cfg.sweep
        .points(cfg.params())
        .into_par_iter()
        .map(|p| f(&p).map(|r| (p, r)))
        .collect()
}

/// Model for one run, with the road substeps balanced if requested.
pub(crate) fn build_model(
    cfg: &ExperimentConfig,
    run: &str,
    params: PhysicalParams,
    grid: Grid,
    boundary: BoundarySpec,
) -> Result<Model> {
    let model = Model::new(params, grid, cfg.reaction, boundary.clone(), cfg.scheme).in_run(run)?;
    if !cfg.grid.balance_substeps {
        return Ok(model);
    }
    let mut scheme = cfg.scheme;
    scheme.road_substeps = model.balanced_road_substeps();
    Model::new(params, grid, cfg.reaction, boundary, scheme).in_run(run)
}

/// Initial state of a run; `wave_translate` data use the full-system wave
/// of `params` computed with the `[wave]` options.
pub(crate) fn initial_state(
    cfg: &ExperimentConfig,
    run: &str,
    params: PhysicalParams,
    grid: &Grid,
) -> Result<State> {
    let mu = params.exchange_rate;
    if !cfg.initial.uses_wave() {
        return Ok(cfg.initial.build(grid, mu));
    }
    let wave = travelling_wave(&params, &cfg.reaction, WaveKind::FullSystem, &cfg.wave)
        .in_run(&format!("{run}/wave"))?;
    cfg.initial.build_with_wave(grid, mu, &wave)
}

/// Observer stride that samples about every `run.sample_every` time units.
pub(crate) fn stride(cfg: &ExperimentConfig, dt: f64) -> usize {
    cfg.run
        .sample_every
        .map_or(1, |s| ((s / dt).round() as usize).max(1))
}

pub(crate) fn sentinel(cfg: &ExperimentConfig) -> Sentinel {
    Sentinel {
        level: cfg.reaction.threshold,
        band: SENTINEL_BAND,
    }
}

/// Largest relative change between consecutive entries, `max |r_{k+1}/r_k - 1|`.
pub(crate) fn consecutive_variation(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `max / min - 1` over the entries.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi / lo - 1.0
}

pub(crate) fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

pub(crate) fn merge(parts: impl IntoIterator<Item = Artifacts>) -> Artifacts {
    let mut all = Artifacts::default();
    for a in parts {
        all.extend(a);
    }
    all
}
