//! Experiment configuration, read from TOML.
//!
//! Every section is optional; unspecified physical constants fall back to the
//! reference table (`D = 100`, `d = 0.1`, `mu = 1.4`, `L = 50`, normal frame).
//! Road data are given for `mu u`, so `road = { shape = "indicator",
//! half_width = 3 }` means `mu u0 = 1` on `(-3, 3)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use roadfront::certificates::{CertificateKind, RobinClosure};
use roadfront::waves::{WaveOptions, WaveProfile};
use roadfront::{Frame, Grid, IgnitionNonlinearity, PhysicalParams, SchemeSpec, State};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ReproduceFigures,
    SpeedScaling,
    WaitingTimeScaling,
    RoadQuenchThreshold,
    MuThresholdsCheck,
    HeatKernelCheck,
    CertificateCheck,
    CouplingGap,
    FlowContinuity,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ReproduceFigures => "reproduce_figures",
            Self::SpeedScaling => "speed_scaling",
            Self::WaitingTimeScaling => "waiting_time_scaling",
            Self::RoadQuenchThreshold => "road_quench_threshold",
            Self::MuThresholdsCheck => "mu_thresholds_check",
            Self::HeatKernelCheck => "heat_kernel_check",
            Self::CertificateCheck => "certificate_check",
            Self::CouplingGap => "coupling_gap",
            Self::FlowContinuity => "flow_continuity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    /// Default output directory; the command line overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub reaction: IgnitionNonlinearity,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub bisect: Option<BisectSpec>,
    #[serde(default)]
    pub wave: WaveOptions,
    #[serde(default)]
    pub waiting: WaitingSpec,
    #[serde(default)]
    pub certificate: CertificateSpec,
    #[serde(default)]
    pub gap: GapSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub heat: HeatSpec,
    #[serde(default)]
    pub steady: SteadySpec,
}

/// Overrides of the reference constants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(rename = "D")]
    pub road_diffusivity: Option<f64>,
    #[serde(rename = "d")]
    pub field_diffusivity: Option<f64>,
    #[serde(rename = "mu")]
    pub exchange_rate: Option<f64>,
    #[serde(rename = "L")]
    pub depth: Option<f64>,
    pub frame: Option<Frame>,
}

impl ParamsSpec {
    pub fn resolve(&self) -> PhysicalParams {
        let base = PhysicalParams::default();
        PhysicalParams {
            road_diffusivity: self.road_diffusivity.unwrap_or(base.road_diffusivity),
            field_diffusivity: self.field_diffusivity.unwrap_or(base.field_diffusivity),
            exchange_rate: self.exchange_rate.unwrap_or(base.exchange_rate),
            depth: self.depth.unwrap_or(base.depth),
            frame: self.frame.unwrap_or(base.frame),
        }
    }
}

/// Road discretisation. Give `nx` or `dx` (neither means `nx = 400`);
/// without `half_width` the extent is sized from a speed estimate when the
/// experiment has one (see [`GridSpec::resolve`]) and is 250 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub half_width: Option<f64>,
    pub nx: Option<usize>,
    pub dx: Option<f64>,
    pub ny: usize,
    /// Extra room beyond `c T` when sizing automatically.
    pub margin: f64,
    /// Pick the number of road substeps so the field sets the step.
    pub balance_substeps: bool,
}

const DEFAULT_HALF_WIDTH: f64 = 250.0;
const DEFAULT_NX: usize = 400;

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: None,
            nx: None,
            dx: None,
            ny: 50,
            margin: 10.0,
            balance_substeps: false,
        }
    }
}

impl GridSpec {
    /// Builds the grid. Without an explicit `half_width` the domain is
    /// `c T + margin + 1.25 a_u / c` on each side, where `a_u / c` is the
    /// length over which the road tail ahead of a front decays.
    pub fn resolve(&self, params: &PhysicalParams, speed: Option<f64>, t_end: f64) -> Result<Grid> {
        let hw = match (self.half_width, speed) {
            (Some(h), _) => h,
            (None, Some(c)) if c > 0.0 => c * t_end + self.margin + 1.25 * params.road_coeff() / c,
            (None, Some(c)) => {
                return Err(config_err(
                    "grid.half_width",
                    format!("cannot size from speed {c}"),
                ));
            }
            (None, None) => DEFAULT_HALF_WIDTH,
        };
        let nx = match (self.nx, self.dx) {
            (Some(_), Some(_)) => return Err(config_err("grid", "give either nx or dx, not both")),
            (Some(n), None) => n,
            (None, None) => DEFAULT_NX,
            (None, Some(dx)) if dx > 0.0 => (2.0 * hw / dx).round() as usize + 1,
            _ => return Err(config_err("grid.dx", "need a positive nx or dx")),
        };
        Grid::symmetric(hw, nx, self.ny, params.depth)
            .map_err(|e| config_err("grid", e.to_string()))
    }
}

/// One factor of the initial data, a function of x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `value` on `(-half_width, half_width)`.
    Indicator {
        half_width: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `height cos^2(pi (x - center) / (2 width))` on `|x - center| < width`.
    Bump {
        center: f64,
        width: f64,
        height: f64,
    },
    /// The experiment's travelling wave moved by `shift`.
    WaveTranslate {
        shift: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Zero | Self::WaveTranslate { .. } => 0.0,
            Self::Constant { value } => value,
            Self::Indicator { half_width, value } => {
                if x.abs() < half_width {
                    value
                } else {
                    0.0
                }
            }
            Self::Bump {
                center,
                width,
                height,
            } => {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    height * (0.5 * std::f64::consts::PI * r).cos().powi(2)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Initial data in product form: `mu u0 = road(x)` and
/// `v0 = field(x) * 1{y > -field_depth}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    pub road: Profile,
    pub field: Profile,
    pub field_depth: Option<f64>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        let ind = Profile::Indicator {
            half_width: 3.0,
            value: 1.0,
        };
        Self {
            road: ind,
            field: ind,
            field_depth: None,
        }
    }
}

impl InitialSpec {
    pub fn uses_wave(&self) -> bool {
        matches!(self.road, Profile::WaveTranslate { .. })
            || matches!(self.field, Profile::WaveTranslate { .. })
    }

    pub fn build(&self, grid: &Grid, mu: f64) -> State {
        let depth = self.field_depth.unwrap_or(f64::INFINITY);
        State::from_fn(
            grid,
            |x| self.road.eval(x) / mu,
            |x, y| {
                if y >= -depth - 1e-12 {
                    self.field.eval(x)
                } else {
                    0.0
                }
            },
        )
    }

    /// Like [`InitialSpec::build`], with `wave_translate` factors sampled
    /// from `wave` at `x + shift` (linear in x, end values held outside the
    /// profile window). The wave must have as many rows as the grid.
    pub fn build_with_wave(&self, grid: &Grid, mu: f64, wave: &WaveProfile) -> Result<State> {
        if wave.grid.ny != grid.ny {
            return Err(config_err(
                "wave.ny",
                format!("wave has {} rows, the run grid {}", wave.grid.ny, grid.ny),
            ));
        }
        let wg = wave.grid;
        let at = |vals: &[f64], z: f64| {
            let s = ((z - wg.x_min) / wg.dx).clamp(0.0, (wg.nx - 1) as f64);
            let k = (s.floor() as usize).min(wg.nx - 2);
            let w = s - k as f64;
            (1.0 - w) * vals[k] + w * vals[k + 1]
        };
        let depth = self.field_depth.unwrap_or(f64::INFINITY);
        let mut s = self.build(grid, mu);
        for i in 0..grid.nx {
            let x = grid.x(i);
            if let Profile::WaveTranslate { shift } = self.road {
                s.u[i] = at(&wave.phi, x + shift);
            }
            if let Profile::WaveTranslate { shift } = self.field {
                for j in 0..grid.ny {
                    if grid.y(j) >= -depth - 1e-12 {
                        let row = &wave.psi[j * wg.nx..(j + 1) * wg.nx];
                        s.v[j * grid.nx + i] = at(row, x + shift);
                    }
                }
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub t_end: Option<f64>,
    /// Alternative to `t_end`: this many steps of the stability-limited size.
    pub steps: Option<usize>,
    /// Time between observer samples; every step when absent.
    pub sample_every: Option<f64>,
    pub snapshot_times: Vec<f64>,
    /// Abort when a front enters the outer 5% of the domain.
    pub sentinel: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            t_end: None,
            steps: None,
            sample_every: None,
            snapshot_times: Vec::new(),
            sentinel: true,
        }
    }
}

/// Lists of values to sweep; the runs cover their Cartesian product.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "D", default)]
    pub road_diffusivity: Option<Vec<f64>>,
    #[serde(rename = "d", default)]
    pub field_diffusivity: Option<Vec<f64>>,
    #[serde(rename = "mu", default)]
    pub exchange_rate: Option<Vec<f64>>,
    #[serde(rename = "L", default)]
    pub depth: Option<Vec<f64>>,
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub id: String,
    pub params: PhysicalParams,
    pub values: BTreeMap<&'static str, f64>,
}

impl SweepSpec {
    fn lists(&self) -> [(&'static str, Option<&Vec<f64>>); 4] {
        [
            ("D", self.road_diffusivity.as_ref()),
            ("d", self.field_diffusivity.as_ref()),
            ("mu", self.exchange_rate.as_ref()),
            ("L", self.depth.as_ref()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (key, list) in self.lists() {
            if let Some(list) = list {
                if list.is_empty() {
                    return Err(config_err(format!("sweep.{key}"), "empty sweep list"));
                }
                if let Some(bad) = list.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(config_err(
                        format!("sweep.{key}"),
                        format!("{bad} is not positive"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Cartesian product over the listed keys, in the order D, d, mu, L; a
    /// single point named `base` when nothing is swept.
    pub fn points(&self, base: PhysicalParams) -> Vec<SweepPoint> {
        let mut out = vec![SweepPoint {
            id: String::new(),
            params: base,
            values: BTreeMap::new(),
        }];
        for (key, list) in self.lists() {
            let Some(list) = list else { continue };
            out = out
                .into_iter()
                .flat_map(|p| {
                    list.iter().map(move |&v| {
                        let mut q = p.clone();
                        match key {
                            "D" => q.params.road_diffusivity = v,
                            "d" => q.params.field_diffusivity = v,
                            "mu" => q.params.exchange_rate = v,
                            _ => q.params.depth = v,
                        }
                        q.values.insert(key, v);
                        if !q.id.is_empty() {
                            q.id.push(',');
                        }
                        q.id.push_str(&format!("{key}={v}"));
                        q
                    })
                })
                .collect();
        }
        if out.len() == 1 && out[0].id.is_empty() {
            out[0].id = "base".into();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectParam {
    /// Half-width of the road datum `mu u0 = 1{|x| < a}`.
    A,
    /// Exchange rate for x-uniform road data.
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectSpec {
    pub param: BisectParam,
    pub lo: f64,
    pub hi: f64,
    /// Stop when `hi - lo <= tol`.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Stop when `hi / lo <= 1 + rel_tol`; bisects geometrically.
    #[serde(default)]
    pub rel_tol: Option<f64>,
    pub horizon: f64,
    pub max_horizon: f64,
    /// Half-width of the region that must fill up for invasion.
    #[serde(default = "default_core")]
    pub core: f64,
    #[serde(default = "default_confirm")]
    pub confirm: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_core() -> f64 {
    2.0
}
fn default_confirm() -> usize {
    50
}
fn default_delta() -> f64 {
    0.1
}

impl BisectSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lo > self.hi {
            return Err(config_err(
                "bisect.hi",
                format!("bracket [{}, {}] is empty", self.lo, self.hi),
            ));
        }
        match (self.tol, self.rel_tol) {
            (None, None) => return Err(config_err("bisect.tol", "give tol or rel_tol")),
            (Some(t), _) if !(t > 0.0) => return Err(config_err("bisect.tol", "must be positive")),
            (_, Some(t)) if !(t > 0.0) => {
                return Err(config_err("bisect.rel_tol", "must be positive"))
            }
            (_, Some(_)) if !(self.lo > 0.0) => {
                return Err(config_err(
                    "bisect.lo",
                    "rel_tol needs a positive lower end",
                ))
            }
            _ => {}
        }
        if !(self.horizon > 0.0 && self.max_horizon >= self.horizon) {
            return Err(config_err(
                "bisect.max_horizon",
                "need 0 < horizon <= max_horizon",
            ));
        }
        Ok(())
    }
}

/// Two-speed invasion from a field datum of bounded support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaitingSpec {
    pub delta: f64,
    /// Road and field must fill `|x| < M sqrt(D)`.
    #[serde(rename = "M")]
    pub m: f64,
    /// Depth of the sub-rectangle that must fill; the whole strip by default.
    pub depth: Option<f64>,
    /// Leading fraction of the first phase left out of the speed fit.
    pub skip: f64,
    /// Trailing fraction of the road track used for the late speed.
    pub last: f64,
}

impl Default for WaitingSpec {
    fn default() -> Self {
        Self {
            delta: 0.1,
            m: 1.0,
            depth: None,
            skip: 0.2,
            last: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one_usize")]
    pub road_substeps: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateSpec {
    /// Wave grids, coarse first; each should halve the previous spacing.
    pub resolutions: Vec<Resolution>,
    pub kinds: Vec<CertificateKind>,
    pub sample_times: Vec<f64>,
    pub alpha0: f64,
    pub closure: RobinClosure,
    pub residual_constant: Option<f64>,
    pub margin_cells: usize,
}

impl Default for CertificateSpec {
    fn default() -> Self {
        Self {
            resolutions: vec![
                Resolution {
                    nx: 801,
                    ny: 41,
                    road_substeps: 4,
                },
                Resolution {
                    nx: 1601,
                    ny: 81,
                    road_substeps: 8,
                },
            ],
            kinds: vec![
                CertificateKind::FrontlikeSuper,
                CertificateKind::PairwaveSub,
            ],
            sample_times: vec![0.0, 5.0, 20.0],
            alpha0: 1.0,
            closure: RobinClosure::Unit,
            residual_constant: None,
            margin_cells: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapSpec {
    pub alpha: f64,
    /// Steps between gap samples.
    pub every: usize,
}

impl Default for GapSpec {
    fn default() -> Self {
        Self {
            alpha: 2.0 / 7.0,
            every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSpec {
    /// The second data pair adds `height` to `mu u0` and `v0` on `|x| > a`.
    pub a_values: Vec<f64>,
    pub height: f64,
    /// Gap measured on `[0, t_end] x [-window, window]`.
    pub window: f64,
    pub t_end: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self {
            a_values: vec![5.0, 10.0],
            height: 0.2,
            window: 10.0,
            t_end: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSpec {
    pub times: Vec<f64>,
    /// Wavenumber at which the dispersion root is compared with `a xi^2`.
    pub xi: f64,
}

impl Default for HeatSpec {
    fn default() -> Self {
        Self {
            times: vec![10.0, 30.0, 50.0],
            xi: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadySpec {
    /// Depth `L0` entering `mu_minus`; half the strip by default.
    pub invasion_depth: Option<f64>,
    /// The decay run uses `mu = plus_factor * mu_plus`.
    pub plus_factor: f64,
    pub t_end: f64,
}

impl Default for SteadySpec {
    fn default() -> Self {
        Self {
            invasion_depth: None,
            plus_factor: 1.2,
            t_end: 200.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn params(&self) -> PhysicalParams {
        self.params.resolve()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_err("name", "must not be empty"));
        }
        self.params()
            .validate()
            .map_err(|e| config_err("params", e.to_string()))?;
        self.reaction
            .validate()
            .map_err(|e| config_err("reaction", e.to_string()))?;
        self.sweep.validate()?;
        if let (Some(_), Some(_)) = (self.run.t_end, self.run.steps) {
            return Err(config_err("run", "give either t_end or steps, not both"));
        }
        if let Some(t) = self.run.t_end {
            if !(t > 0.0) {
                return Err(config_err("run.t_end", "must be positive"));
            }
        }
        if let Some(s) = self.run.sample_every {
            if !(s > 0.0) {
                return Err(config_err("run.sample_every", "must be positive"));
            }
        }
        if let Some(b) = &self.bisect {
            b.validate()?;
        }
        if self.grid.ny < 3 {
            return Err(config_err("grid.ny", "need at least 3 rows"));
        }
        use ExperimentKind::*;
        match self.kind {
            RoadQuenchThreshold | MuThresholdsCheck if self.bisect.is_none() => {
                return Err(config_err(
                    "bisect",
                    "this experiment needs a [bisect] section",
                ));
            }
            RoadQuenchThreshold if self.bisect.is_some_and(|b| b.param != BisectParam::A) => {
                return Err(config_err(
                    "bisect.param",
                    "road_quench_threshold bisects `a`",
                ));
            }
            MuThresholdsCheck if self.bisect.is_some_and(|b| b.param != BisectParam::Mu) => {
                return Err(config_err(
                    "bisect.param",
                    "mu_thresholds_check bisects `mu`",
                ));
            }
            CertificateCheck if self.certificate.resolutions.is_empty() => {
                return Err(config_err("certificate.resolutions", "empty list"));
            }
            CertificateCheck if self.certificate.kinds.is_empty() => {
                return Err(config_err("certificate.kinds", "empty list"));
            }
            FlowContinuity if self.flow.a_values.len() < 2 => {
                return Err(config_err("flow.a_values", "need at least two values"));
            }
            HeatKernelCheck if self.heat.times.is_empty() => {
                return Err(config_err("heat.times", "empty list"));
            }
            _ => {}
        }
        Ok(())
    }

    /// End time of the main runs.
    pub fn t_end(&self, dt: f64) -> Result<f64> {
        match (self.run.t_end, self.run.steps) {
            (Some(t), _) => Ok(t),
            (None, Some(n)) => Ok(n as f64 * dt),
            (None, None) => Err(config_err("run.t_end", "required for this experiment")),
        }
    }
}
