//! Explicit two-stage time stepping of the road-field system.
//!
//! Stage one advances the field with the road value at the old time; stage
//! two advances the road with the freshly updated field trace. The exchange
//! condition at `y = 0` is eliminated through a second-order ghost node. The
//! boundary node itself takes the outgoing part of the flux implicitly, which
//! makes the update monotone and keeps the discrete total mass exactly
//! balanced by the reaction term.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nonlinearity::IgnitionNonlinearity;
use crate::params::{Grid, PhysicalParams, State};

/// Condition imposed on the field at `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TopBoundary {
    /// `d v_y + v = mu u`, and the road receives `v - mu u`.
    #[default]
    RoadExchange,
    /// `d v_y + v = 0`; the road only loses mass (`u_t = D u_xx - mu u`).
    RobinZero,
}

pub type BoundaryData = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Condition imposed on the field at `y = -L`.
#[derive(Clone, Default)]
pub enum BottomBoundary {
    #[default]
    Neumann,
    /// Pins the bottom row to `data(t, x)`.
    Dirichlet(BoundaryData),
}

impl fmt::Debug for BottomBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Neumann => f.write_str("Neumann"),
            Self::Dirichlet(_) => f.write_str("Dirichlet(..)"),
        }
    }
}

/// Lateral ends of the road and strip are always homogeneous Neumann.
#[derive(Debug, Clone, Default)]
pub struct BoundarySpec {
    pub top: TopBoundary,
    pub bottom: BottomBoundary,
}

impl BoundarySpec {
    pub fn exchange() -> Self {
        Self::default()
    }

    pub fn robin_zero() -> Self {
        Self {
            top: TopBoundary::RobinZero,
            bottom: BottomBoundary::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    /// Fixed step; `None` derives it from the stability bound.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "yes")]
    pub reaction: bool,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Road substeps per field step. Values above 1 relax the road stability
    /// limit when the road diffusivity is large, at the price of exact mass
    /// balance.
    #[serde(default = "one")]
    pub road_substeps: usize,
}

fn yes() -> bool {
    true
}
fn default_safety() -> f64 {
    0.9
}
fn one() -> usize {
    1
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            dt: None,
            reaction: true,
            safety: default_safety(),
            road_substeps: 1,
        }
    }
}

/// Per-term stability limits of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CflBounds {
    /// `dx^2 / (2 a_u)`.
    pub road: f64,
    /// `1 / (2 (a_vx/dx^2 + d/dy^2))`.
    pub field: f64,
    /// `1 / lip_f`, infinite without reaction.
    pub reaction: f64,
    /// Largest step that keeps every update a monotone combination, before
    /// the safety factor: `min(1/(2 a_u/dx^2 + mu), 1/(2 a_vx/dx^2 + 2 d/dy^2 + lip_f))`.
    pub monotone: f64,
    pub safety: f64,
}

impl CflBounds {
    pub fn max_dt(&self) -> f64 {
        self.safety * self.monotone
    }
}

/// Everything needed to advance a [`State`].
#[derive(Debug, Clone)]
pub struct Model {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub reaction: IgnitionNonlinearity,
    pub boundary: BoundarySpec,
    pub scheme: SchemeSpec,
    lip_f: f64,
}

/// Returned by observers to steer a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Continue,
    /// End the run cleanly after this step.
    Stop,
    /// End the run with an error.
    Abort(String),
}

/// Callback sampled every `observe_every` steps.
pub trait Observer {
    fn name(&self) -> &str;
    fn columns(&self) -> Vec<String>;
    /// Pushes one value per column into `out`.
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control;
}

/// Observer built from a closure.
pub struct FnObserver<F> {
    name: String,
    columns: Vec<String>,
    f: F,
}

impl<F> FnObserver<F>
where
    F: FnMut(&Model, &State, &mut Vec<f64>) -> Control,
{
    pub fn new(name: impl Into<String>, columns: &[&str], f: F) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            f,
        }
    }
}

impl<F> Observer for FnObserver<F>
where
    F: FnMut(&Model, &State, &mut Vec<f64>) -> Control,
{
    fn name(&self) -> &str {
        &self.name
    }
    fn columns(&self) -> Vec<String> {
        self.columns.clone()
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        (self.f)(model, state, out)
    }
}

/// Time series recorded by one observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub t_end: f64,
    pub observe_every: usize,
    /// Also sample the observers once before the first step.
    pub observe_initial: bool,
    /// Times at which a copy of the state is kept; the step size is adjusted
    /// so these are hit exactly.
    pub snapshot_times: Vec<f64>,
}

impl RunOptions {
    pub fn until(t_end: f64) -> Self {
        Self {
            t_end,
            observe_every: 1,
            observe_initial: false,
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_initial(mut self) -> Self {
        self.observe_initial = true;
        self
    }

    pub fn every(mut self, k: usize) -> Self {
        self.observe_every = k.max(1);
        self
    }

    pub fn snapshots(mut self, times: &[f64]) -> Self {
        self.snapshot_times = times.to_vec();
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub final_state: State,
    pub series: Vec<Series>,
    pub snapshots: Vec<State>,
    pub steps: usize,
    /// Largest step used.
    pub dt: f64,
    pub stopped_early: bool,
}

impl RunRecord {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

impl Model {
    pub fn new(
        params: PhysicalParams,
        grid: Grid,
        reaction: IgnitionNonlinearity,
        boundary: BoundarySpec,
        scheme: SchemeSpec,
    ) -> Result<Self> {
        params.validate()?;
        reaction.validate()?;
        if (grid.depth - params.depth).abs() > 1e-12 * params.depth {
            return Err(invalid(
                "grid.depth",
                format!(
                    "grid depth {} differs from L = {}",
                    grid.depth, params.depth
                ),
            ));
        }
        if !(scheme.safety > 0.0 && scheme.safety <= 1.0) {
            return Err(invalid(
                "safety",
                format!("{} not in (0, 1]", scheme.safety),
            ));
        }
        if scheme.road_substeps == 0 {
            return Err(invalid("road_substeps", "must be at least 1"));
        }
        let lip_f = if scheme.reaction {
            reaction.lipschitz()
        } else {
            0.0
        };
        let m = Self {
            params,
            grid,
            reaction,
            boundary,
            scheme,
            lip_f,
        };
        if let Some(dt) = scheme.dt {
            let bound = m.cfl().monotone;
            if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
                return Err(invalid(
                    "dt",
                    format!("{dt} outside (0, {bound}] required for stability"),
                ));
            }
        }
        Ok(m)
    }

    /// Model with the default exchange boundary and CFL-derived step.
    pub fn standard(
        params: PhysicalParams,
        grid: Grid,
        reaction: IgnitionNonlinearity,
    ) -> Result<Self> {
        Self::new(
            params,
            grid,
            reaction,
            BoundarySpec::exchange(),
            SchemeSpec::default(),
        )
    }

    pub fn with_boundary(mut self, boundary: BoundarySpec) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn lip_f(&self) -> f64 {
        self.lip_f
    }

    /// Reaction term evaluated as the scheme sees it (zero when switched off).
    #[inline]
    pub fn f(&self, v: f64) -> f64 {
        if self.scheme.reaction {
            self.reaction.eval(v)
        } else {
            0.0
        }
    }

    pub fn cfl(&self) -> CflBounds {
        let g = &self.grid;
        let au = self.params.road_coeff();
        let ax = self.params.field_x_coeff();
        let d = self.params.field_y_coeff();
        let mu = self.params.exchange_rate;
        let (dx2, dy2) = (g.dx * g.dx, g.dy * g.dy);
        let m = self.scheme.road_substeps as f64;
        let road_rate = 2.0 * au / dx2 + mu;
        let field_rate = 2.0 * ax / dx2 + 2.0 * d / dy2 + self.lip_f;
        CflBounds {
            road: dx2 / (2.0 * au),
            field: 1.0 / (2.0 * (ax / dx2 + d / dy2)),
            reaction: if self.lip_f > 0.0 {
                1.0 / self.lip_f
            } else {
                f64::INFINITY
            },
            monotone: (m / road_rate).min(1.0 / field_rate),
            safety: self.scheme.safety,
        }
    }

    /// Fewest road substeps for which the field term sets the step bound.
    pub fn balanced_road_substeps(&self) -> usize {
        let g = &self.grid;
        let (dx2, dy2) = (g.dx * g.dx, g.dy * g.dy);
        let road_rate = 2.0 * self.params.road_coeff() / dx2 + self.params.exchange_rate;
        let field_rate = 2.0 * self.params.field_x_coeff() / dx2
            + 2.0 * self.params.field_y_coeff() / dy2
            + self.lip_f;
        (road_rate / field_rate).ceil().max(1.0) as usize
    }

    /// Step actually used: the fixed one if given, else the safety-scaled bound.
    pub fn max_dt(&self) -> f64 {
        self.scheme.dt.unwrap_or_else(|| self.cfl().max_dt())
    }

    /// One step of size `dt` (no stability check).
    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        state.check_grid(&self.grid)?;
        let mut out = state.clone();
        let mut work = Workspace::new(&self.grid);
        self.step_into(state, &mut out, dt, &mut work)?;
        Ok(out)
    }

    fn step_into(&self, s: &State, out: &mut State, dt: f64, w: &mut Workspace) -> Result<()> {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let ax = self.params.field_x_coeff() / (g.dx * g.dx);
        let ay = self.params.field_y_coeff() / (g.dy * g.dy);
        let mu = self.params.exchange_rate;
        let t_new = s.t + dt;
        let mut finite = true;

        // Stage 1: field.
        let j_start = match &self.boundary.bottom {
            BottomBoundary::Neumann => 0,
            BottomBoundary::Dirichlet(data) => {
                for i in 0..nx {
                    out.v[i] = data(t_new, g.x(i));
                }
                1
            }
        };
        for j in j_start..ny - 1 {
            let row = &s.v[j * nx..(j + 1) * nx];
            // Row 0 under Neumann mirrors row 1.
            let below = if j == 0 { 1 } else { j - 1 };
            let down = &s.v[below * nx..(below + 1) * nx];
            let up = &s.v[(j + 1) * nx..(j + 2) * nx];
            let dst = &mut out.v[j * nx..(j + 1) * nx];
            for i in 0..nx {
                let c = row[i];
                let lx = lap_x(row, i);
                let ly = down[i] - 2.0 * c + up[i];
                let val = c + dt * (ax * lx + ay * ly + self.f(c));
                finite &= val.is_finite();
                dst[i] = val;
            }
        }
        {
            let j = ny - 1;
            let row = &s.v[j * nx..];
            let down = &s.v[(j - 1) * nx..j * nx];
            let robin = 2.0 / g.dy;
            let dst = &mut out.v[j * nx..];
            for i in 0..nx {
                let c = row[i];
                let source = match self.boundary.top {
                    TopBoundary::RoadExchange => mu * s.u[i],
                    TopBoundary::RobinZero => 0.0,
                };
                let explicit = c + dt * (ax * lap_x(row, i) + 2.0 * ay * (down[i] - c) + self.f(c));
                let val = (explicit + dt * robin * source) / (1.0 + dt * robin);
                finite &= val.is_finite();
                dst[i] = val;
            }
        }

        // Stage 2: road, driven by the new trace.
        let au = self.params.road_coeff() / (g.dx * g.dx);
        let m = self.scheme.road_substeps;
        let h = dt / m as f64;
        let trace = &out.v[(ny - 1) * nx..];
        let exchange = self.boundary.top == TopBoundary::RoadExchange;
        w.u.copy_from_slice(&s.u);
        for _ in 0..m {
            for i in 0..nx {
                let c = w.u[i];
                let gain = if exchange { trace[i] } else { 0.0 };
                w.next[i] = c + h * (au * lap_x(&w.u, i) + gain - mu * c);
            }
            std::mem::swap(&mut w.u, &mut w.next);
        }
        for i in 0..nx {
            finite &= w.u[i].is_finite();
        }
        out.u.copy_from_slice(&w.u);
        out.t = t_new;
        if !finite {
            return Err(Error::Instability {
                t: t_new,
                field: "u/v",
            });
        }
        Ok(())
    }

    /// Advances to `t_target` with equal steps no larger than [`Model::max_dt`].
    pub fn advance(&self, state: State, t_target: f64) -> Result<State> {
        let rec = self.run(state, &RunOptions::until(t_target), &mut [])?;
        Ok(rec.final_state)
    }

    /// Integrates from `initial.t` up to `opts.t_end`.
    ///
    /// Steps are uniform between consecutive snapshot times. Observers are
    /// sampled after every `observe_every`-th step, and at the start only when
    /// `observe_initial` is set.
    pub fn run(
        &self,
        initial: State,
        opts: &RunOptions,
        observers: &mut [&mut dyn Observer],
    ) -> Result<RunRecord> {
        initial.check_grid(&self.grid)?;
        if !(opts.t_end >= initial.t) {
            return Err(invalid(
                "T",
                format!("end time {} before start {}", opts.t_end, initial.t),
            ));
        }
        let dt_max = self.max_dt();
        let every = opts.observe_every.max(1);
        let mut series: Vec<Series> = observers
            .iter()
            .map(|o| Series {
                name: o.name().to_string(),
                columns: o.columns(),
                times: Vec::new(),
                rows: Vec::new(),
            })
            .collect();

        let mut marks: Vec<f64> = opts
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t >= initial.t && t <= opts.t_end)
            .collect();
        marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        marks.dedup();

        let mut snapshots = Vec::new();
        let mut cur = initial;
        let mut next = cur.clone();
        let mut work = Workspace::new(&self.grid);
        let mut steps = 0usize;
        let mut dt_used: f64 = 0.0;
        let mut buf = Vec::new();

        if opts.observe_initial {
            for (o, s) in observers.iter_mut().zip(series.iter_mut()) {
                buf.clear();
                if let Control::Abort(reason) = o.observe(self, &cur, &mut buf) {
                    return Err(Error::Aborted { t: cur.t, reason });
                }
                s.times.push(cur.t);
                s.rows.push(buf.clone());
            }
        }

        let mut targets = marks.clone();
        if targets.last().copied() != Some(opts.t_end) {
            targets.push(opts.t_end);
        }
        let mut mark_idx = 0;
        'outer: for target in targets {
            while mark_idx < marks.len() && marks[mark_idx] <= cur.t {
                snapshots.push(cur.clone());
                mark_idx += 1;
            }
            let span = target - cur.t;
            if span > 0.0 {
                let n = (span / dt_max).ceil().max(1.0) as usize;
                let dt = span / n as f64;
                dt_used = dt_used.max(dt);
                let t0 = cur.t;
                for k in 1..=n {
                    self.step_into(&cur, &mut next, dt, &mut work)?;
                    // Avoid drift from repeated addition.
                    next.t = if k == n { target } else { t0 + k as f64 * dt };
                    std::mem::swap(&mut cur, &mut next);
                    steps += 1;
                    if steps.is_multiple_of(every) {
                        let mut stop = false;
                        for (o, s) in observers.iter_mut().zip(series.iter_mut()) {
                            buf.clear();
                            match o.observe(self, &cur, &mut buf) {
                                Control::Continue => {}
                                Control::Stop => stop = true,
                                Control::Abort(reason) => {
                                    return Err(Error::Aborted { t: cur.t, reason })
                                }
                            }
                            s.times.push(cur.t);
                            s.rows.push(buf.clone());
                        }
                        if stop {
                            return Ok(RunRecord {
                                final_state: cur,
                                series,
                                snapshots,
                                steps,
                                dt: dt_used,
                                stopped_early: true,
                            });
                        }
                    }
                }
            }
            while mark_idx < marks.len() && marks[mark_idx] <= cur.t {
                snapshots.push(cur.clone());
                mark_idx += 1;
            }
            if cur.t >= opts.t_end {
                break 'outer;
            }
        }
        Ok(RunRecord {
            final_state: cur,
            series,
            snapshots,
            steps,
            dt: dt_used,
            stopped_early: false,
        })
    }
}

struct Workspace {
    u: Vec<f64>,
    next: Vec<f64>,
}

impl Workspace {
    fn new(g: &Grid) -> Self {
        Self {
            u: vec![0.0; g.nx],
            next: vec![0.0; g.nx],
        }
    }
}

/// Second difference along a row with mirrored end nodes.
#[inline(always)]
fn lap_x(row: &[f64], i: usize) -> f64 {
    let n = row.len();
    let l = if i == 0 { row[1] } else { row[i - 1] };
    let r = if i + 1 == n { row[n - 2] } else { row[i + 1] };
    l - 2.0 * row[i] + r
}

/// Same scheme restricted to data that do not depend on x: one road value and
/// one field column. Used to cross-check the full kernel and for cheap
/// threshold scans.
#[derive(Debug, Clone)]
pub struct ColumnModel {
    pub params: PhysicalParams,
    pub ny: usize,
    pub reaction: IgnitionNonlinearity,
    pub top: TopBoundary,
    pub reaction_on: bool,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    pub t: f64,
    pub u: f64,
    /// Bottom to top.
    pub v: Vec<f64>,
}

impl ColumnModel {
    /// Picks the step from the same monotonicity bound as the full model
    /// (without the x terms), scaled by `safety`.
    pub fn new(
        params: PhysicalParams,
        ny: usize,
        reaction: IgnitionNonlinearity,
        safety: f64,
    ) -> Result<Self> {
        params.validate()?;
        if ny < 3 {
            return Err(invalid("ny", format!("{ny} < 3")));
        }
        let dy = params.depth / (ny - 1) as f64;
        let lip = reaction.lipschitz();
        let d = params.field_y_coeff();
        let bound = (1.0 / params.exchange_rate).min(1.0 / (2.0 * d / (dy * dy) + lip));
        Ok(Self {
            params,
            ny,
            reaction,
            top: TopBoundary::RoadExchange,
            reaction_on: true,
            dt: safety * bound,
        })
    }

    pub fn dy(&self) -> f64 {
        self.params.depth / (self.ny - 1) as f64
    }

    pub fn step(&self, s: &ColumnState, dt: f64) -> ColumnState {
        let ny = self.ny;
        let dy = self.dy();
        let a = self.params.field_y_coeff() / (dy * dy);
        let mu = self.params.exchange_rate;
        let f = |v: f64| {
            if self.reaction_on {
                self.reaction.eval(v)
            } else {
                0.0
            }
        };
        let mut v = vec![0.0; ny];
        v[0] = s.v[0] + dt * (2.0 * a * (s.v[1] - s.v[0]) + f(s.v[0]));
        for j in 1..ny - 1 {
            v[j] = s.v[j] + dt * (a * (s.v[j - 1] - 2.0 * s.v[j] + s.v[j + 1]) + f(s.v[j]));
        }
        let top = s.v[ny - 1];
        let source = match self.top {
            TopBoundary::RoadExchange => mu * s.u,
            TopBoundary::RobinZero => 0.0,
        };
        let k = 2.0 * dt / dy;
        v[ny - 1] = (top + dt * (2.0 * a * (s.v[ny - 2] - top) + f(top)) + k * source) / (1.0 + k);
        let gain = match self.top {
            TopBoundary::RoadExchange => v[ny - 1],
            TopBoundary::RobinZero => 0.0,
        };
        ColumnState {
            t: s.t + dt,
            u: s.u + dt * (gain - mu * s.u),
            v,
        }
    }

    /// Integrates to `t_end` with uniform steps, calling `each` after every step.
    pub fn run(
        &self,
        mut s: ColumnState,
        t_end: f64,
        mut each: impl FnMut(&ColumnState) -> Control,
    ) -> Result<ColumnState> {
        let span = t_end - s.t;
        if span <= 0.0 {
            return Ok(s);
        }
        let n = (span / self.dt).ceil() as usize;
        let dt = span / n as f64;
        let t0 = s.t;
        for k in 1..=n {
            s = self.step(&s, dt);
            s.t = t0 + k as f64 * dt;
            if !s.u.is_finite() || s.v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Instability {
                    t: s.t,
                    field: "column",
                });
            }
            match each(&s) {
                Control::Continue => {}
                Control::Stop => break,
                Control::Abort(reason) => return Err(Error::Aborted { t: s.t, reason }),
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Frame;

    fn small_model() -> Model {
        let p = PhysicalParams::new(4.0, 0.5, 1.4, 2.0, Frame::Normal).unwrap();
        let g = Grid::symmetric(10.0, 41, 9, 2.0).unwrap();
        Model::standard(p, g, IgnitionNonlinearity::default()).unwrap()
    }

    #[test]
    fn rescaled_bounds_match_hand_evaluation() {
        let p = PhysicalParams::new(100.0, 0.1, 1.4, 5.0, Frame::Rescaled).unwrap();
        let g = Grid::new(0.0, 10.0, 81, 6, 5.0).unwrap();
        let m = Model::standard(p, g, IgnitionNonlinearity::default()).unwrap();
        let c = m.cfl();
        assert!((g.dx - 0.125).abs() < 1e-15 && (g.dy - 1.0).abs() < 1e-15);
        assert!((c.road - 0.0078125).abs() < 1e-15);
        // (2 (0.001 / 0.015625 + 0.1))^-1
        assert!((c.field - 1.0 / (2.0 * (0.064 + 0.1))).abs() < 1e-12);
        assert!((c.reaction - 1.0 / 4.9).abs() < 1e-9);
        assert!(c.monotone <= c.road);
    }

    #[test]
    fn inert_reaction_drops_reaction_bound() {
        let mut m = small_model();
        m.scheme.reaction = false;
        let m = Model::new(m.params, m.grid, m.reaction, m.boundary, m.scheme).unwrap();
        assert!(m.cfl().reaction.is_infinite());
    }

    #[test]
    fn doubling_resolution_quarters_road_bound() {
        let p = PhysicalParams::new(100.0, 0.1, 1.4, 5.0, Frame::Normal).unwrap();
        let f = IgnitionNonlinearity::default();
        let a = Model::standard(p, Grid::new(0.0, 10.0, 11, 5, 5.0).unwrap(), f).unwrap();
        let b = Model::standard(p, Grid::new(0.0, 10.0, 21, 5, 5.0).unwrap(), f).unwrap();
        assert!((a.cfl().road / b.cfl().road - 4.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_substeps_hand_the_bound_to_the_field() {
        let p = PhysicalParams::new(400.0, 1.0, 1.4, 5.0, Frame::Normal).unwrap();
        let g = Grid::symmetric(50.0, 201, 21, 5.0).unwrap();
        let mut m = Model::standard(p, g, IgnitionNonlinearity::default()).unwrap();
        let field = 1.0 / (2.0 / 0.25 + 2.0 / 0.0625 + m.lip_f());
        let k = m.balanced_road_substeps();
        // 2 * 400 / 0.25 + 1.4 = 3201.4 against a field rate of 44.9.
        assert_eq!(k, 72);
        m.scheme.road_substeps = k;
        assert_eq!(m.cfl().monotone, field);
        m.scheme.road_substeps = k - 1;
        assert!(m.cfl().monotone < field);
    }

    #[test]
    fn rejects_unstable_fixed_step() {
        let m = small_model();
        let bad = SchemeSpec {
            dt: Some(10.0 * m.cfl().monotone),
            ..m.scheme
        };
        assert!(Model::new(m.params, m.grid, m.reaction, m.boundary.clone(), bad).is_err());
    }

    #[test]
    fn zero_and_one_are_fixed_points() {
        let m = small_model();
        let dt = m.max_dt();
        let zero = State::zeros(&m.grid);
        assert_eq!(m.step(&zero, dt).unwrap().v, zero.v);
        let mu = m.params.exchange_rate;
        let one = State::uniform(&m.grid, 1.0 / mu, 1.0);
        let next = m.step(&one, dt).unwrap();
        for (a, b) in next.v.iter().zip(&one.v) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in next.u.iter().zip(&one.u) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_length_run_returns_initial_state() {
        let m = small_model();
        let s = State::uniform(&m.grid, 0.1, 0.2);
        let mut obs = FnObserver::new("x", &["a"], |_: &Model, _: &State, o: &mut Vec<f64>| {
            o.push(1.0);
            Control::Continue
        });
        let rec = m
            .run(s.clone(), &RunOptions::until(0.0), &mut [&mut obs])
            .unwrap();
        assert_eq!(rec.final_state, s);
        assert!(rec.series[0].times.is_empty());
        assert_eq!(rec.steps, 0);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let m = small_model();
        let s = State::zeros(&m.grid);
        let rec = m
            .run(
                s,
                &RunOptions::until(0.5).snapshots(&[0.0, 0.1, 0.37, 0.5]),
                &mut [],
            )
            .unwrap();
        let ts: Vec<f64> = rec.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.1, 0.37, 0.5]);
    }

    #[test]
    fn instability_is_reported_with_time() {
        let m = small_model();
        let mut s = State::zeros(&m.grid);
        s.v[5] = f64::NAN;
        let e = m.step(&s, m.max_dt()).unwrap_err();
        assert!(matches!(e, Error::Instability { .. }));
    }

    #[test]
    fn observer_stop_and_abort() {
        let m = small_model();
        let s = State::zeros(&m.grid);
        let mut n = 0;
        let mut stop = FnObserver::new("n", &["k"], |_: &Model, _: &State, o: &mut Vec<f64>| {
            n += 1;
            o.push(n as f64);
            if n == 3 {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        let rec = m
            .run(s.clone(), &RunOptions::until(10.0), &mut [&mut stop])
            .unwrap();
        assert!(rec.stopped_early);
        assert_eq!(rec.steps, 3);
        let mut abort = FnObserver::new("a", &[], |_: &Model, _: &State, _: &mut Vec<f64>| {
            Control::Abort("sentinel".into())
        });
        let e = m
            .run(s, &RunOptions::until(10.0), &mut [&mut abort])
            .unwrap_err();
        assert!(matches!(e, Error::Aborted { .. }));
    }

    #[test]
    fn column_model_matches_uniform_full_model() {
        let p = PhysicalParams::new(3.0, 1.0, 2.0, 5.0, Frame::Normal).unwrap();
        let f = IgnitionNonlinearity::default();
        let g = Grid::symmetric(4.0, 9, 21, 5.0).unwrap();
        let full = Model::standard(p, g, f).unwrap();
        let col = ColumnModel::new(p, 21, f, 0.9).unwrap();
        let dt = full.max_dt().min(col.dt);
        let mut s = State::from_fn(&g, |_| 0.4, |_, y| if y > -2.0 { 0.9 } else { 0.1 });
        let mut c = ColumnState {
            t: 0.0,
            u: 0.4,
            v: s.column(0),
        };
        for _ in 0..500 {
            s = full.step(&s, dt).unwrap();
            c = col.step(&c, dt);
        }
        for i in 0..g.nx {
            assert!((s.u[i] - c.u).abs() < 1e-13);
            for j in 0..g.ny {
                assert!((s.v_at(i, j) - c.v[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn discrete_mass_balance_is_exact() {
        use crate::diagnostics::{reaction_integral, total_mass};
        let m = small_model();
        let dt = m.max_dt();
        let mut s = State::from_fn(
            &m.grid,
            |x| 0.5 * (-x * x).exp(),
            |x, y| (0.95 * (-x * x / 4.0).exp()) * (1.0 + 0.05 * y),
        );
        for _ in 0..200 {
            let before = total_mass(&s, &m.grid);
            let source = dt * reaction_integral(&m, &s);
            s = m.step(&s, dt).unwrap();
            let after = total_mass(&s, &m.grid);
            assert!((after - before - source).abs() < 1e-12 * before);
        }
    }
}
