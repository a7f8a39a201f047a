//! Observers and post-processing: mass, norms, level sets, speeds, outcome
//! classification, waiting times and gaps between paired runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Grid, State};
use crate::roots::fit_line;
use crate::stepper::{Control, Model, Observer, Series};

/// Trapezoid quadrature of `∫u dx + ∫∫v dx dy`.
pub fn total_mass(state: &State, grid: &Grid) -> f64 {
    let road: f64 = (0..grid.nx).map(|i| grid.wx(i) * state.u[i]).sum();
    road + weighted_field_sum(state, grid, |v| v)
}

/// Trapezoid quadrature of `∫∫ f(v)` as seen by the model.
pub fn reaction_integral(model: &Model, state: &State) -> f64 {
    weighted_field_sum(state, &model.grid, |v| model.f(v))
}

fn weighted_field_sum(state: &State, grid: &Grid, g: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for j in 0..grid.ny {
        let row = state.row(j);
        let mut acc = 0.0;
        for i in 0..grid.nx {
            acc += grid.wx(i) * g(row[i]);
        }
        total += grid.wy(j) * acc;
    }
    total
}

/// `(max mu*u, max v)` over the nodes.
pub fn sup_norms(state: &State, mu: f64) -> (f64, f64) {
    let su = state
        .u
        .iter()
        .fold(f64::NEG_INFINITY, |m, &x| m.max(mu * x));
    let sv = state.v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    (su, sv)
}

/// `(min mu*u, min v)` over the nodes.
pub fn inf_norms(state: &State, mu: f64) -> (f64, f64) {
    let su = state.u.iter().fold(f64::INFINITY, |m, &x| m.min(mu * x));
    let sv = state.v.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    (su, sv)
}

/// Measure of the set where `lo < v < hi` (node count times cell area).
pub fn band_area(state: &State, grid: &Grid, lo: f64, hi: f64) -> f64 {
    state.v.iter().filter(|&&x| x > lo && x < hi).count() as f64 * grid.dx * grid.dy
}

/// Which line of nodes a level set is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice {
    /// `mu * u` on the road.
    Road,
    /// Field row `j` (0 is the bottom of the strip).
    Row(usize),
    /// Field trace on the road, `v(., 0)`.
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Values along `slice`.
pub fn slice_values(state: &State, slice: Slice, mu: f64) -> Vec<f64> {
    match slice {
        Slice::Road => state.u.iter().map(|&x| mu * x).collect(),
        Slice::Row(j) => state.row(j).to_vec(),
        Slice::Top => state.top().to_vec(),
    }
}

/// Outermost crossing of `level` along a sampled line, linearly interpolated.
/// `None` if the values never cross.
pub fn crossing(values: &[f64], x0: f64, dx: f64, level: f64, side: Side) -> Option<f64> {
    let n = values.len();
    let above = |k: usize| values[k] >= level;
    let at = |k: usize| {
        let (a, b) = (values[k], values[k + 1]);
        x0 + dx * (k as f64 + (level - a) / (b - a))
    };
    match side {
        Side::Left => (0..n - 1).find(|&k| above(k) != above(k + 1)).map(at),
        Side::Right => (0..n - 1).rev().find(|&k| above(k) != above(k + 1)).map(at),
    }
}

pub fn level_set_position(
    state: &State,
    grid: &Grid,
    mu: f64,
    level: f64,
    slice: Slice,
    side: Side,
) -> Option<f64> {
    let vals = slice_values(state, slice, mu);
    crossing(&vals, grid.x_min, grid.dx, level, side)
}

/// Positions of the two outermost crossings over time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrontTrack {
    pub times: Vec<f64>,
    pub left: Vec<Option<f64>>,
    pub right: Vec<Option<f64>>,
}

impl FrontTrack {
    /// Reads a track from a series with `left` and `right` columns (NaN = none).
    pub fn from_series(s: &Series) -> Option<Self> {
        let opt = |v: Vec<f64>| v.into_iter().map(|x| (!x.is_nan()).then_some(x)).collect();
        Some(Self {
            times: s.times.clone(),
            left: opt(s.column("left")?),
            right: opt(s.column("right")?),
        })
    }

    pub fn push(&mut self, t: f64, left: Option<f64>, right: Option<f64>) {
        self.times.push(t);
        self.left.push(left);
        self.right.push(right);
    }

    fn side(&self, side: Side) -> &[Option<f64>] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Least-squares speed of one front over `t_a <= t <= t_b`.
///
/// Speeds are outward: the right front's slope, the left front's negated
/// slope. Needs at least ten defined samples.
pub fn front_speed(track: &FrontTrack, side: Side, window: (f64, f64)) -> Result<SpeedEstimate> {
    let (mut ts, mut xs) = (Vec::new(), Vec::new());
    for (&t, p) in track.times.iter().zip(track.side(side)) {
        if let Some(x) = p {
            if t >= window.0 && t <= window.1 {
                ts.push(t);
                xs.push(*x);
            }
        }
    }
    if ts.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: ts.len(),
        });
    }
    let fit = fit_line(&ts, &xs)?;
    let sign = if side == Side::Left { -1.0 } else { 1.0 };
    Ok(SpeedEstimate {
        speed: sign * fit.slope,
        stderr: fit.slope_stderr,
        samples: ts.len(),
    })
}

/// Records the outermost `level` crossings on a slice.
pub struct FrontObserver {
    pub slice: Slice,
    pub level: f64,
    name: String,
}

impl FrontObserver {
    pub fn new(name: impl Into<String>, slice: Slice, level: f64) -> Self {
        Self {
            slice,
            level,
            name: name.into(),
        }
    }
}

impl Observer for FrontObserver {
    fn name(&self) -> &str {
        &self.name
    }
    fn columns(&self) -> Vec<String> {
        vec!["left".into(), "right".into()]
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        let mu = model.params.exchange_rate;
        for side in [Side::Left, Side::Right] {
            let p = level_set_position(state, &model.grid, mu, self.level, self.slice, side);
            out.push(p.unwrap_or(f64::NAN));
        }
        Control::Continue
    }
}

/// Records total mass, the reaction integral and both sup norms.
pub struct MassObserver;

impl Observer for MassObserver {
    fn name(&self) -> &str {
        "mass"
    }
    fn columns(&self) -> Vec<String> {
        ["mass", "reaction", "sup_mu_u", "sup_v"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        let (su, sv) = sup_norms(state, model.params.exchange_rate);
        out.extend([
            total_mass(state, &model.grid),
            reaction_integral(model, state),
            su,
            sv,
        ]);
        Control::Continue
    }
}

/// Aborts a run once a `level` crossing enters the outer `band` fraction of
/// the domain, where the lateral Neumann condition starts to matter.
pub struct Sentinel {
    pub level: f64,
    pub band: f64,
}

impl Observer for Sentinel {
    fn name(&self) -> &str {
        "sentinel"
    }
    fn columns(&self) -> Vec<String> {
        Vec::new()
    }
    fn observe(&mut self, model: &Model, state: &State, _: &mut Vec<f64>) -> Control {
        let g = &model.grid;
        let width = g.x_max - g.x_min;
        let (lo, hi) = (g.x_min + self.band * width, g.x_max - self.band * width);
        let mu = model.params.exchange_rate;
        for slice in [Slice::Road, Slice::Top, Slice::Row(0)] {
            let vals = slice_values(state, slice, mu);
            let l = crossing(&vals, g.x_min, g.dx, self.level, Side::Left);
            let r = crossing(&vals, g.x_min, g.dx, self.level, Side::Right);
            if l.is_some_and(|x| x < lo) || r.is_some_and(|x| x > hi) {
                return Control::Abort(format!(
                    "front reached the outer {:.0}% of the domain at t = {}",
                    100.0 * self.band,
                    state.t
                ));
            }
        }
        Control::Continue
    }
}

/// Long-time fate of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Invasion,
    Quenching,
    Undecided,
}

/// Settings for [`classify_outcome`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub threshold: f64,
    /// Invasion needs `min(mu*u, v) >= 1 - delta` on the core.
    pub delta: f64,
    /// Number of consecutive observer windows confirming a trend.
    pub confirm: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            delta: 0.1,
            confirm: 50,
        }
    }
}

/// Records what [`classify_outcome`] needs: sup norms, the minimum of
/// `min(mu*u, v)` over `|x| <= core` and the road crossings of the threshold.
pub struct OutcomeProbe {
    pub core: f64,
    pub threshold: f64,
}

impl Observer for OutcomeProbe {
    fn name(&self) -> &str {
        "outcome"
    }
    fn columns(&self) -> Vec<String> {
        ["sup_mu_u", "sup_v", "core_min", "left", "right"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        let g = &model.grid;
        let mu = model.params.exchange_rate;
        let (su, sv) = sup_norms(state, mu);
        let mut core_min = f64::INFINITY;
        for i in 0..g.nx {
            if g.x(i).abs() <= self.core {
                core_min = core_min.min(mu * state.u[i]);
                for j in 0..g.ny {
                    core_min = core_min.min(state.v_at(i, j));
                }
            }
        }
        let l = level_set_position(state, g, mu, self.threshold, Slice::Road, Side::Left);
        let r = level_set_position(state, g, mu, self.threshold, Slice::Road, Side::Right);
        out.extend([
            su,
            sv,
            core_min,
            l.unwrap_or(f64::NAN),
            r.unwrap_or(f64::NAN),
        ]);
        Control::Continue
    }
}

/// Classifies a run from an [`OutcomeProbe`] series.
///
/// Quenching: at some sample both sup norms are below the threshold (the
/// constant pair at the threshold is then a supersolution), or `sup v` is
/// below it and `max(sup mu*u, sup v)` does not increase over the next
/// `confirm` samples. Invasion: the core minimum has reached `1 - delta` and
/// both road fronts have moved outward (or left the domain) over the last
/// `confirm` samples.
pub fn classify_outcome(series: &Series, opts: &ClassifyOptions) -> Outcome {
    let col = |n: &str| series.column(n).unwrap_or_default();
    let (su, sv, core) = (col("sup_mu_u"), col("sup_v"), col("core_min"));
    let (left, right) = (col("left"), col("right"));
    let n = su.len();
    let theta = opts.threshold;
    let k = opts.confirm;

    for i in 0..n {
        if su[i] < theta && sv[i] < theta {
            return Outcome::Quenching;
        }
        if sv[i] < theta && i + k < n {
            let peak = |m: usize| su[m].max(sv[m]);
            if (i..i + k).all(|m| peak(m + 1) <= peak(m)) {
                return Outcome::Quenching;
            }
        }
    }

    if n == 0 || core[n - 1] < 1.0 - opts.delta {
        return Outcome::Undecided;
    }
    if n <= k {
        // A state that already fills the core with no fronts is degenerate invasion.
        let no_fronts = left.iter().chain(&right).all(|x| x.is_nan());
        return if no_fronts && core.iter().all(|&c| c >= 1.0 - opts.delta) {
            Outcome::Invasion
        } else {
            Outcome::Undecided
        };
    }
    let outward = |xs: &[f64], dir: f64| {
        (n - 1 - k..n - 1).all(|m| {
            let (a, b) = (xs[m], xs[m + 1]);
            b.is_nan() || (!a.is_nan() && dir * (b - a) >= 0.0)
        })
    };
    let moved = |xs: &[f64], dir: f64| {
        let (a, b) = (xs[n - 1 - k], xs[n - 1]);
        b.is_nan() || (!a.is_nan() && dir * (b - a) > 0.0)
    };
    if outward(&left, -1.0) && outward(&right, 1.0) && moved(&left, -1.0) && moved(&right, 1.0) {
        Outcome::Invasion
    } else {
        Outcome::Undecided
    }
}

/// Minimum of `mu*u` on `|x| < half_width` and of `v` on
/// `|x| < half_width, y >= -depth`.
pub struct WaitingProbe {
    pub half_width: f64,
    pub depth: f64,
}

impl Observer for WaitingProbe {
    fn name(&self) -> &str {
        "waiting"
    }
    fn columns(&self) -> Vec<String> {
        vec!["road_min".into(), "field_min".into()]
    }
    fn observe(&mut self, model: &Model, state: &State, out: &mut Vec<f64>) -> Control {
        let g = &model.grid;
        let mu = model.params.exchange_rate;
        let (mut ru, mut rv) = (f64::INFINITY, f64::INFINITY);
        for i in 0..g.nx {
            if g.x(i).abs() < self.half_width {
                ru = ru.min(mu * state.u[i]);
                for j in 0..g.ny {
                    if g.y(j) >= -self.depth - 1e-12 {
                        rv = rv.min(state.v_at(i, j));
                    }
                }
            }
        }
        out.extend([ru, rv]);
        Control::Continue
    }
}

/// First sampled time at which both minima of a [`WaitingProbe`] series reach
/// `1 - delta`.
pub fn waiting_time(series: &Series, delta: f64) -> Option<f64> {
    let road = series.column("road_min")?;
    let field = series.column("field_min")?;
    series
        .times
        .iter()
        .zip(road.iter().zip(&field))
        .find(|(_, (&r, &f))| r >= 1.0 - delta && f >= 1.0 - delta)
        .map(|(&t, _)| t)
}

/// `sup |a - b|` over all field nodes, or only over nodes with `|x| <= window`.
pub fn field_gap(a: &State, b: &State, grid: &Grid, window: Option<f64>) -> f64 {
    let mut gap: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if window.is_none_or(|w| grid.x(i).abs() <= w) {
                gap = gap.max((a.v_at(i, j) - b.v_at(i, j)).abs());
            }
        }
    }
    gap
}

/// Largest of the road and field gaps, measured on `|x| <= window`.
pub fn pair_gap(a: &State, b: &State, grid: &Grid, mu: f64, window: Option<f64>) -> f64 {
    let mut gap = field_gap(a, b, grid, window);
    for i in 0..grid.nx {
        if window.is_none_or(|w| grid.x(i).abs() <= w) {
            gap = gap.max(mu * (a.u[i] - b.u[i]).abs());
        }
    }
    gap
}

/// Gap between two runs sampled at the same times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GapSeries {
    pub times: Vec<f64>,
    pub gap: Vec<f64>,
}

impl GapSeries {
    /// First time the gap reaches `level`.
    pub fn first_exceedance(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.gap)
            .find(|(_, &g)| g >= level)
            .map(|(&t, _)| t)
    }

    pub fn max(&self) -> f64 {
        self.gap.iter().fold(0.0, |m, &g| m.max(g))
    }
}

/// Field gap between matching snapshot sequences of a full run and a run with
/// the homogeneous Robin condition.
pub fn coupling_gap(full: &[State], robin: &[State], grid: &Grid) -> Result<GapSeries> {
    if full.len() != robin.len() {
        return Err(Error::GridMismatch(format!(
            "{} snapshots vs {}",
            full.len(),
            robin.len()
        )));
    }
    let mut out = GapSeries::default();
    for (a, b) in full.iter().zip(robin) {
        a.check_grid(grid)?;
        b.check_grid(grid)?;
        if (a.t - b.t).abs() > 1e-9 * (1.0 + a.t.abs()) {
            return Err(Error::GridMismatch(format!(
                "snapshot times {} and {} differ",
                a.t, b.t
            )));
        }
        out.times.push(a.t);
        out.gap.push(field_gap(a, b, grid, None));
    }
    Ok(out)
}

/// Time the field stays within `eps^alpha` of the Robin-only field, where
/// `eps = D^{-1/2}`; `None` if the gap never gets there.
pub fn coupling_time(gaps: &GapSeries, road_diffusivity: f64, alpha: f64) -> Option<f64> {
    let eps = road_diffusivity.powf(-0.5);
    gaps.first_exceedance(eps.powf(alpha))
}

/// Steps two models in lockstep from their own initial states and records
/// `gap(a, b)` every `every` steps (and at the start). Both models must share
/// grid and step.
pub fn lockstep<G>(
    a: (&Model, State),
    b: (&Model, State),
    t_end: f64,
    every: usize,
    mut gap: G,
) -> Result<GapSeries>
where
    G: FnMut(&State, &State) -> f64,
{
    let (ma, mut sa) = a;
    let (mb, mut sb) = b;
    ma.grid.check_same(&mb.grid)?;
    let dt_max = ma.max_dt().min(mb.max_dt());
    let span = t_end - sa.t;
    let n = if span > 0.0 {
        (span / dt_max).ceil() as usize
    } else {
        0
    };
    let dt = if n > 0 { span / n as f64 } else { 0.0 };
    let mut out = GapSeries::default();
    out.times.push(sa.t);
    out.gap.push(gap(&sa, &sb));
    let every = every.max(1);
    for k in 1..=n {
        sa = ma.step(&sa, dt)?;
        sb = mb.step(&sb, dt)?;
        if k % every == 0 || k == n {
            out.times.push(sa.t);
            out.gap.push(gap(&sa, &sb));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::IgnitionNonlinearity;
    use crate::params::{Frame, PhysicalParams};

    fn grid() -> Grid {
        Grid::symmetric(10.0, 81, 11, 2.0).unwrap()
    }

    #[test]
    fn mass_of_zero_and_of_unit_box() {
        let g = grid();
        assert_eq!(total_mass(&State::zeros(&g), &g), 0.0);
        let s = State::uniform(&g, 0.0, 1.0);
        assert!((total_mass(&s, &g) - 20.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_crossing_in_zero_state() {
        let g = grid();
        let s = State::zeros(&g);
        assert_eq!(
            level_set_position(&s, &g, 1.0, 0.3, Slice::Top, Side::Right),
            None
        );
    }

    #[test]
    fn step_profile_crosses_in_jump_cell() {
        let g = grid();
        let s = State::from_fn(&g, |_| 0.0, |x, _| if x <= 0.0 { 1.0 } else { 0.0 });
        let p = level_set_position(&s, &g, 1.0, 0.5, Slice::Row(0), Side::Right).unwrap();
        assert!((p - 0.5 * g.dx).abs() < 1e-12);
        let q = level_set_position(&s, &g, 1.0, 0.5, Slice::Row(0), Side::Left).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn shifting_moves_level_set_by_whole_cells() {
        let g = grid();
        let s = State::from_fn(&g, |_| 0.0, |x, _| (-(x - 1.3) * (x - 1.3) / 4.0).exp());
        let p = level_set_position(&s, &g, 1.0, 0.3, Slice::Top, Side::Right).unwrap();
        let mut t = s.clone();
        t.shift_cells(7);
        let q = level_set_position(&t, &g, 1.0, 0.3, Slice::Top, Side::Right).unwrap();
        assert!((q - p - 7.0 * g.dx).abs() < 1e-12);
    }

    #[test]
    fn speed_of_linear_and_still_tracks() {
        let mut tr = FrontTrack::default();
        for k in 0..20 {
            let t = k as f64 * 0.5;
            tr.push(t, Some(-2.0 * t), Some(3.0 * t));
        }
        let r = front_speed(&tr, Side::Right, (0.0, 100.0)).unwrap();
        assert!((r.speed - 3.0).abs() < 1e-12 && r.stderr < 1e-12);
        let l = front_speed(&tr, Side::Left, (0.0, 100.0)).unwrap();
        assert!((l.speed - 2.0).abs() < 1e-12);
        let mut still = FrontTrack::default();
        for k in 0..12 {
            still.push(k as f64, Some(1.0), Some(1.0));
        }
        assert!(
            front_speed(&still, Side::Right, (0.0, 100.0))
                .unwrap()
                .speed
                .abs()
                < 1e-12
        );
        let e = front_speed(&tr, Side::Right, (0.0, 2.0)).unwrap_err();
        assert!(matches!(e, Error::InsufficientData { .. }));
    }

    fn small_model() -> Model {
        let p = PhysicalParams::new(4.0, 1.0, 1.0, 2.0, Frame::Normal).unwrap();
        Model::standard(p, grid(), IgnitionNonlinearity::default()).unwrap()
    }

    #[test]
    fn zero_data_quench_and_full_data_invade() {
        let m = small_model();
        let opts = crate::stepper::RunOptions::until(2.0).every(1);
        let mut probe = OutcomeProbe {
            core: 5.0,
            threshold: 0.3,
        };
        let rec = m
            .run(State::zeros(&m.grid), &opts, &mut [&mut probe])
            .unwrap();
        let c = ClassifyOptions::default();
        assert_eq!(classify_outcome(&rec.series[0], &c), Outcome::Quenching);
        let one = State::uniform(&m.grid, 1.0, 1.0);
        let mut probe = OutcomeProbe {
            core: 5.0,
            threshold: 0.3,
        };
        let rec = m.run(one, &opts, &mut [&mut probe]).unwrap();
        assert_eq!(classify_outcome(&rec.series[0], &c), Outcome::Invasion);
    }

    #[test]
    fn waiting_time_edge_cases() {
        let m = small_model();
        let opts = crate::stepper::RunOptions::until(1.0).with_initial();
        let mut w = WaitingProbe {
            half_width: 3.0,
            depth: 2.0,
        };
        let rec = m
            .run(State::uniform(&m.grid, 1.0, 1.0), &opts, &mut [&mut w])
            .unwrap();
        assert_eq!(waiting_time(&rec.series[0], 0.1), Some(0.0));
        let mut w = WaitingProbe {
            half_width: 3.0,
            depth: 2.0,
        };
        let rec = m.run(State::zeros(&m.grid), &opts, &mut [&mut w]).unwrap();
        assert_eq!(waiting_time(&rec.series[0], 0.1), None);
    }

    #[test]
    fn identical_boundaries_give_zero_gap() {
        let m = small_model().with_boundary(crate::stepper::BoundarySpec::robin_zero());
        let s = State::from_fn(
            &m.grid,
            |_| 0.0,
            |x, _| if x.abs() < 2.0 { 0.8 } else { 0.0 },
        );
        let g = lockstep((&m, s.clone()), (&m, s), 1.0, 5, |a, b| {
            field_gap(a, b, &m.grid, None)
        })
        .unwrap();
        assert_eq!(g.max(), 0.0);
    }

    #[test]
    fn gap_starts_at_zero_with_empty_road() {
        let full = small_model();
        let robin = full
            .clone()
            .with_boundary(crate::stepper::BoundarySpec::robin_zero());
        let s = State::from_fn(
            &full.grid,
            |_| 0.0,
            |x, _| if x.abs() < 2.0 { 0.8 } else { 0.0 },
        );
        let g = lockstep((&full, s.clone()), (&robin, s), 1.0, 1, |a, b| {
            field_gap(a, b, &full.grid, None)
        })
        .unwrap();
        assert_eq!(g.gap[0], 0.0);
        assert!(g.max() > 0.0);
    }

    #[test]
    fn mismatched_snapshots_are_rejected() {
        let g = grid();
        let h = Grid::symmetric(10.0, 41, 11, 2.0).unwrap();
        let e = coupling_gap(&[State::zeros(&g)], &[State::zeros(&h)], &g).unwrap_err();
        assert!(matches!(e, Error::GridMismatch(_)));
    }
}
