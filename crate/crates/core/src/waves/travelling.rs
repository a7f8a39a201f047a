//! Travelling fronts computed by long-time integration in a co-moving window.

use serde::{Deserialize, Serialize};

use std::collections::VecDeque;

use crate::diagnostics::{crossing, slice_values, Side, Slice};
use crate::error::{Error, Result};
use crate::nonlinearity::IgnitionNonlinearity;
use crate::params::{Frame, Grid, PhysicalParams, State};
use crate::roots::fit_line;
use crate::stepper::{BoundarySpec, Model, SchemeSpec};

use super::steady::{steady_profile, SteadyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    /// Road and field coupled through the exchange condition; limits `(0, 0)`
    /// ahead and `(1/mu, 1)` behind.
    FullSystem,
    /// Field alone with `d v_y + v = 0` on top; limit `p(y)` behind.
    RobinOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveOptions {
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
    pub t_end: f64,
    /// Steps between front measurements (and re-centring).
    pub recenter_every: usize,
    /// Largest accepted rate of change of the aligned shape (L2 per unit time)
    /// over the last quarter of the run; that rate must also be at most half
    /// the rate over the first quarter.
    pub shape_tol: f64,
    pub scheme: SchemeSpec,
    /// Fraction of the run, counted from the end, used for the speed fit.
    pub fit_fraction: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            nx: 401,
            ny: 21,
            t_end: 200.0,
            recenter_every: 20,
            shape_tol: 5e-2,
            scheme: SchemeSpec::default(),
            fit_fraction: 0.5,
        }
    }
}

/// A travelling front `(u, v)(x + c t, y)` moving towards negative x, stored
/// on a grid whose `x = 0` is the threshold crossing of the reference slice.
///
/// Robin-only profiles are always expressed in the normal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub kind: WaveKind,
    pub params: PhysicalParams,
    pub reaction: IgnitionNonlinearity,
    pub grid: Grid,
    /// Road component, length `nx`.
    pub phi: Vec<f64>,
    /// Field component, `psi[j * nx + i]`.
    pub psi: Vec<f64>,
    pub speed: f64,
    pub speed_stderr: f64,
    /// Exponential rate of the tail ahead of the front.
    pub lambda: f64,
    /// Exponential rate at which the state behind is approached.
    pub lambda_tilde: f64,
    /// RMS residual of the position fit.
    pub fit_rms: f64,
    /// Aligned-shape change per unit time at the end of the run.
    pub shape_rate: f64,
    /// Time step of the run that produced the profile.
    pub dt: f64,
}

/// JSON sidecar written next to a profile snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSidecar {
    pub c: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub kind: WaveKind,
    pub params: PhysicalParams,
}

impl WaveProfile {
    pub fn state(&self) -> State {
        State {
            t: 0.0,
            nx: self.grid.nx,
            ny: self.grid.ny,
            u: self.phi.clone(),
            v: self.psi.clone(),
        }
    }

    pub fn sidecar(&self) -> WaveSidecar {
        WaveSidecar {
            c: self.speed,
            lambda: self.lambda,
            lambda_tilde: self.lambda_tilde,
            kind: self.kind,
            params: self.params,
        }
    }

    #[inline]
    pub fn psi_at(&self, i: usize, j: usize) -> f64 {
        self.psi[j * self.grid.nx + i]
    }

    /// Largest decrease of `phi` and `psi` between neighbouring nodes, as a
    /// fraction of the local values (0 for a monotone profile).
    pub fn monotonicity_defect(&self) -> f64 {
        let nx = self.grid.nx;
        let mut worst: f64 = 0.0;
        for w in self.phi.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
        for row in self.psi.chunks(nx) {
            for w in row.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
        worst * self.params.exchange_rate.max(1.0)
    }
}

fn reference_slice(kind: WaveKind) -> Slice {
    match kind {
        WaveKind::FullSystem => Slice::Top,
        WaveKind::RobinOnly => Slice::Row(0),
    }
}

/// Linear interpolation of `values` (spacing `dx`, origin `x0`) at `x`; clamps
/// to the end values outside the range.
pub(crate) fn sample(values: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let n = values.len();
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let k = s.floor() as usize;
    let w = s - k as f64;
    (1.0 - w) * values[k] + w * values[k + 1]
}

/// Step-like datum: the invaded state on `x > 0`, zero elsewhere.
fn initial_state(
    kind: WaveKind,
    grid: &Grid,
    params: &PhysicalParams,
    steady: Option<&SteadyProfile>,
) -> State {
    let mu = params.exchange_rate;
    match kind {
        WaveKind::FullSystem => State::from_fn(
            grid,
            |x| if x > 0.0 { 1.0 / mu } else { 0.0 },
            |x, _| if x > 0.0 { 1.0 } else { 0.0 },
        ),
        WaveKind::RobinOnly => {
            let p = steady.expect("robin-only start needs the steady profile");
            State::from_fn(grid, |_| 0.0, |x, y| if x > 0.0 { p.at(y) } else { 0.0 })
        }
    }
}

/// Integrates from a step datum, re-centring the window on the threshold
/// crossing of the reference slice (road trace for the full system, bottom of
/// the strip for the Robin-only problem) every `recenter_every` steps.
///
/// The speed is the least-squares slope of the unshifted positions over the
/// last `fit_fraction` of the run; the tail rates come from log-linear fits
/// of the values between `1e-6` and `1e-2` away from the limits.
pub fn travelling_wave(
    params: &PhysicalParams,
    reaction: &IgnitionNonlinearity,
    kind: WaveKind,
    opts: &WaveOptions,
) -> Result<WaveProfile> {
    if reaction.is_inert() {
        return Err(Error::NotConverged(
            "reaction term is identically zero; there is no front".into(),
        ));
    }
    let grid = Grid::symmetric(opts.half_width, opts.nx, opts.ny, params.depth)?;
    let steady = match kind {
        WaveKind::RobinOnly => Some(steady_profile(
            reaction,
            params.field_diffusivity,
            params.depth,
            opts.ny,
        )?),
        WaveKind::FullSystem => None,
    };
    // The Robin-only problem does not see the road, so it is solved in the
    // normal frame with the road coefficient neutralised (u stays 0).
    let (params, boundary) = match kind {
        WaveKind::FullSystem => (*params, BoundarySpec::exchange()),
        WaveKind::RobinOnly => {
            let mut p = params.with_frame(Frame::Normal);
            p.road_diffusivity = p.field_diffusivity;
            (p, BoundarySpec::robin_zero())
        }
    };
    let params = &params;
    let model = Model::new(*params, grid, *reaction, boundary, opts.scheme)?;
    let mu = params.exchange_rate;
    let level = reaction.threshold;
    let slice = reference_slice(kind);

    let dt_max = model.max_dt();
    let n = (opts.t_end / dt_max).ceil().max(1.0) as usize;
    let dt = opts.t_end / n as f64;
    let every = opts.recenter_every.max(1);

    let mut s = initial_state(kind, &grid, params, steady.as_ref());
    let mut shifted: isize = 0;
    let mut times = Vec::new();
    let mut raw = Vec::new();
    let mut shape_rates = Vec::new();
    // Shapes are compared over a lag of about 1/16 of the run, so that the
    // sub-cell sampling floor is divided by a long time span.
    let lag = (n / every / 16).max(1);
    let mut history: VecDeque<(f64, Vec<f64>)> = VecDeque::with_capacity(lag + 1);
    let half = (opts.nx / 4) as isize;

    for k in 1..=n {
        s = model.step(&s, dt)?;
        if k % every != 0 && k != n {
            continue;
        }
        let vals = slice_values(&s, slice, mu);
        let x = crossing(&vals, grid.x_min, grid.dx, level, Side::Left).ok_or_else(|| {
            Error::NotConverged(format!("front left the window or died out at t = {}", s.t))
        })?;
        times.push(s.t);
        raw.push(x - shifted as f64 * grid.dx);

        let shape: Vec<f64> = (-half..=half)
            .map(|m| sample(&vals, grid.x_min, grid.dx, x + m as f64 * grid.dx))
            .collect();
        if history.len() == lag {
            let (t0, old) = history.pop_front().unwrap();
            let l2 = old
                .iter()
                .zip(&shape)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                * grid.dx;
            shape_rates.push(l2.sqrt() / (s.t - t0));
        }
        history.push_back((s.t, shape));

        let m = (-x / grid.dx).round() as isize;
        if m != 0 && k != n {
            s.shift_cells(m);
            shifted += m;
        }
    }

    let start = ((1.0 - opts.fit_fraction) * times.len() as f64).floor() as usize;
    let fit = fit_line(&times[start..], &raw[start..])?;
    let speed = -fit.slope;
    let quarter = (shape_rates.len() / 4).max(1);
    if shape_rates.len() < 2 * quarter {
        return Err(Error::InsufficientData {
            needed: 8,
            got: shape_rates.len(),
        });
    }
    let mean = |r: &[f64]| r.iter().sum::<f64>() / r.len() as f64;
    let early = mean(&shape_rates[..quarter]);
    let shape_rate = mean(&shape_rates[shape_rates.len() - quarter..]);
    // Sub-cell sampling leaves a floor of order dx^2 over the lag; what
    // matters is that the transient has decayed onto it.
    if !(shape_rate <= opts.shape_tol && shape_rate <= 0.5 * early) {
        return Err(Error::NotConverged(format!(
            "profile shape still changing: rate {shape_rate:.3e} (tolerance {:.1e}, early {early:.3e})",
            opts.shape_tol
        )));
    }
    let jitter = (fit.rms / (raw[start] - raw[raw.len() - 1]).abs().max(grid.dx)).abs();
    if !(fit.rms <= grid.dx || jitter <= 1e-3) {
        return Err(Error::NotConverged(format!(
            "front position does not move linearly (rms {:.3e})",
            fit.rms
        )));
    }

    // Put the crossing at x = 0.
    let vals = slice_values(&s, slice, mu);
    let x = crossing(&vals, grid.x_min, grid.dx, level, Side::Left)
        .ok_or_else(|| Error::NotConverged("front lost at the end of the run".into()))?;
    let centred = Grid::new(
        grid.x_min - x,
        grid.x_max - x,
        grid.nx,
        grid.ny,
        params.depth,
    )?;

    let (ahead, behind) = match kind {
        WaveKind::FullSystem => (
            s.u.iter().map(|&u| mu * u).collect::<Vec<_>>(),
            s.u.iter().map(|&u| 1.0 - mu * u).collect::<Vec<_>>(),
        ),
        WaveKind::RobinOnly => {
            let p0 = steady.as_ref().map(|p| p.p[0]).unwrap_or(1.0);
            let b = s.bottom().to_vec();
            (b.clone(), b.iter().map(|&v| 1.0 - v / p0).collect())
        }
    };
    let lambda = tail_rate(&ahead, &centred, Side::Left)?;
    let lambda_tilde = tail_rate(&behind, &centred, Side::Right)?;

    Ok(WaveProfile {
        kind,
        params: *params,
        reaction: *reaction,
        grid: centred,
        phi: s.u,
        psi: s.v,
        speed,
        speed_stderr: fit.slope_stderr,
        lambda,
        lambda_tilde,
        fit_rms: fit.rms,
        shape_rate,
        dt,
    })
}

/// Rate of exponential decay of `g` towards the chosen side, fitted on the
/// nodes where `1e-6 <= g <= 1e-2` on that side of `x = 0`.
fn tail_rate(g: &[f64], grid: &Grid, side: Side) -> Result<f64> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &val) in g.iter().enumerate() {
        let x = grid.x(i);
        let on_side = match side {
            Side::Left => x < 0.0,
            Side::Right => x > 0.0,
        };
        if on_side && (1e-6..=1e-2).contains(&val) {
            xs.push(x);
            ys.push(val.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::NotConverged(format!(
            "{side:?} tail resolved on only {} nodes in [1e-6, 1e-2]; widen the window",
            xs.len()
        )));
    }
    let fit = fit_line(&xs, &ys)?;
    let rate = match side {
        Side::Left => fit.slope,
        Side::Right => -fit.slope,
    };
    if !(rate > 0.0) {
        return Err(Error::NotConverged(format!(
            "{side:?} tail is not decaying (fitted rate {rate})"
        )));
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Frame;

    #[test]
    fn inert_reaction_has_no_front() {
        let p = PhysicalParams::new(25.0, 0.1, 1.4, 5.0, Frame::Rescaled).unwrap();
        let e = travelling_wave(
            &p,
            &IgnitionNonlinearity::inert(),
            WaveKind::FullSystem,
            &WaveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(e, Error::NotConverged(_)));
    }

    #[test]
    fn sampling_clamps_and_interpolates() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(sample(&v, 0.0, 1.0, -3.0), 0.0);
        assert_eq!(sample(&v, 0.0, 1.0, 1.5), 2.5);
        assert_eq!(sample(&v, 0.0, 1.0, 9.0), 4.0);
    }

    #[test]
    fn exact_exponential_tail_rate() {
        let g = Grid::symmetric(20.0, 401, 3, 1.0).unwrap();
        let vals: Vec<f64> = g.xs().iter().map(|&x| 0.5 * (0.7 * x).exp()).collect();
        let r = tail_rate(&vals, &g, Side::Left).unwrap();
        assert!((r - 0.7).abs() < 1e-10);
    }
}
