//! Comparison checks between runs, and between a run and a certificate.

use crate::error::{Error, Result};
use crate::params::State;
use crate::stepper::{Model, RunRecord};

use super::certificate::Certificate;

/// `min (b - a)` over both components (road as `mu u`).
pub fn state_ordering(a: &State, b: &State, mu: f64) -> f64 {
    let road = a.u.iter().zip(&b.u).map(|(x, y)| mu * (y - x));
    let field = a.v.iter().zip(&b.v).map(|(x, y)| y - x);
    road.chain(field).fold(f64::INFINITY, f64::min)
}

/// Worst ordering over the snapshots and final states of two runs on the
/// same grid and step sequence.
pub fn ordering_check(a: &RunRecord, b: &RunRecord, mu: f64) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() || a.steps != b.steps {
        return Err(Error::GridMismatch(
            "runs do not share a step sequence".into(),
        ));
    }
    let mut worst = state_ordering(&a.final_state, &b.final_state, mu);
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if sa.t != sb.t {
            return Err(Error::GridMismatch(format!(
                "snapshot times {} and {}",
                sa.t, sb.t
            )));
        }
        worst = worst.min(state_ordering(sa, sb, mu));
    }
    Ok(worst)
}

/// Steps both states together for `steps` steps of the model's step and
/// returns the worst `min (b - a)` seen, initial data included.
pub fn lockstep_ordering(model: &Model, a: &State, b: &State, steps: usize) -> Result<f64> {
    let dt = model.max_dt();
    let mu = model.params.exchange_rate;
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut worst = state_ordering(&a, &b, mu);
    for _ in 0..steps {
        a = model.step(&a, dt)?;
        b = model.step(&b, dt)?;
        worst = worst.min(state_ordering(&a, &b, mu));
    }
    Ok(worst)
}

/// The certificate sampled on the model grid at time `t` (fixed-frame kinds).
pub fn certificate_state(cert: &Certificate, model: &Model, t: f64) -> State {
    let g = &model.grid;
    let mut s = State::zeros(g);
    s.t = t;
    for i in 0..g.nx {
        s.u[i] = cert.eval(t, g.x(i), g.ny - 1).u;
    }
    for j in 0..g.ny {
        for i in 0..g.nx {
            s.v[j * g.nx + i] = cert.eval(t, g.x(i), j).v;
        }
    }
    s
}

/// Runs the model from `initial` to `t_end` and compares with a fixed-frame
/// certificate (whose clock starts at `initial.t`) every `every` steps: returns `min (solution - certificate)`
/// for a subsolution and `min (certificate - solution)` for a supersolution.
/// The field rows of the model and the profile must coincide.
pub fn certificate_ordering(
    model: &Model,
    initial: &State,
    cert: &Certificate,
    t_end: f64,
    every: usize,
) -> Result<f64> {
    if cert.kind.frame_speed(1.0) != 0.0 {
        return Err(Error::InvalidParameter {
            name: "cert",
            reason: "run comparison needs a fixed-frame certificate".into(),
        });
    }
    if model.grid.ny != cert.profile.grid.ny {
        return Err(Error::GridMismatch("model and profile rows differ".into()));
    }
    let mu = model.params.exchange_rate;
    let t0 = initial.t;
    let compare = |s: &State| {
        let c = certificate_state(cert, model, s.t - t0);
        if cert.kind.is_super() {
            state_ordering(s, &c, mu)
        } else {
            state_ordering(&c, s, mu)
        }
    };
    let n = (t_end / model.max_dt()).ceil().max(1.0) as usize;
    let dt = t_end / n as f64;
    let mut s = initial.clone();
    let mut worst = compare(&s);
    for k in 1..=n {
        s = model.step(&s, dt)?;
        if k % every.max(1) == 0 || k == n {
            worst = worst.min(compare(&s));
        }
    }
    Ok(worst)
}
