//! Discrete evaluation of the operator on a certificate.
//!
//! Spatial derivatives are finite differences of the certificate sampled on
//! a uniform x-grid with the profile's spacing and the profile's y-rows;
//! time derivatives are the closed-form ones. Sample nodes are placed so
//! that profile arguments are profile nodes (for two-wave certificates the
//! sample times are moved forward to make that possible), so no
//! interpolation enters. The bottom row uses the
//! Neumann mirror, the top row a one-sided second-order stencil. The
//! exchange condition `d v_y + v - mu u` on the road is reported separately.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::certificate::Certificate;

/// Residual tolerance constant: `tol = RESIDUAL_CONSTANT * (dx^2 + dt)`.
///
/// Fixed from the unperturbed wave (`epsilon = 0`) for d = 0.1, L = 5,
/// D = 25 computed with dx = 0.1, dy = 0.125 and four road substeps: its
/// largest residual of either sign is about 3.1 (dx^2 + dt), and the factor 2
/// over that is headroom. The scale is set by the field's ignition layer,
/// which is only a few cells wide at that resolution.
pub const RESIDUAL_CONSTANT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    /// Invaded side of the front.
    Behind,
    /// Around the interface.
    Middle,
    /// Unburnt side, where `f` vanishes.
    Ahead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Road,
    Field,
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub component: Component,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneStat {
    pub min: f64,
    pub argmin: Option<Location>,
    pub max: f64,
    pub argmax: Option<Location>,
    pub nodes: usize,
}

impl Default for ZoneStat {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            argmin: None,
            max: f64::NEG_INFINITY,
            argmax: None,
            nodes: 0,
        }
    }
}

impl ZoneStat {
    fn push(&mut self, r: f64, at: Location) {
        self.nodes += 1;
        if r < self.min {
            self.min = r;
            self.argmin = Some(at);
        }
        if r > self.max {
            self.max = r;
            self.argmax = Some(at);
        }
    }

    fn merge(&mut self, o: &ZoneStat) {
        self.nodes += o.nodes;
        if o.min < self.min {
            self.min = o.min;
            self.argmin = o.argmin;
        }
        if o.max > self.max {
            self.max = o.max;
            self.argmax = o.argmax;
        }
    }

    /// Amount by which the required sign is violated (0 if it holds).
    pub fn violation(&self, supersolution: bool) -> f64 {
        if self.nodes == 0 {
            0.0
        } else if supersolution {
            (-self.min).max(0.0)
        } else {
            self.max.max(0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualOptions {
    /// Nodes closer than this many cells to the profile window edge are skipped.
    pub margin_cells: usize,
    pub residual_constant: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            margin_cells: 10,
            residual_constant: RESIDUAL_CONSTANT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: super::certificate::CertificateKind,
    pub supersolution: bool,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub tol: f64,
    /// Times actually sampled.
    pub times: Vec<f64>,
    pub zones: BTreeMap<Zone, ZoneStat>,
    /// `d v_y + v - mu u` on the road.
    pub boundary: ZoneStat,
    /// Largest zone violation.
    pub violation: f64,
    /// Every zone within `tol`.
    pub pass: bool,
    pub boundary_pass: bool,
}

impl ResidualReport {
    pub fn zone(&self, z: Zone) -> ZoneStat {
        self.zones.get(&z).copied().unwrap_or_default()
    }
}

fn classify(z: f64, inner: f64) -> Zone {
    if z < -inner {
        Zone::Ahead
    } else if z > inner {
        Zone::Behind
    } else {
        Zone::Middle
    }
}

struct Sample {
    zones: BTreeMap<Zone, ZoneStat>,
    boundary: ZoneStat,
}

fn scan_time(cert: &Certificate, t: f64, margin: f64) -> Result<Sample> {
    let p = &cert.profile;
    let g = &p.grid;
    let pp = &p.params;
    let (dx, dy, ny) = (g.dx, g.dy, g.ny);
    let (a, b) = cert.valid_range(t, margin).ok_or_else(|| {
        invalid(
            "time_samples",
            format!("t = {t} moves the certificate out of the profile window"),
        )
    })?;
    // Nodes placed so that the (first) profile argument falls on profile nodes.
    let z0 = cert.offset(t);
    let xs: Vec<f64> = (0..g.nx)
        .map(|k| g.x(k) - z0)
        .filter(|x| (a..=b).contains(x))
        .collect();
    if xs.len() < 5 {
        return Err(invalid(
            "time_samples",
            format!("fewer than 5 nodes left at t = {t}"),
        ));
    }
    let n = xs.len();
    let mut vals = vec![Default::default(); n * ny];
    for j in 0..ny {
        for (i, &x) in xs.iter().enumerate() {
            vals[j * n + i] = cert.eval(t, x, j);
        }
    }
    let at = |i: usize, j: usize| -> &super::certificate::NodeValue { &vals[j * n + i] };

    let au = pp.road_coeff();
    let ax = pp.field_x_coeff();
    let d = pp.field_y_coeff();
    let mu = pp.exchange_rate;
    let cf = cert.kind.frame_speed(cert.cert.speed);
    let f = &p.reaction;
    let inner = match cert.kind {
        super::certificate::CertificateKind::FrontlikeSuper
        | super::certificate::CertificateKind::FrontlikeSub => cert.cert.plateau_offset + 1.0,
        _ => cert.cert.plateau_offset,
    };
    let top = ny - 1;

    // Fourth-order first derivative, second order next to the ends.
    let d1 = |g: &dyn Fn(usize) -> f64, i: usize| {
        if i >= 2 && i + 2 < n {
            (g(i - 2) - 8.0 * g(i - 1) + 8.0 * g(i + 1) - g(i + 2)) / (12.0 * dx)
        } else {
            (g(i + 1) - g(i - 1)) / (2.0 * dx)
        }
    };
    let mut zones: BTreeMap<Zone, ZoneStat> = BTreeMap::new();
    let mut boundary = ZoneStat::default();
    for i in 1..n - 1 {
        let x = xs[i];
        let zone = classify(cert.zone_coordinate(t, x), inner);
        let stat = zones.entry(zone).or_default();

        let (l, c, r) = (at(i - 1, top), at(i, top), at(i + 1, top));
        let u_xx = (l.u - 2.0 * c.u + r.u) / (dx * dx);
        let u_x = d1(&|k| at(k, top).u, i);
        let road = c.u_t - au * u_xx + cf * u_x + mu * c.u - c.v;
        stat.push(
            road,
            Location {
                t,
                x,
                y: 0.0,
                component: Component::Road,
            },
        );

        for j in 0..ny {
            let (l, c, r) = (at(i - 1, j), at(i, j), at(i + 1, j));
            let v_xx = (l.v - 2.0 * c.v + r.v) / (dx * dx);
            let v_x = d1(&|k| at(k, j).v, i);
            let v_yy = if j == 0 {
                2.0 * (at(i, 1).v - c.v) / (dy * dy)
            } else if j == top {
                (2.0 * c.v - 5.0 * at(i, j - 1).v + 4.0 * at(i, j - 2).v - at(i, j - 3).v)
                    / (dy * dy)
            } else {
                (at(i, j - 1).v - 2.0 * c.v + at(i, j + 1).v) / (dy * dy)
            };
            let field = c.v_t - ax * v_xx - d * v_yy + cf * v_x - f.eval(c.v);
            stat.push(
                field,
                Location {
                    t,
                    x,
                    y: g.y(j),
                    component: Component::Field,
                },
            );
        }

        let c = at(i, top);
        let v_y = (3.0 * c.v - 4.0 * at(i, top - 1).v + at(i, top - 2).v) / (2.0 * dy);
        boundary.push(
            d * v_y + c.v - mu * c.u,
            Location {
                t,
                x,
                y: 0.0,
                component: Component::Exchange,
            },
        );
    }
    Ok(Sample { zones, boundary })
}

/// Nearest time at or after `t` at which both arguments `x + s(t)` and
/// `-x + s(t)` of a two-wave certificate fall on profile nodes, i.e.
/// `2 (s(t) - x_min)` is a multiple of `dx`. `s` is increasing since the
/// shift rate stays below the wave speed.
pub fn aligned_time(cert: &Certificate, t: f64) -> f64 {
    let g = &cert.profile.grid;
    let r = |t: f64| 2.0 * (cert.offset(t) - g.x_min) / g.dx;
    let target = r(t).ceil();
    if target - r(t) < 1e-9 {
        return t;
    }
    let (mut lo, mut hi) = (t, t + g.dx / cert.cert.speed.max(1e-12));
    while r(hi) < target {
        hi += hi - lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    hi
}

/// Applies the operator at every node of the sampled box and collects
/// extremes per zone. A supersolution passes if every zone minimum is at
/// least `-tol`, a subsolution if every maximum is at most `tol`, with
/// `tol = residual_constant * (dx^2 + dt)` and `dt` the profile's step.
pub fn residual(
    cert: &Certificate,
    time_samples: &[f64],
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    let g = &cert.profile.grid;
    if g.ny < 4 {
        return Err(invalid("ny", "residual needs at least 4 rows"));
    }
    if time_samples.is_empty() {
        return Err(invalid("time_samples", "empty"));
    }
    let margin = opts.margin_cells as f64 * g.dx;
    let times: Vec<f64> = if cert.kind.frame_speed(1.0) == 0.0 {
        time_samples
            .iter()
            .map(|&t| aligned_time(cert, t))
            .collect()
    } else {
        time_samples.to_vec()
    };
    let samples = times
        .par_iter()
        .map(|&t| scan_time(cert, t, margin))
        .collect::<Result<Vec<_>>>()?;
    let mut zones: BTreeMap<Zone, ZoneStat> = BTreeMap::new();
    let mut boundary = ZoneStat::default();
    for s in &samples {
        for (z, st) in &s.zones {
            zones.entry(*z).or_default().merge(st);
        }
        boundary.merge(&s.boundary);
    }
    let sup = cert.kind.is_super();
    let dt = cert.profile.dt;
    let tol = opts.residual_constant * (g.dx * g.dx + dt);
    let violation = zones.values().map(|z| z.violation(sup)).fold(0.0, f64::max);
    let boundary_violation = boundary.violation(sup);
    Ok(ResidualReport {
        kind: cert.kind,
        supersolution: sup,
        dx: g.dx,
        dy: g.dy,
        dt,
        tol,
        zones,
        boundary,
        times,
        violation,
        pass: violation <= tol,
        boundary_pass: boundary_violation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zones_partition_the_line() {
        assert_eq!(classify(-5.1, 5.0), Zone::Ahead);
        assert_eq!(classify(5.0, 5.0), Zone::Middle);
        assert_eq!(classify(5.1, 5.0), Zone::Behind);
    }

    #[test]
    fn violation_sign() {
        let mut s = ZoneStat::default();
        let at = Location {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            component: Component::Road,
        };
        s.push(-0.5, at);
        s.push(0.25, at);
        assert_eq!(s.violation(true), 0.5);
        assert_eq!(s.violation(false), 0.25);
        assert_eq!(ZoneStat::default().violation(true), 0.0);
    }
}
