//! Closed-form sub- and supersolutions assembled from a wave profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waves::WaveProfile;

use super::gamma::GammaWeight;
use super::params::{CertMode, CertificateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Wave shifted by `xi(t)` plus the `Gamma`-weighted correction, in the
    /// frame moving with the wave.
    FrontlikeSuper,
    /// Wave shifted by `-xi(t)` minus the correction, moving frame.
    FrontlikeSub,
    /// `max(0, phi + phi~ - 1/mu - q min(Gamma, Gamma~))`, fixed frame.
    PairwaveSub,
    /// Minimum of a left-moving and a right-moving supersolution, fixed frame.
    PairwaveSuperMin,
}

impl CertificateKind {
    pub fn is_super(self) -> bool {
        matches!(self, Self::FrontlikeSuper | Self::PairwaveSuperMin)
    }

    /// Speed of the frame in which the certificate is written.
    pub fn frame_speed(self, c: f64) -> f64 {
        match self {
            Self::FrontlikeSuper | Self::FrontlikeSub => c,
            Self::PairwaveSub | Self::PairwaveSuperMin => 0.0,
        }
    }
}

/// Value and time derivative of both components at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeValue {
    pub u: f64,
    pub u_t: f64,
    pub v: f64,
    pub v_t: f64,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub cert: CertificateParams,
    pub gamma: GammaWeight,
    pub profile: WaveProfile,
    dphi: Vec<f64>,
    dpsi: Vec<f64>,
}

/// Interpolation weights for `x` on a uniform grid, clamped at the ends.
#[inline]
fn locate(x: f64, x0: f64, dx: f64, n: usize) -> (usize, f64) {
    let s = (x - x0) / dx;
    if s <= 0.0 {
        (0, 0.0)
    } else if s >= (n - 1) as f64 {
        (n - 2, 1.0)
    } else {
        let k = s.floor() as usize;
        (k, s - k as f64)
    }
}

/// Fourth-order central differences, second order next to the ends and
/// one-sided at the ends.
fn slopes(vals: &[f64], dx: f64) -> Vec<f64> {
    let n = vals.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (vals[i - 2] - 8.0 * vals[i - 1] + 8.0 * vals[i + 1] - vals[i + 2]) / (12.0 * dx)
            } else {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (vals[b] - vals[a]) / ((b - a) as f64 * dx)
            }
        })
        .collect()
}

/// Shift `xi(t)` in units of x (already multiplied by `c` where needed) and its rate.
struct Motion {
    z0: f64,
    z_t: f64,
}

pub fn build_certificate(
    profile: &WaveProfile,
    cert: &CertificateParams,
    gamma: &GammaWeight,
    kind: CertificateKind,
) -> Result<Certificate> {
    let pairwave = matches!(
        kind,
        CertificateKind::PairwaveSub | CertificateKind::PairwaveSuperMin
    );
    if pairwave != (cert.mode == CertMode::Pairwave) {
        return Err(Error::InvalidParameter {
            name: "kind",
            reason: format!(
                "{kind:?} does not match constants derived for {:?}",
                cert.mode
            ),
        });
    }
    let g = &profile.grid;
    let dphi = slopes(&profile.phi, g.dx);
    let mut dpsi = Vec::with_capacity(profile.psi.len());
    for row in profile.psi.chunks(g.nx) {
        dpsi.extend(slopes(row, g.dx));
    }
    Ok(Certificate {
        kind,
        cert: cert.clone(),
        gamma: gamma.clone(),
        profile: profile.clone(),
        dphi,
        dpsi,
    })
}

impl Certificate {
    /// Profile argument offset `z - sigma x` and its time derivative.
    fn motion(&self, t: f64) -> Motion {
        let c = self.cert.speed;
        let drift = self.cert.shift_drift(t);
        let rate = self.cert.shift_speed(t);
        let xi0 = self.cert.xi0;
        match self.kind {
            CertificateKind::FrontlikeSuper => Motion {
                z0: c * (xi0 + drift),
                z_t: c * rate,
            },
            // xi starts from -xi0 and enters with a minus sign.
            CertificateKind::FrontlikeSub => Motion {
                z0: -c * (-xi0 + drift),
                z_t: -c * rate,
            },
            CertificateKind::PairwaveSub => Motion {
                z0: c * t + xi0 - c * drift,
                z_t: c - c * rate,
            },
            CertificateKind::PairwaveSuperMin => Motion {
                z0: c * t + c * (xi0 + drift),
                z_t: c + c * rate,
            },
        }
    }

    /// Offset of the profile argument at time `t`: the argument is
    /// `x + offset` (and `-x + offset` for the mirrored wave).
    pub fn offset(&self, t: f64) -> f64 {
        self.motion(t).z0
    }

    /// Profile value and slope at `z`; outside the window the measured
    /// exponential tails continue the end values.
    #[inline]
    fn profile_at(&self, z: f64, j: Option<usize>) -> (f64, f64) {
        let p = &self.profile;
        let g = &p.grid;
        let (vals, ders, top) = match j {
            None => (&p.phi[..], &self.dphi[..], 1.0 / p.params.exchange_rate),
            Some(j) => {
                let r = j * g.nx..(j + 1) * g.nx;
                (&p.psi[r.clone()], &self.dpsi[r], 1.0)
            }
        };
        if z < g.x_min {
            let v = vals[0] * (p.lambda * (z - g.x_min)).exp();
            return (v, p.lambda * v);
        }
        if z > g.x_max {
            let gap = (top - vals[g.nx - 1]) * (-p.lambda_tilde * (z - g.x_max)).exp();
            return (top - gap, p.lambda_tilde * gap);
        }
        let (k, w) = locate(z, g.x_min, g.dx, g.nx);
        (
            (1.0 - w) * vals[k] + w * vals[k + 1],
            (1.0 - w) * ders[k] + w * ders[k + 1],
        )
    }

    /// Certificate and its time derivative at `(t, x)` on field row `j`.
    pub fn eval(&self, t: f64, x: f64, j: usize) -> NodeValue {
        let p = &self.profile;
        let mu = p.params.exchange_rate;
        let y = p.grid.y(j);
        let m = self.motion(t);
        let om = self.cert.omega;
        let qu = self.cert.q_road(t);
        let qv = self.cert.q_field(t, y);

        // One wave with its correction: (value, d/dt) for u and v.
        let branch = |z: f64, sign: f64| -> NodeValue {
            let (ph, dph) = self.profile_at(z, None);
            let (ps, dps) = self.profile_at(z, Some(j));
            let (gm, dg, _) = self.gamma.eval(z);
            NodeValue {
                u: ph + sign * qu * gm / mu,
                u_t: m.z_t * (dph + sign * qu * dg / mu) - sign * om * qu * gm / mu,
                v: ps + sign * qv * gm,
                v_t: m.z_t * (dps + sign * qv * dg) - sign * om * qv * gm,
            }
        };

        match self.kind {
            CertificateKind::FrontlikeSuper => branch(x + m.z0, 1.0),
            CertificateKind::FrontlikeSub => branch(x + m.z0, -1.0),
            CertificateKind::PairwaveSuperMin => {
                let a = branch(x + m.z0, 1.0);
                let b = branch(-x + m.z0, 1.0);
                let (u, u_t) = if a.u <= b.u {
                    (a.u, a.u_t)
                } else {
                    (b.u, b.u_t)
                };
                let (v, v_t) = if a.v <= b.v {
                    (a.v, a.v_t)
                } else {
                    (b.v, b.v_t)
                };
                NodeValue { u, u_t, v, v_t }
            }
            CertificateKind::PairwaveSub => {
                let (z1, z2) = (x + m.z0, -x + m.z0);
                let (p1, dp1) = self.profile_at(z1, None);
                let (p2, dp2) = self.profile_at(z2, None);
                let (s1, ds1) = self.profile_at(z1, Some(j));
                let (s2, ds2) = self.profile_at(z2, Some(j));
                let (g1, dg1, _) = self.gamma.eval(z1);
                let (g2, dg2, _) = self.gamma.eval(z2);
                let (gm, dgm) = if g1 <= g2 { (g1, dg1) } else { (g2, dg2) };
                let u = p1 + p2 - 1.0 / mu - qu * gm / mu;
                let u_t = m.z_t * (dp1 + dp2 - qu * dgm / mu) + om * qu * gm / mu;
                let v = s1 + s2 - 1.0 - qv * gm;
                let v_t = m.z_t * (ds1 + ds2 - qv * dgm) + om * qv * gm;
                let (u, u_t) = if u > 0.0 { (u, u_t) } else { (0.0, 0.0) };
                let (v, v_t) = if v > 0.0 { (v, v_t) } else { (0.0, 0.0) };
                NodeValue { u, u_t, v, v_t }
            }
        }
    }

    /// Range of `x` for which every profile argument stays at least `margin`
    /// inside the profile window at time `t`; `None` if empty.
    pub fn valid_range(&self, t: f64, margin: f64) -> Option<(f64, f64)> {
        let g = &self.profile.grid;
        let (lo, hi) = (g.x_min + margin, g.x_max - margin);
        let z0 = self.offset(t);
        let (a, b) = match self.kind {
            CertificateKind::FrontlikeSuper | CertificateKind::FrontlikeSub => (lo - z0, hi - z0),
            CertificateKind::PairwaveSub | CertificateKind::PairwaveSuperMin => {
                let r = (hi - z0).min(z0 - lo);
                (-r, r)
            }
        };
        (b > a).then_some((a, b))
    }

    /// Signed distance used to split the domain into zones: the argument of
    /// the nearer wave.
    pub fn zone_coordinate(&self, t: f64, x: f64) -> f64 {
        let z0 = self.offset(t);
        match self.kind {
            CertificateKind::FrontlikeSuper | CertificateKind::FrontlikeSub => x + z0,
            CertificateKind::PairwaveSub | CertificateKind::PairwaveSuperMin => -x.abs() + z0,
        }
    }
}
