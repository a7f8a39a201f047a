//! Constants of the wave-based sub- and supersolutions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nonlinearity::DerivedConstants;
use crate::params::Frame;
use crate::waves::{WaveKind, WaveProfile};

use super::gamma::{GammaMargin, GammaWeight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CertMode {
    /// Data with a left tail bounded by `exp(alpha0 x)`.
    Frontlike { alpha0: f64 },
    /// Two waves moving apart.
    Pairwave,
}

/// How the field correction meets the exchange condition on the road.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobinClosure {
    /// `C = cosh(kL) + sinh(kL)`, which satisfies `h'(0) + h(0) = C` but
    /// leaves `d h'(0) + h(0) - C = (dk - 1) sinh(kL)` on the boundary.
    #[default]
    Unit,
    /// `C = cosh(kL) + dk sinh(kL)`: exact for the exchange condition; the
    /// road bound on `omega` becomes `mu s tanh(kL) / (1 + s tanh(kL))`, `s = dk`.
    Diffusivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertOptions {
    pub mode: CertMode,
    pub closure: RobinClosure,
    /// `epsilon = epsilon_fraction * epsilon0`.
    pub epsilon_fraction: f64,
    /// Fitted tail rates are multiplied by this before the tail bounds are
    /// checked (the bounds hold for any smaller rate).
    pub rate_margin: f64,
    /// Initial shift; `None` picks 0 for front-like data and
    /// `2 L0 + 2` for a pair of waves.
    pub xi0: Option<f64>,
}

impl CertOptions {
    pub fn frontlike(alpha0: f64) -> Self {
        Self {
            mode: CertMode::Frontlike { alpha0 },
            closure: RobinClosure::Unit,
            epsilon_fraction: 0.5,
            rate_margin: 0.9,
            xi0: None,
        }
    }

    pub fn pairwave() -> Self {
        Self {
            mode: CertMode::Pairwave,
            ..Self::frontlike(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub mode: CertMode,
    pub closure: RobinClosure,
    pub speed: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Road amplitude of the correction, `C`.
    pub road_amplitude: f64,
    /// Shift rate constant `B`.
    pub shift_rate: f64,
    pub epsilon0: f64,
    pub epsilon: f64,
    pub xi0: f64,
    /// Smallest x-slope of the profile on `|x| < L0 + 2` where it is used
    /// (see [`interface_slope`]).
    pub interface_slope: f64,
    pub plateau_offset: f64,
    /// Tail rates for which the tail bounds were verified.
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// Level above which `-f' >= beta`.
    pub theta1: f64,
    pub gamma_c2: f64,
    pub field_diffusivity: f64,
    pub depth: f64,
    pub exchange_rate: f64,
}

impl CertificateParams {
    /// `sqrt(kappa / d)`.
    pub fn envelope_rate(&self) -> f64 {
        (self.kappa / self.field_diffusivity).sqrt()
    }

    /// `h(y) = cosh(sqrt(kappa/d) (y + L))`.
    pub fn envelope(&self, y: f64) -> f64 {
        (self.envelope_rate() * (y + self.depth)).cosh()
    }

    pub fn envelope_slope(&self, y: f64) -> f64 {
        let k = self.envelope_rate();
        k * (k * (y + self.depth)).sinh()
    }

    pub fn q_road(&self, t: f64) -> f64 {
        self.epsilon * self.road_amplitude * (-self.omega * t).exp()
    }

    pub fn q_field(&self, t: f64, y: f64) -> f64 {
        self.epsilon * self.envelope(y) * (-self.omega * t).exp()
    }

    /// `xi(t) - xi(0) = B eps (1 - exp(-omega t)) / omega`.
    pub fn shift_drift(&self, t: f64) -> f64 {
        if self.epsilon == 0.0 {
            return 0.0;
        }
        self.shift_rate * self.epsilon * (-(-self.omega * t).exp_m1()) / self.omega
    }

    pub fn shift_speed(&self, t: f64) -> f64 {
        self.shift_rate * self.epsilon * (-self.omega * t).exp()
    }

    /// `B / omega`, the total drift per unit epsilon.
    pub fn drift_constant(&self) -> f64 {
        self.shift_rate / self.omega
    }

    pub fn gamma_margin(&self) -> GammaMargin {
        match self.mode {
            CertMode::Frontlike { .. } => GammaMargin::Standard,
            CertMode::Pairwave => GammaMargin::Widened,
        }
    }

    pub fn gamma(&self) -> Result<GammaWeight> {
        GammaWeight::new(self.alpha, self.plateau_offset, self.gamma_margin())
    }

    /// Same constants with the correction switched off (`epsilon = 0`).
    pub fn without_correction(&self) -> Self {
        Self {
            epsilon: 0.0,
            ..self.clone()
        }
    }
}

/// `min(beta/2, (alpha c - ratio alpha^2) / 2)` with `ratio = d / D`.
pub fn kappa(beta: f64, alpha: f64, speed: f64, ratio: f64) -> f64 {
    (0.5 * beta).min(0.5 * (alpha * speed - ratio * alpha * alpha))
}

/// `mu s tanh(x) / (1 + s tanh(x))`; `s = 1` is the unit closure.
pub fn road_rate_bound(mu: f64, x: f64, s: f64) -> f64 {
    let t = x.tanh();
    mu * s * t / (1.0 + s * t)
}

/// `min(G, beta/2, Lip f, alpha c / 4 - alpha^2)`.
pub fn omega(g: f64, beta: f64, lip: f64, alpha: f64, speed: f64) -> f64 {
    g.min(0.5 * beta)
        .min(lip)
        .min(0.25 * alpha * speed - alpha * alpha)
}

/// Checks the exponential tail bounds on the discrete profile for a given `L0`.
fn tails_hold(p: &WaveProfile, l0: f64, theta: f64, theta1: f64, lam: f64, lamt: f64) -> bool {
    let g = &p.grid;
    let mu = p.params.exchange_rate;
    let half = 0.5 * l0;
    for i in 0..g.nx {
        let x = g.x(i);
        let mut vals = Vec::with_capacity(g.ny + 1);
        vals.push(mu * p.phi[i]);
        vals.extend((0..g.ny).map(|j| p.psi_at(i, j)));
        if x < -half {
            let bound = 0.5 * theta * (lam * (x + half)).exp();
            if vals.iter().any(|&v| v > bound) {
                return false;
            }
        } else if x > half {
            let bound = 0.5 * (1.0 - theta1) * (-lamt * (x - half)).exp();
            if vals.iter().any(|&v| 1.0 - v > bound) {
                return false;
            }
        }
    }
    true
}

/// Smallest forward difference quotient of `mu phi` and of every row of
/// `psi` over node pairs inside `|x| < width` at which the slope is used:
/// the component is still below `theta1` or `gamma` is below its plateau.
/// Elsewhere the middle-zone inequality is carried by `f' <= -beta` (field)
/// or by the plateau (road), and the saturated rows have zero slope in
/// floating point.
pub fn interface_slope(p: &WaveProfile, width: f64, theta1: f64, gamma: &GammaWeight) -> f64 {
    let g = &p.grid;
    let mu = p.params.exchange_rate;
    let mut best = f64::INFINITY;
    for i in 0..g.nx - 1 {
        let (xa, xb) = (g.x(i), g.x(i + 1));
        if xa.abs() >= width || xb.abs() >= width {
            continue;
        }
        let flat = gamma.value(xa) >= 1.0;
        let mut pair = |a: f64, b: f64| {
            if !flat || a < theta1 {
                best = best.min((b - a) / g.dx);
            }
        };
        pair(mu * p.phi[i], mu * p.phi[i + 1]);
        for j in 0..g.ny {
            pair(p.psi_at(i, j), p.psi_at(i + 1, j));
        }
    }
    best
}

/// Evaluates the constant chain `alpha -> kappa -> omega, C -> delta -> B ->
/// epsilon0` for a converged full-system profile in the rescaled frame.
/// `L0` starts at 3.5 and grows by 0.5 until the tail bounds hold.
pub fn derive_cert_params(
    profile: &WaveProfile,
    consts: &DerivedConstants,
    opts: &CertOptions,
) -> Result<CertificateParams> {
    if profile.kind != WaveKind::FullSystem {
        return Err(invalid("profile", "certificates need a full-system wave"));
    }
    if profile.params.frame != Frame::Rescaled {
        return Err(invalid(
            "profile",
            "certificates are built in the rescaled frame",
        ));
    }
    if !(0.0 < opts.epsilon_fraction && opts.epsilon_fraction < 1.0) {
        return Err(invalid("epsilon_fraction", "must lie in (0, 1)"));
    }
    let pp = &profile.params;
    let (d, depth, mu) = (pp.field_diffusivity, pp.depth, pp.exchange_rate);
    let ratio = pp.field_x_coeff() / pp.road_coeff();
    let c = profile.speed;
    if !(c > 0.0) {
        return Err(invalid("speed", format!("{c} must be positive")));
    }
    let theta = profile.reaction.threshold;
    let theta1 = consts.decreasing_above;
    let lam = opts.rate_margin * profile.lambda;
    let lamt = opts.rate_margin * profile.lambda_tilde;

    let alpha = match opts.mode {
        CertMode::Frontlike { alpha0 } => {
            if !(alpha0 > 0.0) {
                return Err(invalid("alpha0", format!("{alpha0} must be positive")));
            }
            alpha0.min(c / 5.0)
        }
        CertMode::Pairwave => lam.min(lamt).min(c / 5.0),
    };
    let slack = 0.25 * alpha * c - alpha * alpha;
    if !(slack > 0.0) {
        return Err(Error::NoSolution(format!(
            "alpha c / 4 - alpha^2 = {slack:.3e} <= 0: no admissible decay exponent"
        )));
    }
    let kap = kappa(consts.beta, alpha, c, ratio);
    let k = (kap / d).sqrt();
    let kl = k * depth;
    let (s, amplitude) = match opts.closure {
        RobinClosure::Unit => (1.0, kl.cosh() + kl.sinh()),
        RobinClosure::Diffusivity => (d * k, kl.cosh() + d * k * kl.sinh()),
    };
    let om = omega(
        road_rate_bound(mu, kl, s),
        consts.beta,
        consts.lip_f,
        alpha,
        c,
    );

    let half_width = 0.5 * (profile.grid.x_max - profile.grid.x_min);
    let mut l0 = 3.5;
    loop {
        if l0 + 3.0 > half_width {
            return Err(Error::NotConverged(format!(
                "tail bounds fail for every L0 below {l0}; widen the wave window"
            )));
        }
        if tails_hold(profile, l0, theta, theta1, lam, lamt) {
            break;
        }
        l0 += 0.5;
    }
    let margin = match opts.mode {
        CertMode::Frontlike { .. } => GammaMargin::Standard,
        CertMode::Pairwave => GammaMargin::Widened,
    };
    let gamma = GammaWeight::new(alpha, l0, margin)?;
    let delta = interface_slope(profile, l0 + 2.0, theta1, &gamma);
    if !(delta > 0.0) {
        return Err(Error::NotConverged(format!(
            "profile is not increasing on |x| < L0 + 2 (slope {delta:.3e})"
        )));
    }
    let b = (3.0 * consts.lip_f + gamma.c2_norm) / (c * delta) * amplitude * (1.0f64).max(1.0 / mu);
    let mut eps0 = (0.25 * theta).min(0.25 * (1.0 - theta1)).min(0.25 / b);
    if opts.mode == CertMode::Pairwave {
        eps0 = eps0.min(om / (c * b));
    }
    let xi0 = opts.xi0.unwrap_or(match opts.mode {
        CertMode::Frontlike { .. } => 0.0,
        CertMode::Pairwave => 2.0 * l0 + 2.0,
    });
    Ok(CertificateParams {
        mode: opts.mode,
        closure: opts.closure,
        speed: c,
        alpha,
        kappa: kap,
        omega: om,
        road_amplitude: amplitude,
        shift_rate: b,
        epsilon0: eps0,
        epsilon: opts.epsilon_fraction * eps0,
        xi0,
        interface_slope: delta,
        plateau_offset: l0,
        lambda: lam,
        lambda_tilde: lamt,
        theta1,
        gamma_c2: gamma.c2_norm,
        field_diffusivity: d,
        depth,
        exchange_rate: mu,
    })
}
