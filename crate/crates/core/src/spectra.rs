//! Strip eigenvalues, the dispersion relation of the linear road-field
//! system, Gaussian large-time comparison and the exchange-rate thresholds of
//! the x-uniform problem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nonlinearity::DerivedConstants;
use crate::params::{Grid, PhysicalParams};
use crate::roots::{bisect, golden_max};

/// First eigenvalue of `-w''` on `(-L, 0)` with `w'(-L) = 0` and
/// `w'(0) + w(0) = 0`. The eigenfunction is `cos(s (y + L))` with
/// `s tan(s L) = 1`, and the eigenvalue is `s^2`.
pub fn lambda0(depth: f64) -> Result<f64> {
    Ok(first_robin_root(depth, 1.0)?.powi(2))
}

/// First eigenvalue of `-d w''` on `(-L, 0)` with `w'(-L) = 0` and
/// `d w'(0) + w(0) = 0`: `lambda = d k^2` where `cot(k L) = d k`.
pub fn lambda1(depth: f64, diffusivity: f64) -> Result<f64> {
    let k = first_robin_root(depth, diffusivity)?;
    Ok(diffusivity * k * k)
}

/// Smallest positive root of `cos(k L) - d k sin(k L)`, which lies in
/// `(0, pi / (2L))`.
pub fn first_robin_root(depth: f64, diffusivity: f64) -> Result<f64> {
    if !(depth > 0.0) {
        return Err(invalid("L", format!("{depth} must be positive")));
    }
    if !(diffusivity > 0.0) {
        return Err(invalid("d", format!("{diffusivity} must be positive")));
    }
    let g = |k: f64| (k * depth).cos() - diffusivity * k * (k * depth).sin();
    bisect(g, 0.0, PI / (2.0 * depth), 1e-16)
}

/// Large-time diffusivity `(1 + mu eps^2) / (1 + mu)` of the linear road
/// dynamics with unit depth.
pub fn effective_diffusivity(mu: f64, eps: f64) -> f64 {
    effective_diffusivity_at_depth(mu, eps, 1.0)
}

/// Same as [`effective_diffusivity`] for a strip of depth `L`:
/// `(1 + mu L eps^2) / (1 + mu L)`.
pub fn effective_diffusivity_at_depth(mu: f64, eps: f64, depth: f64) -> f64 {
    (1.0 + mu * depth * eps * eps) / (1.0 + mu * depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub xi: f64,
    pub lambda: f64,
    pub asymptotic: f64,
    pub rel_error: f64,
}

/// `s tan(s L)` continued to `s^2 < 0` as `-r tanh(r L)`, `r = sqrt(-s^2)`.
fn robin_symbol(s2: f64, depth: f64) -> f64 {
    if s2 >= 0.0 {
        let s = s2.sqrt();
        s * (s * depth).tan()
    } else {
        let r = (-s2).sqrt();
        -r * (r * depth).tanh()
    }
}

/// Decay rate of the Fourier mode `exp(i xi x - lambda t)` of the linear system
///
/// ```text
/// u_t - u_xx = v(x,0) - mu u,   v_t - eps^2 v_xx - v_yy = 0,
/// v_y(x,0) + v(x,0) = mu u,     v_y(x,-L) = 0,
/// ```
///
/// on the branch through `lambda(0) = 0`. The root of
/// `xi^2 - lambda - mu T / (1 - T)`, `T = s tan(L s)`, `s^2 = lambda - eps^2 xi^2`,
/// is bracketed between 0 and the first pole `T = 1`, capped at four times
/// the small-`xi` asymptote.
pub fn dispersion_lambda(xi: f64, mu: f64, eps: f64, depth: f64) -> Result<DispersionResult> {
    let asymptotic = effective_diffusivity_at_depth(mu, eps, depth) * xi * xi;
    if xi == 0.0 {
        return Ok(DispersionResult {
            xi,
            lambda: 0.0,
            asymptotic: 0.0,
            rel_error: 0.0,
        });
    }
    let shift = eps * eps * xi * xi;
    let pole = lambda0(depth)? + shift;
    let hi = (4.0 * asymptotic).min(pole * (1.0 - 1e-12));
    let big_f = |lambda: f64| {
        let t = robin_symbol(lambda - shift, depth);
        xi * xi - lambda - mu * t / (1.0 - t)
    };
    let lambda = bisect(big_f, 0.0, hi, 1e-17 * (1.0 + hi))?;
    Ok(DispersionResult {
        xi,
        lambda,
        asymptotic,
        rel_error: (lambda - asymptotic).abs() / asymptotic,
    })
}

/// `sup_x |u(t) - m(t) G_a(t) * u0| / sup_x |u(t)|`, where `G_a` is the heat
/// kernel of diffusivity `a` and `m(t) = ∫u(t) / ∫u0` absorbs the mass that
/// has moved into the field.
pub fn gaussian_oracle_error(u0: &[f64], u: &[f64], grid: &Grid, t: f64, a: f64) -> Result<f64> {
    if u0.len() != grid.nx || u.len() != grid.nx {
        return Err(Error::GridMismatch(format!(
            "road vectors of length {} and {} on {} nodes",
            u0.len(),
            u.len(),
            grid.nx
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let integral = |w: &[f64]| -> f64 { w.iter().enumerate().map(|(i, &x)| grid.wx(i) * x).sum() };
    let m0 = integral(u0);
    if m0 == 0.0 {
        return Err(invalid("u0", "initial road mass is zero"));
    }
    let m = integral(u) / m0;
    let norm = 1.0 / (4.0 * PI * a * t).sqrt();
    let peak = u.iter().fold(0.0f64, |p, &x| p.max(x.abs()));
    let mut err: f64 = 0.0;
    for i in 0..grid.nx {
        let x = grid.x(i);
        let mut conv = 0.0;
        for (k, &w) in u0.iter().enumerate() {
            if w != 0.0 {
                let z = x - grid.x(k);
                conv += grid.wx(k) * w * (-z * z / (4.0 * a * t)).exp();
            }
        }
        err = err.max((u[i] - m * norm * conv).abs());
    }
    Ok(err / peak)
}

/// Bounds on the exchange rate for x-uniform road data `mu u0 = 1, v0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuThresholds {
    /// Below this the data invade.
    pub mu_minus: f64,
    /// Above this the data spread out to the constant `1 / (mu L + 1)`.
    pub mu_plus: f64,
    pub lambda1: f64,
    /// `theta' cos(k (L - L0)) / cos(k L)`.
    pub k_factor: f64,
    /// Early-time kernel constant (sup bound of the Neumann series).
    pub kernel_constant: f64,
    /// Constant in `v <= C sqrt(t)` for `t <= 1`: `max(lip_f, 2d) (1 + 2 C')`.
    pub sqrt_t_constant: f64,
}

/// `C' = sup_{0 < s <= 1} sqrt(s) (1/(2L) + (1/L) sum_{k>=1} exp(-d (k pi / 2L)^2 s))`:
/// the Neumann heat kernel of `d d_yy` on `(-L, L)` evaluated at the road,
/// bounded by `C' / sqrt(s)`.
pub fn kernel_constant(depth: f64, diffusivity: f64) -> f64 {
    let l = depth;
    let series = |s: f64| -> f64 {
        let rate = diffusivity * (PI / (2.0 * l)).powi(2) * s;
        let mut sum = 0.5 / l;
        let mut k = 1.0f64;
        loop {
            let term = (-rate * k * k).exp() / l;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        s.sqrt() * sum
    };
    // s -> 0 limit of sqrt(s) * series(s).
    let mut best = (0.0, 1.0 / (PI * diffusivity).sqrt());
    let n = 400;
    for k in 0..=n {
        let s = 10f64.powf(-8.0 + 8.0 * k as f64 / n as f64);
        let g = series(s);
        if g > best.1 {
            best = (s, g);
        }
    }
    if best.0 > 0.0 {
        let lo = (best.0 * 10f64.powf(-8.0 / n as f64)).max(1e-8);
        let hi = (best.0 * 10f64.powf(8.0 / n as f64)).min(1.0);
        let (_, g) = golden_max(series, lo, hi, 1e-12);
        best.1 = best.1.max(g);
    }
    best.1
}

/// Exchange-rate thresholds for invasion (`mu < mu_minus`) and uniform decay
/// (`mu > mu_plus`) of x-uniform road data.
///
/// `invasion_depth` is the depth `L0 < L` such that `mu u, v >= (1 + 3 theta)/4`
/// on `(-L0, 0)` already leads to invasion.
pub fn mu_thresholds(
    consts: &DerivedConstants,
    params: &PhysicalParams,
    threshold: f64,
    invasion_depth: f64,
) -> Result<MuThresholds> {
    let (l, d) = (params.depth, params.field_diffusivity);
    if !(invasion_depth > 0.0 && invasion_depth < l) {
        return Err(invalid(
            "L0",
            format!("invasion depth {invasion_depth} not in (0, {l})"),
        ));
    }
    let theta_p = 0.5 * (1.0 + threshold);
    let lam1 = lambda1(l, d)?;
    let k = (lam1 / d).sqrt();
    let denom = (k * l).cos();
    if !(denom > 0.0) {
        return Err(invalid(
            "L",
            format!("cos(k L) = {denom} leaves the principal branch"),
        ));
    }
    let k_factor = theta_p * (k * (l - invasion_depth)).cos() / denom;
    let mu_minus = lam1 * (1.0 / theta_p).ln() / (4.0 * k_factor / (1.0 - threshold)).ln();

    let cp = kernel_constant(l, d);
    let c = consts.lip_f.max(2.0 * d) * (1.0 + 2.0 * cp);
    let mu_plus = ((2.0 * c / threshold).powi(2) * (threshold / 2.0).ln().abs().powi(3))
        .max(0.5 * (c / threshold).powi(2));
    Ok(MuThresholds {
        mu_minus,
        mu_plus,
        lambda1: lam1,
        k_factor,
        kernel_constant: cp,
        sqrt_t_constant: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::IgnitionNonlinearity;
    use crate::params::Frame;

    /// `s = atan(1/s)` is a contraction near the root of `s tan s = 1`.
    fn unit_root_oracle() -> f64 {
        let mut s: f64 = 0.8;
        for _ in 0..200 {
            s = (1.0 / s).atan();
        }
        s
    }

    #[test]
    fn lambda0_unit_depth() {
        let s = unit_root_oracle();
        assert!((s - 0.8603).abs() < 1e-4);
        let l = lambda0(1.0).unwrap();
        assert!((l - s * s).abs() < 1e-12);
        assert!((l - 0.7402).abs() < 1e-4);
    }

    #[test]
    fn lambda0_eigenfunction_satisfies_boundary_conditions() {
        for depth in [0.3, 1.0, 4.0, 50.0] {
            let s = lambda0(depth).unwrap().sqrt();
            // w = cos(s(y+L)): w'(-L) = 0 by construction; w'(0) + w(0) = 0.
            let res = -s * (s * depth).sin() + (s * depth).cos();
            assert!(res.abs() < 1e-12, "depth {depth}: {res}");
        }
    }

    #[test]
    fn lambda0_decreases_to_zero() {
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 8.0, 64.0, 1024.0]
            .iter()
            .map(|&l| lambda0(l).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals[5] < 1e-5);
    }

    #[test]
    fn lambda1_with_unit_diffusivity_is_lambda0() {
        for depth in [0.5, 1.0, 5.0] {
            assert!((lambda1(depth, 1.0).unwrap() - lambda0(depth).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn lambda1_scaling_law() {
        // Substituting y = d z turns (L, d) into (L/d, 1) with time scaled by d.
        for &(l, d) in &[(1.0, 0.1), (5.0, 1.0), (5.0, 0.3), (2.0, 4.0), (50.0, 0.1)] {
            let direct = lambda1(l, d).unwrap();
            let reduced = lambda0(l / d).unwrap() / d;
            assert!((direct - reduced).abs() < 1e-12 * (1.0 + direct), "{l} {d}");
        }
    }

    #[test]
    fn lambda1_eigenfunction_residual() {
        for &(l, d) in &[(1.0, 0.1), (5.0, 1.0), (3.0, 2.5)] {
            let k = (lambda1(l, d).unwrap() / d).sqrt();
            let res = -d * k * (k * l).sin() + (k * l).cos();
            assert!(res.abs() < 1e-10);
        }
    }

    #[test]
    fn effective_diffusivity_values() {
        assert!((effective_diffusivity(1.4, 0.1) - 1.014 / 2.4).abs() < 1e-15);
        assert!((effective_diffusivity(1.4, 0.1) - 0.4225).abs() < 1e-15);
        assert_eq!(effective_diffusivity(3.0, 1.0), 1.0);
        assert_eq!(effective_diffusivity(0.0, 0.3), 1.0);
    }

    #[test]
    fn dispersion_zero_mode() {
        let r = dispersion_lambda(0.0, 1.4, 0.1, 1.0).unwrap();
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn dispersion_small_wavenumber() {
        let r = dispersion_lambda(0.05, 1.4, 0.1, 1.0).unwrap();
        assert!((r.asymptotic - 1.056e-3).abs() < 1e-6);
        assert!(r.rel_error < 0.05);
    }

    #[test]
    fn dispersion_error_is_second_order() {
        let xs = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = xs
            .iter()
            .map(|&x| dispersion_lambda(x, 1.4, 0.1, 1.0).unwrap().rel_error)
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9, "{errs:?}");
        }
    }

    #[test]
    fn dispersion_root_solves_relation() {
        let (xi, mu, eps, l) = (0.7, 1.4, 0.1, 1.0);
        let r = dispersion_lambda(xi, mu, eps, l).unwrap();
        let s = (r.lambda - eps * eps * xi * xi).sqrt();
        let t = s * (l * s).tan();
        let resid = xi * xi - r.lambda - mu * t / (1.0 - t);
        assert!(resid.abs() < 1e-10);
    }

    #[test]
    fn gaussian_oracle_is_exact_at_start() {
        let g = Grid::symmetric(10.0, 101, 3, 1.0).unwrap();
        let u0: Vec<f64> = g.xs().iter().map(|x| (-x * x).exp()).collect();
        assert_eq!(gaussian_oracle_error(&u0, &u0, &g, 0.0, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_oracle_on_exact_gaussian() {
        // A Gaussian of variance 2 a t0 evolves into variance 2 a (t0 + t).
        let g = Grid::symmetric(40.0, 1601, 3, 1.0).unwrap();
        let (a, t0, t) = (0.5, 1.0, 3.0);
        let gauss = |x: f64, s: f64| (-x * x / (4.0 * a * s)).exp() / (4.0 * PI * a * s).sqrt();
        let u0: Vec<f64> = g.xs().iter().map(|&x| gauss(x, t0)).collect();
        let u: Vec<f64> = g.xs().iter().map(|&x| gauss(x, t0 + t)).collect();
        assert!(gaussian_oracle_error(&u0, &u, &g, t, a).unwrap() < 1e-4);
    }

    #[test]
    fn kernel_constant_limits() {
        // For a deep strip the sup sits at s -> 0: 1/sqrt(pi d).
        let c = kernel_constant(5.0, 1.0);
        assert!(c >= 1.0 / PI.sqrt() - 1e-12);
        assert!(c < 0.6);
    }

    #[test]
    fn thresholds_are_positive_and_ordered() {
        let f = IgnitionNonlinearity::default();
        let consts = f.derive_constants().unwrap();
        let p = PhysicalParams::new(100.0, 1.0, 1.4, 5.0, Frame::Rescaled).unwrap();
        let t = mu_thresholds(&consts, &p, 0.3, 2.0).unwrap();
        assert!(t.mu_minus > 0.0);
        assert!(t.mu_minus < t.mu_plus);
        // mu_minus grows linearly with lambda1 at fixed K.
        assert!(
            (t.mu_minus / t.lambda1 - 0.65f64.recip().ln() / (4.0 * t.k_factor / 0.7).ln()).abs()
                < 1e-12
        );
        assert!(mu_thresholds(&consts, &p, 0.3, 6.0).is_err());
    }
}
