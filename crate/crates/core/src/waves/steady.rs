//! Largest positive steady state of the field with the homogeneous Robin
//! condition on top: `-d p'' = f(p)` on `(-L, 0)`, `p'(-L) = 0`,
//! `d p'(0) + p(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::IgnitionNonlinearity;
use crate::roots::bisect;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyProfile {
    /// Nodes from `-L` to `0`.
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    /// `p'` at the nodes.
    pub dp: Vec<f64>,
    /// `1 - p(-L)`.
    pub deficit: f64,
}

impl SteadyProfile {
    /// Linear interpolation in y, clamped to the strip.
    pub fn at(&self, y: f64) -> f64 {
        let n = self.y.len();
        let (y0, y1) = (self.y[0], self.y[n - 1]);
        let s = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0) * (n - 1) as f64;
        let k = (s.floor() as usize).min(n - 2);
        let w = s - k as f64;
        (1.0 - w) * self.p[k] + w * self.p[k + 1]
    }

    /// `d p'(0) + p(0)`, zero for an exact solution.
    pub fn robin_residual(&self, diffusivity: f64) -> f64 {
        let n = self.p.len();
        diffusivity * self.dp[n - 1] + self.p[n - 1]
    }
}

/// Integrates `d w'' = f(1 - w)` (`w = 1 - p`) from `y = -L` with `w = deficit`,
/// `w' = 0` by classical RK4. Returns `(w, w')` at the `ny` grid nodes.
fn shoot(
    f: &IgnitionNonlinearity,
    diffusivity: f64,
    depth: f64,
    ny: usize,
    substeps: usize,
    deficit: f64,
) -> (Vec<f64>, Vec<f64>) {
    let dy = depth / (ny - 1) as f64;
    let h = dy / substeps as f64;
    let rhs = |w: f64| f.eval_deficit(w) / diffusivity;
    let (mut w, mut q) = (deficit, 0.0);
    let mut ws = Vec::with_capacity(ny);
    let mut qs = Vec::with_capacity(ny);
    ws.push(w);
    qs.push(q);
    for _ in 1..ny {
        for _ in 0..substeps {
            let (k1w, k1q) = (q, rhs(w));
            let (k2w, k2q) = (q + 0.5 * h * k1q, rhs(w + 0.5 * h * k1w));
            let (k3w, k3q) = (q + 0.5 * h * k2q, rhs(w + 0.5 * h * k2w));
            let (k4w, k4q) = (q + h * k3q, rhs(w + h * k3w));
            w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        }
        ws.push(w);
        qs.push(q);
    }
    (ws, qs)
}

/// Shooting on the bottom value, bisected in `log(1 - p(-L))`.
///
/// Small deficits give a nearly flat `p = 1` whose Robin residual is close to
/// 1; the first sign change met while increasing the deficit geometrically is
/// the largest solution.
pub fn steady_profile(
    f: &IgnitionNonlinearity,
    diffusivity: f64,
    depth: f64,
    ny: usize,
) -> Result<SteadyProfile> {
    if ny < 3 {
        return Err(crate::error::invalid("ny", format!("{ny} < 3")));
    }
    let lip = f.lipschitz().max(1e-12);
    let dy = depth / (ny - 1) as f64;
    // Resolve the growth scale sqrt(d / lip) with ~20 RK4 steps.
    let h_max = 0.05 * (diffusivity / lip).sqrt();
    let substeps = (dy / h_max).ceil().max(1.0) as usize;

    let residual = |log_def: f64| {
        let (w, q) = shoot(f, diffusivity, depth, ny, substeps, log_def.exp());
        let n = w.len();
        1.0 - w[n - 1] - diffusivity * q[n - 1]
    };

    let upper = (1.0 - f.threshold).ln();
    let mut prev = -690.0; // exp(-690) ~ 1e-300
    let mut r_prev = residual(prev);
    if !(r_prev > 0.0) {
        return Err(Error::NoSolution(format!(
            "robin residual {r_prev} is not positive for a flat profile"
        )));
    }
    let mut bracket = None;
    let n_scan = 400;
    for k in 1..=n_scan {
        let cur = -690.0 + (upper + 690.0) * k as f64 / n_scan as f64;
        let r = residual(cur);
        if r < 0.0 {
            bracket = Some((prev, cur));
            break;
        }
        prev = cur;
        r_prev = r;
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        Error::NoSolution(format!(
            "no sign change of the robin residual for deficits up to 1 - threshold (last {r_prev}); strip too shallow"
        ))
    })?;
    let log_def = bisect(residual, lo, hi, 1e-13)?;
    let deficit = log_def.exp();
    let (w, q) = shoot(f, diffusivity, depth, ny, substeps, deficit);
    Ok(SteadyProfile {
        y: (0..ny).map(|j| -depth + j as f64 * dy).collect(),
        p: w.iter().map(|w| 1.0 - w).collect(),
        dp: q.iter().map(|q| -q).collect(),
        deficit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inert_reaction_has_no_positive_state() {
        let e = steady_profile(&IgnitionNonlinearity::inert(), 0.1, 50.0, 201).unwrap_err();
        assert!(matches!(e, Error::NoSolution(_)));
    }

    #[test]
    fn deep_strip_is_nearly_saturated() {
        let f = IgnitionNonlinearity::default();
        let p = steady_profile(&f, 0.1, 50.0, 201).unwrap();
        assert!(p.deficit < 0.05);
        assert!(p.robin_residual(0.1).abs() < 1e-6);
    }

    #[test]
    fn deficit_shrinks_with_depth() {
        let f = IgnitionNonlinearity::default();
        let a = steady_profile(&f, 0.1, 5.0, 101).unwrap();
        let b = steady_profile(&f, 0.1, 10.0, 201).unwrap();
        assert!(b.deficit < a.deficit);
    }

    #[test]
    fn shape_properties() {
        let f = IgnitionNonlinearity::default();
        let d = 0.1;
        let s = steady_profile(&f, d, 5.0, 401).unwrap();
        let h = s.y[1] - s.y[0];
        assert!(s.p.iter().all(|&p| p > 0.0));
        assert!(s.dp.iter().all(|&q| q <= 1e-12));
        assert_eq!(s.dp[0], 0.0);
        for j in 1..s.p.len() - 1 {
            let second = (s.p[j - 1] - 2.0 * s.p[j] + s.p[j + 1]) / (h * h);
            assert!(second <= 1e-9, "not concave at {j}");
            // -d p'' = f(p), up to the O(h^2) difference error and the kink of f at theta.
            let res = -d * second - f.eval(s.p[j]);
            let near_kink = (s.p[j] - f.threshold).abs() < 0.05;
            if !near_kink {
                assert!(res.abs() < 1e-3, "residual {res} at {j}");
            }
        }
    }
}
