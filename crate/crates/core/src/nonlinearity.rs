//! Ignition-type reaction term `amplitude * (v - threshold)^exponent * (1 - v)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::roots::{bisect, golden_max};

const SAMPLES: usize = 100_000;

/// Ignition nonlinearity: zero up to the threshold, positive on `(threshold, 1)`,
/// vanishing at 1 with negative slope.
///
/// Outside `[0, 1]` it is extended by 0 below the threshold and by its tangent
/// line at 1 above, which keeps the discrete scheme inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IgnitionNonlinearity {
    pub threshold: f64,
    pub amplitude: f64,
    pub exponent: f64,
}

impl Default for IgnitionNonlinearity {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            amplitude: 10.0,
            exponent: 2.0,
        }
    }
}

impl IgnitionNonlinearity {
    pub fn new(threshold: f64, amplitude: f64, exponent: f64) -> Result<Self> {
        let f = Self {
            threshold,
            amplitude,
            exponent,
        };
        f.validate()?;
        Ok(f)
    }

    /// The zero reaction term, for linear runs.
    pub fn inert() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid(
                "threshold",
                format!("{} not in (0, 1)", self.threshold),
            ));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid(
                "amplitude",
                format!("{} must be >= 0", self.amplitude),
            ));
        }
        if !(self.exponent >= 1.0 && self.exponent.is_finite()) {
            return Err(invalid(
                "exponent",
                format!("{} must be >= 1", self.exponent),
            ));
        }
        Ok(())
    }

    pub fn is_inert(&self) -> bool {
        self.amplitude == 0.0
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if v <= self.threshold {
            0.0
        } else if v <= 1.0 {
            self.amplitude * (v - self.threshold).powf(self.exponent) * (1.0 - v)
        } else {
            self.slope_at_one() * (v - 1.0)
        }
    }

    /// `f(1 - w)`, evaluated without forming `1 - w` so that tiny `w` keep
    /// their relative precision.
    #[inline]
    pub fn eval_deficit(&self, w: f64) -> f64 {
        let gap = 1.0 - self.threshold;
        if w < 0.0 {
            self.amplitude * gap.powf(self.exponent) * w
        } else if w < gap {
            self.amplitude * (gap - w).powf(self.exponent) * w
        } else {
            0.0
        }
    }

    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        if v <= self.threshold {
            0.0
        } else if v <= 1.0 {
            let w = v - self.threshold;
            let p = self.exponent;
            self.amplitude * (p * w.powf(p - 1.0) * (1.0 - v) - w.powf(p))
        } else {
            self.slope_at_one()
        }
    }

    /// `f'(1)`, negative for an ignition term with positive amplitude.
    pub fn slope_at_one(&self) -> f64 {
        -self.amplitude * (1.0 - self.threshold).powf(self.exponent)
    }

    /// `max |f'|` over `[0, 1]`: dense sampling, then golden-section refinement
    /// around the best sample. Zero for the inert term.
    pub fn lipschitz(&self) -> f64 {
        if self.is_inert() {
            return 0.0;
        }
        let h = 1.0 / SAMPLES as f64;
        let abs_df = |s: f64| self.derivative(s).abs();
        let mut best = (0usize, abs_df(0.0));
        for k in 1..=SAMPLES {
            let g = abs_df(k as f64 * h);
            if g > best.1 {
                best = (k, g);
            }
        }
        let lo = best.0.saturating_sub(1) as f64 * h;
        let hi = (best.0 + 1).min(SAMPLES) as f64 * h;
        let (_, refined) = golden_max(abs_df, lo, hi, 1e-12);
        best.1.max(refined)
    }

    /// Lipschitz constant, decay margin and the level above which `f` is
    /// uniformly decreasing.
    pub fn derive_constants(&self) -> Result<DerivedConstants> {
        let slope = self.slope_at_one();
        if !(slope < 0.0) {
            return Err(Error::NotIgnition { slope });
        }
        let beta = -slope / 2.0;
        let lip_f = self.lipschitz();
        let h = 1.0 / SAMPLES as f64;

        // Walk down from 1 to the first sample where -f' drops below beta,
        // then bisect inside that cell.
        let g = |s: f64| -self.derivative(s) - beta;
        let mut k = SAMPLES;
        while k > 0 && g((k - 1) as f64 * h) >= 0.0 {
            k -= 1;
        }
        let decreasing_above = if k == 0 {
            0.0
        } else {
            bisect(g, (k - 1) as f64 * h, k as f64 * h, 1e-15)?
        };

        Ok(DerivedConstants {
            lip_f,
            beta,
            decreasing_above,
        })
    }
}

/// Constants of the nonlinearity used by the certificate and threshold formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `max |f'|` on `[0, 1]`.
    pub lip_f: f64,
    /// `-f'(1) / 2`.
    pub beta: f64,
    /// Smallest `s` with `-f' >= beta` on all of `[s, 1]`.
    pub decreasing_above: f64,
}
