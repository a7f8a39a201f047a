//! The weight `Gamma`: exponential on the left, 1 on the right. In between,
//! `log Gamma` has slope `alpha (1 - S(r))` with `S` the quintic smoothstep
//! over a unit-two interval, so `Gamma` is C^2 and nondecreasing by
//! construction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMargin {
    /// Plateau for `x > L0`, tail `exp(alpha (x + L0))` for `x < -L0 - 1`.
    Standard,
    /// Plateau for `x > L0 - 1`, tail `exp(alpha (x + L0 - 1))` for `x < -L0`:
    /// the standard weight for offset `L0 - 1`.
    Widened,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaWeight {
    pub alpha: f64,
    pub plateau_offset: f64,
    pub margin: GammaMargin,
    /// `sup |G| + sup |G'| + sup |G''|`.
    pub c2_norm: f64,
    /// Offset actually used in the exponential tail.
    tail_offset: f64,
}

const RAMP: f64 = 2.0;

fn smoothstep(r: f64) -> (f64, f64) {
    let s = r * r * r * (10.0 - 15.0 * r + 6.0 * r * r);
    let ds = 30.0 * r * r * (1.0 - r) * (1.0 - r);
    (s, ds)
}

impl GammaWeight {
    pub fn new(alpha: f64, plateau_offset: f64, margin: GammaMargin) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("{alpha} must be positive")));
        }
        let tail_offset = match margin {
            GammaMargin::Standard => plateau_offset,
            GammaMargin::Widened => plateau_offset - 1.0,
        };
        if !(tail_offset >= 0.5) {
            return Err(invalid(
                "plateau_offset",
                format!("{plateau_offset} leaves no room for the transition"),
            ));
        }
        let mut g = Self {
            alpha,
            plateau_offset,
            margin,
            c2_norm: 0.0,
            tail_offset,
        };
        let (a, b) = g.transition();
        let n = 4000;
        let (mut s1, mut s2): (f64, f64) = (0.0, 0.0);
        for k in 0..=n {
            let (_, d1, d2) = g.eval(a + (b - a) * k as f64 / n as f64);
            s1 = s1.max(d1.abs());
            s2 = s2.max(d2.abs());
        }
        g.c2_norm = 1.0 + s1 + s2;
        Ok(g)
    }

    /// Interval on which neither the tail formula nor the plateau applies.
    pub fn transition(&self) -> (f64, f64) {
        let a = -self.tail_offset - 1.0;
        (a, a + RAMP)
    }

    /// Value, first and second derivative.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (a, b) = self.transition();
        let al = self.alpha;
        if x >= b {
            (1.0, 0.0, 0.0)
        } else if x <= a {
            let e = (al * (x + self.tail_offset)).exp();
            (e, al * e, al * al * e)
        } else {
            let r = (x - a) / RAMP;
            let ds = smoothstep(r).1;
            // Integral of S from 0 to r.
            let int = r * r * r * r * (2.5 - 3.0 * r + r * r);
            let log = -al + al * RAMP * (r - int);
            // 1 - S(r) = S(1 - r), which cannot round below zero.
            let l1 = al * smoothstep(1.0 - r).0;
            let l2 = -al * ds / RAMP;
            let e = log.exp();
            (e, l1 * e, (l2 + l1 * l1) * e)
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateau_and_tail_match_definition() {
        let g = GammaWeight::new(0.05, 10.0, GammaMargin::Standard).unwrap();
        assert_eq!(g.value(10.0), 1.0);
        assert_eq!(g.value(30.0), 1.0);
        for x in [-11.0, -15.0, -40.0] {
            assert!((g.value(x) - (0.05 * (x + 10.0)).exp()).abs() < 1e-15);
        }
        let w = GammaWeight::new(0.05, 10.0, GammaMargin::Widened).unwrap();
        assert_eq!(w.value(9.0), 1.0);
        for x in [-10.0, -25.0] {
            assert!((w.value(x) - (0.05 * (x + 9.0)).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GammaWeight::new(0.0, 5.0, GammaMargin::Standard).is_err());
        assert!(GammaWeight::new(0.1, 1.2, GammaMargin::Widened).is_err());
    }

    #[test]
    fn c2_norm_matches_finite_differences() {
        let g = GammaWeight::new(0.3, 4.0, GammaMargin::Standard).unwrap();
        let h = 1e-4;
        let mut s2: f64 = 0.0;
        for k in 0..2000 {
            let x = -8.0 + 6.0 * k as f64 / 2000.0;
            s2 = s2.max(((g.value(x - h) - 2.0 * g.value(x) + g.value(x + h)) / (h * h)).abs());
        }
        let (_, _, d2) = g.eval(-5.0 - 1e-12);
        assert!(s2 >= d2 - 1e-6);
        assert!(g.c2_norm >= 1.0 + s2 - 1e-4);
    }

    proptest! {
        #[test]
        fn smooth_and_nondecreasing(alpha in 0.005f64..0.5, l0 in 3.0f64..20.0, widened: bool) {
            let margin = if widened { GammaMargin::Widened } else { GammaMargin::Standard };
            let g = GammaWeight::new(alpha, l0, margin).unwrap();
            let (a, b) = g.transition();
            for &x in &[a, b] {
                let h = 1e-9;
                let (l, r) = (g.eval(x - h), g.eval(x + h));
                prop_assert!((l.0 - r.0).abs() < 1e-8);
                prop_assert!((l.1 - r.1).abs() < 1e-8);
                prop_assert!((l.2 - r.2).abs() < 1e-7);
            }
            let mut prev = 0.0;
            for k in 0..=400 {
                let x = a - 3.0 + (b - a + 6.0) * k as f64 / 400.0;
                let (v, d1, _) = g.eval(x);
                prop_assert!(d1 >= 0.0);
                prop_assert!(v >= prev && v <= 1.0);
                prev = v;
            }
        }
    }
}
