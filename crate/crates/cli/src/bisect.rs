//! Threshold search on a classified outcome.

use roadfront::diagnostics::Outcome;
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub value: f64,
    pub horizon: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub lo_outcome: Outcome,
    pub hi_outcome: Outcome,
    /// Every probe in the order it ran, including the retries at longer horizons.
    pub probes: Vec<Probe>,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// Bisect geometrically until `hi / lo <= 1 + r`.
    Relative(f64),
}

impl Tolerance {
    fn done(self, lo: f64, hi: f64) -> bool {
        match self {
            Self::Absolute(t) => hi - lo <= t,
            Self::Relative(r) => hi <= lo * (1.0 + r),
        }
    }

    fn split(self, lo: f64, hi: f64) -> f64 {
        match self {
            Self::Absolute(_) => 0.5 * (lo + hi),
            Self::Relative(_) => (lo * hi).sqrt(),
        }
    }
}

/// Bisection on `probe(value, horizon)`.
///
/// An undecided probe is repeated with the horizon doubled, up to
/// `max_horizon`; the longest horizon reached is kept for later probes.
/// Fails with [`HarnessError::SameOutcome`] when the ends agree and with
/// [`HarnessError::HorizonExceeded`] (carrying the bracket so far) when a
/// probe stays undecided at the cap.
pub fn bisect_threshold<F>(
    lo: f64,
    hi: f64,
    tol: Tolerance,
    horizon: f64,
    max_horizon: f64,
    mut probe: F,
) -> Result<Bracket>
where
    F: FnMut(f64, f64) -> Result<Outcome>,
{
    let mut horizon = horizon;
    let mut probes = Vec::new();
    let mut classify =
        |value: f64, horizon: &mut f64, probes: &mut Vec<Probe>| -> Result<Outcome> {
            loop {
                let outcome = probe(value, *horizon)?;
                probes.push(Probe {
                    value,
                    horizon: *horizon,
                    outcome,
                });
                if outcome != Outcome::Undecided {
                    return Ok(outcome);
                }
                if *horizon >= max_horizon {
                    return Ok(outcome);
                }
                *horizon = (2.0 * *horizon).min(max_horizon);
            }
        };

    let undecided = |value: f64, horizon: f64, bracket: Bracket, probes: Vec<Probe>| {
        HarnessError::HorizonExceeded {
            value,
            horizon,
            partial: Box::new(Bracket { probes, ..bracket }),
        }
    };
    let mut bracket = Bracket {
        lo,
        hi,
        lo_outcome: Outcome::Undecided,
        hi_outcome: Outcome::Undecided,
        probes: Vec::new(),
    };
    bracket.lo_outcome = classify(lo, &mut horizon, &mut probes)?;
    if bracket.lo_outcome == Outcome::Undecided {
        return Err(undecided(lo, horizon, bracket, probes));
    }
    bracket.hi_outcome = if hi == lo {
        bracket.lo_outcome
    } else {
        classify(hi, &mut horizon, &mut probes)?
    };
    if bracket.hi_outcome == Outcome::Undecided {
        return Err(undecided(hi, horizon, bracket, probes));
    }
    let (lo_outcome, hi_outcome) = (bracket.lo_outcome, bracket.hi_outcome);
    if lo_outcome == hi_outcome {
        return Err(HarnessError::SameOutcome {
            lo,
            hi,
            outcome: format!("{lo_outcome:?}"),
        });
    }

    while !tol.done(bracket.lo, bracket.hi) {
        let mid = tol.split(bracket.lo, bracket.hi);
        let outcome = classify(mid, &mut horizon, &mut probes)?;
        if outcome == Outcome::Undecided {
            return Err(undecided(mid, horizon, bracket, probes));
        }
        if outcome == bracket.lo_outcome {
            bracket.lo = mid;
        } else {
            bracket.hi = mid;
        }
    }
    bracket.probes = probes;
    Ok(bracket)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_at(threshold: f64) -> impl FnMut(f64, f64) -> Result<Outcome> {
        move |v, _| {
            Ok(if v < threshold {
                Outcome::Quenching
            } else {
                Outcome::Invasion
            })
        }
    }

    #[test]
    fn brackets_a_step() {
        let b =
            bisect_threshold(0.0, 4.0, Tolerance::Absolute(0.01), 1.0, 1.0, step_at(2.7)).unwrap();
        assert!(b.lo < 2.7 && 2.7 <= b.hi && b.width() <= 0.01);
        assert_eq!(b.lo_outcome, Outcome::Quenching);
        // 2 endpoints + ceil(log2(400)) splits
        assert_eq!(b.probes.len(), 2 + 9);
    }

    #[test]
    fn geometric_split() {
        let b = bisect_threshold(
            1e-3,
            1e3,
            Tolerance::Relative(0.05),
            1.0,
            1.0,
            step_at(0.55),
        )
        .unwrap();
        assert!(b.lo < 0.55 && 0.55 <= b.hi && b.hi / b.lo <= 1.05);
    }

    #[test]
    fn reversed_orientation() {
        let b = bisect_threshold(0.0, 1.0, Tolerance::Absolute(1e-3), 1.0, 1.0, |v, _| {
            Ok(if v < 0.3 {
                Outcome::Invasion
            } else {
                Outcome::Quenching
            })
        })
        .unwrap();
        assert_eq!(b.lo_outcome, Outcome::Invasion);
        assert!(b.lo < 0.3 && 0.3 <= b.hi);
    }

    #[test]
    fn equal_ends_are_rejected() {
        let e = bisect_threshold(2.0, 2.0, Tolerance::Absolute(0.1), 1.0, 1.0, step_at(1.0))
            .unwrap_err();
        assert!(matches!(e, HarnessError::SameOutcome { .. }));
    }

    #[test]
    fn undecided_doubles_then_gives_up() {
        // Decided only once the horizon reaches 4.
        let probe = |v: f64, h: f64| {
            Ok(if h < 4.0 {
                Outcome::Undecided
            } else if v < 0.5 {
                Outcome::Quenching
            } else {
                Outcome::Invasion
            })
        };
        let b = bisect_threshold(0.0, 1.0, Tolerance::Absolute(0.1), 1.0, 8.0, probe).unwrap();
        assert_eq!(
            b.probes[..3].iter().map(|p| p.horizon).collect::<Vec<_>>(),
            [1.0, 2.0, 4.0]
        );
        assert!(b.probes[3..].iter().all(|p| p.horizon == 4.0));

        let e = bisect_threshold(0.0, 1.0, Tolerance::Absolute(0.1), 1.0, 2.0, probe).unwrap_err();
        match e {
            HarnessError::HorizonExceeded {
                horizon, partial, ..
            } => {
                assert_eq!(horizon, 2.0);
                assert_eq!(partial.probes.len(), 2);
            }
            other => panic!("{other}"),
        }
    }
}
