//! Initial shifts that trap front-like data between two perturbed translates
//! of the wave.

use crate::error::{Error, Result};
use crate::params::{Grid, State};
use crate::waves::WaveProfile;

use super::gamma::GammaWeight;
use crate::waves::travelling::sample;

/// Does `lower(x) <= data(x) <= upper(x)` hold at every node, with the
/// translate `(phi, psi)(x + shift) -/+ eps Gamma(x + shift)`?
fn fits(
    state: &State,
    grid: &Grid,
    profile: &WaveProfile,
    eps: f64,
    gamma: &GammaWeight,
    shift: f64,
    upper: bool,
) -> bool {
    let pg = &profile.grid;
    let mu = profile.params.exchange_rate;
    let sign = if upper { 1.0 } else { -1.0 };
    let ok = |data: f64, wave: f64, z: f64| {
        let bound = wave + sign * eps * gamma.value(z);
        if upper {
            data <= bound
        } else {
            data >= bound
        }
    };
    for i in 0..grid.nx {
        let z = grid.x(i) + shift;
        let ph = sample(&profile.phi, pg.x_min, pg.dx, z);
        if !ok(mu * state.u[i], mu * ph, z) {
            return false;
        }
        for j in 0..grid.ny {
            let row = &profile.psi[j * pg.nx..(j + 1) * pg.nx];
            if !ok(state.v_at(i, j), sample(row, pg.x_min, pg.dx, z), z) {
                return false;
            }
        }
    }
    true
}

/// Scans shifts `k dx`, `k = 0, 1, ...`, up to half the data window, and
/// returns the smallest working `(xi0_minus <= 0, xi0_plus >= 0)`.
pub fn trap_shifts(
    state: &State,
    grid: &Grid,
    profile: &WaveProfile,
    epsilon: f64,
    gamma: &GammaWeight,
) -> Result<(f64, f64)> {
    state.check_grid(grid)?;
    if grid.ny != profile.grid.ny {
        return Err(Error::GridMismatch(format!(
            "data has {} rows, profile {}",
            grid.ny, profile.grid.ny
        )));
    }
    let max_cells = grid.nx / 2;
    let find = |upper: bool| {
        let sign = if upper { 1.0 } else { -1.0 };
        (0..=max_cells)
            .map(|k| sign * k as f64 * grid.dx)
            .find(|&s| fits(state, grid, profile, epsilon, gamma, s, upper))
    };
    let plus = find(true).ok_or_else(|| {
        Error::NotTrappable(format!(
            "no shift up to {} cells puts the data below the upper translate",
            max_cells
        ))
    })?;
    let minus = find(false).ok_or_else(|| {
        Error::NotTrappable(format!(
            "no shift up to {} cells puts the data above the lower translate",
            max_cells
        ))
    })?;
    Ok((minus, plus))
}
