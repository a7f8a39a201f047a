//! Model constants, the discretisation grid and the discrete field state.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which form of the system is integrated.
///
/// `Normal` keeps the physical road diffusivity; `Rescaled` stretches x by
/// `sqrt(road_diffusivity)` so the road diffuses at unit rate and the field's
/// x-diffusivity becomes `field_diffusivity / road_diffusivity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Normal,
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Diffusivity on the road (`D`).
    #[serde(rename = "D")]
    pub road_diffusivity: f64,
    /// Diffusivity in the field (`d`).
    #[serde(rename = "d")]
    pub field_diffusivity: f64,
    /// Rate at which the road releases into the field (`mu`).
    #[serde(rename = "mu")]
    pub exchange_rate: f64,
    /// Depth of the strip (`L`).
    #[serde(rename = "L")]
    pub depth: f64,
    #[serde(default)]
    pub frame: Frame,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            road_diffusivity: 100.0,
            field_diffusivity: 0.1,
            exchange_rate: 1.4,
            depth: 50.0,
            frame: Frame::Normal,
        }
    }
}

impl PhysicalParams {
    pub fn new(road: f64, field: f64, exchange: f64, depth: f64, frame: Frame) -> Result<Self> {
        let p = Self {
            road_diffusivity: road,
            field_diffusivity: field,
            exchange_rate: exchange,
            depth,
            frame,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("D", self.road_diffusivity),
            ("d", self.field_diffusivity),
            ("mu", self.exchange_rate),
            ("L", self.depth),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Diffusion coefficient of the road equation in the active frame.
    pub fn road_coeff(&self) -> f64 {
        match self.frame {
            Frame::Normal => self.road_diffusivity,
            Frame::Rescaled => 1.0,
        }
    }

    /// x-diffusion coefficient of the field equation in the active frame.
    pub fn field_x_coeff(&self) -> f64 {
        match self.frame {
            Frame::Normal => self.field_diffusivity,
            Frame::Rescaled => self.field_diffusivity / self.road_diffusivity,
        }
    }

    /// y-diffusion coefficient of the field equation (frame independent).
    pub fn field_y_coeff(&self) -> f64 {
        self.field_diffusivity
    }
}

/// Tensor grid: `nx` nodes on the road `[x_min, x_max]`, shared by the strip,
/// and `ny` nodes across the strip from `y = -depth` (row 0) to `y = 0` (row `ny-1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub depth: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    /// Builds the grid. `x_max` is re-derived as `x_min + (nx-1) dx` so the
    /// extent is reproduced exactly by the stored spacing.
    pub fn new(x_min: f64, x_max: f64, nx: usize, ny: usize, depth: f64) -> Result<Self> {
        if nx < 3 {
            return Err(invalid("nx", format!("{nx} < 3")));
        }
        if ny < 3 {
            return Err(invalid("ny", format!("{ny} < 3")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("x_max", format!("[{x_min}, {x_max}] is empty")));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(invalid("L", format!("{depth} must be positive")));
        }
        let dx = (x_max - x_min) / (nx - 1) as f64;
        let dy = depth / (ny - 1) as f64;
        Ok(Self {
            x_min,
            x_max: x_min + (nx - 1) as f64 * dx,
            nx,
            ny,
            depth,
            dx,
            dy,
        })
    }

    /// Symmetric road `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, nx: usize, ny: usize, depth: f64) -> Result<Self> {
        Self::new(-half_width, half_width, nx, ny, depth)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        -self.depth + j as f64 * self.dy
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Nearest node index to `x`, clamped to the grid.
    pub fn index_of(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx).round();
        k.clamp(0.0, (self.nx - 1) as f64) as usize
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.x_min == other.x_min
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} (dx {}, dy {}) vs {}x{} (dx {}, dy {})",
                self.nx, self.ny, self.dx, self.dy, other.nx, other.ny, other.dx, other.dy
            )))
        }
    }

    /// Trapezoid weight of node `i` along x.
    #[inline]
    pub fn wx(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nx {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid weight of row `j` along y.
    #[inline]
    pub fn wy(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.ny {
            0.5 * self.dy
        } else {
            self.dy
        }
    }
}

/// Road density `u` (length `nx`) and field density `v` (row-major, `v[j*nx + i]`
/// with row 0 at the bottom of the strip) at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            t: 0.0,
            nx: grid.nx,
            ny: grid.ny,
            u: vec![0.0; grid.nx],
            v: vec![0.0; grid.nx * grid.ny],
        }
    }

    /// Constant state `(u, v)`.
    pub fn uniform(grid: &Grid, u: f64, v: f64) -> Self {
        Self {
            t: 0.0,
            nx: grid.nx,
            ny: grid.ny,
            u: vec![u; grid.nx],
            v: vec![v; grid.nx * grid.ny],
        }
    }

    /// State sampled from closures `u(x)` and `v(x, y)`.
    pub fn from_fn(grid: &Grid, u: impl Fn(f64) -> f64, v: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(grid);
        for i in 0..grid.nx {
            s.u[i] = u(grid.x(i));
        }
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                s.v[j * grid.nx + i] = v(grid.x(i), y);
            }
        }
        s
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.nx != grid.nx
            || self.ny != grid.ny
            || self.u.len() != grid.nx
            || self.v.len() != grid.nx * grid.ny
        {
            return Err(Error::GridMismatch(format!(
                "state {}x{} on grid {}x{}",
                self.nx, self.ny, grid.nx, grid.ny
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.nx + i]
    }

    /// Row `j` of the field (constant y).
    pub fn row(&self, j: usize) -> &[f64] {
        &self.v[j * self.nx..(j + 1) * self.nx]
    }

    /// Field trace on the road, `v(., 0)`.
    pub fn top(&self) -> &[f64] {
        self.row(self.ny - 1)
    }

    /// Field values at the bottom of the strip.
    pub fn bottom(&self) -> &[f64] {
        self.row(0)
    }

    /// Column `i` of the field, bottom to top.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.ny).map(|j| self.v_at(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    /// Shifts both fields by `cells` nodes to the right (negative: left).
    /// Vacated nodes copy the old edge value.
    pub fn shift_cells(&mut self, cells: isize) {
        shift_row(&mut self.u, cells);
        let nx = self.nx;
        for row in self.v.chunks_mut(nx) {
            shift_row(row, cells);
        }
    }
}

fn shift_row(row: &mut [f64], cells: isize) {
    let n = row.len();
    if cells == 0 || n == 0 {
        return;
    }
    let k = cells.unsigned_abs().min(n);
    if cells > 0 {
        let edge = row[0];
        row.copy_within(0..n - k, k);
        row[..k].fill(edge);
    } else {
        let edge = row[n - 1];
        row.copy_within(k..n, 0);
        row[n - k..].fill(edge);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rescaled_coefficients() {
        let p = PhysicalParams::default().with_frame(Frame::Rescaled);
        assert_eq!(p.road_coeff(), 1.0);
        assert!((p.field_x_coeff() - 0.001).abs() < 1e-18);
        assert_eq!(p.field_y_coeff(), 0.1);
    }

    #[test]
    fn rejects_nonpositive_constants() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, Frame::Normal).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -1.0, 1.0, Frame::Normal).is_err());
        assert!(Grid::new(0.0, 1.0, 2, 5, 1.0).is_err());
    }

    #[test]
    fn shift_copies_edges() {
        let mut r = vec![1.0, 2.0, 3.0, 4.0];
        shift_row(&mut r, 1);
        assert_eq!(r, vec![1.0, 1.0, 2.0, 3.0]);
        shift_row(&mut r, -2);
        assert_eq!(r, vec![2.0, 3.0, 3.0, 3.0]);
    }

    proptest! {
        #[test]
        fn extent_reproduced_exactly(x_min in -1e3f64..1e3, w in 1e-3f64..1e4, nx in 3usize..5000) {
            let g = Grid::new(x_min, x_min + w, nx, 3, 1.0).unwrap();
            prop_assert_eq!(g.x_min + (g.nx - 1) as f64 * g.dx, g.x_max);
            prop_assert_eq!(g.x(g.nx - 1), g.x_max);
            prop_assert!((g.x_max - (x_min + w)).abs() <= 1e-12 * (x_min.abs() + w));
        }
    }
}
