//! Simulation and verification toolkit for reaction-diffusion fronts driven
//! by a line of fast diffusion (a "road") bordering a strip (a "field").
//!
//! The road density `u(t, x)` and field density `v(t, x, y)`, `-L < y < 0`, solve
//!
//! ```text
//! u_t - D u_xx = v(x, 0) - mu u
//! v_t - d Δv   = f(v)
//! d v_y(x, 0) + v(x, 0) = mu u,   v_y(x, -L) = 0
//! ```
//!
//! with an ignition-type `f`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod certificates;
pub mod diagnostics;
pub mod error;
pub mod nonlinearity;
pub mod params;
pub mod roots;
pub mod snapshot;
pub mod spectra;
pub mod stepper;
pub mod waves;

pub use error::{Error, Result};
pub use nonlinearity::{DerivedConstants, IgnitionNonlinearity};
pub use params::{Frame, Grid, PhysicalParams, State};
pub use stepper::{
    BottomBoundary, BoundarySpec, CflBounds, ColumnModel, ColumnState, Control, FnObserver, Model,
    Observer, RunOptions, RunRecord, SchemeSpec, Series, TopBoundary,
};
