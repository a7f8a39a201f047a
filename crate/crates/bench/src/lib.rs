//! Fixtures shared by the benchmarks in `benches/`.

use roadfront::{Grid, IgnitionNonlinearity, Model, PhysicalParams, State};

/// Reference configuration: 400 x 50 nodes on (-250, 250) x (-50, 0).
pub fn reference_model() -> Model {
    let p = PhysicalParams::default();
    let g = Grid::symmetric(250.0, 400, 50, p.depth).expect("valid grid");
    Model::standard(p, g, IgnitionNonlinearity::default()).expect("valid model")
}

/// Road and field equal to 1 (road as `mu u`) on `|x| < 3`.
pub fn reference_data(m: &Model) -> State {
    let mu = m.params.exchange_rate;
    State::from_fn(
        &m.grid,
        |x| if x.abs() < 3.0 { 1.0 / mu } else { 0.0 },
        |x, _| if x.abs() < 3.0 { 1.0 } else { 0.0 },
    )
}
