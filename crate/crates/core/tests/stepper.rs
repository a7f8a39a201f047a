use proptest::prelude::*;
use roadfront::certificates::lockstep_ordering;
use roadfront::diagnostics::{reaction_integral, total_mass};
use roadfront::snapshot::{load_snapshot, save_snapshot};
use roadfront::{Frame, Grid, IgnitionNonlinearity, Model, PhysicalParams, State};

fn model(road: f64, field: f64, mu: f64) -> Model {
    let p = PhysicalParams::new(road, field, mu, 3.0, Frame::Normal).unwrap();
    let g = Grid::symmetric(8.0, 33, 7, 3.0).unwrap();
    Model::standard(p, g, IgnitionNonlinearity::default()).unwrap()
}

/// Smooth data inside the invariant region, parametrised by a few numbers.
fn data(g: &Grid, mu: f64, a: f64, w: f64, s: f64) -> State {
    State::from_fn(
        g,
        |x| a * (-(x - s).powi(2) / w).exp() / mu,
        |x, y| a * (-(x + s).powi(2) / w).exp() * (1.0 + 0.1 * y / 3.0),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordered_data_stay_ordered(
        road in 1.0..50.0f64,
        field in 0.05..2.0f64,
        mu in 0.2..5.0f64,
        a in 0.1..0.9f64,
        lift in 0.0..0.1f64,
        w in 0.5..10.0f64,
        s in -2.0..2.0f64,
    ) {
        let m = model(road, field, mu);
        let lo = data(&m.grid, mu, a, w, s);
        let hi = data(&m.grid, mu, a + lift, w, s);
        let worst = lockstep_ordering(&m, &lo, &hi, 100).unwrap();
        prop_assert!(worst >= -1e-12, "worst {worst}");
    }

    #[test]
    fn mass_changes_by_the_reaction_only(
        road in 1.0..50.0f64,
        field in 0.05..2.0f64,
        mu in 0.2..5.0f64,
        a in 0.1..1.0f64,
        w in 0.5..10.0f64,
    ) {
        let m = model(road, field, mu);
        let dt = m.max_dt();
        let mut s = data(&m.grid, mu, a, w, 0.0);
        for _ in 0..50 {
            let before = total_mass(&s, &m.grid);
            let source = dt * reaction_integral(&m, &s);
            s = m.step(&s, dt).unwrap();
            let after = total_mass(&s, &m.grid);
            prop_assert!((after - before - source).abs() <= 1e-12 * before.max(1.0));
        }
    }

    #[test]
    fn solutions_stay_in_the_unit_box(
        mu in 0.2..5.0f64,
        a in 0.0..1.0f64,
        w in 0.5..10.0f64,
    ) {
        let m = model(20.0, 0.5, mu);
        let dt = m.max_dt();
        let mut s = data(&m.grid, mu, a, w, 1.0);
        for _ in 0..100 {
            s = m.step(&s, dt).unwrap();
        }
        for &u in &s.u {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&(mu * u)));
        }
        for &v in &s.v {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }
}

#[test]
fn snapshot_file_round_trip() {
    let m = model(10.0, 0.5, 1.4);
    let mut s = data(&m.grid, 1.4, 0.7, 2.0, 0.3);
    s.t = 0.1 + 0.2;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.snap");
    let g = m.grid;
    save_snapshot(&path, &s, g.x_min, g.dx, g.dy).unwrap();
    let (h, back) = load_snapshot(&path).unwrap();
    assert_eq!(back, s);
    assert_eq!((h.nx, h.ny, h.x_min, h.dx), (g.nx, g.ny, g.x_min, g.dx));
}
