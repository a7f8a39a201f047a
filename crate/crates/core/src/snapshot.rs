//! Plain-text snapshot files.
//!
//! ```text
//! #roadfront-snapshot v1 t=<t> nx=<nx> ny=<ny> x_min=<x_min> dx=<dx> dy=<dy>
//! <v row 0 (y = -L): nx comma-separated values>
//! ...
//! <v row ny-1 (y = 0)>
//! <u: nx comma-separated values>
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`, so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::State;

pub const MAGIC: &str = "#roadfront-snapshot";
pub const VERSION: u32 = 1;

/// Geometry recorded in the header line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub dx: f64,
    pub dy: f64,
}

pub fn write_snapshot<W: Write>(
    mut w: W,
    state: &State,
    x_min: f64,
    dx: f64,
    dy: f64,
) -> Result<()> {
    let mut line = String::new();
    writeln!(
        w,
        "{MAGIC} v{VERSION} t={:?} nx={} ny={} x_min={:?} dx={:?} dy={:?}",
        state.t, state.nx, state.ny, x_min, dx, dy
    )?;
    let mut emit = |vals: &[f64], w: &mut W| -> Result<()> {
        line.clear();
        for (k, x) in vals.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(line, "{x:?}");
        }
        writeln!(w, "{line}")?;
        Ok(())
    };
    for j in 0..state.ny {
        emit(state.row(j), &mut w)?;
    }
    emit(&state.u, &mut w)?;
    Ok(())
}

pub fn save_snapshot(path: &Path, state: &State, x_min: f64, dx: f64, dy: f64) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_snapshot(&mut w, state, x_min, dx, dy)?;
    w.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<SnapshotHeader> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format(format!("not a snapshot header: {line:?}")));
    }
    let version = parts.next().unwrap_or("");
    if version != format!("v{VERSION}") {
        return Err(Error::Format(format!(
            "unsupported snapshot version {version:?}"
        )));
    }
    let mut h = SnapshotHeader {
        t: f64::NAN,
        nx: 0,
        ny: 0,
        x_min: f64::NAN,
        dx: f64::NAN,
        dy: f64::NAN,
    };
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {kv:?}")))?;
        let num = || {
            v.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number in {kv:?}")))
        };
        let int = || {
            v.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad integer in {kv:?}")))
        };
        match k {
            "t" => h.t = num()?,
            "nx" => h.nx = int()?,
            "ny" => h.ny = int()?,
            "x_min" => h.x_min = num()?,
            "dx" => h.dx = num()?,
            "dy" => h.dy = num()?,
            _ => return Err(Error::Format(format!("unknown header field {k:?}"))),
        }
    }
    if h.nx == 0 || h.ny == 0 || h.t.is_nan() || h.dx.is_nan() || h.dy.is_nan() || h.x_min.is_nan()
    {
        return Err(Error::Format("incomplete snapshot header".into()));
    }
    Ok(h)
}

pub fn read_snapshot<R: Read>(r: R) -> Result<(SnapshotHeader, State)> {
    let mut lines = BufReader::new(r).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty snapshot".into()))??;
    let h = parse_header(&first)?;
    let mut row = |what: &str| -> Result<Vec<f64>> {
        let l = lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what}")))??;
        let vals = l
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad value {s:?} in {what}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != h.nx {
            return Err(Error::Format(format!(
                "{what} has {} values, expected {}",
                vals.len(),
                h.nx
            )));
        }
        Ok(vals)
    };
    let mut v = Vec::with_capacity(h.nx * h.ny);
    for j in 0..h.ny {
        v.extend(row(&format!("field row {j}"))?);
    }
    let u = row("road row")?;
    Ok((
        h,
        State {
            t: h.t,
            nx: h.nx,
            ny: h.ny,
            u,
            v,
        },
    ))
}

pub fn load_snapshot(path: &Path) -> Result<(SnapshotHeader, State)> {
    read_snapshot(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Grid;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_version() {
        let text = "#roadfront-snapshot v9 t=0 nx=3 ny=3 x_min=0 dx=1 dy=1\n";
        assert!(matches!(
            read_snapshot(text.as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn rejects_short_rows() {
        let text = "#roadfront-snapshot v1 t=0 nx=3 ny=1 x_min=0 dx=1 dy=1\n1,2\n1,2,3\n";
        assert!(read_snapshot(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_lossless(seed in proptest::collection::vec(-1e3f64..1e3, 12), t in 0.0f64..1e4) {
            let g = Grid::new(-1.5, 2.0, 4, 3, 0.7).unwrap();
            let mut s = State::zeros(&g);
            s.t = t;
            s.u.copy_from_slice(&seed[..4]);
            for (k, x) in s.v.iter_mut().enumerate() {
                *x = seed[k % 12] * 1e-7 + k as f64;
            }
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &s, g.x_min, g.dx, g.dy).unwrap();
            let (h, back) = read_snapshot(buf.as_slice()).unwrap();
            prop_assert_eq!(back, s);
            prop_assert_eq!(h.dx, g.dx);
            prop_assert_eq!(h.x_min, g.x_min);
        }
    }
}
