//! Field snapshots as plain CSV.

use std::io::{BufRead, Write};

use super::Grid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Writes one cell field: a header line, then one grid row per line.
pub fn write_snapshot<T: Scalar, W: Write>(
    mut out: W,
    name: &str,
    t: T,
    grid: &Grid<T>,
    values: &[T],
) -> Result<()> {
    if values.len() != grid.n_cells() {
        return Err(Error::Shape(format!("snapshot of {} values on {} cells", values.len(), grid.n_cells())));
    }
    writeln!(
        out,
        "# field={name} t={:.16e} nx={} ny={} hx={:.16e} hy={:.16e}",
        t.as_f64(),
        grid.nx(),
        grid.ny(),
        grid.hx().as_f64(),
        grid.hy().as_f64()
    )?;
    for row in values.chunks(grid.nx()) {
        let line: Vec<String> = row.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Parsed snapshot header and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: String,
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub values: Vec<f64>,
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<Snapshot> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Io("empty snapshot".into()))??;
    let body = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Io(format!("bad snapshot header: {header}")))?;
    let mut snap = Snapshot {
        field: String::new(),
        t: 0.0,
        nx: 0,
        ny: 0,
        hx: 0.0,
        hy: 0.0,
        values: Vec::new(),
    };
    let bad = |k: &str| Error::Io(format!("bad snapshot header value for {k}"));
    for kv in body.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
        match k {
            "field" => snap.field = v.to_string(),
            "t" => snap.t = v.parse().map_err(|_| bad(k))?,
            "nx" => snap.nx = v.parse().map_err(|_| bad(k))?,
            "ny" => snap.ny = v.parse().map_err(|_| bad(k))?,
            "hx" => snap.hx = v.parse().map_err(|_| bad(k))?,
            "hy" => snap.hy = v.parse().map_err(|_| bad(k))?,
            _ => return Err(bad(k)),
        }
    }
    for line in lines {
        let line = line?;
        for tok in line.split(',').filter(|s| !s.trim().is_empty()) {
            snap.values
                .push(tok.trim().parse().map_err(|_| Error::Io(format!("bad value {tok}")))?);
        }
    }
    if snap.values.len() != snap.nx * snap.ny {
        return Err(Error::Shape("snapshot value count disagrees with header".into()));
    }
    Ok(snap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = Grid::new_2d(3, 2, 1.0, 0.5).unwrap();
        let vals = vec![0.1, 1.0 / 3.0, -2.5e-17, 7.0, std::f64::consts::PI, 1e300];
        let mut buf = Vec::new();
        write_snapshot(&mut buf, "e", 0.25, &g, &vals).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# field=e t=2.5000000000000000e-1 nx=3 ny=2"));
        let snap = read_snapshot(&buf[..]).unwrap();
        assert_eq!(snap.values, vals);
        assert_eq!((snap.nx, snap.ny), (3, 2));
    }
}
