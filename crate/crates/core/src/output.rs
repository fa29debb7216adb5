//! File output for runs and studies: the diagnostics CSV, field snapshots
//! and tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::constitutive::theta_of_e;
use crate::diagnostics::{DiagnosticsReport, Table};
use crate::error::{Error, Result};
use crate::grid::snapshot::write_snapshot;
use crate::grid::{FieldState, Grid};
use crate::scalar::Scalar;
use crate::scenario::Setup;
use crate::stepper::{run, RunOutput};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Writes `text` to `dir/name`, returning the path.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

pub fn write_table(dir: &Path, name: &str, table: &Table) -> Result<PathBuf> {
    write_text(dir, name, &table.to_csv())
}

/// Cell values of a named snapshot field; `c` expands to `c0, c1, …`.
pub fn field_values<T: Scalar>(grid: &Grid<T>, state: &FieldState<T>, field: &str) -> Result<Vec<(String, Vec<T>)>> {
    let nx = grid.nx();
    let out = match field {
        "c" => state
            .c
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("c{i}"), c.clone()))
            .collect(),
        "e" => vec![("e".into(), state.e.clone())],
        "theta" => vec![("theta".into(), state.e.iter().map(|&e| theta_of_e(e)).collect::<Result<_>>()?)],
        "phi" => vec![("phi".into(), state.phi.clone())],
        "p" => vec![("p".into(), state.p.clone())],
        "vx" => {
            let v = (0..grid.n_cells())
                .map(|k| {
                    let (i, j) = (k % nx, k / nx);
                    T::half() * (state.v.x[grid.xface(i, j)] + state.v.x[grid.xface(i + 1, j)])
                })
                .collect();
            vec![("vx".into(), v)]
        }
        "vy" => {
            let v = if grid.dim() == 2 {
                (0..grid.n_cells())
                    .map(|k| {
                        let (i, j) = (k % nx, k / nx);
                        T::half() * (state.v.y[grid.yface(i, j)] + state.v.y[grid.yface(i, j + 1)])
                    })
                    .collect()
            } else {
                vec![T::zero(); grid.n_cells()]
            };
            vec![("vy".into(), v)]
        }
        other => return Err(Error::Config(format!("unknown snapshot field `{other}`"))),
    };
    Ok(out)
}

/// Writes `snap_<field>_<step>.csv` for each requested field.
pub fn write_snapshots<T: Scalar>(
    dir: &Path,
    step: usize,
    grid: &Grid<T>,
    state: &FieldState<T>,
    fields: &[String],
) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for field in fields {
        for (name, values) in field_values(grid, state, field)? {
            let path = dir.join(format!("snap_{name}_{step:06}.csv"));
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = BufWriter::new(file);
            write_snapshot(&mut w, &name, state.t, grid, &values)?;
            w.flush().map_err(|e| io_err(&path, e))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Runs a setup, streaming the diagnostics CSV and snapshots into `dir`.
///
/// Snapshots are taken at the first and last step and at every reported
/// step that is a multiple of `output.snapshot_every` (when nonzero).
/// `echo` receives every reported CSV row.
pub fn run_to_dir<T: Scalar>(
    setup: &Setup<T>,
    dir: &Path,
    echo: &mut dyn FnMut(&str),
) -> Result<RunOutput<T>> {
    create_dir(dir)?;
    let config = &setup.scenario.config;
    let grid = &config.grid;
    let last = config.n_steps();
    let every = config.output.snapshot_every;
    let path = dir.join(DIAGNOSTICS_FILE);
    let file = File::create(&path).map_err(|e| io_err(&path, e))?;
    let mut diag = BufWriter::new(file);
    let header = DiagnosticsReport::<T>::csv_header();
    writeln!(diag, "{header}").map_err(|e| io_err(&path, e))?;
    echo(&header);
    write_text(dir, "config.cfg", &setup.merged.to_text())?;

    let out = run(&setup.scenario, &mut |step, report, state| {
        let row = report.csv_row();
        writeln!(diag, "{row}").map_err(|e| io_err(&path, e))?;
        echo(&row);
        if step == 0 || step == last || (every > 0 && step % every == 0) {
            write_snapshots(dir, step, grid, state, &setup.fields)?;
        }
        Ok(())
    })?;
    diag.flush().map_err(|e| io_err(&path, e))?;
    Ok(out)
}
