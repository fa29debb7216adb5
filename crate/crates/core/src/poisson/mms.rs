//! Verification problems for the potential solver: the 1D Robin closed form
//! and a 2D manufactured solution with nonuniform boundary data.

use std::f64::consts::PI;

use super::{closure_strength, solve_potential, LinearSolveSettings, PotentialSolver, SolveMethod};
use crate::constitutive::BoundaryCoeffs;
use crate::diagnostics::Table;
use crate::error::Result;
use crate::grid::{BoundarySpec, Grid, Profile, Segment};

fn robin_spec(grid: &Grid<f64>, lambda: f64) -> Result<BoundarySpec<f64>> {
    let mut bc = BoundaryCoeffs::wall(2);
    bc.lambda_g = lambda;
    let segs = grid.segments().iter().map(|&s| (s, bc.clone(), Profile::Uniform)).collect();
    BoundarySpec::new(grid, segs)
}

/// Max error against `φ = (−x² + x + 1)/2`, which solves `−φ'' = 1` on
/// `[0, 1]` with `φ' = ∓(φ − 0)` at the ends.
pub fn robin_closed_form_error(nx: usize, method: SolveMethod) -> Result<f64> {
    let g = Grid::new_1d(nx, 1.0)?;
    let bc = robin_spec(&g, 1.0)?;
    let settings = LinearSolveSettings { method, ..Default::default() };
    let phi = solve_potential(&vec![1.0; nx], &g, &bc, settings)?;
    Ok((0..nx)
        .map(|i| {
            let x = g.cell_center(i, 0).0;
            (phi[i] - (-x * x + x + 1.0) / 2.0).abs()
        })
        .fold(0.0, f64::max))
}

/// L² error of `φ = cos(πx/lx) cos(πy/ly)` on an `n × n` grid of
/// `[0, 1] × [0, 1.5]` with `λ = 2`. The exact normal derivative vanishes,
/// so the Robin data are `φ^Γ = φ` on the walls; they enter as an
/// equivalent cell source.
pub fn mms_error(n: usize, method: SolveMethod) -> Result<f64> {
    let (lx, ly, lambda) = (1.0, 1.5, 2.0);
    let g = Grid::new_2d(n, n, lx, ly)?;
    let exact = |x: f64, y: f64| (PI * x / lx).cos() * (PI * y / ly).cos();
    let solver = PotentialSolver::new(&g, &robin_spec(&g, lambda)?, LinearSolveSettings { method, ..Default::default() })?;

    let k2 = PI * PI * (1.0 / (lx * lx) + 1.0 / (ly * ly));
    let mut rhs = vec![0.0; g.n_cells()];
    let mut ex = vec![0.0; g.n_cells()];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = g.cell_center(i, j);
            ex[g.cell(i, j)] = exact(x, y);
            rhs[g.cell(i, j)] = k2 * exact(x, y);
        }
    }
    for bf in g.boundary_faces() {
        let s = (bf.along as f64 + 0.5) / g.segment_len(bf.segment) as f64;
        let (x, y, h) = match bf.segment {
            Segment::Left => (0.0, s * ly, g.hx()),
            Segment::Right => (lx, s * ly, g.hx()),
            Segment::Bottom => (s * lx, 0.0, g.hy()),
            Segment::Top => (s * lx, ly, g.hy()),
        };
        rhs[bf.cell] += closure_strength(lambda, h) * exact(x, y) / h;
    }
    let phi = solver.solve(&rhs, None)?;
    let e2: f64 = phi.iter().zip(&ex).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((e2 * g.cell_volume()).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsRow {
    pub n: usize,
    pub error: f64,
    /// Observed order against the previous (coarser) row.
    pub order: Option<f64>,
}

pub fn mms_study(grids: &[usize], method: SolveMethod) -> Result<Vec<MmsRow>> {
    let mut rows: Vec<MmsRow> = Vec::new();
    for &n in grids {
        let error = mms_error(n, method)?;
        let order = rows
            .last()
            .map(|p| (p.error / error).ln() / (n as f64 / p.n as f64).ln());
        rows.push(MmsRow { n, error, order });
    }
    Ok(rows)
}

pub fn mms_to_table(rows: &[MmsRow]) -> Table {
    let mut t = Table::new(["n", "h", "l2_error", "order"]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            format!("{:.16e}", 1.0 / r.n as f64),
            format!("{:.16e}", r.error),
            r.order.map_or_else(|| "-".into(), |o| format!("{o:.16e}")),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_reports_orders_after_the_first_row() {
        let rows = mms_study(&[8, 16], SolveMethod::Direct).unwrap();
        assert!(rows[0].order.is_none());
        assert!(rows[1].order.unwrap() > 1.8);
        assert!(robin_closed_form_error(32, SolveMethod::Direct).unwrap() < 1e-10);
        assert_eq!(mms_to_table(&rows).rows.len(), 2);
    }
}
