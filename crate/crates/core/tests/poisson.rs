use std::f64::consts::PI;

use mixsim::constitutive::BoundaryCoeffs;
use mixsim::grid::{Profile, Segment};
use mixsim::poisson::{solve_potential, LinearSolveSettings, PotentialSolver, SolveMethod};
use mixsim::{BoundarySpec, Grid};

fn robin_1d(grid: &Grid, lambda: f64) -> BoundarySpec {
    let mut bc = BoundaryCoeffs::wall(2);
    bc.lambda_g = lambda;
    BoundarySpec::uniform(grid, bc).unwrap()
}

#[test]
fn closed_form_robin_profile() {
    let g = Grid::new_1d(128, 1.0).unwrap();
    let bc = robin_1d(&g, 1.0);
    for method in [SolveMethod::Direct, SolveMethod::Krylov] {
        let s = LinearSolveSettings { method, ..Default::default() };
        let phi = solve_potential(&vec![1.0; 128], &g, &bc, s).unwrap();
        let err = (0..128)
            .map(|i| {
                let x = g.cell_center(i, 0).0;
                (phi[i] - (-x * x + x + 1.0) / 2.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "{method:?}: {err:e}");
    }
}

fn mms_error(n: usize, method: SolveMethod) -> f64 {
    let (lx, ly) = (1.0, 1.5);
    let g = Grid::new_2d(n, n, lx, ly).unwrap();
    let exact = |x: f64, y: f64| (PI * x / lx).cos() * (PI * y / ly).cos();
    let lambda = 2.0;
    // φ^Γ = φ + ∂_νφ / λ at each boundary face; the normal derivative of the
    // exact solution vanishes on all four walls.
    let mut segs = Vec::new();
    for s in Segment::ALL {
        let mut bc = BoundaryCoeffs::wall(2);
        bc.lambda_g = lambda;
        segs.push((s, bc, Profile::Uniform));
    }
    let bc = BoundarySpec::new(&g, segs).unwrap();
    let mut faces_phi = Vec::new();
    for bf in g.boundary_faces() {
        let s = (bf.along as f64 + 0.5) / g.segment_len(bf.segment) as f64;
        let (x, y) = match bf.segment {
            Segment::Left => (0.0, s * ly),
            Segment::Right => (lx, s * ly),
            Segment::Bottom => (s * lx, 0.0),
            Segment::Top => (s * lx, ly),
        };
        faces_phi.push(exact(x, y));
    }
    let k2 = PI * PI * (1.0 / (lx * lx) + 1.0 / (ly * ly));
    let mut q = vec![0.0; g.n_cells()];
    let mut ex = vec![0.0; g.n_cells()];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = g.cell_center(i, j);
            ex[g.cell(i, j)] = exact(x, y);
            q[g.cell(i, j)] = k2 * exact(x, y);
        }
    }
    // Boundary data varies along each wall, so feed it through the
    // solver's linearity: φ = φ_0 + correction.
    let settings = LinearSolveSettings { method, ..Default::default() };
    let solver = PotentialSolver::new(&g, &bc, settings).unwrap();
    let mu_rhs = boundary_source(&g, lambda, &faces_phi);
    let rhs: Vec<f64> = q.iter().zip(&mu_rhs).map(|(a, b)| a + b).collect();
    let phi = solver.solve(&rhs, None).unwrap();
    let e2: f64 = phi.iter().zip(&ex).map(|(a, b)| (a - b) * (a - b)).sum();
    (e2 * g.cell_volume()).sqrt()
}

/// Cell source equivalent to nonuniform `φ^Γ` with zero uniform data.
fn boundary_source(g: &Grid, lambda: f64, phi_g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n_cells()];
    for (bf, &pg) in g.boundary_faces().iter().zip(phi_g) {
        let h = match bf.segment {
            Segment::Left | Segment::Right => g.hx(),
            _ => g.hy(),
        };
        let mu = lambda / (1.0 + 0.375 * lambda * h);
        out[bf.cell] += mu * pg / h;
    }
    out
}

#[test]
fn manufactured_solution_is_second_order() {
    for method in [SolveMethod::Direct, SolveMethod::Krylov] {
        let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| mms_error(n, method)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{method:?}: errors {errs:?}");
        }
    }
}
