//! Electrostatic potential with Robin data and the pressure projection.

mod krylov;
pub mod mms;
mod tensor;

pub use krylov::{bicgstab, conjugate_gradient, KrylovStats};
pub use tensor::{symmetric_eigen, TensorSolver, Tridiagonal};

use crate::error::{Error, Result};
use crate::grid::{Axis, BoundarySpec, FaceField, Grid, Segment};
use crate::scalar::{max_abs, norm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// BiCGSTAB for the potential (the Robin closure is nonsymmetric),
    /// conjugate gradients for the pressure.
    Krylov,
    /// Tensor-product eigen-decomposition; needs `λ^Γ` constant per segment.
    #[default]
    Direct,
}

impl SolveMethod {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "krylov" | "cg" => Some(SolveMethod::Krylov),
            "direct" => Some(SolveMethod::Direct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveSettings<T> {
    pub method: SolveMethod,
    /// Relative residual tolerance.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for LinearSolveSettings<T> {
    fn default() -> Self {
        LinearSolveSettings { method: SolveMethod::Direct, tolerance: T::of(1e-10), max_iterations: 20_000 }
    }
}

impl<T: Scalar> LinearSolveSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance > T::zero() && self.max_iterations > 0 {
            Ok(())
        } else {
            Err(Error::Config("solver tolerance and iteration cap must be positive".into()))
        }
    }
}

/// One-dimensional `−d²/dx²` with Robin rows of strength `μ` at both ends.
fn robin_line<T: Scalar>(n: usize, h: T, mu_lo: T, mu_hi: T) -> Result<Tridiagonal<T>> {
    let h2 = T::one() / (h * h);
    let mut diag = vec![T::two() * h2; n];
    let lower = vec![-h2; n];
    let mut upper = vec![-h2; n];
    let mut lower = lower;
    let eighth = T::of(0.125);
    diag[0] = h2 + T::of(9.0) * eighth * mu_lo / h;
    upper[0] = -h2 - eighth * mu_lo / h;
    diag[n - 1] = h2 + T::of(9.0) * eighth * mu_hi / h;
    lower[n - 1] = -h2 - eighth * mu_hi / h;
    Tridiagonal::new(&diag, &lower, &upper)
}

/// Effective Robin strength of the quadratic ghost closure.
#[inline]
pub(crate) fn closure_strength<T: Scalar>(lambda: T, h: T) -> T {
    lambda / (T::one() + T::of(0.375) * lambda * h)
}

/// Solver for `−Δφ = Q` with `∂_νφ = −λ^Γ (φ − φ^Γ)` on the boundary.
///
/// The boundary trace and normal derivative come from the quadratic through
/// the two nearest cells that satisfies the Robin law, so the discrete
/// operator is exact on quadratics.
#[derive(Debug, Clone)]
pub struct PotentialSolver<T> {
    grid: Grid<T>,
    settings: LinearSolveSettings<T>,
    mu: Vec<T>,
    phi_g: Vec<T>,
    direct: Option<TensorSolver<T>>,
}

impl<T: Scalar> PotentialSolver<T> {
    pub fn new(grid: &Grid<T>, bc: &BoundarySpec<T>, settings: LinearSolveSettings<T>) -> Result<Self> {
        settings.validate()?;
        let (_, _, lambda_int) = bc.transfer_integrals(grid);
        if !(lambda_int > T::zero()) {
            return Err(Error::Config(
                "lambda vanishes on the whole boundary; the potential problem is singular".into(),
            ));
        }
        let faces = grid.boundary_faces();
        let mut mu = Vec::with_capacity(faces.len());
        let mut phi_g = Vec::with_capacity(faces.len());
        for (bf, f) in faces.iter().zip(bc.faces()) {
            let h = grid.spacing(bf.axis);
            mu.push(closure_strength(f.lambda_g, h));
            phi_g.push(f.phi_g);
        }
        let direct = match settings.method {
            SolveMethod::Krylov => None,
            SolveMethod::Direct => {
                let lam = bc.segment_uniform_lambda(grid).ok_or_else(|| {
                    Error::Config("direct potential solve needs lambda constant along each segment".into())
                })?;
                let at = |s: Segment| closure_strength(lam[s.index()], grid.spacing(axis_of(s)));
                let x = robin_line(grid.nx(), grid.hx(), at(Segment::Left), at(Segment::Right))?;
                let y = if grid.dim() == 2 {
                    Some(robin_line(grid.ny(), grid.hy(), at(Segment::Bottom), at(Segment::Top))?)
                } else {
                    None
                };
                Some(TensorSolver::new(x, y, false))
            }
        };
        Ok(PotentialSolver { grid: grid.clone(), settings, mu, phi_g, direct })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Outward normal derivative of `φ` on each boundary face.
    pub fn boundary_gradients(&self, phi: &[T]) -> Vec<T> {
        self.boundary_gradients_with(phi, true)
    }

    fn boundary_gradients_with(&self, phi: &[T], with_data: bool) -> Vec<T> {
        let eighth = T::of(0.125);
        self.grid
            .boundary_faces()
            .iter()
            .enumerate()
            .map(|(k, bf)| {
                let trace = eighth * (T::of(9.0) * phi[bf.cell] - phi[bf.inner]);
                let ext = if with_data { self.phi_g[k] } else { T::zero() };
                -self.mu[k] * (trace - ext)
            })
            .collect()
    }

    fn apply_with(&self, phi: &[T], with_data: bool) -> Result<Vec<T>> {
        let mut flux = self.grid.gradient(phi)?;
        let g = self.boundary_gradients_with(phi, with_data);
        for (bf, gb) in self.grid.boundary_faces().iter().zip(g) {
            let f = bf.outward * gb;
            match bf.axis {
                Axis::X => flux.x[bf.face] = f,
                Axis::Y => flux.y[bf.face] = f,
            }
        }
        let mut div = self.grid.divergence(&flux)?;
        div.iter_mut().for_each(|d| *d = -*d);
        Ok(div)
    }

    /// `−Δ_h φ` including the boundary data.
    pub fn apply(&self, phi: &[T]) -> Result<Vec<T>> {
        self.apply_with(phi, true)
    }

    /// `‖−Δ_h φ − Q‖ / ‖Q − (−Δ_h 0)‖`.
    pub fn relative_residual(&self, phi: &[T], q: &[T]) -> Result<T> {
        let a = self.apply(phi)?;
        let b = self.rhs(q)?;
        let r: Vec<T> = a.iter().zip(q).map(|(&x, &y)| x - y).collect();
        let bn = norm(&b);
        Ok(if bn == T::zero() { norm(&r) } else { norm(&r) / bn })
    }

    fn rhs(&self, q: &[T]) -> Result<Vec<T>> {
        let zero = vec![T::zero(); self.grid.n_cells()];
        let offset = self.apply_with(&zero, true)?;
        Ok(q.iter().zip(&offset).map(|(&a, &b)| a - b).collect())
    }

    pub fn solve(&self, q: &[T], guess: Option<&[T]>) -> Result<Vec<T>> {
        if q.len() != self.grid.n_cells() {
            return Err(Error::Shape(format!("charge field has {} values", q.len())));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::State("charge density is not finite".into()));
        }
        let b = self.rhs(q)?;
        let phi = match &self.direct {
            Some(d) => {
                // One step of iterative refinement.
                let mut x = d.solve(&b);
                let ax = self.apply_with(&x, false)?;
                let r: Vec<T> = b.iter().zip(&ax).map(|(&u, &v)| u - v).collect();
                let dx = d.solve(&r);
                x.iter_mut().zip(dx).for_each(|(u, v)| *u = *u + v);
                x
            }
            None => {
                let mut x = guess.map_or_else(|| vec![T::zero(); b.len()], |g| g.to_vec());
                bicgstab(
                    |v, out| {
                        let a = self.apply_with(v, false).expect("shape checked");
                        out.copy_from_slice(&a);
                    },
                    &b,
                    &mut x,
                    self.settings.tolerance,
                    self.settings.max_iterations,
                )?;
                x
            }
        };
        let res = self.relative_residual(&phi, q)?;
        if !(res <= self.settings.tolerance) {
            return Err(Error::Solver { iterations: 0, residual: res.as_f64() });
        }
        Ok(phi)
    }
}

fn axis_of(s: Segment) -> Axis {
    match s {
        Segment::Left | Segment::Right => Axis::X,
        Segment::Bottom | Segment::Top => Axis::Y,
    }
}

/// Convenience wrapper building a [`PotentialSolver`] for one solve.
pub fn solve_potential<T: Scalar>(
    q: &[T],
    grid: &Grid<T>,
    bc: &BoundarySpec<T>,
    settings: LinearSolveSettings<T>,
) -> Result<Vec<T>> {
    PotentialSolver::new(grid, bc, settings)?.solve(q, None)
}

/// Upper bound on the relative residual of the Krylov pressure solve.
pub const PRESSURE_TOLERANCE: f64 = 1e-12;

/// Projection of a face velocity onto discretely divergence-free fields.
#[derive(Debug, Clone)]
pub struct PressureSolver<T> {
    grid: Grid<T>,
    settings: LinearSolveSettings<T>,
    direct: Option<TensorSolver<T>>,
}

impl<T: Scalar> PressureSolver<T> {
    pub fn new(grid: &Grid<T>, settings: LinearSolveSettings<T>) -> Result<Self> {
        settings.validate()?;
        let direct = match settings.method {
            SolveMethod::Krylov => None,
            SolveMethod::Direct => {
                let x = robin_line(grid.nx(), grid.hx(), T::zero(), T::zero())?;
                let y = if grid.dim() == 2 {
                    Some(robin_line(grid.ny(), grid.hy(), T::zero(), T::zero())?)
                } else {
                    None
                };
                Some(TensorSolver::new(x, y, true))
            }
        };
        Ok(PressureSolver { grid: grid.clone(), settings, direct })
    }

    /// Returns `(v, p)` with `v = v* − ∇p`, `div v = 0` and `p` of zero mean.
    pub fn project(&self, v_star: &FaceField<T>) -> Result<(FaceField<T>, Vec<T>)> {
        let g = &self.grid;
        let scale = v_star.max_abs().max(T::one());
        for bf in g.boundary_faces() {
            let vn = match bf.axis {
                Axis::X => v_star.x[bf.face],
                Axis::Y => v_star.y[bf.face],
            };
            if vn.abs() > T::of(1e-14) * scale {
                return Err(Error::Config(format!(
                    "incompatible boundary data: normal velocity {vn} on the {} wall",
                    bf.segment.name()
                )));
            }
        }
        let div = g.divergence(v_star)?;
        // Solve (−Δ) p = −div v*.
        let b: Vec<T> = div.iter().map(|&d| -d).collect();
        let mut p = match &self.direct {
            Some(d) => d.solve(&b),
            None => {
                let mut x = vec![T::zero(); b.len()];
                conjugate_gradient(
                    |v, out| {
                        let lap = g.laplacian(v).expect("shape checked");
                        for (o, l) in out.iter_mut().zip(lap) {
                            *o = -l;
                        }
                    },
                    remove_mean,
                    &b,
                    &mut x,
                    // Incompressibility is what keeps advection of constants
                    // exact, so the projection is held tighter than φ.
                    self.settings.tolerance.min(T::of(PRESSURE_TOLERANCE)),
                    self.settings.max_iterations,
                )?;
                x
            }
        };
        remove_mean(&mut p);
        let grad = g.gradient(&p)?;
        let mut v = v_star.clone();
        v.axpy(-T::one(), &grad);
        Ok((v, p))
    }

    /// Max-norm of the cell divergence.
    pub fn divergence_norm(&self, v: &FaceField<T>) -> Result<T> {
        Ok(max_abs(&self.grid.divergence(v)?))
    }
}

fn remove_mean<T: Scalar>(x: &mut [T]) {
    let m = crate::scalar::sum(x) / T::of_usize(x.len());
    x.iter_mut().for_each(|v| *v = *v - m);
}
