//! Power-law momentum step: viscous stress, truncated convection, Navier
//! slip, Lorentz force and the incompressibility projection.

use crate::constitutive::MaterialLaws;
use crate::error::{Error, Result};
use crate::grid::{Axis, BoundarySpec, FaceField, FieldState, Grid, Segment};
use crate::poisson::PressureSolver;
use crate::scalar::Scalar;
use crate::transport::{CellFields, TransportFluxes};

/// Convection truncation level `k`; `None` disables the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConvectionTruncation<T> {
    pub k: Option<T>,
}

impl<T: Scalar> ConvectionTruncation<T> {
    pub fn new(k: Option<T>) -> Result<Self> {
        if let Some(k) = k {
            if !(k > T::zero()) {
                return Err(Error::Config(format!("truncation level k = {k} must be positive")));
            }
        }
        Ok(ConvectionTruncation { k })
    }

    /// `ξ^k(y) = ξ(y / k)`.
    pub fn factor(&self, y: T) -> T {
        match self.k {
            Some(k) if k.is_finite() => smoothstep_cut(y / k),
            _ => T::one(),
        }
    }
}

/// One on `[0, 1]`, zero on `[2, ∞)`, a cubic smoothstep in between
/// (slope bounded by `3/2`).
pub fn smoothstep_cut<T: Scalar>(y: T) -> T {
    if y <= T::one() {
        T::one()
    } else if y >= T::two() {
        T::zero()
    } else {
        let s = y - T::one();
        T::one() - s * s * (T::of(3.0) - T::two() * s)
    }
}

/// Strain components of a MAC velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct Strain<T> {
    /// `∂u/∂x` and `∂v/∂y` at cell centres.
    pub dxx: Vec<T>,
    pub dyy: Vec<T>,
    /// Off-diagonal strain at interior corners, `(nx+1) × (ny+1)` row-major;
    /// zero on the boundary where the slip law replaces it.
    pub dxy: Vec<T>,
}

impl<T: Scalar> Strain<T> {
    pub fn new(grid: &Grid<T>, v: &FaceField<T>) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let n = grid.n_cells();
        let mut dxx = vec![T::zero(); n];
        let mut dyy = vec![T::zero(); n];
        let mut dxy = vec![T::zero(); (nx + 1) * (ny + 1)];
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.cell(i, j);
                dxx[k] = (v.x[grid.xface(i + 1, j)] - v.x[grid.xface(i, j)]) / hx;
                if grid.dim() == 2 {
                    dyy[k] = (v.y[grid.yface(i, j + 1)] - v.y[grid.yface(i, j)]) / hy;
                }
            }
        }
        if grid.dim() == 2 {
            for j in 1..ny {
                for i in 1..nx {
                    let uy = (v.x[grid.xface(i, j)] - v.x[grid.xface(i, j - 1)]) / hy;
                    let vx = (v.y[grid.yface(i, j)] - v.y[grid.yface(i - 1, j)]) / hx;
                    dxy[j * (nx + 1) + i] = T::half() * (uy + vx);
                }
            }
        }
        Strain { dxx, dyy, dxy }
    }

    fn corner(&self, grid: &Grid<T>, i: usize, j: usize) -> T {
        self.dxy[j * (grid.nx() + 1) + i]
    }

    /// `|D|` at a cell centre with the corner shear averaged.
    pub fn norm_at(&self, grid: &Grid<T>, i: usize, j: usize) -> T {
        let k = grid.cell(i, j);
        let mut s = self.dxx[k] * self.dxx[k] + self.dyy[k] * self.dyy[k];
        if grid.dim() == 2 {
            let q = T::of(0.25)
                * (self.corner(grid, i, j)
                    + self.corner(grid, i + 1, j)
                    + self.corner(grid, i, j + 1)
                    + self.corner(grid, i + 1, j + 1));
            s = s + T::two() * q * q;
        }
        s.sqrt()
    }
}

/// Secant viscosity `η = g(c, θ)(1 + |D|^{r−1})` per cell.
fn cell_viscosity<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    cells: &CellFields<T>,
    strain: &Strain<T>,
) -> Vec<T> {
    let mut c = vec![T::zero(); state.species()];
    let mut eta = vec![T::zero(); grid.n_cells()];
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.cell(i, j);
            for (ci, s) in c.iter_mut().zip(&state.c) {
                *ci = s[k];
            }
            eta[k] = model.viscosity(&c, cells.theta[k], strain.norm_at(grid, i, j));
        }
    }
    eta
}

fn corner_viscosity<T: Scalar>(grid: &Grid<T>, eta: &[T], i: usize, j: usize) -> T {
    T::of(0.25)
        * (eta[grid.cell(i - 1, j - 1)]
            + eta[grid.cell(i, j - 1)]
            + eta[grid.cell(i - 1, j)]
            + eta[grid.cell(i, j)])
}

/// Pointwise `S:D(v)` at cell centres; corner shear contributions are split
/// evenly between the four surrounding cells.
pub fn dissipation_field<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    cells: &CellFields<T>,
) -> Result<Vec<T>> {
    state.check_shape(grid)?;
    let strain = Strain::new(grid, &state.v);
    let eta = cell_viscosity(grid, state, model, cells, &strain);
    Ok(dissipation_with(grid, &strain, &eta))
}

fn dissipation_with<T: Scalar>(grid: &Grid<T>, strain: &Strain<T>, eta: &[T]) -> Vec<T> {
    let mut out: Vec<T> = (0..grid.n_cells())
        .map(|k| eta[k] * (strain.dxx[k] * strain.dxx[k] + strain.dyy[k] * strain.dyy[k]))
        .collect();
    if grid.dim() == 2 {
        for j in 1..grid.ny() {
            for i in 1..grid.nx() {
                let d = strain.corner(grid, i, j);
                let share = T::half() * corner_viscosity(grid, eta, i, j) * d * d;
                for (a, b) in [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)] {
                    let k = grid.cell(a, b);
                    out[k] = out[k] + share;
                }
            }
        }
    }
    out
}

/// Viscous force `div(η D)`: minus the half-gradient of `Σ w η |D|²` with `η`
/// frozen, so `⟨v, f⟩ = −∫ S:D` holds exactly.
fn viscous_force<T: Scalar>(grid: &Grid<T>, strain: &Strain<T>, eta: &[T], out: &mut FaceField<T>) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let two_d = grid.dim() == 2;
    let shear = |i: usize, j: usize| {
        if i == 0 || j == 0 || i == nx || j == ny {
            T::zero()
        } else {
            corner_viscosity(grid, eta, i, j) * strain.corner(grid, i, j)
        }
    };
    for j in 0..ny {
        for i in 1..nx {
            let (a, b) = grid.xface_cells(i, j);
            let mut f = (eta[b] * strain.dxx[b] - eta[a] * strain.dxx[a]) / hx;
            if two_d {
                f = f + (shear(i, j + 1) - shear(i, j)) / hy;
            }
            out.x[grid.xface(i, j)] = out.x[grid.xface(i, j)] + f;
        }
    }
    if two_d {
        for j in 1..ny {
            for i in 0..nx {
                let (a, b) = grid.yface_cells(i, j);
                let f = (eta[b] * strain.dyy[b] - eta[a] * strain.dyy[a]) / hy
                    + (shear(i + 1, j) - shear(i, j)) / hx;
                out.y[grid.yface(i, j)] = out.y[grid.yface(i, j)] + f;
            }
        }
    }
}

/// Subtracts the skew-symmetric convection `½ Σ_k F_k u_k / V`, where `F_k`
/// is the truncated transporting flux through each control-volume side.
/// Energy neutral for any transporting field.
fn convection<T: Scalar>(
    grid: &Grid<T>,
    v: &FaceField<T>,
    trunc: &ConvectionTruncation<T>,
    out: &mut FaceField<T>,
) {
    if grid.dim() == 1 {
        // 1D incompressible flow between walls is at rest.
        return;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let vol = grid.cell_volume();
    let u = |i: usize, j: usize| v.x[grid.xface(i, j)];
    let w = |i: usize, j: usize| v.y[grid.yface(i, j)];
    let sq = |a: T| a * a;
    // Speed² at cell centres and corners; walls contribute zeros.
    let xi_cell = |i: usize, j: usize| {
        let s = T::half() * (sq(u(i, j)) + sq(u(i + 1, j)) + sq(w(i, j)) + sq(w(i, j + 1)));
        trunc.factor(s)
    };
    let xi_corner = |i: usize, j: usize| {
        let ux = if j > 0 { sq(u(i, j - 1)) } else { T::zero() } + if j < ny { sq(u(i, j)) } else { T::zero() };
        let wy = if i > 0 { sq(w(i - 1, j)) } else { T::zero() } + if i < nx { sq(w(i, j)) } else { T::zero() };
        trunc.factor(T::half() * (ux + wy))
    };
    let c = T::half() / vol;
    for j in 0..ny {
        for i in 1..nx {
            let fe = xi_cell(i, j) * T::half() * (u(i, j) + u(i + 1, j)) * hy;
            let fw = -xi_cell(i - 1, j) * T::half() * (u(i - 1, j) + u(i, j)) * hy;
            let mut s = fe * u(i + 1, j) + fw * u(i - 1, j);
            if j + 1 < ny {
                let fnorth = xi_corner(i, j + 1) * T::half() * (w(i - 1, j + 1) + w(i, j + 1)) * hx;
                s = s + fnorth * u(i, j + 1);
            }
            if j > 0 {
                let fs = -xi_corner(i, j) * T::half() * (w(i - 1, j) + w(i, j)) * hx;
                s = s + fs * u(i, j - 1);
            }
            let f = grid.xface(i, j);
            out.x[f] = out.x[f] - c * s;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let fnorth = xi_cell(i, j) * T::half() * (w(i, j) + w(i, j + 1)) * hx;
            let fs = -xi_cell(i, j - 1) * T::half() * (w(i, j - 1) + w(i, j)) * hx;
            let mut s = fnorth * w(i, j + 1) + fs * w(i, j - 1);
            if i + 1 < nx {
                let fe = xi_corner(i + 1, j) * T::half() * (u(i + 1, j - 1) + u(i + 1, j)) * hy;
                s = s + fe * w(i + 1, j);
            }
            if i > 0 {
                let fw = -xi_corner(i, j) * T::half() * (u(i, j - 1) + u(i, j)) * hy;
                s = s + fw * w(i - 1, j);
            }
            let f = grid.yface(i, j);
            out.y[f] = out.y[f] - c * s;
        }
    }
}

/// The two tangential faces whose mean is the slip velocity at a boundary face.
fn wall_tangential<T: Scalar>(grid: &Grid<T>, seg: Segment, along: usize) -> Option<[(Axis, usize); 2]> {
    if grid.dim() == 1 {
        return None;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    Some(match seg {
        Segment::Bottom => [(Axis::X, grid.xface(along, 0)), (Axis::X, grid.xface(along + 1, 0))],
        Segment::Top => [(Axis::X, grid.xface(along, ny - 1)), (Axis::X, grid.xface(along + 1, ny - 1))],
        Segment::Left => [(Axis::Y, grid.yface(0, along)), (Axis::Y, grid.yface(0, along + 1))],
        Segment::Right => [(Axis::Y, grid.yface(nx - 1, along)), (Axis::Y, grid.yface(nx - 1, along + 1))],
    })
}

fn face_value<T: Scalar>(v: &FaceField<T>, axis: Axis, f: usize) -> T {
    match axis {
        Axis::X => v.x[f],
        Axis::Y => v.y[f],
    }
}

/// Navier slip friction: power `Σ γ A |v̄_τ|²` and the matching force.
fn wall_friction<T: Scalar>(
    grid: &Grid<T>,
    v: &FaceField<T>,
    bc: &BoundarySpec<T>,
    cells: &CellFields<T>,
    out: &mut FaceField<T>,
) -> T {
    let vol = grid.cell_volume();
    let mut power = T::zero();
    for (bf, data) in grid.boundary_faces().iter().zip(bc.faces()) {
        let Some(pair) = wall_tangential(grid, bf.segment, bf.along) else {
            continue;
        };
        let gamma = data.gamma * cells.cut[bf.cell];
        if gamma == T::zero() {
            continue;
        }
        let vt = T::half() * (face_value(v, pair[0].0, pair[0].1) + face_value(v, pair[1].0, pair[1].1));
        power = power + gamma * bf.area * vt * vt;
        let push = gamma * bf.area * vt * T::half() / vol;
        for (axis, f) in pair {
            let lateral = match axis {
                Axis::X => f % (grid.nx() + 1) == 0 || f % (grid.nx() + 1) == grid.nx(),
                Axis::Y => f / grid.nx() == 0 || f / grid.nx() == grid.ny(),
            };
            if lateral {
                continue;
            }
            match axis {
                Axis::X => out.x[f] = out.x[f] - push,
                Axis::Y => out.y[f] = out.y[f] - push,
            }
        }
    }
    power
}

/// Result of one momentum step.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumStep<T> {
    pub v: FaceField<T>,
    /// Pressure, zero mean.
    pub p: Vec<T>,
    /// `S:D(vⁿ)` per cell.
    pub dissipation: Vec<T>,
    /// Wall friction power `∮ γ |v_τ|²`.
    pub friction: T,
    /// Work of the electric force `⟨−Q∇φ, vⁿ⟩`.
    pub lorentz_work: T,
    /// Convective work `⟨C(v), v⟩`, zero up to round-off.
    pub convective_work: T,
}

/// `v* = vⁿ + dt [div S − conv − Q∇φ − friction]`, then projection.
pub fn step_momentum<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    trunc: &ConvectionTruncation<T>,
    fluxes: &TransportFluxes<T>,
    pressure: &PressureSolver<T>,
    dt: T,
) -> Result<MomentumStep<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Config(format!("time step {dt} must be positive")));
    }
    let strain = Strain::new(grid, &state.v);
    let eta = cell_viscosity(grid, state, model, &fluxes.cells, &strain);
    let dissipation = dissipation_with(grid, &strain, &eta);

    let mut force = FaceField::zeros(grid);
    viscous_force(grid, &strain, &eta, &mut force);
    let mut conv = FaceField::zeros(grid);
    convection(grid, &state.v, trunc, &mut conv);
    let convective_work = -grid.face_inner(&conv, &state.v);
    force.axpy(T::one(), &conv);
    let friction = wall_friction(grid, &state.v, bc, &fluxes.cells, &mut force);
    let mut lorentz = FaceField::zeros(grid);
    grid.for_each_interior_face(|axis, f, _, _| match axis {
        Axis::X => lorentz.x[f] = -fluxes.charge_up.x[f] * fluxes.grad_phi.x[f],
        Axis::Y => lorentz.y[f] = -fluxes.charge_up.y[f] * fluxes.grad_phi.y[f],
    });
    let lorentz_work = grid.face_inner(&lorentz, &state.v);
    force.axpy(T::one(), &lorentz);

    let mut v_star = state.v.clone();
    v_star.axpy(dt, &force);
    let (v, p) = pressure.project(&v_star)?;
    let p = p.into_iter().map(|x| x / dt).collect();
    Ok(MomentumStep { v, p, dissipation, friction, lorentz_work, convective_work })
}

/// Largest secant viscosity over the cells.
pub fn max_viscosity<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    cells: &CellFields<T>,
) -> T {
    let strain = Strain::new(grid, &state.v);
    cell_viscosity(grid, state, model, cells, &strain)
        .into_iter()
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{BoundaryCoeffs, MaterialModel, MaterialParams};
    use crate::poisson::LinearSolveSettings;
    use crate::transport::{assemble, CutoffParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(gamma: f64) -> (Grid<f64>, MaterialModel<f64>, BoundarySpec<f64>, PressureSolver<f64>) {
        let grid = Grid::new_2d(8, 6, 1.0, 0.75).unwrap();
        let model = MaterialModel::new(MaterialParams { z: vec![0.0; 3], ..Default::default() }).unwrap();
        let mut bc = BoundaryCoeffs::wall(3);
        bc.gamma = gamma;
        let bc = BoundarySpec::uniform(&grid, bc).unwrap();
        let ps = PressureSolver::new(&grid, LinearSolveSettings::default()).unwrap();
        (grid, model, bc, ps)
    }

    fn swirl(grid: &Grid<f64>, ps: &PressureSolver<f64>, seed: u64) -> FaceField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = FaceField::zeros(grid);
        grid.for_each_interior_face(|axis, f, _, _| match axis {
            Axis::X => v.x[f] = rng.gen_range(-1.0..1.0),
            Axis::Y => v.y[f] = rng.gen_range(-1.0..1.0),
        });
        ps.project(&v).unwrap().0
    }

    #[test]
    fn smoothstep_plateaus_and_slope() {
        assert_eq!(smoothstep_cut(0.5f64), 1.0);
        assert_eq!(smoothstep_cut(2.5f64), 0.0);
        let mut prev = 1.0f64;
        for k in 1..=100 {
            let y = 1.0 + k as f64 / 100.0;
            let val = smoothstep_cut(y);
            assert!(val <= prev && prev - val <= 2.0 / 100.0 + 1e-15);
            prev = val;
        }
        assert!(ConvectionTruncation::new(Some(0.0f64)).is_err());
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let (grid, model, bc, ps) = setup(1.0);
        let s = FieldState::uniform(&grid, 3);
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
        let m = step_momentum(&grid, &s, &model, &bc, &Default::default(), &fl, &ps, 1e-3).unwrap();
        assert_eq!(m.v.max_abs(), 0.0);
        assert!(m.p.iter().all(|&p| p == 0.0));
        assert!(m.dissipation.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn viscous_power_matches_dissipation() {
        let (grid, model, _, ps) = setup(0.7);
        let mut s = FieldState::uniform(&grid, 3);
        s.v = swirl(&grid, &ps, 1);
        let cells = CellFields::new(&s, &CutoffParams::default()).unwrap();
        let strain = Strain::new(&grid, &s.v);
        let eta = cell_viscosity(&grid, &s, &model, &cells, &strain);
        let mut f = FaceField::zeros(&grid);
        viscous_force(&grid, &strain, &eta, &mut f);
        let power = grid.face_inner(&f, &s.v);
        let diss = grid.integral_omega(&dissipation_with(&grid, &strain, &eta));
        assert!((power + diss).abs() <= 1e-12 * diss);
    }

    #[test]
    fn convection_is_energy_neutral_and_truncation_is_inert_below_k() {
        let (grid, _, _, ps) = setup(0.0);
        let v = swirl(&grid, &ps, 2);
        let mut a = FaceField::zeros(&grid);
        convection(&grid, &v, &ConvectionTruncation::default(), &mut a);
        assert!(grid.face_inner(&a, &v).abs() <= 1e-14);
        let mut b = FaceField::zeros(&grid);
        let big = ConvectionTruncation::new(Some(1e3)).unwrap();
        convection(&grid, &v, &big, &mut b);
        assert_eq!(a, b);
        let mut t = FaceField::zeros(&grid);
        convection(&grid, &v, &ConvectionTruncation::new(Some(1e-3)).unwrap(), &mut t);
        assert!(t.max_abs() < a.max_abs());
    }

    #[test]
    fn kinetic_energy_decays_without_forcing() {
        let (grid, model, bc, ps) = setup(1.0);
        let mut s = FieldState::uniform(&grid, 3);
        s.v = swirl(&grid, &ps, 3);
        let cut = CutoffParams::default();
        let mut prev = grid.face_inner(&s.v, &s.v);
        for _ in 0..20 {
            let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
            let m = step_momentum(&grid, &s, &model, &bc, &Default::default(), &fl, &ps, 1e-3).unwrap();
            s.v = m.v;
            let now = grid.face_inner(&s.v, &s.v);
            assert!(now <= prev);
            prev = now;
        }
    }

    #[test]
    fn linear_shear_dissipation_matches_hand_value() {
        let grid = Grid::new_2d(6, 6, 1.0, 1.0).unwrap();
        let model = MaterialModel::new(MaterialParams::default()).unwrap();
        let alpha = 0.8;
        let mut s = FieldState::uniform(&grid, 3);
        for j in 0..grid.ny() {
            for i in 1..grid.nx() {
                let (_, y) = grid.cell_center(0, j);
                s.v.x[grid.xface(i, j)] = alpha * y;
            }
        }
        let cells = CellFields::new(&s, &CutoffParams::default()).unwrap();
        let field = dissipation_field(&grid, &s, &model, &cells).unwrap();
        // Interior cell away from the walls: D = [[0, α/2], [α/2, 0]].
        let k = grid.cell(2, 2);
        let d = SymOracle::shear(alpha);
        let theta = cells.theta[k];
        let g = model.viscosity_factor(&[1.0 / 3.0; 3], theta);
        let expect = g * (1.0 + d.norm()) * d.norm() * d.norm();
        assert!((field[k] - expect).abs() <= 1e-12 * expect);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let ps = PressureSolver::new(&grid, LinearSolveSettings::default()).unwrap();
            s.v = swirl(&grid, &ps, rng.gen());
            let field = dissipation_field(&grid, &s, &model, &cells).unwrap();
            assert!(field.iter().all(|&x| x >= 0.0));
        }
    }

    /// Direct tensor arithmetic for the shear-flow oracle.
    struct SymOracle([[f64; 2]; 2]);

    impl SymOracle {
        fn shear(alpha: f64) -> Self {
            let grad = [[0.0, alpha], [0.0, 0.0]];
            let mut d = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    d[i][j] = 0.5 * (grad[i][j] + grad[j][i]);
                }
            }
            SymOracle(d)
        }

        fn norm(&self) -> f64 {
            self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
        }
    }
}
