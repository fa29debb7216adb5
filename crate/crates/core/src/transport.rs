//! Species and heat fluxes, boundary exchange, reactions, and the explicit
//! conservative updates of `c⃗` and `e`.

use crate::constitutive::{theta_of_e, theta_slope, zeta_regularized, zeta_slope, MaterialLaws};
use crate::error::{Error, Result};
use crate::grid::{Axis, BoundarySpec, FaceField, FieldState, Grid};
use crate::scalar::{dot, Scalar};

/// Cut-off level `δ` and entropy regularization `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams<T> {
    pub delta: T,
    pub epsilon: T,
}

impl<T: Scalar> Default for CutoffParams<T> {
    fn default() -> Self {
        CutoffParams { delta: T::zero(), epsilon: T::zero() }
    }
}

impl<T: Scalar> CutoffParams<T> {
    pub fn new(delta: T, epsilon: T) -> Result<Self> {
        let p = CutoffParams { delta, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= T::zero() && self.delta < T::half()) {
            return Err(Error::Config(format!("cut-off delta = {} must lie in [0, 1/2)", self.delta)));
        }
        if !(self.epsilon >= T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon = {} must be nonnegative", self.epsilon)));
        }
        Ok(())
    }

    pub fn is_off(&self) -> bool {
        self.delta == T::zero() && self.epsilon == T::zero()
    }
}

/// Trapezoidal cut-off `T_δ`: zero below `δ` and above `2/δ`, one on
/// `[2δ, 1/δ]`, linear in between. `δ = 0` gives one for every argument.
pub fn cutoff<T: Scalar>(y: T, delta: T) -> T {
    if delta == T::zero() {
        return T::one();
    }
    let lo = delta;
    let hi = T::one() / delta;
    if y <= lo || y >= T::two() * hi {
        T::zero()
    } else if y < T::two() * lo {
        (y - lo) / lo
    } else if y <= hi {
        T::one()
    } else {
        (T::two() * hi - y) / hi
    }
}

/// `𝔗_δ(c⃗) = Π_i T_δ(c_i)`.
pub fn species_cutoff<T: Scalar>(c: &[T], delta: T) -> T {
    c.iter().fold(T::one(), |acc, &ci| acc * cutoff(ci, delta))
}

/// Cell-centred quantities derived from the state.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFields<T> {
    pub theta: Vec<T>,
    pub inv_theta: Vec<T>,
    /// Regularized chemical potentials, `[species][cell]`.
    pub zeta: Vec<Vec<T>>,
    /// `𝔗_δ(c⃗) T_δ(e)` per cell.
    pub cut: Vec<T>,
}

impl<T: Scalar> CellFields<T> {
    pub fn new(state: &FieldState<T>, cut: &CutoffParams<T>) -> Result<Self> {
        state.check_admissible()?;
        let n = state.n_cells();
        let species = state.species();
        let mut theta = Vec::with_capacity(n);
        let mut zeta = vec![Vec::with_capacity(n); species];
        let mut cuts = Vec::with_capacity(n);
        let mut c = vec![T::zero(); species];
        for k in 0..n {
            for (i, ci) in state.c.iter().enumerate() {
                c[i] = ci[k];
            }
            theta.push(theta_of_e(state.e[k])?);
            for (zi, z) in zeta.iter_mut().zip(zeta_regularized(&c, cut.epsilon)?) {
                zi.push(z);
            }
            cuts.push(species_cutoff(&c, cut.delta) * cutoff(state.e[k], cut.delta));
        }
        let inv_theta = theta.iter().map(|&t| T::one() / t).collect();
        Ok(CellFields { theta, inv_theta, zeta, cut: cuts })
    }

    /// Whether any cut factor differs from one.
    pub fn cut_active(&self) -> bool {
        self.cut.iter().any(|&x| x != T::one())
    }
}

/// Species fluxes (`L` components) and heat flux per face.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField<T> {
    pub qc: Vec<FaceField<T>>,
    pub qe: FaceField<T>,
}

impl<T: Scalar> FluxField<T> {
    fn zeros(grid: &Grid<T>, species: usize) -> Self {
        FluxField { qc: vec![FaceField::zeros(grid); species], qe: FaceField::zeros(grid) }
    }

    /// `max |ℓ·q⃗_c|` over faces.
    pub fn max_species_sum(&self) -> T {
        let total = |pick: fn(&FaceField<T>) -> &Vec<T>| {
            let len = pick(&self.qc[0]).len();
            (0..len).fold(T::zero(), |m, f| {
                let s = self.qc.iter().fold(T::zero(), |acc, q| acc + pick(q)[f]);
                m.max(s.abs())
            })
        };
        total(|f| &f.x).max(total(|f| &f.y))
    }
}

/// Outward normal fluxes on boundary faces, in `Grid::boundary_faces` order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFlux<T> {
    /// `[face][species]`.
    pub qc: Vec<Vec<T>>,
    pub qe: Vec<T>,
}

/// Everything one explicit transport step needs, plus the face and cell
/// terms the diagnostics integrate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportFluxes<T> {
    pub cells: CellFields<T>,
    pub diffusive: FluxField<T>,
    /// Upwind advective fluxes `v c_up`, `v e_up`.
    pub advective: FluxField<T>,
    pub boundary: BoundaryFlux<T>,
    /// Upwinded charge density `Q_up` on faces.
    pub charge_up: FaceField<T>,
    /// Gradient of the potential the fluxes were built with.
    pub grad_phi: FaceField<T>,
    /// Joule/Peltier source `−Σ z_i q_i·∇φ` at cell centres.
    pub joule: Vec<T>,
    /// Cut reaction rates, `[species][cell]`.
    pub reaction: Vec<Vec<T>>,
    /// Entropy productions per cell.
    pub p_cross: Vec<T>,
    pub p_fourier: Vec<T>,
    pub p_react: Vec<T>,
    /// Entropy exchange by advection (`≈ 0` for divergence-free `v`).
    pub advection_entropy: T,
    /// Net entropy flux through the boundary, `Σ A(ζ·q_cΓ − q_eΓ/θ)`.
    pub boundary_entropy: T,
    /// Nonnegative boundary dissipation `Σ A 𝔗(Y·𝔇Y + κ_Γ(1/θ − 1/θ^Γ)²)`.
    pub boundary_production: T,
}

/// Assembles all transport terms from `state` with the potential `phi`
/// and the velocity `state.v`.
pub fn assemble<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    phi: &[T],
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<TransportFluxes<T>> {
    state.check_shape(grid)?;
    let l = model.species();
    if state.species() != l || bc.species() != l {
        return Err(Error::Shape(format!(
            "model has {l} species, state {}, boundary data {}",
            state.species(),
            bc.species()
        )));
    }
    if phi.len() != grid.n_cells() {
        return Err(Error::Shape("potential length differs from cell count".into()));
    }
    let cells = CellFields::new(state, cut)?;
    let z = model.charges().to_vec();
    let n = grid.n_cells();
    let w = grid.face_weight();

    let mut diffusive = FluxField::zeros(grid, l);
    let mut advective = FluxField::zeros(grid, l);
    let mut charge_up = FaceField::zeros(grid);
    let mut grad_phi = FaceField::zeros(grid);
    let mut joule = vec![T::zero(); n];
    let mut p_cross = vec![T::zero(); n];
    let mut p_fourier = vec![T::zero(); n];
    let mut advection_entropy = T::zero();

    let mut cf = vec![T::zero(); l];
    let mut x = vec![T::zero(); l];
    let mut q = vec![T::zero(); l];
    let mut mat = vec![T::zero(); l * l];
    let mut scratch = vec![T::zero(); l * l];
    let mut mv = vec![T::zero(); l];
    let mut failure = None;

    grid.for_each_interior_face(|axis, f, a, b| {
        if failure.is_some() {
            return;
        }
        let h = grid.spacing(axis);
        let u = match axis {
            Axis::X => state.v.x[f],
            Axis::Y => state.v.y[f],
        };
        let cut_f = cells.cut[a].min(cells.cut[b]);
        let inv_theta_f = T::half() * (cells.inv_theta[a] + cells.inv_theta[b]);
        let theta_f = T::one() / inv_theta_f;
        for i in 0..l {
            cf[i] = T::half() * (state.c[i][a] + state.c[i][b]);
        }
        let gphi = (phi[b] - phi[a]) / h;
        let ginv = (cells.inv_theta[b] - cells.inv_theta[a]) / h;
        let gtheta = (cells.theta[b] - cells.theta[a]) / h;
        for j in 0..l {
            x[j] = (cells.zeta[j][b] - cells.zeta[j][a]) / h + z[j] * inv_theta_f * gphi;
        }
        let laws = (|| -> Result<(T, T)> {
            model.mobility_into(&cf, theta_f, &mut mat)?;
            model.thermo_into(&cf, theta_f, &mut mv)?;
            let kappa = model.heat_conductivity(&cf, theta_f)?;
            let quad = model.mobility_quadratic(&cf, theta_f, &x, &mut scratch)?;
            Ok((kappa, quad))
        })();
        let (kappa, quad) = match laws {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let mut head = T::zero();
        for i in 0..l - 1 {
            let mx = (0..l).fold(T::zero(), |s, j| s + mat[i * l + j] * x[j]);
            q[i] = -cut_f * (mx + mv[i] * ginv);
            head = head + q[i];
        }
        q[l - 1] = -head;
        let qe = -cut_f * (kappa * gtheta + dot(&mv, &x));
        let up = if u > T::zero() { a } else { b };
        let mut qz = T::zero();
        let mut q_up = T::zero();
        let mut adv_s = state.e[up] * (cells.inv_theta[b] - cells.inv_theta[a]);
        for i in 0..l {
            qz = qz + z[i] * q[i];
            q_up = q_up + z[i] * state.c[i][up];
            adv_s = adv_s - state.c[i][up] * (cells.zeta[i][b] - cells.zeta[i][a]);
        }
        let jf = -qz * gphi;
        let pc = cut_f * quad;
        let pf = cut_f * kappa * gtheta * gtheta * cells.inv_theta[a] * cells.inv_theta[b];
        set(&mut diffusive.qe, axis, f, qe);
        set(&mut advective.qe, axis, f, u * state.e[up]);
        for i in 0..l {
            set(&mut diffusive.qc[i], axis, f, q[i]);
            set(&mut advective.qc[i], axis, f, u * state.c[i][up]);
        }
        set(&mut charge_up, axis, f, q_up);
        set(&mut grad_phi, axis, f, gphi);
        for k in [a, b] {
            joule[k] = joule[k] + T::half() * jf;
            p_cross[k] = p_cross[k] + T::half() * pc;
            p_fourier[k] = p_fourier[k] + T::half() * pf;
        }
        advection_entropy = advection_entropy + w * u * adv_s / h;
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut reaction = vec![vec![T::zero(); n]; l];
    let mut p_react = vec![T::zero(); n];
    let mut c = vec![T::zero(); l];
    let mut zk = vec![T::zero(); l];
    for k in 0..n {
        for i in 0..l {
            c[i] = state.c[i][k];
            zk[i] = cells.zeta[i][k];
        }
        let ck = cells.cut[k];
        let r = model.reaction(&c, cells.theta[k], &zk);
        for i in 0..l {
            reaction[i][k] = ck * r[i];
        }
        p_react[k] = ck * model.reaction_production(&c, cells.theta[k], &zk);
    }

    let faces = grid.boundary_faces();
    let mut bqc = Vec::with_capacity(faces.len());
    let mut bqe = Vec::with_capacity(faces.len());
    let mut boundary_entropy = T::zero();
    let mut boundary_production = T::zero();
    for (bf, data) in faces.iter().zip(bc.faces()) {
        let k = bf.cell;
        for i in 0..l {
            c[i] = state.c[i][k];
        }
        let theta = cells.theta[k];
        let ck = cells.cut[k];
        let inv_g = T::one() / data.theta_g;
        for j in 0..l {
            x[j] = cells.zeta[j][k] - data.zeta_g[j] + z[j] * inv_g * (phi[k] - data.phi_g);
        }
        model.boundary_matrix_into(data.d, &c, theta, &mut mat);
        let mut head = T::zero();
        let mut qv = vec![T::zero(); l];
        for i in 0..l - 1 {
            qv[i] = ck * (0..l).fold(T::zero(), |s, j| s + mat[i * l + j] * x[j]);
            head = head + qv[i];
        }
        qv[l - 1] = -head;
        let kg = model.boundary_conductivity(data.kappa_bar, &c, theta);
        let jump = cells.inv_theta[k] - inv_g;
        let qe = -ck * kg * jump;
        let zq = (0..l).fold(T::zero(), |s, i| s + cells.zeta[i][k] * qv[i]);
        boundary_entropy = boundary_entropy + bf.area * (zq - qe * cells.inv_theta[k]);
        boundary_production = boundary_production + bf.area * (dot(&x, &qv) + ck * kg * jump * jump);
        bqc.push(qv);
        bqe.push(qe);
    }

    Ok(TransportFluxes {
        cells,
        diffusive,
        advective,
        boundary: BoundaryFlux { qc: bqc, qe: bqe },
        charge_up,
        grad_phi,
        joule,
        reaction,
        p_cross,
        p_fourier,
        p_react,
        advection_entropy,
        boundary_entropy,
        boundary_production,
    })
}

#[inline]
fn set<T>(ff: &mut FaceField<T>, axis: Axis, f: usize, value: T) {
    match axis {
        Axis::X => ff.x[f] = value,
        Axis::Y => ff.y[f] = value,
    }
}

/// Species fluxes `q⃗_c` built with `state.phi`.
pub fn species_fluxes<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<Vec<FaceField<T>>> {
    Ok(assemble(grid, state, &state.phi, model, bc, cut)?.diffusive.qc)
}

pub fn heat_flux<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<FaceField<T>> {
    Ok(assemble(grid, state, &state.phi, model, bc, cut)?.diffusive.qe)
}

/// Outward boundary fluxes `(q⃗_cΓ, q_eΓ)` evaluated with cell traces.
pub fn boundary_fluxes<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<BoundaryFlux<T>> {
    Ok(assemble(grid, state, &state.phi, model, bc, cut)?.boundary)
}

/// Sums advective and diffusive face fluxes and puts the boundary fluxes on
/// the boundary faces, oriented along the face axis.
fn total_flux<T: Scalar>(
    grid: &Grid<T>,
    adv: &FaceField<T>,
    dif: &FaceField<T>,
    boundary: impl Fn(usize) -> T,
) -> FaceField<T> {
    let mut out = adv.clone();
    out.axpy(T::one(), dif);
    for (b, bf) in grid.boundary_faces().iter().enumerate() {
        set(&mut out, bf.axis, bf.face, bf.outward * boundary(b));
    }
    out
}

fn check_dt<T: Scalar>(dt: T) -> Result<()> {
    if dt > T::zero() && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("time step {dt} must be positive")))
    }
}

/// `c_i + dt(r_i − div(c_i v + q_c^i))`.
pub fn step_species<T: Scalar>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    fluxes: &TransportFluxes<T>,
    cut: &CutoffParams<T>,
    dt: T,
) -> Result<Vec<Vec<T>>> {
    check_dt(dt)?;
    let mut out = Vec::with_capacity(state.species());
    for (i, ci) in state.c.iter().enumerate() {
        let flux = total_flux(
            grid,
            &fluxes.advective.qc[i],
            &fluxes.diffusive.qc[i],
            |b| fluxes.boundary.qc[b][i],
        );
        let div = grid.divergence(&flux)?;
        let next: Vec<T> = ci
            .iter()
            .zip(&div)
            .zip(&fluxes.reaction[i])
            .map(|((&c, &d), &r)| c + dt * (r - d))
            .collect();
        if let Some(k) = next.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            let hint = if cut.is_off() {
                "enable cut-offs (cutoff.delta > 0) or entropy regularization (cutoff.epsilon > 0)"
            } else {
                "reduce the time step"
            };
            return Err(Error::Positivity(format!(
                "c[{i}] = {} at cell {k} after the species update; {hint}",
                next[k]
            )));
        }
        out.push(next);
    }
    Ok(out)
}

/// `e + dt(S:D − div(e v + q_e) − z⃗·(q⃗_c ∇φ))`. With `δ > 0` a
/// nonpositive result is clamped to `δ`; the second value counts clamps.
pub fn step_internal_energy<T: Scalar>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    fluxes: &TransportFluxes<T>,
    dissipation: &[T],
    cut: &CutoffParams<T>,
    dt: T,
) -> Result<(Vec<T>, usize)> {
    check_dt(dt)?;
    if dissipation.len() != grid.n_cells() {
        return Err(Error::Shape("dissipation field length differs from cell count".into()));
    }
    let flux = total_flux(grid, &fluxes.advective.qe, &fluxes.diffusive.qe, |b| fluxes.boundary.qe[b]);
    let div = grid.divergence(&flux)?;
    let mut clamped = 0;
    let mut out = Vec::with_capacity(grid.n_cells());
    for k in 0..grid.n_cells() {
        let e = state.e[k] + dt * (dissipation[k] + fluxes.joule[k] - div[k]);
        if !e.is_finite() {
            return Err(Error::Positivity(format!("e = {e} at cell {k}")));
        }
        if e > T::zero() {
            out.push(e);
        } else if cut.delta > T::zero() {
            clamped += 1;
            out.push(cut.delta);
        } else {
            return Err(Error::Positivity(format!(
                "e = {e} at cell {k} after the energy update; enable cut-offs (cutoff.delta > 0) or reduce the time step"
            )));
        }
    }
    Ok((out, clamped))
}

/// Largest effective diffusivity of the explicit transport update.
pub fn max_diffusivity<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<T> {
    let cells = CellFields::new(state, cut)?;
    let l = state.species();
    let mut c = vec![T::zero(); l];
    let mut dmax = T::zero();
    let slope = |c: &[T]| c.iter().fold(T::zero(), |m, &ci| m.max(zeta_slope(ci, cut.epsilon)));
    for k in 0..grid.n_cells() {
        for i in 0..l {
            c[i] = state.c[i][k];
        }
        let theta = cells.theta[k];
        let species = model.mobility_scalar(theta)? * slope(&c);
        let heat = model.heat_conductivity(&c, theta)? * theta_slope(state.e[k]);
        dmax = dmax.max(cells.cut[k] * species.max(heat));
    }
    for (bf, data) in grid.boundary_faces().iter().zip(bc.faces()) {
        let k = bf.cell;
        for i in 0..l {
            c[i] = state.c[i][k];
        }
        let h = grid.spacing(bf.axis);
        let theta = cells.theta[k];
        let species = data.d * h * slope(&c);
        let kg = model.boundary_conductivity(data.kappa_bar, &c, theta);
        let heat = kg * h * theta_slope(state.e[k]) / (theta * theta);
        dmax = dmax.max(cells.cut[k] * species.max(heat));
    }
    Ok(dmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{BoundaryCoeffs, MaterialModel, MaterialParams};
    use crate::grid::Segment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(grid: &Grid<f64>, seed: u64) -> FieldState<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = FieldState::uniform(grid, 3);
        for k in 0..grid.n_cells() {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            for i in 0..3 {
                s.c[i][k] = raw[i] / total;
            }
            s.e[k] = rng.gen_range(0.3..3.0);
            s.phi[k] = rng.gen_range(-1.0..1.0);
        }
        s
    }

    fn setup(m_amp: f64) -> (Grid<f64>, MaterialModel<f64>, BoundarySpec<f64>) {
        let grid = Grid::new_2d(6, 5, 1.0, 0.8).unwrap();
        let model = MaterialModel::new(MaterialParams { m_amp, rho0: 0.2, ..Default::default() }).unwrap();
        let bc = BoundarySpec::uniform(&grid, BoundaryCoeffs::wall(3)).unwrap();
        (grid, model, bc)
    }

    #[test]
    fn cutoff_shape() {
        let d = 0.1f64;
        assert_eq!(cutoff(0.05, d), 0.0);
        assert_eq!(cutoff(0.1, d), 0.0);
        assert!((cutoff(0.15, d) - 0.5).abs() < 1e-15);
        assert_eq!(cutoff(0.2, d), 1.0);
        assert_eq!(cutoff(10.0, d), 1.0);
        assert!((cutoff(15.0, d) - 0.5).abs() < 1e-15);
        assert_eq!(cutoff(25.0, d), 0.0);
        assert_eq!(cutoff(1e-300, 0.0), 1.0);
        assert!(CutoffParams::new(0.5, 0.0).is_err());
        assert!(CutoffParams::new(0.1, -1.0).is_err());
    }

    #[test]
    fn uniform_state_has_no_flux() {
        let (grid, model, bc) = setup(0.05);
        let mut s = FieldState::uniform(&grid, 3);
        s.phi.iter_mut().for_each(|p| *p = 0.3);
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
        assert!(fl.diffusive.qc.iter().all(|q| q.max_abs() == 0.0));
        assert_eq!(fl.diffusive.qe.max_abs(), 0.0);
    }

    #[test]
    fn species_fluxes_sum_to_zero() {
        let (grid, model, bc) = setup(0.05);
        for seed in 0..20 {
            let s = random_state(&grid, seed);
            let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
            assert!(fl.diffusive.max_species_sum() <= 1e-13);
        }
    }

    #[test]
    fn cut_cells_block_their_faces() {
        let (grid, model, bc) = setup(0.05);
        let mut s = random_state(&grid, 3);
        s.e[7] = 0.01;
        let cut = CutoffParams::new(0.05, 0.0).unwrap();
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
        assert_eq!(fl.cells.cut[7], 0.0);
        let (i, j) = (7 % grid.nx(), 7 / grid.nx());
        for f in [grid.xface(i, j), grid.xface(i + 1, j)] {
            assert_eq!(fl.diffusive.qe.x[f], 0.0);
            assert!(fl.diffusive.qc.iter().all(|q| q.x[f] == 0.0));
        }
    }

    #[test]
    fn pure_fourier_without_thermo_coupling() {
        let (grid, model, bc) = setup(0.0);
        let mut s = random_state(&grid, 4);
        s.phi.iter_mut().for_each(|p| *p = 0.0);
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
        grid.for_each_interior_face(|axis, f, a, b| {
            let h = grid.spacing(axis);
            let (ta, tb) = (theta_of_e(s.e[a]).unwrap(), theta_of_e(s.e[b]).unwrap());
            let tf = 2.0 / (1.0 / ta + 1.0 / tb);
            let kappa = model.heat_conductivity(&[0.0; 3], tf).unwrap();
            let expect = -kappa * (tb - ta) / h;
            let got = if axis == Axis::X { fl.diffusive.qe.x[f] } else { fl.diffusive.qe.y[f] };
            assert!((got - expect).abs() <= 1e-13 * expect.abs().max(1.0));
        });
    }

    #[test]
    fn dufour_coupling_moves_heat() {
        let (grid, model, bc) = setup(0.05);
        let mut s = FieldState::uniform(&grid, 3);
        for k in 0..grid.n_cells() {
            let (x, _) = grid.cell_center(k % grid.nx(), k / grid.nx());
            s.c[0][k] = 0.25 + 0.1 * x;
            s.c[1][k] = 0.5 - 0.1 * x;
        }
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
        assert!(fl.diffusive.qe.max_abs() > 1e-4);
    }

    #[test]
    fn reservoir_equilibrium_and_heat_sign() {
        let grid = Grid::new_1d(8, 1.0).unwrap();
        let model = MaterialModel::new(MaterialParams::default()).unwrap();
        let s = FieldState::uniform(&grid, 3);
        let mut bc = BoundaryCoeffs::wall(3);
        bc.d = 2.0;
        bc.kappa_bar = 1.5;
        bc.zeta_g = vec![(1.0f64 / 3.0).ln(); 3];
        bc.theta_g = theta_of_e(1.0).unwrap();
        bc.phi_g = 0.0;
        let spec = BoundarySpec::uniform(&grid, bc.clone()).unwrap();
        let fl = boundary_fluxes(&grid, &s, &model, &spec, &CutoffParams::default()).unwrap();
        assert!(fl.qc.iter().flatten().all(|&q| q.abs() < 1e-15));
        assert!(fl.qe.iter().all(|&q| q.abs() < 1e-15));

        bc.theta_g = 5.0;
        bc.zeta_g = vec![-0.5, -1.0, -2.0];
        let spec = BoundarySpec::new(&grid, vec![
            (Segment::Left, bc.clone(), Default::default()),
            (Segment::Right, bc, Default::default()),
        ])
        .unwrap();
        let fl = boundary_fluxes(&grid, &s, &model, &spec, &CutoffParams::default()).unwrap();
        assert!(fl.qe.iter().all(|&q| q < 0.0));
        for q in &fl.qc {
            assert!(q.iter().sum::<f64>().abs() <= 1e-15);
        }
    }

    #[test]
    fn species_step_keeps_simplex_and_constants() {
        let (grid, model, bc) = setup(0.05);
        let s = FieldState::uniform(&grid, 3);
        let cut = CutoffParams::default();
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
        assert_eq!(step_species(&grid, &s, &fl, &cut, 1e-3).unwrap(), s.c);
        for seed in 0..10 {
            let s = random_state(&grid, seed);
            let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
            let c = step_species(&grid, &s, &fl, &cut, 1e-4).unwrap();
            for k in 0..grid.n_cells() {
                let before = s.c[0][k] + s.c[1][k] + s.c[2][k];
                let after = c[0][k] + c[1][k] + c[2][k];
                assert!((after - before).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn positivity_failure_names_the_remedy() {
        let (grid, model, bc) = setup(0.0);
        let mut s = random_state(&grid, 9);
        s.c[0][0] = 1e-9;
        s.c[2][0] = 1.0 - 1e-9 - s.c[1][0];
        let cut = CutoffParams::default();
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
        match step_species(&grid, &s, &fl, &cut, 1.0) {
            Err(Error::Positivity(msg)) => assert!(msg.contains("cutoff.delta")),
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn insulated_energy_without_sources_is_unchanged() {
        let (grid, model, bc) = setup(0.05);
        let mut s = FieldState::uniform(&grid, 3);
        s.e.iter_mut().for_each(|e| *e = 2.0);
        let cut = CutoffParams::default();
        let fl = assemble(&grid, &s, &s.phi, &model, &bc, &cut).unwrap();
        let zero = vec![0.0; grid.n_cells()];
        let (e, clamped) = step_internal_energy(&grid, &s, &fl, &zero, &cut, 1e-3).unwrap();
        assert_eq!(e, s.e);
        assert_eq!(clamped, 0);
    }

    #[test]
    fn productions_are_nonnegative() {
        let (grid, model, bc) = setup(0.05);
        for seed in 0..10 {
            let s = random_state(&grid, seed);
            let fl = assemble(&grid, &s, &s.phi, &model, &bc, &CutoffParams::default()).unwrap();
            for k in 0..grid.n_cells() {
                assert!(fl.p_cross[k] >= 0.0 && fl.p_fourier[k] >= 0.0 && fl.p_react[k] >= 0.0);
            }
        }
    }
}
