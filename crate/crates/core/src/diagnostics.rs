//! Energies, entropy, balance residuals of every discrete identity, entropy
//! production breakdown and a-priori monitors.

use std::fmt::Write as _;

use crate::constitutive::{entropy_c_regularized, entropy_e, theta_of_e, zeta_regularized, MaterialLaws};
use crate::error::{Error, Result};
use crate::grid::{project_ell, BoundarySpec, FieldState, Grid};
use crate::momentum::dissipation_field;
use crate::scalar::{dot, Scalar};
use crate::transport::{assemble, CutoffParams, TransportFluxes};

/// Fixed column order of the diagnostics time series.
pub const CSV_COLUMNS: [&str; 20] = [
    "t",
    "E_total",
    "E_kin",
    "E_int",
    "E_elec",
    "S_total",
    "min_c",
    "min_e",
    "simplex_drift",
    "res_mass",
    "res_charge",
    "res_kinetic",
    "res_internal",
    "res_total_energy",
    "res_entropy",
    "P_visc",
    "P_react",
    "P_cross",
    "P_fourier",
    "picard_iters",
];

/// Energies, entropy and admissibility measures of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSummary<T> {
    pub t: T,
    pub e_total: T,
    pub e_kin: T,
    pub e_int: T,
    pub e_elec: T,
    /// `∫ s_e(e) + s_c(c⃗) + ε Σ ln c_i`; the last term vanishes for `ε = 0`.
    pub s_total: T,
    pub min_c: T,
    pub min_e: T,
    pub simplex_drift: T,
}

pub fn summarize<T: Scalar>(grid: &Grid<T>, state: &FieldState<T>, cut: &CutoffParams<T>) -> Result<StateSummary<T>> {
    state.check_shape(grid)?;
    state.check_admissible()?;
    let e_kin = T::half() * grid.face_inner(&state.v, &state.v);
    let e_int = grid.integral_omega(&state.e);
    let g = grid.gradient(&state.phi)?;
    let e_elec = T::half() * grid.face_inner(&g, &g);
    let mut c = vec![T::zero(); state.species()];
    let mut s = Vec::with_capacity(grid.n_cells());
    for k in 0..grid.n_cells() {
        for (ci, field) in c.iter_mut().zip(&state.c) {
            *ci = field[k];
        }
        s.push(entropy_e(state.e[k])? + entropy_c_regularized(&c, cut.epsilon)?);
    }
    Ok(StateSummary {
        t: state.t,
        e_total: e_kin + e_int + e_elec,
        e_kin,
        e_int,
        e_elec,
        s_total: grid.integral_omega(&s),
        min_c: state.min_c(),
        min_e: state.min_e(),
        simplex_drift: state.simplex_drift(),
    })
}

/// Per-cell entropy productions and their integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionBreakdown<T> {
    pub visc: Vec<T>,
    pub react: Vec<T>,
    pub cross: Vec<T>,
    pub fourier: Vec<T>,
    pub totals: Productions<T>,
}

/// Integrated entropy productions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Productions<T> {
    pub visc: T,
    pub react: T,
    pub cross: T,
    pub fourier: T,
    /// Nonnegative boundary exchange dissipation.
    pub boundary: T,
    /// Smallest per-cell value of any of the four bulk terms.
    pub min_cell: T,
}

impl<T: Scalar> ProductionBreakdown<T> {
    /// Builds the breakdown from recorded fluxes and the dissipation field.
    pub fn from_fluxes(grid: &Grid<T>, fluxes: &TransportFluxes<T>, dissipation: &[T]) -> Self {
        let visc: Vec<T> = dissipation
            .iter()
            .zip(&fluxes.cells.inv_theta)
            .map(|(&d, &it)| d * it)
            .collect();
        let min_of = |v: &[T]| v.iter().fold(T::infinity(), |m, &x| m.min(x));
        let min_cell = min_of(&visc)
            .min(min_of(&fluxes.p_react))
            .min(min_of(&fluxes.p_cross))
            .min(min_of(&fluxes.p_fourier));
        let totals = Productions {
            visc: grid.integral_omega(&visc),
            react: grid.integral_omega(&fluxes.p_react),
            cross: grid.integral_omega(&fluxes.p_cross),
            fourier: grid.integral_omega(&fluxes.p_fourier),
            boundary: fluxes.boundary_production,
            min_cell,
        };
        ProductionBreakdown {
            visc,
            react: fluxes.p_react.clone(),
            cross: fluxes.p_cross.clone(),
            fourier: fluxes.p_fourier.clone(),
            totals,
        }
    }
}

impl<T: Scalar> Productions<T> {
    pub fn bulk(&self) -> T {
        self.visc + self.react + self.cross + self.fourier
    }
}

/// Entropy production of a state with its own potential and velocity.
pub fn entropy_production<T: Scalar, M: MaterialLaws<T>>(
    grid: &Grid<T>,
    state: &FieldState<T>,
    model: &M,
    bc: &BoundarySpec<T>,
    cut: &CutoffParams<T>,
) -> Result<ProductionBreakdown<T>> {
    let fluxes = assemble(grid, state, &state.phi, model, bc, cut)?;
    let diss = dissipation_field(grid, state, model, &fluxes.cells)?;
    Ok(ProductionBreakdown::from_fluxes(grid, &fluxes, &diss))
}

/// What the stepper used during one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub dt: T,
    pub fluxes: TransportFluxes<T>,
    /// Potential the fluxes were built with (last coupling iterate).
    pub phi_used: Vec<T>,
    pub dissipation: Vec<T>,
    pub friction: T,
    pub lorentz_work: T,
    /// Outward normal derivative of `φ` on boundary faces, before and after.
    pub boundary_gradient_prev: Vec<T>,
    pub boundary_gradient_next: Vec<T>,
    pub picard_iters: usize,
    pub picard_trace: Vec<f64>,
    /// Cells whose energy was clamped to `δ`.
    pub energy_clamps: usize,
}

/// Signed step residuals `LHS − RHS` of the discrete balances.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals<T> {
    /// Per species: `Δ∫c_i + dt Σ_b A q_cΓ,i − dt ∫r_i`.
    pub species: Vec<T>,
    /// Same for `Q = z⃗·c⃗`, evaluated independently of `species`.
    pub charge: T,
    /// `ΔE_kin + dt(∫S:D + ∮γ|v_τ|² + ∫Q∇φ·v)`.
    pub kinetic: T,
    /// `Δ∫e + dt Σ_b A q_eΓ − dt ∫(S:D − z⃗·q⃗_c∇φ)`.
    pub internal: T,
    /// `ΔE + dt Σ_b A (q_eΓ + φ z⃗·q⃗_cΓ) + dt ∮γ|v_τ|² − Σ_b A φ (∂_νφⁿ⁺¹ − ∂_νφⁿ)`.
    pub total_energy: T,
    /// `ΔS − dt(ΣP + advective exchange + boundary entropy flux)`.
    pub entropy: T,
}

impl<T: Scalar> Residuals<T> {
    pub fn zero(species: usize) -> Self {
        Residuals {
            species: vec![T::zero(); species],
            charge: T::zero(),
            kinetic: T::zero(),
            internal: T::zero(),
            total_energy: T::zero(),
            entropy: T::zero(),
        }
    }

    /// `max_i |species_i|`.
    pub fn mass(&self) -> T {
        self.species.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// `z⃗·species`, which must agree with `charge` to round-off.
    pub fn charge_from_species(&self, z: &[T]) -> T {
        dot(z, &self.species)
    }
}

/// Residuals of the step `prev → next` from the recorded fluxes.
pub fn balance_residuals<T: Scalar>(
    grid: &Grid<T>,
    prev: &FieldState<T>,
    next: &FieldState<T>,
    record: Option<&StepRecord<T>>,
    z: &[T],
    cut: &CutoffParams<T>,
) -> Result<Residuals<T>> {
    let rec = record.ok_or_else(|| Error::Missing("flux history for the step".into()))?;
    let l = prev.species();
    if z.len() != l || next.species() != l {
        return Err(Error::Shape("charge vector and states disagree on species count".into()));
    }
    let dt = rec.dt;
    let fl = &rec.fluxes;
    let faces = grid.boundary_faces();
    if fl.boundary.qc.len() != faces.len() || rec.boundary_gradient_next.len() != faces.len() {
        return Err(Error::Shape("recorded boundary data does not match the grid".into()));
    }

    let boundary_out = |i: usize| {
        faces
            .iter()
            .zip(&fl.boundary.qc)
            .fold(T::zero(), |acc, (bf, q)| acc + bf.area * q[i])
    };
    let mut species = Vec::with_capacity(l);
    for i in 0..l {
        let delta = grid.integral_omega(&next.c[i]) - grid.integral_omega(&prev.c[i]);
        let source = grid.integral_omega(&fl.reaction[i]);
        species.push(delta + dt * boundary_out(i) - dt * source);
    }

    let charge_of = |s: &FieldState<T>| -> Vec<T> {
        (0..grid.n_cells())
            .map(|k| (0..l).fold(T::zero(), |acc, i| acc + z[i] * s.c[i][k]))
            .collect()
    };
    let q_out = faces
        .iter()
        .zip(&fl.boundary.qc)
        .fold(T::zero(), |acc, (bf, q)| acc + bf.area * dot(z, q));
    let q_source: Vec<T> = (0..grid.n_cells())
        .map(|k| (0..l).fold(T::zero(), |acc, i| acc + z[i] * fl.reaction[i][k]))
        .collect();
    let charge = grid.integral_omega(&charge_of(next)) - grid.integral_omega(&charge_of(prev)) + dt * q_out
        - dt * grid.integral_omega(&q_source);

    let a = summarize(grid, prev, cut)?;
    let b = summarize(grid, next, cut)?;
    let diss = grid.integral_omega(&rec.dissipation);
    let kinetic = b.e_kin - a.e_kin + dt * (diss + rec.friction - rec.lorentz_work);

    let e_out = faces
        .iter()
        .zip(&fl.boundary.qe)
        .fold(T::zero(), |acc, (bf, &q)| acc + bf.area * q);
    let joule = grid.integral_omega(&fl.joule);
    let internal = b.e_int - a.e_int + dt * e_out - dt * (diss + joule);

    let mut electric_out = T::zero();
    let mut potential_work = T::zero();
    for (k, bf) in faces.iter().enumerate() {
        let phi = next.phi[bf.cell];
        electric_out = electric_out + bf.area * phi * dot(z, &fl.boundary.qc[k]);
        potential_work = potential_work
            + bf.area * phi * (rec.boundary_gradient_next[k] - rec.boundary_gradient_prev[k]);
    }
    let total_energy = b.e_total - a.e_total + dt * (e_out + electric_out + rec.friction) - potential_work;

    let prod = ProductionBreakdown::from_fluxes(grid, fl, &rec.dissipation).totals;
    let entropy = b.s_total
        - a.s_total
        - dt * (prod.bulk() + fl.advection_entropy + fl.boundary_entropy);

    Ok(Residuals { species, charge, kinetic, internal, total_energy, entropy })
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport<T> {
    pub summary: StateSummary<T>,
    pub residuals: Residuals<T>,
    pub productions: Productions<T>,
    pub picard_iters: usize,
}

impl<T: Scalar> DiagnosticsReport<T> {
    /// Report of the initial state: productions of the state, zero residuals.
    pub fn initial<M: MaterialLaws<T>>(
        grid: &Grid<T>,
        state: &FieldState<T>,
        model: &M,
        bc: &BoundarySpec<T>,
        cut: &CutoffParams<T>,
    ) -> Result<Self> {
        Ok(DiagnosticsReport {
            summary: summarize(grid, state, cut)?,
            residuals: Residuals::zero(state.species()),
            productions: entropy_production(grid, state, model, bc, cut)?.totals,
            picard_iters: 0,
        })
    }

    pub fn after_step(
        grid: &Grid<T>,
        prev: &FieldState<T>,
        next: &FieldState<T>,
        record: &StepRecord<T>,
        z: &[T],
        cut: &CutoffParams<T>,
    ) -> Result<Self> {
        Ok(DiagnosticsReport {
            summary: summarize(grid, next, cut)?,
            residuals: balance_residuals(grid, prev, next, Some(record), z, cut)?,
            productions: ProductionBreakdown::from_fluxes(grid, &record.fluxes, &record.dissipation).totals,
            picard_iters: record.picard_iters,
        })
    }

    /// Values in [`CSV_COLUMNS`] order (`picard_iters` last).
    pub fn values(&self) -> [f64; 19] {
        let s = &self.summary;
        let r = &self.residuals;
        let p = &self.productions;
        [
            s.t, s.e_total, s.e_kin, s.e_int, s.e_elec, s.s_total, s.min_c, s.min_e, s.simplex_drift,
            r.mass(), r.charge.abs(), r.kinetic.abs(), r.internal.abs(), r.total_energy.abs(),
            r.entropy.abs(), p.visc, p.react, p.cross, p.fourier,
        ]
        .map(|x| x.as_f64())
    }

    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut line = String::new();
        for v in self.values() {
            let _ = write!(line, "{v:.16e},");
        }
        let _ = write!(line, "{}", self.picard_iters);
        line
    }
}

/// Running sup/integral record of the a-priori quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriMonitor<T> {
    pub sup_v_l2: T,
    pub sup_e_l1: T,
    pub sup_theta_l1: T,
    pub int_visc: T,
    pub int_cross: T,
    pub int_grad_ln_theta: T,
    pub int_grad_theta_beta: T,
    pub int_boundary: T,
    /// `max ζ_i` over space and time.
    pub max_zeta: T,
    /// `max |ζ⃗| c_i`.
    pub max_zeta_times_c: T,
    /// `max |ζ⃗| / (1 + |P_ℓ ζ⃗|)`.
    pub zeta_ratio: T,
    /// `2 max |v_face|²`, a bound on the squared speed the convection
    /// truncation sees.
    pub speed_sq_bound: T,
}

impl<T: Scalar> Default for AprioriMonitor<T> {
    fn default() -> Self {
        AprioriMonitor {
            sup_v_l2: T::zero(),
            sup_e_l1: T::zero(),
            sup_theta_l1: T::zero(),
            int_visc: T::zero(),
            int_cross: T::zero(),
            int_grad_ln_theta: T::zero(),
            int_grad_theta_beta: T::zero(),
            int_boundary: T::zero(),
            max_zeta: T::neg_infinity(),
            max_zeta_times_c: T::zero(),
            zeta_ratio: T::zero(),
            speed_sq_bound: T::zero(),
        }
    }
}

impl<T: Scalar> AprioriMonitor<T> {
    /// Folds in the sup-in-time quantities of `state`.
    pub fn observe_state(&mut self, grid: &Grid<T>, state: &FieldState<T>, cut: &CutoffParams<T>) -> Result<()> {
        state.check_admissible()?;
        self.sup_v_l2 = self.sup_v_l2.max(grid.face_inner(&state.v, &state.v).sqrt());
        let vmax = state.max_speed();
        self.speed_sq_bound = self.speed_sq_bound.max(T::two() * vmax * vmax);
        self.sup_e_l1 = self.sup_e_l1.max(grid.integral_omega(&state.e));
        let mut theta = Vec::with_capacity(grid.n_cells());
        let mut c = vec![T::zero(); state.species()];
        for k in 0..grid.n_cells() {
            theta.push(theta_of_e(state.e[k])?);
            for (ci, f) in c.iter_mut().zip(&state.c) {
                *ci = f[k];
            }
            let zeta = zeta_regularized(&c, cut.epsilon)?;
            let zn = dot(&zeta, &zeta).sqrt();
            let pz = project_ell(&zeta);
            let pn = dot(&pz, &pz).sqrt();
            for (&zi, &ci) in zeta.iter().zip(&c) {
                self.max_zeta = self.max_zeta.max(zi);
                self.max_zeta_times_c = self.max_zeta_times_c.max(zn * ci);
            }
            self.zeta_ratio = self.zeta_ratio.max(zn / (T::one() + pn));
        }
        self.sup_theta_l1 = self.sup_theta_l1.max(grid.integral_omega(&theta));
        Ok(())
    }

    /// Adds the time integrals of one step.
    pub fn observe_step(&mut self, grid: &Grid<T>, record: &StepRecord<T>, beta: T) -> Result<()> {
        let dt = record.dt;
        let prod = ProductionBreakdown::from_fluxes(grid, &record.fluxes, &record.dissipation).totals;
        self.int_visc = self.int_visc + dt * prod.visc;
        self.int_cross = self.int_cross + dt * prod.cross;
        self.int_boundary = self.int_boundary + dt * prod.boundary;
        let theta = &record.fluxes.cells.theta;
        let ln: Vec<T> = theta.iter().map(|t| t.ln()).collect();
        let pw: Vec<T> = theta.iter().map(|t| t.powf(-beta / T::two())).collect();
        let g1 = grid.gradient(&ln)?;
        let g2 = grid.gradient(&pw)?;
        self.int_grad_ln_theta = self.int_grad_ln_theta + dt * grid.face_inner(&g1, &g1);
        self.int_grad_theta_beta = self.int_grad_theta_beta + dt * grid.face_inner(&g2, &g2);
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        [
            self.sup_v_l2,
            self.sup_e_l1,
            self.sup_theta_l1,
            self.int_visc,
            self.int_cross,
            self.int_grad_ln_theta,
            self.int_grad_theta_beta,
            self.int_boundary,
            self.max_zeta,
            self.max_zeta_times_c,
            self.zeta_ratio,
            self.speed_sq_bound,
        ]
        .iter()
        .all(|x| x.is_finite())
    }

    /// `(name, value)` pairs for printing or CSV output.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("sup_v_l2", self.sup_v_l2.as_f64()),
            ("sup_e_l1", self.sup_e_l1.as_f64()),
            ("sup_theta_l1", self.sup_theta_l1.as_f64()),
            ("int_visc_over_theta", self.int_visc.as_f64()),
            ("int_mobility_form", self.int_cross.as_f64()),
            ("int_grad_ln_theta_sq", self.int_grad_ln_theta.as_f64()),
            ("int_grad_theta_pow_sq", self.int_grad_theta_beta.as_f64()),
            ("int_boundary_dissipation", self.int_boundary.as_f64()),
            ("max_zeta", self.max_zeta.as_f64()),
            ("speed_sq_bound", self.speed_sq_bound.as_f64()),
            ("max_zeta_norm_times_c", self.max_zeta_times_c.as_f64()),
            ("zeta_norm_ratio", self.zeta_ratio.as_f64()),
        ]
    }
}

/// Sum of absolute residuals over a run, per column.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccumulatedResiduals<T> {
    pub mass: T,
    pub charge: T,
    pub kinetic: T,
    pub internal: T,
    pub total_energy: T,
    pub entropy: T,
}

impl<T: Scalar> AccumulatedResiduals<T> {
    pub fn add(&mut self, r: &Residuals<T>) {
        self.mass = self.mass + r.mass();
        self.charge = self.charge + r.charge.abs();
        self.kinetic = self.kinetic + r.kinetic.abs();
        self.internal = self.internal + r.internal.abs();
        self.total_energy = self.total_energy + r.total_energy.abs();
        self.entropy = self.entropy + r.entropy.abs();
    }
}

/// A printable table that is also written as CSV.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<const N: usize>(columns: [&str; N]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for Table {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut width: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for r in &self.rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&width)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(f, "{}", line(&self.columns))?;
        for r in &self.rows {
            writeln!(f, "{}", line(r))?;
        }
        Ok(())
    }
}
