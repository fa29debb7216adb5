//! Coupled time stepping with a fixed-point iteration on the potential,
//! full runs, and parameter/refinement studies.

use crate::constitutive::{MaterialLaws, MaterialModel};
use crate::diagnostics::{AccumulatedResiduals, AprioriMonitor, DiagnosticsReport, StepRecord, Table};
use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, FieldState, Grid};
use crate::momentum::{max_viscosity, step_momentum, ConvectionTruncation};
use crate::poisson::{LinearSolveSettings, PotentialSolver, PressureSolver};
use crate::scalar::Scalar;
use crate::transport::{assemble, max_diffusivity, step_internal_energy, step_species, CellFields, CutoffParams};

/// Fraction of the stability bound the time step may use.
pub const CFL_SAFETY: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings<T> {
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for PicardSettings<T> {
    fn default() -> Self {
        PicardSettings { tolerance: T::of(1e-8), max_iterations: 50 }
    }
}

/// Output cadence in steps; `0` disables snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSettings {
    pub every: usize,
    pub snapshot_every: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { every: 1, snapshot_every: 0 }
    }
}

/// Everything that defines a simulation apart from its initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub grid: Grid<T>,
    pub model: MaterialModel<T>,
    pub bc: BoundarySpec<T>,
    pub cut: CutoffParams<T>,
    pub trunc: ConvectionTruncation<T>,
    pub dt: T,
    pub t_end: T,
    pub picard: PicardSettings<T>,
    pub solver: LinearSolveSettings<T>,
    pub scenario: String,
    pub output: OutputSettings,
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::Config(format!("time.dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("time.t_end = {} must be nonnegative", self.t_end)));
        }
        if !(self.picard.tolerance > T::zero()) || self.picard.max_iterations == 0 {
            return Err(Error::Config("picard tolerance and iteration cap must be positive".into()));
        }
        if self.output.every == 0 {
            return Err(Error::Config("output.every must be at least 1".into()));
        }
        self.cut.validate()?;
        self.solver.validate()?;
        if self.bc.species() != self.model.species() {
            return Err(Error::Config(format!(
                "boundary data has {} species, the model {}",
                self.bc.species(),
                self.model.species()
            )));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// A configuration together with its initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub config: SimConfig<T>,
    pub initial: FieldState<T>,
}

/// Linear solvers reused across steps.
#[derive(Debug, Clone)]
pub struct Solvers<T> {
    pub potential: PotentialSolver<T>,
    pub pressure: PressureSolver<T>,
}

impl<T: Scalar> Solvers<T> {
    pub fn new(config: &SimConfig<T>) -> Result<Self> {
        Ok(Solvers {
            potential: PotentialSolver::new(&config.grid, &config.bc, config.solver)?,
            pressure: PressureSolver::new(&config.grid, config.solver)?,
        })
    }
}

fn charge_density<T: Scalar>(z: &[T], c: &[Vec<T>]) -> Vec<T> {
    let n = c[0].len();
    (0..n)
        .map(|k| z.iter().zip(c).fold(T::zero(), |acc, (&zi, ci)| acc + zi * ci[k]))
        .collect()
}

/// Stability bound `0.4 min(h / |v|, h² / (2 D))` for the explicit update.
pub fn stable_dt<T: Scalar>(config: &SimConfig<T>, state: &FieldState<T>) -> Result<T> {
    let g = &config.grid;
    let h = if g.dim() == 2 { g.hx().min(g.hy()) } else { g.hx() };
    let cells = CellFields::new(state, &config.cut)?;
    let d = max_diffusivity(g, state, &config.model, &config.bc, &config.cut)?
        .max(max_viscosity(g, state, &config.model, &cells));
    let mut limit = T::infinity();
    let speed = state.max_speed();
    if speed > T::zero() {
        limit = limit.min(h / speed);
    }
    if d > T::zero() {
        limit = limit.min(h * h / (T::two() * d));
    }
    Ok(T::of(CFL_SAFETY) * limit)
}

/// Initial state with `φ` solved from its charge density.
pub fn initialize<T: Scalar>(state: &FieldState<T>, config: &SimConfig<T>, solvers: &Solvers<T>) -> Result<FieldState<T>> {
    config.validate()?;
    state.check_shape(&config.grid)?;
    state.check_admissible()?;
    if state.species() != config.model.species() {
        return Err(Error::Shape(format!(
            "state has {} species, the model {}",
            state.species(),
            config.model.species()
        )));
    }
    let mut s = state.clone();
    s.phi = solvers.potential.solve(&charge_density(config.model.charges(), &s.c), None)?;
    Ok(s)
}

fn relative_change<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut d = T::zero();
    let mut n = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        d = d + (x - y) * (x - y);
        n = n + y * y;
    }
    if n > T::zero() {
        (d / n).sqrt()
    } else {
        d.sqrt()
    }
}

/// One coupled step. Each coupling iterate rebuilds momentum, species and
/// energy from `state` with the latest potential, then re-solves the
/// potential from the new charge density, until the potential settles.
pub fn advance<T: Scalar>(
    state: &FieldState<T>,
    config: &SimConfig<T>,
    solvers: &Solvers<T>,
) -> Result<(FieldState<T>, StepRecord<T>)> {
    let dt = config.dt;
    let limit = stable_dt(config, state)?;
    if dt > limit {
        return Err(Error::StepSize { dt: dt.as_f64(), limit: limit.as_f64() });
    }
    let g = &config.grid;
    let model = &config.model;
    let mut phi = state.phi.clone();
    let mut trace = Vec::new();
    for iter in 1..=config.picard.max_iterations {
        let fluxes = assemble(g, state, &phi, model, &config.bc, &config.cut)?;
        let mom = step_momentum(g, state, model, &config.bc, &config.trunc, &fluxes, &solvers.pressure, dt)?;
        let c = step_species(g, state, &fluxes, &config.cut, dt)?;
        let (e, clamps) = step_internal_energy(g, state, &fluxes, &mom.dissipation, &config.cut, dt)?;
        let next_phi = solvers.potential.solve(&charge_density(model.charges(), &c), Some(&phi))?;
        let change = relative_change(&next_phi, &phi);
        trace.push(change.as_f64());
        if !change.is_finite() {
            return Err(Error::Picard { trace });
        }
        if change <= config.picard.tolerance {
            let record = StepRecord {
                dt,
                boundary_gradient_prev: solvers.potential.boundary_gradients(&state.phi),
                boundary_gradient_next: solvers.potential.boundary_gradients(&next_phi),
                fluxes,
                phi_used: phi,
                dissipation: mom.dissipation,
                friction: mom.friction,
                lorentz_work: mom.lorentz_work,
                picard_iters: iter,
                picard_trace: trace,
                energy_clamps: clamps,
            };
            let next = FieldState { c, e, v: mom.v, p: mom.p, phi: next_phi, t: state.t + dt };
            return Ok((next, record));
        }
        phi = next_phi;
    }
    Err(Error::Picard { trace })
}

/// Aggregate outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<T> {
    /// Reports at the output cadence, the initial and final ones included.
    pub reports: Vec<DiagnosticsReport<T>>,
    pub final_state: FieldState<T>,
    pub steps: usize,
    pub accumulated: AccumulatedResiduals<T>,
    /// Largest per-step residual of each balance.
    pub max_residuals: AccumulatedResiduals<T>,
    pub monitor: AprioriMonitor<T>,
    /// Smallest per-cell production term over all steps.
    pub min_production: T,
    /// Largest `|res_charge − z⃗·res_species|` over all steps.
    pub charge_identity_gap: T,
    pub max_simplex_drift: T,
    pub min_c: T,
    pub min_e: T,
    pub max_picard_iters: usize,
    pub cut_activated: bool,
    pub energy_clamps: usize,
}

/// Callback invoked at the output cadence with `(step, report, state)`.
pub type Observer<'a, T> = dyn FnMut(usize, &DiagnosticsReport<T>, &FieldState<T>) -> Result<()> + 'a;

/// Advances `scenario` to `t_end`, reporting at the configured cadence.
pub fn run<T: Scalar>(scenario: &Scenario<T>, observer: &mut Observer<'_, T>) -> Result<RunOutput<T>> {
    let config = &scenario.config;
    let solvers = Solvers::new(config)?;
    let mut state = initialize(&scenario.initial, config, &solvers)?;
    let g = &config.grid;
    let z = config.model.charges().to_vec();
    let beta = config.model.beta();

    let first = DiagnosticsReport::initial(g, &state, &config.model, &config.bc, &config.cut)?;
    observer(0, &first, &state)?;
    let mut monitor = AprioriMonitor::default();
    monitor.observe_state(g, &state, &config.cut)?;
    let mut out = RunOutput {
        min_production: first.productions.min_cell,
        reports: vec![first],
        final_state: state.clone(),
        steps: 0,
        accumulated: AccumulatedResiduals::default(),
        max_residuals: AccumulatedResiduals::default(),
        monitor: AprioriMonitor::default(),
        charge_identity_gap: T::zero(),
        max_simplex_drift: state.simplex_drift(),
        min_c: state.min_c(),
        min_e: state.min_e(),
        max_picard_iters: 0,
        cut_activated: false,
        energy_clamps: 0,
    };

    let n = config.n_steps();
    for step in 1..=n {
        let (next, record) = advance(&state, config, &solvers)?;
        let report = DiagnosticsReport::after_step(g, &state, &next, &record, &z, &config.cut)?;
        let r = &report.residuals;
        out.accumulated.add(r);
        let m = &mut out.max_residuals;
        m.mass = m.mass.max(r.mass());
        m.charge = m.charge.max(r.charge.abs());
        m.kinetic = m.kinetic.max(r.kinetic.abs());
        m.internal = m.internal.max(r.internal.abs());
        m.total_energy = m.total_energy.max(r.total_energy.abs());
        m.entropy = m.entropy.max(r.entropy.abs());
        out.charge_identity_gap = out
            .charge_identity_gap
            .max((r.charge - r.charge_from_species(&z)).abs());
        out.min_production = out.min_production.min(report.productions.min_cell);
        out.max_simplex_drift = out.max_simplex_drift.max(report.summary.simplex_drift);
        out.min_c = out.min_c.min(report.summary.min_c);
        out.min_e = out.min_e.min(report.summary.min_e);
        out.max_picard_iters = out.max_picard_iters.max(record.picard_iters);
        out.cut_activated |= record.fluxes.cells.cut_active();
        out.energy_clamps += record.energy_clamps;
        monitor.observe_step(g, &record, beta)?;
        monitor.observe_state(g, &next, &config.cut)?;
        state = next;
        if step % config.output.every == 0 || step == n {
            observer(step, &report, &state)?;
            out.reports.push(report);
        }
    }
    out.steps = n;
    out.final_state = state;
    out.monitor = monitor;
    Ok(out)
}

/// Runs without an observer.
pub fn run_quiet<T: Scalar>(scenario: &Scenario<T>) -> Result<RunOutput<T>> {
    run(scenario, &mut |_, _, _| Ok(()))
}

fn check_decreasing<T: Scalar>(name: &str, seq: &[T], allow_zero_last: bool) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::Config(format!("{name} sequence is empty")));
    }
    for (k, w) in seq.windows(2).enumerate() {
        if !(w[1] < w[0]) {
            return Err(Error::Config(format!("{name} sequence must decrease (entry {})", k + 1)));
        }
    }
    let positive = |x: T| x > T::zero();
    let bad = seq
        .iter()
        .enumerate()
        .any(|(k, &x)| !(positive(x) || (allow_zero_last && k + 1 == seq.len() && x == T::zero())));
    if bad {
        return Err(Error::Config(format!("{name} sequence must be positive")));
    }
    Ok(())
}

/// One point of a cascade sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadePoint<T> {
    pub parameter: &'static str,
    pub value: T,
    pub scenario: Scenario<T>,
}

/// Scenario variants of a cut-off sweep (`δ` at the base `ε`) followed by an
/// `ε` sweep (at the base `δ`). The last `ε` may be zero.
pub fn cascade_points<T: Scalar>(base: &Scenario<T>, deltas: &[T], epsilons: &[T]) -> Result<Vec<CascadePoint<T>>> {
    if !deltas.is_empty() {
        check_decreasing("delta", deltas, true)?;
    }
    if !epsilons.is_empty() {
        check_decreasing("epsilon", epsilons, true)?;
    }
    let mut points = Vec::new();
    for (parameter, values) in [("delta", deltas), ("epsilon", epsilons)] {
        for &value in values {
            let mut s = base.clone();
            match parameter {
                "delta" => s.config.cut.delta = value,
                _ => s.config.cut.epsilon = value,
            }
            s.config.cut.validate()?;
            points.push(CascadePoint { parameter, value, scenario: s });
        }
    }
    Ok(points)
}

/// Successive final-state differences of a cascade sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRow<T> {
    pub parameter: &'static str,
    pub value: T,
    /// `‖u(previous value) − u(value)‖`, `None` for the first of a sweep.
    pub difference: Option<T>,
    pub cut_activated: bool,
    pub final_time: T,
}

pub fn cascade_table<T: Scalar>(
    points: &[CascadePoint<T>],
    outputs: &[RunOutput<T>],
) -> Result<Vec<CascadeRow<T>>> {
    if points.len() != outputs.len() {
        return Err(Error::Shape("cascade points and outputs differ in length".into()));
    }
    let mut rows: Vec<CascadeRow<T>> = Vec::with_capacity(points.len());
    for (k, (p, o)) in points.iter().zip(outputs).enumerate() {
        let difference = if k > 0 && points[k - 1].parameter == p.parameter {
            Some(o.final_state.distance(&outputs[k - 1].final_state, &p.scenario.config.grid))
        } else {
            None
        };
        rows.push(CascadeRow {
            parameter: p.parameter,
            value: p.value,
            difference,
            cut_activated: o.cut_activated,
            final_time: o.final_state.t,
        });
    }
    Ok(rows)
}

/// Runs the sweep sequentially.
pub fn cascade_study<T: Scalar>(base: &Scenario<T>, deltas: &[T], epsilons: &[T]) -> Result<Vec<CascadeRow<T>>> {
    let points = cascade_points(base, deltas, epsilons)?;
    let outputs = points
        .iter()
        .map(|p| run_quiet(&p.scenario))
        .collect::<Result<Vec<_>>>()?;
    cascade_table(&points, &outputs)
}

/// Whether the successive differences of every sweep are nonincreasing.
pub fn cascade_monotone<T: Scalar>(rows: &[CascadeRow<T>]) -> bool {
    let mut prev: Option<(&str, T)> = None;
    for r in rows {
        match (prev, r.difference) {
            (Some((name, d0)), Some(d1)) if name == r.parameter => {
                if d1 > d0 {
                    return false;
                }
                prev = Some((r.parameter, d1));
            }
            (_, Some(d1)) => prev = Some((r.parameter, d1)),
            _ => prev = None,
        }
    }
    true
}

pub fn cascade_to_table<T: Scalar>(rows: &[CascadeRow<T>]) -> Table {
    let mut t = Table::new(["parameter", "value", "l2_difference", "cut_activated", "final_time"]);
    for r in rows {
        t.push(vec![
            r.parameter.to_string(),
            format!("{:.16e}", r.value.as_f64()),
            r.difference.map_or_else(|| "-".to_string(), |d| format!("{:.16e}", d.as_f64())),
            r.cut_activated.to_string(),
            format!("{:.16e}", r.final_time.as_f64()),
        ]);
    }
    t
}

/// Time-step variants `dt, dt/2, dt/4, …` over the same horizon.
pub fn dt_refinement_points<T: Scalar>(base: &Scenario<T>, levels: usize) -> Result<Vec<Scenario<T>>> {
    if levels == 0 {
        return Err(Error::Config("refinement needs at least one level".into()));
    }
    let mut out = Vec::with_capacity(levels);
    let mut dt = base.config.dt;
    for _ in 0..levels {
        let mut s = base.clone();
        s.config.dt = dt;
        s.config.output.every = usize::MAX;
        out.push(s);
        dt = dt * T::half();
    }
    Ok(out)
}

/// Accumulated residuals per level and observed orders between levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow<T> {
    pub dt: T,
    pub steps: usize,
    pub residuals: AccumulatedResiduals<T>,
    /// `log2(R(2dt) / R(dt))` for the kinetic, total-energy and entropy
    /// residuals; `None` on the first level.
    pub orders: Option<[T; 3]>,
}

fn order<T: Scalar>(coarse: T, fine: T) -> T {
    (coarse / fine).ln() / T::LN_2()
}

pub fn refinement_table<T: Scalar>(points: &[Scenario<T>], outputs: &[RunOutput<T>]) -> Vec<RefinementRow<T>> {
    let mut rows: Vec<RefinementRow<T>> = Vec::with_capacity(points.len());
    for (k, (p, o)) in points.iter().zip(outputs).enumerate() {
        let r = o.accumulated;
        let orders = (k > 0).then(|| {
            let c = rows[k - 1].residuals;
            [
                order(c.kinetic, r.kinetic),
                order(c.total_energy, r.total_energy),
                order(c.entropy, r.entropy),
            ]
        });
        rows.push(RefinementRow { dt: p.config.dt, steps: o.steps, residuals: r, orders });
    }
    rows
}

pub fn dt_refinement<T: Scalar>(base: &Scenario<T>, levels: usize) -> Result<Vec<RefinementRow<T>>> {
    let points = dt_refinement_points(base, levels)?;
    let outputs = points.iter().map(run_quiet).collect::<Result<Vec<_>>>()?;
    Ok(refinement_table(&points, &outputs))
}

pub fn refinement_to_table<T: Scalar>(rows: &[RefinementRow<T>]) -> Table {
    let mut t = Table::new([
        "dt",
        "steps",
        "acc_res_mass",
        "acc_res_charge",
        "acc_res_kinetic",
        "acc_res_internal",
        "acc_res_total_energy",
        "acc_res_entropy",
        "order_kinetic",
        "order_total_energy",
        "order_entropy",
    ]);
    let e = |x: T| format!("{:.16e}", x.as_f64());
    for r in rows {
        let a = &r.residuals;
        let mut row = vec![
            e(r.dt),
            r.steps.to_string(),
            e(a.mass),
            e(a.charge),
            e(a.kinetic),
            e(a.internal),
            e(a.total_energy),
            e(a.entropy),
        ];
        match r.orders {
            Some(o) => row.extend(o.iter().map(|&x| e(x))),
            None => row.extend(std::iter::repeat_n("-".to_string(), 3)),
        }
        t.push(row);
    }
    t
}
