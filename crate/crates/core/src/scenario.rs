//! Built-in scenarios and the translation of configuration files into
//! simulations.

use std::f64::consts::PI;

use crate::config::{ConfigFile, Reader};
use crate::constitutive::validate::SamplerConfig;
use crate::constitutive::{theta_of_e, BoundaryCoeffs, MaterialModel, MaterialParams};
use crate::error::{Error, Result};
use crate::grid::{Axis, BoundarySpec, FaceField, FieldState, Grid, Profile, Segment};
use crate::momentum::ConvectionTruncation;
use crate::poisson::{LinearSolveSettings, PressureSolver, SolveMethod};
use crate::scalar::Scalar;
use crate::stepper::{OutputSettings, PicardSettings, Scenario, SimConfig};
use crate::transport::CutoffParams;

pub const SCENARIOS: [&str; 5] = ["equilibrium", "charged-channel", "soret-1d", "joule-1d", "uncharged-decay"];

const EQUILIBRIUM: &str = "
grid.dim = 2
grid.nx = 16
grid.ny = 16
time.dt = 1e-4
time.t_end = 1e-2
model.z = 0, 0, 0
init.e = 1
bc.all.theta = 2
bc.all.d = 1
bc.all.kappa_bar = 1
bc.all.lambda = 1
bc.all.gamma = 1
";

const CHARGED_CHANNEL: &str = "
grid.dim = 2
grid.nx = 64
grid.ny = 64
time.dt = 4e-6
time.t_end = 2e-3
model.z = 1, -1, 0
init.e = 1
init.c_amplitude = 0.05
init.e_amplitude = 0.1
init.swirl = 0.2
bc.all.theta = 2
bc.all.lambda = 1
bc.all.gamma = 1
bc.left.d = 1
bc.left.kappa_bar = 1
bc.left.phi = 0.5
bc.right.d = 1
bc.right.kappa_bar = 1
bc.right.phi = -0.5
";

const SORET_1D: &str = "
grid.dim = 1
grid.nx = 32
time.dt = 5e-5
time.t_end = 0.5
output.every = 100
model.z = 0, 0
model.m_amp = 0.05
init.e = 0.5625
bc.all.lambda = 1
bc.all.kappa_bar = 5
bc.left.theta = 2
bc.right.theta = 1
";

const JOULE_1D: &str = "
grid.dim = 1
grid.nx = 32
time.dt = 2e-5
time.t_end = 0.05
output.every = 50
model.z = 1, -1, 0
init.e = 1
bc.all.theta = 2
bc.all.d = 1
bc.all.lambda = 10
bc.left.phi = 1
bc.right.phi = -1
";

const UNCHARGED_DECAY: &str = "
grid.dim = 2
grid.nx = 32
grid.ny = 32
time.dt = 2e-5
time.t_end = 1e-2
model.z = 0, 0, 0
init.e = 1
init.c_amplitude = 0.05
init.swirl = 1
bc.all.lambda = 1
bc.all.gamma = 1
";

/// Default keys of a built-in scenario.
pub fn scenario_defaults(name: &str) -> Result<ConfigFile> {
    let text = match name {
        "equilibrium" => EQUILIBRIUM,
        "charged-channel" => CHARGED_CHANNEL,
        "soret-1d" => SORET_1D,
        "joule-1d" => JOULE_1D,
        "uncharged-decay" => UNCHARGED_DECAY,
        other => {
            return Err(Error::Config(format!(
                "unknown scenario `{other}` (known: {})",
                SCENARIOS.join(", ")
            )))
        }
    };
    let mut cfg = ConfigFile::parse(text)?;
    cfg.set("scenario", name);
    Ok(cfg)
}

/// Sweep and refinement settings for the study subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec<T> {
    pub deltas: Vec<T>,
    pub epsilons: Vec<T>,
    /// Convection truncation levels, increasing.
    pub ks: Vec<T>,
    pub dt_levels: usize,
    /// Horizon of the time-step refinement; defaults to `time.t_end`.
    pub dt_horizon: T,
    /// Cell counts of the potential manufactured-solution study.
    pub mms_grids: Vec<usize>,
}

/// Everything a configuration file describes.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup<T> {
    pub scenario: Scenario<T>,
    pub sampler: SamplerConfig,
    pub study: StudySpec<T>,
    /// Snapshot fields (`c`, `e`, `theta`, `phi`, `p`, `vx`, `vy`).
    pub fields: Vec<String>,
    /// The merged configuration (defaults plus user keys).
    pub merged: ConfigFile,
}

pub const SNAPSHOT_FIELDS: [&str; 7] = ["c", "e", "theta", "phi", "p", "vx", "vy"];

/// Builds a setup from a user configuration; `scenario` selects the
/// defaults the user keys are laid over.
pub fn build<T: Scalar>(user: &ConfigFile) -> Result<Setup<T>> {
    let name = user.get("scenario").unwrap_or("equilibrium");
    let merged = scenario_defaults(name)?.overlay(user);
    let mut r = Reader::new(&merged);
    r.raw("scenario");
    let setup = read_setup(&mut r, name, &merged)?;
    r.finish()?;
    Ok(setup)
}

/// The named built-in scenario with its defaults.
pub fn builtin<T: Scalar>(name: &str) -> Result<Setup<T>> {
    let mut cfg = ConfigFile::default();
    cfg.set("scenario", name);
    build(&cfg)
}

fn f<T: Scalar>(x: f64) -> T {
    T::of(x)
}

fn read_setup<T: Scalar>(r: &mut Reader<'_>, name: &str, merged: &ConfigFile) -> Result<Setup<T>> {
    let dim: usize = r.or("grid.dim", 2)?;
    let nx: usize = r.or("grid.nx", 16)?;
    let ny: usize = r.or("grid.ny", if dim == 2 { nx } else { 1 })?;
    let lx: f64 = r.or("grid.lx", 1.0)?;
    let ly: f64 = r.or("grid.ly", 1.0)?;
    let grid = match dim {
        1 => Grid::new_1d(nx, f(lx))?,
        2 => Grid::new_2d(nx, ny, f(lx), f(ly))?,
        d => return Err(Error::Config(format!("grid.dim = {d} must be 1 or 2"))),
    };

    let defaults = MaterialParams::<f64>::default();
    let z: Vec<f64> = r.list("model.z")?.unwrap_or(defaults.z.clone());
    let params = MaterialParams {
        z: z.iter().map(|&x| f(x)).collect(),
        r_exponent: f(r.or("model.r", defaults.r_exponent)?),
        g_lower: f(r.or("model.g_lower", defaults.g_lower)?),
        g_upper: f(r.or("model.g_upper", defaults.g_upper)?),
        beta: f(r.or("model.beta", defaults.beta)?),
        eps0: f(r.or("model.eps0", defaults.eps0)?),
        m_amp: f(r.or("model.m_amp", defaults.m_amp)?),
        kappa0: f(r.or("model.kappa0", defaults.kappa0)?),
        rho0: f(r.or("model.rho0", defaults.rho0)?),
    };
    let model = MaterialModel::new(params)?;
    let species = z.len();

    let cut = CutoffParams::new(f(r.or("cutoff.delta", 0.0)?), f(r.or("cutoff.epsilon", 0.0)?))?;
    let k = match r.raw("cutoff.k") {
        None | Some("inf") => None,
        Some(s) => Some(f(s
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("key `cutoff.k`: cannot parse `{s}`")))?)),
    };
    let trunc = ConvectionTruncation::new(k)?;

    let picard = PicardSettings {
        tolerance: f(r.or("picard.tolerance", 1e-8)?),
        max_iterations: r.or("picard.max_iterations", 50)?,
    };
    let method = match r.raw("solver.method") {
        None => SolveMethod::default(),
        Some(s) => SolveMethod::from_name(s)
            .ok_or_else(|| Error::Config(format!("solver.method `{s}` (expected direct or krylov)")))?,
    };
    let solver_defaults = LinearSolveSettings::<f64>::default();
    let solver = LinearSolveSettings {
        method,
        tolerance: f(r.or("solver.tolerance", solver_defaults.tolerance)?),
        max_iterations: r.or("solver.max_iterations", solver_defaults.max_iterations)?,
    };

    let dt: f64 = r.or("time.dt", 1e-4)?;
    let t_end: f64 = r.or("time.t_end", 10.0 * dt)?;
    let output = OutputSettings {
        every: r.or("output.every", 1)?,
        snapshot_every: r.or("output.snapshot_every", 0)?,
    };
    let fields: Vec<String> = r
        .list("output.fields")?
        .unwrap_or_else(|| SNAPSHOT_FIELDS.iter().map(|s| s.to_string()).collect());
    if let Some(bad) = fields.iter().find(|x| !SNAPSHOT_FIELDS.contains(&x.as_str())) {
        return Err(Error::Config(format!("output.fields: unknown field `{bad}`")));
    }

    let init = InitialSpec {
        c: r.list("init.c")?.unwrap_or(vec![1.0 / species as f64; species]),
        e: r.or("init.e", 1.0)?,
        c_amplitude: r.or("init.c_amplitude", 0.0)?,
        e_amplitude: r.or("init.e_amplitude", 0.0)?,
        swirl: r.or("init.swirl", 0.0)?,
    };
    if init.c.len() != species {
        return Err(Error::Config(format!("init.c has {} entries, model.z {species}", init.c.len())));
    }

    let bc = read_boundary(r, &grid, species, &init)?;
    let config = SimConfig {
        grid: grid.clone(),
        model,
        bc,
        cut,
        trunc,
        dt: f(dt),
        t_end: f(t_end),
        picard,
        solver,
        scenario: name.to_string(),
        output,
    };
    config.validate()?;
    let initial = initial_state(&grid, &init, solver)?;

    let sd = SamplerConfig::default();
    let sampler = SamplerConfig {
        samples: r.or("check.samples", sd.samples)?,
        theta_min: r.or("check.theta_min", sd.theta_min)?,
        theta_max: r.or("check.theta_max", sd.theta_max)?,
        d_max: r.or("check.d_max", sd.d_max)?,
        zeta_max: r.or("check.zeta_max", sd.zeta_max)?,
        constant_min: r.or("check.constant_min", sd.constant_min)?,
        constant_max: r.or("check.constant_max", sd.constant_max)?,
        seed: r.or("check.seed", sd.seed)?,
    };
    let fl = |v: Vec<f64>| v.into_iter().map(f).collect::<Vec<T>>();
    let study = StudySpec {
        deltas: fl(r.list("cascade.delta")?.unwrap_or(vec![1e-2, 1e-3, 1e-4])),
        epsilons: fl(r.list("cascade.epsilon")?.unwrap_or(vec![1e-2, 1e-3, 0.0])),
        ks: fl(r.list("cascade.k")?.unwrap_or_default()),
        dt_levels: r.or("convergence.dt_levels", 3)?,
        dt_horizon: f(r.or("convergence.t_end", t_end)?),
        mms_grids: r.list("convergence.grids")?.unwrap_or(vec![16, 32, 64]),
    };
    if study.ks.windows(2).any(|w| !(w[1] > w[0])) || study.ks.iter().any(|&k| !(k > T::zero())) {
        return Err(Error::Config("cascade.k must be positive and increasing".into()));
    }
    Ok(Setup { scenario: Scenario { config, initial }, sampler, study, fields, merged: merged.clone() })
}

#[derive(Debug, Clone)]
struct InitialSpec {
    c: Vec<f64>,
    e: f64,
    c_amplitude: f64,
    e_amplitude: f64,
    swirl: f64,
}

fn read_boundary<T: Scalar>(r: &mut Reader<'_>, grid: &Grid<T>, species: usize, init: &InitialSpec) -> Result<BoundarySpec<T>> {
    // Reservoir defaults match the initial mean state.
    let theta_g = theta_of_e(init.e).map_err(|_| Error::Config(format!("init.e = {} must be positive", init.e)))?;
    let base = BoundaryCoeffs::<f64> {
        theta_g,
        zeta_g: init.c.iter().map(|c| c.ln()).collect(),
        ..BoundaryCoeffs::wall(species)
    };

    let mut all = base.clone();
    let mut all_profile = Profile::Uniform;
    apply_bc(r, "all", &mut all, &mut all_profile, species)?;
    let mut segments = Vec::new();
    for seg in Segment::ALL {
        let mut coeffs = all.clone();
        let mut profile = all_profile;
        let touched = apply_bc(r, seg.name(), &mut coeffs, &mut profile, species)?;
        if !grid.segments().contains(&seg) {
            if touched {
                return Err(Error::Config(format!("bc.{} given for a 1D grid", seg.name())));
            }
            continue;
        }
        let coeffs = BoundaryCoeffs {
            theta_g: f(coeffs.theta_g),
            zeta_g: coeffs.zeta_g.iter().map(|&x| f(x)).collect(),
            phi_g: f(coeffs.phi_g),
            d: f(coeffs.d),
            kappa_bar: f(coeffs.kappa_bar),
            lambda_g: f(coeffs.lambda_g),
            gamma: f(coeffs.gamma),
        };
        segments.push((seg, coeffs, profile));
    }
    BoundarySpec::new(grid, segments)
}

/// Applies `bc.<prefix>.*`; returns whether any key was present.
fn apply_bc(
    r: &mut Reader<'_>,
    prefix: &str,
    bc: &mut BoundaryCoeffs<f64>,
    profile: &mut Profile,
    species: usize,
) -> Result<bool> {
    let key = |field: &str| format!("bc.{prefix}.{field}");
    let mut touched = false;
    let mut scalar = |r: &mut Reader<'_>, field: &str, slot: &mut f64| -> Result<()> {
        if let Some(v) = r.parse::<f64>(&key(field))? {
            *slot = v;
            touched = true;
        }
        Ok(())
    };
    scalar(r, "theta", &mut bc.theta_g)?;
    scalar(r, "phi", &mut bc.phi_g)?;
    scalar(r, "d", &mut bc.d)?;
    scalar(r, "kappa_bar", &mut bc.kappa_bar)?;
    scalar(r, "lambda", &mut bc.lambda_g)?;
    scalar(r, "gamma", &mut bc.gamma)?;
    let c: Option<Vec<f64>> = r.list(&key("c"))?;
    let zeta: Option<Vec<f64>> = r.list(&key("zeta"))?;
    match (c, zeta) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(format!("give either {} or {}, not both", key("c"), key("zeta"))))
        }
        (Some(c), None) => {
            if c.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Config(format!("{} entries must be positive", key("c"))));
            }
            bc.zeta_g = c.iter().map(|x| x.ln()).collect();
            touched = true;
        }
        (None, Some(z)) => {
            bc.zeta_g = z;
            touched = true;
        }
        (None, None) => {}
    }
    if bc.zeta_g.len() != species {
        return Err(Error::Config(format!("{}: expected {species} entries", key("c"))));
    }
    if let Some(p) = r.raw(&key("profile")) {
        *profile = Profile::from_name(p)
            .ok_or_else(|| Error::Config(format!("{} `{p}` (expected uniform, sine or step)", key("profile"))))?;
        touched = true;
    }
    Ok(touched)
}

fn initial_state<T: Scalar>(grid: &Grid<T>, init: &InitialSpec, solver: LinearSolveSettings<T>) -> Result<FieldState<T>> {
    let l = init.c.len();
    if init.c.iter().any(|&x| !(x > 0.0)) || (init.c.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Config("init.c must be positive and sum to one".into()));
    }
    let (lx, ly) = (grid.lx().as_f64(), grid.ly().as_f64());
    let two_d = grid.dim() == 2;
    let mut s = FieldState::uniform(grid, l);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.cell(i, j);
            let (x, y) = grid.cell_center(i, j);
            let (x, y) = (x.as_f64() / lx, y.as_f64() / ly);
            let (sy, cy) = if two_d { ((PI * y).sin(), (2.0 * PI * y).cos()) } else { (1.0, 1.0) };
            let pert = [(2.0 * PI * x).sin() * sy, 0.5 * (PI * x).cos() * cy];
            let mut head = 0.0;
            for (sp, ci) in s.c.iter_mut().enumerate().take(l - 1) {
                let p = pert.get(sp).copied().unwrap_or(0.0);
                let v = init.c[sp] + init.c_amplitude * p;
                ci[k] = f(v);
                head += v;
            }
            s.c[l - 1][k] = f(1.0 - head);
            let ey = if two_d { (PI * y).cos() } else { 1.0 };
            s.e[k] = f(init.e * (1.0 + init.e_amplitude * (PI * x).cos() * ey));
        }
    }
    s.check_admissible()
        .map_err(|e| Error::Config(format!("initial state is inadmissible: {e}")))?;
    if init.swirl != 0.0 {
        if !two_d {
            return Err(Error::Config("init.swirl needs a 2D grid".into()));
        }
        s.v = swirl(grid, init.swirl, solver)?;
    }
    Ok(s)
}

/// Divergence-free vortex from the corner stream function
/// `ψ = A l/π sin²(πx/lx) sin²(πy/ly)`, projected to clear round-off.
fn swirl<T: Scalar>(grid: &Grid<T>, amplitude: f64, solver: LinearSolveSettings<T>) -> Result<FaceField<T>> {
    let (lx, ly) = (grid.lx().as_f64(), grid.ly().as_f64());
    let (hx, hy) = (grid.hx().as_f64(), grid.hy().as_f64());
    let scale = amplitude * lx.min(ly) / PI;
    let psi = |i: usize, j: usize| {
        let (x, y) = (i as f64 * hx / lx, j as f64 * hy / ly);
        scale * (PI * x).sin().powi(2) * (PI * y).sin().powi(2)
    };
    let mut v = FaceField::zeros(grid);
    grid.for_each_interior_face(|axis, face, _, _| match axis {
        Axis::X => {
            let (i, j) = (face % (grid.nx() + 1), face / (grid.nx() + 1));
            v.x[face] = f((psi(i, j + 1) - psi(i, j)) / hy);
        }
        Axis::Y => {
            let (i, j) = (face % grid.nx(), face / grid.nx());
            v.y[face] = f(-(psi(i + 1, j) - psi(i, j)) / hx);
        }
    });
    Ok(PressureSolver::new(grid, solver)?.project(&v)?.0)
}
