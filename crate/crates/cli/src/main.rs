use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use mixsim::config::ConfigFile;
use mixsim::constitutive::validate::check_hypotheses;
use mixsim::diagnostics::Table;
use mixsim::momentum::ConvectionTruncation;
use mixsim::output::{create_dir, run_to_dir, write_table, write_text};
use mixsim::poisson::mms::{mms_study, mms_to_table, robin_closed_form_error};
use mixsim::scenario::{build, Setup};
use mixsim::stepper::{
    cascade_monotone, cascade_points, cascade_table, cascade_to_table, dt_refinement_points, refinement_table,
    refinement_to_table, RunOutput,
};

/// Simulator for charged, heat-conducting, non-Newtonian fluid mixtures.
#[derive(Debug, Parser)]
#[command(name = "mixsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario, writing diagnostics and snapshots.
    Run(Common),
    /// Sample the material-law hypotheses.
    Check(Common),
    /// Cut-off (delta, epsilon) and truncation (k) sweeps.
    Cascade(Common),
    /// Potential-solver and time-step refinement studies.
    Convergence(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (`key = value`); the built-in equilibrium
    /// scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the hypothesis sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing but errors.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn setup(&self) -> Result<Setup<f64>> {
        let mut cfg = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if let Some(seed) = self.seed {
            cfg.set("check.seed", seed.to_string());
        }
        let what = self
            .config
            .as_ref()
            .map_or_else(|| "built-in defaults".to_string(), |p| p.display().to_string());
        build(&cfg).with_context(|| format!("invalid configuration in {what}"))
    }

    fn say(&self, text: impl std::fmt::Display) {
        if !self.quiet {
            println!("{text}");
        }
    }

    /// Prints a table and writes it as CSV.
    fn table(&self, name: &str, table: &Table) -> Result<()> {
        let path = write_table(&self.out, name, table)?;
        self.say(table);
        self.say(format!("wrote {}", path.display()));
        Ok(())
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MIXSIM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("MIXSIM_THREADS = `{v}` must be a positive integer"))?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_run(args: &Common) -> Result<()> {
    let setup = args.setup()?;
    let quiet = args.quiet;
    let out = run_to_dir(&setup, &args.out, &mut |row| {
        if !quiet {
            println!("{row}");
        }
    })
    .with_context(|| format!("scenario `{}` failed", setup.scenario.config.scenario))?;
    let m = &out.max_residuals;
    let mut t = Table::new(["quantity", "value"]);
    for (k, v) in [
        ("steps", out.steps as f64),
        ("max_res_mass", m.mass),
        ("max_res_charge", m.charge),
        ("max_res_kinetic", m.kinetic),
        ("max_res_internal", m.internal),
        ("max_res_total_energy", m.total_energy),
        ("max_res_entropy", m.entropy),
        ("min_cell_production", out.min_production),
        ("max_simplex_drift", out.max_simplex_drift),
        ("min_c", out.min_c),
        ("min_e", out.min_e),
        ("charge_identity_gap", out.charge_identity_gap),
        ("max_picard_iters", out.max_picard_iters as f64),
        ("energy_clamps", out.energy_clamps as f64),
    ] {
        t.push(vec![k.to_string(), e16(v)]);
    }
    args.table("summary.csv", &t)?;
    if !out.monitor.all_finite() {
        bail!("a priori monitor recorded non-finite values");
    }
    Ok(())
}

fn cmd_check(args: &Common) -> Result<()> {
    let setup = args.setup()?;
    let c = &setup.scenario.config;
    let report = check_hypotheses(&c.model, &c.grid, &c.bc, Some(&setup.scenario.initial), &setup.sampler)?;
    create_dir(&args.out)?;
    let path = write_text(&args.out, "validation.csv", &report.to_csv())?;
    args.say(&report);
    args.say(format!("wrote {}", path.display()));
    let failed = report.failures().count();
    if failed > 0 {
        bail!("{failed} hypothesis check(s) failed");
    }
    Ok(())
}

/// Runs independent setups on the pool, each into its own subdirectory.
fn run_many(out: &Path, jobs: Vec<(String, Setup<f64>)>) -> Result<Vec<RunOutput<f64>>> {
    let pool = thread_pool()?;
    pool.install(|| {
        jobs.par_iter()
            .map(|(name, setup)| {
                run_to_dir(setup, &out.join(name), &mut |_| {}).with_context(|| format!("run `{name}` failed"))
            })
            .collect()
    })
}

fn cmd_cascade(args: &Common) -> Result<()> {
    let setup = args.setup()?;
    create_dir(&args.out)?;
    let s = &setup.study;
    let points = cascade_points(&setup.scenario, &s.deltas, &s.epsilons)?;
    let jobs = points
        .iter()
        .map(|p| {
            let mut v = setup.clone();
            v.scenario = p.scenario.clone();
            v.merged.set(&format!("cutoff.{}", p.parameter), p.value.to_string());
            (format!("{}_{:e}", p.parameter, p.value), v)
        })
        .collect();
    let outputs = run_many(&args.out, jobs)?;
    let rows = cascade_table(&points, &outputs)?;
    args.table("cascade.csv", &cascade_to_table(&rows))?;
    args.say(format!("successive differences nonincreasing: {}", cascade_monotone(&rows)));

    if !s.ks.is_empty() {
        let jobs = s
            .ks
            .iter()
            .map(|&k| {
                let mut v = setup.clone();
                v.scenario.config.trunc = ConvectionTruncation::new(Some(k))?;
                v.merged.set("cutoff.k", k.to_string());
                Ok((format!("k_{k:e}"), v))
            })
            .collect::<Result<Vec<_>>>()?;
        let outputs = run_many(&args.out, jobs)?;
        let grid = &setup.scenario.config.grid;
        let mut t = Table::new(["k", "speed_sq_bound", "l2_difference", "identical_to_previous"]);
        for (i, (k, o)) in s.ks.iter().zip(&outputs).enumerate() {
            let prev = i.checked_sub(1).map(|j| &outputs[j].final_state);
            t.push(vec![
                e16(*k),
                e16(o.monitor.speed_sq_bound),
                prev.map_or_else(|| "-".into(), |p| e16(o.final_state.distance(p, grid))),
                prev.map_or_else(|| "-".into(), |p| (*p == o.final_state).to_string()),
            ]);
        }
        args.table("k_sweep.csv", &t)?;
    }
    Ok(())
}

fn cmd_convergence(args: &Common) -> Result<()> {
    let setup = args.setup()?;
    create_dir(&args.out)?;
    let method = setup.scenario.config.solver.method;
    let rows = mms_study(&setup.study.mms_grids, method)?;
    args.table("potential_mms.csv", &mms_to_table(&rows))?;
    let mut t = Table::new(["nx", "max_error"]);
    t.push(vec!["128".into(), e16(robin_closed_form_error(128, method)?)]);
    args.table("potential_robin.csv", &t)?;

    let mut base = setup.scenario.clone();
    base.config.t_end = setup.study.dt_horizon;
    let points = dt_refinement_points(&base, setup.study.dt_levels)?;
    let jobs = points
        .iter()
        .map(|p| {
            let mut v = setup.clone();
            v.scenario = p.clone();
            v.merged.set("time.dt", p.config.dt.to_string());
            v.merged.set("time.t_end", p.config.t_end.to_string());
            (format!("dt_{:e}", p.config.dt), v)
        })
        .collect();
    let outputs = run_many(&args.out, jobs)?;
    args.table("dt_refinement.csv", &refinement_to_table(&refinement_table(&points, &outputs)))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
        Command::Cascade(a) => cmd_cascade(a),
        Command::Convergence(a) => cmd_convergence(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
