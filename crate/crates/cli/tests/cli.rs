use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mixsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsim"))
        .args(args)
        .env_remove("MIXSIM_THREADS")
        .output()
        .expect("spawn mixsim")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.cfg"))
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("case.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Column-indexed numeric view of a CSV with a header row.
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = csv(path);
    let k = h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn missing_config_names_the_path() {
    let o = mixsim(&["run", "--config", "/no/such/dir/setup.cfg", "--quiet"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/no/such/dir/setup.cfg"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "scenario = equilibrium\ngrid.nz = 4\n");
    let o = mixsim(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("grid.nz"));
}

#[test]
fn equilibrium_run_has_vanishing_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("equilibrium");
    let o = mixsim(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let diag = dir.path().join("diagnostics.csv");
    let (header, _) = csv(&diag);
    assert_eq!(header[0], "t");
    assert_eq!(header.last().unwrap(), "picard_iters");
    for col in header.iter().filter(|c| c.starts_with("res_")) {
        let max = column(&diag, col).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max <= 1e-12, "{col}: {max:e}");
    }
    let snap = fs::read_to_string(dir.path().join("snap_phi_000000.csv")).unwrap();
    assert!(snap.starts_with("# field=phi t="));
}

#[test]
fn charged_channel_productions_stay_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("charged-channel");
    let o = mixsim(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let diag = dir.path().join("diagnostics.csv");
    assert_eq!(column(&diag, "t").len(), 501);
    for col in ["P_visc", "P_react", "P_cross", "P_fourier"] {
        assert!(column(&diag, col).iter().all(|&p| p >= -1e-12), "{col}");
    }
}

#[test]
fn check_passes_on_the_default_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = mixsim(&["check", "--out", dir.path().to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&dir.path().join("validation.csv"));
    assert_eq!(header, ["id", "pass", "margin", "witness"]);
    assert!(!rows.is_empty());
}

#[test]
fn check_fails_for_out_of_range_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "model.beta = 3\n");
    let o = mixsim(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("H4") && l.contains("FAIL")), "{out}");
}

#[test]
fn negative_conductivity_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "model.kappa0 = -1\n");
    let o = mixsim(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("kappa0"));
    assert!(!dir.path().join("validation.csv").exists());
}

#[test]
fn single_point_sweep_has_one_row_and_no_difference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "scenario = uncharged-decay\ngrid.nx = 8\ngrid.ny = 8\ntime.t_end = 1e-4\ncascade.delta = 1e-3\ncascade.epsilon = 1e-3\n",
    );
    let out = dir.path().join("out");
    let o = mixsim(&["cascade", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv(&out.join("cascade.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[2] == "-"));
}

#[test]
fn k_sweep_below_the_threshold_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "scenario = uncharged-decay\ngrid.nx = 8\ngrid.ny = 8\ntime.t_end = 2e-4\ncascade.delta = 1e-3\n\
         cascade.epsilon = 1e-3\ncascade.k = 10, 100, 1000\n",
    );
    let out = dir.path().join("out");
    let o = mixsim(&["cascade", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv(&out.join("k_sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() < 10.0));
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
}

#[test]
fn convergence_reports_second_order_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "scenario = uncharged-decay\ngrid.nx = 8\ngrid.ny = 8\ntime.t_end = 1e-4\nconvergence.dt_levels = 2\n",
    );
    let out = dir.path().join("out");
    let o = mixsim(&["convergence", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let orders: Vec<f64> = csv(&out.join("potential_mms.csv"))
        .1
        .iter()
        .skip(1)
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(orders.len(), 2);
    assert!(orders.iter().all(|&p| p >= 1.9), "{orders:?}");
    let (_, rows) = csv(&out.join("dt_refinement.csv"));
    assert_eq!(rows.len(), 2);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "scenario = joule-1d\ntime.t_end = 2e-3\noutput.snapshot_every = 20\n");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = mixsim(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b) = (run("a"), run("b"));
    assert!(a.len() > 3);
    assert_eq!(a, b);
}

#[test]
fn invalid_thread_cap_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "scenario = equilibrium\ngrid.nx = 4\ngrid.ny = 4\ntime.t_end = 1e-4\n");
    let o = Command::new(env!("CARGO_BIN_EXE_mixsim"))
        .args(["cascade", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("MIXSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("MIXSIM_THREADS"));
}
