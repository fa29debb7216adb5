//! Sampling validator for the structural hypotheses on the material laws.
//!
//! Every check reports a margin: nonnegative means satisfied, and the
//! witness records the worst sampled point. Existential constants are
//! estimated from the samples and compared against the configured
//! admissible range `[constant_min, constant_max]`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    entropy_e, entropy_e_prime, entropy_e_second, theta_of_e, zeta, MaterialLaws, SymTensor,
    ENERGY_ENTROPY_CONSTANT,
};
use crate::error::{Error, Result};
use crate::grid::{project_ell, BoundarySpec, FieldState, Grid};
use crate::scalar::{dot, Scalar};

/// Tolerance for identities that hold exactly up to round-off.
const EXACT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub samples: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Largest rate-of-strain norm sampled.
    pub d_max: f64,
    /// Chemical potentials are drawn from `[-zeta_max, zeta_max]`.
    pub zeta_max: f64,
    /// Smallest admissible estimate of a lower-bound constant.
    pub constant_min: f64,
    /// Largest admissible estimate of an upper-bound constant.
    pub constant_max: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 10_000,
            theta_min: 1e-3,
            theta_max: 1e3,
            d_max: 1e3,
            zeta_max: 10.0,
            constant_min: 1e-2,
            constant_max: 1e2,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.samples >= 2
            && self.theta_min > 0.0
            && self.theta_max > self.theta_min
            && self.theta_max.is_finite()
            && self.d_max > 0.0
            && self.d_max.is_finite()
            && self.zeta_max > 0.0
            && self.zeta_max.is_finite()
            && self.constant_min > 0.0
            && self.constant_max > self.constant_min;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid sampler ranges: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,pass,margin,witness\n");
        for c in &self.checks {
            s.push_str(&format!(
                "{},{},{:.16e},\"{}\"\n",
                c.id,
                c.pass,
                c.margin,
                c.witness.replace('"', "'")
            ));
        }
        s
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<22} {}  margin={:+.6e}  {}",
                c.id,
                if c.pass { "PASS" } else { "FAIL" },
                c.margin,
                c.witness
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed, {} samples", self.checks.len(), failed, self.samples)
    }
}

/// Tracks the worst value of a quantity together with where it occurred.
struct Worst {
    value: f64,
    witness: String,
    maximize: bool,
}

impl Worst {
    fn max() -> Self {
        Worst { value: f64::NEG_INFINITY, witness: String::new(), maximize: true }
    }

    fn min() -> Self {
        Worst { value: f64::INFINITY, witness: String::new(), maximize: false }
    }

    fn update(&mut self, v: f64, witness: impl FnOnce() -> String) {
        let worse = if self.maximize { v > self.value } else { v < self.value };
        if worse || v.is_nan() {
            self.value = v;
            self.witness = witness();
        }
    }
}

fn fmt_vec<T: Scalar>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.6e}", x.as_f64())).collect();
    format!("[{}]", parts.join(" "))
}

/// Random point in the open simplex, occasionally concentrated near a face.
fn sample_simplex<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let power = if rng.gen_bool(0.25) { rng.gen_range(1.0..12.0) } else { 1.0 };
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (-u.ln()).powf(power).max(1e-300)
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|&x| T::of((x / s).max(1e-200))).collect()
}

fn sample_sym3<T: Scalar>(rng: &mut ChaCha8Rng, norm: f64) -> SymTensor<T, 3> {
    let mut a = [[0.0f64; 3]; 3];
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    let s = SymTensor::<f64, 3>::sym(a).deviatoric();
    let n = s.norm().max(1e-300);
    let mut out = SymTensor::<T, 3>::zero();
    for i in 0..3 {
        for j in 0..3 {
            out.m[i][j] = T::of(s.m[i][j] * norm / n);
        }
    }
    out
}

fn sym_to_f64<T: Scalar>(s: &SymTensor<T, 3>) -> SymTensor<f64, 3> {
    let mut o = SymTensor::<f64, 3>::zero();
    for i in 0..3 {
        for j in 0..3 {
            o.m[i][j] = s.m[i][j].as_f64();
        }
    }
    o
}

struct Builder {
    checks: Vec<CheckResult>,
}

impl Builder {
    fn push(&mut self, id: &str, margin: f64, witness: String) {
        self.checks.push(CheckResult { id: id.to_string(), pass: margin >= 0.0, margin, witness });
    }

    /// Quantity that must not exceed `bound`.
    fn upper(&mut self, id: &str, w: Worst, bound: f64) {
        let margin = if w.value.is_nan() { f64::NEG_INFINITY } else { bound - w.value };
        self.push(id, margin, format!("observed={:.6e} {}", w.value, w.witness));
    }

    /// Quantity that must be at least `bound`.
    fn lower(&mut self, id: &str, w: Worst, bound: f64) {
        let margin = if w.value.is_nan() { f64::NEG_INFINITY } else { w.value - bound };
        self.push(id, margin, format!("observed={:.6e} {}", w.value, w.witness));
    }
}

/// Samples the material laws and boundary data and checks every hypothesis.
///
/// `initial` is the state the hypotheses on the initial data are checked on;
/// when absent that check is reported as passing with a note.
pub fn check_hypotheses<T: Scalar, M: MaterialLaws<T>>(
    model: &M,
    grid: &Grid<T>,
    bc: &BoundarySpec<T>,
    initial: Option<&FieldState<T>>,
    cfg: &SamplerConfig,
) -> Result<ValidationReport> {
    cfg.validate()?;
    let n = model.species();
    if bc.species() != n {
        return Err(Error::Config(format!(
            "boundary data has {} species, model has {n}",
            bc.species()
        )));
    }
    let z: Vec<T> = model.charges().to_vec();
    let (beta, eps0, r) = (model.beta().as_f64(), model.eps0().as_f64(), model.r_exponent().as_f64());
    let q = r + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ns = cfg.samples;
    let log_span = (cfg.theta_max / cfg.theta_min).ln();
    let theta_at = |k: usize| cfg.theta_min * (log_span * k as f64 / (ns - 1) as f64).exp();

    let mut b = Builder { checks: Vec::new() };

    // Reactions.
    let mut r_norm = Worst::max();
    let mut r_diss = Worst::max();
    let mut r_mass = Worst::max();
    let mut r_charge = Worst::max();
    // Stress.
    let mut s_zero = Worst::max();
    let mut s_coer = Worst::min();
    let mut s_growth = Worst::max();
    let mut s_mono = Worst::min();
    // Fluxes.
    let mut m_sym = Worst::max();
    let mut m_rows = Worst::max();
    let mut m_vec = Worst::max();
    let mut m_lo = Worst::min();
    let mut m_hi = Worst::max();
    let mut ms_lo = Worst::min();
    let mut ms_hi = Worst::max();
    let mut m_env = Worst::max();
    // Conductivity.
    let mut k_lo = Worst::min();
    let mut k_hi = Worst::max();
    // Entropy of concentrations and chemical potentials.
    let mut sc_hess = Worst::min();
    let mut sc_barrier = Worst::min();
    let mut z_upper = Worst::max();
    let mut z_inv = Worst::max();
    let mut z_proj = Worst::max();
    // Boundary matrix.
    let mut d_rows = Worst::max();
    let mut d_lo = Worst::min();
    let mut d_hi = Worst::max();

    let mut mat = vec![T::zero(); n * n];
    let mut mvec = vec![T::zero(); n];
    for k in 0..ns {
        let th = theta_at(k);
        let theta = T::of(th);
        let c: Vec<T> = sample_simplex(&mut rng, n);
        let at = || format!("theta={th:.6e} c={}", fmt_vec(&c));

        // H1
        let zeta_s: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(-cfg.zeta_max..cfg.zeta_max))).collect();
        let rv = model.reaction(&c, theta, &zeta_s);
        let wit = || format!("zeta={}", fmt_vec(&zeta_s));
        r_norm.update(dot(&rv, &rv).sqrt().as_f64(), wit);
        r_diss.update(dot(&rv, &zeta_s).as_f64(), wit);
        r_mass.update(crate::scalar::sum(&rv).as_f64().abs(), wit);
        r_charge.update(dot(&rv, &z).as_f64().abs(), wit);

        // H2 on 3×3 trace-free rates with log-spaced magnitudes.
        let dn = cfg.d_max.powf(rng.gen_range(-1.0..1.0));
        let d1 = sample_sym3::<T>(&mut rng, dn);
        let dn2 = cfg.d_max.powf(rng.gen_range(-1.0..1.0));
        let d2 = sample_sym3::<T>(&mut rng, dn2);
        let s1 = model.stress(&c, theta, &d1);
        let s2 = model.stress(&c, theta, &d2);
        let s0 = model.stress(&c, theta, &SymTensor::<T, 3>::zero());
        s_zero.update(s0.norm().as_f64(), at);
        let sd = s1.ddot(&d1).as_f64();
        if dn >= 1.0 {
            s_coer.update(sd / dn.powf(q), || format!("{} |D|={dn:.6e}", at()));
        }
        s_growth.update(s1.norm().as_f64() / (1.0 + dn.powf(q - 1.0)), || format!("{} |D|={dn:.6e}", at()));
        let mono = (sym_to_f64(&s1) - sym_to_f64(&s2)).ddot(&(sym_to_f64(&d1) - sym_to_f64(&d2)));
        s_mono.update(mono, at);

        // H3
        let mob = model.mobility_into(&c, theta, &mut mat);
        let thermo = model.thermo_into(&c, theta, &mut mvec);
        let ms = model.mobility_scalar(theta);
        if mob.is_err() || thermo.is_err() || ms.is_err() {
            b.push("H3.defined", -1.0, at());
            continue;
        }
        let ms = ms.unwrap().as_f64();
        for i in 0..n {
            for j in 0..n {
                m_sym.update((mat[i * n + j] - mat[j * n + i]).abs().as_f64(), at);
            }
        }
        for j in 0..n {
            let col = (0..n).fold(T::zero(), |s, i| s + mat[i * n + j]);
            let row = (0..n).fold(T::zero(), |s, i| s + mat[j * n + i]);
            m_rows.update(col.abs().max(row.abs()).as_f64(), at);
        }
        m_vec.update(crate::scalar::sum(&mvec).abs().as_f64(), at);
        let w: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect();
        let pw = project_ell(&w);
        let pw2 = dot(&pw, &pw).as_f64();
        let quad = (0..n).fold(0.0, |s, i| {
            s + (0..n).fold(0.0, |t, j| t + (w[i] * mat[i * n + j] * w[j]).as_f64())
        });
        if pw2 > 1e-6 && ms > 0.0 {
            let ratio = quad / (ms * pw2);
            m_lo.update(ratio, at);
            m_hi.update(ratio, at);
        }
        ms_lo.update(ms / 1f64.min(th.powf(beta - eps0)), at);
        ms_hi.update(ms / (1.0 + th).powf(5.0 / 3.0 - eps0), at);
        let env = if th < 1.0 {
            (ms * th.powf(-beta + eps0)).min(th.powf(-2.0 * (beta - 1.0) + eps0))
        } else {
            ms * th
        };
        m_env.update(dot(&mvec, &mvec).as_f64() / env, at);

        // H4
        match model.heat_conductivity(&c, theta) {
            Ok(kappa) => {
                let ratio = kappa.as_f64() / (1.0 + th.powf(-beta));
                k_lo.update(ratio, at);
                k_hi.update(ratio, at);
            }
            Err(_) => k_lo.update(f64::NAN, at),
        }

        // H5: for the logarithmic entropy the Hessian is −diag(1/c).
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let hx: f64 = x.iter().zip(&c).map(|(v, ci)| v * v / ci.as_f64()).sum();
        sc_hess.update(hx / x2, at);
        let zc = zeta(&c)?;
        let zinf = zc.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
        let cmin = c.iter().fold(f64::INFINITY, |m, v| m.min(v.as_f64()));
        sc_barrier.update(cmin.ln() + zinf, at);
        z_upper.update(zc.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64())), at);
        let znorm = dot(&zc, &zc).sqrt().as_f64();
        z_inv.update(znorm * cmin, at);
        let pz = project_ell(&zc);
        z_proj.update(znorm / (1.0 + dot(&pz, &pz).sqrt().as_f64()), at);

        // H8 boundary matrix with a sampled transfer coefficient.
        let dcoef = rng.gen_range(0.01..10.0);
        model.boundary_matrix_into(T::of(dcoef), &c, theta, &mut mat);
        for j in 0..n {
            let col = (0..n).fold(T::zero(), |s, i| s + mat[i * n + j]);
            d_rows.update(col.abs().as_f64(), at);
        }
        let dq = (0..n).fold(0.0, |s, i| {
            s + (0..n).fold(0.0, |t, j| t + (w[i] * mat[i * n + j] * w[j]).as_f64())
        });
        if pw2 > 1e-6 {
            d_lo.update(dq / (dcoef * pw2), at);
            d_hi.update(dq / (dcoef * pw2), at);
        }
    }

    let cmin = cfg.constant_min;
    let cmax = cfg.constant_max;
    b.upper("H1.bounded", r_norm, cmax);
    b.upper("H1.dissipative", r_diss, 1e-12);
    b.upper("H1.mass", r_mass, EXACT_TOL);
    b.upper("H1.charge", r_charge, EXACT_TOL);

    b.upper("H2.zero", s_zero, 0.0);
    b.lower("H2.coercive", s_coer, cmin);
    b.upper("H2.growth", s_growth, cmax);
    b.lower("H2.monotone", s_mono, -1e-12);

    b.upper("H3.symmetric", m_sym, 0.0);
    b.upper("H3.row_sums", m_rows, EXACT_TOL);
    b.upper("H3.thermo_sums", m_vec, EXACT_TOL);
    b.lower("H3.definite_lower", m_lo, cmin);
    b.upper("H3.definite_upper", m_hi, cmax);
    b.lower("H3.mobility_lower", ms_lo, cmin);
    b.upper("H3.mobility_upper", ms_hi, cmax);
    b.upper("H3.thermo_envelope", m_env, cmax);

    b.push(
        "H4.beta_range",
        beta.min(2.0 - beta),
        format!("beta={beta}"),
    );
    b.lower("H4.conductivity_lower", k_lo, cmin);
    b.upper("H4.conductivity_upper", k_hi, cmax);

    b.lower("H5.sc_hessian", sc_hess, cmin);
    b.lower("H5.sc_barrier", sc_barrier, -1e-12);
    check_internal_entropy(&mut b, cmin, cmax)?;

    check_initial(&mut b, grid, initial);

    check_boundary(&mut b, grid, bc, d_rows, d_lo, d_hi, cmin, cmax);

    b.upper("Z1.zeta_upper", z_upper, cmax);
    b.upper("Z1.zeta_times_c", z_inv, cmax);
    b.upper("Z2.zeta_projected", z_proj, cmax);

    Ok(ValidationReport { samples: ns, checks: b.checks })
}

fn check_internal_entropy(b: &mut Builder, cmin: f64, cmax: f64) -> Result<()> {
    let es: Vec<f64> = (0..=1200).map(|k| 1e-6 * 10f64.powf(k as f64 / 100.0)).collect();
    let mut concave = Worst::max();
    let mut increasing = Worst::min();
    let mut ratio_lo = Worst::min();
    let mut ratio_hi = Worst::max();
    let mut th_lo = Worst::min();
    let mut th_hi = Worst::max();
    let mut se2 = Worst::min();
    for w in es.windows(3) {
        let (a, m, c) = (w[0], w[1], w[2]);
        let (sa, sm, sc) = (entropy_e(a)?, entropy_e(m)?, entropy_e(c)?);
        // Second divided difference on a nonuniform grid.
        let dd = ((sc - sm) / (c - m) - (sm - sa) / (m - a)) / (c - a);
        concave.update(dd, || format!("e={m:.6e}"));
        increasing.update(sm - sa, || format!("e={m:.6e}"));
    }
    for &e in &es {
        if e > 1.0 {
            let sp = entropy_e_prime(e)?;
            let ratio = -entropy_e_second(e)? / (sp * sp);
            ratio_lo.update(ratio, || format!("e={e:.6e}"));
            ratio_hi.update(ratio, || format!("e={e:.6e}"));
            let t = theta_of_e(e)? / e;
            th_lo.update(t, || format!("e={e:.6e}"));
            th_hi.update(t, || format!("e={e:.6e}"));
        }
        se2.update(e - 2.0 * entropy_e(e)? + ENERGY_ENTROPY_CONSTANT, || format!("e={e:.6e}"));
    }
    b.upper("H5.se_concave", concave, 1e-12);
    b.lower("H5.se_increasing", increasing, 0.0);
    b.lower("H5.se_curvature_lower", ratio_lo, cmin);
    b.upper("H5.se_curvature_upper", ratio_hi, cmax);

    // Blow-up of 1/s_e, s_e' and −s_e''/s_e'^2 as e → 0⁺.
    let probe = |e: f64| -> Result<[f64; 3]> {
        let sp = entropy_e_prime(e)?;
        Ok([1.0 / entropy_e(e)?, sp, -entropy_e_second(e)? / (sp * sp)])
    };
    let (near, nearer) = (probe(1e-8)?, probe(1e-12)?);
    let growth = near
        .iter()
        .zip(&nearer)
        .fold(f64::INFINITY, |m, (a, b)| m.min(b / a - 1.0));
    b.push("H5.se_limits", growth, format!("values at e=1e-12: {nearer:?}"));

    b.lower("H5.theta_ratio_lower", th_lo, cmin);
    b.upper("H5.theta_ratio_upper", th_hi, cmax);
    b.lower("H5.energy_entropy", se2, 0.0);
    Ok(())
}

fn check_initial<T: Scalar>(b: &mut Builder, grid: &Grid<T>, initial: Option<&FieldState<T>>) {
    let Some(st) = initial else {
        b.push("H6.initial", 0.0, "no initial state supplied".into());
        return;
    };
    if st.check_shape(grid).is_err() {
        b.push("H6.initial", -1.0, "state does not match grid".into());
        return;
    }
    let drift = st.simplex_drift().as_f64();
    let min_c = st.min_c().as_f64();
    let min_e = st.min_e().as_f64();
    let div = grid
        .divergence(&st.v)
        .map(|d| crate::scalar::max_abs(&d).as_f64())
        .unwrap_or(f64::INFINITY);
    let wall = grid
        .boundary_faces()
        .iter()
        .map(|bf| match bf.axis {
            crate::grid::Axis::X => st.v.x[bf.face],
            crate::grid::Axis::Y => st.v.y[bf.face],
        })
        .fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let e_int = grid.integral_omega(&st.e).as_f64();
    let margin = [1e-12 - drift, min_c, min_e, 1e-10 - div, -wall]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let margin = if e_int.is_finite() { margin } else { f64::NEG_INFINITY };
    b.push(
        "H6.initial",
        margin,
        format!("drift={drift:.3e} min_c={min_c:.3e} min_e={min_e:.3e} max_div={div:.3e} wall={wall:.3e}"),
    );
}

#[allow(clippy::too_many_arguments)]
fn check_boundary<T: Scalar>(
    b: &mut Builder,
    grid: &Grid<T>,
    bc: &BoundarySpec<T>,
    d_rows: Worst,
    d_lo: Worst,
    d_hi: Worst,
    cmin: f64,
    cmax: f64,
) {
    let faces = bc.faces();
    let fold_min = |f: &dyn Fn(&crate::constitutive::BoundaryCoeffs<T>) -> T| {
        faces.iter().fold(f64::INFINITY, |m, x| m.min(f(x).as_f64()))
    };
    let fold_max = |f: &dyn Fn(&crate::constitutive::BoundaryCoeffs<T>) -> T| {
        faces.iter().fold(f64::NEG_INFINITY, |m, x| m.max(f(x).as_f64()))
    };
    let (int_d, int_k, int_l) = bc.transfer_integrals(grid);

    let g_min = fold_min(&|x| x.gamma);
    let g_max = fold_max(&|x| x.gamma);
    b.push(
        "H7.gamma",
        g_min.min(cmax - g_max),
        format!("gamma in [{g_min:.6e}, {g_max:.6e}]"),
    );

    b.upper("H8.column_sums", d_rows, EXACT_TOL);
    b.lower("H8.definite_lower", d_lo, cmin);
    b.upper("H8.definite_upper", d_hi, cmax);
    let d_min = fold_min(&|x| x.d);
    b.push(
        "H8.transfer",
        d_min.min(int_d.as_f64()),
        format!("min d={d_min:.6e} integral={:.6e}", int_d.as_f64()),
    );
    let th_min = fold_min(&|x| x.theta_g);
    b.push("H8.theta_boundary", th_min, format!("min theta_G={th_min:.6e}"));

    let k_min = fold_min(&|x| x.kappa_bar);
    b.push(
        "H9.transfer",
        k_min.min(int_k.as_f64()),
        format!("min kappa_bar={k_min:.6e} integral={:.6e}", int_k.as_f64()),
    );
    let l_min = fold_min(&|x| x.lambda_g);
    b.push(
        "H10.transfer",
        l_min.min(int_l.as_f64()),
        format!("min lambda={l_min:.6e} integral={:.6e}", int_l.as_f64()),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{BoundaryCoeffs, MaterialModel, MaterialParams};

    fn setup() -> (Grid<f64>, BoundarySpec<f64>) {
        let g = Grid::new_1d(8, 1.0).unwrap();
        let bc = BoundaryCoeffs {
            theta_g: 1.0,
            zeta_g: vec![-1.0; 3],
            phi_g: 0.0,
            d: 1.0,
            kappa_bar: 1.0,
            lambda_g: 1.0,
            gamma: 0.0,
        };
        let spec = BoundarySpec::uniform(&g, bc).unwrap();
        (g, spec)
    }

    fn small() -> SamplerConfig {
        SamplerConfig { samples: 2000, ..Default::default() }
    }

    #[test]
    fn default_model_passes() {
        let (g, bc) = setup();
        let m = MaterialModel::new(MaterialParams { m_amp: 0.05, rho0: 0.1, ..Default::default() }).unwrap();
        let rep = check_hypotheses(&m, &g, &bc, None, &small()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        assert!(rep.to_csv().starts_with("id,pass,margin,witness\n"));
    }

    #[test]
    fn out_of_range_beta_fails_only_the_range_check() {
        let (g, bc) = setup();
        let m = MaterialModel::new(MaterialParams { beta: 3.0, ..Default::default() }).unwrap();
        let rep = check_hypotheses(&m, &g, &bc, None, &small()).unwrap();
        assert!(!rep.get("H4.beta_range").unwrap().pass);
    }

    #[test]
    fn invalid_ranges_are_configuration_errors() {
        let (g, bc) = setup();
        let m = MaterialModel::new(MaterialParams::default()).unwrap();
        let cfg = SamplerConfig { theta_min: 10.0, theta_max: 1.0, ..Default::default() };
        assert!(matches!(check_hypotheses(&m, &g, &bc, None, &cfg), Err(Error::Config(_))));
    }
}
