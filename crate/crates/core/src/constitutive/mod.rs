//! Constitutive laws: stress, mobility, thermo-diffusion, conductivity,
//! reactions, entropies and boundary transfer coefficients.

mod entropy;
mod stress;
pub mod validate;

pub use entropy::{
    e_of_theta, entropy_c, entropy_c_regularized, entropy_e, entropy_e_prime, entropy_e_second,
    theta_of_e, theta_slope, zeta, zeta_regularized, zeta_slope, ENERGY_ENTROPY_CONSTANT,
};
pub use stress::{power_law_factor, SymTensor};

use crate::error::{Error, Result};
use crate::grid::{complete_zero_sum, project_ell, ChargeNeutralProjector};
use crate::scalar::{dot, Scalar};

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temperature θ = {theta} must be positive")))
    }
}

/// Writes `a · P_ℓ` into `out` (row-major `L × L`) with exactly vanishing
/// row and column sums.
pub fn scaled_projection_into<T: Scalar>(a: T, species: usize, out: &mut [T]) {
    let n = species;
    let inv = T::one() / T::of_usize(n);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let delta = if i == j { T::one() } else { T::zero() };
            out[i * n + j] = a * (delta - inv);
        }
    }
    complete_symmetric_zero_sum(n, out);
}

/// Fills the last row and column of a symmetric matrix whose leading
/// `(L−1) × (L−1)` block is set, so that all row and column sums vanish.
pub fn complete_symmetric_zero_sum<T: Scalar>(n: usize, out: &mut [T]) {
    let last = n - 1;
    let mut corner = T::zero();
    for i in 0..last {
        let row = (0..last).fold(T::zero(), |s, j| s + out[i * n + j]);
        out[i * n + last] = -row;
        out[last * n + i] = -row;
        corner = corner + row;
    }
    out[last * n + last] = corner;
}

/// Constitutive laws consumed by the transport, momentum and validator code.
///
/// Matrices are row-major `L × L` slices. Implementors only need the scalar
/// laws; the provided methods assemble tensors and vectors from them.
pub trait MaterialLaws<T: Scalar> {
    fn species(&self) -> usize;
    fn charges(&self) -> &[T];
    fn beta(&self) -> T;
    fn eps0(&self) -> T;
    fn r_exponent(&self) -> T;

    /// Bounded viscosity factor `g(c, θ)`.
    fn viscosity_factor(&self, c: &[T], theta: T) -> T;

    /// Scalar mobility `M(θ)`.
    fn mobility_scalar(&self, theta: T) -> Result<T>;

    fn mobility_into(&self, c: &[T], theta: T, out: &mut [T]) -> Result<()>;

    fn thermo_into(&self, c: &[T], theta: T, out: &mut [T]) -> Result<()>;

    fn heat_conductivity(&self, c: &[T], theta: T) -> Result<T>;

    fn reaction(&self, c: &[T], theta: T, zeta: &[T]) -> Vec<T>;

    /// Secant viscosity `η` such that `S = η D`.
    fn viscosity(&self, c: &[T], theta: T, norm_d: T) -> T {
        self.viscosity_factor(c, theta) * power_law_factor(norm_d, self.r_exponent())
    }

    fn stress<const N: usize>(&self, c: &[T], theta: T, d: &SymTensor<T, N>) -> SymTensor<T, N>
    where
        Self: Sized,
    {
        d.scale(self.viscosity(c, theta, d.norm()))
    }

    fn mobility_matrix(&self, c: &[T], theta: T) -> Result<Vec<T>> {
        let n = self.species();
        let mut out = vec![T::zero(); n * n];
        self.mobility_into(c, theta, &mut out)?;
        Ok(out)
    }

    fn thermo_vector(&self, c: &[T], theta: T) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.species()];
        self.thermo_into(c, theta, &mut out)?;
        Ok(out)
    }

    /// `xᵀ 𝔐 x`; implementors may override with a form that is
    /// nonnegative by construction.
    fn mobility_quadratic(&self, c: &[T], theta: T, x: &[T], scratch: &mut [T]) -> Result<T> {
        let n = self.species();
        self.mobility_into(c, theta, scratch)?;
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s = s + x[i] * scratch[i * n + j] * x[j];
            }
        }
        Ok(s)
    }

    /// Reaction entropy production `−ζ·r`.
    fn reaction_production(&self, c: &[T], theta: T, zeta: &[T]) -> T {
        -dot(zeta, &self.reaction(c, theta, zeta))
    }

    /// Boundary transfer matrix `𝔇 = d P_ℓ`.
    fn boundary_matrix_into(&self, d: T, _c: &[T], _theta: T, out: &mut [T]) {
        scaled_projection_into(d, self.species(), out);
    }

    /// Boundary heat transfer coefficient `κ_Γ = κ̄`.
    fn boundary_conductivity(&self, kappa_bar: T, _c: &[T], _theta: T) -> T {
        kappa_bar
    }
}

/// Parameters of the default material model.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams<T> {
    pub z: Vec<T>,
    pub r_exponent: T,
    /// `g(θ) = g_lower + (g_upper − g_lower) / (1 + θ)`.
    pub g_lower: T,
    pub g_upper: T,
    pub beta: T,
    pub eps0: T,
    pub m_amp: T,
    pub kappa0: T,
    pub rho0: T,
}

impl<T: Scalar> Default for MaterialParams<T> {
    fn default() -> Self {
        MaterialParams {
            z: vec![T::one(), -T::one(), T::zero()],
            r_exponent: T::two(),
            g_lower: T::half(),
            g_upper: T::one(),
            beta: T::one(),
            eps0: T::of(0.1),
            m_amp: T::zero(),
            kappa0: T::one(),
            rho0: T::zero(),
        }
    }
}

/// The default material model; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel<T> {
    params: MaterialParams<T>,
    projector: ChargeNeutralProjector<T>,
}

impl<T: Scalar> MaterialModel<T> {
    /// Checks that every law is well defined. Whether the parameters satisfy
    /// the structural hypotheses is left to [`validate::check_hypotheses`].
    pub fn new(params: MaterialParams<T>) -> Result<Self> {
        let p = &params;
        let fail = |m: String| Err(Error::Config(m));
        if p.z.len() < 2 {
            return fail(format!("need at least two species, got {}", p.z.len()));
        }
        if p.z.iter().any(|z| !z.is_finite()) {
            return fail("charges must be finite".into());
        }
        if !(p.r_exponent > T::one()) || !p.r_exponent.is_finite() {
            return fail(format!("r_exponent = {} must exceed 1", p.r_exponent));
        }
        if !(p.g_lower >= T::zero()) || !(p.g_upper >= p.g_lower) || !p.g_upper.is_finite() {
            return fail("viscosity bounds need 0 <= g_lower <= g_upper < inf".into());
        }
        if !(p.beta >= T::zero()) || !p.beta.is_finite() {
            return fail(format!("beta = {} must be nonnegative", p.beta));
        }
        if !(p.eps0 > T::zero()) || !p.eps0.is_finite() {
            return fail(format!("eps0 = {} must be positive", p.eps0));
        }
        if !(p.m_amp >= T::zero()) || !p.m_amp.is_finite() {
            return fail(format!("m_amp = {} must be nonnegative", p.m_amp));
        }
        if !(p.kappa0 > T::zero()) || !p.kappa0.is_finite() {
            return fail(format!("kappa0 = {} must be positive", p.kappa0));
        }
        if !(p.rho0 >= T::zero()) || !p.rho0.is_finite() {
            return fail(format!("rho0 = {} must be nonnegative", p.rho0));
        }
        let projector = ChargeNeutralProjector::new(&params.z);
        Ok(MaterialModel { params, projector })
    }

    pub fn params(&self) -> &MaterialParams<T> {
        &self.params
    }

    pub fn with_charges(&self, z: Vec<T>) -> Result<Self> {
        Self::new(MaterialParams { z, ..self.params.clone() })
    }

    /// Amplitude law `ŝ(θ)` of the thermo-diffusion vector.
    pub fn thermo_amplitude(&self, theta: T) -> Result<T> {
        check_theta(theta)?;
        let (b, e0) = (self.params.beta, self.params.eps0);
        let m = self.mobility_scalar(theta)?;
        let envelope = if theta < T::one() {
            (m * theta.powf(-b + e0)).min(theta.powf(-T::two() * (b - T::one()) + e0))
        } else {
            m * theta
        };
        let raw = theta.powf(b + e0).min(theta) * m;
        Ok(raw.min(envelope).sqrt())
    }

    /// Projection of `ζ` onto the complement of `span{ℓ, z}`.
    pub fn reaction_direction(&self, zeta: &[T]) -> Vec<T> {
        self.projector.apply(zeta)
    }
}

impl<T: Scalar> MaterialLaws<T> for MaterialModel<T> {
    fn species(&self) -> usize {
        self.params.z.len()
    }

    fn charges(&self) -> &[T] {
        &self.params.z
    }

    fn beta(&self) -> T {
        self.params.beta
    }

    fn eps0(&self) -> T {
        self.params.eps0
    }

    fn r_exponent(&self) -> T {
        self.params.r_exponent
    }

    fn viscosity_factor(&self, _c: &[T], theta: T) -> T {
        let p = &self.params;
        let th = theta.max(T::zero());
        p.g_lower + (p.g_upper - p.g_lower) / (T::one() + th)
    }

    fn mobility_scalar(&self, theta: T) -> Result<T> {
        check_theta(theta)?;
        let (b, e0) = (self.params.beta, self.params.eps0);
        Ok(if theta < T::one() {
            T::one().min(theta.powf(b - e0))
        } else {
            (T::half() * (T::one() + theta)).powf(T::of(5.0 / 3.0) - e0)
        })
    }

    fn mobility_into(&self, _c: &[T], theta: T, out: &mut [T]) -> Result<()> {
        let m = self.mobility_scalar(theta)?;
        scaled_projection_into(m, self.species(), out);
        Ok(())
    }

    fn thermo_into(&self, _c: &[T], theta: T, out: &mut [T]) -> Result<()> {
        out.iter_mut().for_each(|x| *x = T::zero());
        if self.params.m_amp == T::zero() {
            return check_theta(theta);
        }
        let a = self.params.m_amp * self.thermo_amplitude(theta)?;
        out[0] = a;
        out[1] = -a;
        Ok(())
    }

    fn heat_conductivity(&self, _c: &[T], theta: T) -> Result<T> {
        check_theta(theta)?;
        Ok(self.params.kappa0 * (T::one() + theta.powf(-self.params.beta)))
    }

    fn mobility_quadratic(&self, _c: &[T], theta: T, x: &[T], _scratch: &mut [T]) -> Result<T> {
        let px = project_ell(x);
        Ok(self.mobility_scalar(theta)? * dot(&px, &px))
    }

    fn reaction_production(&self, _c: &[T], _theta: T, zeta: &[T]) -> T {
        if self.params.rho0 == T::zero() {
            return T::zero();
        }
        let pz = self.projector.apply(zeta);
        let n2 = dot(&pz, &pz);
        self.params.rho0 * n2 / (T::one() + n2.sqrt())
    }

    fn reaction(&self, _c: &[T], _theta: T, zeta: &[T]) -> Vec<T> {
        if self.params.rho0 == T::zero() {
            return vec![T::zero(); zeta.len()];
        }
        let pz = self.projector.apply(zeta);
        let norm = dot(&pz, &pz).sqrt();
        let s = -self.params.rho0 / (T::one() + norm);
        let mut r: Vec<T> = pz.iter().map(|&x| s * x).collect();
        complete_zero_sum(&mut r);
        r
    }
}

/// Transfer data on one boundary segment.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCoeffs<T> {
    pub theta_g: T,
    pub zeta_g: Vec<T>,
    pub phi_g: T,
    pub d: T,
    pub kappa_bar: T,
    pub lambda_g: T,
    pub gamma: T,
}

impl<T: Scalar> BoundaryCoeffs<T> {
    /// Insulating, impermeable wall with the given species count.
    pub fn wall(species: usize) -> Self {
        BoundaryCoeffs {
            theta_g: T::one(),
            zeta_g: vec![-T::of_usize(species).ln(); species],
            phi_g: T::zero(),
            d: T::zero(),
            kappa_bar: T::zero(),
            lambda_g: T::zero(),
            gamma: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.zeta_g.iter().all(|z| z.is_finite()) && self.phi_g.is_finite();
        if !(self.theta_g > T::zero()) || !self.theta_g.is_finite() {
            return Err(Error::Config(format!("theta = {} must be positive", self.theta_g)));
        }
        if !finite {
            return Err(Error::Config("zeta and phi must be finite".into()));
        }
        for (name, v) in [
            ("d", self.d),
            ("kappa_bar", self.kappa_bar),
            ("lambda", self.lambda_g),
            ("gamma", self.gamma),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} must be nonnegative")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> MaterialModel<f64> {
        MaterialModel::new(MaterialParams { m_amp: 0.5, rho0: 0.3, ..Default::default() }).unwrap()
    }

    #[test]
    fn mobility_with_unit_scalar_is_the_projection() {
        let m = model();
        let mm = m.mobility_matrix(&[0.2, 0.3, 0.5], 1.0).unwrap();
        let expect = [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
        assert!((m.mobility_scalar(1.0).unwrap() - 1.0).abs() < 1e-15);
        for j in 0..3 {
            assert!((mm[j] - expect[j]).abs() < 1e-15);
        }
        let w = [1.0, 0.0, 0.0];
        let q: f64 = (0..3).map(|i| (0..3).map(|j| w[i] * mm[i * 3 + j] * w[j]).sum::<f64>()).sum();
        assert!((q - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_sums_are_exact() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let theta = 10f64.powf(rng.gen_range(-3.0..3.0));
            let mm = m.mobility_matrix(&[0.3, 0.3, 0.4], theta).unwrap();
            for j in 0..3 {
                let col = (0..3).fold(0.0, |s, i| s + mm[i * 3 + j]);
                assert_eq!(col, 0.0);
                assert_eq!(mm[j * 3 + 1], mm[3 + j]);
            }
            let mv = m.thermo_vector(&[0.3, 0.3, 0.4], theta).unwrap();
            assert_eq!(mv.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn reaction_constraints() {
        let m = model();
        let z = [1.0, -1.0, 0.0];
        let r = m.reaction(&[0.3; 3], 1.0, &[0.5 + 2.0, 0.5 - 2.0, 0.5]);
        assert!(r.iter().all(|x| x.abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let zeta: Vec<f64> = (0..3).map(|_| rng.gen_range(-20.0..5.0)).collect();
            let r = m.reaction(&[0.3; 3], 1.0, &zeta);
            assert!(r.iter().sum::<f64>().abs() <= 1e-15);
            assert!(dot(&r, &z).abs() <= 1e-15);
            assert!(dot(&r, &zeta) <= 0.0);
            assert!(dot(&r, &r).sqrt() <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn conductivity_and_constructor_checks() {
        let m = MaterialModel::new(MaterialParams::<f64>::default()).unwrap();
        assert_eq!(m.heat_conductivity(&[0.5, 0.5], 1.0).unwrap(), 2.0);
        assert!(m.heat_conductivity(&[0.5, 0.5], 1e-9).unwrap() > 1e8);
        assert!(m.heat_conductivity(&[0.5, 0.5], 0.0).is_err());
        assert!(m.mobility_matrix(&[0.5, 0.5], -1.0).is_err());
        let bad = MaterialParams::<f64> { kappa0: -1.0, ..Default::default() };
        assert!(matches!(MaterialModel::new(bad), Err(Error::Config(_))));
        let beta3 = MaterialParams::<f64> { beta: 3.0, ..Default::default() };
        assert!(MaterialModel::new(beta3).is_ok());
    }

    #[test]
    fn stress_example() {
        let m = MaterialModel::new(MaterialParams::<f64> { g_lower: 1.0, g_upper: 1.0, ..Default::default() })
            .unwrap();
        let d = SymTensor::diag([1.0, -1.0]);
        let s = m.stress(&[0.5, 0.5, 0.0], 1.0, &d);
        assert!((s.m[0][0] - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert_eq!(m.stress(&[0.5; 3], 1.0, &SymTensor::<f64, 3>::zero()).norm(), 0.0);
    }
}
