//! Model entropies and the induced chemical potential and temperature.
//!
//! `s_c(c) = Σ (c_i − c_i ln c_i)` and the piecewise `s_e` with `a = ½`,
//! matched to second order at `e = 1`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_positive<T: Scalar>(c: &[T]) -> Result<()> {
    match c.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
        Some(i) => Err(Error::Domain(format!("concentration c[{i}] = {} must be positive", c[i]))),
        None => Ok(()),
    }
}

/// `ζ_i = ln c_i`.
pub fn zeta<T: Scalar>(c: &[T]) -> Result<Vec<T>> {
    check_positive(c)?;
    Ok(c.iter().map(|&x| x.ln()).collect())
}

/// `ζ^ε_i = ln c_i − ε / c_i`, the potential of `s_c + ε Σ ln c_i`.
pub fn zeta_regularized<T: Scalar>(c: &[T], epsilon: T) -> Result<Vec<T>> {
    if epsilon < T::zero() {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be nonnegative")));
    }
    check_positive(c)?;
    Ok(c.iter().map(|&x| x.ln() - epsilon / x).collect())
}

/// `dζ^ε_i / dc_i`.
pub fn zeta_slope<T: Scalar>(ci: T, epsilon: T) -> T {
    T::one() / ci + epsilon / (ci * ci)
}

pub fn entropy_c<T: Scalar>(c: &[T]) -> Result<T> {
    check_positive(c)?;
    Ok(c.iter().fold(T::zero(), |acc, &x| acc + x - x * x.ln()))
}

pub fn entropy_c_regularized<T: Scalar>(c: &[T], epsilon: T) -> Result<T> {
    let s = entropy_c(c)?;
    Ok(c.iter().fold(s, |acc, &x| acc + epsilon * x.ln()))
}

fn check_energy<T: Scalar>(e: T) -> Result<()> {
    if e < T::zero() || !e.is_finite() {
        Err(Error::Domain(format!("internal energy e = {e} must be nonnegative")))
    } else {
        Ok(())
    }
}

/// `s_e(e) = √e` for `e ≤ 1`, `1 − ln 2 + ln(e + 1)` above.
pub fn entropy_e<T: Scalar>(e: T) -> Result<T> {
    check_energy(e)?;
    Ok(if e <= T::one() {
        e.sqrt()
    } else {
        T::one() - T::LN_2() + (e + T::one()).ln()
    })
}

/// `s_e'(e) = 1/θ(e)`.
pub fn entropy_e_prime<T: Scalar>(e: T) -> Result<T> {
    Ok(T::one() / theta_of_e(e)?)
}

pub fn entropy_e_second<T: Scalar>(e: T) -> Result<T> {
    check_energy(e)?;
    Ok(if e <= T::one() {
        -T::of(0.25) / (e * e * e).sqrt()
    } else {
        -T::one() / ((e + T::one()) * (e + T::one()))
    })
}

/// Temperature `θ = 1 / s_e'(e)`.
pub fn theta_of_e<T: Scalar>(e: T) -> Result<T> {
    check_energy(e)?;
    Ok(if e <= T::one() { T::two() * e.sqrt() } else { e + T::one() })
}

pub fn e_of_theta<T: Scalar>(theta: T) -> Result<T> {
    if theta < T::zero() || !theta.is_finite() {
        return Err(Error::Domain(format!("temperature θ = {theta} must be nonnegative")));
    }
    Ok(if theta <= T::two() {
        theta * theta / T::of(4.0)
    } else {
        theta - T::one()
    })
}

/// `dθ/de`, infinite at `e = 0`.
pub fn theta_slope<T: Scalar>(e: T) -> T {
    if e <= T::one() {
        T::one() / e.sqrt()
    } else {
        T::one()
    }
}

/// Constant `C` in `e − 2 s_e(e) + C ≥ 0`.
pub const ENERGY_ENTROPY_CONSTANT: f64 = 1.0;
