//! Matrix-free Krylov iterations.

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Scalar};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (u, &v) in y.iter_mut().zip(x) {
        *u = *u + a * v;
    }
}

/// Conjugate gradients for a symmetric positive semi-definite operator.
///
/// `project` is applied to the residual and iterates so that a singular
/// operator with a known kernel (constants for the Neumann problem) is
/// handled on the complement.
pub fn conjugate_gradient<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    project: impl Fn(&mut [T]),
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let mut rhs = b.to_vec();
    project(&mut rhs);
    let bnorm = norm(&rhs);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(KrylovStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut ax = vec![T::zero(); n];
    apply(x, &mut ax);
    let mut r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
    project(&mut r);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![T::zero(); n];
    for it in 0..=max_iter {
        let res = rr.sqrt() / bnorm;
        if res <= tol {
            return Ok(KrylovStats { iterations: it, relative_residual: res.as_f64() });
        }
        if it == max_iter {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            break;
        }
        let alpha = rr / pap;
        axpy(x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        project(&mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::Solver { iterations: max_iter, residual: (rr.sqrt() / bnorm).as_f64() })
}

/// BiCGSTAB for a general nonsingular operator.
pub fn bicgstab<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(KrylovStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut tmp = vec![T::zero(); n];
    apply(x, &mut tmp);
    let mut r: Vec<T> = b.iter().zip(&tmp).map(|(&b, &a)| b - a).collect();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut res = norm(&r) / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(KrylovStats { iterations: it, relative_residual: res.as_f64() });
        }
        let rho_new = dot(&r0, &r);
        if rho_new == T::zero() || omega == T::zero() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        let r0v = dot(&r0, &v);
        if r0v == T::zero() {
            break;
        }
        alpha = rho / r0v;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            axpy(x, alpha, &p);
            apply(x, &mut tmp);
            let rr: Vec<T> = b.iter().zip(&tmp).map(|(&b, &a)| b - a).collect();
            res = norm(&rr) / bnorm;
            r = rr;
            continue;
        }
        apply(&s, &mut t);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            break;
        }
        omega = dot(&t, &s) / tt;
        axpy(x, alpha, &p);
        axpy(x, omega, &s);
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
    }
    if res <= tol {
        return Ok(KrylovStats { iterations: max_iter, relative_residual: res.as_f64() });
    }
    Err(Error::Solver { iterations: max_iter, residual: res.as_f64() })
}
