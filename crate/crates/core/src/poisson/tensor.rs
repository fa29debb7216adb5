//! Direct solver for separable operators `A_x ⊗ I + I ⊗ A_y` built from
//! tridiagonal one-dimensional factors.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cyclic Jacobi eigen-decomposition of a dense symmetric matrix.
///
/// Returns the eigenvalues and the row-major matrix whose columns are the
/// orthonormal eigenvectors.
pub fn symmetric_eigen<T: Scalar>(mut a: Vec<T>, n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs())).max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= T::epsilon() * T::of(1e-3) * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let tau = (aqq - app) / (T::two() * apq);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let lam = (0..n).map(|i| a[i * n + i]).collect();
    (lam, v)
}

/// Diagonalization `A = S⁻¹ Q Λ Qᵀ S` of a tridiagonal matrix whose
/// off-diagonal products are positive.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    n: usize,
    s: Vec<T>,
    q: Vec<T>,
    lam: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    /// `lower[i] = A[i][i−1]` (entry 0 unused), `upper[i] = A[i][i+1]`.
    pub fn new(diag: &[T], lower: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        let mut s = vec![T::one(); n];
        let mut b = vec![T::zero(); n * n];
        for i in 0..n {
            b[i * n + i] = diag[i];
        }
        for i in 0..n.saturating_sub(1) {
            let (u, l) = (upper[i], lower[i + 1]);
            if !(u * l > T::zero()) {
                return Err(Error::Config("operator is not symmetrizable".into()));
            }
            s[i + 1] = s[i] * (u / l).sqrt();
            let off = u.signum() * (u * l).sqrt();
            b[i * n + i + 1] = off;
            b[(i + 1) * n + i] = off;
        }
        let (lam, q) = symmetric_eigen(b, n);
        Ok(Tridiagonal { n, s, q, lam })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.lam
    }

    /// `w = Qᵀ S x` on a strided line of `data`.
    fn forward(&self, data: &mut [T], start: usize, stride: usize, buf: &mut [T]) {
        let n = self.n;
        for k in 0..n {
            let mut acc = T::zero();
            for i in 0..n {
                acc = acc + self.q[i * n + k] * self.s[i] * data[start + i * stride];
            }
            buf[k] = acc;
        }
        for k in 0..n {
            data[start + k * stride] = buf[k];
        }
    }

    /// `x = S⁻¹ Q w` on a strided line of `data`.
    fn backward(&self, data: &mut [T], start: usize, stride: usize, buf: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + self.q[i * n + k] * data[start + k * stride];
            }
            buf[i] = acc / self.s[i];
        }
        for i in 0..n {
            data[start + i * stride] = buf[i];
        }
    }
}

/// Solver for `(A_x ⊗ I + I ⊗ A_y) u = f` on row-major cell arrays.
#[derive(Debug, Clone)]
pub struct TensorSolver<T> {
    x: Tridiagonal<T>,
    y: Option<Tridiagonal<T>>,
    /// Drop the (unique) null mode instead of dividing by it.
    singular: bool,
}

impl<T: Scalar> TensorSolver<T> {
    pub fn new(x: Tridiagonal<T>, y: Option<Tridiagonal<T>>, singular: bool) -> Self {
        TensorSolver { x, y, singular }
    }

    pub fn solve(&self, f: &[T]) -> Vec<T> {
        let nx = self.x.n;
        let ny = self.y.as_ref().map_or(1, |y| y.n);
        let mut u = f.to_vec();
        let mut buf = vec![T::zero(); nx.max(ny)];
        for j in 0..ny {
            self.x.forward(&mut u, j * nx, 1, &mut buf);
        }
        if let Some(y) = &self.y {
            for i in 0..nx {
                y.forward(&mut u, i, nx, &mut buf);
            }
        }
        let null = if self.singular { Some(self.null_mode()) } else { None };
        for j in 0..ny {
            let ly = self.y.as_ref().map_or(T::zero(), |y| y.lam[j]);
            for i in 0..nx {
                let k = j * nx + i;
                if null == Some((i, j)) {
                    u[k] = T::zero();
                } else {
                    u[k] = u[k] / (self.x.lam[i] + ly);
                }
            }
        }
        if let Some(y) = &self.y {
            for i in 0..nx {
                y.backward(&mut u, i, nx, &mut buf);
            }
        }
        for j in 0..ny {
            self.x.backward(&mut u, j * nx, 1, &mut buf);
        }
        u
    }

    fn null_mode(&self) -> (usize, usize) {
        let argmin = |l: &[T]| {
            l.iter()
                .enumerate()
                .fold((0, T::infinity()), |(bi, bv), (i, &v)| if v.abs() < bv { (i, v.abs()) } else { (bi, bv) })
                .0
        };
        (argmin(&self.x.lam), self.y.as_ref().map_or(0, |y| argmin(&y.lam)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs_matrix() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i + j) as f64) + if i == j { 2.0 } else { 0.0 };
            }
        }
        let (lam, v) = symmetric_eigen(a.clone(), n);
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| v[i * n + k] * lam[k] * v[j * n + k]).sum();
                assert!((r - a[i * n + j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn nonsymmetric_tridiagonal_solve() {
        let n = 6;
        let diag = vec![4.0; n];
        let lower = vec![-1.0; n];
        let mut upper = vec![-1.0; n];
        upper[0] = -2.0;
        let t = Tridiagonal::new(&diag, &lower, &upper).unwrap();
        let solver = TensorSolver::new(t, None, false);
        let f: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let u = solver.solve(&f);
        for i in 0..n {
            let mut r = diag[i] * u[i];
            if i > 0 {
                r += lower[i] * u[i - 1];
            }
            if i + 1 < n {
                r += upper[i] * u[i + 1];
            }
            assert!((r - f[i]).abs() < 1e-12);
        }
    }
}
