//! Small symmetric tensors and the power-law stress.

use std::ops::{Add, Mul, Sub};

use crate::scalar::Scalar;

/// Symmetric `N × N` tensor stored densely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor<T, const N: usize> {
    pub m: [[T; N]; N],
}

impl<T: Scalar, const N: usize> SymTensor<T, N> {
    pub fn zero() -> Self {
        SymTensor { m: [[T::zero(); N]; N] }
    }

    /// Symmetric part of an arbitrary matrix.
    pub fn sym(a: [[T; N]; N]) -> Self {
        let mut m = [[T::zero(); N]; N];
        for i in 0..N {
            for j in 0..N {
                m[i][j] = T::half() * (a[i][j] + a[j][i]);
            }
        }
        SymTensor { m }
    }

    pub fn diag(d: [T; N]) -> Self {
        let mut t = Self::zero();
        for i in 0..N {
            t.m[i][i] = d[i];
        }
        t
    }

    /// `A : B = Σ_ij A_ij B_ij`.
    pub fn ddot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..N {
            for j in 0..N {
                s = s + self.m[i][j] * other.m[i][j];
            }
        }
        s
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn trace(&self) -> T {
        (0..N).fold(T::zero(), |s, i| s + self.m[i][i])
    }

    pub fn scale(&self, a: T) -> Self {
        let mut t = *self;
        t.m.iter_mut().flatten().for_each(|x| *x = *x * a);
        t
    }

    /// Removes the trace.
    pub fn deviatoric(&self) -> Self {
        let tr = self.trace() / T::of_usize(N);
        let mut t = *self;
        for i in 0..N {
            t.m[i][i] = t.m[i][i] - tr;
        }
        t
    }
}

impl<T: Scalar, const N: usize> Add for SymTensor<T, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Scalar, const N: usize> Sub for SymTensor<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-T::one())
    }
}

impl<T: Scalar, const N: usize> Mul<T> for SymTensor<T, N> {
    type Output = Self;
    fn mul(self, a: T) -> Self {
        self.scale(a)
    }
}

/// Power-law factor `1 + |D|^{r−1}` multiplying `g` in `S = g (1 + |D|^{r−1}) D`.
#[inline]
pub fn power_law_factor<T: Scalar>(norm_d: T, r: T) -> T {
    if norm_d == T::zero() {
        T::one()
    } else {
        T::one() + norm_d.powf(r - T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_algebra() {
        let d = SymTensor::diag([1.0, -1.0]);
        assert!((d.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.trace(), 0.0);
        let s = SymTensor::<f64, 3>::sym([[1.0, 2.0, 0.0], [0.0, 1.0, 4.0], [0.0, 0.0, 1.0]]);
        assert_eq!(s.m[0][1], 1.0);
        assert_eq!(s.m[2][1], 2.0);
        assert!(s.deviatoric().trace().abs() < 1e-15);
        assert_eq!((s - s).norm(), 0.0);
    }
}
