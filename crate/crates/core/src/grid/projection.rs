//! Algebraic projections on species space.

use crate::scalar::{dot, sum, Scalar};

/// `P_ℓ w = w − (ℓ·w / L) ℓ`, the projection annihilating the all-ones vector.
pub fn project_ell<T: Scalar>(w: &[T]) -> Vec<T> {
    let mut out = w.to_vec();
    if w.is_empty() {
        return out;
    }
    let mean = sum(w) / T::of_usize(w.len());
    for x in &mut out {
        *x = *x - mean;
    }
    complete_zero_sum(&mut out);
    out
}

/// Overwrites the last component so the components sum to zero exactly
/// (the left-to-right sum of the result is `0` up to one rounding of the
/// negation, which is exact).
pub fn complete_zero_sum<T: Scalar>(w: &mut [T]) {
    if let Some((last, head)) = w.split_last_mut() {
        *last = -sum(head);
    }
}

/// Orthogonal projection onto the complement of `span{ℓ, z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeNeutralProjector<T> {
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> ChargeNeutralProjector<T> {
    pub fn new(z: &[T]) -> Self {
        let n = z.len();
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(2);
        let ell = vec![T::one() / T::of_usize(n).sqrt(); n];
        basis.push(ell);
        let mut u = z.to_vec();
        for _ in 0..2 {
            for b in &basis {
                let a = dot(b, &u);
                for (x, &y) in u.iter_mut().zip(b) {
                    *x = *x - a * y;
                }
            }
        }
        let nu = dot(&u, &u).sqrt();
        let scale = dot(z, z).sqrt().max(T::one());
        if nu > T::of(1e-12) * scale {
            basis.push(u.iter().map(|&x| x / nu).collect());
        }
        ChargeNeutralProjector { basis }
    }

    /// Dimension of the annihilated subspace (1 when `z ∥ ℓ` or `z = 0`).
    pub fn kernel_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, w: &[T]) -> Vec<T> {
        let mut out = w.to_vec();
        // Two sweeps of classical Gram–Schmidt keep the residual at round-off.
        for _ in 0..2 {
            for b in &self.basis {
                let a = dot(b, &out);
                for (x, &y) in out.iter_mut().zip(b) {
                    *x = *x - a * y;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ell_is_annihilated() {
        assert_eq!(project_ell(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(project_ell(&[1.0, 0.0]), vec![0.5, -0.5]);
    }

    #[test]
    fn charge_projector_kernel() {
        let p = ChargeNeutralProjector::new(&[1.0f64, -1.0, 0.0]);
        assert_eq!(p.kernel_dim(), 2);
        let w = p.apply(&[2.0 + 0.5, 2.0 - 0.5, 2.0]);
        assert!(w.iter().all(|x| x.abs() < 1e-15));
        let neutral = ChargeNeutralProjector::new(&[0.0, 0.0]);
        assert_eq!(neutral.kernel_dim(), 1);
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(w in prop::collection::vec(-10.0f64..10.0, 2..6)) {
            let once = project_ell(&w);
            let twice = project_ell(&once);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()) * 10.0);
            }
            prop_assert_eq!(sum(&once), 0.0);
        }

        #[test]
        fn charge_projection_is_orthogonal(w in prop::collection::vec(-10.0f64..10.0, 4)) {
            let z = [1.0, -1.0, 2.0, 0.0];
            let p = ChargeNeutralProjector::new(&z);
            let pw = p.apply(&w);
            prop_assert!(sum(&pw).abs() < 1e-13);
            prop_assert!(dot(&pw, &z).abs() < 1e-13);
        }
    }
}
