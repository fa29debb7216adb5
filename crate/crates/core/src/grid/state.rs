use super::{FaceField, Grid};
use crate::error::{Error, Result};
use crate::scalar::{max_abs, Scalar};

/// Discrete fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<T> {
    /// One cell field per species.
    pub c: Vec<Vec<T>>,
    pub e: Vec<T>,
    pub v: FaceField<T>,
    pub p: Vec<T>,
    pub phi: Vec<T>,
    pub t: T,
}

impl<T: Scalar> FieldState<T> {
    /// Uniform state with `c = ℓ/L`, unit energy and rest velocity.
    pub fn uniform(grid: &Grid<T>, species: usize) -> Self {
        let n = grid.n_cells();
        let ci = T::one() / T::of_usize(species);
        FieldState {
            c: vec![vec![ci; n]; species],
            e: vec![T::one(); n],
            v: FaceField::zeros(grid),
            p: vec![T::zero(); n],
            phi: vec![T::zero(); n],
            t: T::zero(),
        }
    }

    pub fn species(&self) -> usize {
        self.c.len()
    }

    pub fn n_cells(&self) -> usize {
        self.e.len()
    }

    /// Concentration vector of one cell.
    pub fn c_at(&self, cell: usize) -> Vec<T> {
        self.c.iter().map(|ci| ci[cell]).collect()
    }

    pub fn check_shape(&self, grid: &Grid<T>) -> Result<()> {
        let n = grid.n_cells();
        let ok = self.c.iter().all(|ci| ci.len() == n)
            && self.e.len() == n
            && self.p.len() == n
            && self.phi.len() == n
            && self.v.x.len() == grid.n_xfaces()
            && self.v.y.len() == grid.n_yfaces();
        if ok && self.c.len() >= 2 {
            Ok(())
        } else {
            Err(Error::Shape("field state does not match grid".into()))
        }
    }

    pub fn min_c(&self) -> T {
        self.c
            .iter()
            .flat_map(|ci| ci.iter())
            .fold(T::infinity(), |m, &x| m.min(x))
    }

    pub fn min_e(&self) -> T {
        self.e.iter().fold(T::infinity(), |m, &x| m.min(x))
    }

    /// `max |Σ_i c_i − 1|` over cells.
    pub fn simplex_drift(&self) -> T {
        (0..self.n_cells()).fold(T::zero(), |m, k| {
            let s = self.c.iter().fold(T::zero(), |acc, ci| acc + ci[k]);
            m.max((s - T::one()).abs())
        })
    }

    /// Errors unless every concentration and the energy are positive and finite.
    pub fn check_admissible(&self) -> Result<()> {
        for (i, ci) in self.c.iter().enumerate() {
            if let Some(k) = ci.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
                return Err(Error::State(format!("c[{i}] = {} at cell {k}", ci[k])));
            }
        }
        if let Some(k) = self.e.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::State(format!("e = {} at cell {k}", self.e[k])));
        }
        Ok(())
    }

    /// Discrete L² distance over `(c, e, v, φ)`.
    pub fn distance(&self, other: &Self, grid: &Grid<T>) -> T {
        let w = grid.cell_volume();
        let sq = |a: &[T], b: &[T]| {
            a.iter()
                .zip(b)
                .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        };
        let mut s = T::zero();
        for (a, b) in self.c.iter().zip(&other.c) {
            s = s + sq(a, b);
        }
        s = s + sq(&self.e, &other.e) + sq(&self.phi, &other.phi);
        s = s + sq(&self.v.x, &other.v.x) + sq(&self.v.y, &other.v.y);
        (s * w).sqrt()
    }

    pub fn max_speed(&self) -> T {
        self.v.max_abs()
    }

    /// Largest absolute entry of any field; used to detect blow-up.
    pub fn max_magnitude(&self) -> T {
        let mut m = max_abs(&self.e).max(max_abs(&self.phi));
        for ci in &self.c {
            m = m.max(max_abs(ci));
        }
        m.max(self.v.max_abs())
    }
}
