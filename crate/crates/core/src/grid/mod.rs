//! Structured rectangular grid with MAC staggering.
//!
//! Scalars live at cell centers, velocity components on the faces normal to
//! them. Cells are numbered row-major (`j * nx + i`). In one dimension the
//! grid is a single row of cells of unit height with no y-faces.

mod boundary;
mod projection;
pub mod snapshot;
mod state;

pub use boundary::{BoundarySpec, Profile};
pub use projection::{complete_zero_sum, project_ell, ChargeNeutralProjector};
pub use state::FieldState;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Boundary segments of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Left,
    Right,
    Bottom,
    Top,
}

impl Segment {
    pub const ALL: [Segment; 4] = [Segment::Left, Segment::Right, Segment::Bottom, Segment::Top];

    pub fn name(self) -> &'static str {
        match self {
            Segment::Left => "left",
            Segment::Right => "right",
            Segment::Bottom => "bottom",
            Segment::Top => "top",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Segment::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A face on the domain boundary together with the cells next to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace<T> {
    pub segment: Segment,
    pub axis: Axis,
    /// Index into the x- or y-face array.
    pub face: usize,
    /// Cell adjacent to the face.
    pub cell: usize,
    /// Second cell inward along the normal.
    pub inner: usize,
    /// Position along the segment (0-based).
    pub along: usize,
    pub area: T,
    /// +1 when the outward normal points along the positive axis.
    pub outward: T,
}

/// Face-centered field: x-components on x-faces, y-components on y-faces.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> FaceField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        FaceField {
            x: vec![T::zero(); grid.n_xfaces()],
            y: vec![T::zero(); grid.n_yfaces()],
        }
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(&self.x).max(crate::scalar::max_abs(&self.y))
    }

    pub fn axpy(&mut self, a: T, other: &FaceField<T>) {
        for (u, &w) in self.x.iter_mut().zip(&other.x) {
            *u = *u + a * w;
        }
        for (u, &w) in self.y.iter_mut().zip(&other.y) {
            *u = *u + a * w;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: T,
    ly: T,
    hx: T,
    hy: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new_1d(nx: usize, lx: T) -> Result<Self> {
        Self::build(1, nx, 1, lx, T::one())
    }

    pub fn new_2d(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        if ny < 2 {
            return Err(Error::Config(format!("ny must be at least 2, got {ny}")));
        }
        Self::build(2, nx, ny, lx, ly)
    }

    fn build(dim: usize, nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        if nx < 2 {
            return Err(Error::Config(format!("nx must be at least 2, got {nx}")));
        }
        if !(lx > T::zero()) || !(ly > T::zero()) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::Config("domain lengths must be positive and finite".into()));
        }
        Ok(Grid {
            dim,
            nx,
            ny,
            lx,
            ly,
            hx: lx / T::of_usize(nx),
            hy: ly / T::of_usize(ny),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> T {
        self.lx
    }
    pub fn ly(&self) -> T {
        self.ly
    }
    pub fn hx(&self) -> T {
        self.hx
    }
    pub fn hy(&self) -> T {
        self.hy
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_xfaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn n_yfaces(&self) -> usize {
        if self.dim == 2 {
            self.nx * (self.ny + 1)
        } else {
            0
        }
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// x-face on the left of cell `(i, j)`; `i == nx` is the right wall.
    #[inline]
    pub fn xface(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// y-face below cell `(i, j)`; `j == ny` is the top wall.
    #[inline]
    pub fn yface(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_volume(&self) -> T {
        self.hx * self.hy
    }

    /// Dual-cell volume attached to an interior face.
    pub fn face_weight(&self) -> T {
        self.hx * self.hy
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (T, T) {
        let x = (T::of_usize(i) + T::half()) * self.hx;
        let y = if self.dim == 2 {
            (T::of_usize(j) + T::half()) * self.hy
        } else {
            T::zero()
        };
        (x, y)
    }

    pub fn segments(&self) -> &'static [Segment] {
        if self.dim == 2 {
            &Segment::ALL
        } else {
            &Segment::ALL[..2]
        }
    }

    /// Number of boundary faces on a segment.
    pub fn segment_len(&self, seg: Segment) -> usize {
        match seg {
            Segment::Left | Segment::Right => self.ny,
            Segment::Bottom | Segment::Top => {
                if self.dim == 2 {
                    self.nx
                } else {
                    0
                }
            }
        }
    }

    /// All boundary faces in a fixed order: left, right, bottom, top.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace<T>> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Vec::with_capacity(2 * ny + 2 * nx);
        for j in 0..ny {
            out.push(BoundaryFace {
                segment: Segment::Left,
                axis: Axis::X,
                face: self.xface(0, j),
                cell: self.cell(0, j),
                inner: self.cell(1, j),
                along: j,
                area: self.hy,
                outward: -T::one(),
            });
        }
        for j in 0..ny {
            out.push(BoundaryFace {
                segment: Segment::Right,
                axis: Axis::X,
                face: self.xface(nx, j),
                cell: self.cell(nx - 1, j),
                inner: self.cell(nx - 2, j),
                along: j,
                area: self.hy,
                outward: T::one(),
            });
        }
        if self.dim == 2 {
            for i in 0..nx {
                out.push(BoundaryFace {
                    segment: Segment::Bottom,
                    axis: Axis::Y,
                    face: self.yface(i, 0),
                    cell: self.cell(i, 0),
                    inner: self.cell(i, 1),
                    along: i,
                    area: self.hx,
                    outward: -T::one(),
                });
            }
            for i in 0..nx {
                out.push(BoundaryFace {
                    segment: Segment::Top,
                    axis: Axis::Y,
                    face: self.yface(i, ny),
                    cell: self.cell(i, ny - 1),
                    inner: self.cell(i, ny - 2),
                    along: i,
                    area: self.hx,
                    outward: T::one(),
                });
            }
        }
        out
    }

    /// Cells on either side of interior x-face `(i, j)`, `1 <= i < nx`.
    #[inline]
    pub fn xface_cells(&self, i: usize, j: usize) -> (usize, usize) {
        (self.cell(i - 1, j), self.cell(i, j))
    }

    #[inline]
    pub fn yface_cells(&self, i: usize, j: usize) -> (usize, usize) {
        (self.cell(i, j - 1), self.cell(i, j))
    }

    /// Calls `f(face_axis, face_index, left_or_lower_cell, right_or_upper_cell)`
    /// for every interior face, x-faces first.
    pub fn for_each_interior_face(&self, mut f: impl FnMut(Axis, usize, usize, usize)) {
        for j in 0..self.ny {
            for i in 1..self.nx {
                let (a, b) = self.xface_cells(i, j);
                f(Axis::X, self.xface(i, j), a, b);
            }
        }
        if self.dim == 2 {
            for j in 1..self.ny {
                for i in 0..self.nx {
                    let (a, b) = self.yface_cells(i, j);
                    f(Axis::Y, self.yface(i, j), a, b);
                }
            }
        }
    }

    pub fn spacing(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.hx,
            Axis::Y => self.hy,
        }
    }

    fn check_cells(&self, s: &[T]) -> Result<()> {
        if s.len() != self.n_cells() {
            return Err(Error::Shape(format!(
                "cell field has {} values, grid has {} cells",
                s.len(),
                self.n_cells()
            )));
        }
        Ok(())
    }

    fn check_faces(&self, f: &FaceField<T>) -> Result<()> {
        if f.x.len() != self.n_xfaces() || f.y.len() != self.n_yfaces() {
            return Err(Error::Shape(format!(
                "face field has {}+{} values, grid has {}+{} faces",
                f.x.len(),
                f.y.len(),
                self.n_xfaces(),
                self.n_yfaces()
            )));
        }
        Ok(())
    }

    /// Two-point gradient on interior faces; zero on boundary faces.
    pub fn gradient(&self, s: &[T]) -> Result<FaceField<T>> {
        self.check_cells(s)?;
        let mut g = FaceField::zeros(self);
        self.for_each_interior_face(|axis, f, a, b| {
            let h = self.spacing(axis);
            let d = (s[b] - s[a]) / h;
            match axis {
                Axis::X => g.x[f] = d,
                Axis::Y => g.y[f] = d,
            }
        });
        Ok(g)
    }

    /// Cell divergence of a face field, boundary faces included.
    pub fn divergence(&self, f: &FaceField<T>) -> Result<Vec<T>> {
        self.check_faces(f)?;
        let mut out = vec![T::zero(); self.n_cells()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let mut d = (f.x[self.xface(i + 1, j)] - f.x[self.xface(i, j)]) / self.hx;
                if self.dim == 2 {
                    d = d + (f.y[self.yface(i, j + 1)] - f.y[self.yface(i, j)]) / self.hy;
                }
                out[self.cell(i, j)] = d;
            }
        }
        Ok(out)
    }

    /// Homogeneous-Neumann Laplacian, `divergence(gradient(s))`.
    pub fn laplacian(&self, s: &[T]) -> Result<Vec<T>> {
        self.divergence(&self.gradient(s)?)
    }

    /// Arithmetic mean on interior faces, adjacent cell value on boundary faces.
    pub fn center_to_face(&self, s: &[T]) -> Result<FaceField<T>> {
        self.check_cells(s)?;
        let mut out = FaceField::zeros(self);
        self.for_each_interior_face(|axis, f, a, b| {
            let m = T::half() * (s[a] + s[b]);
            match axis {
                Axis::X => out.x[f] = m,
                Axis::Y => out.y[f] = m,
            }
        });
        for bf in self.boundary_faces() {
            match bf.axis {
                Axis::X => out.x[bf.face] = s[bf.cell],
                Axis::Y => out.y[bf.face] = s[bf.cell],
            }
        }
        Ok(out)
    }

    /// Averages each component of a face field to cell centers.
    pub fn face_to_center(&self, f: &FaceField<T>) -> Result<(Vec<T>, Vec<T>)> {
        self.check_faces(f)?;
        let n = self.n_cells();
        let mut ux = vec![T::zero(); n];
        let mut uy = vec![T::zero(); n];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = self.cell(i, j);
                ux[c] = T::half() * (f.x[self.xface(i, j)] + f.x[self.xface(i + 1, j)]);
                if self.dim == 2 {
                    uy[c] = T::half() * (f.y[self.yface(i, j)] + f.y[self.yface(i, j + 1)]);
                }
            }
        }
        Ok((ux, uy))
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral_omega(&self, s: &[T]) -> T {
        crate::scalar::sum(s) * self.cell_volume()
    }

    /// Integral of a trace given per boundary face (in `boundary_faces` order).
    pub fn integral_boundary(&self, trace: &[T]) -> Result<T> {
        let faces = self.boundary_faces();
        if trace.len() != faces.len() {
            return Err(Error::Shape(format!(
                "boundary trace has {} values, grid has {} boundary faces",
                trace.len(),
                faces.len()
            )));
        }
        Ok(faces
            .iter()
            .zip(trace)
            .fold(T::zero(), |acc, (bf, &t)| acc + t * bf.area))
    }

    /// Net outward flux of a face field through the boundary.
    pub fn boundary_outflow(&self, f: &FaceField<T>) -> Result<T> {
        self.check_faces(f)?;
        Ok(self.boundary_faces().iter().fold(T::zero(), |acc, bf| {
            let val = match bf.axis {
                Axis::X => f.x[bf.face],
                Axis::Y => f.y[bf.face],
            };
            acc + val * bf.outward * bf.area
        }))
    }

    /// Weighted inner product of two face fields.
    pub fn face_inner(&self, a: &FaceField<T>, b: &FaceField<T>) -> T {
        let w = self.face_weight();
        let sx = crate::scalar::dot(&a.x, &b.x);
        let sy = crate::scalar::dot(&a.y, &b.y);
        (sx + sy) * w
    }

    pub fn cell_inner(&self, a: &[T], b: &[T]) -> T {
        crate::scalar::dot(a, b) * self.cell_volume()
    }
}
