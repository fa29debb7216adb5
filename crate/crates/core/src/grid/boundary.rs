use super::{Grid, Segment};
use crate::constitutive::BoundaryCoeffs;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spatial modulation of the transfer coefficients `d`, `κ̄`, `λ^Γ` along a
/// segment; constant per face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Uniform,
    /// `sin(π s)` at the face midpoint, `s ∈ (0, 1)` the arclength fraction.
    Sine,
    /// 1 on the first half of the segment, 0 on the second.
    Step,
}

impl Profile {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Profile::Uniform),
            "sine" => Some(Profile::Sine),
            "step" => Some(Profile::Step),
            _ => None,
        }
    }

    fn weight<T: Scalar>(self, along: usize, len: usize) -> T {
        let s = (T::of_usize(along) + T::half()) / T::of_usize(len);
        match self {
            Profile::Uniform => T::one(),
            Profile::Sine => (T::PI() * s).sin(),
            Profile::Step => {
                if s < T::half() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Boundary data resolved per boundary face, in `Grid::boundary_faces` order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec<T> {
    segments: Vec<(Segment, BoundaryCoeffs<T>, Profile)>,
    faces: Vec<BoundaryCoeffs<T>>,
}

impl<T: Scalar> BoundarySpec<T> {
    /// Builds the spec from one record per segment of the grid.
    pub fn new(grid: &Grid<T>, segments: Vec<(Segment, BoundaryCoeffs<T>, Profile)>) -> Result<Self> {
        for &seg in grid.segments() {
            let count = segments.iter().filter(|(s, _, _)| *s == seg).count();
            if count != 1 {
                return Err(Error::Config(format!(
                    "boundary segment {} specified {count} times",
                    seg.name()
                )));
            }
        }
        if let Some((s, _, _)) = segments.iter().find(|(s, _, _)| !grid.segments().contains(s)) {
            return Err(Error::Config(format!("segment {} does not exist in 1D", s.name())));
        }
        let species = segments[0].1.zeta_g.len();
        for (seg, bc, _) in &segments {
            bc.validate()
                .map_err(|e| Error::Config(format!("bc.{}: {e}", seg.name())))?;
            if bc.zeta_g.len() != species {
                return Err(Error::Config("boundary chemical potentials differ in length".into()));
            }
        }
        let faces = grid
            .boundary_faces()
            .iter()
            .map(|bf| {
                let (_, bc, profile) = segments.iter().find(|(s, _, _)| *s == bf.segment).unwrap();
                let w: T = profile.weight(bf.along, grid.segment_len(bf.segment));
                BoundaryCoeffs {
                    d: bc.d * w,
                    kappa_bar: bc.kappa_bar * w,
                    lambda_g: bc.lambda_g * w,
                    ..bc.clone()
                }
            })
            .collect();
        Ok(BoundarySpec { segments, faces })
    }

    /// Same coefficients on every segment.
    pub fn uniform(grid: &Grid<T>, bc: BoundaryCoeffs<T>) -> Result<Self> {
        let segs = grid
            .segments()
            .iter()
            .map(|&s| (s, bc.clone(), Profile::Uniform))
            .collect();
        Self::new(grid, segs)
    }

    pub fn species(&self) -> usize {
        self.faces.first().map_or(0, |f| f.zeta_g.len())
    }

    /// Per-face coefficients aligned with `Grid::boundary_faces`.
    pub fn faces(&self) -> &[BoundaryCoeffs<T>] {
        &self.faces
    }

    pub fn segment(&self, seg: Segment) -> Option<&BoundaryCoeffs<T>> {
        self.segments.iter().find(|(s, _, _)| *s == seg).map(|(_, bc, _)| bc)
    }

    pub fn profile(&self, seg: Segment) -> Option<Profile> {
        self.segments.iter().find(|(s, _, _)| *s == seg).map(|(_, _, p)| *p)
    }

    /// Boundary integrals of `(d, κ̄, λ^Γ)`.
    pub fn transfer_integrals(&self, grid: &Grid<T>) -> (T, T, T) {
        grid.boundary_faces()
            .iter()
            .zip(&self.faces)
            .fold((T::zero(), T::zero(), T::zero()), |(a, b, c), (bf, f)| {
                (a + f.d * bf.area, b + f.kappa_bar * bf.area, c + f.lambda_g * bf.area)
            })
    }

    /// `λ^Γ` per segment when it is constant along each segment.
    pub fn segment_uniform_lambda(&self, grid: &Grid<T>) -> Option<[T; 4]> {
        let mut out = [T::zero(); 4];
        for (bf, f) in grid.boundary_faces().iter().zip(&self.faces) {
            let k = bf.segment.index();
            if bf.along == 0 {
                out[k] = f.lambda_g;
            } else if f.lambda_g != out[k] {
                return None;
            }
        }
        Some(out)
    }
}
