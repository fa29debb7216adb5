//! Structure-preserving simulator for incompressible, heat-conducting,
//! electrically charged multicomponent fluids with power-law viscosity.
//!
//! The numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

// `!(x > 0)` deliberately rejects NaN; indexed loops mirror the stencils.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod momentum;
pub mod output;
pub mod poisson;
pub mod scalar;
pub mod scenario;
pub mod stepper;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = grid::Grid<f64>;
pub type FieldState = grid::FieldState<f64>;
pub type BoundarySpec = grid::BoundarySpec<f64>;
pub type BoundaryCoeffs = constitutive::BoundaryCoeffs<f64>;
pub type MaterialModel = constitutive::MaterialModel<f64>;
pub type MaterialParams = constitutive::MaterialParams<f64>;
pub type CutoffParams = transport::CutoffParams<f64>;
pub type ConvectionTruncation = momentum::ConvectionTruncation<f64>;
pub type SimConfig = stepper::SimConfig<f64>;
pub type Scenario = stepper::Scenario<f64>;
pub type DiagnosticsReport = diagnostics::DiagnosticsReport<f64>;
