//! Numerical laboratory for semilinear wave equations with null-form potentials.
//!
//! Kernels are generic over [`Real`] (`f32` or `f64`); the aliases at the bottom fix `f64`.

// `!(x > 0)` deliberately rejects NaN; index loops mirror the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments, clippy::type_complexity)]

pub mod constants;
pub mod error;
pub mod fdtd;
pub mod geoptics;
pub mod grid;
pub mod interp;
pub mod io;
pub mod minkowski;
pub mod nullform;
pub mod num;
pub mod potential;
pub mod profile;
pub mod quadrature;
pub mod raytransform;
pub mod recovery;
pub mod uniqueness;

pub use error::{Error, Result};
pub use num::Real;

pub type LightVector = minkowski::LightVector<f64>;
pub type SpacetimePoint = minkowski::SpacetimePoint<f64>;
pub type Profile = profile::Profile<f64>;
