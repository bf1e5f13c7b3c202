//! Restricted transverse ray transform of symmetric tensor fields:
//! forward simulation along lines through an acquisition curve and explicit
//! reconstruction by weighted Radon inversion, Cramer recombination and
//! polarization.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the pipeline tolerances assume.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod recon;
pub mod scalar;
pub mod symtensor;
pub mod xforms;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Frame = geometry::Frame<f64>;
pub type SymTensor = symtensor::SymTensor<f64>;
pub type BasisSystem = symtensor::BasisSystem<f64>;
pub type PlaneCoords = geometry::PlaneCoords<f64>;
pub type Ball = geometry::Ball<f64>;
pub type CircleUnion = geometry::CircleUnion<f64>;

pub type Frame32 = geometry::Frame<f32>;
pub type SymTensor32 = symtensor::SymTensor<f32>;
