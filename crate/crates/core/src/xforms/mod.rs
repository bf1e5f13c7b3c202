//! Forward transforms and the numerical machinery under them: fields,
//! rasters, quadrature, ray integrals and the Radon transform.

mod field;
mod grid;
mod quadrature;
mod radon;
mod ray;

pub use field::{FnScalarField, FnTensorField, Paired, ScalarField, TensorField, ZeroField};
pub use grid::{cubic_axis_weights, GridGeometry, Interp, ScalarGrid, TensorGrid};
pub use quadrature::{fd_weights, gauss_legendre, sphere_area, uniform_derivative, SphereGrid};
pub use radon::{
    inversion_constant, radon_forward, radon_invert_odd, radon_sinogram, uniform_offsets, Backprojector,
    InversionOptions, RadonInverse, Sinogram,
};
pub use ray::{
    ball_chord, integrate_segment, ray_integral, ray_pairing, trt_extended, trt_tensor, trt_tensor_frame,
    trt_vector, trt_vector_frame, RaySpan,
};
