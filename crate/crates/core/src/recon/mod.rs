//! Reconstruction from TRT data on a curve: the weighted data functional,
//! Radon inversion to frame components, Cramer recombination and
//! polarization, and the vector variant in odd `R^n`.

mod data;
mod invert;
mod weighted;

pub use data::{
    acquire_dataset, trt_half_frame, DataKind, DatasetMeta, DatasetSpec, RayData, TRTDataset, TrtData,
    ENCOMPASS_SAMPLES,
};
pub use invert::{
    choose_independent_axis, recover_a_component, recover_power, recover_tensor_components, recover_vector,
    reference_normal, AEstimate, AProvider, ExactA, ProbeA, ViewSet, WFieldA, AXIS_TOL,
};
pub use weighted::{
    apply_l, circle_integral_l, circle_nodes, plane_branches, track_intersection, usable_intersections,
    w_oracle, weighted_data_w, weighted_plane_slope, WField, WOptions, WeightedIntegrand,
};
