//! Phantoms, error metrics, file containers, run configuration, the
//! simulate/reconstruct/validate pipeline and the self-test suite.

mod config;
mod io;
mod metrics;
mod phantom;
mod pipeline;
mod selftest;

pub use config::{CurveSpec, GridSizes, OutputPaths, RunConfig, Steps};
pub use io::{
    read_container, read_dataset, read_scalar_grid, read_sinogram, read_tensor_grid, write_container, write_dataset,
    write_scalar_grid, write_sinogram, write_tensor_grid, GridHeader, Header, Payload, MAGIC, VERSION,
};
pub use metrics::{error_metrics, probe_metrics, ErrorReport, Estimate, GridProvenance, Probe, ProbeRow};
pub use phantom::{make_phantom, Bump, Phantom, PhantomKind, PhantomSpec};
pub use pipeline::{
    check_curve, output_geometry, reconstruct, reconstruct_at, simulate, validate, view_count, CurveCheck,
    ReconstructOutput, SimulateOutput, CONFIG_FILE, DATA_FILE, ESTIMATE_FILE, FIELD_FILE, PROBES_FILE, TRUTH_FILE,
};
pub use selftest::{polarization_gap, selftest_suite, Check, Level, SelftestReport};
