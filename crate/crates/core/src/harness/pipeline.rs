//! The simulate, reconstruct, validate and check-curve stages.

use super::config::RunConfig;
use super::io::{read_dataset, read_tensor_grid, write_dataset, write_tensor_grid};
use super::metrics::{error_metrics, ErrorReport, Estimate};
use super::phantom::{make_phantom, Phantom};
use crate::error::{Error, Result};
use crate::geometry::{encompasses, kirillov_tuy_report, EncompassReport, KTReport};
use crate::recon::{
    acquire_dataset, recover_tensor_components, recover_vector, DataKind, ProbeA, TrtData, ViewSet, WOptions,
    ENCOMPASS_SAMPLES,
};
use crate::scalar::Scalar;
use crate::symtensor::SymTensor;
use crate::xforms::{GridGeometry, Interp, SphereGrid, TensorField, TensorGrid};
use log::info;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const FIELD_FILE: &str = "field.trtg";
pub const DATA_FILE: &str = "data.trtd";
pub const CONFIG_FILE: &str = "config.json";
pub const ESTIMATE_FILE: &str = "estimate.trtg";
pub const TRUTH_FILE: &str = "truth.trtg";
pub const PROBES_FILE: &str = "probes.csv";

fn timed<R>(stage: &str, timings: &mut Vec<(String, f64)>, f: impl FnOnce() -> Result<R>) -> Result<R> {
    let t0 = Instant::now();
    let out = f()?;
    let secs = t0.elapsed().as_secs_f64();
    info!("{stage}: {secs:.3} s");
    timings.push((stage.to_string(), secs));
    Ok(out)
}

/// Views at `x` needed by the reconstruction of the given kind and order.
pub fn view_count(kind: DataKind, m: usize) -> usize {
    match kind {
        DataKind::Tensor => m + 1,
        DataKind::Vector => 2,
    }
}

/// `f(x)` from TRT data: frame components by plane-by-plane inversion of the
/// weighted data, then recombination.
pub fn reconstruct_at<T: Scalar, D: TrtData<T> + ?Sized>(
    data: &D,
    sphere: &SphereGrid<T>,
    opts: &WOptions,
    x: &[T],
) -> Result<SymTensor<T>> {
    let (m, n) = (data.order(), data.dim());
    let views = ViewSet::from_curve(data.curve(), x, view_count(data.kind(), m), opts)?;
    let provider = ProbeA::new(data, sphere.clone(), *opts)?;
    match data.kind() {
        DataKind::Tensor => recover_tensor_components(&views, &provider, m),
        DataKind::Vector => SymTensor::from_coeffs(1, n, recover_vector(&views, &provider)?),
    }
}

/// Output raster: `samples^n` nodes on the cube of half-width `1.1 r`.
pub fn output_geometry<T: Scalar>(cfg: &RunConfig, samples: usize) -> Result<GridGeometry<T>> {
    let half = 1.1 * cfg.phantom.radius;
    let lower = cfg.phantom.center.iter().map(|&c| T::lit(c - half)).collect();
    let upper = cfg.phantom.center.iter().map(|&c| T::lit(c + half)).collect();
    GridGeometry::new(lower, upper, vec![samples; cfg.phantom.dim])
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub field: PathBuf,
    pub data: PathBuf,
    pub timings: Vec<(String, f64)>,
}

/// Samples the phantom raster and tabulates TRT data of the analytic phantom.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut timings = Vec::new();
    let spec = cfg.phantom_spec();
    let phantom = Phantom::<f64>::new(&spec)?;
    let grid = timed("phantom", &mut timings, || make_phantom::<f64>(&spec, cfg.grids.field, Interp::Linear))?;
    let field = out.join(FIELD_FILE);
    write_tensor_grid(&field, &grid)?;
    let curve = cfg.curve.build::<f64>()?;
    let ds = timed("acquire", &mut timings, || {
        acquire_dataset(&phantom, curve, cfg.data, cfg.dataset_spec())
    })?;
    let data = out.join(DATA_FILE);
    write_dataset(&data, &ds, &cfg.curve)?;
    std::fs::write(out.join(CONFIG_FILE), cfg.to_json()?)?;
    Ok(SimulateOutput { field, data, timings })
}

#[derive(Debug, Clone)]
pub struct ReconstructOutput {
    pub estimate: PathBuf,
    pub truth: Option<PathBuf>,
    pub probes: PathBuf,
    /// Points where recovery failed; their estimate is stored as zero.
    pub failures: Vec<(Vec<f64>, String)>,
    pub timings: Vec<(String, f64)>,
}

struct PointResult {
    x: Vec<f64>,
    coeffs: Vec<f64>,
    status: String,
}

/// Reconstructs at the output nodes inside the support ball and at the
/// configured probes; nodes outside the ball are zero.
pub fn reconstruct(cfg: &RunConfig, data_dir: &Path, out: &Path) -> Result<ReconstructOutput> {
    cfg.validate()?;
    let (ds, curve_spec) = read_dataset::<f64>(&data_dir.join(DATA_FILE))?;
    let meta = ds.meta();
    if curve_spec != cfg.curve || meta.kind != cfg.data || meta.order != cfg.phantom.order || meta.dim != cfg.phantom.dim
    {
        return Err(Error::invalid(format!(
            "dataset in {} (kind {:?}, order {}, curve {:?}) does not match the config",
            data_dir.display(),
            meta.kind,
            meta.order,
            curve_spec
        )));
    }
    std::fs::create_dir_all(out)?;
    let mut timings = Vec::new();
    let opts = cfg.w_options();
    let sphere = SphereGrid::<f64>::product(3, cfg.grids.sphere_polar, cfg.grids.sphere_azimuth)?;
    let geo = output_geometry::<f64>(cfg, cfg.grids.output)?;
    let support = ds.support().clone();
    let nu = crate::symtensor::sym_dim(meta.order, meta.dim);

    let mut points: Vec<Vec<f64>> = (0..geo.len()).map(|k| geo.node(k)).filter(|x| support.contains(x)).collect();
    let node_count = points.len();
    points.extend(cfg.probes.iter().cloned());
    let results: Vec<PointResult> = timed("reconstruct", &mut timings, || {
        Ok(points
            .iter()
            .map(|x| match reconstruct_at(&ds, &sphere, &opts, x) {
                Ok(t) => PointResult { x: x.clone(), coeffs: t.into_coeffs(), status: "ok".into() },
                Err(e) => PointResult { x: x.clone(), coeffs: vec![0.0; nu], status: e.to_string() },
            })
            .collect())
    })?;

    let mut values = vec![0.0; geo.len() * nu];
    let mut it = results[..node_count].iter();
    for k in 0..geo.len() {
        if support.contains(&geo.node(k)) {
            let r = it.next().expect("one result per interior node");
            values[k * nu..(k + 1) * nu].copy_from_slice(&r.coeffs);
        }
    }
    let estimate_grid = TensorGrid::new(geo.clone(), meta.order, values, Interp::Linear, support)?;
    let estimate = out.join(ESTIMATE_FILE);
    write_tensor_grid(&estimate, &estimate_grid)?;

    let truth_src = data_dir.join(FIELD_FILE);
    let truth_grid = if truth_src.exists() {
        let g = read_tensor_grid::<f64>(&truth_src)?;
        Some(TensorGrid::sample(geo, &g, Interp::Linear)?)
    } else {
        None
    };
    let truth = match &truth_grid {
        Some(g) => {
            let p = out.join(TRUTH_FILE);
            write_tensor_grid(&p, g)?;
            Some(p)
        }
        None => None,
    };

    let probes = out.join(PROBES_FILE);
    let mut w = csv::Writer::from_path(&probes)?;
    let mut head: Vec<String> = (0..meta.dim).map(|i| format!("x{i}")).collect();
    head.extend((0..nu).map(|c| format!("estimate{c}")));
    if truth_grid.is_some() {
        head.extend((0..nu).map(|c| format!("truth{c}")));
    }
    head.push("status".into());
    w.write_record(&head)?;
    for r in &results {
        let mut row: Vec<String> = r.x.iter().chain(&r.coeffs).map(|v| format!("{v:e}")).collect();
        if let Some(g) = &truth_grid {
            row.extend(g.value(&r.x).coeffs().iter().map(|v| format!("{v:e}")));
        }
        row.push(r.status.clone());
        w.write_record(&row)?;
    }
    w.flush()?;

    let failures = results
        .iter()
        .filter(|r| r.status != "ok")
        .map(|r| (r.x.clone(), r.status.clone()))
        .collect();
    Ok(ReconstructOutput { estimate, truth, probes, failures, timings })
}

/// Compares two rasters and writes a text summary plus `<report>.csv`.
pub fn validate(truth: &Path, estimate: &Path, report: &Path) -> Result<ErrorReport> {
    let t = read_tensor_grid::<f64>(truth)?;
    let e = read_tensor_grid::<f64>(estimate)?;
    let mut timings = Vec::new();
    let mut r = timed("metrics", &mut timings, || error_metrics(&t, Estimate::Grid(&e)))?;
    r.timings = timings;
    if let Some(dir) = report.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(report, r.summary())?;
    r.write_csv(std::fs::File::create(report.with_extension("csv"))?)?;
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct CurveCheck {
    pub encompass: EncompassReport<f64>,
    pub kt: KTReport,
}

impl CurveCheck {
    pub fn passed(&self) -> bool {
        self.encompass.encompasses && self.kt.passed()
    }
}

/// Encompassing and Kirillov-Tuy certificates of the configured curve
/// against the support ball.
pub fn check_curve(cfg: &RunConfig, plane_samples: usize, point_samples: usize) -> Result<CurveCheck> {
    cfg.validate()?;
    let curve = cfg.curve.build::<f64>()?;
    let ball = cfg.support()?;
    Ok(CurveCheck {
        encompass: encompasses(curve.as_ref(), &ball, ENCOMPASS_SAMPLES),
        kt: kirillov_tuy_report(curve.as_ref(), &ball, cfg.phantom.order, plane_samples, point_samples),
    })
}
