//! Binary containers: one line of JSON header, then `count` little-endian
//! `f64` values.

use super::config::CurveSpec;
use crate::error::{Error, Result};
use crate::geometry::Ball;
use crate::recon::{DatasetMeta, TRTDataset, TrtData};
use crate::scalar::Scalar;
use crate::xforms::{GridGeometry, Interp, ScalarField, ScalarGrid, Sinogram, SphereGrid, TensorField, TensorGrid};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &str = "trt";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    pub interp: Interp,
    pub support_center: Vec<f64>,
    pub support_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Payload {
    TensorGrid {
        order: usize,
        #[serde(flatten)]
        grid: GridHeader,
    },
    ScalarGrid {
        #[serde(flatten)]
        grid: GridHeader,
    },
    /// Product sphere grid without azimuth shift.
    Sinogram {
        dim: usize,
        polar: usize,
        azimuth: usize,
        offsets: Vec<f64>,
    },
    Dataset {
        meta: DatasetMeta,
        curve_spec: CurveSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub magic: String,
    pub version: u32,
    pub count: usize,
    #[serde(flatten)]
    pub payload: Payload,
}

fn f64s<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn lits<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

pub fn write_container<T: Scalar>(path: &Path, payload: Payload, values: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let header = Header {
        magic: MAGIC.into(),
        version: VERSION,
        count: values.len(),
        payload,
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for v in values {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_container<T: Scalar>(path: &Path) -> Result<(Header, Vec<T>)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format(format!("{}: missing header line", path.display())));
    }
    let header: Header = serde_json::from_slice(&line)
        .map_err(|e| Error::Format(format!("{}: bad header: {e}", path.display())))?;
    if header.magic != MAGIC || header.version != VERSION {
        return Err(Error::Format(format!(
            "{}: expected {MAGIC} v{VERSION}, found {} v{}",
            path.display(),
            header.magic,
            header.version
        )));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != header.count * 8 {
        return Err(Error::Format(format!(
            "{}: header announces {} values, payload holds {} bytes",
            path.display(),
            header.count,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Ok((header, values))
}

fn grid_header<T: Scalar>(geo: &GridGeometry<T>, interp: Interp, support: &Ball<T>) -> GridHeader {
    GridHeader {
        lower: f64s(geo.lower()),
        upper: f64s(geo.upper()),
        shape: geo.shape().to_vec(),
        interp,
        support_center: f64s(&support.center),
        support_radius: support.radius.as_f64(),
    }
}

fn grid_parts<T: Scalar>(h: &GridHeader) -> Result<(GridGeometry<T>, Ball<T>)> {
    let geo = GridGeometry::new(lits(&h.lower), lits(&h.upper), h.shape.clone())?;
    let ball = Ball::new(lits(&h.support_center), T::lit(h.support_radius))?;
    Ok((geo, ball))
}

fn wrong_type(path: &Path, want: &str) -> Error {
    Error::Format(format!("{}: not a {want} container", path.display()))
}

fn format_err(path: &Path, e: Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

pub fn write_tensor_grid<T: Scalar>(path: &Path, g: &TensorGrid<T>) -> Result<()> {
    let payload = Payload::TensorGrid {
        order: g.order(),
        grid: grid_header(g.geometry(), g.interp(), g.support()),
    };
    write_container(path, payload, g.values())
}

pub fn read_tensor_grid<T: Scalar>(path: &Path) -> Result<TensorGrid<T>> {
    let (h, values) = read_container::<T>(path)?;
    let Payload::TensorGrid { order, grid } = h.payload else {
        return Err(wrong_type(path, "tensor-grid"));
    };
    let (geo, ball) = grid_parts(&grid).map_err(|e| format_err(path, e))?;
    TensorGrid::new(geo, order, values, grid.interp, ball).map_err(|e| format_err(path, e))
}

pub fn write_scalar_grid<T: Scalar>(path: &Path, g: &ScalarGrid<T>) -> Result<()> {
    let payload = Payload::ScalarGrid {
        grid: grid_header(g.geometry(), g.interp(), g.support()),
    };
    write_container(path, payload, g.values())
}

pub fn read_scalar_grid<T: Scalar>(path: &Path) -> Result<ScalarGrid<T>> {
    let (h, values) = read_container::<T>(path)?;
    let Payload::ScalarGrid { grid } = h.payload else {
        return Err(wrong_type(path, "scalar-grid"));
    };
    let (geo, ball) = grid_parts(&grid).map_err(|e| format_err(path, e))?;
    ScalarGrid::new(geo, values, grid.interp, ball).map_err(|e| format_err(path, e))
}

pub fn write_sinogram<T: Scalar>(path: &Path, s: &Sinogram<T>) -> Result<()> {
    let g = s.grid();
    if SphereGrid::<T>::product(g.dim(), g.polar_nodes(), g.azimuth_nodes())? != *g {
        return Err(Error::invalid("only unshifted product sphere grids can be stored"));
    }
    let payload = Payload::Sinogram {
        dim: g.dim(),
        polar: g.polar_nodes(),
        azimuth: g.azimuth_nodes(),
        offsets: f64s(s.offsets()),
    };
    write_container(path, payload, s.values())
}

pub fn read_sinogram<T: Scalar>(path: &Path) -> Result<Sinogram<T>> {
    let (h, values) = read_container::<T>(path)?;
    let Payload::Sinogram { dim, polar, azimuth, offsets } = h.payload else {
        return Err(wrong_type(path, "sinogram"));
    };
    let grid = SphereGrid::product(dim, polar, azimuth).map_err(|e| format_err(path, e))?;
    Sinogram::new(grid, lits(&offsets), values).map_err(|e| format_err(path, e))
}

pub fn write_dataset<T: Scalar>(path: &Path, d: &TRTDataset<T>, curve: &CurveSpec) -> Result<()> {
    if curve.build::<T>()?.describe() != d.curve().describe() {
        return Err(Error::invalid("curve spec does not describe the dataset curve"));
    }
    let payload = Payload::Dataset {
        meta: d.meta().clone(),
        curve_spec: curve.clone(),
    };
    write_container(path, payload, d.values())
}

pub fn read_dataset<T: Scalar>(path: &Path) -> Result<(TRTDataset<T>, CurveSpec)> {
    let (h, values) = read_container::<T>(path)?;
    let Payload::Dataset { meta, curve_spec } = h.payload else {
        return Err(wrong_type(path, "dataset"));
    };
    let curve = curve_spec.build::<T>().map_err(|e| format_err(path, e))?;
    let ds = TRTDataset::from_parts(curve, meta, values).map_err(|e| format_err(path, e))?;
    Ok((ds, curve_spec))
}
