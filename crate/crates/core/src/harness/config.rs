//! Run configuration: one JSON document, paths relative to its directory.

use super::phantom::PhantomSpec;
use crate::error::{Error, Result};
use crate::geometry::{great_circles_curve, planar_circle, Ball, Curve};
use crate::recon::{DataKind, DatasetSpec, WOptions};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveSpec {
    /// Circles of radius `radius` about the origin in the three coordinate planes.
    ThreeCircles { radius: f64 },
    /// One circle in `R^3`.
    Circle {
        center: Vec<f64>,
        normal: Vec<f64>,
        radius: f64,
    },
}

impl CurveSpec {
    pub fn build<T: Scalar>(&self) -> Result<Arc<dyn Curve<T>>> {
        let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(match self {
            CurveSpec::ThreeCircles { radius } => Arc::new(great_circles_curve(T::lit(*radius))?),
            CurveSpec::Circle { center, normal, radius } => {
                Arc::new(planar_circle(&lit(center), &lit(normal), T::lit(*radius))?)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            CurveSpec::ThreeCircles { .. } => 3,
            CurveSpec::Circle { center, .. } => center.len(),
        }
    }

    /// Fails with [`Error::CurveGuard`] unless `R > sqrt(3) r`, where `r` is the
    /// radius of the smallest origin-centred ball holding `support`.
    pub fn check_guard(&self, support: &Ball<f64>) -> Result<()> {
        if let CurveSpec::ThreeCircles { radius } = *self {
            let r = support.center.iter().map(|c| c * c).sum::<f64>().sqrt() + support.radius;
            let bound = 3f64.sqrt() * r;
            if !(radius > bound) {
                return Err(Error::CurveGuard {
                    radius,
                    support_radius: r,
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// Sample counts of every discretized axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSizes {
    /// Nodes per axis of the phantom raster.
    pub field: usize,
    /// Polar and azimuth nodes of the sphere quadrature over plane normals.
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    /// Curve samples per piece of the stored data.
    pub lambda: usize,
    /// Polar and azimuth nodes of the stored ray directions.
    pub data_polar: usize,
    pub data_azimuth: usize,
    /// Trapezoid nodes on `S(omega)`.
    pub circle_nodes: usize,
    /// Nodes per axis of the reconstruction raster.
    pub output: usize,
}

impl Default for GridSizes {
    fn default() -> Self {
        GridSizes {
            field: 64,
            sphere_polar: 32,
            sphere_azimuth: 64,
            lambda: 512,
            data_polar: 33,
            data_azimuth: 64,
            circle_nodes: 64,
            output: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Steps {
    pub ray: f64,
    pub h_xi: f64,
    pub h_p: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Steps {
            ray: 0.02,
            h_xi: 1e-3,
            h_p: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub data: PathBuf,
    pub recon: PathBuf,
    pub report: PathBuf,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            data: "data".into(),
            recon: "recon".into(),
            report: "report.txt".into(),
        }
    }
}

/// `phantom.seed` is replaced by the run `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub phantom: PhantomSpec,
    pub curve: CurveSpec,
    #[serde(default = "default_kind")]
    pub data: DataKind,
    #[serde(default)]
    pub grids: GridSizes,
    #[serde(default)]
    pub steps: Steps,
    /// Extra points reported in `probes.csv`.
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(skip)]
    base: PathBuf,
}

fn default_kind() -> DataKind {
    DataKind::Tensor
}

impl RunConfig {
    pub fn new(phantom: PhantomSpec, curve: CurveSpec) -> Self {
        RunConfig {
            seed: phantom.seed,
            phantom,
            curve,
            data: DataKind::Tensor,
            grids: GridSizes::default(),
            steps: Steps::default(),
            probes: Vec::new(),
            outputs: OutputPaths::default(),
            base: PathBuf::new(),
        }
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Resolves a config-relative path.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn phantom_spec(&self) -> PhantomSpec {
        PhantomSpec {
            seed: self.seed,
            ..self.phantom.clone()
        }
    }

    pub fn support(&self) -> Result<Ball<f64>> {
        Ball::new(self.phantom.center.clone(), self.phantom.radius)
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            lambda_count: self.grids.lambda,
            polar: self.grids.data_polar,
            azimuth: self.grids.data_azimuth,
            step: self.steps.ray,
        }
    }

    pub fn w_options(&self) -> WOptions {
        WOptions {
            circle_nodes: self.grids.circle_nodes,
            h_xi: self.steps.h_xi,
            h_p: self.steps.h_p,
            ..WOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.phantom.dim;
        if n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if self.curve.dim() != n {
            return Err(Error::invalid(format!(
                "curve lives in R^{} but the phantom in R^{n}",
                self.curve.dim()
            )));
        }
        self.data.check(self.phantom.order, n)?;
        let support = self.support()?;
        super::phantom::Phantom::<f64>::new(&self.phantom_spec())?;
        self.curve.check_guard(&support)?;
        self.curve.build::<f64>()?;
        let g = &self.grids;
        let counts = [
            ("grids.field", g.field, 4),
            ("grids.sphere_polar", g.sphere_polar, 2),
            ("grids.sphere_azimuth", g.sphere_azimuth, 4),
            ("grids.lambda", g.lambda, 4),
            ("grids.data_polar", g.data_polar, 2),
            ("grids.data_azimuth", g.data_azimuth, 4),
            ("grids.circle_nodes", g.circle_nodes, 3),
            ("grids.output", g.output, 2),
        ];
        for (name, v, min) in counts {
            if v < min {
                return Err(Error::invalid(format!("{name} must be at least {min}, got {v}")));
            }
        }
        for (name, v) in [("steps.ray", self.steps.ray), ("steps.h_xi", self.steps.h_xi), ("steps.h_p", self.steps.h_p)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (k, p) in self.probes.iter().enumerate() {
            if p.len() != n {
                return Err(Error::invalid(format!("probes[{k}] needs {n} coordinates")));
            }
            if !support.contains(p) {
                return Err(Error::invalid(format!("probes[{k}] lies outside the support ball")));
            }
        }
        self.w_options().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(radius: f64) -> RunConfig {
        RunConfig::new(PhantomSpec::gaussian(1, 3, 1.0, 3), CurveSpec::ThreeCircles { radius })
    }

    #[test]
    fn guard_accepts_r_above_the_bound() {
        config(2.0).validate().unwrap();
    }

    #[test]
    fn guard_names_the_inequality() {
        let err = config(1.7).validate().unwrap_err();
        assert!(matches!(err, Error::CurveGuard { .. }));
        assert!(err.to_string().contains("sqrt(3)"));
    }

    #[test]
    fn guard_accounts_for_an_offset_ball() {
        let mut cfg = config(2.0);
        cfg.phantom.center = vec![0.3, 0.0, 0.0];
        assert!(matches!(cfg.validate(), Err(Error::CurveGuard { .. })));
    }

    #[test]
    fn json_round_trip_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let cfg = config(2.0);
        std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
        let back = RunConfig::load(&path).unwrap();
        assert_eq!(back.phantom, cfg.phantom);
        assert_eq!(back.grids, cfg.grids);
        assert_eq!(back.resolve(Path::new("data")), dir.path().join("data"));
    }

    #[test]
    fn minimal_document_takes_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"phantom": {"kind": "gaussian-bump", "order": 1, "dim": 3, "center": [0,0,0], "radius": 1},
                "curve": {"kind": "three-circles", "radius": 2}}"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.grids, GridSizes::default());
        assert_eq!(cfg.data, DataKind::Tensor);
    }

    #[test]
    fn bad_values_are_rejected_before_compute() {
        let mut cfg = config(2.0);
        cfg.steps.h_p = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = config(2.0);
        cfg.probes = vec![vec![2.0, 0.0, 0.0]];
        assert!(cfg.validate().is_err());
        let mut cfg = config(2.0);
        cfg.data = DataKind::Vector;
        cfg.phantom.order = 2;
        assert!(cfg.validate().is_err());
    }
}
