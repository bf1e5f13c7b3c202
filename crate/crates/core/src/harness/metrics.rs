//! Reconstruction error metrics restricted to the support ball.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symtensor::{multiplicity_weights, SymTensor};
use crate::xforms::{TensorField, TensorGrid};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Point estimate of the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub x: Vec<f64>,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub x: Vec<f64>,
    pub truth: Vec<f64>,
    pub estimate: Vec<f64>,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProvenance {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    pub nodes_in_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub order: usize,
    pub dim: usize,
    /// Relative L2 error of each stored coefficient.
    pub components: Vec<f64>,
    /// Relative L2 error in the Frobenius norm.
    pub aggregate: f64,
    pub max_abs: f64,
    pub probes: Vec<ProbeRow>,
    pub grid: Option<GridProvenance>,
    /// Wall-clock seconds per stage; logged, never persisted.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

pub enum Estimate<'a, T> {
    Grid(&'a TensorGrid<T>),
    Probes(&'a [Probe]),
}

/// `|e| / |t|`, or the absolute error when the truth vanishes.
fn ratio(err2: f64, truth2: f64) -> f64 {
    if truth2 > 0.0 {
        (err2 / truth2).sqrt()
    } else {
        err2.sqrt()
    }
}

struct Accum {
    err: Vec<f64>,
    truth: Vec<f64>,
    err_w: f64,
    truth_w: f64,
    max_abs: f64,
    weights: Vec<f64>,
}

impl Accum {
    fn new(m: usize, n: usize) -> Self {
        let weights = multiplicity_weights::<f64>(m, n);
        Accum {
            err: vec![0.0; weights.len()],
            truth: vec![0.0; weights.len()],
            err_w: 0.0,
            truth_w: 0.0,
            max_abs: 0.0,
            weights,
        }
    }

    fn add(&mut self, t: &[f64], e: &[f64]) -> f64 {
        let mut local = 0.0_f64;
        for c in 0..self.weights.len() {
            let d = e[c] - t[c];
            self.err[c] += d * d;
            self.truth[c] += t[c] * t[c];
            self.err_w += self.weights[c] * d * d;
            self.truth_w += self.weights[c] * t[c] * t[c];
            local = local.max(d.abs());
        }
        self.max_abs = self.max_abs.max(local);
        local
    }

    fn finish(self, m: usize, n: usize, probes: Vec<ProbeRow>, grid: Option<GridProvenance>) -> Result<ErrorReport> {
        let report = ErrorReport {
            order: m,
            dim: n,
            components: self.err.iter().zip(&self.truth).map(|(&e, &t)| ratio(e, t)).collect(),
            aggregate: ratio(self.err_w, self.truth_w),
            max_abs: self.max_abs,
            probes,
            grid,
            timings: Vec::new(),
        };
        let finite = report.aggregate.is_finite()
            && report.max_abs.is_finite()
            && report.components.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("error metrics are not finite; estimate contains NaN or inf"));
        }
        Ok(report)
    }
}

fn f64s<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

/// Relative L2 errors over the nodes inside the truth's support ball, or
/// over the probe points.
pub fn error_metrics<T: Scalar>(truth: &TensorGrid<T>, estimate: Estimate<'_, T>) -> Result<ErrorReport> {
    let (m, n) = (truth.order(), truth.dim());
    let mut acc = Accum::new(m, n);
    match estimate {
        Estimate::Grid(est) => {
            if est.order() != m || est.geometry() != truth.geometry() {
                return Err(Error::invalid(format!(
                    "estimate (order {}, shape {:?}) does not match truth (order {m}, shape {:?})",
                    est.order(),
                    est.geometry().shape(),
                    truth.geometry().shape()
                )));
            }
            let geo = truth.geometry();
            let support = truth.support();
            let mut inside = 0;
            for k in 0..geo.len() {
                if !support.contains(&geo.node(k)) {
                    continue;
                }
                inside += 1;
                acc.add(&f64s(truth.node_tensor(k).coeffs()), &f64s(est.node_tensor(k).coeffs()));
            }
            if inside == 0 {
                return Err(Error::invalid("no grid node lies inside the support ball"));
            }
            let grid = GridProvenance {
                lower: f64s(geo.lower()),
                upper: f64s(geo.upper()),
                shape: geo.shape().to_vec(),
                nodes_in_support: inside,
            };
            acc.finish(m, n, Vec::new(), Some(grid))
        }
        Estimate::Probes(probes) => {
            let nu = truth.coeff_count();
            let mut rows = Vec::with_capacity(probes.len());
            for (k, p) in probes.iter().enumerate() {
                if p.x.len() != n || p.coeffs.len() != nu {
                    return Err(Error::invalid(format!(
                        "probe {k}: need {n} coordinates and {nu} coefficients"
                    )));
                }
                let x: Vec<T> = p.x.iter().map(|&v| T::lit(v)).collect();
                let t = f64s(truth.value(&x).coeffs());
                let abs_error = acc.add(&t, &p.coeffs);
                rows.push(ProbeRow {
                    x: p.x.clone(),
                    truth: t,
                    estimate: p.coeffs.clone(),
                    abs_error,
                });
            }
            if rows.is_empty() {
                return Err(Error::invalid("probe list is empty"));
            }
            acc.finish(m, n, rows, None)
        }
    }
}

/// Probe comparison against an analytic field.
pub fn probe_metrics<T: Scalar, F: TensorField<T> + ?Sized>(truth: &F, probes: &[Probe]) -> Result<ErrorReport> {
    let (m, n) = (truth.order(), truth.dim());
    let mut acc = Accum::new(m, n);
    let mut rows = Vec::with_capacity(probes.len());
    for p in probes {
        let x: Vec<T> = p.x.iter().map(|&v| T::lit(v)).collect();
        let t = f64s(truth.value(&x).coeffs());
        if p.coeffs.len() != t.len() {
            return Err(Error::invalid("probe coefficient count does not match the field order"));
        }
        let abs_error = acc.add(&t, &p.coeffs);
        rows.push(ProbeRow { x: p.x.clone(), truth: t, estimate: p.coeffs.clone(), abs_error });
    }
    if rows.is_empty() {
        return Err(Error::invalid("probe list is empty"));
    }
    acc.finish(m, n, rows, None)
}

impl Probe {
    pub fn new<T: Scalar>(x: &[T], t: &SymTensor<T>) -> Self {
        Probe { x: f64s(x), coeffs: f64s(t.coeffs()) }
    }
}

impl ErrorReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order {} dim {}", self.order, self.dim);
        let _ = writeln!(s, "relative L2 (aggregate): {:.6e}", self.aggregate);
        for (c, v) in self.components.iter().enumerate() {
            let _ = writeln!(s, "relative L2 (coeff {c}): {v:.6e}");
        }
        let _ = writeln!(s, "max abs error: {:.6e}", self.max_abs);
        if let Some(g) = &self.grid {
            let _ = writeln!(s, "grid shape {:?}, {} nodes in support", g.shape, g.nodes_in_support);
        }
        if !self.probes.is_empty() {
            let _ = writeln!(s, "probes: {}", self.probes.len());
        }
        s
    }

    /// One row per coefficient plus the aggregate, then one row per probe.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "index", "value"])?;
        w.write_record(["aggregate", "", &format!("{:e}", self.aggregate)])?;
        w.write_record(["max_abs", "", &format!("{:e}", self.max_abs)])?;
        for (c, v) in self.components.iter().enumerate() {
            w.write_record(["component", &c.to_string(), &format!("{v:e}")])?;
        }
        for (k, p) in self.probes.iter().enumerate() {
            w.write_record(["probe_abs_error", &k.to_string(), &format!("{:e}", p.abs_error)])?;
        }
        w.flush()?;
        Ok(())
    }
}
