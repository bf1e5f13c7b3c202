//! Regular Cartesian rasters of scalar and symmetric-tensor samples.

use super::field::{ScalarField, TensorField};
use crate::error::{Error, Result};
use crate::geometry::Ball;
use crate::scalar::Scalar;
use crate::symtensor::{sym_dim, SymTensor};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    #[default]
    Linear,
    Cubic,
}

/// Axis-aligned box sampled at `shape[k]` equispaced nodes per axis,
/// endpoints included. Flat indices are row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    shape: Vec<usize>,
    spacing: Vec<T>,
}

impl<T: Scalar> GridGeometry<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, shape: Vec<usize>) -> Result<Self> {
        let n = lower.len();
        if n == 0 || upper.len() != n || shape.len() != n {
            return Err(Error::invalid("grid bounds and shape must share a nonzero dimension"));
        }
        if shape.iter().any(|&s| s < 2) {
            return Err(Error::invalid(format!("grid shape must be >= 2 per axis, got {shape:?}")));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid("grid box must have lower < upper on every axis"));
        }
        let spacing = (0..n)
            .map(|k| (upper[k] - lower[k]) / T::of_usize(shape[k] - 1))
            .collect();
        Ok(GridGeometry {
            lower,
            upper,
            shape,
            spacing,
        })
    }

    /// Cube `[-half, half]^n` with `samples` nodes per axis.
    pub fn cube(n: usize, half: T, samples: usize) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n], vec![samples; n])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn node(&self, flat: usize) -> Vec<T> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lower[k] + self.spacing[k] * T::of_usize(i))
            .collect()
    }

    /// Whether the box strictly contains the ball.
    pub fn strictly_contains(&self, ball: &Ball<T>) -> bool {
        ball.dim() == self.dim()
            && (0..self.dim()).all(|k| {
                ball.center[k] - ball.radius > self.lower[k] && ball.center[k] + ball.radius < self.upper[k]
            })
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .enumerate()
            .all(|(k, &v)| v >= self.lower[k] && v <= self.upper[k])
    }

    /// Interpolation stencil `(flat index, weight)` at `x`; `None` outside the box.
    pub fn stencil(&self, x: &[T], interp: Interp) -> Option<Vec<(usize, T)>> {
        if x.len() != self.dim() || !self.contains(x) {
            return None;
        }
        let axes: Vec<Vec<(usize, T)>> = (0..self.dim())
            .map(|k| axis_weights(x[k], self.lower[k], self.spacing[k], self.shape[k], interp))
            .collect();
        let mut out: Vec<(usize, T)> = vec![(0, T::one())];
        for (k, ax) in axes.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * ax.len());
            for &(base, w) in &out {
                for &(i, wi) in ax {
                    next.push((base * self.shape[k] + i, w * wi));
                }
            }
            out = next;
        }
        Some(out)
    }
}

/// 1-D weights on one axis: linear (2 nodes) or Catmull-Rom (4 nodes, with
/// indices clamped at the edges).
pub(crate) fn axis_weights<T: Scalar>(x: T, lower: T, h: T, n: usize, interp: Interp) -> Vec<(usize, T)> {
    let s = (x - lower) / h;
    let i0 = s.floor().to_usize().unwrap_or(0).min(n - 2);
    let t = s - T::of_usize(i0);
    match interp {
        Interp::Linear => vec![(i0, T::one() - t), (i0 + 1, t)],
        Interp::Cubic => {
            let half = T::lit(0.5);
            let (t2, t3) = (t * t, t * t * t);
            let w = [
                half * (-t3 + T::lit(2.0) * t2 - t),
                half * (T::lit(3.0) * t3 - T::lit(5.0) * t2 + T::lit(2.0)),
                half * (T::lit(-3.0) * t3 + T::lit(4.0) * t2 + t),
                half * (t3 - t2),
            ];
            let clamp = |j: isize| j.clamp(0, n as isize - 1) as usize;
            (0..4)
                .map(|k| (clamp(i0 as isize - 1 + k as isize), w[k]))
                .collect()
        }
    }
}

/// Catmull-Rom weights `(node, weight)` for `x` on the uniform axis
/// `lower + k h`, `k < n`, with indices clamped at the ends.
pub fn cubic_axis_weights<T: Scalar>(x: T, lower: T, h: T, n: usize) -> Vec<(usize, T)> {
    axis_weights(x, lower, h, n, Interp::Cubic)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    geometry: GridGeometry<T>,
    values: Vec<T>,
    interp: Interp,
    support: Ball<T>,
}

impl<T: Scalar> ScalarGrid<T> {
    pub fn new(geometry: GridGeometry<T>, values: Vec<T>, interp: Interp, support: Ball<T>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::invalid(format!(
                "grid needs {} values, got {}",
                geometry.len(),
                values.len()
            )));
        }
        if !geometry.strictly_contains(&support) {
            return Err(Error::invalid("grid box must strictly contain the support ball"));
        }
        Ok(ScalarGrid {
            geometry,
            values,
            interp,
            support,
        })
    }

    /// Samples a field at every node.
    pub fn sample<F: ScalarField<T> + ?Sized>(geometry: GridGeometry<T>, field: &F, interp: Interp) -> Result<Self> {
        let values = (0..geometry.len())
            .into_par_iter()
            .map(|k| field.value(&geometry.node(k)))
            .collect();
        Self::new(geometry, values, interp, field.support().clone())
    }

    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }
}

impl<T: Scalar> ScalarField<T> for ScalarGrid<T> {
    fn dim(&self) -> usize {
        self.geometry.dim()
    }

    fn value(&self, x: &[T]) -> T {
        match self.geometry.stencil(x, self.interp) {
            Some(st) => st.iter().map(|&(i, w)| w * self.values[i]).sum(),
            None => T::zero(),
        }
    }

    fn support(&self) -> &Ball<T> {
        &self.support
    }
}

/// Raster of symmetric tensors; node `k` holds coefficients
/// `values[k * nu .. (k + 1) * nu]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid<T> {
    geometry: GridGeometry<T>,
    order: usize,
    values: Vec<T>,
    interp: Interp,
    support: Ball<T>,
}

impl<T: Scalar> TensorGrid<T> {
    pub fn new(
        geometry: GridGeometry<T>,
        order: usize,
        values: Vec<T>,
        interp: Interp,
        support: Ball<T>,
    ) -> Result<Self> {
        let nu = sym_dim(order, geometry.dim());
        if values.len() != geometry.len() * nu {
            return Err(Error::invalid(format!(
                "tensor grid needs {} values, got {}",
                geometry.len() * nu,
                values.len()
            )));
        }
        if !geometry.strictly_contains(&support) {
            return Err(Error::invalid("grid box must strictly contain the support ball"));
        }
        Ok(TensorGrid {
            geometry,
            order,
            values,
            interp,
            support,
        })
    }

    pub fn sample<F: TensorField<T> + ?Sized>(geometry: GridGeometry<T>, field: &F, interp: Interp) -> Result<Self> {
        if field.dim() != geometry.dim() {
            return Err(Error::invalid("field and grid dimensions differ"));
        }
        let values: Vec<Vec<T>> = (0..geometry.len())
            .into_par_iter()
            .map(|k| field.value(&geometry.node(k)).into_coeffs())
            .collect();
        Self::new(geometry, field.order(), values.concat(), interp, field.support().clone())
    }

    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn coeff_count(&self) -> usize {
        sym_dim(self.order, self.geometry.dim())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    /// Stored tensor at a node.
    pub fn node_tensor(&self, flat: usize) -> SymTensor<T> {
        let nu = self.coeff_count();
        SymTensor::from_coeffs(self.order, self.geometry.dim(), self.values[flat * nu..(flat + 1) * nu].to_vec())
            .expect("stored coefficient count matches")
    }

    /// Scalar grid of one stored coefficient.
    pub fn component(&self, c: usize) -> ScalarGrid<T> {
        let nu = self.coeff_count();
        ScalarGrid {
            geometry: self.geometry.clone(),
            values: self.values.iter().skip(c).step_by(nu).copied().collect(),
            interp: self.interp,
            support: self.support.clone(),
        }
    }
}

impl<T: Scalar> TensorField<T> for TensorGrid<T> {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.geometry.dim()
    }

    fn value(&self, x: &[T]) -> SymTensor<T> {
        let nu = self.coeff_count();
        let mut c = vec![T::zero(); nu];
        if let Some(st) = self.geometry.stencil(x, self.interp) {
            for (i, w) in st {
                for (acc, &v) in c.iter_mut().zip(&self.values[i * nu..(i + 1) * nu]) {
                    *acc = *acc + w * v;
                }
            }
        }
        SymTensor::from_coeffs(self.order, self.geometry.dim(), c).expect("coefficient count matches")
    }

    fn pair(&self, x: &[T], weighted: &[T]) -> T {
        let nu = self.coeff_count();
        match self.geometry.stencil(x, self.interp) {
            Some(st) => st
                .iter()
                .map(|&(i, w)| {
                    let v: T = self.values[i * nu..(i + 1) * nu]
                        .iter()
                        .zip(weighted)
                        .map(|(&a, &b)| a * b)
                        .sum();
                    w * v
                })
                .sum(),
            None => T::zero(),
        }
    }

    fn support(&self) -> &Ball<T> {
        &self.support
    }
}
