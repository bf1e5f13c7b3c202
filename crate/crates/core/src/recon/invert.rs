//! From weighted data to frame components `<f(x), A_ij>`, and from frame
//! components to Cartesian components by Cramer's rule and polarization.

use super::data::{DataKind, TrtData};
use super::weighted::{plane_branches, weighted_data_w, WField, WOptions};
use crate::error::{Error, Result};
use crate::geometry::{Curve, Frame, PlaneCoords};
use crate::linalg::{dot, normalize, sub, unit, Matrix};
use crate::scalar::Scalar;
use crate::symtensor::{
    basis_system, channel_tensor, cramer_coefficients, multi_indices, polarize_with, vector_cramer, BasisSystem,
    ComponentIndex, SymTensor,
};
use crate::xforms::{inversion_constant, SphereGrid, TensorField};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// `|det|` threshold of [`choose_independent_axis`] used by [`recover_vector`].
pub const AXIS_TOL: f64 = 1e-8;

/// Normal `(1, 2, ..., n) / |(1, 2, ..., n)|` of the reference plane through
/// `x` whose curve points fix the view directions at `x`.
pub fn reference_normal<T: Scalar>(n: usize) -> Vec<T> {
    let v: Vec<T> = (1..=n).map(T::of_usize).collect();
    normalize(&v).expect("nonzero")
}

/// A point `x` with the view directions `xi_j = (x - gamma_j) / |x - gamma_j|`
/// that feed branch `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet<T> {
    x: Vec<T>,
    directions: Vec<Vec<T>>,
    sources: Vec<Vec<T>>,
}

impl<T: Scalar> ViewSet<T> {
    /// `count` curve points on the reference plane through `x`, chosen by
    /// [`plane_branches`] for this `x`.
    pub fn from_curve<C: Curve<T> + ?Sized>(curve: &C, x: &[T], count: usize, opts: &WOptions) -> Result<Self> {
        let omega = reference_normal::<T>(x.len());
        let plane = PlaneCoords::new(omega.clone(), dot(&omega, x))?;
        let points = plane_branches(curve, &plane, count, &[x.to_vec()], opts)?;
        Self::from_sources(x, points.into_iter().map(|p| p.point).collect())
    }

    pub fn from_sources(x: &[T], sources: Vec<Vec<T>>) -> Result<Self> {
        let directions = sources
            .iter()
            .map(|s| normalize(&sub(x, s)).ok_or_else(|| Error::invalid("view source coincides with x")))
            .collect::<Result<_>>()?;
        Ok(ViewSet {
            x: x.to_vec(),
            directions,
            sources,
        })
    }

    /// View directions given directly (normalised); no sources are recorded.
    pub fn from_directions(x: &[T], directions: Vec<Vec<T>>) -> Result<Self> {
        let directions = directions
            .iter()
            .map(|d| normalize(d).ok_or_else(|| Error::invalid("zero view direction")))
            .collect::<Result<_>>()?;
        Ok(ViewSet {
            x: x.to_vec(),
            directions,
            sources: Vec::new(),
        })
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn directions(&self) -> &[Vec<T>] {
        &self.directions
    }

    pub fn sources(&self) -> &[Vec<T>] {
        &self.sources
    }

    pub fn frame(&self, branch: usize) -> Result<Frame<T>> {
        let d = self
            .directions
            .get(branch)
            .ok_or_else(|| Error::invalid(format!("no view direction for branch {}", branch + 1)))?;
        Frame::canonical(d)
    }
}

/// Source of frame components at a point.
///
/// Tensor labels `(i, j)` stand for `<f(x), alpha_j^i (.) beta_j^(m-i)>`,
/// vector labels `(k, j)` for `<f(x), eta_k(xi_j)>`.
pub trait AProvider<T: Scalar>: Sync {
    fn kind(&self) -> DataKind;

    fn components(&self, views: &ViewSet<T>, labels: &[ComponentIndex]) -> Result<BTreeMap<ComponentIndex, T>>;
}

/// Frame components by direct contraction with a known field.
pub struct ExactA<'a, T: Scalar, F: TensorField<T> + ?Sized> {
    field: &'a F,
    kind: DataKind,
    _marker: std::marker::PhantomData<T>,
}

impl<'a, T: Scalar, F: TensorField<T> + ?Sized> ExactA<'a, T, F> {
    pub fn new(field: &'a F, kind: DataKind) -> Result<Self> {
        kind.check(field.order(), field.dim())?;
        Ok(ExactA {
            field,
            kind,
            _marker: std::marker::PhantomData,
        })
    }
}

impl<T: Scalar, F: TensorField<T> + ?Sized> AProvider<T> for ExactA<'_, T, F> {
    fn kind(&self) -> DataKind {
        self.kind
    }

    fn components(&self, views: &ViewSet<T>, labels: &[ComponentIndex]) -> Result<BTreeMap<ComponentIndex, T>> {
        let (m, n) = (self.field.order(), self.field.dim());
        labels
            .iter()
            .map(|&l| {
                self.kind.check_channel(m, n, l.channel)?;
                let fr = views.frame(l.branch)?;
                let v = match self.kind {
                    DataKind::Tensor => {
                        let w = channel_tensor(fr.alpha(), fr.beta(), m, l.channel);
                        self.field.pair(views.x(), &w.weighted())
                    }
                    DataKind::Vector => self.field.pair(views.x(), fr.eta_at(l.channel)),
                };
                Ok((l, v))
            })
            .collect()
    }
}

/// Frame components with bookkeeping of the planes left out.
#[derive(Debug, Clone, PartialEq)]
pub struct AEstimate<T> {
    pub values: BTreeMap<ComponentIndex, T>,
    /// Fraction of sphere-grid weight whose planes were skipped, per label.
    pub skipped: BTreeMap<ComponentIndex, f64>,
}

/// `-1/(8 pi^2) int_{S^2} W(T_i f)(omega, <x, omega>) d omega` evaluated
/// plane by plane at each requested point.
///
/// Branches on each plane come from [`plane_branches`] against `x`; planes
/// where `W` cannot be formed are dropped and the remaining weights rescaled
/// to the full sphere.
pub struct ProbeA<'a, T: Scalar, D: TrtData<T> + ?Sized> {
    data: &'a D,
    grid: SphereGrid<T>,
    opts: WOptions,
}

impl<'a, T: Scalar, D: TrtData<T> + ?Sized> ProbeA<'a, T, D> {
    pub fn new(data: &'a D, grid: SphereGrid<T>, opts: WOptions) -> Result<Self> {
        opts.validate()?;
        if data.dim() != 3 || grid.dim() != 3 {
            return Err(Error::invalid("plane-by-plane frame components are implemented for n = 3"));
        }
        Ok(ProbeA { data, grid, opts })
    }

    pub fn estimate(&self, views: &ViewSet<T>, labels: &[ComponentIndex]) -> Result<AEstimate<T>> {
        let x = views.x();
        if !self.data.support().contains(x) {
            return Err(Error::OutOfDomain(format!(
                "probe {:?} lies outside the support ball",
                x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
            )));
        }
        for l in labels {
            self.data.kind().check_channel(self.data.order(), self.data.dim(), l.channel)?;
        }
        let count = labels.iter().map(|l| l.branch + 1).max().unwrap_or(0);
        let xs = [x.to_vec()];
        let per_dir: Vec<Vec<Option<T>>> = self
            .grid
            .directions()
            .par_iter()
            .map(|omega| {
                let Ok(plane) = PlaneCoords::new(omega.clone(), dot(omega, x)) else {
                    return vec![None; labels.len()];
                };
                let Ok(branches) = plane_branches(self.data.curve(), &plane, count, &xs, &self.opts) else {
                    return vec![None; labels.len()];
                };
                labels
                    .iter()
                    .map(|l| {
                        weighted_data_w(self.data, &plane, l.channel, &branches[l.branch], &self.opts)
                            .ok()
                            .filter(|v| v.is_finite())
                    })
                    .collect()
            })
            .collect();
        let total = self.grid.total_weight();
        let c = T::lit(inversion_constant(3));
        let mut out = AEstimate {
            values: BTreeMap::new(),
            skipped: BTreeMap::new(),
        };
        for (li, &l) in labels.iter().enumerate() {
            let mut sum = T::zero();
            let mut used = T::zero();
            for (row, &w) in per_dir.iter().zip(self.grid.weights()) {
                if let Some(v) = row[li] {
                    sum = sum + w * v;
                    used = used + w;
                }
            }
            if !(used > T::zero()) {
                return Err(Error::Coverage {
                    planes: vec![format!("every plane through x was skipped for {l}")],
                });
            }
            out.values.insert(l, c * sum * total / used);
            out.skipped.insert(l, 1.0 - (used / total).as_f64());
        }
        Ok(out)
    }
}

impl<T: Scalar, D: TrtData<T> + ?Sized> AProvider<T> for ProbeA<'_, T, D> {
    fn kind(&self) -> DataKind {
        self.data.kind()
    }

    fn components(&self, views: &ViewSet<T>, labels: &[ComponentIndex]) -> Result<BTreeMap<ComponentIndex, T>> {
        Ok(self.estimate(views, labels)?.values)
    }
}

/// `<f(x), A_ij> = -1/(8 pi^2) int_{S^2} W(T_i^j f)(omega, <x, omega>) d omega`
/// from a sampled `W`, interpolated in `p`. Directions whose stencil touches
/// an invalid entry are dropped and the weights rescaled.
pub fn recover_a_component<T: Scalar>(x: &[T], w: &WField<T>) -> Result<T> {
    let grid = w.grid();
    if x.len() != grid.dim() || grid.dim() != 3 {
        return Err(Error::invalid("recover_a_component works in R^3"));
    }
    let mut sum = T::zero();
    let mut used = T::zero();
    for (d, (omega, &wt)) in grid.directions().iter().zip(grid.weights()).enumerate() {
        if let Some(v) = w.interpolate(d, dot(x, omega))? {
            sum = sum + wt * v;
            used = used + wt;
        }
    }
    if !(used > T::zero()) {
        return Err(Error::Coverage {
            planes: vec!["no valid W entries around x".into()],
        });
    }
    Ok(T::lit(inversion_constant(3)) * sum * grid.total_weight() / used)
}

/// Frame components from sampled `W` lattices, one per label.
pub struct WFieldA<T: Scalar> {
    kind: DataKind,
    fields: BTreeMap<ComponentIndex, WField<T>>,
}

impl<T: Scalar> WFieldA<T> {
    pub fn new(kind: DataKind, fields: BTreeMap<ComponentIndex, WField<T>>) -> Self {
        WFieldA { kind, fields }
    }
}

impl<T: Scalar> AProvider<T> for WFieldA<T> {
    fn kind(&self) -> DataKind {
        self.kind
    }

    fn components(&self, views: &ViewSet<T>, labels: &[ComponentIndex]) -> Result<BTreeMap<ComponentIndex, T>> {
        labels
            .iter()
            .map(|&l| {
                let w = self
                    .fields
                    .get(&l)
                    .ok_or_else(|| Error::IncompleteInput(format!("no W lattice for {l}")))?;
                Ok((l, recover_a_component(views.x(), w)?))
            })
            .collect()
    }
}

/// `<f(x), theta^m> = sum_ij (Delta_ij(theta) / Delta) <f(x), A_ij>`.
pub fn recover_power<T: Scalar>(
    theta: &[T],
    a_values: &BTreeMap<ComponentIndex, T>,
    sys: &BasisSystem<T>,
) -> Result<T> {
    let coeffs = cramer_coefficients(sys, theta)?;
    let mut sum = T::zero();
    for (l, c) in coeffs {
        let a = a_values
            .get(&l)
            .ok_or_else(|| Error::IncompleteInput(format!("missing frame component {l}")))?;
        sum = sum + c * *a;
    }
    Ok(sum)
}

/// All components `f_{i_1..i_m}(x)` in `R^3` from the first `m + 1` view
/// directions: `recover_power` on every subset sum of `e_{i_1}, ..., e_{i_m}`,
/// then polarization.
pub fn recover_tensor_components<T: Scalar, P: AProvider<T> + ?Sized>(
    views: &ViewSet<T>,
    provider: &P,
    m: usize,
) -> Result<SymTensor<T>> {
    if provider.kind() != DataKind::Tensor {
        return Err(Error::invalid("tensor recovery needs tensor frame components"));
    }
    if views.x().len() != 3 {
        return Err(Error::invalid("tensor recovery works in R^3"));
    }
    if views.directions().len() < m + 1 {
        return Err(Error::Coverage {
            planes: vec![format!(
                "{} view directions at x, need {}",
                views.directions().len(),
                m + 1
            )],
        });
    }
    let dirs: Vec<&[T]> = views.directions()[..=m].iter().map(|d| d.as_slice()).collect();
    let sys = basis_system(&dirs)?;
    let a = provider.components(views, sys.labels())?;
    if m == 0 {
        let v = recover_power(&unit(3, 0), &a, &sys)?;
        return SymTensor::from_coeffs(0, 3, vec![v]);
    }
    let basis: Vec<Vec<T>> = (0..3).map(|k| unit(3, k)).collect();
    let coeffs = multi_indices(m, 3)
        .iter()
        .map(|idx| {
            let thetas: Vec<&[T]> = idx.iter().map(|&k| basis[k].as_slice()).collect();
            polarize_with(m, |s| recover_power(&s.sum_of(&thetas), &a, &sys))
        })
        .collect::<Result<Vec<T>>>()?;
    SymTensor::from_coeffs(m, 3, coeffs)
}

/// Smallest `l` in `1..n-1` with `|det(eta_1(xi_1), ..., eta_{n-1}(xi_1), eta_l(xi_2))| > tol`.
pub fn choose_independent_axis<T: Scalar>(frame1: &Frame<T>, frame2: &Frame<T>, tol: T) -> Result<usize> {
    let n = frame1.dim();
    if frame2.dim() != n {
        return Err(Error::invalid("frames must share a dimension"));
    }
    let mut cols: Vec<Vec<T>> = frame1.eta().to_vec();
    cols.push(vec![T::zero(); n]);
    let mut best = T::zero();
    for l in 1..n {
        cols[n - 1] = frame2.eta_at(l).to_vec();
        let det = Matrix::from_columns(&cols).det().abs();
        if det > tol {
            return Ok(l);
        }
        best = best.max(det);
    }
    Err(Error::degenerate(format!(
        "no axis completes eta(xi_1) to a basis (largest |det| = {best:e}); xi_1 and xi_2 are nearly parallel"
    )))
}

/// `f(x)` in odd `R^n` from the components `<f(x), eta_k(xi_1)>`, `k < n`,
/// and `<f(x), eta_l(xi_2)>`, solving the `n x n` system of the two frames.
pub fn recover_vector<T: Scalar, P: AProvider<T> + ?Sized>(views: &ViewSet<T>, provider: &P) -> Result<Vec<T>> {
    let n = views.x().len();
    if n % 2 == 0 {
        return Err(Error::UnsupportedDimension(n));
    }
    if provider.kind() != DataKind::Vector {
        return Err(Error::invalid("vector recovery needs vector frame components"));
    }
    if views.directions().len() < 2 {
        return Err(Error::Coverage {
            planes: vec![format!("{} view directions at x, need 2", views.directions().len())],
        });
    }
    let f1 = views.frame(0)?;
    let f2 = views.frame(1)?;
    let l = choose_independent_axis(&f1, &f2, T::lit(AXIS_TOL))?;
    let mut labels: Vec<ComponentIndex> = (1..n).map(|k| ComponentIndex::new(k, 0)).collect();
    labels.push(ComponentIndex::new(l, 1));
    let a = provider.components(views, &labels)?;
    let vals: Vec<T> = labels
        .iter()
        .map(|l| {
            a.get(l)
                .copied()
                .ok_or_else(|| Error::IncompleteInput(format!("missing vector component ({}, {})", l.channel, l.branch + 1)))
        })
        .collect::<Result<_>>()?;
    (0..n)
        .map(|i| {
            let c = vector_cramer(&f1, &f2, l, &unit(n, i))?;
            Ok(c.iter().zip(&vals).map(|(&ci, &vi)| ci * vi).sum())
        })
        .collect()
}
