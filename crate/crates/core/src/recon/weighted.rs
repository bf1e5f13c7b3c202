//! The weighted data functional `W(T_i f)(omega, p)` and its forward oracle.

use super::data::{DataKind, TrtData};
use crate::error::{Error, Result};
use crate::geometry::{
    plane_curve_intersections_with, plane_disc_points, select_points, Ball, Curve, CurvePoint, Frame,
    Intersection, IntersectionOptions, PlaneCoords,
};
use crate::linalg::{axpy, dot, normalize, sub};
use crate::scalar::Scalar;
use crate::symtensor::channel_tensor;
use crate::xforms::{radon_forward, ScalarField, SphereGrid, TensorField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WOptions {
    /// Trapezoid nodes on the circle `S(omega)`.
    pub circle_nodes: usize,
    /// Rotation of the circle nodes, in radians.
    pub circle_shift: f64,
    /// Step of the central differences in `xi`.
    pub h_xi: f64,
    /// Plane offset step of the `p`-derivative.
    pub h_p: f64,
    /// Minimum `|<omega, gamma'>|` for a usable intersection.
    pub slope_tol: f64,
    /// Root tolerance of the plane-curve solver.
    pub root_tol: f64,
    /// Bracketing samples per curve piece.
    pub samples_per_piece: usize,
}

impl Default for WOptions {
    fn default() -> Self {
        WOptions {
            circle_nodes: 64,
            circle_shift: 0.0,
            h_xi: 1e-3,
            h_p: 1e-2,
            slope_tol: 1e-3,
            root_tol: 1e-12,
            samples_per_piece: 512,
        }
    }
}

impl WOptions {
    pub fn intersections(&self) -> IntersectionOptions {
        IntersectionOptions {
            samples_per_piece: self.samples_per_piece,
            ..IntersectionOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.circle_nodes < 3 {
            return Err(Error::invalid("S(omega) needs at least 3 nodes"));
        }
        for (name, v) in [("h_xi", self.h_xi), ("h_p", self.h_p), ("slope_tol", self.slope_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Trapezoid nodes `cos(t) u + sin(t) v` on the unit circle orthogonal to
/// `omega`, with `(u, v)` the transverse pair of the canonical frame of
/// `omega`, and their common weight.
pub fn circle_nodes<T: Scalar>(omega: &[T], count: usize, shift: f64) -> Result<(Vec<Vec<T>>, T)> {
    if omega.len() != 3 {
        return Err(Error::invalid("S(omega) quadrature is implemented for n = 3"));
    }
    let fr = Frame::canonical(omega)?;
    let (u, v) = (fr.alpha(), fr.beta());
    let two_pi = 2.0 * std::f64::consts::PI;
    let nodes = (0..count)
        .map(|k| {
            let t = shift + two_pi * k as f64 / count as f64;
            let (s, c) = (T::lit(t.sin()), T::lit(t.cos()));
            (0..3).map(|j| c * u[j] + s * v[j]).collect()
        })
        .collect();
    Ok((nodes, T::lit(two_pi / count as f64)))
}

/// `L(T_i f)(gamma(at), xi) = omega_k d/dxi_k` of the extended data, by a
/// central difference of step `h_xi`.
pub fn apply_l<T: Scalar, D: TrtData<T> + ?Sized>(
    data: &D,
    omega: &[T],
    at: CurvePoint<T>,
    xi: &[T],
    channel: usize,
    h_xi: T,
) -> Result<T> {
    if (dot(omega, omega) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid("omega must be a unit vector"));
    }
    if dot(xi, omega).abs() > T::lit(1e-8) || (dot(xi, xi) - T::one()).abs() > T::lit(1e-8) {
        return Err(Error::invalid("xi must be a unit vector orthogonal to omega"));
    }
    let plus = data.extended(at, &axpy(xi, h_xi, omega), channel)?;
    let minus = data.extended(at, &axpy(xi, -h_xi, omega), channel)?;
    Ok((plus - minus) / (h_xi + h_xi))
}

/// `int_{S(omega)} L(T_i f)(gamma(at), xi) d xi`.
pub fn circle_integral_l<T: Scalar, D: TrtData<T> + ?Sized>(
    data: &D,
    omega: &[T],
    at: CurvePoint<T>,
    channel: usize,
    opts: &WOptions,
) -> Result<T> {
    let (nodes, w) = circle_nodes(omega, opts.circle_nodes, opts.circle_shift)?;
    let h = T::lit(opts.h_xi);
    let mut sum = T::zero();
    for xi in &nodes {
        sum = sum + apply_l(data, omega, at, xi, channel, h)?;
    }
    Ok(sum * w)
}

/// Follows a transversal intersection to the parallel plane at offset `p`
/// by Newton's method on the same piece.
pub fn track_intersection<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    omega: &[T],
    start: CurvePoint<T>,
    p: T,
    slope_tol: T,
) -> Result<CurvePoint<T>> {
    let mut lam = start.lambda;
    let tol = T::lit(1e-14) * (T::one() + p.abs());
    for _ in 0..50 {
        let g = dot(omega, &curve.position(start.piece, lam)) - p;
        let s = dot(omega, &curve.derivative(start.piece, lam));
        if s.abs() < slope_tol {
            return Err(tangency(omega, p, s));
        }
        let step = g / s;
        lam = lam - step;
        if step.abs() <= tol {
            let g = dot(omega, &curve.position(start.piece, lam)) - p;
            if g.abs() <= T::lit(1e-10) * (T::one() + p.abs()) && (lam - start.lambda).abs() < T::lit(0.5) {
                return Ok(CurvePoint { piece: start.piece, lambda: lam });
            }
            break;
        }
    }
    Err(tangency(omega, p, dot(omega, &curve.derivative(start.piece, start.lambda))))
}

fn tangency<T: Scalar>(omega: &[T], p: T, slope: T) -> Error {
    Error::Tangency {
        omega: omega.iter().map(|v| v.as_f64()).collect(),
        p: p.as_f64(),
        slope: slope.as_f64(),
    }
}

/// Transversal intersections of a plane with the data curve, filtered by the
/// slope tolerance and ordered by `(piece, lambda)`.
pub fn usable_intersections<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    plane: &PlaneCoords<T>,
    opts: &WOptions,
) -> Vec<Intersection<T>> {
    let hits = plane_curve_intersections_with(curve, plane, T::lit(opts.root_tol), &opts.intersections());
    hits.simple
        .into_iter()
        .filter(|i| i.slope.abs() > T::lit(opts.slope_tol))
        .collect()
}

/// The first `count` usable intersection points whose view directions from
/// each of `xs` are pairwise independent; branch `j` is entry `j`.
pub fn plane_branches<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    plane: &PlaneCoords<T>,
    count: usize,
    xs: &[Vec<T>],
    opts: &WOptions,
) -> Result<Vec<Intersection<T>>> {
    let usable = usable_intersections(curve, plane, opts);
    let chosen: Vec<Intersection<T>> = select_points(&usable, xs, count).into_iter().cloned().collect();
    if chosen.len() < count {
        return Err(Error::Coverage {
            planes: vec![format!(
                "omega={:?} p={}: {} of {count} branches",
                plane.omega().iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                plane.p().as_f64(),
                chosen.len()
            )],
        });
    }
    Ok(chosen)
}

/// `W(T_i f)(omega, p) = d/dp int_{S(omega)} L(T_i f)(gamma_0(omega, p), xi) d xi
/// - int_{S(omega)} L~(T_i f) d xi` on the branch through `branch`, with
/// `L~ = (d lambda / d p) L d/d lambda` and `d lambda / d p = 1 / <omega, gamma'>`.
///
/// The `p`-derivative is a central difference over the planes at `p +- h_p`
/// with the intersection re-solved on each; `d/d lambda` is a central
/// difference of step `h_p |d lambda / d p|`.
pub fn weighted_data_w<T: Scalar, D: TrtData<T> + ?Sized>(
    data: &D,
    plane: &PlaneCoords<T>,
    channel: usize,
    branch: &Intersection<T>,
    opts: &WOptions,
) -> Result<T> {
    let curve = data.curve();
    let omega = plane.omega();
    let p = plane.p();
    let at = branch.at;
    let slope = dot(omega, &curve.derivative(at.piece, at.lambda));
    let slope_tol = T::lit(opts.slope_tol);
    if slope.abs() < slope_tol {
        return Err(tangency(omega, p, slope));
    }
    let hp = T::lit(opts.h_p);
    let plus = track_intersection(curve, omega, at, p + hp, slope_tol)?;
    let minus = track_intersection(curve, omega, at, p - hp, slope_tol)?;
    let term1 = (circle_integral_l(data, omega, plus, channel, opts)?
        - circle_integral_l(data, omega, minus, channel, opts)?)
        / (hp + hp);

    let dlam_dp = T::one() / slope;
    let hl = hp * dlam_dp.abs();
    let (nodes, w) = circle_nodes(omega, opts.circle_nodes, opts.circle_shift)?;
    let h_xi = T::lit(opts.h_xi);
    let ahead = CurvePoint { piece: at.piece, lambda: at.lambda + hl };
    let behind = CurvePoint { piece: at.piece, lambda: at.lambda - hl };
    let mut term2 = T::zero();
    for xi in &nodes {
        let d = apply_l(data, omega, ahead, xi, channel, h_xi)? - apply_l(data, omega, behind, xi, channel, h_xi)?;
        term2 = term2 + d / (hl + hl);
    }
    term2 = term2 * w * dlam_dp;
    Ok(term1 - term2)
}

/// `g(x) = <f(x), w(xi(x))>` with `xi(x) = (x - source) / |x - source|` and
/// `w` the channel weight of the canonical frame of `xi(x)`.
pub struct WeightedIntegrand<'a, T: Scalar, F: TensorField<T> + ?Sized> {
    field: &'a F,
    source: Vec<T>,
    kind: DataKind,
    channel: usize,
}

impl<'a, T: Scalar, F: TensorField<T> + ?Sized> WeightedIntegrand<'a, T, F> {
    pub fn new(field: &'a F, source: &[T], kind: DataKind, channel: usize) -> Result<Self> {
        kind.check(field.order(), field.dim())?;
        kind.check_channel(field.order(), field.dim(), channel)?;
        Ok(WeightedIntegrand {
            field,
            source: source.to_vec(),
            kind,
            channel,
        })
    }
}

impl<T: Scalar, F: TensorField<T> + ?Sized> ScalarField<T> for WeightedIntegrand<'_, T, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn value(&self, x: &[T]) -> T {
        let Some(xi) = normalize(&sub(x, &self.source)) else {
            return T::zero();
        };
        let Ok(fr) = Frame::canonical(&xi) else {
            return T::zero();
        };
        match self.kind {
            DataKind::Tensor => {
                let w = channel_tensor(fr.alpha(), fr.beta(), self.field.order(), self.channel);
                self.field.pair(x, &w.weighted())
            }
            DataKind::Vector => self.field.pair(x, fr.eta_at(self.channel)),
        }
    }

    fn support(&self) -> &Ball<T> {
        self.field.support()
    }
}

/// Plane integrals `R g(omega, p')` of the weighted integrand for the frozen
/// source, at `p' = p - h, p, p + h`.
fn weighted_plane_triple<T: Scalar, F: TensorField<T> + ?Sized>(
    field: &F,
    kind: DataKind,
    source: &[T],
    plane: &PlaneCoords<T>,
    channel: usize,
    h: T,
    resolution: usize,
) -> Result<[T; 3]> {
    let g = WeightedIntegrand::new(field, source, kind, channel)?;
    let p = plane.p();
    Ok([
        radon_forward(&g, &plane.with_offset(p - h), resolution),
        radon_forward(&g, plane, resolution),
        radon_forward(&g, &plane.with_offset(p + h), resolution),
    ])
}

/// `d/dp' R g(omega, p')` at `p' = p` for the source frozen at `source`.
pub fn weighted_plane_slope<T: Scalar, F: TensorField<T> + ?Sized>(
    field: &F,
    kind: DataKind,
    source: &[T],
    plane: &PlaneCoords<T>,
    channel: usize,
    h: T,
    resolution: usize,
) -> Result<T> {
    let [m, _, p] = weighted_plane_triple(field, kind, source, plane, channel, h, resolution)?;
    Ok((p - m) / (h + h))
}

/// Forward oracle for `W`: `d^2/dp'^2 R g(omega, p')` at `p' = p` with the
/// source frozen at `source`.
pub fn w_oracle<T: Scalar, F: TensorField<T> + ?Sized>(
    field: &F,
    kind: DataKind,
    source: &[T],
    plane: &PlaneCoords<T>,
    channel: usize,
    h: T,
    resolution: usize,
) -> Result<T> {
    let [m, c, p] = weighted_plane_triple(field, kind, source, plane, channel, h, resolution)?;
    Ok((p - c - c + m) / (h * h))
}

/// `W(T_i f)` for one channel and branch sampled on a sphere grid times a
/// uniform offset grid. Entries that could not be formed (tangency or too
/// few branches) hold zero and are flagged invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct WField<T> {
    grid: SphereGrid<T>,
    offsets: Vec<T>,
    channel: usize,
    branch: usize,
    values: Vec<T>,
    valid: Vec<bool>,
}

impl<T: Scalar> WField<T> {
    /// Builds the lattice in parallel over directions. Planes missing the
    /// support ball by more than `h_p` get `W = 0`. Branches are chosen per
    /// plane by [`plane_branches`] against 4 sampled disc points.
    pub fn build<D: TrtData<T> + ?Sized>(
        data: &D,
        grid: SphereGrid<T>,
        offsets: Vec<T>,
        channel: usize,
        branch: usize,
        opts: &WOptions,
    ) -> Result<Self> {
        opts.validate()?;
        data.kind().check_channel(data.order(), data.dim(), channel)?;
        if grid.dim() != data.dim() {
            return Err(Error::invalid("sphere grid and data dimensions differ"));
        }
        let ball = data.support().clone();
        let margin = T::lit(opts.h_p) + T::lit(opts.h_xi);
        let rows: Vec<Vec<(T, bool)>> = grid
            .directions()
            .par_iter()
            .enumerate()
            .map(|(d, omega)| {
                offsets
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        let plane = match PlaneCoords::new(omega.clone(), p) {
                            Ok(h) => h,
                            Err(_) => return (T::zero(), false),
                        };
                        if plane.signed_distance(&ball.center).abs() > ball.radius + margin {
                            return (T::zero(), true);
                        }
                        let xs = plane_disc_points(&ball, &plane, 4, (d * 65_537 + k) as u64);
                        let entry = plane_branches(data.curve(), &plane, branch + 1, &xs, opts)
                            .and_then(|b| weighted_data_w(data, &plane, channel, &b[branch], opts));
                        match entry {
                            Ok(v) if v.is_finite() => (v, true),
                            Ok(_) | Err(_) => (T::zero(), false),
                        }
                    })
                    .collect()
            })
            .collect();
        let (values, valid) = rows.concat().into_iter().unzip();
        Ok(WField {
            grid,
            offsets,
            channel,
            branch,
            values,
            valid,
        })
    }

    pub fn grid(&self) -> &SphereGrid<T> {
        &self.grid
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    pub fn channel(&self) -> usize {
        self.channel
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    /// Fraction of lattice entries flagged invalid.
    pub fn invalid_fraction(&self) -> f64 {
        let bad = self.valid.iter().filter(|v| !**v).count();
        bad as f64 / self.valid.len().max(1) as f64
    }

    /// Cubic interpolation in `p` along direction `d`; `Ok(None)` when a
    /// stencil entry is invalid, out-of-domain error outside the offset range.
    pub fn interpolate(&self, d: usize, p: T) -> Result<Option<T>> {
        let np = self.offsets.len();
        let p0 = self.offsets[0];
        let h = self.offsets[1] - self.offsets[0];
        let last = self.offsets[np - 1];
        let slack = h * T::lit(1e-9);
        if p < p0 - slack || p > last + slack {
            return Err(Error::OutOfDomain(format!(
                "offset {p} outside the W lattice [{p0}, {last}]"
            )));
        }
        let p = p.max(p0).min(last);
        let mut sum = T::zero();
        for (i, w) in crate::xforms::cubic_axis_weights(p, p0, h, np) {
            if w != T::zero() && !self.valid[d * np + i] {
                return Ok(None);
            }
            sum = sum + w * self.values[d * np + i];
        }
        Ok(Some(sum))
    }
}
