//! TRT data on an acquisition curve: evaluated on demand along exact rays, or
//! tabulated on a `(lambda, angles, channel)` lattice.

use crate::error::{Error, Result};
use crate::geometry::{angles_from_direction, encompasses, Ball, Curve, CurvePoint, Frame};
use crate::linalg::norm;
use crate::scalar::Scalar;
use crate::xforms::{trt_tensor_frame, trt_vector_frame, RaySpan, TensorField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Curve points and directions sampled per axis when checking the encompassing contract.
pub const ENCOMPASS_SAMPLES: usize = 96;

/// Which transform the channels belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    /// Channels `0..=m`, paired with `alpha^i (.) beta^(m-i)` (n = 3).
    Tensor,
    /// Channels `1..n-1`, paired with `eta_i` (m = 1).
    Vector,
}

impl DataKind {
    pub fn channels(self, m: usize, n: usize) -> Vec<usize> {
        match self {
            DataKind::Tensor => (0..=m).collect(),
            DataKind::Vector => (1..n).collect(),
        }
    }

    /// Checks that a field of order `m` in `R^n` carries this kind of data.
    pub fn check(self, m: usize, n: usize) -> Result<()> {
        match self {
            DataKind::Tensor if n != 3 => Err(Error::invalid(format!("tensor TRT data need n = 3, got n = {n}"))),
            DataKind::Vector if m != 1 => Err(Error::invalid(format!("vector TRT data need m = 1, got m = {m}"))),
            _ => Ok(()),
        }
    }

    pub fn check_channel(self, m: usize, n: usize, channel: usize) -> Result<()> {
        if self.channels(m, n).contains(&channel) {
            Ok(())
        } else {
            Err(Error::invalid(format!("channel {channel} not available for {self:?} data (m={m}, n={n})")))
        }
    }
}

/// Half-line TRT value `T_i^+ f(a, frame.xi)` for the frame's own transverse vectors.
pub fn trt_half_frame<T: Scalar, F: TensorField<T> + ?Sized>(
    kind: DataKind,
    f: &F,
    a: &[T],
    frame: &Frame<T>,
    channel: usize,
    step: T,
) -> Result<T> {
    match kind {
        DataKind::Tensor => trt_tensor_frame(f, a, frame, channel, step, RaySpan::Half),
        DataKind::Vector => trt_vector_frame(f, a, frame, channel, step, RaySpan::Half),
    }
}

/// Data available for every ray issuing from the curve.
pub trait TrtData<T: Scalar>: Send + Sync {
    fn kind(&self) -> DataKind;

    fn order(&self) -> usize;

    fn dim(&self) -> usize;

    fn curve(&self) -> &dyn Curve<T>;

    /// Support ball of the underlying field.
    fn support(&self) -> &Ball<T>;

    /// `|xi|^(m-1) T_i^+ f(gamma(at), xi / |xi|)` for nonzero `xi`.
    fn extended(&self, at: CurvePoint<T>, xi: &[T], channel: usize) -> Result<T>;

    fn channels(&self) -> Vec<usize> {
        self.kind().channels(self.order(), self.dim())
    }
}

fn unit_and_scale<T: Scalar>(xi: &[T], m: usize) -> Result<(Vec<T>, T)> {
    let r = norm(xi);
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::invalid("data direction must be nonzero and finite"));
    }
    let u = xi.iter().map(|&v| v / r).collect();
    Ok((u, r.powi(m as i32 - 1)))
}

/// Data computed by ray quadrature whenever they are requested.
pub struct RayData<'a, T: Scalar, F: TensorField<T> + ?Sized> {
    field: &'a F,
    curve: &'a dyn Curve<T>,
    kind: DataKind,
    step: T,
}

impl<'a, T: Scalar, F: TensorField<T> + ?Sized> RayData<'a, T, F> {
    /// Fails with a contract violation unless the curve encompasses the support.
    pub fn new(field: &'a F, curve: &'a dyn Curve<T>, kind: DataKind, step: T) -> Result<Self> {
        kind.check(field.order(), field.dim())?;
        check_encompassing(curve, field.support())?;
        if !(step > T::zero()) {
            return Err(Error::invalid("ray step must be positive"));
        }
        Ok(RayData { field, curve, kind, step })
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn field(&self) -> &F {
        self.field
    }
}

impl<T: Scalar, F: TensorField<T> + ?Sized> TrtData<T> for RayData<'_, T, F> {
    fn kind(&self) -> DataKind {
        self.kind
    }

    fn order(&self) -> usize {
        self.field.order()
    }

    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn curve(&self) -> &dyn Curve<T> {
        self.curve
    }

    fn support(&self) -> &Ball<T> {
        self.field.support()
    }

    fn extended(&self, at: CurvePoint<T>, xi: &[T], channel: usize) -> Result<T> {
        let (u, s) = unit_and_scale(xi, self.order())?;
        let frame = Frame::canonical(&u)?;
        let a = self.curve.at(at);
        Ok(s * trt_half_frame(self.kind, self.field, &a, &frame, channel, self.step)?)
    }
}

fn check_encompassing<T: Scalar, C: Curve<T> + ?Sized>(curve: &C, ball: &Ball<T>) -> Result<()> {
    if curve.dim() != ball.dim() {
        return Err(Error::invalid("curve and field dimensions differ"));
    }
    let report = encompasses(curve, ball, ENCOMPASS_SAMPLES);
    if let Some(w) = report.witness {
        return Err(Error::ContractViolation(format!(
            "{} does not encompass the support ball: {} (piece {}, lambda {})",
            curve.describe(),
            w.reason,
            w.at.piece,
            w.at.lambda
        )));
    }
    Ok(())
}

/// Lattice sizes for [`acquire_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    /// Curve samples per piece.
    pub lambda_count: usize,
    /// Nodes in each polar angle `phi_1..phi_{n-2}` over `[0, pi]`, endpoints included.
    pub polar: usize,
    /// Nodes in the azimuth `phi_{n-1}` over `[0, 2 pi)`.
    pub azimuth: usize,
    /// Ray quadrature step.
    pub step: f64,
}

/// Header describing a tabulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: DataKind,
    pub order: usize,
    pub dim: usize,
    pub curve: String,
    pub pieces: usize,
    pub channels: Vec<usize>,
    pub spec: DatasetSpec,
    pub support_center: Vec<f64>,
    pub support_radius: f64,
}

impl DatasetMeta {
    pub fn direction_count(&self) -> usize {
        self.spec.polar.pow(self.dim as u32 - 2) * self.spec.azimuth
    }

    pub fn len(&self) -> usize {
        self.pieces * self.spec.lambda_count * self.direction_count() * self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// TRT data on a `(piece, lambda) x (phi_1, ..., phi_{n-1}) x channel` lattice,
/// interpolated with Catmull-Rom weights (periodic in the azimuth and on
/// closed pieces).
#[derive(Clone)]
pub struct TRTDataset<T: Scalar> {
    curve: Arc<dyn Curve<T>>,
    meta: DatasetMeta,
    support: Ball<T>,
    values: Vec<T>,
}

impl<T: Scalar> std::fmt::Debug for TRTDataset<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TRTDataset").field("meta", &self.meta).finish()
    }
}

fn axis_nodes<T: Scalar>(lo: T, hi: T, count: usize, periodic: bool) -> (T, T) {
    let h = if periodic {
        (hi - lo) / T::of_usize(count)
    } else {
        (hi - lo) / T::of_usize(count - 1)
    };
    (lo, h)
}

/// Catmull-Rom weights on one axis, wrapping when `periodic`.
fn cubic_weights<T: Scalar>(x: T, lo: T, h: T, count: usize, periodic: bool) -> [(usize, T); 4] {
    let s = (x - lo) / h;
    let (i0, t) = if periodic {
        let f = s.floor();
        (f.to_i64().unwrap_or(0), s - f)
    } else {
        let i = s.floor().to_i64().unwrap_or(0).clamp(0, count as i64 - 2);
        (i, s - T::lit(i as f64))
    };
    let half = T::lit(0.5);
    let (t2, t3) = (t * t, t * t * t);
    let w = [
        half * (-t3 + T::lit(2.0) * t2 - t),
        half * (T::lit(3.0) * t3 - T::lit(5.0) * t2 + T::lit(2.0)),
        half * (T::lit(-3.0) * t3 + T::lit(4.0) * t2 + t),
        half * (t3 - t2),
    ];
    let n = count as i64;
    let idx = |j: i64| -> usize {
        if periodic {
            j.rem_euclid(n) as usize
        } else {
            j.clamp(0, n - 1) as usize
        }
    };
    [
        (idx(i0 - 1), w[0]),
        (idx(i0), w[1]),
        (idx(i0 + 1), w[2]),
        (idx(i0 + 2), w[3]),
    ]
}

impl<T: Scalar> TRTDataset<T> {
    /// Reassembles a dataset from stored parts.
    pub fn from_parts(curve: Arc<dyn Curve<T>>, meta: DatasetMeta, values: Vec<T>) -> Result<Self> {
        if meta.dim < 2 || curve.dim() != meta.dim || curve.piece_count() != meta.pieces {
            return Err(Error::invalid("dataset header does not match the curve"));
        }
        if meta.spec.lambda_count < 2 || meta.spec.polar < 2 || meta.spec.azimuth < 4 {
            return Err(Error::invalid("dataset lattice needs lambda >= 2, polar >= 2, azimuth >= 4"));
        }
        if meta.channels != meta.kind.channels(meta.order, meta.dim) {
            return Err(Error::invalid("dataset channel list does not match its kind"));
        }
        if values.len() != meta.len() {
            return Err(Error::invalid(format!(
                "dataset needs {} values, got {}",
                meta.len(),
                values.len()
            )));
        }
        let support = Ball::new(
            meta.support_center.iter().map(|&v| T::lit(v)).collect(),
            T::lit(meta.support_radius),
        )?;
        Ok(TRTDataset {
            curve,
            meta,
            support,
            values,
        })
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lambda_node(&self, piece: usize, k: usize) -> T {
        let (a, b) = self.curve.domain(piece);
        let (lo, h) = axis_nodes(a, b, self.meta.spec.lambda_count, self.curve.periodic(piece));
        lo + h * T::of_usize(k)
    }

    /// Angles of direction node `d` (azimuth fastest).
    pub fn direction_angles(&self, d: usize) -> Vec<T> {
        direction_angles(&self.meta, d)
    }

    fn flat(&self, piece: usize, k: usize, d: usize, c: usize) -> usize {
        let m = &self.meta;
        ((piece * m.spec.lambda_count + k) * m.direction_count() + d) * m.channels.len() + c
    }

    /// Stored value at lattice node `(piece, k, d)` for the `c`-th channel in [`DatasetMeta::channels`].
    pub fn node_value(&self, piece: usize, k: usize, d: usize, c: usize) -> T {
        self.values[self.flat(piece, k, d, c)]
    }

    /// Interpolated `T_i^+ f(gamma(at), u)` for a unit direction `u`.
    pub fn interpolate(&self, at: CurvePoint<T>, u: &[T], channel: usize) -> Result<T> {
        let m = &self.meta;
        let c = m
            .channels
            .iter()
            .position(|&ch| ch == channel)
            .ok_or_else(|| Error::invalid(format!("channel {channel} not stored in the dataset")))?;
        if at.piece >= m.pieces {
            return Err(Error::invalid(format!("curve piece {} out of range", at.piece)));
        }
        let (a, b) = self.curve.domain(at.piece);
        let periodic = self.curve.periodic(at.piece);
        let (lo, h) = axis_nodes(a, b, m.spec.lambda_count, periodic);
        let lam = cubic_weights(at.lambda, lo, h, m.spec.lambda_count, periodic);
        let angles = angles_from_direction(u)?;
        let pi = T::PI();
        let n = m.dim;
        let mut stencil: Vec<(usize, T)> = vec![(0, T::one())];
        for (j, &ang) in angles.iter().enumerate() {
            let last = j + 1 == n - 1;
            let w = if last {
                let (lo, h) = axis_nodes(T::zero(), pi + pi, m.spec.azimuth, true);
                cubic_weights(ang, lo, h, m.spec.azimuth, true)
            } else {
                let (lo, h) = axis_nodes(T::zero(), pi, m.spec.polar, false);
                cubic_weights(ang, lo, h, m.spec.polar, false)
            };
            let size = if last { m.spec.azimuth } else { m.spec.polar };
            stencil = stencil
                .iter()
                .flat_map(|&(base, wb)| w.iter().map(move |&(i, wi)| (base * size + i, wb * wi)))
                .collect();
        }
        let mut sum = T::zero();
        for &(k, wk) in &lam {
            for &(d, wd) in &stencil {
                sum = sum + wk * wd * self.values[self.flat(at.piece, k, d, c)];
            }
        }
        Ok(sum)
    }
}

fn direction_angles<T: Scalar>(meta: &DatasetMeta, mut d: usize) -> Vec<T> {
    let n = meta.dim;
    let pi = T::PI();
    let mut angles = vec![T::zero(); n - 1];
    let az = d % meta.spec.azimuth;
    d /= meta.spec.azimuth;
    angles[n - 2] = (pi + pi) * T::of_usize(az) / T::of_usize(meta.spec.azimuth);
    for j in (0..n - 2).rev() {
        let k = d % meta.spec.polar;
        d /= meta.spec.polar;
        angles[j] = pi * T::of_usize(k) / T::of_usize(meta.spec.polar - 1);
    }
    angles
}

impl<T: Scalar> TrtData<T> for TRTDataset<T> {
    fn kind(&self) -> DataKind {
        self.meta.kind
    }

    fn order(&self) -> usize {
        self.meta.order
    }

    fn dim(&self) -> usize {
        self.meta.dim
    }

    fn curve(&self) -> &dyn Curve<T> {
        self.curve.as_ref()
    }

    fn support(&self) -> &Ball<T> {
        &self.support
    }

    fn extended(&self, at: CurvePoint<T>, xi: &[T], channel: usize) -> Result<T> {
        let (u, s) = unit_and_scale(xi, self.meta.order)?;
        Ok(s * self.interpolate(at, &u, channel)?)
    }
}

/// Tabulates half-line TRT data of `f` on the lattice described by `spec`.
///
/// Node values are `trt_*_frame` calls with the frame built from the node
/// angles, so every stored ray starts on the curve.
pub fn acquire_dataset<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    curve: Arc<dyn Curve<T>>,
    kind: DataKind,
    spec: DatasetSpec,
) -> Result<TRTDataset<T>> {
    let (m, n) = (f.order(), f.dim());
    kind.check(m, n)?;
    check_encompassing(curve.as_ref(), f.support())?;
    if !(spec.step > 0.0) {
        return Err(Error::invalid("ray step must be positive"));
    }
    let meta = DatasetMeta {
        kind,
        order: m,
        dim: n,
        curve: curve.describe(),
        pieces: curve.piece_count(),
        channels: kind.channels(m, n),
        spec,
        support_center: f.support().center.iter().map(|v| v.as_f64()).collect(),
        support_radius: f.support().radius.as_f64(),
    };
    let shell = TRTDataset::from_parts(curve.clone(), meta.clone(), vec![T::zero(); meta.len()])?;
    let step = T::lit(spec.step);
    let frames: Vec<Frame<T>> = (0..meta.direction_count())
        .map(|d| Frame::from_angles(n, &direction_angles(&meta, d)))
        .collect::<Result<_>>()?;
    let rows: Vec<(usize, usize)> = (0..meta.pieces)
        .flat_map(|p| (0..spec.lambda_count).map(move |k| (p, k)))
        .collect();
    let blocks: Vec<Vec<T>> = rows
        .par_iter()
        .map(|&(piece, k)| {
            let a = curve.position(piece, shell.lambda_node(piece, k));
            let mut out = Vec::with_capacity(frames.len() * meta.channels.len());
            for fr in &frames {
                for &ch in &meta.channels {
                    out.push(trt_half_frame(kind, f, &a, fr, ch, step)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    TRTDataset::from_parts(curve, meta, blocks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{great_circles_curve, planar_circle};
    use crate::linalg::dot;
    use crate::symtensor::SymTensor;
    use crate::xforms::{FnTensorField, ZeroField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump(dir: [f64; 3]) -> FnTensorField<f64> {
        FnTensorField::new(1, Ball::origin(3, 1.0).unwrap(), move |x: &[f64]| {
            let r2 = dot(x, x);
            let s = if r2 < 1.0 { (-4.0 * r2).exp() * (1.0 - r2).powi(3) } else { 0.0 };
            SymTensor::from_coeffs(1, 3, dir.iter().map(|v| v * s).collect()).unwrap()
        })
    }

    fn spec() -> DatasetSpec {
        DatasetSpec {
            lambda_count: 24,
            polar: 9,
            azimuth: 16,
            step: 2e-2,
        }
    }

    #[test]
    fn zero_field_gives_zero_dataset() {
        let curve: Arc<dyn Curve<f64>> = Arc::new(great_circles_curve(2.0).unwrap());
        let z = ZeroField::new(1, Ball::origin(3, 1.0).unwrap());
        let ds = acquire_dataset(&z, curve, DataKind::Tensor, spec()).unwrap();
        assert_eq!(ds.values().len(), 3 * 24 * 9 * 16 * 2);
        assert!(ds.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn node_values_match_direct_calls() {
        let curve: Arc<dyn Curve<f64>> = Arc::new(great_circles_curve(2.0).unwrap());
        let f = bump([0.3, -0.5, 0.8]);
        let ds = acquire_dataset(&f, curve.clone(), DataKind::Tensor, spec()).unwrap();
        for (piece, k, d, c) in [(0, 0, 0, 0), (1, 5, 77, 1), (2, 23, 143, 0), (0, 11, 60, 1)] {
            let a = curve.position(piece, ds.lambda_node(piece, k));
            let fr = Frame::from_angles(3, &ds.direction_angles(d)).unwrap();
            let direct = trt_tensor_frame(&f, &a, &fr, c, 2e-2, RaySpan::Half).unwrap();
            assert_eq!(ds.node_value(piece, k, d, c).to_bits(), direct.to_bits());
        }
    }

    #[test]
    fn half_line_relation_on_dataset_rays() {
        // T^- f(a, xi) with the negated frame equals (-1)^m T^+ f(a, -xi)
        let curve: Arc<dyn Curve<f64>> = Arc::new(great_circles_curve(2.0).unwrap());
        let f = bump([0.3, -0.5, 0.8]);
        let ds = acquire_dataset(&f, curve.clone(), DataKind::Tensor, spec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let piece = rng.gen_range(0..3);
            let k = rng.gen_range(0..24);
            let d = rng.gen_range(0..9 * 16);
            let c = rng.gen_range(0..2);
            let a = curve.position(piece, ds.lambda_node(piece, k));
            let fr = Frame::from_angles(3, &ds.direction_angles(d)).unwrap().negated();
            let minus = trt_tensor_frame(&f, &a, &fr, c, 2e-2, RaySpan::Full).unwrap()
                - trt_tensor_frame(&f, &a, &fr, c, 2e-2, RaySpan::Half).unwrap();
            worst = worst.max((minus + ds.node_value(piece, k, d, c)).abs());
        }
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn interpolation_reproduces_nodes_and_tracks_rays() {
        let curve: Arc<dyn Curve<f64>> = Arc::new(great_circles_curve(2.0).unwrap());
        let f = bump([0.0, 0.0, 1.0]);
        let ds = acquire_dataset(&f, curve.clone(), DataKind::Tensor, spec()).unwrap();
        let at = CurvePoint { piece: 1, lambda: ds.lambda_node(1, 7) };
        let d = 4 * 16 + 3;
        let u = Frame::from_angles(3, &ds.direction_angles(d)).unwrap().xi().to_vec();
        let v = ds.interpolate(at, &u, 1).unwrap();
        assert!((v - ds.node_value(1, 7, d, 1)).abs() < 1e-12);
        let fine = DatasetSpec {
            lambda_count: 48,
            polar: 33,
            azimuth: 64,
            step: 2e-2,
        };
        let ds = acquire_dataset(&f, curve.clone(), DataKind::Tensor, fine).unwrap();
        let rays = RayData::new(&f, curve.as_ref(), DataKind::Tensor, 2e-2).unwrap();
        // between nodes, aimed at the ball
        let at = CurvePoint { piece: 0, lambda: 0.37 };
        let a = curve.at(at);
        let u: Vec<f64> = crate::linalg::normalize(&a.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        let want = rays.extended(at, &u, 1).unwrap();
        let got = ds.extended(at, &u, 1).unwrap();
        assert!((want - got).abs() < 0.05 * want.abs().max(1e-3), "{want} vs {got}");
    }

    #[test]
    fn non_encompassing_curve_is_rejected() {
        let curve: Arc<dyn Curve<f64>> = Arc::new(planar_circle(&[0.0; 3], &[0.0, 0.0, 1.0], 0.5).unwrap());
        let f = bump([1.0, 0.0, 0.0]);
        assert!(matches!(
            acquire_dataset(&f, curve.clone(), DataKind::Tensor, spec()),
            Err(Error::ContractViolation(_))
        ));
        assert!(matches!(
            RayData::new(&f, curve.as_ref(), DataKind::Tensor, 1e-2),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn kind_checks() {
        assert_eq!(DataKind::Vector.channels(1, 5), vec![1, 2, 3, 4]);
        assert_eq!(DataKind::Tensor.channels(2, 3), vec![0, 1, 2]);
        assert!(DataKind::Tensor.check(1, 4).is_err());
        assert!(DataKind::Vector.check(2, 3).is_err());
    }
}
