//! Acquisition curves and hyperplane coordinates.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalize};
use crate::scalar::Scalar;
use serde::Serialize;

/// A point on a (possibly multi-piece) curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint<T> {
    pub piece: usize,
    pub lambda: T,
}

/// Parametric curve `gamma(lambda)` made of one or more C^1 pieces.
pub trait Curve<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn piece_count(&self) -> usize;

    /// Parameter interval `[a, b]` of a piece.
    fn domain(&self, piece: usize) -> (T, T);

    /// Whether `gamma(a) = gamma(b)` and the piece wraps around.
    fn periodic(&self, piece: usize) -> bool;

    fn position(&self, piece: usize, lambda: T) -> Vec<T>;

    fn derivative(&self, piece: usize, lambda: T) -> Vec<T>;

    fn at(&self, pt: CurvePoint<T>) -> Vec<T> {
        self.position(pt.piece, pt.lambda)
    }

    /// Short description used in reports.
    fn describe(&self) -> String;
}

/// `center + radius (cos(lambda) u + sin(lambda) v)` with `u`, `v` orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Circle<T> {
    pub center: Vec<T>,
    pub radius: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> Circle<T> {
    pub fn new(center: Vec<T>, radius: T, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        let n = center.len();
        if u.len() != n || v.len() != n || n < 2 {
            return Err(Error::invalid("circle vectors must share a dimension >= 2"));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::invalid(format!("circle radius must be positive, got {radius}")));
        }
        let tol = T::lit(1e-9);
        if (norm(&u) - T::one()).abs() > tol
            || (norm(&v) - T::one()).abs() > tol
            || dot(&u, &v).abs() > tol
        {
            return Err(Error::invalid("circle axes must be orthonormal"));
        }
        Ok(Circle { center, radius, u, v })
    }

    fn position(&self, lambda: T) -> Vec<T> {
        let (s, c) = lambda.sin_cos();
        (0..self.center.len())
            .map(|k| self.center[k] + self.radius * (c * self.u[k] + s * self.v[k]))
            .collect()
    }

    fn derivative(&self, lambda: T) -> Vec<T> {
        let (s, c) = lambda.sin_cos();
        (0..self.center.len())
            .map(|k| self.radius * (c * self.v[k] - s * self.u[k]))
            .collect()
    }
}

/// Union of circles, each a periodic piece on `[0, 2 pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleUnion<T> {
    circles: Vec<Circle<T>>,
    label: String,
}

impl<T: Scalar> CircleUnion<T> {
    pub fn new(circles: Vec<Circle<T>>, label: impl Into<String>) -> Result<Self> {
        let Some(first) = circles.first() else {
            return Err(Error::invalid("curve needs at least one circle"));
        };
        let n = first.center.len();
        if circles.iter().any(|c| c.center.len() != n) {
            return Err(Error::invalid("circles must share a dimension"));
        }
        Ok(CircleUnion {
            circles,
            label: label.into(),
        })
    }

    pub fn circles(&self) -> &[Circle<T>] {
        &self.circles
    }
}

impl<T: Scalar> Curve<T> for CircleUnion<T> {
    fn dim(&self) -> usize {
        self.circles[0].center.len()
    }

    fn piece_count(&self) -> usize {
        self.circles.len()
    }

    fn domain(&self, _piece: usize) -> (T, T) {
        (T::zero(), T::PI() + T::PI())
    }

    fn periodic(&self, _piece: usize) -> bool {
        true
    }

    fn position(&self, piece: usize, lambda: T) -> Vec<T> {
        self.circles[piece].position(lambda)
    }

    fn derivative(&self, piece: usize, lambda: T) -> Vec<T> {
        self.circles[piece].derivative(lambda)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Three circles of radius `r` centred at the origin, in the xy, yz and zx
/// planes (pieces 0, 1, 2). Piece 0 starts at `(r, 0, 0)`.
pub fn great_circles_curve<T: Scalar>(r: T) -> Result<CircleUnion<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::invalid(format!("curve radius must be positive, got {r}")));
    }
    let e = |k: usize| crate::linalg::unit::<T>(3, k);
    let o = vec![T::zero(); 3];
    CircleUnion::new(
        vec![
            Circle::new(o.clone(), r, e(0), e(1))?,
            Circle::new(o.clone(), r, e(1), e(2))?,
            Circle::new(o, r, e(2), e(0))?,
        ],
        format!("three-circles R={r}"),
    )
}

/// A single circle in `R^3` with the given centre, plane normal and radius.
pub fn planar_circle<T: Scalar>(center: &[T], normal: &[T], r: T) -> Result<CircleUnion<T>> {
    if center.len() != 3 || normal.len() != 3 {
        return Err(Error::invalid("planar circle is defined in R^3"));
    }
    let frame = super::Frame::canonical_of_nonunit(normal)?;
    let circle = Circle::new(center.to_vec(), r, frame.beta().to_vec(), frame.alpha().to_vec())?;
    CircleUnion::new(vec![circle], format!("circle R={r}"))
}

/// Hyperplane `H = { x : <omega, x> = p }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneCoords<T> {
    omega: Vec<T>,
    p: T,
}

impl<T: Scalar> PlaneCoords<T> {
    /// `omega` must be unit length within `1e-12` (relative to the type's precision).
    pub fn new(omega: Vec<T>, p: T) -> Result<Self> {
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if (norm(&omega) - T::one()).abs() > tol {
            return Err(Error::invalid(format!("plane normal must be unit, |omega| = {}", norm(&omega))));
        }
        if !p.is_finite() {
            return Err(Error::invalid("plane offset must be finite"));
        }
        Ok(PlaneCoords { omega, p })
    }

    /// Normalises `omega` first.
    pub fn from_normal(omega: &[T], p: T) -> Result<Self> {
        let u = normalize(omega).ok_or_else(|| Error::invalid("plane normal must be nonzero"))?;
        Self::new(u, p)
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// `<omega, x> - p`
    pub fn signed_distance(&self, x: &[T]) -> T {
        dot(&self.omega, x) - self.p
    }

    pub fn with_offset(&self, p: T) -> Self {
        PlaneCoords {
            omega: self.omega.clone(),
            p,
        }
    }
}

/// Ball `{ x : |x - center| <= radius }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn origin(n: usize, radius: T) -> Result<Self> {
        Self::new(vec![T::zero(); n], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        norm(&crate::linalg::sub(x, &self.center)) <= self.radius
    }
}
