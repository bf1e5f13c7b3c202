//! Plane-curve intersections by bracketing on a uniform parameter grid.

use super::curve::{Curve, CurvePoint, PlaneCoords};
use crate::linalg::{dot, norm, sub};
use crate::scalar::Scalar;
use serde::Serialize;

pub const DEFAULT_SAMPLES_PER_PIECE: usize = 2048;
pub const DEFAULT_BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntersectionOptions {
    pub samples_per_piece: usize,
    pub bisection_steps: usize,
}

impl Default for IntersectionOptions {
    fn default() -> Self {
        IntersectionOptions {
            samples_per_piece: DEFAULT_SAMPLES_PER_PIECE,
            bisection_steps: DEFAULT_BISECTION_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intersection<T> {
    pub at: CurvePoint<T>,
    pub point: Vec<T>,
    /// `<omega, gamma'(lambda)>`; zero at tangential contacts.
    pub slope: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intersections<T> {
    /// Transversal crossings, ordered by `(piece, lambda)`.
    pub simple: Vec<Intersection<T>>,
    /// Even-multiplicity contacts.
    pub tangential: Vec<Intersection<T>>,
    /// Pieces lying inside the plane.
    pub contained_pieces: Vec<usize>,
}

impl<T> Intersections<T> {
    pub fn is_empty(&self) -> bool {
        self.simple.is_empty() && self.tangential.is_empty() && self.contained_pieces.is_empty()
    }
}

/// Intersections with the default sampling density.
pub fn plane_curve_intersections<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    plane: &PlaneCoords<T>,
    tol: T,
) -> Intersections<T> {
    plane_curve_intersections_with(curve, plane, tol, &IntersectionOptions::default())
}

pub fn plane_curve_intersections_with<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    plane: &PlaneCoords<T>,
    tol: T,
    opts: &IntersectionOptions,
) -> Intersections<T> {
    let mut out = Intersections {
        simple: Vec::new(),
        tangential: Vec::new(),
        contained_pieces: Vec::new(),
    };
    let n = opts.samples_per_piece.max(4);
    for piece in 0..curve.piece_count() {
        let (a, b) = curve.domain(piece);
        let step = (b - a) / T::of_usize(n);
        let lam = |k: usize| a + step * T::of_usize(k);
        let h = |l: T| plane.signed_distance(&curve.position(piece, l));
        let dh = |l: T| dot(plane.omega(), &curve.derivative(piece, l));
        let hs: Vec<T> = (0..=n).map(|k| h(lam(k))).collect();
        let ds: Vec<T> = (0..=n).map(|k| dh(lam(k))).collect();
        if hs.iter().all(|v| v.abs() <= tol) {
            out.contained_pieces.push(piece);
            continue;
        }
        let periodic = curve.periodic(piece);
        let mut simple = Vec::new();
        let mut touch = Vec::new();
        for k in 0..n {
            let (h0, h1) = (hs[k], hs[k + 1]);
            if (h0 < T::zero() && h1 > T::zero()) || (h0 > T::zero() && h1 < T::zero()) {
                simple.push(bisect(&h, lam(k), lam(k + 1), h0, opts.bisection_steps));
            } else if h0 == T::zero() {
                // exact hit on a node: simple iff the neighbours straddle it
                let prev = if k > 0 {
                    Some(hs[k - 1])
                } else if periodic {
                    Some(hs[n - 1])
                } else {
                    None
                };
                match prev {
                    Some(p) if p * h1 < T::zero() => simple.push(lam(k)),
                    Some(_) => touch.push(lam(k)),
                    None => simple.push(lam(k)),
                }
            }
            let (d0, d1) = (ds[k], ds[k + 1]);
            if d0 * d1 < T::zero() {
                let l = bisect(&dh, lam(k), lam(k + 1), d0, opts.bisection_steps);
                if h(l).abs() <= tol {
                    touch.push(l);
                }
            }
        }
        if !periodic && hs[n] == T::zero() {
            simple.push(b);
        }
        let mk = |l: T| Intersection {
            at: CurvePoint { piece, lambda: l },
            point: curve.position(piece, l),
            slope: dh(l),
        };
        for l in simple {
            if h(l).abs() <= tol {
                push_unique(&mut out.simple, mk(l), tol);
            }
        }
        for l in touch {
            let cand = mk(l);
            let known = out.simple.iter().any(|s| close_points(&s.point, &cand.point, tol))
                || out
                    .tangential
                    .iter()
                    .any(|t| t.at.piece == piece && close_points(&t.point, &cand.point, tol));
            if !known {
                out.tangential.push(cand);
            }
        }
    }
    let key = |i: &Intersection<T>| (i.at.piece, i.at.lambda);
    out.simple
        .sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    out.tangential
        .sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn close_points<T: Scalar>(a: &[T], b: &[T], tol: T) -> bool {
    norm(&sub(a, b)) <= tol
}

fn push_unique<T: Scalar>(list: &mut Vec<Intersection<T>>, cand: Intersection<T>, tol: T) {
    if !list.iter().any(|e| close_points(&e.point, &cand.point, tol)) {
        list.push(cand);
    }
}

/// Root of `f` in `[lo, hi]` given `f(lo)` with a sign change across the bracket.
fn bisect<T: Scalar, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, f_lo: T, steps: usize) -> T {
    let neg_lo = f_lo < T::zero();
    let two = T::lit(2.0);
    for _ in 0..steps {
        let mid = (lo + hi) / two;
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}
