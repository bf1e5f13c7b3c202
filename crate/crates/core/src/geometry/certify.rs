//! Sampled certificates for the encompassing and Kirillov-Tuy conditions.

use super::curve::{Ball, Curve, CurvePoint, PlaneCoords};
use super::intersect::{plane_curve_intersections_with, Intersection, IntersectionOptions};
use crate::linalg::{dot, norm, normalize, sub};
use crate::scalar::Scalar;
use crate::symtensor::{is_generic, pairwise_margin, GENERIC_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

/// Near-uniform points on the unit sphere in `R^3` (golden-angle spiral).
pub fn fibonacci_sphere<T: Scalar>(count: usize) -> Vec<Vec<T>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            vec![T::lit(r * t.cos()), T::lit(r * t.sin()), T::lit(z)]
        })
        .collect()
}

/// Deterministic pseudo-random unit vectors in `R^n` (rejection from the cube).
pub fn random_directions<T: Scalar>(n: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            out.push(v.iter().map(|&x| T::lit(x / r)).collect());
        }
    }
    out
}

fn directions<T: Scalar>(n: usize, count: usize) -> Vec<Vec<T>> {
    if n == 3 {
        fibonacci_sphere(count)
    } else {
        random_directions(n, count, 0x5eed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncompassWitness<T> {
    pub at: CurvePoint<T>,
    pub point: Vec<T>,
    /// Direction whose two half-lines both meet the ball; absent when the curve
    /// point itself lies in the ball.
    pub direction: Option<Vec<T>>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncompassReport<T> {
    pub encompasses: bool,
    pub witness: Option<EncompassWitness<T>>,
}

/// Checks `gamma` misses the ball and that no sampled line through a curve
/// point meets the ball on both half-lines.
///
/// `samples` curve points per piece are tested against `samples` directions.
pub fn encompasses<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    ball: &Ball<T>,
    samples: usize,
) -> EncompassReport<T> {
    let samples = samples.max(2);
    let dirs = directions::<T>(curve.dim(), samples);
    for piece in 0..curve.piece_count() {
        let (a, b) = curve.domain(piece);
        let step = (b - a) / T::of_usize(samples);
        for k in 0..=samples {
            let lambda = a + step * T::of_usize(k);
            let x = curve.position(piece, lambda);
            let at = CurvePoint { piece, lambda };
            let rel = sub(&ball.center, &x);
            let dist = norm(&rel);
            if dist <= ball.radius {
                return EncompassReport {
                    encompasses: false,
                    witness: Some(EncompassWitness {
                        at,
                        point: x,
                        direction: None,
                        reason: format!("curve point at distance {dist} from the centre lies in the ball"),
                    }),
                };
            }
            for xi in &dirs {
                // closest approach of the line x + t xi to the centre
                let t = dot(&rel, xi);
                let miss = (dist * dist - t * t).max(T::zero()).sqrt();
                if miss > ball.radius {
                    continue;
                }
                let half = (ball.radius * ball.radius - miss * miss).sqrt();
                // chord is [t - half, t + half]; both half-lines hit iff it straddles 0
                if t - half <= T::zero() && t + half >= T::zero() {
                    return EncompassReport {
                        encompasses: false,
                        witness: Some(EncompassWitness {
                            at,
                            point: x,
                            direction: Some(xi.clone()),
                            reason: "both half-lines meet the ball".into(),
                        }),
                    };
                }
            }
        }
    }
    EncompassReport {
        encompasses: true,
        witness: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KTFailure {
    pub omega: Vec<f64>,
    pub p: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KTReport {
    pub curve: String,
    pub order: usize,
    /// Number of points selected per plane (`m + 1`, or 2 for `m = 1`).
    pub points_required: usize,
    pub planes_sampled: usize,
    pub failures: Vec<KTFailure>,
    /// Smallest pairwise margin of the view directions over all sampled
    /// planes and points.
    pub min_margin: f64,
    /// Largest displacement of a selected point between neighbouring parallel planes.
    pub max_jump: f64,
}

impl KTReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for KTReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "curve = {}", self.curve)?;
        writeln!(f, "order = {}", self.order)?;
        writeln!(f, "points_required = {}", self.points_required)?;
        writeln!(f, "planes_sampled = {}", self.planes_sampled)?;
        writeln!(f, "failures = {}", self.failures.len())?;
        writeln!(f, "min_margin = {:.6e}", self.min_margin)?;
        writeln!(f, "max_jump = {:.6e}", self.max_jump)?;
        writeln!(f, "status = {}", if self.passed() { "pass" } else { "fail" })?;
        for fl in &self.failures {
            writeln!(
                f,
                "failure omega = ({}) p = {:.6} reason = {}",
                fl.omega.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "),
                fl.p,
                fl.reason
            )?;
        }
        Ok(())
    }
}

/// Options for [`kirillov_tuy_report`] beyond the required arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTOptions {
    pub intersections: IntersectionOptions,
    /// Root tolerance for plane-curve intersections.
    pub root_tol: f64,
    /// Minimum `|<omega, gamma'>|` for a usable intersection.
    pub slope_tol: f64,
}

impl Default for KTOptions {
    fn default() -> Self {
        KTOptions {
            intersections: IntersectionOptions::default(),
            root_tol: 1e-10,
            slope_tol: 1e-8,
        }
    }
}

/// Sampled points of the disc `H_{omega,p} cap B`.
pub fn plane_disc_points<T: Scalar>(ball: &Ball<T>, plane: &PlaneCoords<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let n = ball.dim();
    let d = plane.signed_distance(&ball.center);
    let rad2 = ball.radius * ball.radius - d * d;
    if rad2 <= T::zero() {
        return Vec::new();
    }
    let rad = rad2.sqrt();
    let foot: Vec<T> = (0..n).map(|k| ball.center[k] - d * plane.omega()[k]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let w = crate::linalg::axpy(&v, -dot(&v, plane.omega()), plane.omega());
        let r = norm(&w);
        if r > T::one() || r < T::lit(1e-6) {
            continue;
        }
        // w is uniform in the unit (n-1)-ball of the plane; stay strictly inside
        let s = T::lit(0.999) * rad;
        out.push((0..n).map(|k| foot[k] + s * w[k]).collect());
    }
    out
}

/// Greedy selection of `count` intersection points in `(piece, lambda)` order
/// whose view directions from every sampled `x` are generic.
pub fn select_points<'a, T: Scalar>(
    candidates: &'a [Intersection<T>],
    xs: &[Vec<T>],
    count: usize,
) -> Vec<&'a Intersection<T>> {
    let tol = T::lit(GENERIC_TOL);
    let mut chosen: Vec<&Intersection<T>> = Vec::new();
    for cand in candidates {
        if chosen.len() == count {
            break;
        }
        let ok = xs.iter().all(|x| {
            let dirs: Vec<Vec<T>> = chosen
                .iter()
                .chain(std::iter::once(&cand))
                .map(|c| sub(x, &c.point))
                .collect();
            let refs: Vec<&[T]> = dirs.iter().map(|d| d.as_slice()).collect();
            pairwise_margin(&refs) > tol
        });
        if ok {
            chosen.push(cand);
        }
    }
    chosen
}

/// Samples planes meeting the ball on a direction x offset lattice and checks
/// that each meets the curve in enough points with generic view directions.
///
/// For `m = 1` two points are required (the modified condition); otherwise
/// `m + 1`.
pub fn kirillov_tuy_report<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    ball: &Ball<T>,
    m: usize,
    plane_samples: usize,
    point_samples: usize,
) -> KTReport {
    kirillov_tuy_report_with(curve, ball, m, plane_samples, point_samples, &KTOptions::default())
}

pub fn kirillov_tuy_report_with<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    ball: &Ball<T>,
    m: usize,
    plane_samples: usize,
    point_samples: usize,
    opts: &KTOptions,
) -> KTReport {
    let required = if m <= 1 { 2 } else { m + 1 };
    let n_p = ((plane_samples.max(1) as f64).sqrt().ceil() as usize).max(2);
    let n_omega = plane_samples.max(1).div_ceil(n_p);
    let omegas = directions::<T>(curve.dim(), n_omega);
    let mut report = KTReport {
        curve: curve.describe(),
        order: m,
        points_required: required,
        planes_sampled: 0,
        failures: Vec::new(),
        min_margin: 1.0,
        max_jump: 0.0,
    };
    let root_tol = T::lit(opts.root_tol);
    let slope_tol = T::lit(opts.slope_tol);
    for (oi, omega) in omegas.iter().enumerate() {
        let c0 = dot(omega, &ball.center);
        let mut previous: Option<Vec<Vec<T>>> = None;
        for pi in 0..n_p {
            // offsets strictly inside (-r, r) around the centre
            let frac = T::lit((2.0 * pi as f64 + 1.0) / n_p as f64 - 1.0);
            let p = c0 + frac * ball.radius;
            let Ok(plane) = PlaneCoords::new(omega.clone(), p) else {
                continue;
            };
            report.planes_sampled += 1;
            let fail = |reason: String| KTFailure {
                omega: omega.iter().map(|v| v.as_f64()).collect(),
                p: p.as_f64(),
                reason,
            };
            let hits = plane_curve_intersections_with(curve, &plane, root_tol, &opts.intersections);
            let usable: Vec<Intersection<T>> = hits
                .simple
                .into_iter()
                .filter(|i| i.slope.abs() > slope_tol)
                .collect();
            if usable.len() < required {
                report.failures.push(fail(format!(
                    "only {} transversal intersection points, need {required}",
                    usable.len()
                )));
                previous = None;
                continue;
            }
            let seed = (oi * 7919 + pi) as u64;
            let xs = plane_disc_points(ball, &plane, point_samples.max(1), seed);
            let chosen = select_points(&usable, &xs, required);
            if chosen.len() < required {
                report.failures.push(fail(format!(
                    "no {required} intersection points with generic view directions"
                )));
                previous = None;
                continue;
            }
            let mut plane_ok = true;
            for x in &xs {
                let dirs: Vec<Vec<T>> = chosen.iter().map(|c| sub(x, &c.point)).collect();
                let refs: Vec<&[T]> = dirs.iter().map(|d| d.as_slice()).collect();
                report.min_margin = report.min_margin.min(pairwise_margin(&refs).as_f64());
                if !is_generic(&refs, required - 1, T::lit(GENERIC_TOL)).unwrap_or(false) {
                    plane_ok = false;
                }
            }
            if !plane_ok {
                report.failures.push(fail("view directions not generic at a sampled point".into()));
            }
            let points: Vec<Vec<T>> = chosen.iter().map(|c| c.point.clone()).collect();
            if let Some(prev) = &previous {
                for (a, b) in prev.iter().zip(&points) {
                    report.max_jump = report.max_jump.max(norm(&sub(a, b)).as_f64());
                }
            }
            previous = Some(points);
        }
    }
    report
}

/// Unit vector from a curve point towards `x`.
pub fn view_direction<T: Scalar>(x: &[T], source: &[T]) -> Option<Vec<T>> {
    normalize(&sub(x, source))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{great_circles_curve, planar_circle};

    #[test]
    fn fibonacci_points_are_unit() {
        for v in fibonacci_sphere::<f64>(100) {
            assert!((norm(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_circles_encompass_unit_ball() {
        let c = great_circles_curve(2.0_f64).unwrap();
        let b = Ball::origin(3, 1.0).unwrap();
        let r = encompasses(&c, &b, 64);
        assert!(r.encompasses, "{:?}", r.witness);
    }

    #[test]
    fn curve_through_ball_fails_with_witness() {
        let c = planar_circle(&[0.0_f64, 0.0, 0.0], &[0.0, 0.0, 1.0], 0.5).unwrap();
        let b = Ball::origin(3, 1.0).unwrap();
        let r = encompasses(&c, &b, 32);
        assert!(!r.encompasses);
        let w = r.witness.unwrap();
        assert!(w.direction.is_none());
        assert!(norm(&w.point) <= 1.0);
    }

    #[test]
    fn modified_condition_holds_for_three_circles() {
        let c = great_circles_curve(2.0_f64).unwrap();
        let b = Ball::origin(3, 1.0).unwrap();
        let r = kirillov_tuy_report(&c, &b, 1, 64, 16);
        assert!(r.passed(), "{r}");
        assert!(r.min_margin > 0.0);
        assert_eq!(r.planes_sampled, 64);
    }

    #[test]
    fn planar_circle_fails_for_parallel_planes() {
        let c = planar_circle(&[0.0_f64, 0.0, 0.0], &[0.0, 0.0, 1.0], 2.0).unwrap();
        let b = Ball::origin(3, 1.0).unwrap();
        let r = kirillov_tuy_report(&c, &b, 1, 100, 4);
        assert!(!r.passed());
        // the most polar sampled normals are nearly parallel to the circle's axis
        assert!(r.failures.iter().any(|f| f.omega[2].abs() > 0.85));
        assert!(r.to_string().contains("status = fail"));
    }
}
