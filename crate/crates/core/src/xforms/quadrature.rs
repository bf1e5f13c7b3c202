//! Quadrature rules: Gauss-Legendre, product grids on spheres, and
//! finite-difference weights on arbitrary stencils.

use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::scalar::Scalar;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 1..=n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p2) / k as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Weights `c_k` with `f^(order)(x0) ~ sum_k c_k f(nodes[k])` (Fornberg).
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "stencil needs more than `order` nodes");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// `order`-th derivative of uniformly spaced samples at every node, on a
/// stencil of `order + accuracy` points: centred in the interior, shifted
/// one-sided near the ends.
pub fn uniform_derivative<T: Scalar>(values: &[T], spacing: T, order: usize, accuracy: usize) -> Vec<T> {
    let n = values.len();
    if order == 0 {
        return values.to_vec();
    }
    let mut width = order + accuracy;
    if width % 2 == 0 {
        width += 1;
    }
    let width = width.min(n);
    let half = width / 2;
    let scale = T::one() / spacing.powi(order as i32);
    let mut out = Vec::with_capacity(n);
    let mut cache: Vec<Option<Vec<T>>> = vec![None; width];
    for i in 0..n {
        let start = i.saturating_sub(half).min(n - width);
        let off = i - start;
        let w = cache[off].get_or_insert_with(|| {
            let nodes: Vec<f64> = (0..width).map(|k| k as f64).collect();
            fd_weights(off as f64, &nodes, order).into_iter().map(T::lit).collect()
        });
        let s: T = (0..width).map(|k| w[k] * values[start + k]).sum();
        out.push(s * scale);
    }
    out
}

/// `|S^{n-1}|`, the surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2), by recursion |S^{n+1}| = 2 pi/n |S^{n-1}|
    let mut area = if n % 2 == 0 { 2.0 * std::f64::consts::PI } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        area *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    area
}

/// Product quadrature on `S^{n-1}` in hyperspherical angles: Gauss-Legendre
/// in each polar angle (in `cos phi` where the measure is `sin phi dphi`),
/// uniform trapezoid in the azimuth `phi_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid<T> {
    dim: usize,
    polar: usize,
    azimuth: usize,
    directions: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> SphereGrid<T> {
    /// `polar` nodes for each of `phi_1..phi_{n-2}`, `azimuth` nodes for `phi_{n-1}`.
    pub fn product(n: usize, polar: usize, azimuth: usize) -> Result<Self> {
        Self::product_shifted(n, polar, azimuth, 0.0)
    }

    /// As [`SphereGrid::product`], with the azimuth nodes rotated by `shift`
    /// radians.
    pub fn product_shifted(n: usize, polar: usize, azimuth: usize, shift: f64) -> Result<Self> {
        if n < 2 || polar == 0 || azimuth == 0 {
            return Err(Error::invalid("sphere grid needs n >= 2 and nonzero node counts"));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        // nodes per polar angle: (angle, weight)
        let polar_rules: Vec<Vec<(f64, f64)>> = (1..n - 1)
            .map(|k| {
                let (x, w) = gauss_legendre(polar);
                let expo = n - 1 - k;
                if expo == 1 {
                    // integrate sin(phi) dphi as d(cos phi)
                    x.iter().zip(&w).map(|(&c, &wt)| (c.acos(), wt)).rev().collect()
                } else {
                    let half = std::f64::consts::FRAC_PI_2;
                    x.iter()
                        .zip(&w)
                        .map(|(&t, &wt)| {
                            let phi = half * (t + 1.0);
                            (phi, wt * half * phi.sin().powi(expo as i32))
                        })
                        .collect()
                }
            })
            .collect();
        let az: Vec<(f64, f64)> = (0..azimuth)
            .map(|k| {
                let a = (shift + two_pi * k as f64 / azimuth as f64).rem_euclid(two_pi);
                (a, two_pi / azimuth as f64)
            })
            .collect();
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; n.saturating_sub(2)];
        loop {
            let mut angles: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| polar_rules[k][i].0).collect();
            let wpolar: f64 = idx.iter().enumerate().map(|(k, &i)| polar_rules[k][i].1).product();
            for &(a, wa) in &az {
                angles.push(a);
                let ang: Vec<T> = angles.iter().map(|&v| T::lit(v)).collect();
                let fr = Frame::from_angles(n, &ang)?;
                directions.push(fr.xi().to_vec());
                weights.push(T::lit(wpolar * wa));
                angles.pop();
            }
            // odometer over polar indices
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(SphereGrid {
                        dim: n,
                        polar,
                        azimuth,
                        directions,
                        weights,
                    });
                }
                idx[k] += 1;
                if idx[k] < polar {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Grid with roughly `count` nodes and twice as many azimuth as polar nodes (n = 3).
    pub fn with_nodes(count: usize) -> Result<Self> {
        let polar = ((count as f64 / 2.0).sqrt().round() as usize).max(1);
        Self::product(3, polar, 2 * polar)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polar_nodes(&self) -> usize {
        self.polar
    }

    pub fn azimuth_nodes(&self) -> usize {
        self.azimuth
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec<T>] {
        &self.directions
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }
}
