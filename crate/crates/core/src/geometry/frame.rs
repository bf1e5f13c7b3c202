//! Hyperspherical direction frames.
//!
//! A direction `xi` in `R^n` is written with angles `phi_1..phi_{n-1}`
//! (`phi_1..phi_{n-2}` in `[0, pi]`, `phi_{n-1}` in `[0, 2 pi)`):
//!
//! ```text
//! xi_1 = sin phi_1 ... sin phi_{n-2} sin phi_{n-1}
//! xi_2 = sin phi_1 ... sin phi_{n-2} cos phi_{n-1}
//! ...
//! xi_n = cos phi_1
//! ```
//!
//! and `eta_j = (d xi / d phi_j) / (sin phi_1 ... sin phi_{j-1})`, which
//! together with `xi` is orthonormal. In `R^3`, `eta_1` and `eta_2` are the
//! `alpha` and `beta` vectors used by the transverse ray transform.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    angles: Vec<T>,
    xi: Vec<T>,
    eta: Vec<Vec<T>>,
}

impl<T: Scalar> Frame<T> {
    /// Builds the frame from hyperspherical angles (`n - 1` of them).
    pub fn from_angles(n: usize, angles: &[T]) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("frame dimension must be >= 2, got {n}")));
        }
        if angles.len() != n - 1 {
            return Err(Error::invalid(format!(
                "expected {} angles for n={n}, got {}",
                n - 1,
                angles.len()
            )));
        }
        let pi = T::PI();
        for (j, &a) in angles.iter().enumerate() {
            let ok = if j + 1 < n - 1 {
                a >= T::zero() && a <= pi
            } else {
                a >= T::zero() && a < pi + pi
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "angle phi_{} = {a} out of range",
                    j + 1
                )));
            }
        }
        let (sin, cos): (Vec<T>, Vec<T>) = angles.iter().map(|a| (a.sin(), a.cos())).unzip();
        // product of sin(phi_a..=phi_b), 1-based, empty product = 1
        let sprod = |a: usize, b: usize| (a..=b).fold(T::one(), |acc, l| acc * sin[l - 1]);
        // trailing cosine factor for component k (1-based)
        let tail = |k: usize| if k == 1 { T::one() } else { cos[n - k] };

        let xi: Vec<T> = (1..=n).map(|k| sprod(1, n - k) * tail(k)).collect();
        let eta = (1..n)
            .map(|j| {
                (1..=n)
                    .map(|k| {
                        if k + j <= n {
                            cos[j - 1] * sprod(j + 1, n - k) * tail(k)
                        } else if k == n - j + 1 {
                            -sin[j - 1]
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Frame {
            angles: angles.to_vec(),
            xi,
            eta,
        })
    }

    /// Canonical frame of a direction: `from_angles(angles_from_direction(xi))`.
    pub fn canonical(xi: &[T]) -> Result<Self> {
        let angles = angles_from_direction(xi)?;
        Self::from_angles(xi.len(), &angles)
    }

    /// Canonical frame of `xi / |xi|` for any nonzero `xi`.
    pub fn canonical_of_nonunit(xi: &[T]) -> Result<Self> {
        let n = norm(xi);
        if n == T::zero() || !n.is_finite() {
            return Err(Error::invalid("direction must be nonzero and finite"));
        }
        let u: Vec<T> = xi.iter().map(|&v| v / n).collect();
        Self::canonical(&u)
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    /// `eta_1 .. eta_{n-1}` (index 0 holds `eta_1`).
    pub fn eta(&self) -> &[Vec<T>] {
        &self.eta
    }

    /// `eta_i`, 1-based as in the frame formulas.
    pub fn eta_at(&self, i: usize) -> &[T] {
        &self.eta[i - 1]
    }

    /// `xi_alpha = eta_1`.
    pub fn alpha(&self) -> &[T] {
        &self.eta[0]
    }

    /// `xi_beta = eta_2` (requires `n >= 3`).
    pub fn beta(&self) -> &[T] {
        &self.eta[1]
    }

    /// The frame `(-xi, -eta_1, ..., -eta_{n-1})`.
    ///
    /// This is not the canonical frame of `-xi`: canonically
    /// `eta_1(-xi) = eta_1(xi)` and `eta_2(-xi) = -eta_2(xi)` away from the poles.
    pub fn negated(&self) -> Self {
        Frame {
            angles: self.angles.clone(),
            xi: self.xi.iter().map(|&v| -v).collect(),
            eta: self
                .eta
                .iter()
                .map(|e| e.iter().map(|&v| -v).collect())
                .collect(),
        }
    }

    /// Largest deviation of the Gram matrix of `{xi, eta_1, ...}` from the identity.
    pub fn gram_deviation(&self) -> T {
        let vecs: Vec<&[T]> = std::iter::once(self.xi.as_slice())
            .chain(self.eta.iter().map(|v| v.as_slice()))
            .collect();
        let mut worst = T::zero();
        for (a, u) in vecs.iter().enumerate() {
            for (b, v) in vecs.iter().enumerate() {
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max((dot(u, v) - target).abs());
            }
        }
        worst
    }
}

/// Inverts the hyperspherical parametrisation of a unit vector.
///
/// At coordinate poles, where a leading `sin phi_k` vanishes and the later
/// angles are undefined, those later angles are returned as zero.
pub fn angles_from_direction<T: Scalar>(xi: &[T]) -> Result<Vec<T>> {
    let n = xi.len();
    if n < 2 {
        return Err(Error::invalid("direction must have dimension >= 2"));
    }
    let len = norm(xi);
    if !len.is_finite() || len == T::zero() {
        return Err(Error::invalid("direction must be a nonzero finite vector"));
    }
    if (len - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid(format!("direction must be unit length, |xi| = {len}")));
    }
    let two_pi = T::PI() + T::PI();
    let mut angles = vec![T::zero(); n - 1];
    for j in 1..n - 1 {
        // rho_j = |(xi_1, .., xi_{n-j})|
        let rho = norm(&xi[..n - j]);
        angles[j - 1] = rho.atan2(xi[n - j]);
        if rho == T::zero() {
            return Ok(angles);
        }
    }
    let mut last = xi[0].atan2(xi[1]);
    if xi[0] == T::zero() && xi[1] == T::zero() {
        last = T::zero();
    }
    if last < T::zero() {
        last = last + two_pi;
    }
    if last >= two_pi {
        last = T::zero();
    }
    angles[n - 2] = last;
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn north_pole_frame() {
        let f = Frame::from_angles(3, &[0.0, 0.0]).unwrap();
        assert!(close(f.xi(), &[0.0, 0.0, 1.0], 1e-15));
        assert!(close(f.alpha(), &[0.0, 1.0, 0.0], 1e-15));
        assert!(close(f.beta(), &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn equator_frame() {
        let f = Frame::from_angles(3, &[PI / 2.0, 0.0]).unwrap();
        assert!(close(f.xi(), &[0.0, 1.0, 0.0], 1e-15));
        assert!(close(f.alpha(), &[0.0, 0.0, -1.0], 1e-15));
        assert!(close(f.beta(), &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn four_dim_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = [
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            ];
            let f = Frame::from_angles(4, &a).unwrap();
            assert!(f.gram_deviation() <= 1e-12);
        }
    }

    #[test]
    fn angles_of_axes() {
        let a = angles_from_direction(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a, vec![0.0, 0.0]);
        let a = angles_from_direction(&[1.0, 0.0, 0.0]).unwrap();
        assert!(close(&a, &[PI / 2.0, PI / 2.0], 1e-15));
        let a = angles_from_direction(&[0.0, 0.0, -1.0]).unwrap();
        assert!(close(&a, &[PI, 0.0], 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(angles_from_direction(&[0.0, 0.0, 0.0]).is_err());
        assert!(angles_from_direction(&[2.0, 0.0, 0.0]).is_err());
        assert!(Frame::from_angles(3, &[-0.1, 0.0]).is_err());
        assert!(Frame::from_angles(3, &[0.1, 2.0 * PI]).is_err());
        assert!(Frame::from_angles(3, &[0.1]).is_err());
    }

    #[test]
    fn antipodal_frame_relation() {
        let xi = [0.3, -0.4, 0.5];
        let n = norm(&xi);
        let xi: Vec<f64> = xi.iter().map(|v| v / n).collect();
        let minus: Vec<f64> = xi.iter().map(|v| -v).collect();
        let f = Frame::canonical(&xi).unwrap();
        let g = Frame::canonical(&minus).unwrap();
        assert!(close(g.alpha(), f.alpha(), 1e-14));
        let nb: Vec<f64> = f.beta().iter().map(|v| -v).collect();
        assert!(close(g.beta(), &nb, 1e-14));
    }

    #[test]
    fn f32_frames_are_orthonormal() {
        let f = Frame::<f32>::from_angles(3, &[1.0, 2.0]).unwrap();
        assert!(f.gram_deviation() < 1e-6);
    }
}
