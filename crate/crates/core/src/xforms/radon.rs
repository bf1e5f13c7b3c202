//! Plane integrals, sinograms and the odd-dimensional Radon inversion.

use super::field::ScalarField;
use super::grid::{axis_weights, Interp};
use super::quadrature::{uniform_derivative, SphereGrid};
use crate::error::{Error, Result};
use crate::geometry::{Frame, PlaneCoords};
use crate::linalg::dot;
use crate::scalar::Scalar;
use rayon::prelude::*;

/// `int_{H_{omega,p}} g ds` by the trapezoid rule on a `resolution^(n-1)`
/// grid covering the disc `H cap B` of the support ball.
pub fn radon_forward<T: Scalar, F: ScalarField<T> + ?Sized>(g: &F, plane: &PlaneCoords<T>, resolution: usize) -> T {
    let ball = g.support();
    let n = g.dim();
    let d = plane.signed_distance(&ball.center);
    let rad2 = ball.radius * ball.radius - d * d;
    if rad2 <= T::zero() || resolution < 2 {
        return T::zero();
    }
    let rho = rad2.sqrt();
    let Ok(frame) = Frame::canonical(plane.omega()) else {
        return T::zero();
    };
    let foot: Vec<T> = (0..n).map(|k| ball.center[k] - d * plane.omega()[k]).collect();
    let h = (rho + rho) / T::of_usize(resolution - 1);
    let coord = |i: usize| -rho + h * T::of_usize(i);
    let dims = n - 1;
    let total = resolution.pow(dims as u32);
    let mut x = vec![T::zero(); n];
    let mut idx = vec![0usize; dims];
    let mut sum = T::zero();
    for _ in 0..total {
        let mut w = T::one();
        let mut r2 = T::zero();
        x.copy_from_slice(&foot);
        for (a, &i) in idx.iter().enumerate() {
            let c = coord(i);
            r2 = r2 + c * c;
            if i == 0 || i == resolution - 1 {
                w = w * T::lit(0.5);
            }
            let e = frame.eta_at(a + 1);
            for k in 0..n {
                x[k] = x[k] + c * e[k];
            }
        }
        if r2 <= rad2 {
            sum = sum + w * g.value(&x);
        }
        for a in 0..dims {
            idx[a] += 1;
            if idx[a] < resolution {
                break;
            }
            idx[a] = 0;
        }
    }
    sum * h.powi(dims as i32)
}

/// `np` equispaced offsets covering `[-extent, extent]`.
pub fn uniform_offsets<T: Scalar>(extent: T, np: usize) -> Vec<T> {
    let h = (extent + extent) / T::of_usize(np - 1);
    (0..np).map(|k| -extent + h * T::of_usize(k)).collect()
}

/// Sampled function of `(omega, p)` on a sphere grid times a uniform offset grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T> {
    grid: SphereGrid<T>,
    offsets: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Sinogram<T> {
    /// `values[d * offsets.len() + k]` belongs to direction `d`, offset `k`.
    pub fn new(grid: SphereGrid<T>, offsets: Vec<T>, values: Vec<T>) -> Result<Self> {
        if offsets.len() < 5 {
            return Err(Error::invalid("sinogram needs at least 5 offsets"));
        }
        if values.len() != grid.len() * offsets.len() {
            return Err(Error::invalid(format!(
                "sinogram needs {} values, got {}",
                grid.len() * offsets.len(),
                values.len()
            )));
        }
        let h = offsets[1] - offsets[0];
        let uniform = offsets
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= T::lit(1e-9) * (T::one() + h.abs()));
        if !(h > T::zero()) || !uniform {
            return Err(Error::invalid("sinogram offsets must be increasing and equispaced"));
        }
        Ok(Sinogram { grid, offsets, values })
    }

    /// Tabulates `f(omega, p)` in parallel over directions.
    pub fn from_fn<F>(grid: SphereGrid<T>, offsets: Vec<T>, f: F) -> Result<Self>
    where
        F: Fn(&[T], T) -> T + Sync,
    {
        let rows: Vec<Vec<T>> = grid
            .directions()
            .par_iter()
            .map(|w| offsets.iter().map(|&p| f(w, p)).collect())
            .collect();
        Self::new(grid, offsets, rows.concat())
    }

    pub fn grid(&self) -> &SphereGrid<T> {
        &self.grid
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, d: usize) -> &[T] {
        let np = self.offsets.len();
        &self.values[d * np..(d + 1) * np]
    }

    pub fn spacing(&self) -> T {
        self.offsets[1] - self.offsets[0]
    }

    /// Cubic interpolation of row `d` at offset `p`; `None` outside the offset range.
    pub fn interpolate(&self, d: usize, p: T) -> Option<T> {
        interpolate_row(self.row(d), self.offsets[0], self.spacing(), p)
    }
}

fn interpolate_row<T: Scalar>(row: &[T], p0: T, h: T, p: T) -> Option<T> {
    let last = p0 + h * T::of_usize(row.len() - 1);
    let slack = h * T::lit(1e-9);
    if p < p0 - slack || p > last + slack {
        return None;
    }
    let p = p.max(p0).min(last);
    Some(
        axis_weights(p, p0, h, row.len(), Interp::Cubic)
            .into_iter()
            .map(|(i, w)| w * row[i])
            .sum(),
    )
}

/// Radon sinogram of `g` with `resolution^(n-1)` quadrature nodes per plane.
pub fn radon_sinogram<T: Scalar, F: ScalarField<T> + ?Sized>(
    g: &F,
    grid: SphereGrid<T>,
    offsets: Vec<T>,
    resolution: usize,
) -> Result<Sinogram<T>> {
    if grid.dim() != g.dim() {
        return Err(Error::invalid("sphere grid and field dimensions differ"));
    }
    Sinogram::from_fn(grid, offsets, |w, p| match PlaneCoords::new(w.to_vec(), p) {
        Ok(h) => radon_forward(g, &h, resolution),
        Err(_) => T::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InversionOptions {
    /// Accuracy order of the finite-difference stencil in `p`.
    pub accuracy: usize,
    /// Gaussian smoothing (width one sample) of the differentiated rows.
    pub smooth: bool,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            accuracy: 4,
            smooth: false,
        }
    }
}

/// `int_{S^{n-1}} d^order/dp^order s(omega, <x, omega>) d omega` with the
/// derivative table precomputed once.
#[derive(Debug, Clone)]
pub struct Backprojector<T> {
    grid: SphereGrid<T>,
    p0: T,
    h: T,
    np: usize,
    table: Vec<T>,
}

impl<T: Scalar> Backprojector<T> {
    pub fn new(s: &Sinogram<T>, order: usize, opts: InversionOptions) -> Self {
        let h = s.spacing();
        let np = s.offsets().len();
        let table: Vec<T> = (0..s.grid().len())
            .flat_map(|d| {
                let row = uniform_derivative(s.row(d), h, order, opts.accuracy.max(2));
                if opts.smooth {
                    smooth_row(&row)
                } else {
                    row
                }
            })
            .collect();
        Backprojector {
            grid: s.grid().clone(),
            p0: s.offsets()[0],
            h,
            np,
            table,
        }
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.grid.dim() {
            return Err(Error::invalid("point dimension differs from the sinogram"));
        }
        let mut sum = T::zero();
        for (d, (w, wt)) in self.grid.directions().iter().zip(self.grid.weights()).enumerate() {
            let p = dot(x, w);
            let row = &self.table[d * self.np..(d + 1) * self.np];
            let v = interpolate_row(row, self.p0, self.h, p).ok_or_else(|| {
                Error::OutOfDomain(format!("offset {p} outside the sinogram range"))
            })?;
            sum = sum + *wt * v;
        }
        Ok(sum)
    }
}

fn smooth_row<T: Scalar>(row: &[T]) -> Vec<T> {
    let k: Vec<T> = (-3i32..=3).map(|j| T::lit((-(j * j) as f64 / 2.0).exp())).collect();
    (0..row.len())
        .map(|i| {
            let mut s = T::zero();
            let mut wsum = T::zero();
            for (o, &w) in (-3i32..=3).zip(&k) {
                let j = i as i32 + o;
                if j >= 0 && (j as usize) < row.len() {
                    s = s + w * row[j as usize];
                    wsum = wsum + w;
                }
            }
            s / wsum
        })
        .collect()
}

/// `(1/2) (-1)^((n-1)/2) / (2 pi)^(n-1)`; equals `-1/(8 pi^2)` for `n = 3`.
pub fn inversion_constant(n: usize) -> f64 {
    let sign = if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    0.5 * sign / (2.0 * std::f64::consts::PI).powi(n as i32 - 1)
}

/// Odd-dimensional Radon inversion prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RadonInverse<T> {
    constant: T,
    back: Backprojector<T>,
}

impl<T: Scalar> RadonInverse<T> {
    pub fn new(s: &Sinogram<T>, opts: InversionOptions) -> Result<Self> {
        let n = s.grid().dim();
        if n % 2 == 0 {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(RadonInverse {
            constant: T::lit(inversion_constant(n)),
            back: Backprojector::new(s, n - 1, opts),
        })
    }

    pub fn at(&self, x: &[T]) -> Result<T> {
        Ok(self.constant * self.back.eval(x)?)
    }
}

/// `g(x) = c_n int_{S^{n-1}} d^{n-1}/dp^{n-1} g^(omega, <x, omega>) d omega` for odd `n`.
pub fn radon_invert_odd<T: Scalar>(s: &Sinogram<T>, x: &[T]) -> Result<T> {
    RadonInverse::new(s, InversionOptions::default())?.at(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::xforms::FnScalarField;
    use std::f64::consts::PI;

    fn gaussian() -> FnScalarField<f64> {
        FnScalarField::new(Ball::origin(3, 5.0).unwrap(), |x: &[f64]| (-dot(x, x)).exp())
    }

    #[test]
    fn gaussian_plane_integral() {
        let g = gaussian();
        for p in [0.0, 0.5, 1.3] {
            let h = PlaneCoords::from_normal(&[0.2, -0.3, 0.9], p).unwrap();
            let v = radon_forward(&g, &h, 64);
            let want = PI * (-p * p as f64).exp();
            assert!((v - want).abs() / want < 1e-3, "p={p}: {v} vs {want}");
        }
    }

    #[test]
    fn disc_area() {
        let b = Ball::origin(3, 1.0).unwrap();
        let ind = FnScalarField::new(b, |x: &[f64]| if dot(x, x) <= 1.0 { 1.0 } else { 0.0 });
        let h = PlaneCoords::from_normal(&[1.0, 1.0, 0.0], 0.4).unwrap();
        let v = radon_forward(&ind, &h, 400);
        let want = PI * (1.0 - 0.16);
        assert!((v - want).abs() / want < 0.01);
        let far = PlaneCoords::from_normal(&[1.0, 1.0, 0.0], 1.5).unwrap();
        assert_eq!(radon_forward(&ind, &far, 50), 0.0);
    }

    #[test]
    fn inversion_of_analytic_gaussian_sinogram() {
        let grid = SphereGrid::product(3, 10, 59).unwrap();
        assert_eq!(grid.len(), 590);
        let s = Sinogram::from_fn(grid, uniform_offsets(5.0, 128), |_w, p: f64| PI * (-p * p).exp()).unwrap();
        let v = radon_invert_odd(&s, &[0.0, 0.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn zero_sinogram_inverts_to_zero() {
        let grid = SphereGrid::product(3, 4, 8).unwrap();
        let s = Sinogram::from_fn(grid, uniform_offsets(2.0, 16), |_w, _p| 0.0).unwrap();
        assert_eq!(radon_invert_odd(&s, &[0.1, 0.2, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn even_dimension_is_rejected() {
        let grid = SphereGrid::product(2, 1, 16).unwrap();
        let s = Sinogram::from_fn(grid, uniform_offsets(2.0, 16), |_w, _p| 0.0).unwrap();
        assert!(matches!(radon_invert_odd(&s, &[0.0, 0.0]), Err(Error::UnsupportedDimension(2))));
    }

    #[test]
    fn out_of_range_point() {
        let grid = SphereGrid::product(3, 4, 8).unwrap();
        let s = Sinogram::from_fn(grid, uniform_offsets(1.0, 16), |_w, _p| 0.0).unwrap();
        assert!(matches!(radon_invert_odd(&s, &[3.0, 0.0, 0.0]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn constants() {
        assert!((inversion_constant(3) + 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
        assert!(inversion_constant(5) > 0.0);
    }
}
