//! Line integrals and the transverse ray transform channels.

use super::field::{ScalarField, TensorField};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Frame};
use crate::linalg::{dot, norm, sub};
use crate::scalar::Scalar;
use crate::symtensor::channel_tensor;
use serde::{Deserialize, Serialize};

/// Integration range along `a + t xi`: `t >= 0` or all of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RaySpan {
    #[default]
    Half,
    Full,
}

/// Parameter interval `[t0, t1]` where the line `a + t xi` (unit `xi`) is inside the ball.
pub fn ball_chord<T: Scalar>(a: &[T], xi: &[T], ball: &Ball<T>) -> Option<(T, T)> {
    let rel = sub(a, &ball.center);
    let b = dot(&rel, xi);
    let c = dot(&rel, &rel) - ball.radius * ball.radius;
    let disc = b * b - c;
    if disc <= T::zero() {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

/// Composite trapezoid rule on `[t0, t1]` with at most `step` spacing.
pub fn integrate_segment<T: Scalar>(t0: T, t1: T, step: T, mut f: impl FnMut(T) -> T) -> T {
    if !(t1 > t0) {
        return T::zero();
    }
    let n = ((t1 - t0) / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = (t1 - t0) / T::of_usize(n);
    let mut s = (f(t0) + f(t1)) * T::lit(0.5);
    for k in 1..n {
        s = s + f(t0 + h * T::of_usize(k));
    }
    s * h
}

fn check_ray<T: Scalar>(dim: usize, a: &[T], xi: &[T], step: T) -> Result<()> {
    if a.len() != dim || xi.len() != dim {
        return Err(Error::invalid(format!("ray must live in R^{dim}")));
    }
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::invalid(format!("ray step must be positive, got {step}")));
    }
    if (norm(xi) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid("ray direction must be a unit vector"));
    }
    Ok(())
}

fn span_range<T: Scalar>(a: &[T], xi: &[T], ball: &Ball<T>, span: RaySpan) -> Option<(T, T)> {
    let (t0, t1) = ball_chord(a, xi, ball)?;
    match span {
        RaySpan::Full => Some((t0, t1)),
        RaySpan::Half => {
            if t0 < T::zero() && t1 > T::zero() {
                log::warn!("half-line ray starts inside the support ball; encompassing contract violated");
            }
            (t1 > T::zero()).then(|| (t0.max(T::zero()), t1))
        }
    }
}

/// `int g(a + t xi) dt` over the half-line (`t >= 0`) or the full line,
/// clipped to the support ball of `g`.
pub fn ray_integral<T: Scalar, F: ScalarField<T> + ?Sized>(g: &F, a: &[T], xi: &[T], step: T, span: RaySpan) -> Result<T> {
    check_ray(g.dim(), a, xi, step)?;
    let Some((t0, t1)) = span_range(a, xi, g.support(), span) else {
        return Ok(T::zero());
    };
    let mut x = a.to_vec();
    Ok(integrate_segment(t0, t1, step, |t| {
        for k in 0..x.len() {
            x[k] = a[k] + t * xi[k];
        }
        g.value(&x)
    }))
}

/// `int <f(a + t xi), w> dt` for a fixed tensor given by its weighted coefficients.
pub fn ray_pairing<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    a: &[T],
    xi: &[T],
    weighted: &[T],
    step: T,
    span: RaySpan,
) -> Result<T> {
    check_ray(f.dim(), a, xi, step)?;
    let Some((t0, t1)) = span_range(a, xi, f.support(), span) else {
        return Ok(T::zero());
    };
    let mut x = a.to_vec();
    Ok(integrate_segment(t0, t1, step, |t| {
        for k in 0..x.len() {
            x[k] = a[k] + t * xi[k];
        }
        f.pair(&x, weighted)
    }))
}

fn check_channel(i: usize, m: usize) -> Result<()> {
    if i > m {
        return Err(Error::invalid(format!("channel {i} out of range 0..={m}")));
    }
    Ok(())
}

/// Channel `i` of the TRT of an `m`-tensor field in `R^3`, using the frame
/// `(xi, xi_alpha, xi_beta)` supplied by the caller.
pub fn trt_tensor_frame<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    a: &[T],
    frame: &Frame<T>,
    i: usize,
    step: T,
    span: RaySpan,
) -> Result<T> {
    if f.dim() != 3 || frame.dim() != 3 {
        return Err(Error::invalid("tensor TRT is defined in R^3"));
    }
    let m = f.order();
    check_channel(i, m)?;
    let w = channel_tensor(frame.alpha(), frame.beta(), m, i).weighted();
    ray_pairing(f, a, frame.xi(), &w, step, span)
}

/// Channel `i` of the TRT with the canonical frame of `xi`.
pub fn trt_tensor<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    a: &[T],
    xi: &[T],
    i: usize,
    step: T,
    span: RaySpan,
) -> Result<T> {
    check_channel(i, f.order())?;
    let frame = Frame::canonical(xi)?;
    trt_tensor_frame(f, a, &frame, i, step, span)
}

/// Channel `i` (1-based, `1..n-1`) of the vectorial TRT in `R^n`: the ray
/// integral of `<f, eta_i>`.
pub fn trt_vector_frame<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    a: &[T],
    frame: &Frame<T>,
    i: usize,
    step: T,
    span: RaySpan,
) -> Result<T> {
    let n = f.dim();
    if f.order() != 1 {
        return Err(Error::invalid("vectorial TRT needs an order-1 field"));
    }
    if frame.dim() != n {
        return Err(Error::invalid("frame and field dimensions differ"));
    }
    if i == 0 || i >= n {
        return Err(Error::invalid(format!("vector channel {i} out of range 1..={}", n - 1)));
    }
    ray_pairing(f, a, frame.xi(), frame.eta_at(i), step, span)
}

pub fn trt_vector<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    a: &[T],
    xi: &[T],
    i: usize,
    step: T,
    span: RaySpan,
) -> Result<T> {
    let frame = Frame::canonical(xi)?;
    trt_vector_frame(f, a, &frame, i, step, span)
}

/// `|xi|^(m-1) T_i f(x, xi / |xi|)` for any nonzero `xi`.
pub fn trt_extended<T: Scalar, F: TensorField<T> + ?Sized>(
    f: &F,
    x: &[T],
    xi: &[T],
    i: usize,
    step: T,
    span: RaySpan,
) -> Result<T> {
    let r = norm(xi);
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::invalid("extended TRT needs a nonzero direction"));
    }
    let u: Vec<T> = xi.iter().map(|&v| v / r).collect();
    let base = trt_tensor(f, x, &u, i, step, span)?;
    Ok(base * r.powi(f.order() as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symtensor::{sym_power, SymTensor};
    use crate::xforms::{FnScalarField, FnTensorField};
    use std::f64::consts::PI;

    fn gauss(s: f64) -> FnScalarField<f64> {
        FnScalarField::new(Ball::origin(3, 6.0).unwrap(), move |x: &[f64]| (-dot(x, x) / (s * s)).exp())
    }

    #[test]
    fn gaussian_line_integral() {
        let g = gauss(0.7);
        // line at distance d from the centre: sqrt(pi) s exp(-d^2/s^2)
        let a = [0.3, -8.0, 0.2];
        let v = ray_integral(&g, &a, &[0.0, 1.0, 0.0], 1e-2, RaySpan::Half).unwrap();
        let want = PI.sqrt() * 0.7 * (-(0.13) / 0.49f64).exp();
        assert!((v - want).abs() < 1e-4);
    }

    #[test]
    fn pointing_away_gives_zero() {
        let g = gauss(0.7);
        let v = ray_integral(&g, &[0.0, 0.0, -8.0], &[0.0, 0.0, -1.0], 1e-2, RaySpan::Half).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rejects_bad_rays() {
        let g = gauss(0.7);
        assert!(ray_integral(&g, &[0.0; 3], &[0.0, 0.0, 2.0], 1e-2, RaySpan::Half).is_err());
        assert!(ray_integral(&g, &[0.0; 3], &[0.0, 0.0, 1.0], 0.0, RaySpan::Half).is_err());
    }

    #[test]
    fn chord_of_the_unit_ball() {
        let (t0, t1) = ball_chord(&[0.0, 0.0, -3.0], &[0.0, 0.0, 1.0], &Ball::origin(3, 1.0_f64).unwrap()).unwrap();
        assert!((t0 - 2.0).abs() < 1e-15 && (t1 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn second_order_convergence() {
        let g = gauss(0.5);
        let a = [0.1, 0.2, -8.0];
        let xi = [0.0, 0.0, 1.0];
        let exact = PI.sqrt() * 0.5 * (-(0.05) / 0.25f64).exp();
        // clip to a small ball so the truncated integrand has a kink at the ends
        let clipped = FnScalarField::new(Ball::origin(3, 1.0).unwrap(), |x: &[f64]| {
            if dot(x, x) <= 1.0 { 1.0 - dot(x, x) } else { 0.0 }
        });
        let e1 = (ray_integral(&g, &a, &xi, 0.2, RaySpan::Half).unwrap() - exact).abs();
        let e2 = (ray_integral(&g, &a, &xi, 0.1, RaySpan::Half).unwrap() - exact).abs();
        assert!(e2 <= e1);
        // (1 - 0.05 - t^2) over |t| < sqrt(0.95): 4/3 * 0.95^{3/2}
        let want = 4.0 / 3.0 * 0.95f64.powf(1.5);
        let c1 = (ray_integral(&clipped, &a, &xi, 0.1, RaySpan::Half).unwrap() - want).abs();
        let c2 = (ray_integral(&clipped, &a, &xi, 0.05, RaySpan::Half).unwrap() - want).abs();
        assert!(c1 / c2 >= 3.0, "{c1} {c2}");
    }

    fn constant_vector_bump(v: [f64; 3]) -> FnTensorField<f64> {
        FnTensorField::new(1, Ball::origin(3, 1.0).unwrap(), move |x: &[f64]| {
            let s = if dot(x, x) < 1.0 { 1.0 } else { 0.0 };
            SymTensor::from_coeffs(1, 3, v.iter().map(|c| c * s).collect()).unwrap()
        })
    }

    #[test]
    fn vector_channels_on_the_axis() {
        let f = constant_vector_bump([1.0, 0.0, 0.0]);
        let a = [0.0, 0.0, -3.0];
        let xi = [0.0, 0.0, 1.0];
        let c0 = trt_tensor(&f, &a, &xi, 0, 1e-3, RaySpan::Half).unwrap();
        let c1 = trt_tensor(&f, &a, &xi, 1, 1e-3, RaySpan::Half).unwrap();
        assert!((c0 - 2.0).abs() < 0.04);
        assert!(c1.abs() < 1e-12);
        assert!(trt_tensor(&f, &a, &xi, 2, 1e-3, RaySpan::Half).is_err());
    }

    #[test]
    fn extended_transform_scaling() {
        let f2 = FnTensorField::new(2, Ball::origin(3, 1.0).unwrap(), |x: &[f64]| {
            sym_power(&[1.0, 0.0, 0.0], 2).scaled((1.0 - dot(x, x)).max(0.0))
        });
        let a = [0.1, 0.0, -3.0];
        let xi = [0.0, 0.0, 1.0];
        let base = trt_tensor(&f2, &a, &xi, 0, 1e-2, RaySpan::Half).unwrap();
        let two = trt_extended(&f2, &a, &[0.0, 0.0, 2.0], 0, 1e-2, RaySpan::Half).unwrap();
        assert!((two - 2.0 * base).abs() < 1e-12);
        let f1 = constant_vector_bump([0.0, 1.0, 0.0]);
        let b1 = trt_tensor(&f1, &a, &xi, 1, 1e-2, RaySpan::Half).unwrap();
        let e1 = trt_extended(&f1, &a, &[0.0, 0.0, 2.0], 1, 1e-2, RaySpan::Half).unwrap();
        assert_eq!(b1, e1);
        assert!(trt_extended(&f1, &a, &[0.0; 3], 1, 1e-2, RaySpan::Half).is_err());
    }
}
