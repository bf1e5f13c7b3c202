//! Smooth, compactly supported tensor phantoms.

use crate::error::{Error, Result};
use crate::geometry::Ball;
use crate::linalg::{dot, sub};
use crate::scalar::Scalar;
use crate::symtensor::{sym_dim, SymTensor};
use crate::xforms::{GridGeometry, Interp, TensorField, TensorGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    GaussianBump,
    PolynomialBump,
    MultiBump,
}

/// One Gaussian bump `exp(-|x - c|^2 / w^2) F`, optionally modulated by
/// `1 + <g, x - c>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    /// Stored coefficients of the constant tensor `F`.
    pub tensor: Vec<f64>,
    #[serde(default)]
    pub gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub order: usize,
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Explicit bumps; generated from `seed` when empty.
    #[serde(default)]
    pub bumps: Vec<Bump>,
    #[serde(default)]
    pub seed: u64,
}

impl PhantomSpec {
    /// Single bump of width `0.35 r` at the ball centre with a seeded tensor.
    pub fn gaussian(order: usize, dim: usize, radius: f64, seed: u64) -> Self {
        PhantomSpec {
            kind: PhantomKind::GaussianBump,
            order,
            dim,
            center: vec![0.0; dim],
            radius,
            bumps: Vec::new(),
            seed,
        }
    }

    /// Bumps to sample: the explicit list, or a seeded one for the kind.
    pub fn resolved_bumps(&self) -> Vec<Bump> {
        if !self.bumps.is_empty() {
            return self.bumps.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let nu = sym_dim(self.order, self.dim);
        let r = self.radius;
        let tensor = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        match self.kind {
            PhantomKind::GaussianBump => vec![Bump {
                center: self.center.clone(),
                width: 0.35 * r,
                tensor: tensor(&mut rng),
                gradient: None,
            }],
            PhantomKind::PolynomialBump => {
                let t = tensor(&mut rng);
                let g = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0) / r).collect();
                vec![Bump {
                    center: self.center.clone(),
                    width: 0.45 * r,
                    tensor: t,
                    gradient: Some(g),
                }]
            }
            PhantomKind::MultiBump => (0..3)
                .map(|_| {
                    let offset: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-0.35..0.35) * r).collect();
                    Bump {
                        center: self.center.iter().zip(&offset).map(|(c, o)| c + o).collect(),
                        width: rng.gen_range(0.15..0.3) * r,
                        tensor: tensor(&mut rng),
                        gradient: None,
                    }
                })
                .collect(),
        }
    }
}

/// Analytic phantom `sum_b exp(-|x - c_b|^2 / w_b^2) (1 + <g_b, x - c_b>) chi(x) F_b`
/// with the cutoff `chi(x) = exp(1 - 1 / (1 - s^2))`, `s = |x - c| / r`.
#[derive(Debug, Clone)]
pub struct Phantom<T: Scalar> {
    spec: PhantomSpec,
    support: Ball<T>,
    bumps: Vec<(Vec<T>, T, Vec<T>, Option<Vec<T>>)>,
}

impl<T: Scalar> Phantom<T> {
    pub fn new(spec: &PhantomSpec) -> Result<Self> {
        if spec.dim < 2 || spec.center.len() != spec.dim {
            return Err(Error::invalid("phantom centre must have `dim >= 2` coordinates"));
        }
        let support = Ball::new(spec.center.iter().map(|&v| T::lit(v)).collect(), T::lit(spec.radius))?;
        let nu = sym_dim(spec.order, spec.dim);
        let mut bumps = Vec::new();
        for (k, b) in spec.resolved_bumps().iter().enumerate() {
            if b.center.len() != spec.dim || b.tensor.len() != nu {
                return Err(Error::invalid(format!(
                    "bump {k}: need a {}-point centre and {nu} tensor coefficients",
                    spec.dim
                )));
            }
            let off = sub(&b.center, &spec.center);
            if dot(&off, &off).sqrt() >= spec.radius {
                return Err(Error::invalid(format!("bump {k} centre lies outside the support ball")));
            }
            if !(b.width > 0.0) {
                return Err(Error::invalid(format!("bump {k} width must be positive")));
            }
            if let Some(g) = &b.gradient {
                if g.len() != spec.dim {
                    return Err(Error::invalid(format!("bump {k} gradient must have {} entries", spec.dim)));
                }
            }
            let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
            bumps.push((lit(&b.center), T::lit(b.width), lit(&b.tensor), b.gradient.as_deref().map(lit)));
        }
        Ok(Phantom {
            spec: spec.clone(),
            support,
            bumps,
        })
    }

    pub fn spec(&self) -> &PhantomSpec {
        &self.spec
    }

    /// The smooth cutoff at `x`.
    pub fn cutoff(&self, x: &[T]) -> T {
        let r = self.support.radius;
        let d = sub(x, &self.support.center);
        let s2 = dot(&d, &d) / (r * r);
        if s2 >= T::one() {
            return T::zero();
        }
        (T::one() - T::one() / (T::one() - s2)).exp()
    }
}

impl<T: Scalar> TensorField<T> for Phantom<T> {
    fn order(&self) -> usize {
        self.spec.order
    }

    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn value(&self, x: &[T]) -> SymTensor<T> {
        let (m, n) = (self.spec.order, self.spec.dim);
        let mut out = SymTensor::zeros(m, n);
        let chi = self.cutoff(x);
        if chi == T::zero() {
            return out;
        }
        for (c, w, f, g) in &self.bumps {
            let d = sub(x, c);
            let mut s = (-dot(&d, &d) / (*w * *w)).exp() * chi;
            if let Some(g) = g {
                s = s * (T::one() + dot(g, &d));
            }
            for (o, &v) in out.coeffs_mut().iter_mut().zip(f) {
                *o = *o + s * v;
            }
        }
        out
    }

    fn support(&self) -> &Ball<T> {
        &self.support
    }
}

/// Samples the phantom on `samples^n` nodes of the cube of half-width
/// `1.1 r` around the support centre.
pub fn make_phantom<T: Scalar>(spec: &PhantomSpec, samples: usize, interp: Interp) -> Result<TensorGrid<T>> {
    let ph = Phantom::<T>::new(spec)?;
    let half = T::lit(1.1 * spec.radius);
    let lower = ph.support.center.iter().map(|&c| c - half).collect();
    let upper = ph.support.center.iter().map(|&c| c + half).collect();
    let geo = GridGeometry::new(lower, upper, vec![samples; spec.dim])?;
    TensorGrid::sample(geo, &ph, interp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_bump_is_radial_with_central_maximum() {
        let spec = PhantomSpec {
            bumps: vec![Bump { center: vec![0.0; 3], width: 0.4, tensor: vec![1.0], gradient: None }],
            ..PhantomSpec::gaussian(0, 3, 1.0, 0)
        };
        let grid = make_phantom::<f64>(&spec, 21, Interp::Linear).unwrap();
        let ph = Phantom::<f64>::new(&spec).unwrap();
        let (a, b) = (ph.value(&[0.3, 0.0, 0.0]).coeffs()[0], ph.value(&[0.0, -0.3, 0.0]).coeffs()[0]);
        assert!((a - b).abs() < 1e-15);
        let max = grid.values().iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max, ph.value(&[0.0; 3]).coeffs()[0]);
    }

    #[test]
    fn vector_bump_is_parallel_to_its_direction() {
        let spec = PhantomSpec {
            bumps: vec![Bump { center: vec![0.1, 0.0, 0.0], width: 0.3, tensor: vec![1.0, 0.0, 0.0], gradient: None }],
            ..PhantomSpec::gaussian(1, 3, 1.0, 0)
        };
        let grid = make_phantom::<f64>(&spec, 9, Interp::Linear).unwrap();
        for k in 0..grid.geometry().len() {
            let t = grid.node_tensor(k);
            assert_eq!(t.coeffs()[1], 0.0);
            assert_eq!(t.coeffs()[2], 0.0);
        }
    }

    #[test]
    fn boundary_shell_decays() {
        for kind in [PhantomKind::GaussianBump, PhantomKind::PolynomialBump, PhantomKind::MultiBump] {
            let spec = PhantomSpec { kind, ..PhantomSpec::gaussian(2, 3, 1.0, 7) };
            let ph = Phantom::<f64>::new(&spec).unwrap();
            let dirs = crate::geometry::fibonacci_sphere::<f64>(200);
            let inner = dirs
                .iter()
                .flat_map(|d| [0.0, 0.3, 0.6].map(|s| ph.value(&d.iter().map(|v| v * s).collect::<Vec<_>>()).max_abs()))
                .fold(0.0, f64::max);
            let shell = dirs
                .iter()
                .flat_map(|d| [0.985, 0.99, 0.999, 1.0, 1.2].map(|s| ph.value(&d.iter().map(|v| v * s).collect::<Vec<_>>()).max_abs()))
                .fold(0.0, f64::max);
            assert!(shell <= 1e-10 * inner, "{kind:?}: {shell} vs {inner}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = PhantomSpec { kind: PhantomKind::MultiBump, ..PhantomSpec::gaussian(1, 3, 1.0, 42) };
        assert_eq!(spec.resolved_bumps(), spec.resolved_bumps());
        let other = PhantomSpec { seed: 43, ..spec.clone() };
        assert_ne!(spec.resolved_bumps(), other.resolved_bumps());
    }

    #[test]
    fn bump_outside_the_ball_is_rejected() {
        let spec = PhantomSpec {
            bumps: vec![Bump { center: vec![1.5, 0.0, 0.0], width: 0.3, tensor: vec![1.0, 0.0, 0.0], gradient: None }],
            ..PhantomSpec::gaussian(1, 3, 1.0, 0)
        };
        assert!(Phantom::<f64>::new(&spec).is_err());
    }
}
