//! Seeded identity checks across all layers, one report line per check.

use super::phantom::{Phantom, PhantomSpec};
use super::pipeline::reconstruct_at;
use crate::error::Result;
use crate::geometry::{great_circles_curve, Ball, Frame, PlaneCoords};
use crate::recon::{
    plane_branches, recover_tensor_components, w_oracle, weighted_data_w, DataKind, ExactA, RayData, ViewSet,
    WOptions,
};
use crate::symtensor::{
    contract_with_weights, multilinear_form, multiplicity_weights, polarize_with, sym_power, SymTensor,
};
use crate::xforms::{radon_forward, FnScalarField, InversionOptions, RadonInverse, Sinogram, SphereGrid, TensorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} measured={:.3e} tol={:.1e} ({:.2} s){}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.seconds,
                if c.detail.is_empty() { String::new() } else { format!("  {}", c.detail) }
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn run(name: &str, tolerance: f64, body: impl FnOnce() -> Result<(f64, String)>) -> Check {
    let t0 = Instant::now();
    let (measured, detail) = match body() {
        Ok(v) => v,
        Err(e) => (f64::INFINITY, format!("error: {e}")),
    };
    Check {
        name: name.into(),
        measured,
        tolerance,
        passed: measured <= tolerance,
        seconds: t0.elapsed().as_secs_f64(),
        detail,
    }
}

fn random_unitish(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_tensor(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SymTensor<f64> {
    let mut t = SymTensor::zeros(m, n);
    for c in t.coeffs_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    t
}

/// Largest relative gap between the brute-force multilinear form and the
/// polarization identity evaluated through the stored-weight contraction.
/// `mutation` is added to the second contraction weight.
pub fn polarization_gap(orders: &[usize], trials: usize, seed: u64, mutation: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3;
    let mut worst = 0.0_f64;
    for &m in orders {
        let mut weights = multiplicity_weights::<f64>(m, n);
        if weights.len() > 1 {
            weights[1] += mutation;
        }
        for _ in 0..trials {
            let f = random_tensor(&mut rng, m, n);
            let thetas: Vec<Vec<f64>> = (0..m).map(|_| random_unitish(&mut rng, n)).collect();
            let refs: Vec<&[f64]> = thetas.iter().map(|t| t.as_slice()).collect();
            let direct = multilinear_form(&f, &refs)?;
            let polar = polarize_with(m, |s| Ok(contract_with_weights(&f, &sym_power(&s.sum_of(&refs), m), &weights)))?;
            let scale = direct.abs().max(f.max_abs());
            worst = worst.max((polar - direct).abs() / scale);
        }
    }
    Ok(worst)
}

fn frame_gram(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for n in 3..=5 {
        for _ in 0..trials {
            let mut angles: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
            angles.push(rng.gen_range(0.0..2.0 * std::f64::consts::PI));
            worst = worst.max(Frame::from_angles(n, &angles)?.gram_deviation());
        }
    }
    Ok(worst)
}

/// Plane integrals and the inversion of the analytic sinogram of
/// `exp(-|x|^2 / s^2)`.
fn radon_pair(polar: usize, azimuth: usize, np: usize) -> Result<(f64, String)> {
    let s = 0.3_f64;
    let ball = Ball::origin(3, 1.0)?;
    let g = FnScalarField::new(ball, move |x: &[f64]| (-(x.iter().map(|v| v * v).sum::<f64>()) / (s * s)).exp());
    let exact = |p: f64| std::f64::consts::PI * s * s * (-p * p / (s * s)).exp();
    let mut fwd = 0.0_f64;
    for (w, p) in [([0.0, 0.0, 1.0], 0.1), ([0.6, 0.0, 0.8], -0.25), ([0.48, 0.6, 0.64], 0.0)] {
        let plane = PlaneCoords::new(w.to_vec(), p)?;
        fwd = fwd.max((radon_forward(&g, &plane, 200) - exact(p)).abs() / exact(0.0));
    }
    let grid = SphereGrid::product(3, polar, azimuth)?;
    let offsets = crate::xforms::uniform_offsets(1.0, np);
    let sino = Sinogram::from_fn(grid, offsets, |_w: &[f64], p: f64| exact(p))?;
    let inv = RadonInverse::new(&sino, InversionOptions::default())?;
    let mut back = 0.0_f64;
    for x in [[0.0, 0.0, 0.0], [0.2, -0.1, 0.1]] {
        let truth = (-(x.iter().map(|v| v * v).sum::<f64>()) / (s * s)).exp();
        back = back.max((inv.at(&x)? - truth).abs());
    }
    Ok((fwd.max(back), format!("forward {fwd:.2e}, inverse {back:.2e}")))
}

/// Relative L2 gap between the weighted data functional and the
/// second-difference forward oracle on a handful of planes.
fn w_identity(planes: usize, seed: u64) -> Result<(f64, String)> {
    let spec = PhantomSpec::gaussian(1, 3, 1.0, seed);
    let f = Phantom::<f64>::new(&spec)?;
    let curve = great_circles_curve(2.0_f64)?;
    let data = RayData::new(&f, &curve, DataKind::Tensor, 1e-2)?;
    let opts = WOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut num, mut den) = (0.0, 0.0);
    let mut used = 0;
    while used < planes {
        let omega = random_unitish(&mut rng, 3);
        let p = rng.gen_range(-0.5..0.5);
        let Ok(plane) = PlaneCoords::from_normal(&omega, p) else { continue };
        let Ok(branches) = plane_branches(&curve, &plane, 1, &[], &opts) else { continue };
        for ch in 0..=1 {
            let w = weighted_data_w(&data, &plane, ch, &branches[0], &opts)?;
            let o = w_oracle(&f, DataKind::Tensor, &branches[0].point, &plane, ch, 2e-2, 200)?;
            num += (w - o) * (w - o);
            den += o * o;
        }
        used += 1;
    }
    let rel = (num / den).sqrt();
    Ok((rel, format!("{planes} planes, oracle norm {:.3e}", den.sqrt())))
}

/// Exact frame components through the Cramer and polarization layers.
fn algebraic_exactness(points: usize, seed: u64) -> Result<f64> {
    let curve = great_circles_curve(2.0_f64)?;
    let opts = WOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for m in 0..=3 {
        let spec = PhantomSpec {
            kind: super::phantom::PhantomKind::MultiBump,
            ..PhantomSpec::gaussian(m, 3, 1.0, seed + m as u64)
        };
        let f = Phantom::<f64>::new(&spec)?;
        let exact = ExactA::new(&f, DataKind::Tensor)?;
        for _ in 0..points {
            let x: Vec<f64> = random_unitish(&mut rng, 3).iter().map(|v| v * 0.55).collect();
            let views = ViewSet::from_curve(&curve, &x, m + 1, &opts)?;
            let got = recover_tensor_components(&views, &exact, m)?;
            let want = f.value(&x);
            let scale = want.max_abs().max(1e-3);
            for (a, b) in got.coeffs().iter().zip(want.coeffs()) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// m = 1 reconstruction from on-demand ray data at a few interior points.
fn end_to_end(points: usize, seed: u64) -> Result<(f64, String)> {
    let spec = PhantomSpec::gaussian(1, 3, 1.0, seed);
    let f = Phantom::<f64>::new(&spec)?;
    let curve = great_circles_curve(2.0_f64)?;
    let data = RayData::new(&f, &curve, DataKind::Tensor, 2e-2)?;
    let sphere = SphereGrid::product(3, 8, 16)?;
    let opts = WOptions { circle_nodes: 32, ..WOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..points {
        let x: Vec<f64> = random_unitish(&mut rng, 3).iter().map(|v| v * 0.3).collect();
        let got = reconstruct_at(&data, &sphere, &opts, &x)?;
        let want = f.value(&x);
        for (a, b) in got.coeffs().iter().zip(want.coeffs()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
    }
    Ok(((num / den).sqrt(), format!("{points} points")))
}

/// Runs the suite; `mutation` perturbs one contraction weight in the
/// polarization check.
pub fn selftest_suite(level: Level, mutation: f64) -> SelftestReport {
    let mut checks = vec![
        run("polarization-oracle", 1e-9, || {
            Ok((polarization_gap(&[1, 2, 3, 4], 100, 11, mutation)?, "m <= 4, 100 trials each".into()))
        }),
        run("frame-gram", 1e-12, || Ok((frame_gram(2000, 12)?, "n = 3, 4, 5".into()))),
        run("radon-analytic-pair", 1e-3, || radon_pair(10, 20, 129)),
        run("w-identity", 5e-2, || w_identity(6, 13)),
        run("algebraic-exactness", 1e-9, || Ok((algebraic_exactness(25, 14)?, "m <= 3".into()))),
    ];
    if level == Level::Full {
        checks.push(run("end-to-end-m1", 0.15, || end_to_end(4, 15)));
    }
    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarization_check_detects_a_corrupted_weight() {
        assert!(polarization_gap(&[1, 2, 3], 20, 1, 0.0).unwrap() <= 1e-12);
        assert!(polarization_gap(&[1, 2, 3], 20, 1, 1e-3).unwrap() > 1e-6);
    }

    #[test]
    fn report_has_one_line_per_check() {
        let r = SelftestReport {
            checks: vec![
                Check { name: "a".into(), measured: 0.0, tolerance: 1.0, passed: true, seconds: 0.0, detail: String::new() },
                Check { name: "b".into(), measured: 2.0, tolerance: 1.0, passed: false, seconds: 0.0, detail: "x".into() },
            ],
        };
        let text = r.to_string();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("PASS a"));
        assert!(!r.passed());
    }
}
