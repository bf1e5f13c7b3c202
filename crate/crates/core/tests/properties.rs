use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;
use std::f64::consts::PI;
use std::sync::Arc;
use trt_core::geometry::{
    angles_from_direction, great_circles_curve, plane_curve_intersections, Ball, Curve, Frame, PlaneCoords,
};
use trt_core::harness::{reconstruct_at, Phantom, PhantomKind, PhantomSpec};
use trt_core::recon::{DataKind, RayData, WOptions};
use trt_core::symtensor::{
    basis_system, binomial, cramer_coefficients, polarize_with, sym_power, sym_product, SymTensor,
};
use trt_core::xforms::{
    radon_forward, trt_tensor_frame, FnScalarField, FnTensorField, RaySpan, SphereGrid, TensorField,
};

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3).prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / r).collect()
}

fn phantom(m: usize, seed: u64) -> Phantom<f64> {
    Phantom::new(&PhantomSpec { kind: PhantomKind::MultiBump, ..PhantomSpec::gaussian(m, 3, 1.0, seed) }).unwrap()
}

/// `f + 2 g` for two phantoms of the same order.
fn combined(m: usize, f: Arc<Phantom<f64>>, g: Arc<Phantom<f64>>) -> FnTensorField<f64> {
    FnTensorField::new(m, Ball::origin(3, 1.0).unwrap(), move |x: &[f64]| {
        f.value(x).add(&g.value(x).scaled(2.0)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: Some(Box::new(FileFailurePersistence::Direct("tests/proptest-regressions/properties.txt"))),
        ..ProptestConfig::default()
    })]

    #[test]
    fn binomial_expansion_of_a_sum_power(a in vec3(), b in vec3(), m in 1usize..6) {
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = sym_power(&s, m);
        let mut rhs = SymTensor::zeros(m, 3);
        for q in 0..=m {
            let mut factors: Vec<&[f64]> = vec![a.as_slice(); m - q];
            factors.extend(vec![b.as_slice(); q]);
            let term = sym_product(&factors).unwrap().scaled(binomial(m, q) as f64);
            rhs = rhs.add(&term).unwrap();
        }
        for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn scalar_polarization_gives_the_product(v in prop::collection::vec(-2.0f64..2.0, 1..=6)) {
        let m = v.len();
        let rows: Vec<[f64; 1]> = v.iter().map(|&x| [x]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let got = polarize_with(m, |s| Ok(s.sum_of(&refs)[0].powi(m as i32))).unwrap();
        let want: f64 = v.iter().product();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().powi(m as i32) / (1..=m).product::<usize>() as f64;
        prop_assert!((got - want).abs() <= 1e-10 * scale.max(want.abs()), "{got} vs {want}");
    }

    #[test]
    fn frames_are_orthonormal_and_angles_round_trip(
        n in 3usize..=5,
        raw in prop::collection::vec(1e-3f64..(PI - 1e-3), 3),
        phi in 0.0f64..(2.0 * PI),
    ) {
        let mut angles = raw[..n - 2].to_vec();
        angles.push(phi);
        let fr = Frame::from_angles(n, &angles).unwrap();
        prop_assert!(fr.gram_deviation() <= 1e-12);
        let back = angles_from_direction(fr.xi()).unwrap();
        for (a, b) in angles.iter().zip(&back) {
            let d = (a - b).abs();
            prop_assert!(d.min(2.0 * PI - d) <= 1e-10, "{angles:?} -> {back:?}");
        }
    }

    #[test]
    fn intersections_lie_on_the_plane_and_are_separated(w in vec3(), p in -1.5f64..1.5) {
        let curve = great_circles_curve(2.0_f64).unwrap();
        let plane = PlaneCoords::new(unit(&w), p).unwrap();
        let tol = 1e-10;
        let hits = plane_curve_intersections(&curve, &plane, tol);
        let all: Vec<_> = hits.simple.iter().chain(&hits.tangential).collect();
        for h in &all {
            let x = curve.position(h.at.piece, h.at.lambda);
            prop_assert!(plane.signed_distance(&x).abs() <= tol);
        }
        for (k, a) in all.iter().enumerate() {
            for b in &all[k + 1..] {
                let d: f64 = a.point.iter().zip(&b.point).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                prop_assert!(d > tol);
            }
        }
    }

    #[test]
    fn cramer_round_trips_whenever_the_system_is_regular(
        dirs in prop::collection::vec(vec3(), 2..=4),
        theta in vec3(),
    ) {
        let m = dirs.len() - 1;
        let dirs: Vec<Vec<f64>> = dirs.iter().map(|d| unit(d)).collect();
        let refs: Vec<&[f64]> = dirs.iter().map(|d| d.as_slice()).collect();
        let Ok(sys) = basis_system(&refs) else { return Ok(()) };
        let c = cramer_coefficients(&sys, &theta).unwrap();
        let target = sym_power(&theta, m);
        let mut sum = SymTensor::zeros(m, 3);
        for (label, t) in sys.labels().iter().zip(sys.tensors()) {
            sum = sum.add(&t.scaled(c[label])).unwrap();
        }
        for (x, y) in sum.coeffs().iter().zip(target.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-10 * target.max_abs().max(1.0));
        }
    }

    /// Coplanar directions at least 5 degrees apart (modulo pi) give a
    /// regular system with |Delta| above 1e-8.
    #[test]
    fn coplanar_separated_directions_are_regular(
        normal in vec3(),
        m in 1usize..=3,
        start in 0.0f64..PI,
        gaps in prop::collection::vec(0.0873f64..1.0, 3),
    ) {
        let fr = Frame::canonical(&unit(&normal)).unwrap();
        let mut phis = vec![start];
        for g in &gaps[..m] {
            phis.push(phis.last().unwrap() + g);
        }
        prop_assume!(phis.last().unwrap() - start <= PI - 0.0873);
        let dirs: Vec<Vec<f64>> = phis
            .iter()
            .map(|&p| (0..3).map(|k| p.cos() * fr.alpha()[k] + p.sin() * fr.beta()[k]).collect())
            .collect();
        let refs: Vec<&[f64]> = dirs.iter().map(|d| d.as_slice()).collect();
        let sys = basis_system(&refs);
        prop_assert!(sys.is_ok(), "{:?}", sys.err());
        prop_assert!(sys.unwrap().det().abs() > 1e-8);
    }

    #[test]
    fn full_line_parity_and_half_line_relation(
        m in 1usize..=3,
        dir in vec3(),
        dist in 1.2f64..2.5,
        target in vec3(),
    ) {
        let f = phantom(m, 7 + m as u64);
        let a: Vec<f64> = unit(&dir).iter().map(|v| v * dist).collect();
        let aim: Vec<f64> = target.iter().map(|v| v * 0.5).collect();
        let xi = unit(&aim.iter().zip(&a).map(|(t, s)| t - s).collect::<Vec<_>>());
        let fr = Frame::canonical(&xi).unwrap();
        let neg = fr.negated();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..=m {
            let full = trt_tensor_frame(&f, &a, &fr, i, 1e-2, RaySpan::Full).unwrap();
            let full_neg = trt_tensor_frame(&f, &a, &neg, i, 1e-2, RaySpan::Full).unwrap();
            let plus = trt_tensor_frame(&f, &a, &fr, i, 1e-2, RaySpan::Half).unwrap();
            let plus_neg = trt_tensor_frame(&f, &a, &neg, i, 1e-2, RaySpan::Half).unwrap();
            prop_assert!((full - sign * full_neg).abs() <= 1e-6);
            prop_assert!((full - plus - sign * plus_neg).abs() <= 1e-6);
        }
    }

    #[test]
    fn ray_and_plane_transforms_are_linear(dir in vec3(), a in vec3(), p in -0.8f64..0.8, i in 0usize..=2) {
        let (f, g) = (Arc::new(phantom(2, 1)), Arc::new(phantom(2, 2)));
        let h = combined(2, f.clone(), g.clone());
        let fr = Frame::canonical(&unit(&dir)).unwrap();
        let t = |fld: &dyn TensorField<f64>| trt_tensor_frame(fld, &a, &fr, i, 1e-2, RaySpan::Full).unwrap();
        let (tf, tg, th) = (t(f.as_ref()), t(g.as_ref()), t(&h));
        prop_assert!((th - tf - 2.0 * tg).abs() <= 1e-12 * (1.0 + tf.abs() + tg.abs()));

        let plane = PlaneCoords::new(unit(&dir), p).unwrap();
        let s1 = FnScalarField::new(Ball::origin(3, 1.0).unwrap(), |x: &[f64]| (-4.0 * x[0] * x[0]).exp() * x[1]);
        let s2 = FnScalarField::new(Ball::origin(3, 1.0).unwrap(), |x: &[f64]| x[2] * x[2] - x[0]);
        let s3 = FnScalarField::new(Ball::origin(3, 1.0).unwrap(), |x: &[f64]| {
            (-4.0 * x[0] * x[0]).exp() * x[1] + 2.0 * (x[2] * x[2] - x[0])
        });
        let (r1, r2, r3) = (radon_forward(&s1, &plane, 48), radon_forward(&s2, &plane, 48), radon_forward(&s3, &plane, 48));
        prop_assert!((r3 - r1 - 2.0 * r2).abs() <= 1e-12 * (1.0 + r1.abs() + r2.abs()));
    }
}

#[test]
fn reconstruction_is_linear_in_the_field() {
    let (f, g) = (Arc::new(phantom(1, 3)), Arc::new(phantom(1, 4)));
    let h = combined(1, f.clone(), g.clone());
    let curve = great_circles_curve(2.0_f64).unwrap();
    let sphere = SphereGrid::product(3, 6, 12).unwrap();
    let opts = WOptions { circle_nodes: 16, ..WOptions::default() };
    let x = [0.15, -0.1, 0.2];
    let rec = |fld: &dyn TensorField<f64>| {
        let data = RayData::new(fld, &curve, DataKind::Tensor, 4e-2).unwrap();
        reconstruct_at(&data, &sphere, &opts, &x).unwrap()
    };
    let (rf, rg, rh) = (rec(f.as_ref()), rec(g.as_ref()), rec(&h));
    let scale = h.value(&x).max_abs();
    for k in 0..3 {
        let gap = (rh.coeffs()[k] - rf.coeffs()[k] - 2.0 * rg.coeffs()[k]).abs();
        assert!(gap <= 1e-6 * scale, "component {k}: {gap:e}");
    }
}
