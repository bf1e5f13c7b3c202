//! Tensor bases built from transverse frames, and the Cramer-rule
//! coefficients that express `theta^m` (or a vector `v`) in them.

use super::{channel_tensor, sym_dim, sym_power, SymTensor};
use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::linalg::{pair_margin, rank, Lu, Matrix};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Pairwise independence threshold on the smallest singular value of a
/// normalised pair.
pub const GENERIC_TOL: f64 = 1e-6;

/// Below this Hadamard ratio `|det| / prod |column|` a system is treated as
/// singular.
const DET_TOL: f64 = 1e-12;

fn hadamard_ratio<T: Scalar>(det: T, columns: &[Vec<T>]) -> T {
    let scale = columns
        .iter()
        .map(|c| c.iter().map(|&v| v * v).sum::<T>().sqrt())
        .fold(T::one(), |a, b| a * b);
    if scale > T::zero() {
        det.abs() / scale
    } else {
        T::zero()
    }
}

/// Label of the basis tensor `A_ij = (xi_j)_alpha^i (.) (xi_j)_beta^(m-i)`:
/// `channel = i` in `0..=m`, `branch = j - 1` in `0..=i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentIndex {
    pub channel: usize,
    pub branch: usize,
}

impl ComponentIndex {
    pub fn new(channel: usize, branch: usize) -> Self {
        ComponentIndex { channel, branch }
    }

    /// All labels for order `m`, in column order `A_01, A_11, A_12, A_21, ...`.
    pub fn all(m: usize) -> Vec<ComponentIndex> {
        (0..=m)
            .flat_map(|i| (0..=i).map(move |j| ComponentIndex::new(i, j)))
            .collect()
    }
}

impl fmt::Display for ComponentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A_{}{}", self.channel, self.branch + 1)
    }
}

/// Smallest pairwise margin (see [`pair_margin`]) over all pairs.
/// Returns 1 for fewer than two vectors.
pub fn pairwise_margin<T: Scalar>(vectors: &[&[T]]) -> T {
    let mut worst = T::one();
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            worst = worst.min(pair_margin(vectors[a], vectors[b]));
        }
    }
    worst
}

fn worst_pair<T: Scalar>(vectors: &[&[T]]) -> (usize, usize, T) {
    let mut worst = (0, 0, T::infinity());
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            let m = pair_margin(vectors[a], vectors[b]);
            if m < worst.2 {
                worst = (a, b, m);
            }
        }
    }
    worst
}

/// Whether the `m`-th powers of `vectors` determine every symmetric `m`-tensor.
///
/// For `m + 1` vectors in `R^3` this is pairwise linear independence; in
/// general it is a rank test on the matrix of `<., v_k^m>` evaluations.
pub fn is_generic<T: Scalar>(vectors: &[&[T]], m: usize, tol: T) -> Result<bool> {
    let Some(first) = vectors.first() else {
        return Err(Error::invalid("genericity test on an empty list"));
    };
    let d = first.len();
    if d == 0 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("vectors must share a nonzero dimension"));
    }
    if d == 3 && vectors.len() == m + 1 {
        if m == 0 {
            return Ok(crate::linalg::norm(first) > tol);
        }
        return Ok(pairwise_margin(vectors) > tol);
    }
    let nu = sym_dim(m, d);
    if vectors.len() < nu {
        return Ok(false);
    }
    let mut rows = Vec::with_capacity(vectors.len() * nu);
    for v in vectors {
        let unit = crate::linalg::normalize(v).unwrap_or_else(|| vec![T::zero(); d]);
        rows.extend(sym_power(&unit, m).weighted());
    }
    Ok(rank(vectors.len(), nu, &rows, tol) == nu)
}

/// The `C(m+2, 2)` tensors `A_ij` built from `m + 1` directions in `R^3`, with
/// their coefficient matrix factorised once.
#[derive(Debug, Clone)]
pub struct BasisSystem<T> {
    order: usize,
    frames: Vec<Frame<T>>,
    labels: Vec<ComponentIndex>,
    tensors: Vec<SymTensor<T>>,
    matrix: Matrix<T>,
    lu: Lu<T>,
    det: T,
    hadamard: T,
}

impl<T: Scalar> BasisSystem<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Canonical frames of the directions, `frames[j]` for branch `j`.
    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    pub fn labels(&self) -> &[ComponentIndex] {
        &self.labels
    }

    pub fn tensors(&self) -> &[SymTensor<T>] {
        &self.tensors
    }

    pub fn tensor(&self, idx: ComponentIndex) -> Option<&SymTensor<T>> {
        self.labels.iter().position(|&l| l == idx).map(|k| &self.tensors[k])
    }

    pub fn column_count(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// `Delta`, the determinant of the coefficient matrix.
    pub fn det(&self) -> T {
        self.det
    }

    /// `|Delta|` over the product of the column norms, in `[0, 1]`.
    pub fn hadamard_ratio(&self) -> T {
        self.hadamard
    }
}

/// Builds `A_ij = (xi_j)_alpha^i (.) (xi_j)_beta^(m-i)` for `0 <= i <= m`,
/// `1 <= j <= i + 1`, from `m + 1` unit directions in `R^3`.
pub fn basis_system<T: Scalar>(directions: &[&[T]]) -> Result<BasisSystem<T>> {
    if directions.is_empty() {
        return Err(Error::invalid("basis system needs at least one direction"));
    }
    if directions.iter().any(|d| d.len() != 3) {
        return Err(Error::invalid("basis system directions must lie in R^3"));
    }
    let m = directions.len() - 1;
    let (a, b, margin) = worst_pair(directions);
    if m > 0 && margin <= T::lit(GENERIC_TOL) {
        return Err(Error::DegenerateSystem {
            detail: format!(
                "directions {} and {} are linearly dependent (margin {margin:e})",
                a + 1,
                b + 1
            ),
            pair: Some((a, b)),
        });
    }
    let frames = directions
        .iter()
        .map(|d| Frame::canonical_of_nonunit(d))
        .collect::<Result<Vec<_>>>()?;
    let labels = ComponentIndex::all(m);
    let tensors: Vec<SymTensor<T>> = labels
        .iter()
        .map(|l| {
            let fr = &frames[l.branch];
            channel_tensor(fr.alpha(), fr.beta(), m, l.channel)
        })
        .collect();
    let columns: Vec<Vec<T>> = tensors.iter().map(|t| t.coeffs().to_vec()).collect();
    let matrix = Matrix::from_columns(&columns);
    let lu = matrix.lu();
    let det = lu.det();
    let hadamard = hadamard_ratio(det, &columns);
    if !(hadamard > T::lit(DET_TOL)) {
        return Err(Error::degenerate(format!(
            "basis tensors are linearly dependent for these directions (|Delta| = {:e}, Hadamard ratio {:e})",
            det.abs(),
            hadamard
        )));
    }
    Ok(BasisSystem {
        order: m,
        frames,
        labels,
        tensors,
        matrix,
        lu,
        det,
        hadamard,
    })
}

/// Coefficients `c_ij(theta) = Delta_ij(theta) / Delta` with
/// `theta^m = sum c_ij A_ij`, obtained from one LU solve.
pub fn cramer_coefficients<T: Scalar>(
    sys: &BasisSystem<T>,
    theta: &[T],
) -> Result<BTreeMap<ComponentIndex, T>> {
    if theta.len() != 3 {
        return Err(Error::invalid("theta must lie in R^3"));
    }
    if !(sys.hadamard > T::lit(DET_TOL)) {
        return Err(Error::degenerate(format!("|Delta| = {:e}", sys.det.abs())));
    }
    let rhs = sym_power(theta, sys.order);
    let c = sys
        .lu
        .solve(rhs.coeffs())
        .ok_or_else(|| Error::degenerate("zero pivot in basis system"))?;
    Ok(sys.labels.iter().copied().zip(c).collect())
}

/// Coefficients of `v = sum_{i<n} c_i eta_i(xi_1) + c_n eta_l(xi_2)`, with `l`
/// 1-based.
pub fn vector_cramer<T: Scalar>(
    frame1: &Frame<T>,
    frame2: &Frame<T>,
    l: usize,
    v: &[T],
) -> Result<Vec<T>> {
    let n = frame1.dim();
    if frame2.dim() != n || v.len() != n {
        return Err(Error::invalid("frames and vector must share a dimension"));
    }
    if l == 0 || l >= n {
        return Err(Error::invalid(format!("axis index l={l} out of 1..{}", n - 1)));
    }
    let mut cols: Vec<Vec<T>> = frame1.eta().to_vec();
    cols.push(frame2.eta_at(l).to_vec());
    let lu = Matrix::from_columns(&cols).lu();
    let det = lu.det();
    if !(hadamard_ratio(det, &cols) > T::lit(DET_TOL)) {
        return Err(Error::degenerate(format!(
            "eta(xi_1) with eta_{l}(xi_2) is singular (|Delta| = {:e})",
            det.abs()
        )));
    }
    lu.solve(v).ok_or_else(|| Error::degenerate("zero pivot in vector system"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, scale};
    use crate::symtensor::contract;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const E1: [f64; 3] = [1.0, 0.0, 0.0];
    const E2: [f64; 3] = [0.0, 1.0, 0.0];
    const E3: [f64; 3] = [0.0, 0.0, 1.0];

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn genericity_basics() {
        assert!(is_generic(&[&E1[..], &E2[..]], 1, 1e-6).unwrap());
        assert!(!is_generic(&[&E1[..], &[2.0, 0.0, 0.0][..]], 1, 1e-6).unwrap());
        assert!(is_generic::<f64>(&[], 1, 1e-6).is_err());
    }

    #[test]
    fn random_directions_are_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..5 {
            let vs: Vec<Vec<f64>> = (0..=m)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
            assert!(is_generic(&refs, m, 1e-6).unwrap());
        }
    }

    #[test]
    fn general_rank_test_in_the_plane() {
        // m+1 pairwise independent vectors in R^2 determine symmetric m-tensors
        let vs = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        assert!(is_generic(&refs, 2, 1e-9).unwrap());
        let bad = [[1.0, 0.0], [0.0, 1.0], [-2.0, 0.0]];
        let refs: Vec<&[f64]> = bad.iter().map(|v| v.as_slice()).collect();
        assert!(!is_generic(&refs, 2, 1e-9).unwrap());
    }

    #[test]
    fn order_one_basis_from_axes() {
        let sys = basis_system(&[&E3[..], &E1[..]]).unwrap();
        assert_eq!(sys.column_count(), 3);
        let cols: Vec<Vec<f64>> = sys.tensors().iter().map(|t| t.coeffs().to_vec()).collect();
        assert!(close(&cols[0], &[1.0, 0.0, 0.0], 1e-15));
        assert!(close(&cols[1], &[0.0, 1.0, 0.0], 1e-15));
        assert!(close(&cols[2], &[0.0, 0.0, -1.0], 1e-15));
        assert!((sys.det().abs() - 1.0).abs() < 1e-15);

        let c = cramer_coefficients(&sys, &E2).unwrap();
        assert!((c[&ComponentIndex::new(0, 0)]).abs() < 1e-15);
        assert!((c[&ComponentIndex::new(1, 0)] - 1.0).abs() < 1e-15);
        assert!((c[&ComponentIndex::new(1, 1)]).abs() < 1e-15);
    }

    #[test]
    fn basis_element_has_unit_coefficient() {
        let d1 = [0.3, 0.5, 0.81];
        let d1 = scale(&d1, 1.0 / norm(&d1));
        let d2 = [0.9, -0.2, 0.1];
        let d2 = scale(&d2, 1.0 / norm(&d2));
        let sys = basis_system(&[&d1[..], &d2[..]]).unwrap();
        let alpha = sys.frames()[0].alpha().to_vec();
        let c = cramer_coefficients(&sys, &alpha).unwrap();
        for (k, v) in c {
            let want: f64 = if k == ComponentIndex::new(1, 0) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "{k}: {v}");
        }
    }

    #[test]
    fn collinear_directions_are_rejected_with_pair() {
        let minus = [0.0, 0.0, -1.0];
        match basis_system(&[&E3[..], &minus[..]]) {
            Err(Error::DegenerateSystem { pair, .. }) => assert_eq!(pair, Some((0, 1))),
            other => panic!("expected degenerate system, got {other:?}"),
        }
    }

    #[test]
    fn equatorial_directions_share_alpha() {
        // Both directions in the xy-plane have alpha = (0, 0, -1): the basis is
        // singular even though the directions are independent.
        match basis_system(&[&E1[..], &E2[..]]) {
            Err(Error::DegenerateSystem { pair: None, .. }) => {}
            other => panic!("expected singular basis, got {other:?}"),
        }
    }

    fn coplanar_tuple(rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
        let normal: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fr = Frame::canonical_of_nonunit(&normal).unwrap();
        let (u, v) = (fr.alpha().to_vec(), fr.beta().to_vec());
        (0..count)
            .map(|_| {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                u.iter().zip(&v).map(|(a, b)| a * t.cos() + b * t.sin()).collect()
            })
            .collect()
    }

    #[test]
    fn cramer_round_trip_and_determinant_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in 1..=3 {
            let dirs = coplanar_tuple(&mut rng, m + 1);
            let refs: Vec<&[f64]> = dirs.iter().map(|d| d.as_slice()).collect();
            let sys = basis_system(&refs).unwrap();
            assert_eq!(sys.column_count(), crate::symtensor::sym_dim(m, 3));
            let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = cramer_coefficients(&sys, &theta).unwrap();
            // explicit Delta_ij / Delta by column replacement
            let target = sym_power(&theta, m);
            for (k, label) in sys.labels().iter().enumerate() {
                let dk = sys.matrix().with_column(k, target.coeffs()).det();
                let ratio = dk / sys.det();
                assert!((ratio - c[label]).abs() <= 1e-9 * (1.0 + ratio.abs()), "m={m} {label}");
            }
            let mut recon = SymTensor::zeros(m, 3);
            for (label, t) in sys.labels().iter().zip(sys.tensors()) {
                recon = recon.add(&t.scaled(c[label])).unwrap();
            }
            let err = recon.add(&target.scaled(-1.0)).unwrap().max_abs();
            assert!(err <= 1e-10 * target.max_abs().max(1.0));
            // contraction against the reconstruction agrees with theta^m
            let f = sym_power(&[0.2, 0.7, -0.4], m);
            let a = contract(&f, &recon).unwrap();
            let b = contract(&f, &target).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn vector_cramer_examples() {
        let f1 = Frame::canonical(&E3).unwrap();
        let f2 = Frame::canonical(&E1).unwrap();
        let c = vector_cramer(&f1, &f2, 1, &E2).unwrap();
        assert!(close(&c, &[1.0, 0.0, 0.0], 1e-15));
        let c = vector_cramer(&f1, &f2, 1, f2.eta_at(1)).unwrap();
        assert!(close(&c, &[0.0, 0.0, 1.0], 1e-15));
        // eta_2(e1) = (0,-1,0) lies in span(eta(e3)): singular
        assert!(vector_cramer(&f1, &f2, 2, &E2).is_err());
        assert!(vector_cramer(&f1, &f2, 3, &E2).is_err());
    }
}
