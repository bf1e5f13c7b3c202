//! Dense symmetric tensors over `R^d`.
//!
//! A symmetric `m`-tensor is stored by its sorted multi-indices
//! `i_1 <= ... <= i_m` (0-based, lexicographic order). Contraction folds in
//! the multinomial multiplicity of each sorted index, so that
//! `<theta^m, w^m> = <theta, w>^m` holds exactly up to rounding.

mod basis;
mod polarization;

pub use basis::{
    basis_system, cramer_coefficients, is_generic, pairwise_margin, vector_cramer, BasisSystem,
    ComponentIndex, GENERIC_TOL,
};
pub use polarization::{polarization_plan, polarize, polarize_with, PolarizationPlan, PolarizationTerm, Subset};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `C(n, k)` as an integer.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Dimension of the space of symmetric `m`-tensors on `R^d`: `C(m + d - 1, m)`.
pub fn sym_dim(m: usize, d: usize) -> usize {
    assert!(d >= 1, "dimension must be positive");
    binomial(m + d - 1, m)
}

/// All sorted multi-indices of order `m` over `0..d`, in storage order.
pub fn multi_indices(m: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sym_dim(m, d));
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, d: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in start..d {
            cur.push(v);
            rec(m, d, v, cur, out);
            cur.pop();
        }
    }
    rec(m, d, 0, &mut cur, &mut out);
    out
}

/// Storage position of an arbitrary (unsorted) index tuple.
pub fn position(index: &[usize], d: usize) -> usize {
    let mut sorted = index.to_vec();
    sorted.sort_unstable();
    let m = sorted.len();
    let mut pos = 0;
    let mut lo = 0;
    for (k, &v) in sorted.iter().enumerate() {
        let rest = m - k - 1;
        for u in lo..v {
            pos += sym_dim(rest, d - u);
        }
        lo = v;
    }
    pos
}

/// Number of distinct orderings of a sorted multi-index: `m! / prod(count_v!)`.
pub fn multiplicity(sorted: &[usize]) -> usize {
    let mut denom = 1usize;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            denom *= run;
        } else {
            run = 1;
        }
    }
    factorial(sorted.len()) / denom
}

/// Contraction weights, one per stored coefficient.
pub fn multiplicity_weights<T: Scalar>(m: usize, d: usize) -> Vec<T> {
    multi_indices(m, d)
        .iter()
        .map(|idx| T::of_usize(multiplicity(idx)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T> {
    order: usize,
    dim: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> SymTensor<T> {
    pub fn zeros(order: usize, dim: usize) -> Self {
        SymTensor {
            order,
            dim,
            coeffs: vec![T::zero(); sym_dim(order, dim)],
        }
    }

    pub fn from_coeffs(order: usize, dim: usize, coeffs: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("tensor dimension must be positive"));
        }
        let want = sym_dim(order, dim);
        if coeffs.len() != want {
            return Err(Error::invalid(format!(
                "order {order} dim {dim} tensor needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(SymTensor { order, dim, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Component `f_{i_1 ... i_m}` for any ordering of the indices.
    pub fn get(&self, index: &[usize]) -> T {
        debug_assert_eq!(index.len(), self.order);
        self.coeffs[position(index, self.dim)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let p = position(index, self.dim);
        self.coeffs[p] = value;
    }

    pub fn scaled(&self, s: T) -> Self {
        SymTensor {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(SymTensor {
            order: self.order,
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Coefficients premultiplied by their multiplicities, so that
    /// `<f, g> = sum_k f_k * g.weighted()[k]`.
    pub fn weighted(&self) -> Vec<T> {
        multiplicity_weights::<T>(self.order, self.dim)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(w, &c)| w * c)
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::invalid(format!(
                "tensor shape mismatch: (m={}, d={}) vs (m={}, d={})",
                self.order, self.dim, other.order, other.dim
            )));
        }
        Ok(())
    }
}

/// `theta^{(.)m}`: coefficient at `(i_1..i_m)` is `theta_{i_1} ... theta_{i_m}`.
pub fn sym_power<T: Scalar>(theta: &[T], m: usize) -> SymTensor<T> {
    let d = theta.len();
    let coeffs = multi_indices(m, d)
        .iter()
        .map(|idx| idx.iter().fold(T::one(), |acc, &i| acc * theta[i]))
        .collect();
    SymTensor { order: m, dim: d, coeffs }
}

/// Symmetrised product `theta_1 (.) ... (.) theta_m`, the average over all
/// orderings of the plain tensor product.
pub fn sym_product<T: Scalar>(vectors: &[&[T]]) -> Result<SymTensor<T>> {
    let Some(first) = vectors.first() else {
        return Err(Error::invalid("symmetric product of an empty list"));
    };
    let d = first.len();
    if d == 0 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("symmetric product needs vectors of one nonzero dimension"));
    }
    let m = vectors.len();
    let perms = permutations(m);
    let inv = T::one() / T::of_usize(perms.len());
    let coeffs = multi_indices(m, d)
        .iter()
        .map(|idx| {
            let s: T = perms
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(idx)
                        .fold(T::one(), |acc, (&k, &i)| acc * vectors[k][i])
                })
                .sum();
            s * inv
        })
        .collect();
    Ok(SymTensor { order: m, dim: d, coeffs })
}

/// `alpha^{(.)i} (.) beta^{(.)(m-i)}`, the weight paired with TRT channel `i`.
pub fn channel_tensor<T: Scalar>(alpha: &[T], beta: &[T], m: usize, i: usize) -> SymTensor<T> {
    assert!(i <= m, "channel {i} exceeds order {m}");
    if m == 0 {
        return SymTensor { order: 0, dim: alpha.len(), coeffs: vec![T::one()] };
    }
    let mut vs: Vec<&[T]> = Vec::with_capacity(m);
    vs.extend(std::iter::repeat(alpha).take(i));
    vs.extend(std::iter::repeat(beta).take(m - i));
    sym_product(&vs).expect("alpha and beta share a dimension")
}

/// Full contraction `<f, g>` with multiplicity weights.
pub fn contract<T: Scalar>(f: &SymTensor<T>, g: &SymTensor<T>) -> Result<T> {
    f.check_compatible(g)?;
    let w = multiplicity_weights::<T>(f.order, f.dim);
    Ok(contract_with_weights(f, g, &w))
}

/// Contraction with an explicit weight table (one weight per stored index).
pub fn contract_with_weights<T: Scalar>(f: &SymTensor<T>, g: &SymTensor<T>, weights: &[T]) -> T {
    f.coeffs
        .iter()
        .zip(&g.coeffs)
        .zip(weights)
        .map(|((&a, &b), &w)| w * a * b)
        .sum()
}

/// `<f, (theta_1, ..., theta_m)> = f_{i_1..i_m} theta_1^{i_1} ... theta_m^{i_m}`,
/// summed by brute force over all `d^m` index tuples.
///
/// Independent of the storage weights; used as the reference for the
/// polarization identity.
pub fn multilinear_form<T: Scalar>(f: &SymTensor<T>, thetas: &[&[T]]) -> Result<T> {
    if thetas.len() != f.order || thetas.iter().any(|t| t.len() != f.dim) {
        return Err(Error::invalid("multilinear form needs m vectors of the tensor dimension"));
    }
    let (m, d) = (f.order, f.dim);
    let mut tuple = vec![0usize; m];
    let mut total = T::zero();
    loop {
        let mut term = f.get(&tuple);
        for (k, &i) in tuple.iter().enumerate() {
            term = term * thetas[k][i];
        }
        total = total + term;
        // odometer increment
        let mut k = 0;
        loop {
            if k == m {
                return Ok(total);
            }
            tuple[k] += 1;
            if tuple[k] < d {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(sym_dim(2, 3), 6);
        assert_eq!(sym_dim(0, 5), 1);
        assert_eq!(sym_dim(2, 2), 3);
        for m in 0..6 {
            assert_eq!(multi_indices(m, 3).len(), binomial(m + 2, 2));
        }
    }

    #[test]
    fn positions_follow_storage_order() {
        for (m, d) in [(0, 3), (1, 4), (2, 3), (3, 3), (4, 2)] {
            for (k, idx) in multi_indices(m, d).iter().enumerate() {
                assert_eq!(position(idx, d), k);
                let mut rev = idx.clone();
                rev.reverse();
                assert_eq!(position(&rev, d), k);
            }
        }
    }

    #[test]
    fn power_of_axis_vector() {
        let t = sym_power(&[1.0, 0.0, 0.0], 2);
        assert_eq!(t.get(&[0, 0]), 1.0);
        assert_eq!(t.coeffs().iter().filter(|&&c| c != 0.0).count(), 1);
        let s = sym_power(&[0.3, -2.0, 7.0], 0);
        assert_eq!(s.coeffs(), &[1.0]);
    }

    #[test]
    fn power_self_contraction() {
        let t = sym_power(&[1.0_f64, 1.0, 0.0], 2);
        assert!((contract(&t, &t).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_powers_contract_to_zero() {
        let a = sym_power(&[1.0, 0.0, 0.0], 2);
        let b = sym_power(&[0.0, 1.0, 0.0], 2);
        assert_eq!(contract(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn product_of_two_axes() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        let t = sym_product(&[&e1[..], &e2[..]]).unwrap();
        assert_eq!(t.get(&[0, 1]), 0.5);
        assert_eq!(t.get(&[0, 0]), 0.0);
        assert_eq!(t.get(&[1, 1]), 0.0);
    }

    #[test]
    fn product_errors() {
        assert!(sym_product::<f64>(&[]).is_err());
        let a = [1.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        assert!(sym_product(&[&a[..], &b[..]]).is_err());
        let f = SymTensor::<f64>::zeros(2, 3);
        let g = SymTensor::<f64>::zeros(2, 2);
        assert!(contract(&f, &g).is_err());
        assert!(SymTensor::from_coeffs(2, 3, vec![0.0; 5]).is_err());
    }

    #[test]
    fn binomial_expansion_of_sum_power() {
        // (a + b)^m = sum_q C(m, q) a^(m-q) (.) b^q
        let a = [0.3, -1.2, 0.7];
        let b = [1.1, 0.4, -0.5];
        for m in 1..=5 {
            let lhs = sym_power(&crate::linalg::add(&a, &b), m);
            let mut rhs = SymTensor::zeros(m, 3);
            for q in 0..=m {
                let mut vs: Vec<&[f64]> = vec![&a[..]; m - q];
                vs.extend(std::iter::repeat(&b[..]).take(q));
                let term = sym_product(&vs).unwrap().scaled(binomial(m, q) as f64);
                rhs = rhs.add(&term).unwrap();
            }
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "m={m}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn multilinear_form_matches_symmetric_product_contraction() {
        let f = SymTensor::from_coeffs(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let a = [0.5_f64, -1.0, 2.0];
        let b = [1.5, 0.25, -0.75];
        let direct = multilinear_form(&f, &[&a[..], &b[..]]).unwrap();
        let via = contract(&f, &sym_product(&[&a[..], &b[..]]).unwrap()).unwrap();
        assert!((direct - via).abs() < 1e-13);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 3)
    }

    proptest! {
        #[test]
        fn power_contraction_is_power_of_dot(a in vec3(), b in vec3(), m in 0usize..6) {
            let lhs = contract(&sym_power(&a, m), &sym_power(&b, m)).unwrap();
            let rhs = crate::linalg::dot(&a, &b).powi(m as i32);
            let scale = (crate::linalg::norm(&a) * crate::linalg::norm(&b)).powi(m as i32).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn contraction_is_symmetric(a in prop::collection::vec(-3.0f64..3.0, 10), b in prop::collection::vec(-3.0f64..3.0, 10)) {
            let f = SymTensor::from_coeffs(3, 3, a).unwrap();
            let g = SymTensor::from_coeffs(3, 3, b).unwrap();
            let (x, y) = (contract(&f, &g).unwrap(), contract(&g, &f).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }

        #[test]
        fn product_is_permutation_invariant(a in vec3(), b in vec3(), c in vec3()) {
            let x = sym_product(&[&a[..], &b[..], &c[..]]).unwrap();
            let y = sym_product(&[&c[..], &a[..], &b[..]]).unwrap();
            for (p, q) in x.coeffs().iter().zip(y.coeffs()) {
                prop_assert!((p - q).abs() <= 1e-14);
            }
            let s = sym_product(&[&a[..], &a[..], &a[..]]).unwrap();
            let t = sym_power(&a, 3);
            for (p, q) in s.coeffs().iter().zip(t.coeffs()) {
                prop_assert!((p - q).abs() <= 1e-13);
            }
        }
    }
}
