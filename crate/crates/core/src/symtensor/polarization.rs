//! Polarization identity: the multilinear pairing `<f, theta_1 (.) ... (.) theta_m>`
//! as a signed sum of pure powers over the subset sums of the `theta_j`.
//!
//! ```text
//! <f, (theta_1..theta_m)> = sum_{k=1}^m (-1)^{m-k} / m!  sum_{|J|=k} <f, (sum_{j in J} theta_j)^m>
//! ```

use super::factorial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Non-empty subset of `{0, .., m-1}` as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u32);

impl Subset {
    pub fn from_members(members: &[usize]) -> Self {
        Subset(members.iter().fold(0u32, |acc, &j| {
            assert!(j < 32, "subset member {j} too large");
            acc | (1 << j)
        }))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 & (1 << j) != 0
    }

    pub fn members(self) -> Vec<usize> {
        (0..32).filter(|&j| self.contains(j)).collect()
    }

    /// `sum_{j in J} vectors[j]`.
    pub fn sum_of<T: Scalar>(self, vectors: &[&[T]]) -> Vec<T> {
        let d = vectors.first().map_or(0, |v| v.len());
        let mut s = vec![T::zero(); d];
        for j in self.members() {
            for (acc, &x) in s.iter_mut().zip(vectors[j]) {
                *acc = *acc + x;
            }
        }
        s
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationTerm<T> {
    pub subset: Subset,
    /// `(-1)^(m - |J|)`
    pub sign: i8,
    /// `1 / m!`
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationPlan<T> {
    order: usize,
    terms: Vec<PolarizationTerm<T>>,
}

impl<T: Scalar> PolarizationPlan<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[PolarizationTerm<T>] {
        &self.terms
    }
}

/// All `2^m - 1` non-empty subsets, largest first, lexicographic within a size.
pub fn polarization_plan<T: Scalar>(m: usize) -> Result<PolarizationPlan<T>> {
    if m == 0 || m > 20 {
        return Err(Error::invalid(format!("polarization order must be in 1..=20, got {m}")));
    }
    let weight = T::one() / T::of_usize(factorial(m));
    let mut subsets: Vec<Subset> = (1u32..(1 << m)).map(Subset).collect();
    subsets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.members().cmp(&b.members())));
    let terms = subsets
        .into_iter()
        .map(|s| PolarizationTerm {
            subset: s,
            sign: if (m - s.len()) % 2 == 0 { 1 } else { -1 },
            weight,
        })
        .collect();
    Ok(PolarizationPlan { order: m, terms })
}

/// Evaluates the identity from precomputed power pairings
/// `power_values[J] = <f, (sum_{j in J} theta_j)^m>`.
pub fn polarize<T: Scalar>(m: usize, power_values: &BTreeMap<Subset, T>) -> Result<T> {
    polarize_with(m, |s| {
        power_values
            .get(&s)
            .copied()
            .ok_or_else(|| Error::IncompleteInput(format!("missing power value for subset {s}")))
    })
}

/// Same as [`polarize`], pulling each power pairing from a callback.
pub fn polarize_with<T: Scalar, F>(m: usize, mut power_value: F) -> Result<T>
where
    F: FnMut(Subset) -> Result<T>,
{
    let plan = polarization_plan::<T>(m)?;
    let mut total = T::zero();
    for term in plan.terms() {
        let v = power_value(term.subset)?;
        let signed = if term.sign > 0 { v } else { -v };
        total = total + signed * term.weight;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symtensor::{contract, multilinear_form, sym_power, SymTensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_m1() {
        let p = polarization_plan::<f64>(1).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].subset.members(), vec![0]);
        assert_eq!(p.terms()[0].sign, 1);
        assert_eq!(p.terms()[0].weight, 1.0);
    }

    #[test]
    fn plan_m2() {
        let p = polarization_plan::<f64>(2).unwrap();
        let got: Vec<(Vec<usize>, i8, f64)> = p
            .terms()
            .iter()
            .map(|t| (t.subset.members(), t.sign, t.weight))
            .collect();
        assert_eq!(
            got,
            vec![(vec![0, 1], 1, 0.5), (vec![0], -1, 0.5), (vec![1], -1, 0.5)]
        );
    }

    #[test]
    fn plan_m3_signs() {
        let p = polarization_plan::<f64>(3).unwrap();
        assert_eq!(p.terms().len(), 7);
        for t in p.terms() {
            let want = match t.subset.len() {
                3 | 1 => 1,
                _ => -1,
            };
            assert_eq!(t.sign, want);
            assert!((t.weight - 1.0 / 6.0).abs() < 1e-16);
        }
        assert!(polarization_plan::<f64>(0).is_err());
    }

    #[test]
    fn scalar_surrogates() {
        let vals = BTreeMap::from([
            (Subset::from_members(&[0, 1]), 9.0_f64),
            (Subset::from_members(&[0]), 1.0),
            (Subset::from_members(&[1]), 4.0),
        ]);
        assert!((polarize(2, &vals).unwrap() - 2.0).abs() < 1e-15);

        let ones: BTreeMap<Subset, f64> = (1u32..8)
            .map(|mask| {
                let s = Subset(mask);
                (s, (s.len() as f64).powi(3))
            })
            .collect();
        assert!((polarize(3, &ones).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn missing_subset_is_reported() {
        let vals = BTreeMap::from([(Subset::from_members(&[0, 1]), 9.0)]);
        match polarize(2, &vals) {
            Err(Error::IncompleteInput(msg)) => assert!(msg.contains("{1}")),
            other => panic!("expected incomplete input, got {other:?}"),
        }
    }

    #[test]
    fn scalar_identity_up_to_order_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 1..=6 {
            for _ in 0..50 {
                let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let got = polarize_with(m, |s| {
                    Ok(s.members().iter().map(|&j| v[j]).sum::<f64>().powi(m as i32))
                })
                .unwrap();
                let want: f64 = v.iter().product();
                let scale = v.iter().map(|x| x.abs()).sum::<f64>().powi(m as i32);
                assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "m={m}");
            }
        }
    }

    #[test]
    fn tensor_identity_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=4 {
            let n = crate::symtensor::sym_dim(m, 3);
            let f = SymTensor::from_coeffs(m, 3, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .unwrap();
            let thetas: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = thetas.iter().map(|t| t.as_slice()).collect();
            let got = polarize_with(m, |s| contract(&f, &sym_power(&s.sum_of(&refs), m))).unwrap();
            let want = multilinear_form(&f, &refs).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}
