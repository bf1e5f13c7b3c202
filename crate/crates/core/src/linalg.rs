//! Small dense linear algebra on `Vec`-backed vectors and row-major matrices.
//!
//! Sizes here never exceed a few dozen rows (the symmetric tensor bases for
//! m <= 6 in R^3), so partial-pivot LU is all that is needed.

use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `a + s * b`
pub fn axpy<T: Scalar>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

/// Returns `None` for the zero vector.
pub fn normalize<T: Scalar>(a: &[T]) -> Option<Vec<T>> {
    let n = norm(a);
    if n == T::zero() || !n.is_finite() {
        None
    } else {
        Some(scale(a, T::one() / n))
    }
}

pub fn unit<T: Scalar>(n: usize, k: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[k] = T::one();
    e
}

pub fn cross<T: Scalar>(a: &[T], b: &[T]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Smallest singular value of the `d x 2` matrix `[a/|a|, b/|b|]`.
///
/// Zero when either column vanishes or the columns are parallel; at most 1.
pub fn pair_margin<T: Scalar>(a: &[T], b: &[T]) -> T {
    let (Some(a), Some(b)) = (normalize(a), normalize(b)) else {
        return T::zero();
    };
    // Gram matrix [[1, c], [c, 1]] has eigenvalues 1 +- |c|.
    let c = dot(&a, &b).abs().min(T::one());
    (T::one() - c).max(T::zero()).sqrt()
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    /// Builds the matrix whose `k`-th column is `columns[k]`.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "column length must equal column count");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn with_column(&self, j: usize, col: &[T]) -> Self {
        let mut m = self.clone();
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
        m
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    pub fn lu(&self) -> Lu<T> {
        Lu::new(self)
    }

    pub fn det(&self) -> T {
        self.lu().det()
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot == T::zero() {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    lu[i * n + j] = lu[i * n + j] - factor * lu[k * n + j];
                }
            }
        }
        Lu { n, lu, perm, sign }
    }

    pub fn det(&self) -> T {
        (0..self.n).fold(self.sign, |acc, k| acc * self.lu[k * self.n + k])
    }

    /// Smallest pivot magnitude; zero means exactly singular.
    pub fn min_pivot(&self) -> T {
        (0..self.n)
            .map(|k| self.lu[k * self.n + k].abs())
            .fold(T::infinity(), T::min)
    }

    /// Solves `A x = b`. Returns `None` if a pivot is exactly zero.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            let d = self.lu[i * n + i];
            if d == T::zero() {
                return None;
            }
            x[i] = s / d;
        }
        Some(x)
    }
}

/// Numerical rank of a `rows x cols` row-major matrix by Gaussian elimination
/// with full pivoting; entries below `tol * max|a|` count as zero.
pub fn rank<T: Scalar>(rows: usize, cols: usize, data: &[T], tol: T) -> usize {
    let mut a = data.to_vec();
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return 0;
    }
    let thresh = tol * scale;
    let mut r = 0;
    let mut col_used = vec![false; cols];
    let mut row_used = vec![false; rows];
    loop {
        let mut best = T::zero();
        let mut at = None;
        for i in (0..rows).filter(|&i| !row_used[i]) {
            for j in (0..cols).filter(|&j| !col_used[j]) {
                let v = a[i * cols + j].abs();
                if v > best {
                    best = v;
                    at = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = at else { break };
        if best <= thresh {
            break;
        }
        row_used[pi] = true;
        col_used[pj] = true;
        r += 1;
        let pivot = a[pi * cols + pj];
        for i in (0..rows).filter(|&i| !row_used[i]) {
            let f = a[i * cols + pj] / pivot;
            for j in 0..cols {
                a[i * cols + j] = a[i * cols + j] - f * a[pi * cols + j];
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_determinant() {
        let a = Matrix::from_columns(&[
            vec![2.0_f64, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        // symmetric tridiagonal: det = 2*(12-1) - 1*(4-0) = 18
        assert!((a.det() - 18.0).abs() < 1e-12);
        let b = vec![1.0, 2.0, 3.0];
        let x = a.lu().solve(&b).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_has_zero_det() {
        let a = Matrix::from_columns(&[vec![1.0_f64, 2.0], vec![2.0, 4.0]]);
        assert_eq!(a.det(), 0.0);
        assert!(a.lu().solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn pair_margin_extremes() {
        assert!((pair_margin(&[1.0_f64, 0.0, 0.0], &[0.0, 5.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(pair_margin(&[1.0, 0.0, 0.0], &[-2.0, 0.0, 0.0]), 0.0);
        assert_eq!(pair_margin(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn rank_detects_dependent_rows() {
        let data = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0];
        assert_eq!(rank(3, 3, &data, 1e-12), 2);
    }
}
