//! Small dense and tridiagonal solvers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    /// Symmetric matrix from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn symmetric_from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs_diagonal(&self) -> T {
        (0..self.n).fold(T::zero(), |m, i| m.max(self.get(i, i).abs()))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self * selfᵀ`.
    pub fn mul_transpose_self(&self) -> Self {
        let n = self.n;
        Self::symmetric_from_fn(n, |i, j| dot(self.row(i), self.row(j)))
    }

    /// Lower Cholesky factor of `self + jitter * I`, or `None` if a pivot is
    /// not strictly positive. Only the lower triangle of `self` is read.
    pub fn cholesky(&self, jitter: T) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let row_j = &l.data[j * n..j * n + j];
            let pivot = self.get(j, j) + jitter - dot(row_j, row_j);
            if !(pivot > T::zero()) || !pivot.is_finite() {
                return None;
            }
            let diag = pivot.sqrt();
            l.data[j * n + j] = diag;
            for i in j + 1..n {
                let s = dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
                l.data[i * n + j] = (self.get(i, j) - s) / diag;
            }
        }
        Some(l)
    }
}

#[inline]
pub(crate) fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// `L x` for lower-triangular `L`.
pub fn lower_matvec<T: Real>(l: &SquareMatrix<T>, x: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), l.n());
    (0..l.n()).map(|i| dot(&l.row(i)[..=i], &x[..=i])).collect()
}

/// Solves `L x = b` by forward substitution.
pub fn forward_solve<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n();
    debug_assert_eq!(b.len(), n);
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        let row = l.row(i);
        x[i] = (b[i] - dot(&row[..i], &x[..i])) / row[i];
    }
    x
}

/// Solves `Lᵀ x = b` by back substitution.
pub fn backward_solve_transpose<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n();
    debug_assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        x[i] /= l.get(i, i);
        let xi = x[i];
        for k in 0..i {
            x[k] -= l.get(i, k) * xi;
        }
    }
    x
}

/// Solves `(L Lᵀ) x = b`.
pub fn cholesky_solve<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    backward_solve_transpose(l, &forward_solve(l, b))
}

/// Thomas algorithm for a tridiagonal system.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (`lower[0]` unused), `upper[i]`
/// multiplies `x[i+1]` (`upper[n-1]` unused). No pivoting: the system must be
/// diagonally dominant or otherwise safe for elimination.
pub fn thomas_solve<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let mut x = rhs.to_vec();
    let mut scratch = vec![T::zero(); diag.len()];
    thomas_solve_in_place(lower, diag, upper, &mut x, &mut scratch)?;
    Ok(x)
}

/// As [`thomas_solve`], overwriting `rhs` with the solution. `scratch` must
/// have the system's length.
pub fn thomas_solve_in_place<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &mut [T],
    scratch: &mut [T],
) -> Result<()> {
    let n = diag.len();
    for len in [lower.len(), upper.len(), rhs.len(), scratch.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    if n == 0 {
        return Ok(());
    }
    let c = scratch;
    let d = rhs;
    if diag[0] == T::zero() {
        return Err(Error::SingularSystem { row: 0 });
    }
    let inv = diag[0].recip();
    c[0] = upper[0] * inv;
    d[0] *= inv;
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if denom == T::zero() {
            return Err(Error::SingularSystem { row: i });
        }
        let inv = denom.recip();
        c[i] = if i + 1 < n { upper[i] * inv } else { T::zero() };
        d[i] = (d[i] - lower[i] * d[i - 1]) * inv;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(())
}
