//! Dense square matrices plus the constructions everything else is built from:
//! Kronecker and Schur products, the lower-triangular mask, and the
//! reciprocal-difference family whose triangular cut norm has a harmonic-number
//! closed form.

use thiserror::Error;

/// Bracket for the Grothendieck constant. Bound checks use the upper value.
pub const K_G_LOW: f64 = 1.676;
pub const K_G_HIGH: f64 = 1.782;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    Ragged { row: usize, len: usize, n: usize },
    #[error("entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("matrix sides differ: {left} vs {right}")]
    SideMismatch { left: usize, right: usize },
    #[error("closed form is defined for n >= 2, got {0}")]
    ClosedFormDomain(usize),
}

/// Row-major dense square matrix.
///
/// The symmetry and zero-diagonal flags are fixed at construction using exact
/// comparisons. For matrices that come out of floating-point arithmetic use
/// [`Matrix::is_symmetric_within`] / [`Matrix::is_zero_diagonal_within`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
    symmetric: bool,
    zero_diagonal: bool,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::Ragged { row: i + 1, len: row.len(), n });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MatrixError::NonFinite { i: i + 1, j: j + 1 });
                }
                data.push(v);
            }
        }
        Ok(Self::from_data(n, data))
    }

    /// Build from an entry function. `n` must be at least 1.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n >= 1, "matrix side must be at least 1");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::from_data(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| 0.0)
    }

    fn from_data(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        let mut symmetric = true;
        let mut zero_diagonal = true;
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                zero_diagonal = false;
            }
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    symmetric = false;
                }
            }
        }
        Matrix { n, data, symmetric, zero_diagonal }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn is_zero_diagonal_within(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.get(i, i).abs() <= tol)
    }

    pub fn is_skew_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j) == -self.get(j, i)))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::SideMismatch { left: self.n, right: other.n });
        }
        Ok(Matrix::from_fn(self.n, |i, j| self.get(i, j) + other.get(i, j)))
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix::from_fn(self.n, |i, j| c * self.get(i, j))
    }

    /// Sum of absolute entries, accumulated in row-major order.
    pub fn abs_sum(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_col_sum(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n];
        for i in 0..self.n {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.get(i, j).abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let vi = v[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * vi;
            }
        }
        out
    }
}

/// Kronecker product. Indexing is lexicographic with the first factor outermost:
/// entry (i*nb + k, j*nb + l) = a_ij * b_kl (0-based).
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.n(), b.n());
    Matrix::from_fn(na * nb, |r, c| a.get(r / nb, c / nb) * b.get(r % nb, c % nb))
}

/// Entrywise (Schur) product.
pub fn schur(a: &Matrix, b: &Matrix) -> Result<Matrix, MatrixError> {
    if a.n() != b.n() {
        return Err(MatrixError::SideMismatch { left: a.n(), right: b.n() });
    }
    Ok(Matrix::from_fn(a.n(), |i, j| a.get(i, j) * b.get(i, j)))
}

/// Lower-triangular 0/1 mask: 1 where i >= j.
pub fn triangular_mask(n: usize) -> Matrix {
    Matrix::from_fn(n, |i, j| if i >= j { 1.0 } else { 0.0 })
}

/// Triangular cut: keep entries with i >= j, zero the rest.
pub fn triangular_cut(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.n(), |i, j| if i >= j { a.get(i, j) } else { 0.0 })
}

/// Reciprocal-difference matrix: zero diagonal, 1/(i-j) off it (1-based indices).
/// Skew-symmetric; its operator norm stays below pi for every n.
pub fn make_an(n: usize) -> Matrix {
    Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            1.0 / (i as f64 - j as f64)
        }
    })
}

/// Harmonic number H_k, summed in ascending index order.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Prefix cache of harmonic numbers: h(0) = 0, h(k) = h(k-1) + 1/k.
pub struct HarmonicCache {
    h: Vec<f64>,
}

impl HarmonicCache {
    pub fn up_to(k_max: usize) -> Self {
        let mut h = Vec::with_capacity(k_max + 1);
        h.push(0.0);
        for k in 1..=k_max {
            h.push(h[k - 1] + 1.0 / k as f64);
        }
        HarmonicCache { h }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.h[k]
    }
}

/// Cut norm of the triangular cut of the reciprocal-difference matrix:
/// (n*(H_{n-1} - 1) + 1) / n^2. Defined for n >= 2.
pub fn closed_form_tri_cut_norm(n: usize) -> Result<f64, MatrixError> {
    if n < 2 {
        return Err(MatrixError::ClosedFormDomain(n));
    }
    let h = harmonic(n - 1);
    Ok((n as f64 * (h - 1.0) + 1.0) / (n * n) as f64)
}
