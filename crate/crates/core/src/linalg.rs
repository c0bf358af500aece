//! Dense real linear algebra used by the solvers.
//!
//! Matrices are stored column-major: entry `(i, j)` of an `m × n` matrix lives
//! at `data[i + j * m]`. Least squares goes through a Householder QR
//! factorization; the Gram matrix and its inverse are formed explicitly only
//! where the score vector needs them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest accepted 2-norm condition number of a (restricted) Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Column-major dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices, the natural way to write small fixtures.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.as_ref().iter().enumerate() {
                data[i + j * m] = v;
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with column `j` multiplied by `factor`.
    pub fn with_scaled_column(&self, j: usize, factor: f64) -> Result<Self> {
        if j >= self.cols {
            return Err(Error::Dimension(format!(
                "column {j} out of range for {} columns",
                self.cols
            )));
        }
        let mut data = self.data.clone();
        data[j * self.rows..(j + 1) * self.rows]
            .iter_mut()
            .for_each(|v| *v *= factor);
        Self::from_col_major(self.rows, self.cols, data)
    }

    /// Submatrix keeping the supported columns in ascending index order.
    pub fn select_columns(&self, support: &SupportSet) -> Result<Self> {
        support.check_bound(self.cols)?;
        let mut data = Vec::with_capacity(self.rows * support.len());
        for &j in support.indices() {
            data.extend_from_slice(self.column(j));
        }
        Self::from_col_major(self.rows, support.len(), data)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        Ok(out)
    }

    /// `Aᵀ y`.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                y.len(),
                self.rows
            )));
        }
        Ok((0..self.cols).map(|j| dot(self.column(j), y)).collect())
    }

    fn require_tall(&self) -> Result<()> {
        if self.rows <= self.cols {
            return Err(Error::Dimension(format!(
                "design matrix must have more rows than columns, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }
}

/// Ascending set of distinct column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Sorts the indices; rejects duplicates and empty input.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySupport);
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSupport(format!(
                "duplicate index in {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Scatters `values` (aligned with the support) into a zero vector of length `n`.
    pub fn embed(&self, values: &[f64], n: usize) -> Result<Vec<f64>> {
        self.check_bound(n)?;
        if values.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} values for a support of size {}",
                values.len(),
                self.len()
            )));
        }
        let mut out = vec![0.0; n];
        for (&i, &v) in self.0.iter().zip(values) {
            out[i] = v;
        }
        Ok(out)
    }

    fn check_bound(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::InvalidSupport(format!(
                "index {last} out of range for {n} columns"
            ))),
            Some(_) => Ok(()),
            None => Err(Error::EmptySupport),
        }
    }
}

/// Symmetric `n × n` matrix `AᵀA`, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.n]
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    /// Diagonal entries: the squared column norms of `A`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "vector of length {} against {}x{} matrix",
                x.len(),
                self.n,
                self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    /// Inverse through a Cholesky factorization. The result is mirrored from
    /// its upper triangle so it is exactly symmetric.
    pub fn inverse(&self) -> Result<GramMatrix> {
        let g = DMatrix::from_column_slice(self.n, self.n, &self.data);
        let inv = g
            .cholesky()
            .ok_or(Error::IllConditioned {
                condition: f64::INFINITY,
                support: None,
            })?
            .inverse();
        let mut data = vec![0.0; self.n * self.n];
        for j in 0..self.n {
            for i in 0..=j {
                let v = inv[(i, j)];
                data[i + j * self.n] = v;
                data[j + i * self.n] = v;
            }
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
                support: None,
            });
        }
        Ok(GramMatrix { n: self.n, data })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `AᵀA`, each off-diagonal entry computed once and mirrored.
pub fn gram(a: &DenseMatrix) -> Result<GramMatrix> {
    a.require_tall()?;
    let n = a.cols();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..=j {
            let v = dot(a.column(i), a.column(j));
            data[i + j * n] = v;
            data[j + i * n] = v;
        }
    }
    Ok(GramMatrix { n, data })
}

/// Thin QR factorization of a tall, full-column-rank matrix, reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct QrLeastSquares {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    condition: f64,
}

impl QrLeastSquares {
    /// Factors `a`, rejecting it when the condition estimate of `AᵀA` exceeds
    /// [`MAX_GRAM_CONDITION`].
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        a.require_tall()?;
        let qr = a.to_nalgebra().qr();
        let (q, r) = (qr.q(), qr.r());
        let condition = gram_condition_from_r(&r);
        if condition.is_nan() || condition > MAX_GRAM_CONDITION {
            return Err(Error::IllConditioned {
                condition,
                support: None,
            });
        }
        Ok(Self { q, r, condition })
    }

    /// 2-norm condition number of `AᵀA`, i.e. `(σ_max / σ_min)²` of `A`.
    pub fn gram_condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.q.nrows() {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} against {} rows",
                y.len(),
                self.q.nrows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        let qty = self.q.tr_mul(&DVector::from_column_slice(y));
        let x = self
            .r
            .solve_upper_triangular(&qty)
            .ok_or(Error::IllConditioned {
                condition: f64::INFINITY,
                support: None,
            })?;
        Ok(x.iter().copied().collect())
    }
}

fn gram_condition_from_r(r: &DMatrix<f64>) -> f64 {
    let sv = r.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        return f64::INFINITY;
    }
    (max / min).powi(2)
}

/// 2-norm condition estimate of `AᵀA`.
pub fn gram_condition(a: &DenseMatrix) -> Result<f64> {
    a.require_tall()?;
    Ok(gram_condition_from_r(&a.to_nalgebra().qr().r()))
}

/// Minimizer of `‖Ax − y‖₂` (the pseudoinverse solution `A†y`).
pub fn least_squares(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} against {} rows",
            y.len(),
            a.rows()
        )));
    }
    QrLeastSquares::new(a)?.solve(y)
}

/// Least squares on the supported columns only. Coefficients are returned in
/// ascending index order of the support.
pub fn restricted_least_squares(
    a: &DenseMatrix,
    support: &SupportSet,
    y: &[f64],
) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let sub = a.select_columns(support)?;
    least_squares(&sub, y).map_err(|e| match e {
        Error::IllConditioned { condition, .. } => Error::IllConditioned {
            condition,
            support: Some(support.indices().to_vec()),
        },
        other => other,
    })
}

/// `‖Ax − y‖₂`.
pub fn residual_norm(a: &DenseMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} against {} rows",
            y.len(),
            a.rows()
        )));
    }
    let ax = a.mul_vec(x)?;
    Ok(ax
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        .sqrt())
}
