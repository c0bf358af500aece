//! The closed-form k-sparse solver.
//!
//! Columns are ranked by the score `z = (AᵀA)⁻¹ (Aᵀy)²`, where the square is
//! elementwise. For orthogonal columns `zᵢ = (Aᵀy)ᵢ² / λᵢ` is exactly the
//! reduction in squared residual contributed by column `i`, so keeping the
//! `k` best-scored entries of `A†y` attains the best k-sparse residual.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    gram, residual_norm, restricted_least_squares, DenseMatrix, QrLeastSquares, SupportSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Fast,
    Brute,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Fast => "fast",
            SolveMethod::Brute => "brute",
        })
    }
}

/// A k-sparse candidate and its residual `‖Ax − y‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub support: SupportSet,
    /// Coefficients aligned with `support`.
    pub values: Vec<f64>,
    pub residual: f64,
    pub method: SolveMethod,
    /// Whether `values` were re-solved on the chosen support.
    pub refit: bool,
}

impl SparseSolution {
    /// Builds a solution and evaluates its residual from the embedded full vector.
    pub(crate) fn assemble(
        a: &DenseMatrix,
        y: &[f64],
        support: SupportSet,
        values: Vec<f64>,
        method: SolveMethod,
        refit: bool,
    ) -> Result<Self> {
        let full = support.embed(&values, a.cols())?;
        let residual = residual_norm(a, &full, y)?;
        Ok(Self {
            support,
            values,
            residual,
            method,
            refit,
        })
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    /// Length-`n` vector with zeros off the support.
    pub fn to_dense(&self, n: usize) -> Result<Vec<f64>> {
        self.support.embed(&self.values, n)
    }
}

/// Score vector, the descending stable order over it, and the top-k support.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSelection {
    pub z: Vec<f64>,
    /// `order[i]` is the index holding the i-th largest score.
    pub order: Vec<usize>,
    pub support: SupportSet,
}

pub(crate) fn validate_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    Ok(())
}

fn scores_from(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let w: Vec<f64> = a.transpose_mul_vec(y)?.into_iter().map(|v| v * v).collect();
    gram(a)?.inverse()?.mul_vec(&w)
}

/// `z = (AᵀA)⁻¹ (Aᵀy)²`. Entries can be negative when the columns of `A`
/// are not orthogonal.
pub fn score(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} against {} rows",
            y.len(),
            a.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    QrLeastSquares::new(a)?;
    scores_from(a, y)
}

/// Sorts indices by descending score, equal scores keeping ascending index
/// order, and takes the first `k` as the support.
pub fn select_support(z: &[f64], k: usize) -> Result<ScoreSelection> {
    validate_k(k, z.len())?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("score vector"));
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    // slice::sort_by is stable
    order.sort_by(|&i, &j| z[j].partial_cmp(&z[i]).unwrap_or(Ordering::Equal));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    Ok(ScoreSelection {
        z: z.to_vec(),
        order,
        support: SupportSet::from_sorted(top),
    })
}

/// Fast k-sparse solve.
///
/// With `refit == false` the values are the entries of `A†y` on the selected
/// support, exactly as the closed form prescribes. With `refit == true` they
/// are re-solved by least squares restricted to that support; the two agree
/// when the columns are orthogonal.
pub fn fast_sparse_solve(
    a: &DenseMatrix,
    y: &[f64],
    k: usize,
    refit: bool,
) -> Result<SparseSolution> {
    fast_sparse_solve_with_scores(a, y, k, refit).map(|(sol, _)| sol)
}

/// As [`fast_sparse_solve`], also returning the score selection.
pub fn fast_sparse_solve_with_scores(
    a: &DenseMatrix,
    y: &[f64],
    k: usize,
    refit: bool,
) -> Result<(SparseSolution, ScoreSelection)> {
    validate_k(k, a.cols())?;
    let qr = QrLeastSquares::new(a)?;
    let x_pi = qr.solve(y)?;
    let selection = select_support(&scores_from(a, y)?, k)?;
    let support = selection.support.clone();
    let values = if refit {
        restricted_least_squares(a, &support, y)?
    } else {
        support.indices().iter().map(|&i| x_pi[i]).collect()
    };
    let sol = SparseSolution::assemble(a, y, support, values, SolveMethod::Fast, refit)?;
    Ok((sol, selection))
}
