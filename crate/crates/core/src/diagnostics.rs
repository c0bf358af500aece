//! Numeric checks of when the fast solver is exact.
//!
//! The fast solver matches the oracle for every right-hand side and every `k`
//! when the columns of `A` are orthogonal. For `k = 1` the converse also holds:
//! if `(AᵀA)⁻¹ᵢᵢ · (AᵀA)ᵢᵢ = 1` for all `i` the Gram matrix is diagonal, and
//! otherwise one of the right-hand sides `yᵢ = A (AᵀA)⁻¹ eᵢ` separates the two
//! solvers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gram, DenseMatrix, GramMatrix, QrLeastSquares};
use crate::oracle::{brute_force_solve, BruteForceOptions};
use crate::selector::fast_sparse_solve;

pub const DEFAULT_ORTHOGONALITY_TOL: f64 = 1e-10;
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GramDiagnostics {
    pub gram: GramMatrix,
    pub gram_inverse: GramMatrix,
    /// `max_{i≠j} |Gᵢⱼ| / √(Gᵢᵢ Gⱼⱼ)`; zero for a single column.
    pub max_offdiag_coherence: f64,
    /// `|G⁻¹ᵢᵢ · Gᵢᵢ − 1|` per column.
    pub lemma1_deviation: Vec<f64>,
    pub orthogonal: bool,
    pub tol: f64,
}

impl GramDiagnostics {
    pub fn max_lemma1_deviation(&self) -> f64 {
        self.lemma1_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// A right-hand side on which the fast `k = 1` solution is strictly worse than
/// the best 1-sparse one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseWitness {
    pub index: usize,
    pub y: Vec<f64>,
    pub fast_residual: f64,
    pub brute_residual: f64,
    pub gap: f64,
}

fn coherence(g: &GramMatrix) -> f64 {
    let n = g.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            let c = g.get(i, j).abs() / (g.get(i, i) * g.get(j, j)).sqrt();
            worst = worst.max(c);
        }
    }
    worst
}

/// Builds the Gram matrix, its inverse and the orthogonality verdict
/// (`coherence <= tol`).
pub fn orthogonality_check(a: &DenseMatrix, tol: f64) -> Result<GramDiagnostics> {
    QrLeastSquares::new(a)?;
    let g = gram(a)?;
    let inv = g.inverse()?;
    let lemma1_deviation = (0..g.n())
        .map(|i| (inv.get(i, i) * g.get(i, i) - 1.0).abs())
        .collect();
    let max_offdiag_coherence = coherence(&g);
    Ok(GramDiagnostics {
        gram: g,
        gram_inverse: inv,
        max_offdiag_coherence,
        lemma1_deviation,
        orthogonal: max_offdiag_coherence <= tol,
        tol,
    })
}

/// True iff every `|G⁻¹ᵢᵢ · Gᵢᵢ − 1| <= tol`.
pub fn lemma1_condition(diag: &GramDiagnostics, tol: f64) -> bool {
    diag.lemma1_deviation.iter().all(|&d| d <= tol)
}

/// Runs the fast and exhaustive `k = 1` solvers on `yᵢ = A (AᵀA)⁻¹ eᵢ` for
/// each column `i` and returns the first `i` whose residual gap exceeds
/// `gap_tol`.
///
/// Returns `Ok(None)` for orthogonal `A`, and for nearly orthogonal `A` whose
/// gaps all fall below `gap_tol`. If no witness turns up although the Gram
/// matrix is not diagonal while every diagonal product `G⁻¹ᵢᵢ · Gᵢᵢ` equals 1,
/// the diagnostics contradict each other and an `Inconsistency` error is
/// returned.
pub fn converse_witness_search(a: &DenseMatrix, gap_tol: f64) -> Result<Option<ConverseWitness>> {
    if a.cols() < 2 {
        return Err(Error::Dimension(
            "witness search needs at least two columns".into(),
        ));
    }
    let diag = orthogonality_check(a, DEFAULT_ORTHOGONALITY_TOL)?;
    let n = a.cols();
    for i in 0..n {
        let column: Vec<f64> = (0..n).map(|r| diag.gram_inverse.get(r, i)).collect();
        let y = a.mul_vec(&column)?;
        let fast = fast_sparse_solve(a, &y, 1, false)?;
        let brute = brute_force_solve(a, &y, 1, BruteForceOptions::default())?;
        let gap = fast.residual - brute.residual;
        if gap > gap_tol {
            return Ok(Some(ConverseWitness {
                index: i,
                y,
                fast_residual: fast.residual,
                brute_residual: brute.residual,
                gap,
            }));
        }
    }
    if !diag.orthogonal && lemma1_condition(&diag, DEFAULT_ORTHOGONALITY_TOL) {
        return Err(Error::Inconsistency(format!(
            "coherence {:e} with all diagonal products equal to 1",
            diag.max_offdiag_coherence
        )));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag_fixture() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap()
    }

    fn coupled_fixture() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap()
    }

    #[test]
    fn orthogonal_fixture() {
        let d = orthogonality_check(&diag_fixture(), DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert_eq!(d.max_offdiag_coherence, 0.0);
        assert!(d.orthogonal);
        assert_eq!(d.lemma1_deviation, vec![0.0, 0.0]);
        assert!(lemma1_condition(&d, 1e-10));
    }

    #[test]
    fn coupled_fixture_diagnostics() {
        let d = orthogonality_check(&coupled_fixture(), DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert_relative_eq!(d.max_offdiag_coherence, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(!d.orthogonal);
        assert_relative_eq!(d.lemma1_deviation[0], 1.0, epsilon = 1e-13);
        assert_relative_eq!(d.lemma1_deviation[1], 1.0, epsilon = 1e-13);
        assert!(!lemma1_condition(&d, 1e-10));
    }

    #[test]
    fn rescaled_orthogonal_columns_still_satisfy_lemma1() {
        let a = diag_fixture().with_scaled_column(0, 7.5).unwrap();
        let d = orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert!(d.orthogonal);
        assert!(lemma1_condition(&d, 1e-10));
    }

    #[test]
    fn witness_on_coupled_fixture() {
        let w = converse_witness_search(&coupled_fixture(), DEFAULT_GAP_TOL)
            .unwrap()
            .expect("witness");
        assert_eq!(w.index, 0);
        for (got, want) in w.y.iter().zip([1.0, -1.0, 0.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
        assert_relative_eq!(w.fast_residual, 2f64.sqrt(), epsilon = 1e-13);
        assert_relative_eq!(w.brute_residual, 1.0, epsilon = 1e-13);
        assert_relative_eq!(w.gap, 2f64.sqrt() - 1.0, epsilon = 1e-13);
    }

    #[test]
    fn no_witness_for_orthogonal_columns() {
        assert_eq!(
            converse_witness_search(&diag_fixture(), DEFAULT_GAP_TOL).unwrap(),
            None
        );
    }

    #[test]
    fn witness_search_needs_two_columns() {
        let a = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(
            converse_witness_search(&a, DEFAULT_GAP_TOL),
            Err(Error::Dimension(_))
        ));
    }

    /// For `yᵢ = A G⁻¹ eᵢ` we have `Aᵀyᵢ = eᵢ` and `‖yᵢ‖² = jᵢᵢ`. The best single
    /// column is `i` with squared residual `jᵢᵢ − 1/pᵢᵢ`; the fast solver keeps
    /// column `r = argmax_r j_{ri}` with value `j_{ri}`, so its squared residual
    /// exceeds the optimum by `pᵢᵢ jᵢᵢ² − 2jᵢᵢ + 1/pᵢᵢ` when `r = i` and by
    /// `p_rr j_{ri}² + 1/pᵢᵢ` otherwise.
    #[test]
    fn squared_gap_matches_closed_form() {
        let a = DenseMatrix::from_rows(&[
            [1.0, 0.4, -0.2],
            [0.3, 1.1, 0.5],
            [-0.6, 0.2, 0.9],
            [0.1, -0.7, 0.3],
            [0.8, 0.0, -0.4],
        ])
        .unwrap();
        let d = orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        let (p, j) = (&d.gram, &d.gram_inverse);
        for i in 0..3 {
            let col: Vec<f64> = (0..3).map(|r| j.get(r, i)).collect();
            let y = a.mul_vec(&col).unwrap();
            let fast = fast_sparse_solve(&a, &y, 1, false).unwrap();
            let brute = brute_force_solve(&a, &y, 1, BruteForceOptions::default()).unwrap();
            assert_eq!(brute.support.indices(), &[i]);
            let r = fast.support.indices()[0];
            let expected = if r == i {
                p.get(i, i) * j.get(i, i).powi(2) - 2.0 * j.get(i, i) + 1.0 / p.get(i, i)
            } else {
                p.get(r, r) * j.get(r, i).powi(2) + 1.0 / p.get(i, i)
            };
            let got = fast.residual.powi(2) - brute.residual.powi(2);
            assert_relative_eq!(got, expected, max_relative = 1e-9);
            assert!(expected > 0.0);
        }
    }
}
