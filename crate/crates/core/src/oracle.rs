//! Exhaustive best k-sparse search.
//!
//! Every k-subset of columns is solved by restricted least squares and the
//! smallest residual wins. Exact residual ties go to the lexicographically
//! smallest support, which makes the reduction order-independent: any split of
//! the subset stream into contiguous rank ranges, scanned by any number of
//! workers, returns the same solution bit for bit.

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{residual_norm, restricted_least_squares, DenseMatrix, SupportSet};
use crate::selector::{validate_k, SolveMethod, SparseSolution};

/// Default ceiling on `C(n, k)` for a brute-force run.
pub const MAX_SUBSETS: u128 = 10_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic stream of ascending k-subsets of `0..n`, optionally limited
/// to a contiguous range of ranks.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
    remaining: u128,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        validate_k(k, n)?;
        Self::ranks(n, k, 0..binomial(n, k))
    }

    /// Subsets with lexicographic rank in `ranks`.
    pub fn ranks(n: usize, k: usize, ranks: Range<u128>) -> Result<Self> {
        validate_k(k, n)?;
        let total = binomial(n, k);
        let end = ranks.end.min(total);
        if ranks.start >= end {
            return Ok(Self {
                n,
                current: None,
                remaining: 0,
            });
        }
        Ok(Self {
            n,
            current: Some(unrank(n, k, ranks.start)),
            remaining: end - ranks.start,
        })
    }
}

/// The subset of lexicographic rank `rank`.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let left = k - slot - 1;
        loop {
            // subsets starting with `next` at this slot
            let block = binomial(n - next - 1, left);
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

impl Iterator for Combinations {
    type Item = SupportSet;

    fn next(&mut self) -> Option<SupportSet> {
        if self.remaining == 0 {
            return None;
        }
        let cur = self.current.as_mut()?;
        let out = SupportSet::from_sorted(cur.clone());
        self.remaining -= 1;
        if self.remaining > 0 {
            let k = cur.len();
            let mut i = k;
            while i > 0 && cur[i - 1] == self.n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                self.remaining = 0;
            } else {
                cur[i - 1] += 1;
                for j in i..k {
                    cur[j] = cur[j - 1] + 1;
                }
            }
        }
        Some(out)
    }
}

/// All `C(n, k)` ascending subsets in lexicographic order.
pub fn enumerate_supports(n: usize, k: usize) -> Result<Combinations> {
    Combinations::new(n, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceOptions {
    /// Number of scanning threads; 0 and 1 both mean a single thread.
    pub workers: usize,
    /// Lift the [`MAX_SUBSETS`] guard.
    pub allow_large: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            allow_large: false,
        }
    }
}

/// Reduction order: smaller residual first, then smaller support.
fn better(a: &SparseSolution, b: &SparseSolution) -> bool {
    match a.residual.total_cmp(&b.residual) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.support < b.support,
    }
}

fn pick(a: Option<SparseSolution>, b: Option<SparseSolution>) -> Option<SparseSolution> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn scan(
    a: &DenseMatrix,
    y: &[f64],
    k: usize,
    ranks: Range<u128>,
) -> Result<Option<SparseSolution>> {
    let mut best: Option<SparseSolution> = None;
    for support in Combinations::ranks(a.cols(), k, ranks)? {
        let values = restricted_least_squares(a, &support, y)?;
        let full = support.embed(&values, a.cols())?;
        let residual = residual_norm(a, &full, y)?;
        let cand = SparseSolution {
            support,
            values,
            residual,
            method: SolveMethod::Brute,
            refit: true,
        };
        best = pick(best, Some(cand));
    }
    Ok(best)
}

/// Best k-sparse solution by exhaustive search over all k-subsets.
pub fn brute_force_solve(
    a: &DenseMatrix,
    y: &[f64],
    k: usize,
    opts: BruteForceOptions,
) -> Result<SparseSolution> {
    let n = a.cols();
    validate_k(k, n)?;
    if a.rows() <= n {
        return Err(Error::Dimension(format!(
            "design matrix must have more rows than columns, got {}x{n}",
            a.rows()
        )));
    }
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} against {} rows",
            y.len(),
            a.rows()
        )));
    }
    let total = binomial(n, k);
    if total > MAX_SUBSETS && !opts.allow_large {
        return Err(Error::TooManySubsets {
            count: total,
            limit: MAX_SUBSETS,
        });
    }

    let workers = (opts.workers.max(1) as u128).min(total) as usize;
    let best = if workers == 1 {
        scan(a, y, k, 0..total)?
    } else {
        let chunk = total.div_ceil(workers as u128);
        let parts: Vec<Result<Option<SparseSolution>>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers as u128)
                .map(|w| {
                    let lo = (w * chunk).min(total);
                    let hi = ((w + 1) * chunk).min(total);
                    s.spawn(move || scan(a, y, k, lo..hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("oracle worker panicked"))
                .collect()
        });
        // Errors surface in rank order so the reported subset does not depend
        // on thread timing.
        let mut best = None;
        for part in parts {
            best = pick(best, part?);
        }
        best
    };
    best.ok_or(Error::BadK { k, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sets(it: Combinations) -> Vec<Vec<usize>> {
        it.map(|s| s.indices().to_vec()).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            sets(enumerate_supports(3, 2).unwrap()),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(
            sets(enumerate_supports(4, 1).unwrap()),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );
        assert_eq!(
            sets(enumerate_supports(5, 5).unwrap()),
            vec![vec![0, 1, 2, 3, 4]]
        );
        assert_eq!(
            enumerate_supports(3, 0).unwrap_err(),
            Error::BadK { k: 0, n: 3 }
        );
        assert_eq!(
            enumerate_supports(3, 4).unwrap_err(),
            Error::BadK { k: 4, n: 3 }
        );
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(20, 5), 15504);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn rank_ranges_tile_the_stream() {
        for (n, k) in [(7, 3), (9, 4), (6, 1), (6, 6), (10, 2)] {
            let all = sets(enumerate_supports(n, k).unwrap());
            assert_eq!(all.len() as u128, binomial(n, k));
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted, all);
            for cut in 0..=all.len() as u128 {
                let mut joined = sets(Combinations::ranks(n, k, 0..cut).unwrap());
                joined.extend(sets(Combinations::ranks(n, k, cut..u128::MAX).unwrap()));
                assert_eq!(joined, all);
            }
        }
    }

    #[test]
    fn brute_examples() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap();
        let s = brute_force_solve(&a, &[3.0, 2.0, 5.0], 1, Default::default()).unwrap();
        assert_eq!(s.support.indices(), &[0]);
        assert_relative_eq!(s.residual, 29f64.sqrt(), epsilon = 1e-14);
        assert_eq!(s.method, SolveMethod::Brute);

        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let s = brute_force_solve(&a, &[1.0, -1.0, 0.0], 1, Default::default()).unwrap();
        assert_eq!(s.support.indices(), &[0]);
        assert_relative_eq!(s.values[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.residual, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_tie_goes_to_smallest_support() {
        let a = DenseMatrix::from_rows(&[
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
        ])
        .unwrap();
        let y = [1.0, 1.0, 1.0, 0.0];
        for workers in [1, 2, 3, 8] {
            let opts = BruteForceOptions {
                workers,
                ..Default::default()
            };
            assert_eq!(
                brute_force_solve(&a, &y, 1, opts)
                    .unwrap()
                    .support
                    .indices(),
                &[0]
            );
            assert_eq!(
                brute_force_solve(&a, &y, 2, opts)
                    .unwrap()
                    .support
                    .indices(),
                &[0, 1]
            );
        }
    }

    #[test]
    fn subset_guard() {
        let rows: Vec<Vec<f64>> = (0..41)
            .map(|i| (0..40).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let err = brute_force_solve(&a, &[0.0; 41], 20, Default::default()).unwrap_err();
        assert!(matches!(err, Error::TooManySubsets { .. }));
    }

    #[test]
    fn failing_subset_is_identified() {
        let a = DenseMatrix::from_rows(&[
            [1.0, 2.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ])
        .unwrap();
        for workers in [1, 3] {
            let opts = BruteForceOptions {
                workers,
                ..Default::default()
            };
            match brute_force_solve(&a, &[1.0, 0.0, 0.0, 0.0], 2, opts) {
                Err(Error::IllConditioned { support, .. }) => {
                    assert_eq!(support, Some(vec![0, 1]))
                }
                other => panic!("expected IllConditioned, got {other:?}"),
            }
        }
    }
}
