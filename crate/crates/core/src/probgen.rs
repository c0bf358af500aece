//! Seeded problem generation.
//!
//! Randomness comes from ChaCha8 keyed by the config seed. Each quantity draws
//! from its own stream of that key, so changing one does not shift the others:
//!
//! | stream | draws                                |
//! |--------|--------------------------------------|
//! | 0      | matrix entries (and resamples)       |
//! | 1      | column scales                        |
//! | 2      | dense coefficient vector `x*`        |
//! | 3      | right-hand side noise                |

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{orthogonality_check, DEFAULT_ORTHOGONALITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const STREAM_MATRIX: u64 = 0;
const STREAM_SCALES: u64 = 1;
const STREAM_COEFFS: u64 = 2;
const STREAM_NOISE: u64 = 3;

const ORTHOGONAL_ATTEMPTS: usize = 3;
const GENERAL_ATTEMPTS: usize = 10;

/// Minimum coherence of a generated general instance.
pub const GENERAL_MIN_COHERENCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    /// Column norms of orthogonal instances are drawn uniformly from `[lo, hi]`.
    pub scale_range: (f64, f64),
    /// Standard deviation of the noise added to `y`.
    pub noise: f64,
}

impl GenConfig {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            seed,
            scale_range: (0.5, 3.0),
            noise: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m <= self.n {
            return Err(Error::Dimension(format!(
                "need m > n >= 1, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Gen(format!("bad scale range [{lo}, {hi}]")));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Gen(format!("bad noise level {}", self.noise)));
        }
        Ok(())
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f64> {
    (0..m * n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `y = A x* + noise · g` with `x*` and `g` standard normal.
fn rhs(cfg: &GenConfig, a: &DenseMatrix) -> Result<Vec<f64>> {
    let mut coeffs = cfg.stream(STREAM_COEFFS);
    let x: Vec<f64> = (0..cfg.n).map(|_| coeffs.sample(StandardNormal)).collect();
    let mut noise = cfg.stream(STREAM_NOISE);
    let mut y = a.mul_vec(&x)?;
    for v in &mut y {
        let g: f64 = noise.sample(StandardNormal);
        *v += cfg.noise * g;
    }
    Ok(y)
}

/// Random matrix with mutually orthogonal columns of distinct norms, plus a
/// right-hand side. A pure function of `cfg`.
pub fn gen_orthogonal_instance(cfg: &GenConfig) -> Result<(DenseMatrix, Vec<f64>)> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    let mut entries = cfg.stream(STREAM_MATRIX);
    let mut q = None;
    for _ in 0..ORTHOGONAL_ATTEMPTS {
        let g = DMatrix::from_column_slice(m, n, &gaussian_matrix(&mut entries, m, n));
        let scale = g.norm();
        let qr = g.qr();
        let r = qr.r();
        if (0..n).all(|i| r[(i, i)].abs() > 1e-8 * scale) {
            q = Some(qr.q());
            break;
        }
    }
    let q = q.ok_or_else(|| {
        Error::Gen(format!(
            "orthonormalization degenerated {ORTHOGONAL_ATTEMPTS} times"
        ))
    })?;

    let (lo, hi) = cfg.scale_range;
    let mut scales = cfg.stream(STREAM_SCALES);
    let mut data = Vec::with_capacity(m * n);
    for j in 0..n {
        let c = if hi > lo {
            scales.random_range(lo..=hi)
        } else {
            lo
        };
        data.extend(q.column(j).iter().map(|v| v * c));
    }
    let a = DenseMatrix::from_col_major(m, n, data)?;
    let y = rhs(cfg, &a)?;
    Ok((a, y))
}

/// Standard-normal matrix, resampled until it passes the conditioning guard
/// and has coherence at least [`GENERAL_MIN_COHERENCE`].
pub fn gen_general_instance(cfg: &GenConfig) -> Result<(DenseMatrix, Vec<f64>)> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    let mut entries = cfg.stream(STREAM_MATRIX);
    for _ in 0..GENERAL_ATTEMPTS {
        let a = DenseMatrix::from_col_major(m, n, gaussian_matrix(&mut entries, m, n))?;
        match orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL) {
            Ok(d) if d.max_offdiag_coherence >= GENERAL_MIN_COHERENCE => {
                let y = rhs(cfg, &a)?;
                return Ok((a, y));
            }
            Ok(_) | Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Gen(format!(
        "no well-conditioned instance with coherence >= {GENERAL_MIN_COHERENCE} in {GENERAL_ATTEMPTS} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram;

    #[test]
    fn orthogonal_generation_is_deterministic() {
        let cfg = GenConfig::new(30, 6, 42);
        assert_eq!(
            gen_orthogonal_instance(&cfg).unwrap(),
            gen_orthogonal_instance(&cfg).unwrap()
        );
        let other = GenConfig::new(30, 6, 43);
        assert_ne!(
            gen_orthogonal_instance(&cfg).unwrap().0,
            gen_orthogonal_instance(&other).unwrap().0
        );
    }

    #[test]
    fn orthogonal_generation_is_orthogonal() {
        for seed in 0..20 {
            let (a, y) = gen_orthogonal_instance(&GenConfig::new(25, 7, seed)).unwrap();
            assert_eq!(y.len(), 25);
            let d = orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL).unwrap();
            assert!(
                d.max_offdiag_coherence <= 1e-12,
                "{}",
                d.max_offdiag_coherence
            );
            let lambdas = d.gram.diagonal();
            for l in lambdas {
                assert!((0.25 - 1e-12..=9.0 + 1e-12).contains(&l));
            }
        }
    }

    #[test]
    fn unit_scale_range_gives_orthonormal_columns() {
        let mut cfg = GenConfig::new(12, 4, 9);
        cfg.scale_range = (1.0, 1.0);
        let (a, _) = gen_orthogonal_instance(&cfg).unwrap();
        for l in gram(&a).unwrap().diagonal() {
            assert!((l - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_stream_is_independent_of_matrix_stream() {
        let mut cfg = GenConfig::new(15, 3, 5);
        let (a0, y0) = gen_orthogonal_instance(&cfg).unwrap();
        cfg.noise = 0.0;
        let (a1, y1) = gen_orthogonal_instance(&cfg).unwrap();
        assert_eq!(a0, a1);
        assert_ne!(y0, y1);
    }

    #[test]
    fn general_generation() {
        let cfg = GenConfig::new(3, 2, 11);
        let (a, _) = gen_general_instance(&cfg).unwrap();
        assert_eq!(gen_general_instance(&cfg).unwrap().0, a);
        let d = orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert!(!d.orthogonal);
        assert!(d.max_offdiag_coherence >= GENERAL_MIN_COHERENCE);

        assert!(matches!(
            gen_general_instance(&GenConfig::new(3, 3, 11)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = GenConfig::new(5, 2, 0);
        cfg.scale_range = (0.0, 1.0);
        assert!(cfg.validate().is_err());
        cfg.scale_range = (2.0, 1.0);
        assert!(cfg.validate().is_err());
        cfg.scale_range = (1.0, 2.0);
        cfg.noise = -1.0;
        assert!(cfg.validate().is_err());
    }
}
