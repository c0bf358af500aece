//! Seeded verification campaigns and the fast-versus-brute benchmark.
//!
//! Trial `t` of a campaign started with seed `s` uses instance seed `s + t`
//! (wrapping). Campaigns that filter generated instances try seeds
//! `s + t + j·2⁴⁰` for `j = 0, 1, …` and record the seed actually used, so
//! every record can be regenerated on its own.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    converse_witness_search, lemma1_condition, orthogonality_check, DEFAULT_ORTHOGONALITY_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{gram_condition, DenseMatrix};
use crate::oracle::{binomial, brute_force_solve, BruteForceOptions, MAX_SUBSETS};
use crate::probgen::{gen_general_instance, gen_orthogonal_instance, GenConfig};
use crate::selector::fast_sparse_solve;

/// Slack for the orthogonal forward check on the canonical right-hand sides.
pub const FORWARD_TOL: f64 = 1e-9;
/// Converse instances must be at least this far from orthogonal.
pub const CONVERSE_MIN_COHERENCE: f64 = 0.1;
/// Converse instances must have a Gram condition number at most this.
pub const CONVERSE_MAX_CONDITION: f64 = 1e6;
const FILTER_ATTEMPTS: u64 = 200;
const FILTER_STRIDE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Prop1,
    Prop2,
    Lemma1,
    Monotonicity,
}

impl Property {
    pub fn default_tol(self) -> f64 {
        match self {
            Property::Prop1 => 1e-9,
            Property::Prop2 => 1e-8,
            Property::Lemma1 => 1e-10,
            Property::Monotonicity => 1e-10,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Prop1 => "prop1",
            Property::Prop2 => "prop2",
            Property::Lemma1 => "lemma1",
            Property::Monotonicity => "monotonicity",
        })
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop1" => Ok(Property::Prop1),
            "prop2" => Ok(Property::Prop2),
            "lemma1" => Ok(Property::Lemma1),
            "monotonicity" => Ok(Property::Monotonicity),
            other => Err(Error::Parse(format!("unknown property {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub property: Property,
    pub trials: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub workers: usize,
}

impl VerifyConfig {
    pub fn new(property: Property, trials: usize, m: usize, n: usize, seed: u64) -> Self {
        Self {
            property,
            trials,
            m,
            n,
            seed,
            tol: property.default_tol(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// Sparsity level at which the deviation peaked, where that applies.
    pub k: Option<usize>,
    pub fast_residual: Option<f64>,
    pub brute_residual: Option<f64>,
    /// Converse witness gap (prop2 only).
    pub gap: Option<f64>,
    pub coherence: Option<f64>,
    pub lemma1_deviation: Option<f64>,
    pub deviation: f64,
    pub passed: bool,
}

impl TrialRecord {
    fn new(seed: u64, m: usize, n: usize) -> Self {
        Self {
            seed,
            m,
            n,
            k: None,
            fast_residual: None,
            brute_residual: None,
            gap: None,
            coherence: None,
            lemma1_deviation: None,
            deviation: 0.0,
            passed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub property: Property,
    pub trials: usize,
    pub failures: usize,
    pub worst_deviation: f64,
    pub config: VerifyConfig,
    pub records: Vec<TrialRecord>,
}

/// `|a − b| / (1 + b)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn brute_opts(workers: usize) -> BruteForceOptions {
    BruteForceOptions {
        workers,
        allow_large: false,
    }
}

pub fn run_campaign(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let total = binomial(cfg.n, cfg.n / 2);
    if total > MAX_SUBSETS {
        return Err(Error::TooManySubsets {
            count: total,
            limit: MAX_SUBSETS,
        });
    }
    let mut records = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(t as u64);
        let rec = match cfg.property {
            Property::Prop1 => prop1_trial(cfg, seed)?,
            Property::Prop2 => prop2_trial(cfg, seed)?,
            Property::Lemma1 => lemma1_trial(cfg, seed, t % 2 == 0)?,
            Property::Monotonicity => monotonicity_trial(cfg, seed)?,
        };
        records.push(rec);
    }
    let failures = records.iter().filter(|r| !r.passed).count();
    let worst_deviation = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(VerifyReport {
        property: cfg.property,
        trials: cfg.trials,
        failures,
        worst_deviation,
        config: cfg.clone(),
        records,
    })
}

fn prop1_trial(cfg: &VerifyConfig, seed: u64) -> Result<TrialRecord> {
    let (a, y) = gen_orthogonal_instance(&GenConfig::new(cfg.m, cfg.n, seed))?;
    let mut rec = TrialRecord::new(seed, cfg.m, cfg.n);
    for k in 1..=cfg.n {
        let fast = fast_sparse_solve(&a, &y, k, false)?;
        let brute = brute_force_solve(&a, &y, k, brute_opts(cfg.workers))?;
        let dev = relative_gap(fast.residual, brute.residual);
        if rec.k.is_none() || dev > rec.deviation {
            rec.k = Some(k);
            rec.deviation = dev;
            rec.fast_residual = Some(fast.residual);
            rec.brute_residual = Some(brute.residual);
        }
    }
    rec.passed = rec.deviation <= cfg.tol;
    Ok(rec)
}

/// A general instance with coherence at least [`CONVERSE_MIN_COHERENCE`] and
/// Gram condition at most [`CONVERSE_MAX_CONDITION`].
pub fn converse_instance(m: usize, n: usize, seed: u64) -> Result<(DenseMatrix, Vec<f64>, u64)> {
    for j in 0..FILTER_ATTEMPTS {
        let s = seed.wrapping_add(j.wrapping_mul(FILTER_STRIDE));
        let (a, y) = match gen_general_instance(&GenConfig::new(m, n, s)) {
            Ok(inst) => inst,
            Err(Error::Gen(_)) => continue,
            Err(e) => return Err(e),
        };
        let d = orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL)?;
        if d.max_offdiag_coherence >= CONVERSE_MIN_COHERENCE
            && gram_condition(&a)? <= CONVERSE_MAX_CONDITION
        {
            return Ok((a, y, s));
        }
    }
    Err(Error::Gen(format!(
        "no {m}x{n} instance with coherence >= {CONVERSE_MIN_COHERENCE} in {FILTER_ATTEMPTS} draws"
    )))
}

/// Largest `|fast − brute| / (1 + brute)` over the canonical right-hand sides
/// `yᵢ = A (AᵀA)⁻¹ eᵢ` at `k = 1`.
pub fn canonical_forward_deviation(a: &DenseMatrix, workers: usize) -> Result<f64> {
    let d = orthogonality_check(a, DEFAULT_ORTHOGONALITY_TOL)?;
    let n = a.cols();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let col: Vec<f64> = (0..n).map(|r| d.gram_inverse.get(r, i)).collect();
        let y = a.mul_vec(&col)?;
        let fast = fast_sparse_solve(a, &y, 1, false)?;
        let brute = brute_force_solve(a, &y, 1, brute_opts(workers))?;
        worst = worst.max(relative_gap(fast.residual, brute.residual));
    }
    Ok(worst)
}

fn prop2_trial(cfg: &VerifyConfig, seed: u64) -> Result<TrialRecord> {
    let (a, _, used) = converse_instance(cfg.m, cfg.n, seed)?;
    let mut rec = TrialRecord::new(used, cfg.m, cfg.n);
    rec.k = Some(1);
    rec.coherence = Some(orthogonality_check(&a, DEFAULT_ORTHOGONALITY_TOL)?.max_offdiag_coherence);
    let witness = converse_witness_search(&a, cfg.tol)?;
    if let Some(w) = &witness {
        rec.fast_residual = Some(w.fast_residual);
        rec.brute_residual = Some(w.brute_residual);
        rec.gap = Some(w.gap);
    }
    // forward direction on an orthogonal instance from the same seed
    let (ortho, _) = gen_orthogonal_instance(&GenConfig::new(cfg.m, cfg.n, seed))?;
    rec.deviation = canonical_forward_deviation(&ortho, cfg.workers)?;
    rec.passed = witness.is_some() && rec.deviation <= FORWARD_TOL;
    Ok(rec)
}

fn lemma1_trial(cfg: &VerifyConfig, seed: u64, orthogonal: bool) -> Result<TrialRecord> {
    let gen = GenConfig::new(cfg.m, cfg.n, seed);
    let (a, _) = if orthogonal {
        gen_orthogonal_instance(&gen)?
    } else {
        gen_general_instance(&gen)?
    };
    let d = orthogonality_check(&a, cfg.tol)?;
    let mut rec = TrialRecord::new(seed, cfg.m, cfg.n);
    rec.coherence = Some(d.max_offdiag_coherence);
    rec.lemma1_deviation = Some(d.max_lemma1_deviation());
    let agree = lemma1_condition(&d, cfg.tol) == d.orthogonal;
    rec.deviation = if agree { 0.0 } else { 1.0 };
    rec.passed = agree;
    Ok(rec)
}

/// Largest relative increase `(r_{k+1} − r_k) / (1 + r_k)`, or 0 when the
/// sequence never increases.
pub fn max_increase(residuals: &[f64]) -> f64 {
    residuals
        .windows(2)
        .map(|w| ((w[1] - w[0]) / (1.0 + w[0])).max(0.0))
        .fold(0.0, f64::max)
}

fn monotonicity_trial(cfg: &VerifyConfig, seed: u64) -> Result<TrialRecord> {
    let gen = GenConfig::new(cfg.m, cfg.n, seed);
    let (ortho, y_ortho) = gen_orthogonal_instance(&gen)?;
    let (general, y_general) = gen_general_instance(&gen)?;
    let mut fast = Vec::with_capacity(cfg.n);
    let mut brute_ortho = Vec::with_capacity(cfg.n);
    let mut brute_general = Vec::with_capacity(cfg.n);
    for k in 1..=cfg.n {
        fast.push(fast_sparse_solve(&ortho, &y_ortho, k, false)?.residual);
        brute_ortho.push(brute_force_solve(&ortho, &y_ortho, k, brute_opts(cfg.workers))?.residual);
        brute_general
            .push(brute_force_solve(&general, &y_general, k, brute_opts(cfg.workers))?.residual);
    }
    let mut rec = TrialRecord::new(seed, cfg.m, cfg.n);
    rec.deviation = max_increase(&fast)
        .max(max_increase(&brute_ortho))
        .max(max_increase(&brute_general));
    rec.passed = rec.deviation <= cfg.tol;
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub repeats: usize,
    pub seed: u64,
    pub workers: usize,
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub subsets: u128,
    /// Per-trial medians over `repeats` runs, in milliseconds.
    pub fast_ms: Vec<f64>,
    pub brute_ms: Vec<f64>,
    pub median_fast_ms: f64,
    pub median_brute_ms: f64,
    pub speedup: f64,
    /// Largest `|fast − brute| / (1 + brute)` residual gap seen.
    pub max_residual_deviation: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Median wall time of `f` over `repeats` runs, in milliseconds, and the last
/// result.
pub fn time_median<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        last = Some(out);
    }
    Ok((median(&times), last.expect("at least one repeat")))
}

/// Times the fast solver against the oracle on orthogonal instances.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let subsets = binomial(cfg.n, cfg.k);
    if subsets > MAX_SUBSETS && !cfg.force {
        return Err(Error::TooManySubsets {
            count: subsets,
            limit: MAX_SUBSETS,
        });
    }
    let opts = BruteForceOptions {
        workers: cfg.workers,
        allow_large: cfg.force,
    };
    let mut fast_ms = Vec::with_capacity(cfg.trials);
    let mut brute_ms = Vec::with_capacity(cfg.trials);
    let mut max_residual_deviation: f64 = 0.0;
    for t in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(t as u64);
        let (a, y) = gen_orthogonal_instance(&GenConfig::new(cfg.m, cfg.n, seed))?;
        let (tf, fast) = time_median(cfg.repeats, || fast_sparse_solve(&a, &y, cfg.k, false))?;
        let (tb, brute) = time_median(cfg.repeats, || brute_force_solve(&a, &y, cfg.k, opts))?;
        fast_ms.push(tf);
        brute_ms.push(tb);
        max_residual_deviation =
            max_residual_deviation.max(relative_gap(fast.residual, brute.residual));
    }
    let median_fast_ms = median(&fast_ms);
    let median_brute_ms = median(&brute_ms);
    Ok(BenchReport {
        config: cfg.clone(),
        subsets,
        fast_ms,
        brute_ms,
        median_fast_ms,
        median_brute_ms,
        speedup: median_brute_ms / median_fast_ms,
        max_residual_deviation,
    })
}
