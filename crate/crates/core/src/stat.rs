//! The two-proportion z-test on ranking indicators.
//!
//! Given two institutions with publication counts `n1`, `n2` and shares of
//! top-10% papers `p1`, `p2`, the test statistic is
//!
//! ```text
//! z = (p1 - p2) / sqrt( p (1 - p) (1/n1 + 1/n2) ),   p = (t1 + t2) / (n1 + n2)
//! ```
//!
//! where `t_i = p_i · n_i` are the reconstructed top-10% counts. The same
//! statistic tests one institution against an expected share by setting
//! `n2 = n1` and `p2` to the expectation (10% by construction of the
//! indicator).
//!
//! ```
//! use rankdiff::stat::{z_two_proportions, Proportion, SampleSize};
//!
//! let r = z_two_proportions(
//!     Proportion::new(0.2)?,
//!     SampleSize::new(1000)?,
//!     Proportion::new(0.1)?,
//!     SampleSize::new(1000)?,
//! )?;
//! assert!((r.z - 6.2622).abs() < 1e-3);
//! assert!(r.significant_at(0.01));
//! # Ok::<(), rankdiff::stat::StatError>(())
//! ```

use serde::Serialize;
use thiserror::Error;

use crate::normal::two_sided_p_value;

/// Rule-of-thumb floor for expected cell counts under the normal approximation.
pub const MIN_EXPECTED_CELL: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatError {
    #[error("proportion {0} is outside [0, 1]")]
    InvalidProportion(f64),
    #[error("sample size must be at least 1")]
    InvalidSampleSize,
    #[error("top count {count} is outside [0, {size}]")]
    InvalidTopCount { count: f64, size: u64 },
    #[error("pooled proportion is {0}; the z statistic is undefined when no or all papers are in the top decile")]
    DegeneratePooledProportion(f64),
    #[error("significance level {0} is outside (0, 1)")]
    InvalidLevel(f64),
    #[error("significance levels must be strictly decreasing")]
    UnorderedLevels,
    #[error("at least one significance level is required")]
    NoLevels,
    #[error("number of comparisons must be at least 1")]
    InvalidFamilySize,
}

/// A fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Proportion(f64);

impl Proportion {
    pub const ZERO: Proportion = Proportion(0.0);
    pub const ONE: Proportion = Proportion(1.0);

    pub fn new(value: f64) -> Result<Self, StatError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Proportion(value))
        } else {
            Err(StatError::InvalidProportion(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A publication count, at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SampleSize(u64);

impl SampleSize {
    pub fn new(value: u64) -> Result<Self, StatError> {
        if value >= 1 {
            Ok(SampleSize(value))
        } else {
            Err(StatError::InvalidSampleSize)
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Reconstructed number of top-10% papers. Kept real-valued: published
/// shares are rounded, so `p · n` is generally not an integer.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct TopCount(f64);

impl TopCount {
    pub fn new(value: f64, size: SampleSize) -> Result<Self, StatError> {
        if value >= 0.0 && value <= size.as_f64() {
            Ok(TopCount(value))
        } else {
            Err(StatError::InvalidTopCount {
                count: value,
                size: size.get(),
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `t = p · n`, unrounded.
pub fn top_count(p: Proportion, n: SampleSize) -> TopCount {
    // p ≤ 1 so the rounded product never exceeds n
    TopCount(p.0 * n.as_f64())
}

/// Pooled share `(t1 + t2) / (n1 + n2)`.
///
/// The result is clamped into the closed interval spanned by `t1/n1` and
/// `t2/n2`, which it lies in exactly; the clamp only absorbs rounding.
pub fn pooled_proportion(t1: TopCount, t2: TopCount, n1: SampleSize, n2: SampleSize) -> Proportion {
    let (n1, n2) = (n1.as_f64(), n2.as_f64());
    let pooled = (t1.0 + t2.0) / (n1 + n2);
    let (a, b) = (t1.0 / n1, t2.0 / n2);
    Proportion(pooled.clamp(a.min(b), a.max(b)))
}

/// Outcome of one z-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    pub pooled: Proportion,
    pub t_left: TopCount,
    pub t_right: TopCount,
    /// Set when some expected cell count `n·p` or `n·(1−p)` is below 5.
    pub approximation_warning: bool,
}

impl TestResult {
    pub fn significant_at(&self, alpha: f64) -> bool {
        significance_decision(self.p_value, alpha)
    }

    /// One decision per level, in the order given.
    pub fn decisions(&self, levels: &[f64]) -> Vec<LevelDecision> {
        levels
            .iter()
            .map(|&alpha| LevelDecision {
                alpha,
                significant: self.significant_at(alpha),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelDecision {
    pub alpha: f64,
    pub significant: bool,
}

/// Two-proportion z-test with pooled variance.
///
/// `sign(z) = sign(p1 − p2)`. Swapping the operands negates `z` exactly.
pub fn z_two_proportions(
    p1: Proportion,
    n1: SampleSize,
    p2: Proportion,
    n2: SampleSize,
) -> Result<TestResult, StatError> {
    let t1 = top_count(p1, n1);
    let t2 = top_count(p2, n2);
    let pooled = pooled_proportion(t1, t2, n1, n2);
    let p = pooled.get();
    if p <= 0.0 || p >= 1.0 {
        return Err(StatError::DegeneratePooledProportion(p));
    }

    let se = (p * (1.0 - p) * (1.0 / n1.as_f64() + 1.0 / n2.as_f64())).sqrt();
    let z = (p1.get() - p2.get()) / se;

    let q = 1.0 - p;
    let smallest_cell = [n1.as_f64() * p, n1.as_f64() * q, n2.as_f64() * p, n2.as_f64() * q]
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    Ok(TestResult {
        z,
        p_value: two_sided_p_value(z),
        pooled,
        t_left: t1,
        t_right: t2,
        approximation_warning: smallest_cell < MIN_EXPECTED_CELL,
    })
}

/// Observed share against an expected share over the same number of papers.
pub fn z_vs_expected(p: Proportion, n: SampleSize, expected: Proportion) -> Result<TestResult, StatError> {
    z_two_proportions(p, n, expected, n)
}

/// `p_value < alpha`, strictly.
pub fn significance_decision(p_value: f64, alpha: f64) -> bool {
    p_value < alpha
}

/// Per-test level `alpha / m` for a family of `m` tests.
pub fn bonferroni_adjust(alpha: f64, m: u64) -> f64 {
    alpha / m.max(1) as f64
}

/// Bonferroni-adjusted p-value `min(1, m·p)`.
pub fn bonferroni_p_value(p_value: f64, m: u64) -> f64 {
    (p_value * m.max(1) as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    #[default]
    None,
    Bonferroni,
}

/// Significance levels, expected share and family-wise correction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceConfig {
    levels: Vec<f64>,
    expected: Proportion,
    correction: Correction,
    comparisons: u64,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            levels: vec![0.05, 0.01],
            expected: Proportion(0.10),
            correction: Correction::None,
            comparisons: 1,
        }
    }
}

impl SignificanceConfig {
    /// Levels must lie in (0, 1) and be strictly decreasing.
    pub fn with_levels(mut self, levels: Vec<f64>) -> Result<Self, StatError> {
        validate_levels(&levels)?;
        self.levels = levels;
        Ok(self)
    }

    pub fn with_expected(mut self, expected: Proportion) -> Self {
        self.expected = expected;
        self
    }

    pub fn with_bonferroni(mut self, comparisons: u64) -> Result<Self, StatError> {
        if comparisons == 0 {
            return Err(StatError::InvalidFamilySize);
        }
        self.correction = Correction::Bonferroni;
        self.comparisons = comparisons;
        Ok(self)
    }

    pub fn without_correction(mut self) -> Self {
        self.correction = Correction::None;
        self.comparisons = 1;
        self
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn expected(&self) -> Proportion {
        self.expected
    }

    pub fn correction(&self) -> Correction {
        self.correction
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// Per-test level actually applied for nominal `alpha`.
    pub fn adjusted_level(&self, alpha: f64) -> f64 {
        match self.correction {
            Correction::None => alpha,
            Correction::Bonferroni => bonferroni_adjust(alpha, self.comparisons),
        }
    }

    /// Decisions after family-wise correction, keyed by the nominal level.
    pub fn adjusted_decisions(&self, result: &TestResult) -> Vec<LevelDecision> {
        self.levels
            .iter()
            .map(|&alpha| LevelDecision {
                alpha,
                significant: significance_decision(result.p_value, self.adjusted_level(alpha)),
            })
            .collect()
    }
}

pub fn validate_levels(levels: &[f64]) -> Result<(), StatError> {
    if levels.is_empty() {
        return Err(StatError::NoLevels);
    }
    if let Some(&bad) = levels.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(StatError::InvalidLevel(bad));
    }
    if levels.windows(2).any(|w| w[0] <= w[1]) {
        return Err(StatError::UnorderedLevels);
    }
    Ok(())
}
