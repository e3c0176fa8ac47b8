//! Running z-tests over institutions: one pair, one institution against
//! the expected share, and the full pairwise matrix with family-wise
//! correction.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::InstitutionRecord;
use crate::stat::{self, LevelDecision, SignificanceConfig, StatError, TestResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{left} vs {right}: {source}")]
    Degenerate {
        left: String,
        right: String,
        #[source]
        source: StatError,
    },
    #[error("at least two institutions are required, found {0}")]
    TooFewInstitutions(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub left: String,
    pub right: String,
    pub result: TestResult,
    /// Raw decisions at each configured level.
    pub significant_at: Vec<LevelDecision>,
    /// Decisions after correction, keyed by the nominal level.
    pub adjusted_significant_at: Vec<LevelDecision>,
}

impl PairComparison {
    fn new(left: String, right: String, result: TestResult, config: &SignificanceConfig) -> Self {
        PairComparison {
            significant_at: result.decisions(config.levels()),
            adjusted_significant_at: config.adjusted_decisions(&result),
            left,
            right,
            result,
        }
    }
}

/// Test `a` against `b`. Positive z means `a` has the larger share.
pub fn compare_pair(
    a: &InstitutionRecord,
    b: &InstitutionRecord,
    config: &SignificanceConfig,
) -> Result<PairComparison, AnalysisError> {
    stat::z_two_proportions(a.pp_top10, a.publications, b.pp_top10, b.publications)
        .map(|r| PairComparison::new(a.name.clone(), b.name.clone(), r, config))
        .map_err(|source| AnalysisError::Degenerate {
            left: a.name.clone(),
            right: b.name.clone(),
            source,
        })
}

/// Label used for the expected-value side, e.g. `EXPECTED(10%)`.
pub fn expected_label(expected: stat::Proportion) -> String {
    let pct = format!("{:.6}", expected.get() * 100.0);
    let pct = pct.trim_end_matches('0').trim_end_matches('.');
    format!("EXPECTED({pct}%)")
}

pub fn compare_to_expected(
    a: &InstitutionRecord,
    config: &SignificanceConfig,
) -> Result<PairComparison, AnalysisError> {
    let label = expected_label(config.expected());
    stat::z_vs_expected(a.pp_top10, a.publications, config.expected())
        .map(|r| PairComparison::new(a.name.clone(), label.clone(), r, config))
        .map_err(|source| AnalysisError::Degenerate {
            left: a.name.clone(),
            right: label,
            source,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    /// Institution names, sorted.
    pub institutions: Vec<String>,
    /// One entry per unordered pair, row-major over `institutions`;
    /// `left` sorts before `right`.
    pub comparisons: Vec<Result<PairComparison, AnalysisError>>,
    pub family_size: u64,
    pub config: SignificanceConfig,
}

impl ComparisonMatrix {
    pub fn degenerate_count(&self) -> usize {
        self.comparisons.iter().filter(|c| c.is_err()).count()
    }

    pub fn tested(&self) -> impl Iterator<Item = &PairComparison> {
        self.comparisons.iter().filter_map(|c| c.as_ref().ok())
    }
}

/// Number of unordered pairs among `k` items.
pub fn pair_count(k: usize) -> u64 {
    let k = k as u64;
    k * k.saturating_sub(1) / 2
}

/// All-pairs comparison. Under Bonferroni the family is every pair tested,
/// `m = k(k−1)/2`.
pub fn pairwise_matrix(
    records: &[InstitutionRecord],
    config: &SignificanceConfig,
) -> Result<ComparisonMatrix, AnalysisError> {
    pairwise_matrix_with_family(records, config, pair_count(records.len()))
}

/// All-pairs comparison with an explicit Bonferroni family size.
pub fn pairwise_matrix_with_family(
    records: &[InstitutionRecord],
    config: &SignificanceConfig,
    family_size: u64,
) -> Result<ComparisonMatrix, AnalysisError> {
    if records.len() < 2 {
        return Err(AnalysisError::TooFewInstitutions(records.len()));
    }
    let config = match config.correction() {
        stat::Correction::Bonferroni => config
            .clone()
            .with_bonferroni(family_size.max(1))
            .expect("family size is positive"),
        stat::Correction::None => config.clone(),
    };

    let mut order: Vec<&InstitutionRecord> = records.iter().collect();
    order.sort_by(|a, b| a.name.cmp(&b.name));

    let k = order.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let run = |&(i, j): &(usize, usize)| compare_pair(order[i], order[j], &config);

    #[cfg(feature = "parallel")]
    let comparisons = {
        use rayon::prelude::*;
        pairs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let comparisons = pairs.iter().map(run).collect();

    Ok(ComparisonMatrix {
        institutions: order.iter().map(|r| r.name.clone()).collect(),
        comparisons,
        family_size,
        config,
    })
}
