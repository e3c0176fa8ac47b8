//! Statistical tests for differences between proportion-based ranking
//! indicators such as PP_top10% (Leiden Ranking) and the Excellence
//! Indicator (SCImago).
//!
//! - [`stat`]: the two-proportion z-test, p-values and Bonferroni helpers.
//! - [`ingest`]: ranking tables from delimited text.
//! - [`analysis`]: pair, observed-vs-expected and all-pairs comparisons.
//! - [`simulate`]: Monte Carlo calibration of rejection rates.
//! - [`report`]: table, CSV and JSON rendering.

pub mod analysis;
#[cfg(feature = "cli")]
pub mod cli;
pub mod ingest;
pub mod normal;
pub mod report;
pub mod simulate;
pub mod stat;

pub use analysis::{compare_pair, compare_to_expected, pairwise_matrix, ComparisonMatrix, PairComparison};
pub use ingest::{parse_ranking, IngestConfig, InstitutionRecord, PpUnit};
pub use normal::{standard_normal_cdf, two_sided_p_value};
pub use stat::{
    bonferroni_adjust, z_two_proportions, z_vs_expected, Correction, Proportion, SampleSize, SignificanceConfig,
    TestResult,
};
