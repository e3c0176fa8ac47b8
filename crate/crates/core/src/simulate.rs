//! Monte Carlo calibration of the z-test.
//!
//! Each trial draws top-10% counts from exact binomial distributions and
//! runs the same test the analysis uses. Trial `i` gets its own ChaCha8
//! stream (`seed_from_u64(seed)` then `set_stream(i)`), so reports are
//! bit-identical for a given seed regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::pair_count;
use crate::stat::{self, validate_levels, Correction, Proportion, SampleSize, StatError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("a family needs at least two institutions, got {0}")]
    TooFewInstitutions(usize),
    #[error(transparent)]
    Levels(#[from] StatError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSpec {
    pub true_p1: Proportion,
    pub true_p2: Proportion,
    pub n1: SampleSize,
    pub n2: SampleSize,
    pub trials: u64,
    pub levels: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub institutions: usize,
    pub n: SampleSize,
    pub true_p: Proportion,
    pub trials: u64,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub correction: Correction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpecEcho {
    TwoSample(CalibrationSpec),
    Family(FamilySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRate {
    pub alpha: f64,
    pub rejections: u64,
    /// Rejections over non-degenerate trials.
    pub rejection_rate: f64,
    /// `sqrt(α(1−α)/trials)`, the Monte Carlo noise of a calibrated test.
    pub binomial_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub rates: Vec<LevelRate>,
    pub trials: u64,
    pub degenerate_trials: u64,
    pub spec: SpecEcho,
}

impl CalibrationReport {
    pub fn rate_at(&self, alpha: f64) -> Option<f64> {
        self.rates.iter().find(|r| r.alpha == alpha).map(|r| r.rejection_rate)
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn binomial(n: SampleSize, p: Proportion) -> Binomial {
    Binomial::new(n.get(), p.get()).expect("p is in [0, 1]")
}

fn empirical(successes: u64, n: SampleSize) -> Proportion {
    Proportion::new(successes as f64 / n.get() as f64).expect("successes ≤ n")
}

/// Per-trial outcome: `None` if degenerate, else one flag per level.
type TrialOutcome = Option<Vec<bool>>;

fn tally(trials: u64, levels: &[f64], run: impl Fn(u64) -> TrialOutcome + Sync) -> (Vec<u64>, u64) {
    let zero = || (vec![0u64; levels.len()], 0u64);
    let add = |mut acc: (Vec<u64>, u64), outcome: TrialOutcome| {
        match outcome {
            Some(flags) => {
                for (count, hit) in acc.0.iter_mut().zip(flags) {
                    *count += hit as u64;
                }
            }
            None => acc.1 += 1,
        }
        acc
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .fold(zero, |acc, i| add(acc, run(i)))
            .reduce(zero, |mut a, b| {
                a.0.iter_mut().zip(b.0).for_each(|(x, y)| *x += y);
                (a.0, a.1 + b.1)
            })
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).fold(zero(), |acc, i| add(acc, run(i)))
    }
}

fn report(levels: &[f64], trials: u64, counts: (Vec<u64>, u64), spec: SpecEcho) -> CalibrationReport {
    let (rejections, degenerate) = counts;
    let valid = trials - degenerate;
    let rates = levels
        .iter()
        .zip(rejections)
        .map(|(&alpha, rejections)| LevelRate {
            alpha,
            rejections,
            rejection_rate: if valid == 0 {
                0.0
            } else {
                rejections as f64 / valid as f64
            },
            binomial_std_error: (alpha * (1.0 - alpha) / trials as f64).sqrt(),
        })
        .collect();
    CalibrationReport {
        rates,
        trials,
        degenerate_trials: degenerate,
        spec,
    }
}

/// Rejection rates of the two-sample test when counts are drawn from
/// `Binomial(n1, true_p1)` and `Binomial(n2, true_p2)`.
pub fn simulate_two_sample(spec: &CalibrationSpec) -> Result<CalibrationReport, SimError> {
    if spec.trials == 0 {
        return Err(SimError::NoTrials);
    }
    validate_levels(&spec.levels)?;
    let d1 = binomial(spec.n1, spec.true_p1);
    let d2 = binomial(spec.n2, spec.true_p2);

    let counts = tally(spec.trials, &spec.levels, |trial| {
        let mut rng = trial_rng(spec.seed, trial);
        let t1 = d1.sample(&mut rng);
        let t2 = d2.sample(&mut rng);
        let result = stat::z_two_proportions(empirical(t1, spec.n1), spec.n1, empirical(t2, spec.n2), spec.n2).ok()?;
        Some(spec.levels.iter().map(|&a| result.significant_at(a)).collect())
    });
    Ok(report(
        &spec.levels,
        spec.trials,
        counts,
        SpecEcho::TwoSample(spec.clone()),
    ))
}

/// Family-wise error rate: each trial draws `institutions` null counts from
/// `Binomial(n, true_p)` and rejects if any pair is significant (after
/// correction, if any). A trial is degenerate only if no pair is testable.
pub fn simulate_family(spec: &FamilySpec) -> Result<CalibrationReport, SimError> {
    if spec.trials == 0 {
        return Err(SimError::NoTrials);
    }
    if spec.institutions < 2 {
        return Err(SimError::TooFewInstitutions(spec.institutions));
    }
    validate_levels(&spec.levels)?;
    let m = match spec.correction {
        Correction::None => 1,
        Correction::Bonferroni => pair_count(spec.institutions),
    };
    let thresholds: Vec<f64> = spec.levels.iter().map(|&a| stat::bonferroni_adjust(a, m)).collect();
    let dist = binomial(spec.n, spec.true_p);
    let k = spec.institutions;

    let counts = tally(spec.trials, &spec.levels, |trial| {
        let mut rng = trial_rng(spec.seed, trial);
        let shares: Vec<Proportion> = (0..k).map(|_| empirical(dist.sample(&mut rng), spec.n)).collect();
        let mut any_testable = false;
        let mut hits = vec![false; thresholds.len()];
        for i in 0..k {
            for j in i + 1..k {
                let Ok(r) = stat::z_two_proportions(shares[i], spec.n, shares[j], spec.n) else {
                    continue;
                };
                any_testable = true;
                for (hit, &t) in hits.iter_mut().zip(&thresholds) {
                    *hit |= stat::significance_decision(r.p_value, t);
                }
            }
        }
        any_testable.then_some(hits)
    });
    Ok(report(
        &spec.levels,
        spec.trials,
        counts,
        SpecEcho::Family(spec.clone()),
    ))
}
