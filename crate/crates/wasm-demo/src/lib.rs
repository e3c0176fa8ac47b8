//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws. The
//! `*_json` functions hold the logic so they can be tested natively.

use rankdiff::analysis::{compare_pair, compare_to_expected, PairComparison};
use rankdiff::simulate::{simulate_family, FamilySpec};
use rankdiff::stat::{Correction, Proportion, SampleSize, SignificanceConfig};
use rankdiff::InstitutionRecord;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const LEVELS: [f64; 3] = [0.05, 0.01, 0.001];

fn config(bonferroni_m: u32) -> Result<SignificanceConfig, String> {
    let base = SignificanceConfig::default()
        .with_levels(LEVELS.to_vec())
        .map_err(|e| e.to_string())?;
    if bonferroni_m > 1 {
        base.with_bonferroni(bonferroni_m as u64).map_err(|e| e.to_string())
    } else {
        Ok(base)
    }
}

fn record(name: &str, pp_percent: f64, n: u32) -> Result<InstitutionRecord, String> {
    InstitutionRecord::new(name, n as u64, pp_percent / 100.0).map_err(|e| format!("{name}: {e}"))
}

fn comparison_json(c: &PairComparison, config: &SignificanceConfig) -> Value {
    let levels: Vec<Value> = c
        .significant_at
        .iter()
        .zip(&c.adjusted_significant_at)
        .map(|(raw, adj)| {
            json!({
                "alpha": raw.alpha,
                "per_test_alpha": config.adjusted_level(raw.alpha),
                "significant": raw.significant,
                "adjusted_significant": adj.significant,
            })
        })
        .collect();
    json!({
        "left": c.left,
        "right": c.right,
        "z": c.result.z,
        "p_value": c.result.p_value,
        "pooled_p": c.result.pooled.get(),
        "t_left": c.result.t_left.get(),
        "t_right": c.result.t_right.get(),
        "warning": c.result.approximation_warning,
        "verdict": rankdiff::report::verdict(c),
        "levels": levels,
    })
}

pub fn compare_pair_json(
    pp1_percent: f64,
    n1: u32,
    pp2_percent: f64,
    n2: u32,
    bonferroni_m: u32,
) -> Result<Value, String> {
    let config = config(bonferroni_m)?;
    let a = record("Institution A", pp1_percent, n1)?;
    let b = record("Institution B", pp2_percent, n2)?;
    let c = compare_pair(&a, &b, &config).map_err(|e| e.to_string())?;
    Ok(comparison_json(&c, &config))
}

pub fn compare_expected_json(pp_percent: f64, n: u32, expected_percent: f64) -> Result<Value, String> {
    let expected = Proportion::new(expected_percent / 100.0).map_err(|e| format!("expected: {e}"))?;
    let config = config(1)?.with_expected(expected);
    let a = record("Institution", pp_percent, n)?;
    let c = compare_to_expected(&a, &config).map_err(|e| e.to_string())?;
    let mut v = comparison_json(&c, &config);
    v["direction"] = json!(rankdiff::report::expectation_label(&c));
    Ok(v)
}

pub fn family_error_json(k: u32, n: u32, p_percent: f64, trials: u32, seed: u32) -> Result<Value, String> {
    let n = SampleSize::new(n as u64).map_err(|e| e.to_string())?;
    let true_p = Proportion::new(p_percent / 100.0).map_err(|e| e.to_string())?;
    let spec = |correction| FamilySpec {
        institutions: k as usize,
        n,
        true_p,
        trials: trials as u64,
        levels: vec![0.05],
        seed: seed as u64,
        correction,
    };
    let raw = simulate_family(&spec(Correction::None)).map_err(|e| e.to_string())?;
    let corrected = simulate_family(&spec(Correction::Bonferroni)).map_err(|e| e.to_string())?;
    let pairs = (k as u64) * (k as u64).saturating_sub(1) / 2;
    Ok(json!({
        "institutions": k,
        "pairs": pairs,
        "trials": trials,
        "uncorrected_rate": raw.rates[0].rejection_rate,
        "bonferroni_rate": corrected.rates[0].rejection_rate,
        "std_error": raw.rates[0].binomial_std_error,
        "independent_bound": 1.0 - 0.95f64.powf(pairs as f64),
        "degenerate_trials": raw.degenerate_trials,
    }))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Two institutions given as PP_top10% (percent) and publication count.
#[wasm_bindgen(js_name = comparePair)]
pub fn compare_pair_js(
    pp1_percent: f64,
    n1: u32,
    pp2_percent: f64,
    n2: u32,
    bonferroni_m: u32,
) -> Result<String, JsError> {
    to_js(compare_pair_json(pp1_percent, n1, pp2_percent, n2, bonferroni_m))
}

/// One institution against an expected percentage (10 for the top decile).
#[wasm_bindgen(js_name = compareExpected)]
pub fn compare_expected_js(pp_percent: f64, n: u32, expected_percent: f64) -> Result<String, JsError> {
    to_js(compare_expected_json(pp_percent, n, expected_percent))
}

/// Family-wise error over `k` null institutions, with and without Bonferroni.
#[wasm_bindgen(js_name = familyError)]
pub fn family_error_js(k: u32, n: u32, p_percent: f64, trials: u32, seed: u32) -> Result<String, JsError> {
    to_js(family_error_json(k, n, p_percent, trials, seed))
}
