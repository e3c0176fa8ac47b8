//! Independent reference computations for tests. Nothing here calls into
//! the crate's statistics code.
#![allow(dead_code)]

/// Direct transcription of the pooled two-proportion z statistic.
pub fn direct_z(p1: f64, n1: u64, p2: f64, n2: u64) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    let t1 = p1 * n1;
    let t2 = p2 * n2;
    let p = (t1 + t2) / (n1 + n2);
    (p1 - p2) / (p * (1.0 - p) * (1.0 / n1 + 1.0 / n2)).sqrt()
}

/// Exact two-sided critical values from mpmath (findroot on 2(1 − Φ(x)) = α).
pub const CRITICAL_005: f64 = 1.959_963_984_540_054;
pub const CRITICAL_001: f64 = 2.575_829_303_548_901;
pub const CRITICAL_0001: f64 = 3.290_526_731_491_895;

/// Writes a ranking CSV to a temp file.
pub fn ranking_file(body: &str) -> tempfile::NamedTempFile {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().expect("temp file");
    f.write_all(body.as_bytes()).expect("write temp file");
    f
}

/// In-process CLI run: (exit code, stdout, stderr).
#[cfg(feature = "cli")]
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rankdiff").chain(args.iter().copied());
    let code = rankdiff::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
