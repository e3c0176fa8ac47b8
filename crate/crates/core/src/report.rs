//! Rendering results as text tables, CSV and JSON.
//!
//! Machine formats (CSV, JSON) carry every number rounded to 10
//! significant digits and contain nothing but data. Tables use 4 decimal
//! places.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{AnalysisError, ComparisonMatrix, PairComparison};
use crate::ingest::{IngestConfig, InstitutionRecord, PpUnit};
use crate::simulate::CalibrationReport;
use crate::stat::SignificanceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// Shortest decimal form of `x` rounded to 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded = round_sig10(x);
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn round_sig10(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}

/// p-value for tables: 4 decimals, 4-decimal mantissa below 1e-4, and
/// `<1e-15` below that.
pub fn format_table_p(p: f64) -> String {
    if p < 1e-15 {
        "<1e-15".into()
    } else if p < 1e-4 {
        format!("{p:.4e}")
    } else {
        fixed4(p)
    }
}

/// A set of comparisons sharing one configuration and family size.
#[derive(Debug, Clone)]
pub struct ComparisonReport<'a> {
    pub config: &'a SignificanceConfig,
    pub family_size: u64,
    pub comparisons: &'a [Result<PairComparison, AnalysisError>],
}

impl<'a> From<&'a ComparisonMatrix> for ComparisonReport<'a> {
    fn from(m: &'a ComparisonMatrix) -> Self {
        ComparisonReport {
            config: &m.config,
            family_size: m.family_size,
            comparisons: &m.comparisons,
        }
    }
}

fn level_label(alpha: f64) -> String {
    format!("{alpha}")
}

/// CSV/JSON column names, in order.
pub fn comparison_columns(levels: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = ["left", "right", "z", "p_value", "pooled_p", "t_left", "t_right"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(levels.iter().map(|a| format!("significant_{}", level_label(*a))));
    cols.extend(
        levels
            .iter()
            .map(|a| format!("adjusted_significant_{}", level_label(*a))),
    );
    cols.push("warning".into());
    cols.push("error".into());
    cols
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Text(String),
    Number(f64),
    Flag(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number(x) => format_sig10(*x),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Number(x) => serde_json::Number::from_f64(round_sig10(*x)).map_or(Value::Null, Value::Number),
            Cell::Flag(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

fn row_cells(entry: &Result<PairComparison, AnalysisError>, levels: &[f64]) -> Vec<Cell> {
    match entry {
        Ok(c) => {
            let r = &c.result;
            let mut cells = vec![
                Cell::Text(c.left.clone()),
                Cell::Text(c.right.clone()),
                Cell::Number(r.z),
                Cell::Number(r.p_value),
                Cell::Number(r.pooled.get()),
                Cell::Number(r.t_left.get()),
                Cell::Number(r.t_right.get()),
            ];
            cells.extend(c.significant_at.iter().map(|d| Cell::Flag(d.significant)));
            cells.extend(c.adjusted_significant_at.iter().map(|d| Cell::Flag(d.significant)));
            cells.push(if r.approximation_warning {
                Cell::Text("small-sample".into())
            } else {
                Cell::Empty
            });
            cells.push(Cell::Empty);
            cells
        }
        Err(err) => {
            let (left, right, msg) = match err {
                AnalysisError::Degenerate { left, right, source } => (left.clone(), right.clone(), source.to_string()),
                other => (String::new(), String::new(), other.to_string()),
            };
            let mut cells = vec![Cell::Text(left), Cell::Text(right)];
            cells.extend(std::iter::repeat_n(Cell::Empty, 5 + 2 * levels.len() + 1));
            cells.push(Cell::Text(format!("degenerate: {msg}")));
            cells
        }
    }
}

pub fn write_comparisons_csv<W: Write>(report: &ComparisonReport<'_>, out: W) -> io::Result<()> {
    let levels = report.config.levels();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(comparison_columns(levels)).map_err(io::Error::other)?;
    for entry in report.comparisons {
        let cells: Vec<String> = row_cells(entry, levels).iter().map(Cell::csv).collect();
        w.write_record(&cells).map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn comparisons_json(report: &ComparisonReport<'_>) -> Value {
    let levels = report.config.levels();
    let columns = comparison_columns(levels);
    let comparisons: Vec<Value> = report
        .comparisons
        .iter()
        .map(|entry| {
            let map: Map<String, Value> = columns
                .iter()
                .cloned()
                .zip(row_cells(entry, levels).iter().map(Cell::json))
                .collect();
            Value::Object(map)
        })
        .collect();
    json!({
        "config": config_json(report.config),
        "family_size": report.family_size,
        "comparisons": comparisons,
    })
}

fn config_json(config: &SignificanceConfig) -> Value {
    json!({
        "levels": config.levels(),
        "adjusted_levels": config.levels().iter().map(|&a| config.adjusted_level(a)).collect::<Vec<_>>(),
        "expected_proportion": config.expected().get(),
        "correction": config.correction(),
        "comparisons": config.comparisons(),
    })
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

/// Short verdict after correction: the strictest level met, or the
/// loosest level missed.
pub fn verdict(c: &PairComparison) -> String {
    match c.adjusted_significant_at.iter().rev().find(|d| d.significant) {
        Some(d) => format!("significant (p < {})", level_label(d.alpha)),
        None => match c.adjusted_significant_at.first() {
            Some(d) => format!("not significant (p ≥ {})", level_label(d.alpha)),
            None => "not significant".into(),
        },
    }
}

/// Direction of an observed-vs-expected result.
pub fn expectation_label(c: &PairComparison) -> &'static str {
    let significant = c.adjusted_significant_at.iter().any(|d| d.significant);
    match (significant, c.result.z > 0.0) {
        (false, _) => "consistent with expectation",
        (true, true) => "above expectation",
        (true, false) => "below expectation",
    }
}

/// Key/value block for a single comparison.
pub fn write_single_table<W: Write>(
    c: &PairComparison,
    config: &SignificanceConfig,
    family_size: u64,
    expected_mode: bool,
    mut out: W,
) -> io::Result<()> {
    let r = &c.result;
    let rows: Vec<(String, String)> = {
        let mut rows = vec![
            ("left".into(), c.left.clone()),
            ("right".into(), c.right.clone()),
            (
                "t (left / right)".into(),
                format!("{} / {}", fixed4(r.t_left.get()), fixed4(r.t_right.get())),
            ),
            ("pooled p".into(), fixed4(r.pooled.get())),
            ("z".into(), fixed4(r.z)),
            ("p (two-sided)".into(), format_table_p(r.p_value)),
            ("family size m".into(), family_size.to_string()),
        ];
        for (raw, adj) in c.significant_at.iter().zip(&c.adjusted_significant_at) {
            rows.push((
                format!("alpha {}", level_label(raw.alpha)),
                format!(
                    "raw {} | adjusted (< {}) {}",
                    yes_no(raw.significant),
                    format_sig10(config.adjusted_level(adj.alpha)),
                    yes_no(adj.significant)
                ),
            ));
        }
        rows.push(("verdict".into(), verdict(c)));
        if expected_mode {
            rows.push(("direction".into(), expectation_label(c).into()));
        }
        if r.approximation_warning {
            rows.push((
                "warning".into(),
                "expected cell count below 5; normal approximation doubtful".into(),
            ));
        }
        rows
    };
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<width$}  {v}")?;
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// One line per comparison.
pub fn write_comparisons_table<W: Write>(
    report: &ComparisonReport<'_>,
    expected_mode: bool,
    mut out: W,
) -> io::Result<()> {
    let config = report.config;
    writeln!(out, "family size m = {}", report.family_size)?;
    for &a in config.levels() {
        writeln!(
            out,
            "alpha {} -> per-test level {}",
            level_label(a),
            format_sig10(config.adjusted_level(a))
        )?;
    }
    let lw = report
        .comparisons
        .iter()
        .map(|e| side(e).0.chars().count())
        .max()
        .unwrap_or(4)
        .max(4);
    let rw = report
        .comparisons
        .iter()
        .map(|e| side(e).1.chars().count())
        .max()
        .unwrap_or(5)
        .max(5);
    writeln!(
        out,
        "{:<lw$}  {:<rw$}  {:>10}  {:>11}  verdict",
        "left", "right", "z", "p"
    )?;
    for entry in report.comparisons {
        let (l, r) = side(entry);
        match entry {
            Ok(c) => {
                let mut note = verdict(c);
                if expected_mode {
                    note = format!("{note}, {}", expectation_label(c));
                }
                if c.result.approximation_warning {
                    note.push_str(" [small-sample]");
                }
                writeln!(
                    out,
                    "{l:<lw$}  {r:<rw$}  {:>10}  {:>11}  {note}",
                    fixed4(c.result.z),
                    format_table_p(c.result.p_value)
                )?;
            }
            Err(_) => writeln!(
                out,
                "{l:<lw$}  {r:<rw$}  {:>10}  {:>11}  ERROR: degenerate pooled proportion",
                "-", "-"
            )?,
        }
    }
    Ok(())
}

fn side(entry: &Result<PairComparison, AnalysisError>) -> (&str, &str) {
    match entry {
        Ok(c) => (&c.left, &c.right),
        Err(AnalysisError::Degenerate { left, right, .. }) => (left, right),
        Err(_) => ("", ""),
    }
}

pub fn write_calibration_csv<W: Write>(report: &CalibrationReport, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha",
        "rejections",
        "valid_trials",
        "rejection_rate",
        "binomial_std_error",
    ])
    .map_err(io::Error::other)?;
    let valid = report.trials - report.degenerate_trials;
    for r in &report.rates {
        w.write_record([
            format_sig10(r.alpha),
            r.rejections.to_string(),
            valid.to_string(),
            format_sig10(r.rejection_rate),
            format_sig10(r.binomial_std_error),
        ])
        .map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn write_calibration_table<W: Write>(report: &CalibrationReport, mut out: W) -> io::Result<()> {
    writeln!(out, "trials {}  degenerate {}", report.trials, report.degenerate_trials)?;
    writeln!(
        out,
        "{:>8}  {:>10}  {:>8}  {:>8}",
        "alpha", "rejections", "rate", "MC s.e."
    )?;
    for r in &report.rates {
        writeln!(
            out,
            "{:>8}  {:>10}  {:>8}  {:>8}",
            level_label(r.alpha),
            r.rejections,
            fixed4(r.rejection_rate),
            fixed4(r.binomial_std_error)
        )?;
    }
    Ok(())
}

/// Write records back as a ranking table readable by
/// [`parse_ranking`](crate::ingest::parse_ranking) with the same config.
pub fn write_ranking<W: Write>(records: &[InstitutionRecord], config: &IngestConfig, out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(config.delimiter).from_writer(out);
    w.write_record([&config.name_column, &config.publications_column, &config.pp_column])
        .map_err(io::Error::other)?;
    let scale = match config.pp_unit {
        PpUnit::Percent => 100.0,
        PpUnit::Proportion => 1.0,
    };
    for r in records {
        let pp = (r.pp_top10.get() * scale).min(scale);
        w.write_record([r.name.clone(), r.publications.get().to_string(), format!("{pp}")])
            .map_err(io::Error::other)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{compare_pair, compare_to_expected, pairwise_matrix};
    use crate::ingest::parse_ranking;

    fn rec(name: &str, n: u64, pp: f64) -> InstitutionRecord {
        InstitutionRecord::new(name, n, pp).unwrap()
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(-0.0), "0");
        assert_eq!(format_sig10(6.262_242_910_851_495), "6.262242911");
        assert_eq!(format_sig10(0.05), "0.05");
        assert_eq!(format_sig10(4.008_016_032_064_128e-7), "4.008016032e-7");
        assert_eq!(format_sig10(1.523_970_604_832_105e-23), "1.523970605e-23");
        assert_eq!(format_sig10(124750.0), "124750");
        assert_eq!(format_sig10(-4.941_662_111_074_008), "-4.941662111");
    }

    #[test]
    fn table_p_formatting() {
        assert_eq!(format_table_p(1.0), "1.0000");
        assert_eq!(format_table_p(0.0499958), "0.0500");
        assert_eq!(format_table_p(6.188_458_781_738_718e-6), "6.1885e-6");
        assert_eq!(format_table_p(1e-23), "<1e-15");
    }

    #[test]
    fn csv_header_matches_documented_schema() {
        let header = comparison_columns(&[0.05, 0.01]).join(",");
        assert_eq!(
            header,
            "left,right,z,p_value,pooled_p,t_left,t_right,significant_0.05,significant_0.01,\
             adjusted_significant_0.05,adjusted_significant_0.01,warning,error"
        );
    }

    #[test]
    fn csv_and_json_agree() {
        let recs = [
            rec("A", 1000, 0.2),
            rec("B", 1000, 0.1),
            rec("C", 30, 0.1),
            rec("D", 100, 0.0),
            rec("E", 100, 0.0),
        ];
        let config = SignificanceConfig::default().with_bonferroni(1).unwrap();
        let m = pairwise_matrix(&recs, &config).unwrap();
        let report = ComparisonReport::from(&m);

        let mut buf = Vec::new();
        write_comparisons_csv(&report, &mut buf).unwrap();
        let json = comparisons_json(&report);
        assert_eq!(json["family_size"], 10);

        let mut reader = csv::Reader::from_reader(buf.as_slice());
        let header = reader.headers().unwrap().clone();
        let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        let objs = json["comparisons"].as_array().unwrap();
        assert_eq!(rows.len(), 10);
        for (row, obj) in rows.iter().zip(objs) {
            for (key, field) in header.iter().zip(row.iter()) {
                let v = &obj[key];
                let as_text = match v {
                    Value::Null => String::new(),
                    Value::Number(n) => format_sig10(n.as_f64().unwrap()),
                    Value::Bool(b) => b.to_string(),
                    Value::String(s) => s.clone(),
                    _ => unreachable!(),
                };
                assert_eq!(as_text, field, "column {key}");
            }
        }
        let degenerate = objs.iter().filter(|o| o["error"].is_string()).count();
        assert_eq!(degenerate, 1);
        assert!(objs.iter().any(|o| o["warning"] == "small-sample"));
    }

    #[test]
    fn verdicts_and_labels() {
        let config = SignificanceConfig::default();
        let strong = compare_pair(&rec("A", 1000, 0.2), &rec("B", 1000, 0.1), &config).unwrap();
        assert_eq!(verdict(&strong), "significant (p < 0.01)");
        let none = compare_pair(&rec("A", 1000, 0.1), &rec("B", 1000, 0.1), &config).unwrap();
        assert_eq!(verdict(&none), "not significant (p ≥ 0.05)");

        let above = compare_to_expected(&rec("A", 10000, 0.12), &config).unwrap();
        assert_eq!(expectation_label(&above), "above expectation");
        let below = compare_to_expected(&rec("A", 10000, 0.08), &config).unwrap();
        assert_eq!(expectation_label(&below), "below expectation");
        let met = compare_to_expected(&rec("A", 5000, 0.10), &config).unwrap();
        assert_eq!(expectation_label(&met), "consistent with expectation");
    }

    #[test]
    fn single_table_mentions_key_values() {
        let config = SignificanceConfig::default();
        let c = compare_pair(&rec("A", 1000, 0.2), &rec("B", 1000, 0.1), &config).unwrap();
        let mut buf = Vec::new();
        write_single_table(&c, &config, 1, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("6.2622"), "{text}");
        assert!(text.contains("significant (p < 0.01)"));
        assert!(text.contains("200.0000 / 100.0000"));
    }

    #[test]
    fn ranking_round_trip_with_quotes() {
        let recs = vec![
            rec("Univ, of A", 9000, 0.123),
            rec("B \"quoted\"", 50, 0.0),
            rec("C", 1, 1.0),
        ];
        for unit in [PpUnit::Percent, PpUnit::Proportion] {
            let config = IngestConfig {
                pp_unit: unit,
                ..IngestConfig::default()
            };
            let mut buf = Vec::new();
            write_ranking(&recs, &config, &mut buf).unwrap();
            let back = parse_ranking(buf.as_slice(), &config).unwrap();
            assert_eq!(back.len(), recs.len());
            for (a, b) in recs.iter().zip(&back) {
                assert_eq!(a.name, b.name);
                assert_eq!(a.publications, b.publications);
                assert!((a.pp_top10.get() - b.pp_top10.get()).abs() <= 1e-12);
            }
        }
    }
}
