//! Reading ranking tables.
//!
//! Input is UTF-8 delimited text with a header row. Blank lines and lines
//! starting with `#` are skipped; fields may be double-quoted. The
//! publication column holds the count P, the indicator column holds
//! PP_top10% either as a percentage (default, optionally with a trailing
//! `%`) or as a fraction.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::stat::{Proportion, SampleSize};

/// Below this many publications, `P · 0.10 < 5` and the normal
/// approximation is doubtful.
pub const SMALL_SAMPLE_THRESHOLD: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstitutionRecord {
    pub name: String,
    pub publications: SampleSize,
    pub pp_top10: Proportion,
}

impl InstitutionRecord {
    pub fn new(name: impl Into<String>, publications: u64, pp_top10: f64) -> Result<Self, crate::stat::StatError> {
        Ok(InstitutionRecord {
            name: name.into(),
            publications: SampleSize::new(publications)?,
            pp_top10: Proportion::new(pp_top10)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
pub enum PpUnit {
    #[default]
    Percent,
    Proportion,
}

impl PpUnit {
    fn scale(self) -> f64 {
        match self {
            PpUnit::Percent => 100.0,
            PpUnit::Proportion => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub pp_unit: PpUnit,
    pub name_column: String,
    pub publications_column: String,
    pub pp_column: String,
    pub delimiter: u8,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            pp_unit: PpUnit::Percent,
            name_column: "institution".into(),
            publications_column: "P".into(),
            pp_column: "PP_top10".into(),
            delimiter: b',',
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let cols = [&self.name_column, &self.publications_column, &self.pp_column];
        if cols.iter().any(|c| c.trim().is_empty()) {
            return Err(IngestError::InvalidConfig("column names must be non-empty".into()));
        }
        if cols[0] == cols[1] || cols[0] == cols[2] || cols[1] == cols[2] {
            return Err(IngestError::InvalidConfig("column names must be distinct".into()));
        }
        if self.delimiter == b'"' || self.delimiter == b'#' || self.delimiter == b'\n' {
            return Err(IngestError::InvalidConfig(format!(
                "delimiter {:?} is not allowed",
                self.delimiter as char
            )));
        }
        Ok(())
    }
}

/// Ingest failures. Line numbers are 1-based and count every physical line,
/// including comments and blanks.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid ingest configuration: {0}")]
    InvalidConfig(String),
    #[error("header has no column named {0:?}")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: institution {name:?} already appears on line {first_line}")]
    DuplicateInstitution { name: String, line: u64, first_line: u64 },
    #[error("line {line}: {reason}")]
    OutOfRange { line: u64, reason: String },
    #[error("input has no header row")]
    Empty,
    #[error("line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

impl IngestError {
    /// Line the error refers to, if any.
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::MalformedRow { line, .. }
            | IngestError::DuplicateInstitution { line, .. }
            | IngestError::OutOfRange { line, .. }
            | IngestError::Csv { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Input with comment and blank lines removed, plus the physical line
/// number of every kept line.
struct Filtered {
    bytes: Vec<u8>,
    lines: Vec<u64>,
}

impl Filtered {
    fn new<R: Read>(mut data: R) -> std::io::Result<Self> {
        let mut raw = Vec::new();
        data.read_to_end(&mut raw)?;
        let mut bytes = Vec::with_capacity(raw.len());
        let mut lines = Vec::new();
        for (idx, line) in raw.split(|&b| b == b'\n').enumerate() {
            let content = line.strip_suffix(b"\r").unwrap_or(line);
            if content.first() == Some(&b'#') || content.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            bytes.extend_from_slice(content);
            bytes.push(b'\n');
            lines.push(idx as u64 + 1);
        }
        Ok(Filtered { bytes, lines })
    }

    /// Physical line for a 1-based line of the filtered text.
    fn physical(&self, filtered_line: u64) -> u64 {
        let idx = filtered_line.saturating_sub(1) as usize;
        self.lines.get(idx).copied().unwrap_or(filtered_line)
    }

    fn csv_error(&self, err: csv::Error) -> IngestError {
        let line = self.physical(err.position().map(|p| p.line()).unwrap_or(0));
        IngestError::Csv { line, source: err }
    }
}

struct Columns {
    name: usize,
    publications: usize,
    pp: usize,
    width: usize,
}

fn locate_columns(header: &csv::StringRecord, config: &IngestConfig) -> Result<Columns, IngestError> {
    let find = |wanted: &str| {
        header
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == wanted)
            .ok_or_else(|| IngestError::MissingColumn(wanted.to_string()))
    };
    Ok(Columns {
        name: find(&config.name_column)?,
        publications: find(&config.publications_column)?,
        pp: find(&config.pp_column)?,
        width: header.len(),
    })
}

fn parse_publications(raw: &str, line: u64) -> Result<SampleSize, IngestError> {
    let value: u64 = match raw.parse::<u64>() {
        Ok(v) => v,
        // Accept "1234.0" but not fractional counts.
        Err(_) => match raw.parse::<f64>() {
            Ok(f) if f.is_finite() && f.fract() == 0.0 && f >= 0.0 => f as u64,
            Ok(f) if f.is_finite() && f < 1.0 => {
                return Err(IngestError::OutOfRange {
                    line,
                    reason: format!("P = {raw} is below 1"),
                })
            }
            _ => {
                return Err(IngestError::MalformedRow {
                    line,
                    reason: format!("P value {raw:?} is not a whole number"),
                })
            }
        },
    };
    SampleSize::new(value).map_err(|_| IngestError::OutOfRange {
        line,
        reason: format!("P = {raw} is below 1"),
    })
}

fn parse_pp(raw: &str, unit: PpUnit, line: u64) -> Result<Proportion, IngestError> {
    let number = raw.strip_suffix('%').unwrap_or(raw).trim();
    let value: f64 = number
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| IngestError::MalformedRow {
            line,
            reason: format!("PP_top10 value {raw:?} is not a number"),
        })?;
    let scale = unit.scale();
    if !(0.0..=scale).contains(&value) {
        return Err(IngestError::OutOfRange {
            line,
            reason: format!("PP_top10 = {raw} is outside [0, {scale}]"),
        });
    }
    Ok(Proportion::new((value / scale).min(1.0)).expect("range checked above"))
}

/// Parse a ranking table into records, in file order.
pub fn parse_ranking<R: Read>(data: R, config: &IngestConfig) -> Result<Vec<InstitutionRecord>, IngestError> {
    config.validate()?;
    let input = Filtered::new(data)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input.bytes.as_slice());

    let header = reader.headers().map_err(|e| input.csv_error(e))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(IngestError::Empty);
    }
    let cols = locate_columns(&header, config)?;

    let mut records = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(input.csv_error(e)),
        }
        let line = input.physical(row.position().map(|p| p.line()).unwrap_or(0));
        if row.len() != cols.width {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", cols.width, row.len()),
            });
        }
        let name = &row[cols.name];
        if name.is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                reason: "institution name is empty".into(),
            });
        }
        let publications = parse_publications(&row[cols.publications], line)?;
        let pp_top10 = parse_pp(&row[cols.pp], config.pp_unit, line)?;
        if let Some(&first_line) = seen.get(name) {
            return Err(IngestError::DuplicateInstitution {
                name: name.to_string(),
                line,
                first_line,
            });
        }
        seen.insert(name.to_string(), line);
        records.push(InstitutionRecord {
            name: name.to_string(),
            publications,
            pp_top10,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetWarning {
    SmallSample { name: String, publications: u64 },
    DegenerateProportion { name: String, pp_top10: f64 },
}

impl fmt::Display for DatasetWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetWarning::SmallSample { name, publications } => write!(
                f,
                "{name}: P = {publications} is below {SMALL_SAMPLE_THRESHOLD}; the normal approximation is doubtful"
            ),
            DatasetWarning::DegenerateProportion { name, pp_top10 } => write!(
                f,
                "{name}: PP_top10 = {pp_top10} is at the boundary; tests against similar rows will be undefined"
            ),
        }
    }
}

/// Soft checks on a parsed dataset. Never fails.
pub fn validate_dataset(records: &[InstitutionRecord]) -> Vec<DatasetWarning> {
    let mut warnings = Vec::new();
    for r in records {
        if r.publications.get() < SMALL_SAMPLE_THRESHOLD {
            warnings.push(DatasetWarning::SmallSample {
                name: r.name.clone(),
                publications: r.publications.get(),
            });
        }
        let pp = r.pp_top10.get();
        if pp == 0.0 || pp == 1.0 {
            warnings.push(DatasetWarning::DegenerateProportion {
                name: r.name.clone(),
                pp_top10: pp,
            });
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, unit: PpUnit) -> Result<Vec<InstitutionRecord>, IngestError> {
        let config = IngestConfig {
            pp_unit: unit,
            ..IngestConfig::default()
        };
        parse_ranking(text.as_bytes(), &config)
    }

    #[test]
    fn percent_row_is_normalised() {
        let recs = parse("institution,P,PP_top10\nLeiden Univ,10000,12.3\n", PpUnit::Percent).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].name, "Leiden Univ");
        assert_eq!(recs[0].publications.get(), 10000);
        assert!((recs[0].pp_top10.get() - 0.123).abs() < 1e-15);
    }

    #[test]
    fn proportion_zero() {
        let recs = parse("institution,P,PP_top10\nX,100,0.0\n", PpUnit::Proportion).unwrap();
        assert_eq!(recs[0].pp_top10.get(), 0.0);
    }

    #[test]
    fn out_of_range_names_line() {
        let err = parse("institution,P,PP_top10\nY,100,150\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::OutOfRange { line: 2, .. }), "{err:?}");
        let err = parse("institution,P,PP_top10\nY,100,1.5\n", PpUnit::Proportion).unwrap_err();
        assert!(matches!(err, IngestError::OutOfRange { line: 2, .. }), "{err:?}");
        let err = parse("institution,P,PP_top10\nY,0,10\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::OutOfRange { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn percent_sign_comments_blanks_and_quotes() {
        let text = "# Leiden-style export\ninstitution,P,PP_top10\n\n\"Univ, of A\",9000,11.0%\n# note\nB,800, 9.5 \n";
        let recs = parse(text, PpUnit::Percent).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].name, "Univ, of A");
        assert!((recs[0].pp_top10.get() - 0.11).abs() < 1e-15);
        assert!((recs[1].pp_top10.get() - 0.095).abs() < 1e-15);
    }

    #[test]
    fn columns_can_be_reordered_and_renamed() {
        let config = IngestConfig {
            name_column: "univ".into(),
            publications_column: "pubs".into(),
            pp_column: "top".into(),
            delimiter: b';',
            pp_unit: PpUnit::Proportion,
        };
        let text = "top;extra;univ;pubs\n0.2;x;A;10\n";
        let recs = parse_ranking(text.as_bytes(), &config).unwrap();
        assert_eq!(recs[0], InstitutionRecord::new("A", 10, 0.2).unwrap());
    }

    #[test]
    fn missing_column() {
        let err = parse("institution,P\nA,10\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(ref c) if c == "PP_top10"));
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let text = "institution,P,PP_top10\nA,10,1\n\n# c\nB,ten,1\n";
        let err = parse(text, PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 5, .. }), "{err:?}");

        let err = parse("institution,P,PP_top10\nA,10,1,extra\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, .. }), "{err:?}");

        let err = parse("institution,P,PP_top10\nA,10,abc\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, .. }), "{err:?}");

        let err = parse("institution,P,PP_top10\nA,10.5,1\n", PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn duplicates_rejected() {
        let err = parse("institution,P,PP_top10\nA,10,1\nB,10,1\nA,20,2\n", PpUnit::Percent).unwrap_err();
        assert!(
            matches!(err, IngestError::DuplicateInstitution { line: 4, first_line: 2, ref name } if name == "A"),
            "{err:?}"
        );
    }

    #[test]
    fn bad_config() {
        let config = IngestConfig {
            pp_column: "P".into(),
            ..IngestConfig::default()
        };
        assert!(matches!(
            parse_ranking(&b""[..], &config),
            Err(IngestError::InvalidConfig(_))
        ));
    }

    #[test]
    fn crlf_and_leading_comments_keep_line_numbers() {
        let text = "# exported 2011\r\n\r\ninstitution,P,PP_top10\r\nA,10,1\r\n# skip\r\nB,10,500\r\n";
        let err = parse(text, PpUnit::Percent).unwrap_err();
        assert!(matches!(err, IngestError::OutOfRange { line: 6, .. }), "{err:?}");
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse("", PpUnit::Percent), Err(IngestError::Empty)));
        assert!(parse("institution,P,PP_top10\n", PpUnit::Percent).unwrap().is_empty());
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let bytes = b"institution,P,PP_top10\nA,10,1\n\xff\xfe,10,1\n";
        let err = parse_ranking(&bytes[..], &IngestConfig::default()).unwrap_err();
        assert_eq!(err.line(), Some(3), "{err:?}");
    }

    #[test]
    fn dataset_warnings() {
        let big = InstitutionRecord::new("A", 10000, 0.123).unwrap();
        assert!(validate_dataset(&[big]).is_empty());

        let small = InstitutionRecord::new("B", 30, 0.1).unwrap();
        assert_eq!(
            validate_dataset(&[small]),
            vec![DatasetWarning::SmallSample {
                name: "B".into(),
                publications: 30
            }]
        );

        let zero = InstitutionRecord::new("C", 1000, 0.0).unwrap();
        assert_eq!(
            validate_dataset(&[zero]),
            vec![DatasetWarning::DegenerateProportion {
                name: "C".into(),
                pp_top10: 0.0
            }]
        );
    }
}
