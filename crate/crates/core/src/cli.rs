//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input (ingest errors, invalid flags or
//! values), 3 unknown institution, 4 degenerate test, 5 fewer than two
//! institutions for a matrix. Data goes to stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, AnalysisError, PairComparison};
use crate::ingest::{self, IngestConfig, InstitutionRecord, PpUnit};
use crate::report::{self, ComparisonReport, OutputFormat};
use crate::simulate::{self, CalibrationSpec, FamilySpec};
use crate::stat::{Correction, Proportion, SampleSize, SignificanceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN_INSTITUTION: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;
pub const EXIT_TOO_FEW: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "rankdiff",
    version,
    about = "Test differences in PP_top10% / Excellence Indicator values with the two-proportion z-test",
    long_about = "Test differences in PP_top10% / Excellence Indicator values with the two-proportion z-test.\n\n\
                  Significance is decided from exact two-sided p-values. The default levels 0.05 and 0.01 \
                  correspond to |z| > 1.96 and |z| > 2.576."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two institutions from a ranking file.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        left: String,
        right: String,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Compare institutions against the expected share of top-10% papers.
    Expected {
        #[command(flatten)]
        input: InputArgs,
        /// Institution to test (omit with --all).
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        /// Test every institution in the file.
        #[arg(long)]
        all: bool,
        /// Expected proportion (fraction, not percent).
        #[arg(long, default_value_t = 0.10)]
        expected: f64,
        #[command(flatten)]
        test: TestArgs,
    },
    /// All pairwise comparisons with Bonferroni correction over m = k(k-1)/2.
    Matrix {
        #[command(flatten)]
        input: InputArgs,
        /// Skip the family-wise correction.
        #[arg(long, conflicts_with = "bonferroni")]
        no_correction: bool,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Monte Carlo check of the test's rejection rates.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Ranking file (delimited text with a header row).
    file: PathBuf,
    /// How the PP_top10 column is encoded.
    #[arg(long, value_enum, default_value = "percent")]
    pp_unit: PpUnit,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, default_value = "institution")]
    name_column: String,
    #[arg(long, default_value = "P")]
    p_column: String,
    #[arg(long, default_value = "PP_top10")]
    pp_column: String,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// Significance level; repeat for several.
    #[arg(long = "alpha", default_values_t = [0.05, 0.01])]
    alphas: Vec<f64>,
    /// Bonferroni correction, optionally with an explicit family size m.
    #[arg(long, num_args = 0..=1, value_name = "M")]
    bonferroni: Option<Option<u64>>,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Null scenario: both sides share --p1.
    #[arg(long, conflicts_with = "p2")]
    null: bool,
    /// True proportion of the first (or every) institution.
    #[arg(long, default_value_t = 0.10)]
    p1: f64,
    /// True proportion of the second institution (defaults to --p1).
    #[arg(long)]
    p2: Option<f64>,
    /// Publications per institution.
    #[arg(long, default_value_t = 5000)]
    n: u64,
    #[arg(long)]
    n1: Option<u64>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "alpha", default_values_t = [0.05, 0.01])]
    alphas: Vec<f64>,
    /// Simulate a family of K null institutions and report the family-wise error rate.
    #[arg(long, value_name = "K")]
    family: Option<usize>,
    /// Bonferroni-correct the family (default).
    #[arg(long, conflicts_with = "no_correction")]
    bonferroni: bool,
    #[arg(long)]
    no_correction: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Run with explicit argument list and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let to_out = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if to_out {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_INPUT;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Compare {
            input,
            left,
            right,
            test,
        } => cmd_compare(&input, &left, &right, &test, out, err),
        Command::Expected {
            input,
            name,
            all: _,
            expected,
            test,
        } => cmd_expected(&input, name.as_deref(), expected, &test, out, err),
        Command::Matrix {
            input,
            no_correction,
            test,
        } => cmd_matrix(&input, no_correction, &test, out, err),
        Command::Calibrate(args) => cmd_calibrate(&args, out),
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::new(EXIT_INPUT, format!("write failed: {e}"))
}

fn load(input: &InputArgs, err: &mut dyn Write) -> Result<Vec<InstitutionRecord>, Failure> {
    if !input.delimiter.is_ascii() {
        return Err(Failure::new(EXIT_INPUT, "delimiter must be a single ASCII character"));
    }
    let config = IngestConfig {
        pp_unit: input.pp_unit,
        name_column: input.name_column.clone(),
        publications_column: input.p_column.clone(),
        pp_column: input.pp_column.clone(),
        delimiter: input.delimiter as u8,
    };
    let path = input.file.display();
    let file = File::open(&input.file).map_err(|e| Failure::new(EXIT_INPUT, format!("{path}: {e}")))?;
    let records = ingest::parse_ranking(BufReader::new(file), &config)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{path}: {e}")))?;
    for w in ingest::validate_dataset(&records) {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(records)
}

fn sorted_levels(alphas: &[f64]) -> Vec<f64> {
    let mut levels = alphas.to_vec();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    levels
}

fn base_config(alphas: &[f64]) -> Result<SignificanceConfig, Failure> {
    SignificanceConfig::default()
        .with_levels(sorted_levels(alphas))
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))
}

fn with_family(
    config: SignificanceConfig,
    bonferroni: Option<Option<u64>>,
    default_m: u64,
) -> Result<SignificanceConfig, Failure> {
    match bonferroni {
        None => Ok(config),
        Some(m) => config
            .with_bonferroni(m.unwrap_or(default_m))
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string())),
    }
}

fn find<'a>(records: &'a [InstitutionRecord], name: &str) -> Result<&'a InstitutionRecord, Failure> {
    records
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Failure::new(EXIT_UNKNOWN_INSTITUTION, format!("unknown institution {name:?}")))
}

fn degenerate(e: AnalysisError) -> Failure {
    Failure::new(EXIT_DEGENERATE, e.to_string())
}

fn emit(
    entries: &[Result<PairComparison, AnalysisError>],
    config: &SignificanceConfig,
    family_size: u64,
    format: OutputFormat,
    expected_mode: bool,
    single: bool,
    out: &mut dyn Write,
) -> Outcome {
    let report = ComparisonReport {
        config,
        family_size,
        comparisons: entries,
    };
    match format {
        OutputFormat::Csv => report::write_comparisons_csv(&report, out),
        OutputFormat::Json => report::write_json(&report::comparisons_json(&report), out),
        OutputFormat::Table => match (single, entries) {
            (true, [Ok(c)]) => report::write_single_table(c, config, family_size, expected_mode, out),
            _ => report::write_comparisons_table(&report, expected_mode, out),
        },
    }
    .map_err(io_failure)
}

fn cmd_compare(
    input: &InputArgs,
    left: &str,
    right: &str,
    test: &TestArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let records = load(input, err)?;
    let config = with_family(base_config(&test.alphas)?, test.bonferroni, 1)?;
    let a = find(&records, left)?;
    let b = find(&records, right)?;
    let comparison = analysis::compare_pair(a, b, &config).map_err(degenerate)?;
    if comparison.result.approximation_warning {
        let _ = writeln!(
            err,
            "warning: expected cell count below 5; normal approximation doubtful"
        );
    }
    emit(
        &[Ok(comparison)],
        &config,
        config.comparisons(),
        test.format,
        false,
        true,
        out,
    )
}

fn cmd_expected(
    input: &InputArgs,
    name: Option<&str>,
    expected: f64,
    test: &TestArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let records = load(input, err)?;
    let expected = Proportion::new(expected).map_err(|e| Failure::new(EXIT_INPUT, format!("--expected: {e}")))?;
    let base = base_config(&test.alphas)?.with_expected(expected);

    match name {
        Some(name) => {
            let config = with_family(base, test.bonferroni, 1)?;
            let rec = find(&records, name)?;
            let c = analysis::compare_to_expected(rec, &config).map_err(degenerate)?;
            emit(&[Ok(c)], &config, config.comparisons(), test.format, true, true, out)
        }
        None => {
            let config = with_family(base, test.bonferroni, records.len().max(1) as u64)?;
            let entries: Vec<_> = records
                .iter()
                .map(|r| analysis::compare_to_expected(r, &config))
                .collect();
            for e in entries.iter().filter_map(|e| e.as_ref().err()) {
                let _ = writeln!(err, "warning: {e}");
            }
            emit(&entries, &config, config.comparisons(), test.format, true, false, out)
        }
    }
}

fn cmd_matrix(
    input: &InputArgs,
    no_correction: bool,
    test: &TestArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let records = load(input, err)?;
    if records.len() < 2 {
        return Err(Failure::new(
            EXIT_TOO_FEW,
            AnalysisError::TooFewInstitutions(records.len()).to_string(),
        ));
    }
    let base = base_config(&test.alphas)?;
    let pairs = analysis::pair_count(records.len());
    let (config, family) = match (no_correction, test.bonferroni) {
        (true, _) => (base, pairs),
        (false, Some(Some(m))) => (with_family(base, Some(Some(m)), m)?, m),
        (false, _) => (with_family(base, Some(None), pairs)?, pairs),
    };
    let matrix = analysis::pairwise_matrix_with_family(&records, &config, family).map_err(|e| match e {
        AnalysisError::TooFewInstitutions(_) => Failure::new(EXIT_TOO_FEW, e.to_string()),
        other => degenerate(other),
    })?;
    let bad = matrix.degenerate_count();
    if bad > 0 {
        let _ = writeln!(
            err,
            "warning: {bad} pair(s) have a degenerate pooled proportion and were not tested"
        );
    }
    emit(
        &matrix.comparisons,
        &matrix.config,
        matrix.family_size,
        test.format,
        false,
        false,
        out,
    )
}

fn cmd_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Outcome {
    let invalid = |msg: String| Failure::new(EXIT_INPUT, msg);
    if args.trials == 0 {
        return Err(invalid("--trials must be at least 1".into()));
    }
    let p1 = Proportion::new(args.p1).map_err(|e| invalid(format!("--p1: {e}")))?;
    let p2 = match (args.null, args.p2) {
        (false, Some(p2)) => Proportion::new(p2).map_err(|e| invalid(format!("--p2: {e}")))?,
        _ => p1,
    };
    let size = |v: u64, flag: &str| SampleSize::new(v).map_err(|e| invalid(format!("{flag}: {e}")));
    let levels = sorted_levels(&args.alphas);

    let report = match args.family {
        Some(k) => simulate::simulate_family(&FamilySpec {
            institutions: k,
            n: size(args.n, "--n")?,
            true_p: p1,
            trials: args.trials,
            levels,
            seed: args.seed,
            correction: if args.no_correction {
                Correction::None
            } else {
                Correction::Bonferroni
            },
        }),
        None => simulate::simulate_two_sample(&CalibrationSpec {
            true_p1: p1,
            true_p2: p2,
            n1: size(args.n1.unwrap_or(args.n), "--n1")?,
            n2: size(args.n2.unwrap_or(args.n), "--n2")?,
            trials: args.trials,
            levels,
            seed: args.seed,
        }),
    }
    .map_err(|e| invalid(e.to_string()))?;

    match args.format {
        OutputFormat::Csv => report::write_calibration_csv(&report, out),
        OutputFormat::Json => report::write_json(&report, out),
        OutputFormat::Table => report::write_calibration_table(&report, out),
    }
    .map_err(io_failure)
}
