//! Argument handling for `sicstats`, kept out of `main` so it can be tested.

use std::path::{Path, PathBuf};

use clap::Parser;

use sic_core::analysis::{
    analyze, render_text, AnalysisError, AnalysisOptions, Demographics, LoadError, PowerParams, RatingsDataset,
    Sections, StatsReport,
};
use sic_core::rubric::Normalization;
use sic_core::stats::{IccVariant, Sided};

/// Exit status for bad arguments, unreadable input and analysis errors.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when the report can't be written.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "sicstats", version, about = "Trial statistics over the communication-skills ratings dataset")]
pub struct Args {
    /// Ratings CSV (one row per rater per conversation). Only `--power` runs without it.
    #[arg(long)]
    pub ratings: Option<PathBuf>,

    /// Where to write the JSON report
    #[arg(long)]
    pub out: PathBuf,

    /// Per-arm pre/post table with between-arm tests
    #[arg(long)]
    pub table3: bool,

    /// Third-party rater agreement
    #[arg(long)]
    pub icc: bool,

    /// Empower baseline subset: keep Control at or below UPPER, SOPHIE at or above LOWER
    #[arg(long, value_name = "UPPER,LOWER", value_parser = parse_sensitivity)]
    pub sensitivity: Option<(f64, f64)>,

    /// Sample size per arm, e.g. 0.82,0.05,0.8,two
    #[arg(long, value_name = "D,ALPHA,POWER,SIDED", value_parser = parse_power)]
    pub power: Option<PowerParams>,

    /// Demographics CSV for the logistic randomization check
    #[arg(long, value_name = "CSV")]
    pub randomization_check: Option<PathBuf>,

    #[arg(long, default_value = "eq1", value_parser = parse_normalization)]
    pub normalization: Normalization,

    /// Require exactly 1 SP and 4 TP ratings per conversation
    #[arg(long)]
    pub strict: bool,

    /// Welch tests between arms instead of pooled variance
    #[arg(long)]
    pub welch: bool,

    /// ICC variant quoted as the headline value
    #[arg(long, default_value = "ICC2k", value_parser = parse_icc_variant)]
    pub icc_variant: IccVariant,

    /// Also write the text tables to this file
    #[arg(long, value_name = "PATH")]
    pub text: Option<PathBuf>,

    /// Don't print the text tables
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Write { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load(_) | CliError::Analysis(_) | CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Write { .. } => EXIT_IO,
        }
    }
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got {}", parts.len()));
    }
    parts.iter().map(|p| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

pub fn parse_sensitivity(s: &str) -> Result<(f64, f64), String> {
    let v = floats(s, 2)?;
    for x in &v {
        if !(0.0..=1.0).contains(x) {
            return Err(format!("threshold {x} outside [0, 1]"));
        }
    }
    Ok((v[0], v[1]))
}

pub fn parse_power(s: &str) -> Result<PowerParams, String> {
    let (nums, sided) = s.rsplit_once(',').ok_or("expected d,alpha,power,sided")?;
    let v = floats(nums, 3)?;
    Ok(PowerParams { d: v[0], alpha: v[1], power: v[2], sided: sided.parse::<Sided>()? })
}

pub fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse()
}

pub fn parse_icc_variant(s: &str) -> Result<IccVariant, String> {
    s.parse()
}

impl Args {
    /// Sections to compute. With no section flag, the table and ICC.
    pub fn sections(&self) -> Sections {
        if !self.table3 && !self.icc && self.sensitivity.is_none() && self.power.is_none() {
            return Sections::default();
        }
        Sections { table3: self.table3, icc: self.icc, sensitivity: self.sensitivity, power: self.power }
    }

    pub fn options(&self) -> AnalysisOptions {
        let mut o = AnalysisOptions { welch: self.welch, icc_variant: self.icc_variant, ..AnalysisOptions::default() };
        o.scoring.lenient = !self.strict;
        o.scoring.normalization = self.normalization;
        o
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Write { path: path.to_owned(), message: e.to_string() })
}

/// Loads the inputs, runs the analysis and writes the outputs. Returns the
/// report and its text rendering.
pub fn run(args: &Args) -> Result<(StatsReport, String), CliError> {
    let sections = args.sections();
    let needs_data = sections.table3 || sections.icc || sections.sensitivity.is_some() || args.randomization_check.is_some();
    let data = match &args.ratings {
        Some(p) => RatingsDataset::load(p)?,
        None if needs_data => return Err(CliError::Usage("--ratings is required unless only --power is given".into())),
        None => std::iter::empty().collect(),
    };
    let demographics = args.randomization_check.as_ref().map(Demographics::load).transpose()?;
    let report = analyze(&data, &args.options(), &sections, demographics.as_ref())?;
    write(&args.out, &report.to_json())?;
    let text = render_text(&report);
    if let Some(p) = &args.text {
        write(p, &text)?;
    }
    Ok((report, text))
}
