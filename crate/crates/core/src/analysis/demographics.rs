use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::rubric::Arm;
use crate::stats::{logistic_irls, Coefficient, LogisticOptions, StatsError};

use super::{adapter, LoadError};

/// Participant characteristics: one row per participant, every column other
/// than the id and arm treated as a categorical predictor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Demographics {
    pub predictors: Vec<String>,
    pub rows: Vec<DemographicRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemographicRow {
    pub participant_id: String,
    pub arm: Arm,
    /// Recoded values in predictor order; `None` when missing.
    pub values: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationCheck {
    /// Outcome coded 1 for SOPHIE, 0 for Control.
    pub outcome: String,
    pub n_used: usize,
    pub n_dropped: usize,
    /// Predictors with fewer than two observed levels after deletion.
    pub constant_predictors: Vec<String>,
    /// Reference level dropped for each predictor.
    pub reference_levels: BTreeMap<String, String>,
    pub coefficients: Vec<Coefficient>,
    pub iterations: usize,
    pub any_significant: bool,
}

impl Demographics {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader(r: impl Read) -> Result<Self, LoadError> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(r);
        let headers = rdr
            .headers()
            .map_err(|e| LoadError::Parse { line: 1, column: 0, message: e.to_string() })?
            .clone();
        let find = |names: &[&str]| headers.iter().position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)));
        let schema = |line, message: String| LoadError::Schema { line, column: 0, message };
        let id_col = find(adapter::DEMOGRAPHICS_ID).ok_or_else(|| schema(1, "missing column participant_id".into()))?;
        let arm_col = find(adapter::DEMOGRAPHICS_ARM).ok_or_else(|| schema(1, "missing column arm".into()))?;
        let pred_cols: Vec<usize> = (0..headers.len()).filter(|&i| i != id_col && i != arm_col).collect();
        let predictors: Vec<String> = pred_cols.iter().map(|&i| headers[i].trim().to_string()).collect();

        let mut rows = Vec::new();
        let mut ids = BTreeSet::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| LoadError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                column: 0,
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let pid = rec[id_col].trim().to_string();
            if !ids.insert(pid.clone()) {
                return Err(schema(line, format!("participant {pid} listed twice")));
            }
            let arm = adapter::parse_arm(&rec[arm_col])
                .ok_or_else(|| LoadError::Schema { line, column: arm_col + 1, message: format!("unknown arm {:?}", &rec[arm_col]) })?;
            let values = pred_cols
                .iter()
                .zip(&predictors)
                .map(|(&i, name)| {
                    let raw = rec[i].trim();
                    if adapter::MISSING.contains(&raw.to_ascii_lowercase().as_str()) {
                        None
                    } else {
                        Some(adapter::recode_demographic(name, raw))
                    }
                })
                .collect();
            rows.push(DemographicRow { participant_id: pid, arm, values });
        }
        if rows.is_empty() {
            return Err(LoadError::Parse { line: 2, column: 1, message: "no data rows".into() });
        }
        Ok(Self { predictors, rows })
    }
}

/// Logistic regression of arm on dummy-coded predictors after listwise
/// deletion. The reference level of each predictor is its first level in
/// sorted order.
pub fn randomization_check(d: &Demographics, opts: LogisticOptions) -> Result<RandomizationCheck, StatsError> {
    let complete: Vec<&DemographicRow> = d.rows.iter().filter(|r| r.values.iter().all(Option::is_some)).collect();
    let n_dropped = d.rows.len() - complete.len();
    let mut names = vec!["intercept".to_string()];
    let mut constant = Vec::new();
    let mut reference = BTreeMap::new();
    // (predictor index, level) per dummy column
    let mut dummies: Vec<(usize, String)> = Vec::new();
    for (j, p) in d.predictors.iter().enumerate() {
        let levels: BTreeSet<&str> = complete.iter().map(|r| r.values[j].as_deref().unwrap()).collect();
        let mut it = levels.into_iter();
        match it.next() {
            Some(first) if it.len() > 0 => {
                reference.insert(p.clone(), first.to_string());
                for level in it {
                    names.push(format!("{p}[{level}]"));
                    dummies.push((j, level.to_string()));
                }
            }
            _ => constant.push(p.clone()),
        }
    }
    let n = complete.len();
    let x = DMatrix::from_fn(n, names.len(), |i, c| {
        if c == 0 {
            1.0
        } else {
            let (j, level) = &dummies[c - 1];
            (complete[i].values[*j].as_deref() == Some(level.as_str())) as u8 as f64
        }
    });
    let y: Vec<f64> = complete.iter().map(|r| (r.arm == Arm::Sophie) as u8 as f64).collect();
    let fit = logistic_irls(&x, &y, &names, opts)?;
    let any_significant = fit.coefficients.iter().skip(1).any(|c| c.p < 0.05);
    Ok(RandomizationCheck {
        outcome: "arm == SOPHIE".into(),
        n_used: n,
        n_dropped,
        constant_predictors: constant,
        reference_levels: reference,
        coefficients: fit.coefficients,
        iterations: fit.iterations,
        any_significant,
    })
}
