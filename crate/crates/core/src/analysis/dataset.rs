use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rubric::{Arm, RaterRole, RubricRating, ITEM_COUNT};

use super::{adapter, LoadError, Order};

/// One row of the ratings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub participant_id: String,
    pub arm: Arm,
    pub order: Order,
    pub case_title: String,
    pub rating: RubricRating,
    /// 1-based line in the source file.
    pub line: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub conversations: usize,
    pub participants: usize,
    /// Number of conversations keyed by how many ratings they have.
    pub raters_per_conversation: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatingsDataset {
    rows: Vec<RatingRow>,
}

/// Most ratings one conversation may carry.
pub const MAX_RATINGS_PER_CONVERSATION: usize = 5;

pub fn conversation_id(participant: &str, order: Order) -> String {
    format!("{participant}/{}", order.as_str())
}

fn resolve(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

impl RatingsDataset {
    pub fn rows(&self) -> &[RatingRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader(r: impl Read) -> Result<Self, LoadError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rdr.headers().map_err(|e| csv_error(&e))?.clone();
        if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
            return Err(LoadError::Parse { line: 1, column: 1, message: "empty file".into() });
        }
        let mut cols = BTreeMap::new();
        for (field, names) in adapter::RATINGS_COLUMNS {
            let idx = resolve(&headers, names).ok_or_else(|| LoadError::Schema {
                line: 1,
                column: 0,
                message: format!("missing column {field}"),
            })?;
            cols.insert(*field, idx);
        }
        let mut items = [0usize; ITEM_COUNT];
        for (n, slot) in items.iter_mut().enumerate() {
            let names = adapter::item_column_names(n + 1);
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            *slot = resolve(&headers, &names).ok_or_else(|| LoadError::Schema {
                line: 1,
                column: 0,
                message: format!("missing column q{}", n + 1),
            })?;
        }

        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        let mut arms: BTreeMap<String, Arm> = BTreeMap::new();
        let mut per_conv: BTreeMap<(String, Order), usize> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let field = |name: &str| {
                let i = cols[name];
                (rec.get(i).unwrap_or("").trim(), i + 1)
            };
            let schema = |column: usize, message: String| LoadError::Schema { line, column, message };

            let (pid, c) = field("participant_id");
            if pid.is_empty() {
                return Err(schema(c, "empty participant_id".into()));
            }
            let (v, c) = field("arm");
            let arm = adapter::parse_arm(v).ok_or_else(|| schema(c, format!("unknown arm {v:?}")))?;
            let (v, c) = field("order");
            let order = adapter::parse_order(v).ok_or_else(|| schema(c, format!("unknown order {v:?}")))?;
            let (case_title, _) = field("case_title");
            let (rater, c) = field("rater_id");
            if rater.is_empty() {
                return Err(schema(c, "empty rater_id".into()));
            }
            let (v, c) = field("rater_role");
            let role: RaterRole = adapter::parse_role(v).ok_or_else(|| schema(c, format!("unknown rater role {v:?}")))?;

            let mut values = [0u8; ITEM_COUNT];
            for (n, &i) in items.iter().enumerate() {
                let raw = rec.get(i).unwrap_or("").trim();
                values[n] = raw.parse().map_err(|_| LoadError::Parse {
                    line,
                    column: i + 1,
                    message: format!("q{} = {raw:?} is not an integer", n + 1),
                })?;
            }
            let conv = conversation_id(pid, order);
            let rating = RubricRating::new(conv, rater, role, values).map_err(|e| match e {
                crate::rubric::RubricError::InvalidRating { item, .. } => schema(items[item - 1] + 1, e.to_string()),
                other => schema(0, other.to_string()),
            })?;

            match arms.get(pid) {
                Some(&a) if a != arm => {
                    return Err(schema(cols["arm"] + 1, format!("participant {pid} listed in both {a} and {arm}")))
                }
                Some(_) => {}
                None => {
                    arms.insert(pid.to_string(), arm);
                }
            }
            if !seen.insert((pid.to_string(), order, rater.to_string())) {
                return Err(LoadError::DuplicateRating {
                    line,
                    participant: pid.into(),
                    order,
                    rater: rater.into(),
                });
            }
            let n = per_conv.entry((pid.to_string(), order)).or_insert(0);
            *n += 1;
            if *n > MAX_RATINGS_PER_CONVERSATION {
                return Err(schema(
                    0,
                    format!("more than {MAX_RATINGS_PER_CONVERSATION} ratings for {pid} {}", order.as_str()),
                ));
            }
            rows.push(RatingRow {
                participant_id: pid.into(),
                arm,
                order,
                case_title: case_title.into(),
                rating,
                line,
            });
        }
        if rows.is_empty() {
            return Err(LoadError::Parse { line: 2, column: 1, message: "no data rows".into() });
        }
        Ok(Self { rows })
    }

    pub fn summary(&self) -> DatasetSummary {
        let mut per_conv: BTreeMap<(&str, Order), usize> = BTreeMap::new();
        for r in &self.rows {
            *per_conv.entry((&r.participant_id, r.order)).or_insert(0) += 1;
        }
        let mut hist = BTreeMap::new();
        for &n in per_conv.values() {
            *hist.entry(n).or_insert(0) += 1;
        }
        let participants: BTreeSet<&str> = self.rows.iter().map(|r| r.participant_id.as_str()).collect();
        DatasetSummary {
            rows: self.rows.len(),
            conversations: per_conv.len(),
            participants: participants.len(),
            raters_per_conversation: hist,
        }
    }

    /// Ratings grouped by conversation, keyed by (participant, order).
    pub fn conversations(&self) -> BTreeMap<(String, Order), Vec<&RatingRow>> {
        let mut m: BTreeMap<(String, Order), Vec<&RatingRow>> = BTreeMap::new();
        for r in &self.rows {
            m.entry((r.participant_id.clone(), r.order)).or_default().push(r);
        }
        m
    }

    /// Participant arms, keyed by participant id.
    pub fn arms(&self) -> BTreeMap<String, Arm> {
        self.rows.iter().map(|r| (r.participant_id.clone(), r.arm)).collect()
    }
}

impl FromIterator<RatingRow> for RatingsDataset {
    fn from_iter<I: IntoIterator<Item = RatingRow>>(iter: I) -> Self {
        Self { rows: iter.into_iter().collect() }
    }
}

fn csv_error(e: &csv::Error) -> LoadError {
    let line = e.position().map_or(0, |p| p.line());
    let column = match e.kind() {
        csv::ErrorKind::UnequalLengths { len, .. } => *len as usize + 1,
        _ => 0,
    };
    LoadError::Parse { line, column, message: e.to_string() }
}

/// Writes rows in the canonical column layout.
pub fn write_ratings_csv<W: std::io::Write>(w: W, rows: &[RatingRow]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> =
        ["participant_id", "arm", "order", "case_title", "rater_id", "rater_role"].map(String::from).to_vec();
    header.extend((1..=ITEM_COUNT).map(|n| format!("q{n}")));
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.participant_id.clone(),
            r.arm.as_str().to_string(),
            r.order.as_str().to_string(),
            r.case_title.clone(),
            r.rating.rater_id.clone(),
            format!("{:?}", r.rating.role),
        ];
        rec.extend(r.rating.items().iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
