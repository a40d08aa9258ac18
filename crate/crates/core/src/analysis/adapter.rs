//! Mapping from the columns and values of an input file to the fields the
//! loaders expect. Pointing the loaders at a differently laid out export
//! should only need edits here.

use crate::rubric::{Arm, RaterRole};

use super::Order;

/// Canonical ratings fields with the header names accepted for each,
/// compared case-insensitively after trimming.
pub const RATINGS_COLUMNS: &[(&str, &[&str])] = &[
    ("participant_id", &["participant_id", "participant", "pid"]),
    ("arm", &["arm", "group"]),
    ("order", &["order", "timepoint", "time"]),
    ("case_title", &["case_title", "case"]),
    ("rater_id", &["rater_id", "rater"]),
    ("rater_role", &["rater_role", "role", "rater_type"]),
];

/// Header names accepted for rubric item `n` (1-based).
pub fn item_column_names(n: usize) -> [String; 2] {
    [format!("q{n}"), format!("item{n}")]
}

pub const DEMOGRAPHICS_ID: &[&str] = &["participant_id", "participant", "pid"];
pub const DEMOGRAPHICS_ARM: &[&str] = &["arm", "group"];

/// Values treated as missing in the demographics table.
pub const MISSING: &[&str] = &["", "na", "n/a", "nan", "missing"];

pub fn parse_arm(s: &str) -> Option<Arm> {
    match s.trim().to_ascii_lowercase().as_str() {
        "control" | "ctrl" => Some(Arm::Control),
        "sophie" | "intervention" => Some(Arm::Sophie),
        _ => None,
    }
}

pub fn parse_order(s: &str) -> Option<Order> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pre" | "1" | "baseline" => Some(Order::Pre),
        "post" | "2" => Some(Order::Post),
        _ => None,
    }
}

pub fn parse_role(s: &str) -> Option<RaterRole> {
    s.parse().ok()
}

/// Recoding applied to a demographics value before dummy coding. Age bands
/// are collapsed to the two groups used in the randomization check.
pub fn recode_demographic(column: &str, value: &str) -> String {
    let v = value.trim();
    if column.eq_ignore_ascii_case("age_group") || column.eq_ignore_ascii_case("age") {
        let lower = v.split(['-', ' ', '+']).next().and_then(|s| s.parse::<u32>().ok());
        if let Some(lo) = lower {
            return if lo < 35 { "18-34".into() } else { "35+".into() };
        }
    }
    v.to_string()
}
