use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{RuleSet, SkillLabel};
use crate::text::{self, Span};

/// Which branch of the hybrid classifier produced a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    RuleOnly,
    ModelOnly,
    Both,
}

/// A rule hit supporting a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub label: SkillLabel,
    pub rule_id: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillClassification {
    pub labels: BTreeSet<SkillLabel>,
    pub evidence: Vec<Evidence>,
    pub sources: BTreeMap<SkillLabel, LabelSource>,
}

impl SkillClassification {
    pub fn contains(&self, skill: SkillLabel) -> bool {
        self.labels.contains(&skill)
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Builds a classification from labels alone (no rule evidence).
    pub fn from_model(labels: impl IntoIterator<Item = SkillLabel>) -> Self {
        let labels: BTreeSet<_> = labels.into_iter().collect();
        let sources = labels.iter().map(|&l| (l, LabelSource::ModelOnly)).collect();
        Self { labels, evidence: Vec::new(), sources }
    }
}

/// Exact set union of rule and model labels.
pub fn merge_labels(rule_labels: &BTreeSet<SkillLabel>, model_labels: &BTreeSet<SkillLabel>) -> BTreeSet<SkillLabel> {
    rule_labels.union(model_labels).copied().collect()
}

/// Classifies one trainee utterance.
///
/// Every rule is tried against the normalized utterance and its first match
/// is recorded as evidence. The final label set is the union of rule labels
/// and `model_labels`.
pub fn classify_utterance(
    utterance: &str,
    rules: &RuleSet,
    model_labels: Option<&BTreeSet<SkillLabel>>,
) -> SkillClassification {
    let tokens = text::normalized(utterance);
    let mut evidence = Vec::new();
    if !tokens.is_empty() {
        for rule in rules.rules() {
            if let Some((a, b)) = rule.pattern.find(&tokens) {
                evidence.push(Evidence {
                    label: rule.skill,
                    rule_id: rule.id.clone(),
                    span: Span::new(tokens[a].start, tokens[b - 1].end),
                });
            }
        }
    }
    let rule_labels: BTreeSet<SkillLabel> = evidence.iter().map(|e| e.label).collect();
    let empty = BTreeSet::new();
    let model = model_labels.unwrap_or(&empty);
    let labels = merge_labels(&rule_labels, model);
    let sources = labels
        .iter()
        .map(|&l| {
            let src = match (rule_labels.contains(&l), model.contains(&l)) {
                (true, true) => LabelSource::Both,
                (true, false) => LabelSource::RuleOnly,
                _ => LabelSource::ModelOnly,
            };
            (l, src)
        })
        .collect();
    SkillClassification { labels, evidence, sources }
}
