use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::skill::SkillLabel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BankError {
    #[error("{file}: {message}")]
    Toml { file: &'static str, message: String },
    #[error("{file}: format is {found:?}, expected {expected:?}")]
    Format { file: &'static str, found: String, expected: &'static str },
    #[error("{file}: no entries for {skill}")]
    MissingSkill { file: &'static str, skill: SkillLabel },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub skill: SkillLabel,
    /// What the patient said.
    pub patient: String,
    /// A reply that missed the skill.
    pub missed: String,
    /// A reply that used it.
    pub better: String,
}

/// Worked examples for the suggestion prompt; every skill has at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotBank {
    format: String,
    pub version: u32,
    #[serde(rename = "example")]
    examples: Vec<FewShotExample>,
}

impl FewShotBank {
    pub const FORMAT: &'static str = "sic-fewshot/1";

    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../../data/feedback/fewshot.toml")).expect("builtin few-shot bank is valid")
    }

    pub fn from_toml(src: &str) -> Result<Self, BankError> {
        const FILE: &str = "few-shot bank";
        let bank: FewShotBank =
            toml::from_str(src).map_err(|e| BankError::Toml { file: FILE, message: e.to_string() })?;
        if bank.format != Self::FORMAT {
            return Err(BankError::Format { file: FILE, found: bank.format, expected: Self::FORMAT });
        }
        for skill in SkillLabel::ALL {
            if bank.for_skill(skill).next().is_none() {
                return Err(BankError::MissingSkill { file: FILE, skill });
            }
        }
        Ok(bank)
    }

    pub fn examples(&self) -> &[FewShotExample] {
        &self.examples
    }

    pub fn for_skill(&self, skill: SkillLabel) -> impl Iterator<Item = &FewShotExample> {
        self.examples.iter().filter(move |e| e.skill == skill)
    }
}

/// Curated example statements per skill, shown alongside the feedback panels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleStatements {
    format: String,
    pub version: u32,
    statements: BTreeMap<SkillLabel, Vec<String>>,
}

impl ExampleStatements {
    pub const FORMAT: &'static str = "sic-statements/1";

    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../../data/feedback/statements.toml")).expect("builtin statements are valid")
    }

    pub fn from_toml(src: &str) -> Result<Self, BankError> {
        const FILE: &str = "example statements";
        let s: ExampleStatements =
            toml::from_str(src).map_err(|e| BankError::Toml { file: FILE, message: e.to_string() })?;
        if s.format != Self::FORMAT {
            return Err(BankError::Format { file: FILE, found: s.format, expected: Self::FORMAT });
        }
        for skill in SkillLabel::ALL {
            if s.for_skill(skill).is_empty() {
                return Err(BankError::MissingSkill { file: FILE, skill });
            }
        }
        Ok(s)
    }

    pub fn for_skill(&self, skill: SkillLabel) -> &[String] {
        self.statements.get(&skill).map_or(&[], Vec::as_slice)
    }
}
