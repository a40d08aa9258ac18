use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use super::pattern::{Pattern, PatternError};
use super::SkillLabel;

/// The lexicon file format tag accepted by [`RuleSet::from_toml`].
pub const LEXICON_FORMAT: &str = "sic-lexicon/1";

const EMPATHIZE: &str = include_str!("../../data/lexicon/empathize.toml");
const EXPLICIT: &str = include_str!("../../data/lexicon/explicit.toml");
const EMPOWER: &str = include_str!("../../data/lexicon/empower.toml");

#[derive(Debug, Clone)]
pub struct LexiconRule {
    pub id: String,
    pub skill: SkillLabel,
    pub pattern: Pattern,
    pub notes: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{origin}: {source}")]
    Toml { origin: String, source: toml::de::Error },
    #[error("{origin}: unsupported format {found:?}, expected {LEXICON_FORMAT:?}")]
    Format { origin: String, found: String },
    #[error("{origin}: rule {id:?}: {source}")]
    Pattern { origin: String, id: String, source: PatternError },
    #[error("{origin}: rule {id:?}: unknown skill {skill:?}")]
    Skill { origin: String, id: String, skill: String },
    #[error("{origin}: duplicate rule id {id:?}")]
    DuplicateId { origin: String, id: String },
    #[error("{origin}: rule with empty id")]
    EmptyId { origin: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: String,
    #[serde(default)]
    version: Option<String>,
    #[serde(default, rename = "rule")]
    rules: Vec<RawRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    skill: String,
    pattern: String,
    #[serde(default)]
    notes: String,
}

/// An ordered collection of lexicon rules with unique ids.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<LexiconRule>,
    versions: Vec<String>,
}

impl RuleSet {
    /// The three lexicons shipped with the crate.
    pub fn builtin() -> Self {
        let mut set = RuleSet::default();
        for (name, src) in [("empathize.toml", EMPATHIZE), ("explicit.toml", EXPLICIT), ("empower.toml", EMPOWER)] {
            set.extend_from_toml(name, src).expect("builtin lexicon is valid");
        }
        set
    }

    pub fn from_toml(origin: &str, src: &str) -> Result<Self, LexiconError> {
        let mut set = RuleSet::default();
        set.extend_from_toml(origin, src)?;
        Ok(set)
    }

    pub fn load_files<P: AsRef<Path>>(paths: &[P]) -> Result<Self, LexiconError> {
        let mut set = RuleSet::default();
        for p in paths {
            let p = p.as_ref();
            let src = std::fs::read_to_string(p)
                .map_err(|source| LexiconError::Io { path: p.display().to_string(), source })?;
            set.extend_from_toml(&p.display().to_string(), &src)?;
        }
        Ok(set)
    }

    /// Appends the rules of one lexicon file. Ids must stay unique across
    /// the whole set.
    pub fn extend_from_toml(&mut self, origin: &str, src: &str) -> Result<(), LexiconError> {
        let raw: RawFile = toml::from_str(src)
            .map_err(|source| LexiconError::Toml { origin: origin.to_string(), source })?;
        if raw.format != LEXICON_FORMAT {
            return Err(LexiconError::Format { origin: origin.to_string(), found: raw.format });
        }
        let mut seen: HashSet<String> = self.rules.iter().map(|r| r.id.clone()).collect();
        let mut added = Vec::with_capacity(raw.rules.len());
        for r in raw.rules {
            let origin = origin.to_string();
            if r.id.trim().is_empty() {
                return Err(LexiconError::EmptyId { origin });
            }
            if !seen.insert(r.id.clone()) {
                return Err(LexiconError::DuplicateId { origin, id: r.id });
            }
            let skill = r.skill.parse().map_err(|_| LexiconError::Skill {
                origin: origin.clone(),
                id: r.id.clone(),
                skill: r.skill.clone(),
            })?;
            let pattern = Pattern::parse(&r.pattern)
                .map_err(|source| LexiconError::Pattern { origin: origin.clone(), id: r.id.clone(), source })?;
            added.push(LexiconRule { id: r.id, skill, pattern, notes: r.notes });
        }
        self.rules.extend(added);
        if let Some(v) = raw.version {
            self.versions.push(format!("{origin}@{v}"));
        }
        Ok(())
    }

    pub fn rules(&self) -> &[LexiconRule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&LexiconRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn versions(&self) -> &[String] {
        &self.versions
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}
