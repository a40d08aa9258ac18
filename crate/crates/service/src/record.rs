use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sic_core::dialogue::{DialogueState, ModuleKind, PersonaFacts};
use sic_core::feedback::FeedbackReport;
use sic_core::skill::{SkillClassification, SkillLabel};
use uuid::Uuid;

/// Version of the persisted session document.
pub const SCHEMA_VERSION: u32 = 1;

pub const ARCHIVE_FORMAT: &str = "sic-session-archive";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    /// No trainee turn yet.
    Created,
    Active,
    /// Every module ran, the session cap was hit, or the patient disengaged.
    Completed,
}

/// Rule and model labels for one trainee turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub module: ModuleKind,
    /// Index of the trainee turn in that module's transcript.
    pub turn: usize,
    pub classification: SkillClassification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_labels: Option<BTreeSet<SkillLabel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    /// Patient reply for a turn.
    Dialogue,
    /// Coaching suggestion for a feedback report.
    Suggestion,
    /// Skill model labels for a turn.
    Classifier,
}

/// One outbound provider attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub kind: CallKind,
    pub module: ModuleKind,
    /// 1-based attempt number within the call.
    pub attempt: u32,
    pub duration_ms: u64,
    pub request: serde_json::Value,
    #[serde(flatten)]
    pub outcome: CallOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CallOutcome {
    Ok { response: serde_json::Value },
    Error { error: String },
}

impl CallOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, CallOutcome::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub id: Uuid,
    pub created_at: DateTime<Utc>,
    pub status: SessionStatus,
    pub plan: Vec<ModuleKind>,
    pub persona: PersonaFacts,
    /// Started modules in plan order. The last one is current.
    pub modules: Vec<DialogueState>,
    pub classifications: Vec<ClassificationEntry>,
    /// Reports whose suggestion arrived.
    pub feedback: BTreeMap<ModuleKind, FeedbackReport>,
    pub audit: Vec<AuditEntry>,
}

impl SessionRecord {
    pub fn current(&self) -> Option<&DialogueState> {
        self.modules.last()
    }

    pub fn module(&self, kind: ModuleKind) -> Option<&DialogueState> {
        self.modules.iter().find(|m| m.module == kind)
    }

    /// Module that follows the current one in the plan.
    pub fn next_module(&self) -> Option<ModuleKind> {
        self.plan.get(self.modules.len()).copied()
    }

    pub fn next_seq(&self) -> u64 {
        self.audit.last().map_or(1, |a| a.seq + 1)
    }

    pub fn trainee_turns(&self) -> usize {
        self.modules.iter().map(|m| m.history.trainee_turns().count()).sum()
    }
}

/// Export document. Carries the whole record so an import restores it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionArchive {
    pub format: String,
    pub version: u32,
    pub exported_at: DateTime<Utc>,
    pub record: SessionRecord,
}

impl SessionArchive {
    pub fn new(record: SessionRecord) -> Self {
        Self { format: ARCHIVE_FORMAT.into(), version: SCHEMA_VERSION, exported_at: Utc::now(), record }
    }
}
