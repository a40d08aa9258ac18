use std::fmt::Write;

use super::bank::FewShotBank;
use super::FeedbackReport;
use crate::dialogue::{ChatMessage, ChatRole, ProviderRequest};
use crate::skill::SkillLabel;
use crate::transcript::Speaker;

pub const NO_MISSED_MARKER: &str = "No missed opportunities.";

/// Suggestion request for a compiled report.
///
/// The instructions hold `context`; the single user message holds, in
/// order, the transcript, the demonstration markers, the missed-opportunity
/// markers and the worked examples for all three skills.
pub fn build_suggestion_prompt(report: &FeedbackReport, bank: &FewShotBank, context: &str) -> ProviderRequest {
    let mut system = context.trim_end().to_string();
    let _ = write!(system, "\nThis module practiced: {}.", report.module.skill().title());

    let mut m = String::from("## Transcript\n");
    for t in &report.transcript {
        let who = match t.speaker {
            Speaker::Trainee => "Clinician".to_string(),
            Speaker::Patient => match t.emotion {
                Some(e) => format!("Patient ({e})"),
                None => "Patient".to_string(),
            },
        };
        let _ = writeln!(m, "[{}] {who}: {}", t.index, t.text);
    }

    m.push_str("\n## Skill demonstrations\n");
    if report.did_well.is_empty() {
        m.push_str("No skill demonstrations.\n");
    }
    for d in &report.did_well {
        let _ = writeln!(m, "- [{}] {}", d.turn, d.skill.title());
    }

    m.push_str("\n## Missed opportunities\n");
    if report.opportunities.is_empty() {
        m.push_str(NO_MISSED_MARKER);
        m.push('\n');
    }
    for o in &report.opportunities {
        let reply = o.trainee_turn.map_or("no reply".to_string(), |j| format!("reply [{j}]"));
        let _ = writeln!(m, "- [{}] {} ({reply}): {}", o.patient_turn, o.skill.title(), o.explanation);
    }

    m.push_str("\n## Examples");
    for skill in SkillLabel::ALL {
        let _ = write!(m, "\n### {}\n", skill.title());
        for e in bank.for_skill(skill) {
            let _ = writeln!(m, "Patient: {}\nMissed: {}\nBetter: {}", e.patient, e.missed, e.better);
        }
    }

    ProviderRequest {
        system_instructions: system,
        persona: None,
        messages: vec![ChatMessage { role: ChatRole::User, content: m }],
    }
}
