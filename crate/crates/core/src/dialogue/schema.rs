//! Declarative conversation schema.
//!
//! The file is line oriented UTF-8. Leading whitespace is ignored, `#` starts
//! a comment line, and blank lines are skipped. Grammar:
//!
//! ```text
//! file      = { line } ;
//! line      = [ directive ] [ comment ] newline ;
//! directive = module | start | ending | node | expect | say | on ;
//! module    = "module" module-kind ;
//! start     = "start" node-id ;
//! ending    = "ending" signal emotion [ intensity ] quoted ;
//! node      = "node" node-id [ "terminal" ] ;
//! expect    = "expect" skill ;
//! say       = "say" emotion [ intensity ] quoted ;
//! on        = "on" ( skill | "other" ) "->" node-id ;
//! module-kind = "empathize" | "explicit" | "empower" ;
//! skill       = "empathize" | "explicit" | "empower" ;
//! signal      = "success" | "timeout" | "escalation" ;
//! emotion     = "neutral" | "happy" | "sad" | "angry" | "surprised" | "afraid" | "disgusted" ;
//! intensity   = "1" | "2" | "3" ;
//! quoted      = '"' { char - ( '"' | '\' ) | '\"' | '\\' } '"' ;
//! node-id     = letter { letter | digit | "-" | "_" | "." } ;
//! comment     = "#" { char } ;
//! ```
//!
//! `start` and `ending` belong to the most recent `module`; `expect`, `say`
//! and `on` belong to the most recent `node`. Node ids are scoped to their
//! module. Rules checked after parsing:
//!
//! * each module is declared once, names an existing start node and has
//!   all three endings;
//! * every node has at least one `say` line;
//! * every transition target exists in the same module;
//! * a non-terminal node has exactly one `on other` transition, which is
//!   tried after all skill transitions;
//! * a terminal node has no transitions.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::emotion::{BaseEmotion, EmotionTag};
use super::{ControlSignal, ModuleKind};
use crate::skill::SkillLabel;

const BUILTIN: &str = include_str!("../../data/schema/patient.schema");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientLine {
    pub text: String,
    pub emotion: EmotionTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Skill(SkillLabel),
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub on: Condition,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaNode {
    pub id: String,
    pub lines: Vec<PatientLine>,
    pub expects: Option<SkillLabel>,
    pub transitions: Vec<Transition>,
    pub terminal: bool,
}

impl SchemaNode {
    /// Target of the first skill transition whose skill is in `labels`.
    pub fn skill_target<'a>(&'a self, labels: &std::collections::BTreeSet<SkillLabel>) -> Option<&'a str> {
        self.transitions.iter().find_map(|t| match t.on {
            Condition::Skill(s) if labels.contains(&s) => Some(t.target.as_str()),
            _ => None,
        })
    }

    pub fn fallback_target(&self) -> Option<&str> {
        self.transitions
            .iter()
            .find(|t| t.on == Condition::Fallback)
            .map(|t| t.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endings {
    pub success: PatientLine,
    pub timeout: PatientLine,
    pub escalation: PatientLine,
}

impl Endings {
    pub fn for_signal(&self, signal: ControlSignal) -> Option<&PatientLine> {
        match signal {
            ControlSignal::Continue => None,
            ControlSignal::SuccessEnd => Some(&self.success),
            ControlSignal::TimeoutEnd => Some(&self.timeout),
            ControlSignal::EscalationTerminate => Some(&self.escalation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSchema {
    pub kind: ModuleKind,
    pub start: String,
    pub nodes: Vec<SchemaNode>,
    pub endings: Endings,
}

impl ModuleSchema {
    pub fn node(&self, id: &str) -> Option<&SchemaNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    modules: BTreeMap<ModuleKind, ModuleSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("module {module}: {message}")]
    Invalid { module: ModuleKind, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> SchemaError {
    SchemaError::Syntax { line, message: message.into() }
}

/// Splits a directive into bare words and at most one trailing quoted string.
fn split_directive(line_no: usize, line: &str) -> Result<(Vec<&str>, Option<String>), SchemaError> {
    let (head, quoted) = match line.find(['"', '#']) {
        None => (line, None),
        Some(h) if line[h..].starts_with('#') => (&line[..h], None),
        Some(q) => {
            let mut out = String::new();
            let mut chars = line[q + 1..].char_indices();
            let mut close = None;
            while let Some((i, c)) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some((_, e @ ('"' | '\\'))) => out.push(e),
                        _ => return Err(syntax(line_no, "bad escape in quoted text")),
                    },
                    '"' => {
                        close = Some(q + 1 + i);
                        break;
                    }
                    c => out.push(c),
                }
            }
            let close = close.ok_or_else(|| syntax(line_no, "unterminated quoted text"))?;
            let tail = line[close + 1..].trim();
            if !(tail.is_empty() || tail.starts_with('#')) {
                return Err(syntax(line_no, format!("unexpected text after quote: {tail:?}")));
            }
            (&line[..q], Some(out))
        }
    };
    Ok((head.split_whitespace().collect(), quoted))
}

fn valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn parse_line_spec(line_no: usize, words: &[&str], quoted: Option<String>) -> Result<PatientLine, SchemaError> {
    let text = quoted.ok_or_else(|| syntax(line_no, "missing quoted text"))?;
    if text.trim().is_empty() {
        return Err(syntax(line_no, "empty patient line"));
    }
    let base: BaseEmotion = words
        .first()
        .ok_or_else(|| syntax(line_no, "missing emotion"))?
        .parse()
        .map_err(|e: String| syntax(line_no, e))?;
    let intensity = match words.get(1) {
        None => 1,
        Some(w) => w.parse::<u8>().map_err(|_| syntax(line_no, format!("bad intensity {w:?}")))?,
    };
    if words.len() > 2 {
        return Err(syntax(line_no, "too many fields"));
    }
    let emotion = EmotionTag::new(base, intensity)
        .ok_or_else(|| syntax(line_no, format!("intensity {intensity} not allowed for {}", base.as_str())))?;
    Ok(PatientLine { text, emotion })
}

#[derive(Default)]
struct ModuleDraft {
    kind: Option<ModuleKind>,
    start: Option<String>,
    nodes: Vec<SchemaNode>,
    success: Option<PatientLine>,
    timeout: Option<PatientLine>,
    escalation: Option<PatientLine>,
}

impl FromStr for Schema {
    type Err = SchemaError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut drafts: Vec<ModuleDraft> = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (words, quoted) = split_directive(line_no, line)?;
            let Some((&kw, args)) = words.split_first() else {
                return Err(syntax(line_no, "missing directive"));
            };
            if kw == "module" {
                let [kind] = args else {
                    return Err(syntax(line_no, "usage: module <kind>"));
                };
                let kind: ModuleKind = kind.parse().map_err(|e: String| syntax(line_no, e))?;
                drafts.push(ModuleDraft { kind: Some(kind), ..Default::default() });
                continue;
            }
            let module = drafts
                .last_mut()
                .ok_or_else(|| syntax(line_no, format!("{kw:?} before any module")))?;
            match kw {
                "start" => {
                    let [id] = args else {
                        return Err(syntax(line_no, "usage: start <node-id>"));
                    };
                    module.start = Some(id.to_string());
                }
                "ending" => {
                    let (which, rest) = args.split_first().ok_or_else(|| syntax(line_no, "missing ending signal"))?;
                    let spec = parse_line_spec(line_no, rest, quoted)?;
                    let slot = match *which {
                        "success" => &mut module.success,
                        "timeout" => &mut module.timeout,
                        "escalation" => &mut module.escalation,
                        other => return Err(syntax(line_no, format!("unknown ending {other:?}"))),
                    };
                    if slot.replace(spec).is_some() {
                        return Err(syntax(line_no, format!("duplicate ending {which:?}")));
                    }
                }
                "node" => {
                    let (id, terminal) = match args {
                        [id] => (*id, false),
                        [id, "terminal"] => (*id, true),
                        _ => return Err(syntax(line_no, "usage: node <id> [terminal]")),
                    };
                    if !valid_id(id) {
                        return Err(syntax(line_no, format!("bad node id {id:?}")));
                    }
                    module.nodes.push(SchemaNode {
                        id: id.to_string(),
                        lines: Vec::new(),
                        expects: None,
                        transitions: Vec::new(),
                        terminal,
                    });
                }
                "expect" | "say" | "on" => {
                    let node = module
                        .nodes
                        .last_mut()
                        .ok_or_else(|| syntax(line_no, format!("{kw:?} before any node")))?;
                    match kw {
                        "expect" => {
                            let [skill] = args else {
                                return Err(syntax(line_no, "usage: expect <skill>"));
                            };
                            let skill = skill.parse().map_err(|e| syntax(line_no, format!("{e}")))?;
                            if node.expects.replace(skill).is_some() {
                                return Err(syntax(line_no, "node already has an expected skill"));
                            }
                        }
                        "say" => node.lines.push(parse_line_spec(line_no, args, quoted)?),
                        _ => {
                            let [cond, "->", target] = args else {
                                return Err(syntax(line_no, "usage: on <skill|other> -> <node-id>"));
                            };
                            let on = if *cond == "other" {
                                Condition::Fallback
                            } else {
                                Condition::Skill(cond.parse().map_err(|e| syntax(line_no, format!("{e}")))?)
                            };
                            node.transitions.push(Transition { on, target: target.to_string() });
                        }
                    }
                }
                other => return Err(syntax(line_no, format!("unknown directive {other:?}"))),
            }
        }
        Schema::from_drafts(drafts)
    }
}

impl Schema {
    /// The schema shipped with the crate.
    pub fn builtin() -> Self {
        BUILTIN.parse().expect("builtin schema is valid")
    }

    pub fn module(&self, kind: ModuleKind) -> Option<&ModuleSchema> {
        self.modules.get(&kind)
    }

    pub fn modules(&self) -> impl Iterator<Item = &ModuleSchema> {
        self.modules.values()
    }

    fn from_drafts(drafts: Vec<ModuleDraft>) -> Result<Self, SchemaError> {
        let mut modules = BTreeMap::new();
        for d in drafts {
            let kind = d.kind.expect("draft created with kind");
            let invalid = |message: String| SchemaError::Invalid { module: kind, message };
            if modules.contains_key(&kind) {
                return Err(invalid("module declared twice".into()));
            }
            let start = d.start.ok_or_else(|| invalid("missing start".into()))?;
            let endings = Endings {
                success: d.success.ok_or_else(|| invalid("missing success ending".into()))?,
                timeout: d.timeout.ok_or_else(|| invalid("missing timeout ending".into()))?,
                escalation: d.escalation.ok_or_else(|| invalid("missing escalation ending".into()))?,
            };
            let mut ids = HashSet::new();
            for n in &d.nodes {
                if !ids.insert(n.id.as_str()) {
                    return Err(invalid(format!("duplicate node {:?}", n.id)));
                }
            }
            if !ids.contains(start.as_str()) {
                return Err(invalid(format!("start node {start:?} does not exist")));
            }
            for n in &d.nodes {
                if n.lines.is_empty() {
                    return Err(invalid(format!("node {:?} has no say line", n.id)));
                }
                for t in &n.transitions {
                    if !ids.contains(t.target.as_str()) {
                        return Err(invalid(format!("node {:?} points at unknown node {:?}", n.id, t.target)));
                    }
                }
                let fallbacks = n.transitions.iter().filter(|t| t.on == Condition::Fallback).count();
                if n.terminal && !n.transitions.is_empty() {
                    return Err(invalid(format!("terminal node {:?} has transitions", n.id)));
                }
                if !n.terminal && fallbacks != 1 {
                    return Err(invalid(format!("node {:?} needs exactly one 'on other' transition", n.id)));
                }
            }
            let mut nodes = d.nodes;
            // fallback edges are tried last regardless of file order
            for n in &mut nodes {
                n.transitions.sort_by_key(|t| t.on == Condition::Fallback);
            }
            modules.insert(kind, ModuleSchema { kind, start, nodes, endings });
        }
        Ok(Schema { modules })
    }
}
