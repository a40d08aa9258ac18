use std::fmt::Write;

// quotes are escaped too, so turn text can never fake an attribute
use html_escape::encode_quoted_attribute as esc;

use super::metrics::Metric;
use super::{FeedbackReport, Suggestion};
use crate::transcript::Speaker;

/// Attribute carried by highlighted transcript turns in the HTML report.
pub const HIGHLIGHT_ATTR: &str = "data-highlight=\"true\"";

pub fn to_json(report: &FeedbackReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn from_json(src: &str) -> serde_json::Result<FeedbackReport> {
    serde_json::from_str(src)
}

fn metric_cell(m: &Metric, unit: &str) -> String {
    match m {
        Metric::Value { value } => format!("{value:.1}{unit}"),
        Metric::Omitted { reason } => format!("<span class=\"omitted\">omitted: {}</span>", esc(reason)),
    }
}

/// Printable HTML document.
pub fn render_html(r: &FeedbackReport) -> String {
    let title = r.module.skill().title();
    let mut h = String::new();
    let _ = writeln!(h, "<!DOCTYPE html>\n<html lang=\"en\">\n<head><meta charset=\"utf-8\"><title>Feedback: {title}</title></head>\n<body>");
    let _ = writeln!(h, "<h1>Feedback: {title}</h1>");
    let outcome = serde_json::to_value(r.signal).expect("signal serializes");
    let _ = writeln!(h, "<p class=\"outcome\">Module ended: {}</p>", outcome.as_str().unwrap_or_default());

    h.push_str("<section class=\"did-well\">\n<h2>What You Did Well</h2>\n");
    if r.did_well.is_empty() {
        h.push_str("<p class=\"empty\">No skill demonstrations yet.</p>\n");
    } else {
        h.push_str("<ul>\n");
        for d in &r.did_well {
            let _ = writeln!(h, "<li><strong>{}</strong> (turn {}): {}</li>", d.skill.title(), d.turn, esc(&d.text));
        }
        h.push_str("</ul>\n");
    }
    h.push_str("</section>\n");

    h.push_str("<section class=\"opportunities\">\n<h2>Opportunities to Improve</h2>\n");
    if r.opportunities.is_empty() {
        h.push_str("<p class=\"empty\">No missed opportunities.</p>\n");
    } else {
        h.push_str("<ul>\n");
        for o in &r.opportunities {
            let _ = writeln!(
                h,
                "<li><strong>{}</strong> (turn {}): {}</li>",
                o.skill.title(),
                o.patient_turn,
                esc(&o.explanation)
            );
        }
        h.push_str("</ul>\n");
    }
    h.push_str("</section>\n");

    h.push_str("<section class=\"suggestion\">\n<h2>Suggestion</h2>\n");
    match &r.suggestion {
        Suggestion::Pending => h.push_str("<p class=\"pending\">Suggestion pending.</p>\n"),
        Suggestion::Ready { text } => {
            let _ = writeln!(h, "<p>{}</p>", esc(text));
        }
        Suggestion::Unavailable { reason } => {
            let _ = writeln!(h, "<p class=\"unavailable\">Suggestion unavailable: {}</p>", esc(reason));
        }
    }
    h.push_str("</section>\n");

    let m = &r.metrics;
    h.push_str("<section class=\"metrics\">\n<h2>Metrics</h2>\n<table>\n");
    let flag = if m.excessive_speaking { " class=\"flag\"" } else { "" };
    let rows = [
        ("hedge_count", "Hedge words", m.hedge_count.to_string()),
        ("speaking_rate", "Speaking rate", metric_cell(&m.speaking_rate, " words/min")),
        ("reading_level", "Reading level (grade)", metric_cell(&m.reading_level, "")),
        ("questions_total", "Questions asked", m.questions_total.to_string()),
        ("open_ended_count", "Open-ended questions", m.open_ended_count.to_string()),
        ("trainee_word_share", "Your share of words", format!("{:.0}%", m.trainee_word_share * 100.0)),
        ("longest_monologue", "Longest turn (words)", m.longest_monologue.to_string()),
        ("excessive_speaking", "Excessive speaking", if m.excessive_speaking { "yes" } else { "no" }.to_string()),
    ];
    for (key, label, value) in rows {
        let attr = if key == "excessive_speaking" { flag } else { "" };
        let _ = writeln!(h, "<tr data-metric=\"{key}\"{attr}><th>{label}</th><td>{value}</td></tr>");
    }
    h.push_str("</table>\n");
    if !m.hedges.is_empty() {
        h.push_str("<p class=\"hedges\">Hedges: ");
        let list: Vec<String> = m.hedges.iter().map(|x| format!("\u{201c}{}\u{201d}", esc(&x.text))).collect();
        h.push_str(&list.join(", "));
        h.push_str("</p>\n");
    }
    h.push_str("</section>\n");

    if !r.examples.is_empty() {
        let _ = writeln!(h, "<section class=\"examples\">\n<h2>Example statements: {title}</h2>\n<ul>");
        for e in &r.examples {
            let _ = writeln!(h, "<li>{}</li>", esc(e));
        }
        h.push_str("</ul>\n</section>\n");
    }

    h.push_str("<section class=\"transcript\">\n<h2>Transcript</h2>\n<ol>\n");
    for t in &r.transcript {
        let (class, who) = match t.speaker {
            Speaker::Trainee => ("trainee", "You".to_string()),
            Speaker::Patient => ("patient", "Patient".to_string()),
        };
        let mut attrs = format!("class=\"turn {class}\"");
        if t.highlight {
            attrs.push(' ');
            attrs.push_str(HIGHLIGHT_ATTR);
            let skills: Vec<&str> = t.labels.iter().map(|l| l.as_str()).collect();
            let _ = write!(attrs, " data-skills=\"{}\"", skills.join(" "));
        }
        if let Some(e) = t.emotion {
            let _ = write!(attrs, " data-emotion=\"{e}\"");
        }
        let _ = writeln!(h, "<li {attrs}><b>{who}:</b> {}</li>", esc(&t.text));
    }
    h.push_str("</ol>\n</section>\n</body>\n</html>\n");
    h
}
