use std::fmt::Write;

use crate::rubric::Dimension;

use super::report::StatsReport;

fn f2(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn f3(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn label(d: Dimension) -> &'static str {
    match d {
        Dimension::Empower => "Empower",
        Dimension::Explicit => "Be Explicit",
        Dimension::Empathize => "Empathize",
        Dimension::Overall => "Overall",
    }
}

/// Plain-text rendering of a report, laid out as fixed-width tables.
pub fn render_text(r: &StatsReport) -> String {
    let mut s = String::new();
    let d = &r.dataset;
    let _ = writeln!(s, "ratings: {} rows, {} conversations, {} participants", d.rows, d.conversations, d.participants);
    if !r.incomplete_participants.is_empty() {
        let _ = writeln!(s, "incomplete participants: {}", r.incomplete_participants.join(", "));
    }
    if let Some(t) = &r.table3 {
        for arm in &t.arms {
            let _ = writeln!(s, "\n{} arm (n={})", arm.arm, arm.n_participants);
            let _ = writeln!(
                s,
                "{:<12} {:>6} {:>6} {:>6} {:>6} {:>20} {:>7} {:>6}",
                "Skill", "Pre", "SD", "Post", "SD", "Delta (95% CI)", "p", "d"
            );
            for row in &arm.rows {
                let ci = row.ci95.map_or_else(|| "-".into(), |c| format!("({:.2}-{:.2})", c.lo, c.hi));
                let _ = writeln!(
                    s,
                    "{:<12} {:>6} {:>6} {:>6} {:>6} {:>20} {:>7} {:>6}",
                    label(row.dimension),
                    f2(row.pre.mean),
                    f2(row.pre.sd),
                    f2(row.post.mean),
                    f2(row.post.sd),
                    format!("{} {ci}", f2(row.delta)),
                    f3(row.p),
                    f2(row.d),
                );
            }
        }
        let _ = writeln!(s, "\nBetween arms, change scores (SOPHIE vs Control)");
        let _ = writeln!(s, "{:<12} {:>8} {:>8} {:>8} {:>7} {:>6}", "Skill", "Control", "SOPHIE", "t", "p", "d");
        for row in &t.between {
            let _ = writeln!(
                s,
                "{:<12} {:>8} {:>8} {:>8} {:>7} {:>6}",
                label(row.dimension),
                f2(row.delta_control),
                f2(row.delta_sophie),
                f2(row.t),
                f3(row.p),
                f2(row.d),
            );
        }
        let _ = writeln!(s, "\nBaseline (pre) comparison");
        for row in &t.baseline {
            let _ = writeln!(s, "{:<12} p = {}", label(row.dimension), f3(row.p));
        }
    }
    if let Some(icc) = &r.icc {
        let ci = icc.ci95.map_or_else(|| "-".into(), |c| format!("[{:.2}, {:.2}]", c.lo, c.hi));
        let _ = writeln!(
            s,
            "\nICC ({}) over {} conversations x {} raters: {} {ci} ({} dropped)",
            icc.variant.as_str(),
            icc.n_rows,
            icc.raters,
            f3(icc.value),
            icc.n_dropped
        );
    }
    if let Some(sen) = &r.sensitivity {
        let _ = writeln!(
            s,
            "\nSensitivity (Empower, upper {}, lower {}): Control n={} delta {:.2}; SOPHIE n={} delta {:.2}; p = {}, d = {}",
            sen.upper, sen.lower, sen.n_control, sen.delta_control, sen.n_sophie, sen.delta_sophie, f3(sen.p), f2(sen.d)
        );
    }
    for p in &r.power {
        let _ = writeln!(
            s,
            "power: d={} alpha={} power={} {:?}-sided -> {} per arm{}",
            p.d,
            p.alpha,
            p.power,
            p.sided,
            p.n_per_arm,
            if p.requested { "" } else { " (alternative)" }
        );
    }
    if let Some(rc) = &r.randomization {
        let _ = writeln!(s, "\nRandomization check ({} used, {} dropped)", rc.n_used, rc.n_dropped);
        for c in &rc.coefficients {
            let _ = writeln!(s, "{:<32} {:>8.3} {:>8.3} p = {:.3}", c.name, c.estimate, c.std_error, c.p);
        }
    }
    s
}
