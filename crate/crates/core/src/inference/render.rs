use std::fmt::Write;

use super::{ConsultationReport, DiseaseAssessment, ProbableEntry};

fn width<'a>(names: impl Iterator<Item = &'a str>) -> usize {
    names.map(|n| n.chars().count()).max().unwrap_or(0)
}

/// One line per disease, highest chance first; no-evidence diseases last.
pub fn render_assessments(assessments: &[DiseaseAssessment]) -> String {
    let mut order: Vec<&DiseaseAssessment> = assessments.iter().collect();
    order.sort_by(|a, b| {
        a.no_evidence
            .cmp(&b.no_evidence)
            .then(b.crisp_chance.total_cmp(&a.crisp_chance))
    });
    let w = width(assessments.iter().map(|a| a.disease.as_str()));
    let mut out = String::new();
    for a in order {
        if a.no_evidence {
            writeln!(out, "{:<w$}  {:>5}  No evidence", a.disease, "—").unwrap();
        } else {
            writeln!(
                out,
                "{:<w$}  {:>5.1}  {}",
                a.disease, a.crisp_chance, a.label
            )
            .unwrap();
        }
    }
    out
}

fn render_probable(list: &[ProbableEntry]) -> String {
    let w = width(list.iter().map(|e| e.disease.as_str()));
    let mut out = String::new();
    for e in list {
        writeln!(
            out,
            "{:<w$}  {:>5.1}  {}",
            e.disease, e.crisp_chance, e.label
        )
        .unwrap();
    }
    if list.is_empty() {
        out.push_str("(none)\n");
    }
    out
}

/// Aligned plain-text rendering of a consultation.
pub fn render_report(report: &ConsultationReport) -> String {
    let mut out = String::new();
    for outcome in &report.phases {
        let r = &outcome.result;
        write!(
            out,
            "phase {} ({}, {})",
            r.phase,
            r.phase_name,
            r.matching_mode.as_str()
        )
        .unwrap();
        for (k, v) in &r.inputs.values {
            write!(out, "  {k}={v}").unwrap();
        }
        out.push('\n');
        out.push_str(&render_assessments(&r.assessments));
        out.push('\n');
    }
    writeln!(out, "probable diseases (threshold {:.1})", report.threshold).unwrap();
    out.push_str(&render_probable(&report.final_list));
    out
}

/// Machine-readable rendering shared by the command line and the HTTP API.
pub fn render_structured<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}
