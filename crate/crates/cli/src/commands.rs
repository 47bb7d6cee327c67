use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use latfuzz_core::inference::{
    explain as explain_rows, render_report, render_structured, run_consultation, surface_grid,
    ExplainRow, PatientFile,
};
use latfuzz_core::kb::{parse_information_system, ConflictPolicy};
use latfuzz_core::{
    CompiledKb, ConsultationReport, FuzzyError, InferenceError, InferenceOptions, MatchingMode,
    PatientInputs,
};
use latfuzz_service::{AppState, ServiceConfig, ServiceError};
use serde::Serialize;

use crate::{Failure, Format};

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_kb(path: &Path, policy: ConflictPolicy) -> Result<CompiledKb, Failure> {
    let text = read(path)?;
    let invalid = |e: latfuzz_core::KbError| Failure::Invalid(format!("{}: {e}", path.display()));
    if CompiledKb::is_artifact(&text) {
        CompiledKb::from_artifact(&text).map_err(invalid)
    } else {
        let sys = parse_information_system(&text).map_err(invalid)?;
        CompiledKb::compile(sys, policy).map_err(invalid)
    }
}

fn print(text: &str) {
    let mut stdout = std::io::stdout().lock();
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush());
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn validate(path: &Path, policy: ConflictPolicy, emit: Option<&Path>) -> Outcome {
    let kb = load_kb(path, policy)?;
    let sys = &kb.system;
    let stats = &kb.stats;
    for entry in kb.conflicts.resolved() {
        eprintln!("warning: {entry}");
    }
    let mut out = String::new();
    writeln!(out, "{}", sys.name).unwrap();
    writeln!(
        out,
        "{} attributes, {} columns, {} diseases, {} rows",
        stats.attributes,
        sys.column_count(),
        stats.diseases,
        stats.rows
    )
    .unwrap();
    writeln!(
        out,
        "{} nodes, {} rules, {} resolved conflicts",
        stats.nodes, stats.rules, stats.resolved_conflicts
    )
    .unwrap();
    for (spec, phase) in sys.phases.iter().zip(&stats.phases) {
        writeln!(
            out,
            "phase {} ({}): {}",
            phase.index,
            phase.name,
            sys.subset_names(spec.attributes).join(" ")
        )
        .unwrap();
        writeln!(out, "  {} nodes, {} rules", phase.nodes, phase.rules).unwrap();
        writeln!(out, "  nodes per level: {}", join(&phase.level_sizes)).unwrap();
        writeln!(out, "  rules per level: {}", join(&phase.rules_per_level)).unwrap();
    }
    if let Some(target) = emit {
        std::fs::write(target, kb.to_artifact())
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", target.display())))?;
        writeln!(out, "compiled artifact written to {}", target.display()).unwrap();
    }
    print(&out);
    Ok(())
}

fn consult(
    kb: &CompiledKb,
    patient: &Path,
    options: &InferenceOptions,
) -> Result<ConsultationReport, Failure> {
    let text = read(patient)?;
    let file = PatientFile::parse(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", patient.display())))?;
    run_consultation(kb, &file.steps(), options)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", patient.display())))
}

fn warn_if_silent(report: &ConsultationReport) {
    for outcome in &report.phases {
        let r = &outcome.result;
        if r.assessments.iter().all(|a| a.no_evidence) {
            eprintln!(
                "warning: phase {}: no rule fired under {} matching; every disease lacks evidence",
                r.phase,
                r.matching_mode.as_str()
            );
        }
    }
}

pub fn infer(
    kb: &Path,
    patient: &Path,
    mode: MatchingMode,
    threshold: Option<f64>,
    format: Format,
) -> Outcome {
    if let Some(t) = threshold.filter(|t| !t.is_finite()) {
        return Err(Failure::Usage(format!(
            "--threshold must be finite, got {t}"
        )));
    }
    let kb = load_kb(kb, ConflictPolicy::Strict)?;
    let options = InferenceOptions {
        mode,
        threshold,
        ..InferenceOptions::default()
    };
    let report = consult(&kb, patient, &options)?;
    warn_if_silent(&report);
    print(&match format {
        Format::Text => render_report(&report),
        Format::Structured => render_structured(&report),
    });
    Ok(())
}

#[derive(Serialize)]
struct ExplainedPhase<'a> {
    phase: usize,
    phase_name: &'a str,
    rows: Vec<ExplainRow<'a>>,
}

fn render_rows(rows: &[ExplainRow<'_>]) -> String {
    let w = rows
        .iter()
        .map(|r| r.disease.chars().count())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for row in rows {
        let act = row.activation;
        let clauses: Vec<String> = act
            .antecedent
            .iter()
            .map(|c| format!("{}={}[{:.4}]", c.attribute, c.term, c.degree))
            .collect();
        writeln!(
            out,
            "{:<w$}  {:.4}  {{{}}}#{}  {} -> {}  (r_s {})",
            row.disease,
            act.strength,
            act.origin.node.join(","),
            act.origin.class,
            clauses.join(" AND "),
            act.term,
            act.reliability
        )
        .unwrap();
    }
    if rows.is_empty() {
        out.push_str("(no rule fired)\n");
    }
    out
}

pub fn explain(
    kb: &Path,
    patient: &Path,
    disease: Option<&str>,
    mode: MatchingMode,
    all: bool,
    format: Format,
) -> Outcome {
    let kb = load_kb(kb, ConflictPolicy::Strict)?;
    if let Some(d) = disease.filter(|d| kb.system.disease_index(d).is_none()) {
        return Err(Failure::Usage(format!("unknown disease `{d}`")));
    }
    let options = InferenceOptions {
        mode,
        ..InferenceOptions::default()
    };
    let report = consult(&kb, patient, &options)?;
    let phases: Vec<ExplainedPhase<'_>> = report
        .phases
        .iter()
        .map(|outcome| ExplainedPhase {
            phase: outcome.result.phase,
            phase_name: &outcome.result.phase_name,
            rows: explain_rows(&outcome.result)
                .into_iter()
                .filter(|r| disease.is_none_or(|d| r.disease == d))
                .filter(|r| all || r.activation.strength > 0.0)
                .collect(),
        })
        .collect();
    print(&match format {
        Format::Structured => render_structured(&phases),
        Format::Text => {
            let mut out = String::new();
            for phase in &phases {
                writeln!(out, "phase {} ({})", phase.phase, phase.phase_name).unwrap();
                out.push_str(&render_rows(&phase.rows));
            }
            out
        }
    });
    Ok(())
}

fn parse_fixed(pairs: &[String]) -> Result<PatientInputs, Failure> {
    pairs
        .iter()
        .map(|pair| {
            let (name, value) = pair.split_once('=').ok_or_else(|| {
                Failure::Usage(format!("--fixed expects NAME=VALUE, got `{pair}`"))
            })?;
            let value: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    Failure::Usage(format!("--fixed {name}: `{value}` is not a number"))
                })?;
            Ok((name.trim().to_owned(), value))
        })
        .collect()
}

pub fn surface(
    kb: &Path,
    disease: &str,
    x: &str,
    y: &str,
    resolution: usize,
    fixed: &[String],
    mode: MatchingMode,
) -> Outcome {
    let kb = load_kb(kb, ConflictPolicy::Strict)?;
    let fixed = parse_fixed(fixed)?;
    let options = InferenceOptions {
        mode,
        ..InferenceOptions::default()
    };
    let fixed = (!fixed.is_empty()).then_some(&fixed);
    let grid =
        surface_grid(&kb, disease, x, y, fixed, resolution, &options).map_err(|e| match e {
            InferenceError::Fuzzy(FuzzyError::OutOfUniverse { .. }) => {
                Failure::Invalid(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        })?;
    print(&grid.to_csv());
    Ok(())
}

pub struct ServeFlags {
    pub kb: Option<PathBuf>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub journal: Option<PathBuf>,
    pub max_sessions: Option<usize>,
    pub ui_dir: Option<PathBuf>,
}

pub fn serve(flags: ServeFlags) -> Outcome {
    let mut config = ServiceConfig::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(kb) = flags.kb {
        config.kb_path = Some(kb);
    }
    if let Some(host) = flags.host {
        config.host = host;
    }
    if let Some(port) = flags.port {
        config.port = port;
    }
    if let Some(journal) = flags.journal {
        config.journal = Some(journal);
    }
    match flags.max_sessions {
        Some(0) => return Err(Failure::Usage("--max-sessions must be positive".into())),
        Some(n) => config.max_sessions = n,
        None => {}
    }
    if let Some(dir) = flags.ui_dir {
        config.ui_dir = Some(dir);
    }
    let addr = config
        .socket_addr()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let state = AppState::load(&config).map_err(|e| match e {
        ServiceError::NoKnowledgeBase => Failure::Usage(e.to_string()),
        ServiceError::Io { ref path, .. } if Some(path) == config.kb_path.as_ref() => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Invalid(other.to_string()),
    })?;
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::Invalid(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async {
        let listener = latfuzz_service::bind(addr)
            .await
            .map_err(|e| Failure::Invalid(e.to_string()))?;
        if let Ok(local) = listener.local_addr() {
            eprintln!(
                "serving {} on http://{local} (kb sha256 {})",
                state.kb.system.name, state.kb_checksum
            );
        }
        latfuzz_service::run(listener, Arc::new(state), &config)
            .await
            .map_err(|e| Failure::Invalid(e.to_string()))
    })
}
