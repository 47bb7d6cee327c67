use std::path::Path;

use latfuzz_core::inference::effective_threshold;
use latfuzz_core::kb::{ARTIFACT_FORMAT, SOURCE_FORMAT};
use latfuzz_core::{CompiledKb, InferenceOptions, LinguisticVariable};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::journal::{self, Journal};
use crate::session::SessionStore;
use crate::{ServiceConfig, ServiceError};

/// Everything request handlers share. The knowledge base never changes after
/// startup.
#[derive(Debug)]
pub struct AppState {
    pub kb: CompiledKb,
    /// SHA-256 of the knowledge base file as loaded.
    pub kb_checksum: String,
    /// Pre-rendered `GET /api/kb` body.
    pub kb_summary: String,
    pub options: InferenceOptions,
    pub sessions: SessionStore,
    pub journal: Option<Journal>,
}

impl AppState {
    /// State for `text`, a knowledge base source or compiled artifact.
    pub fn from_kb_text(text: &str, max_sessions: usize) -> Result<Self, ServiceError> {
        let kb = CompiledKb::load(text).map_err(|source| ServiceError::Kb {
            path: None,
            source: Box::new(source),
        })?;
        Ok(Self::new(kb, text.as_bytes(), max_sessions))
    }

    pub fn new(kb: CompiledKb, kb_bytes: &[u8], max_sessions: usize) -> Self {
        let options = InferenceOptions::default();
        let kb_summary = kb_summary(&kb, &options);
        Self {
            kb_checksum: hex::encode(Sha256::digest(kb_bytes)),
            kb_summary,
            kb,
            options,
            sessions: SessionStore::new(max_sessions),
            journal: None,
        }
    }

    /// Load the configured knowledge base and replay the journal, if any.
    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let path = config
            .kb_path
            .as_deref()
            .ok_or(ServiceError::NoKnowledgeBase)?;
        let text = read(path)?;
        let kb = CompiledKb::load(&text).map_err(|source| ServiceError::Kb {
            path: Some(path.to_owned()),
            source: Box::new(source),
        })?;
        let mut state = Self::new(kb, text.as_bytes(), config.max_sessions);
        if let Some(journal) = &config.journal {
            state.attach_journal(journal)?;
        }
        Ok(state)
    }

    /// Replay `path` into the session table, then append to it from now on.
    /// Returns the number of replayed events.
    pub fn attach_journal(&mut self, path: &Path) -> Result<usize, ServiceError> {
        let events = journal::replay(path, &self.kb, &self.options, &self.sessions)?;
        self.journal = Some(Journal::open(path)?);
        Ok(events)
    }
}

fn read(path: &Path) -> Result<String, ServiceError> {
    std::fs::read_to_string(path).map_err(|source| ServiceError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    format: u64,
    compiled_format: u64,
    attributes: Vec<VariableSummary<'a>>,
    output: VariableSummary<'a>,
    diseases: Vec<DiseaseSummary<'a>>,
    phases: Vec<PhaseSummary<'a>>,
    nodes: usize,
    rules: usize,
    resolved_conflicts: usize,
    default_threshold: f64,
}

#[derive(Serialize)]
struct VariableSummary<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase: Option<usize>,
    universe: [f64; 2],
    terms: Vec<TermSummary<'a>>,
}

#[derive(Serialize)]
struct TermSummary<'a> {
    name: &'a str,
    vertices: [f64; 3],
}

#[derive(Serialize)]
struct DiseaseSummary<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<&'a str>,
}

#[derive(Serialize)]
struct PhaseSummary<'a> {
    index: usize,
    name: &'a str,
    attributes: Vec<&'a str>,
    nodes: usize,
    level_sizes: &'a [usize],
    rules_per_level: &'a [usize],
    rules: usize,
}

fn variable<'a>(
    var: &'a LinguisticVariable,
    description: Option<&'a str>,
    phase: Option<usize>,
) -> VariableSummary<'a> {
    VariableSummary {
        name: var.name(),
        description,
        phase,
        universe: var.universe(),
        terms: var
            .terms()
            .iter()
            .map(|t| TermSummary {
                name: &t.name,
                vertices: t.mf.vertices(),
            })
            .collect(),
    }
}

/// Render the knowledge base overview served at `GET /api/kb`.
pub fn kb_summary(kb: &CompiledKb, options: &InferenceOptions) -> String {
    let sys = &kb.system;
    let summary = Summary {
        name: &sys.name,
        format: SOURCE_FORMAT,
        compiled_format: ARTIFACT_FORMAT,
        attributes: sys
            .attributes
            .iter()
            .enumerate()
            .map(|(i, var)| {
                let description = sys.attribute_descriptions.get(i).and_then(Option::as_deref);
                variable(var, description, sys.phase_of(i).map(|p| p.index))
            })
            .collect(),
        output: variable(&sys.output, None, None),
        diseases: sys
            .diseases
            .iter()
            .map(|d| DiseaseSummary {
                name: &d.name,
                description: d.description.as_deref(),
            })
            .collect(),
        phases: sys
            .phases
            .iter()
            .zip(&kb.stats.phases)
            .map(|(spec, stats)| PhaseSummary {
                index: spec.index,
                name: &spec.name,
                attributes: sys.subset_names(spec.attributes),
                nodes: stats.nodes,
                level_sizes: &stats.level_sizes,
                rules_per_level: &stats.rules_per_level,
                rules: stats.rules,
            })
            .collect(),
        nodes: kb.stats.nodes,
        rules: kb.stats.rules,
        resolved_conflicts: kb.stats.resolved_conflicts,
        default_threshold: effective_threshold(kb, options),
    };
    serde_json::to_string(&summary).expect("summary serializes")
}
