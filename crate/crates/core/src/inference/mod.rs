//! Phased consultations over a compiled knowledge base.

mod consult;
mod patient;
mod phase;
mod render;
mod select;
mod surface;

pub use consult::{
    continue_consultation, effective_threshold, refine_list, run_consultation, ConsultationReport,
    PhaseOutcome, ProbableEntry,
};
pub use patient::{PatientFile, PatientPhase};
pub use phase::{
    explain, infer_phase, ClauseDegree, DiseaseAssessment, ExplainRow, PhaseResult, RuleActivation,
    RuleRef,
};
pub use render::{render_assessments, render_report, render_structured};
pub use select::select_rules;
pub use surface::{surface_grid, SurfaceGrid};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{FuzzyError, DEFAULT_RESOLUTION};

/// Which lattice nodes are searched for a set of provided attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingMode {
    /// Every node whose attribute set is a nonempty subset of the provided ones.
    #[default]
    SubsetClosure,
    /// Only the node whose attribute set equals the provided ones.
    StrictLevel,
}

impl MatchingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SubsetClosure => "subset-closure",
            Self::StrictLevel => "strict-level",
        }
    }
}

impl std::str::FromStr for MatchingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subset-closure" => Ok(Self::SubsetClosure),
            "strict-level" => Ok(Self::StrictLevel),
            other => Err(format!(
                "unknown matching mode `{other}` (expected subset-closure or strict-level)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    pub mode: MatchingMode,
    /// Experimental: scale firing strengths by rule reliability.
    pub weighted: bool,
    /// Samples across the output universe for defuzzification.
    pub resolution: usize,
    /// Probable-list cut-off; defaults to the right foot of the first output term.
    pub threshold: Option<f64>,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            mode: MatchingMode::default(),
            weighted: false,
            resolution: DEFAULT_RESOLUTION,
            threshold: None,
        }
    }
}

/// Crisp measurements keyed by attribute name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatientInputs {
    pub values: BTreeMap<String, f64>,
}

impl PatientInputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, attribute: impl Into<String>, value: f64) -> Self {
        self.values.insert(attribute.into(), value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for PatientInputs {
    fn from_iter<T: IntoIterator<Item = (S, f64)>>(iter: T) -> Self {
        Self {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("unknown phase {0}")]
    UnknownPhase(usize),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` does not belong to phase {phase}")]
    AttributeNotInPhase { attribute: String, phase: usize },
    #[error("no inputs provided for phase {phase}")]
    NoInputs { phase: usize },
    #[error("phase {found} cannot follow {}", match .after { Some(p) => format!("phase {p}"), None => "the start of a consultation".to_owned() })]
    PhaseOrder { after: Option<usize>, found: usize },
    #[error("a consultation needs at least one phase")]
    NoPhases,
    #[error("unknown disease `{0}`")]
    UnknownDisease(String),
    #[error("invalid surface axes: {0}")]
    InvalidAxes(String),
    #[error("resolution must be at least 2, got {0}")]
    InvalidResolution(usize),
    #[error("patient file: {0}")]
    PatientFile(String),
}
