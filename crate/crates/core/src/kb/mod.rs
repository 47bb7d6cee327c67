//! Information systems, the power-set lattice and rule generation.

mod compile;
mod lattice;
mod rules;
mod source;
mod subset;
mod system;

pub use compile::{
    CompileOptions, CompiledKb, KbStats, PhaseStats, ARTIFACT_FORMAT, DEFAULT_ATTRIBUTE_CAP,
};
pub use lattice::{
    build_lattice, equivalence_classes, indiscernible, ElementarySet, Lattice, LatticeNode,
};
pub use rules::{
    generate_rules, ConflictEntry, ConflictPolicy, ConflictReport, Resolution, Rule, RuleOrigin,
};
pub use source::{parse_information_system, SOURCE_FORMAT};
pub use subset::AttributeSubset;
pub use system::{Disease, InfoRow, InformationSystem, PhaseSpec, MAX_PHASES};

use thiserror::Error;

use crate::fuzzy::FuzzyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported knowledge base format {found} (expected {expected})")]
    UnsupportedFormat { found: u64, expected: u64 },
    #[error("variable `{variable}`: {source}")]
    Variable {
        variable: String,
        #[source]
        source: FuzzyError,
    },
    #[error("variable `{variable}`, term `{term}`: {message}")]
    TermSpec {
        variable: String,
        term: String,
        message: String,
    },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("{location}: unknown attribute `{attribute}`")]
    UnknownAttribute { location: String, attribute: String },
    #[error("row {row}, column {column}: `{term}` is not a term of `{variable}`")]
    UnknownTerm {
        row: usize,
        column: String,
        term: String,
        variable: String,
    },
    #[error("row {row}, column disease: unknown disease `{disease}`")]
    UnknownDisease { row: usize, disease: String },
    #[error("row {row}, column reliability: {value} is outside [0, 1]")]
    ReliabilityOutOfRange { row: usize, value: f64 },
    #[error("row {row}: missing attribute column `{attribute}`")]
    MissingAttribute { row: usize, attribute: String },
    #[error("row {row}: ({disease}, {term}) already defined by row {first_row}")]
    DuplicatePair {
        row: usize,
        first_row: usize,
        disease: String,
        term: String,
    },
    #[error("information system has no rows")]
    EmptySystem,
    #[error("expected between 1 and {max} phases, found {found}")]
    PhaseCount { found: usize, max: usize },
    #[error("phase `{phase}` lists no attributes")]
    EmptyPhase { phase: String },
    #[error("attribute `{attribute}` is assigned to both `{first}` and `{second}`")]
    PhaseOverlap {
        attribute: String,
        first: String,
        second: String,
    },
    #[error("attribute `{attribute}` is not assigned to any phase")]
    UnphasedAttribute { attribute: String },
    #[error("at most {max} attributes are supported, found {found}")]
    TooManyAttributes { found: usize, max: usize },
    #[error(
        "phase `{phase}` has {attributes} attributes, above the lattice cap of {cap}; \
         split it into smaller phases"
    )]
    CapacityExceeded {
        phase: String,
        attributes: usize,
        cap: usize,
    },
    #[error("inconsistent knowledge: {}", describe_conflicts(.0))]
    InconsistentKnowledge(ConflictReport),
    #[error("unsupported compiled artifact format {found} (expected {expected})")]
    UnsupportedArtifact { found: u64, expected: u64 },
}

fn describe_conflicts(report: &ConflictReport) -> String {
    let lines: Vec<String> = report.unresolvable().map(|e| e.to_string()).collect();
    lines.join("; ")
}
