//! Lattice-structured fuzzy knowledge bases with phased Mamdani inference.
//!
//! A knowledge base starts life as an information system: a table of
//! `(disease, chance term)` rows described by linguistic attribute values and
//! a reliability strength. Compiling it materializes, for every phase, the
//! power-set lattice of that phase's attributes. Each lattice node carries
//! the elementary sets of the indiscernibility relation over its attribute
//! subset and the production rules derived from them.
//!
//! Consultations fuzzify crisp patient inputs, fire the rules of the matching
//! lattice nodes, defuzzify a chance of occurrence per disease and narrow the
//! probable-disease list phase by phase.

pub mod fuzzy;
pub mod inference;
pub mod kb;

pub use fuzzy::{FuzzyError, LinguisticTerm, LinguisticVariable, TriangularMf, VariableKind};
pub use inference::{
    ConsultationReport, DiseaseAssessment, InferenceError, InferenceOptions, MatchingMode,
    PatientInputs, PhaseResult,
};
pub use kb::{CompiledKb, InformationSystem, KbError};

/// The low-back-pain reference knowledge base shipped with the crate.
pub const REFERENCE_KB: &str = include_str!("../assets/lbp_reference.json");

/// Parse and compile [`REFERENCE_KB`].
pub fn reference_kb() -> CompiledKb {
    let sys = kb::parse_information_system(REFERENCE_KB).expect("bundled knowledge base parses");
    CompiledKb::compile(sys, kb::ConflictPolicy::Strict).expect("bundled knowledge base compiles")
}
