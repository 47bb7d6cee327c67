use serde::{Deserialize, Serialize};

use super::{InferenceError, PatientInputs};

/// A patient record: crisp attribute values per consultation phase.
///
/// ```json
/// { "patient": "sample", "phases": [{ "phase": 1, "inputs": { "a1": 4.8 } }] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient: Option<String>,
    pub phases: Vec<PatientPhase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientPhase {
    pub phase: usize,
    pub inputs: PatientInputs,
}

impl PatientFile {
    pub fn parse(text: &str) -> Result<Self, InferenceError> {
        serde_json::from_str(text).map_err(|e| {
            InferenceError::PatientFile(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn steps(&self) -> Vec<(usize, PatientInputs)> {
        self.phases
            .iter()
            .map(|p| (p.phase, p.inputs.clone()))
            .collect()
    }
}
