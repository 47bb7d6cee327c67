use serde::{Deserialize, Serialize};

use super::AttributeSubset;
use crate::fuzzy::LinguisticVariable;

/// Upper bound on consultation phases (history, examination, investigation).
pub const MAX_PHASES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disease {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// One consultation phase and the attributes it interrogates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    /// 1-based.
    pub index: usize,
    pub name: String,
    pub attributes: AttributeSubset,
}

/// A row of the information system: the attribute terms that point at one
/// `(disease, chance term)` pair, and how reliable that knowledge is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoRow {
    pub disease: usize,
    pub disease_term: usize,
    /// Term index per attribute, in attribute declaration order.
    pub attr_terms: Vec<usize>,
    pub reliability: f64,
}

impl InfoRow {
    pub fn term_of(&self, attribute: usize) -> usize {
        self.attr_terms[attribute]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationSystem {
    pub name: String,
    pub attributes: Vec<LinguisticVariable>,
    #[serde(default)]
    pub attribute_descriptions: Vec<Option<String>>,
    pub output: LinguisticVariable,
    pub diseases: Vec<Disease>,
    pub phases: Vec<PhaseSpec>,
    pub rows: Vec<InfoRow>,
}

impl InformationSystem {
    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn disease_count(&self) -> usize {
        self.diseases.len()
    }

    /// Columns per row: disease pair, one per attribute, reliability.
    pub fn column_count(&self) -> usize {
        self.attributes.len() + 2
    }

    pub fn all_attributes(&self) -> AttributeSubset {
        AttributeSubset::from_indices(0..self.attributes.len())
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name() == name)
    }

    pub fn attribute_name(&self, index: usize) -> &str {
        self.attributes[index].name()
    }

    pub fn attribute_term_name(&self, attribute: usize, term: usize) -> &str {
        &self.attributes[attribute].terms()[term].name
    }

    pub fn disease_index(&self, name: &str) -> Option<usize> {
        self.diseases.iter().position(|d| d.name == name)
    }

    pub fn disease_name(&self, index: usize) -> &str {
        &self.diseases[index].name
    }

    pub fn output_term_name(&self, term: usize) -> &str {
        &self.output.terms()[term].name
    }

    pub fn phase(&self, index: usize) -> Option<&PhaseSpec> {
        self.phases.iter().find(|p| p.index == index)
    }

    /// The phase interrogating `attribute`.
    pub fn phase_of(&self, attribute: usize) -> Option<&PhaseSpec> {
        self.phases
            .iter()
            .find(|p| p.attributes.contains(attribute))
    }

    /// Render a subset with attribute names, e.g. `{a1, a4}`.
    pub fn subset_names(&self, subset: AttributeSubset) -> Vec<&str> {
        subset.iter().map(|i| self.attribute_name(i)).collect()
    }

    /// The same system with rows reordered; used to check order independence.
    pub fn with_rows(&self, rows: Vec<InfoRow>) -> Self {
        Self {
            rows,
            ..self.clone()
        }
    }
}
