//! The human-authored knowledge base file.
//!
//! ```json
//! {
//!   "format": 1,
//!   "variables": {
//!     "attributes": [{ "name": "a1", "universe": [0, 10],
//!                      "terms": [{ "name": "No", "range": [0, 4] }, ...] }, ...],
//!     "output": { "name": "chance", "universe": [0, 100], "terms": [...] }
//!   },
//!   "diseases": [{ "name": "d1", "description": "..." }, ...],
//!   "phases": [{ "name": "history", "attributes": ["a1", "a2"] }],
//!   "rows": [{ "disease": "d1", "term": "High",
//!              "attributes": { "a1": "Moderate", "a2": "No" }, "reliability": 0.8 }]
//! }
//! ```
//!
//! A term is given either as a `range` (converted to triangle vertices, with
//! shoulders at the universe bounds) or as explicit `vertices`.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;

use super::{AttributeSubset, Disease, InfoRow, InformationSystem, KbError, PhaseSpec, MAX_PHASES};
use crate::fuzzy::{LinguisticTerm, LinguisticVariable, TriangularMf, VariableKind};

pub const SOURCE_FORMAT: u64 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: u64,
    #[serde(default)]
    name: Option<String>,
    variables: Variables,
    diseases: Vec<Disease>,
    phases: Vec<PhaseDoc>,
    rows: Vec<RowDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Variables {
    attributes: Vec<VariableDoc>,
    output: VariableDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    name: String,
    #[serde(default)]
    description: Option<String>,
    universe: [f64; 2],
    terms: Vec<TermDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    name: String,
    #[serde(default)]
    range: Option<[f64; 2]>,
    #[serde(default)]
    vertices: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDoc {
    name: String,
    attributes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowDoc {
    disease: String,
    term: String,
    attributes: BTreeMap<String, String>,
    reliability: f64,
}

#[derive(Deserialize)]
struct FormatProbe {
    format: Option<u64>,
}

/// Parse and validate a knowledge base document.
pub fn parse_information_system(document: &str) -> Result<InformationSystem, KbError> {
    let syntax = |e: serde_json::Error| KbError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    // Check the version before the schema so old or future files get a useful message.
    let probe: FormatProbe = serde_json::from_str(document).map_err(syntax)?;
    if let Some(found) = probe.format.filter(|&f| f != SOURCE_FORMAT) {
        return Err(KbError::UnsupportedFormat {
            found,
            expected: SOURCE_FORMAT,
        });
    }
    let doc: Document = serde_json::from_str(document).map_err(syntax)?;
    validate(doc)
}

fn build_variable(doc: VariableDoc, kind: VariableKind) -> Result<LinguisticVariable, KbError> {
    let [lo, hi] = doc.universe;
    let wrap = |source| KbError::Variable {
        variable: doc.name.clone(),
        source,
    };
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in doc.terms {
        let mf = match (t.range, t.vertices) {
            (Some([l, u]), None) => TriangularMf::from_range(l, u, lo, hi),
            (None, Some([a, b, c])) => TriangularMf::new(a, b, c),
            _ => {
                return Err(KbError::TermSpec {
                    variable: doc.name.clone(),
                    term: t.name,
                    message: "give exactly one of `range` or `vertices`".into(),
                })
            }
        }
        .map_err(wrap)?;
        terms.push(LinguisticTerm { name: t.name, mf });
    }
    LinguisticVariable::new(doc.name.clone(), doc.universe, terms, kind).map_err(wrap)
}

fn validate(doc: Document) -> Result<InformationSystem, KbError> {
    if doc.format != SOURCE_FORMAT {
        return Err(KbError::UnsupportedFormat {
            found: doc.format,
            expected: SOURCE_FORMAT,
        });
    }
    if doc.variables.attributes.len() > AttributeSubset::CAPACITY {
        return Err(KbError::TooManyAttributes {
            found: doc.variables.attributes.len(),
            max: AttributeSubset::CAPACITY,
        });
    }

    let mut attributes = Vec::new();
    let mut attribute_descriptions = Vec::new();
    for var in doc.variables.attributes {
        if attributes
            .iter()
            .any(|a: &LinguisticVariable| a.name() == var.name)
        {
            return Err(KbError::Duplicate {
                what: "attribute",
                name: var.name,
            });
        }
        attribute_descriptions.push(var.description.clone());
        attributes.push(build_variable(var, VariableKind::InputAttribute)?);
    }
    let output = build_variable(doc.variables.output, VariableKind::DiseaseOutput)?;
    let attr_index: HashMap<&str, usize> = attributes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name(), i))
        .collect();

    for (i, d) in doc.diseases.iter().enumerate() {
        if doc.diseases[..i].iter().any(|o| o.name == d.name) {
            return Err(KbError::Duplicate {
                what: "disease",
                name: d.name.clone(),
            });
        }
    }

    let phases = validate_phases(&doc.phases, &attributes, &attr_index)?;

    if doc.rows.is_empty() {
        return Err(KbError::EmptySystem);
    }
    let mut rows: Vec<InfoRow> = Vec::with_capacity(doc.rows.len());
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (r, raw) in doc.rows.into_iter().enumerate() {
        let row_no = r + 1;
        let disease = doc
            .diseases
            .iter()
            .position(|d| d.name == raw.disease)
            .ok_or_else(|| KbError::UnknownDisease {
                row: row_no,
                disease: raw.disease.clone(),
            })?;
        let disease_term = output
            .term_index(&raw.term)
            .ok_or_else(|| KbError::UnknownTerm {
                row: row_no,
                column: "term".into(),
                term: raw.term.clone(),
                variable: output.name().to_owned(),
            })?;
        if !(0.0..=1.0).contains(&raw.reliability) {
            return Err(KbError::ReliabilityOutOfRange {
                row: row_no,
                value: raw.reliability,
            });
        }
        if let Some(unknown) = raw
            .attributes
            .keys()
            .find(|k| !attr_index.contains_key(k.as_str()))
        {
            return Err(KbError::UnknownAttribute {
                location: format!("row {row_no}"),
                attribute: unknown.clone(),
            });
        }
        let mut attr_terms = Vec::with_capacity(attributes.len());
        for var in &attributes {
            let term = raw
                .attributes
                .get(var.name())
                .ok_or_else(|| KbError::MissingAttribute {
                    row: row_no,
                    attribute: var.name().to_owned(),
                })?;
            let t = var.term_index(term).ok_or_else(|| KbError::UnknownTerm {
                row: row_no,
                column: var.name().to_owned(),
                term: term.clone(),
                variable: var.name().to_owned(),
            })?;
            attr_terms.push(t);
        }
        if let Some(&first) = seen.get(&(disease, disease_term)) {
            return Err(KbError::DuplicatePair {
                row: row_no,
                first_row: first,
                disease: raw.disease,
                term: raw.term,
            });
        }
        seen.insert((disease, disease_term), row_no);
        rows.push(InfoRow {
            disease,
            disease_term,
            attr_terms,
            reliability: raw.reliability,
        });
    }

    Ok(InformationSystem {
        name: doc.name.unwrap_or_default(),
        attributes,
        attribute_descriptions,
        output,
        diseases: doc.diseases,
        phases,
        rows,
    })
}

fn validate_phases(
    docs: &[PhaseDoc],
    attributes: &[LinguisticVariable],
    attr_index: &HashMap<&str, usize>,
) -> Result<Vec<PhaseSpec>, KbError> {
    if docs.is_empty() || docs.len() > MAX_PHASES {
        return Err(KbError::PhaseCount {
            found: docs.len(),
            max: MAX_PHASES,
        });
    }
    let mut owner: Vec<Option<usize>> = vec![None; attributes.len()];
    let mut phases = Vec::with_capacity(docs.len());
    for (p, doc) in docs.iter().enumerate() {
        if docs[..p].iter().any(|o| o.name == doc.name) {
            return Err(KbError::Duplicate {
                what: "phase",
                name: doc.name.clone(),
            });
        }
        if doc.attributes.is_empty() {
            return Err(KbError::EmptyPhase {
                phase: doc.name.clone(),
            });
        }
        let mut subset = AttributeSubset::EMPTY;
        for name in &doc.attributes {
            let &i = attr_index
                .get(name.as_str())
                .ok_or_else(|| KbError::UnknownAttribute {
                    location: format!("phase `{}`", doc.name),
                    attribute: name.clone(),
                })?;
            if let Some(prev) = owner[i] {
                return Err(KbError::PhaseOverlap {
                    attribute: name.clone(),
                    first: docs[prev].name.clone(),
                    second: doc.name.clone(),
                });
            }
            owner[i] = Some(p);
            subset.insert(i);
        }
        phases.push(PhaseSpec {
            index: p + 1,
            name: doc.name.clone(),
            attributes: subset,
        });
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(KbError::UnphasedAttribute {
            attribute: attributes[i].name().to_owned(),
        });
    }
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::REFERENCE_KB;

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(REFERENCE_KB).unwrap();
        f(&mut v);
        serde_json::to_string_pretty(&v).unwrap()
    }

    #[test]
    fn reference_table() {
        let sys = parse_information_system(REFERENCE_KB).unwrap();
        assert_eq!(sys.rows.len(), 5);
        assert_eq!(sys.attribute_count(), 5);
        assert_eq!(sys.disease_count(), 5);
        assert_eq!(sys.column_count(), 7);
        let rs: Vec<f64> = sys.rows.iter().map(|r| r.reliability).collect();
        assert_eq!(rs, vec![0.8, 0.7, 0.6, 0.6, 0.4]);
        assert_eq!(sys.phases.len(), 1);
        assert_eq!(sys.phases[0].attributes, sys.all_attributes());
        let verts: Vec<[f64; 3]> = sys.attributes[0]
            .terms()
            .iter()
            .map(|t| t.mf.vertices())
            .collect();
        assert_eq!(
            verts,
            vec![[0.0, 0.0, 4.0], [3.0, 5.0, 7.0], [6.0, 10.0, 10.0]]
        );
        let out: Vec<[f64; 3]> = sys.output.terms().iter().map(|t| t.mf.vertices()).collect();
        assert_eq!(
            out,
            vec![
                [0.0, 0.0, 10.0],
                [8.0, 16.5, 25.0],
                [20.0, 45.0, 70.0],
                [60.0, 100.0, 100.0]
            ]
        );
    }

    #[test]
    fn reliability_out_of_range_names_row() {
        let doc = edit(|v| v["rows"][2]["reliability"] = 1.2.into());
        let err = parse_information_system(&doc).unwrap_err();
        assert_eq!(err, KbError::ReliabilityOutOfRange { row: 3, value: 1.2 });
        assert!(err.to_string().starts_with("row 3"));
    }

    #[test]
    fn empty_rows() {
        let doc = edit(|v| v["rows"] = serde_json::json!([]));
        assert_eq!(parse_information_system(&doc), Err(KbError::EmptySystem));
    }

    #[test]
    fn unknown_term_is_located() {
        let doc = edit(|v| v["rows"][1]["attributes"]["a4"] = "Mild".into());
        assert_eq!(
            parse_information_system(&doc),
            Err(KbError::UnknownTerm {
                row: 2,
                column: "a4".into(),
                term: "Mild".into(),
                variable: "a4".into()
            })
        );
        let doc = edit(|v| v["rows"][0]["term"] = "Certain".into());
        assert!(matches!(
            parse_information_system(&doc),
            Err(KbError::UnknownTerm { row: 1, column, .. }) if column == "term"
        ));
    }

    #[test]
    fn missing_column() {
        let doc = edit(|v| {
            v["rows"][4]["attributes"]
                .as_object_mut()
                .unwrap()
                .remove("a3");
        });
        assert_eq!(
            parse_information_system(&doc),
            Err(KbError::MissingAttribute {
                row: 5,
                attribute: "a3".into()
            })
        );
    }

    #[test]
    fn duplicate_pair() {
        let doc = edit(|v| {
            v["rows"][1]["disease"] = "d1".into();
        });
        assert_eq!(
            parse_information_system(&doc),
            Err(KbError::DuplicatePair {
                row: 2,
                first_row: 1,
                disease: "d1".into(),
                term: "High".into()
            })
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_information_system("{\n  \"format\": 1,\n  oops\n}").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn wrong_format_version() {
        let doc = edit(|v| v["format"] = 2.into());
        assert_eq!(
            parse_information_system(&doc),
            Err(KbError::UnsupportedFormat {
                found: 2,
                expected: 1
            })
        );
    }

    #[test]
    fn phase_validation() {
        let doc = edit(|v| {
            v["phases"] = serde_json::json!([
                { "name": "history", "attributes": ["a1", "a2", "a3"] },
                { "name": "examination", "attributes": ["a3", "a4", "a5"] }
            ])
        });
        assert!(matches!(
            parse_information_system(&doc),
            Err(KbError::PhaseOverlap { .. })
        ));
        let doc =
            edit(|v| v["phases"] = serde_json::json!([{ "name": "h", "attributes": ["a1"] }]));
        assert!(matches!(
            parse_information_system(&doc),
            Err(KbError::UnphasedAttribute { .. })
        ));
        let doc = edit(|v| v["phases"] = serde_json::json!([]));
        assert!(matches!(
            parse_information_system(&doc),
            Err(KbError::PhaseCount { .. })
        ));
    }

    #[test]
    fn explicit_vertices_and_bad_term_spec() {
        let doc = edit(|v| {
            v["variables"]["output"]["terms"][1] =
                serde_json::json!({ "name": "Low", "vertices": [8, 15, 25] });
        });
        let sys = parse_information_system(&doc).unwrap();
        assert_eq!(sys.output.terms()[1].mf.vertices(), [8.0, 15.0, 25.0]);
        let doc = edit(|v| {
            v["variables"]["output"]["terms"][1] = serde_json::json!({ "name": "Low" });
        });
        assert!(matches!(
            parse_information_system(&doc),
            Err(KbError::TermSpec { .. })
        ));
    }
}
