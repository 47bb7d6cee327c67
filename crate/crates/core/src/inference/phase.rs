use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{select_rules, InferenceError, InferenceOptions, MatchingMode, PatientInputs};
use crate::fuzzy::{
    clip_and_aggregate, defuzz_centroid, firing_strength, Fuzzified, TermActivation,
};
use crate::kb::{AttributeSubset, CompiledKb, Rule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseDegree {
    pub attribute: String,
    pub term: String,
    pub degree: f64,
}

/// Which node and elementary set a fired rule came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRef {
    pub node: Vec<String>,
    pub mask: u64,
    pub class: usize,
}

/// One fired rule, with the degree of every clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleActivation {
    pub origin: RuleRef,
    pub antecedent: Vec<ClauseDegree>,
    pub disease: String,
    pub term: String,
    pub reliability: f64,
    pub strength: f64,
}

impl RuleActivation {
    /// Strongest first, then by node mask and class.
    pub fn explain_order(&self, other: &Self) -> Ordering {
        other
            .strength
            .total_cmp(&self.strength)
            .then(self.origin.mask.cmp(&other.origin.mask))
            .then(self.origin.class.cmp(&other.origin.class))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseAssessment {
    pub disease: String,
    pub crisp_chance: f64,
    pub label: String,
    pub no_evidence: bool,
    /// Some selected rule concludes about this disease, fired or not.
    pub reassessed: bool,
    /// Every selected rule about this disease, strongest first; rules that
    /// did not fire appear with strength 0.
    pub activations: Vec<RuleActivation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: usize,
    pub phase_name: String,
    pub matching_mode: MatchingMode,
    pub inputs: PatientInputs,
    /// One per declared disease, in declaration order.
    pub assessments: Vec<DiseaseAssessment>,
}

impl PhaseResult {
    pub fn assessment(&self, disease: &str) -> Option<&DiseaseAssessment> {
        self.assessments.iter().find(|a| a.disease == disease)
    }
}

pub(crate) fn fuzzify_inputs(
    kb: &CompiledKb,
    phase: usize,
    inputs: &PatientInputs,
) -> Result<(Fuzzified, AttributeSubset), InferenceError> {
    let sys = &kb.system;
    let (spec, _) = kb.phase(phase).ok_or(InferenceError::UnknownPhase(phase))?;
    if inputs.is_empty() {
        return Err(InferenceError::NoInputs { phase });
    }
    let mut fuzzified = Fuzzified::new(sys.attributes.iter().map(|a| a.name()));
    let mut provided = AttributeSubset::EMPTY;
    for (name, &value) in &inputs.values {
        let a = sys
            .attribute_index(name)
            .ok_or_else(|| InferenceError::UnknownAttribute(name.clone()))?;
        if !spec.attributes.contains(a) {
            return Err(InferenceError::AttributeNotInPhase {
                attribute: name.clone(),
                phase,
            });
        }
        fuzzified.insert(a, sys.attributes[a].fuzzify(value)?);
        provided.insert(a);
    }
    Ok((fuzzified, provided))
}

fn activation(
    kb: &CompiledKb,
    rule: &Rule,
    fuzzified: &Fuzzified,
    strength: f64,
) -> RuleActivation {
    let sys = &kb.system;
    RuleActivation {
        origin: RuleRef {
            node: sys
                .subset_names(rule.origin.subset)
                .into_iter()
                .map(str::to_owned)
                .collect(),
            mask: rule.origin.subset.mask(),
            class: rule.origin.class,
        },
        antecedent: rule
            .antecedent
            .iter()
            .map(|&(a, t)| ClauseDegree {
                attribute: sys.attribute_name(a).to_owned(),
                term: sys.attribute_term_name(a, t).to_owned(),
                degree: fuzzified
                    .degree(a, t)
                    .expect("selected rules only mention provided attributes"),
            })
            .collect(),
        disease: sys.disease_name(rule.disease).to_owned(),
        term: sys.output_term_name(rule.term).to_owned(),
        reliability: rule.reliability,
        strength,
    }
}

/// Assess every disease of the knowledge base from one phase's inputs.
pub fn infer_phase(
    kb: &CompiledKb,
    phase: usize,
    inputs: &PatientInputs,
    options: &InferenceOptions,
) -> Result<PhaseResult, InferenceError> {
    let sys = &kb.system;
    let output = &sys.output;
    if options.resolution < 2 {
        return Err(InferenceError::InvalidResolution(options.resolution));
    }
    let (fuzzified, provided) = fuzzify_inputs(kb, phase, inputs)?;
    let rules = select_rules(kb, phase, provided, options.mode)?;

    let n_terms = output.terms().len();
    let mut levels = vec![vec![0.0f64; n_terms]; sys.disease_count()];
    let mut reassessed = vec![false; sys.disease_count()];
    let mut fired: Vec<Vec<RuleActivation>> = vec![Vec::new(); sys.disease_count()];
    for rule in rules {
        reassessed[rule.disease] = true;
        let mut strength = firing_strength(rule.antecedent.iter().copied(), &fuzzified)?;
        if options.weighted {
            strength *= rule.reliability;
        }
        let level = &mut levels[rule.disease][rule.term];
        *level = level.max(strength);
        fired[rule.disease].push(activation(kb, rule, &fuzzified, strength));
    }

    let mut assessments = Vec::with_capacity(sys.disease_count());
    for (d, mut activations) in fired.into_iter().enumerate() {
        activations.sort_by(RuleActivation::explain_order);
        let clips: Vec<TermActivation> = levels[d]
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(t, &l)| TermActivation::new(sys.output_term_name(t), l))
            .collect();
        let no_evidence = clips.is_empty();
        let crisp_chance = if no_evidence {
            output.lo()
        } else {
            defuzz_centroid(&clip_and_aggregate(output, &clips, options.resolution)?)?
        };
        assessments.push(DiseaseAssessment {
            disease: sys.disease_name(d).to_owned(),
            crisp_chance,
            label: output.label_crisp(crisp_chance)?.to_owned(),
            no_evidence,
            reassessed: reassessed[d],
            activations,
        });
    }

    let spec = sys.phase(phase).expect("phase checked while fuzzifying");
    Ok(PhaseResult {
        phase,
        phase_name: spec.name.clone(),
        matching_mode: options.mode,
        inputs: inputs.clone(),
        assessments,
    })
}

/// One row of a rule viewer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainRow<'a> {
    pub disease: &'a str,
    pub activation: &'a RuleActivation,
}

/// Every activation of the phase, strongest first.
pub fn explain(result: &PhaseResult) -> Vec<ExplainRow<'_>> {
    let mut rows: Vec<(usize, ExplainRow<'_>)> = result
        .assessments
        .iter()
        .enumerate()
        .flat_map(|(d, a)| {
            a.activations.iter().map(move |act| {
                (
                    d,
                    ExplainRow {
                        disease: &a.disease,
                        activation: act,
                    },
                )
            })
        })
        .collect();
    rows.sort_by(|(da, a), (db, b)| a.activation.explain_order(b.activation).then(da.cmp(db)));
    rows.into_iter().map(|(_, r)| r).collect()
}
