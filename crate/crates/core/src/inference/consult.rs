use serde::{Deserialize, Serialize};

use super::{infer_phase, InferenceError, InferenceOptions, PatientInputs, PhaseResult};
use crate::kb::CompiledKb;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbableEntry {
    pub disease: String,
    pub crisp_chance: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOutcome {
    pub result: PhaseResult,
    /// Probable diseases after this phase, highest chance first.
    pub probable: Vec<ProbableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsultationReport {
    pub threshold: f64,
    pub phases: Vec<PhaseOutcome>,
    #[serde(rename = "final")]
    pub final_list: Vec<ProbableEntry>,
}

impl ConsultationReport {
    pub fn last_phase(&self) -> Option<usize> {
        self.phases.last().map(|p| p.result.phase)
    }

    /// The consultation as it stood before `phase` was run; `None` when no
    /// earlier phase remains.
    pub fn before_phase(&self, phase: usize) -> Option<Self> {
        let phases: Vec<PhaseOutcome> = self
            .phases
            .iter()
            .filter(|p| p.result.phase < phase)
            .cloned()
            .collect();
        let final_list = phases.last()?.probable.clone();
        Some(Self {
            threshold: self.threshold,
            phases,
            final_list,
        })
    }
}

/// Threshold used when the options leave it open: where the first output
/// term (the "no chance" term) reaches zero.
pub fn effective_threshold(kb: &CompiledKb, options: &InferenceOptions) -> f64 {
    options
        .threshold
        .unwrap_or_else(|| kb.system.output.terms()[0].mf.c())
}

/// Narrow the probable list with a new phase result.
///
/// Without a previous list every disease with evidence at or above
/// `threshold` is kept. Afterwards only previously kept diseases survive:
/// those reassessed in this phase must stay at or above `threshold` and take
/// their new value; the rest carry forward unchanged.
pub fn refine_list(
    previous: Option<&[ProbableEntry]>,
    result: &PhaseResult,
    threshold: f64,
) -> Vec<ProbableEntry> {
    let qualifies = |a: &super::DiseaseAssessment| !a.no_evidence && a.crisp_chance >= threshold;
    let entry = |a: &super::DiseaseAssessment| ProbableEntry {
        disease: a.disease.clone(),
        crisp_chance: a.crisp_chance,
        label: a.label.clone(),
    };
    let mut list: Vec<(usize, ProbableEntry)> = match previous {
        None => result
            .assessments
            .iter()
            .enumerate()
            .filter(|(_, a)| qualifies(a))
            .map(|(i, a)| (i, entry(a)))
            .collect(),
        Some(prev) => prev
            .iter()
            .filter_map(|p| {
                let Some((i, a)) = result
                    .assessments
                    .iter()
                    .enumerate()
                    .find(|(_, a)| a.disease == p.disease)
                else {
                    return Some((usize::MAX, p.clone()));
                };
                match (a.reassessed, qualifies(a)) {
                    (false, _) => Some((i, p.clone())),
                    (true, true) => Some((i, entry(a))),
                    (true, false) => None,
                }
            })
            .collect(),
    };
    list.sort_by(|(ia, a), (ib, b)| b.crisp_chance.total_cmp(&a.crisp_chance).then(ia.cmp(ib)));
    list.into_iter().map(|(_, e)| e).collect()
}

/// Check that `next` may follow `last` in a consultation.
pub(crate) fn check_phase_order(last: Option<usize>, next: usize) -> Result<(), InferenceError> {
    let ok = match last {
        None => next == 1,
        Some(p) => next > p,
    };
    if ok {
        Ok(())
    } else {
        Err(InferenceError::PhaseOrder {
            after: last,
            found: next,
        })
    }
}

/// Continue a consultation (or start one, given `None`) by one phase.
pub fn continue_consultation(
    kb: &CompiledKb,
    report: Option<&ConsultationReport>,
    phase: usize,
    inputs: &PatientInputs,
    options: &InferenceOptions,
) -> Result<ConsultationReport, InferenceError> {
    check_phase_order(report.and_then(ConsultationReport::last_phase), phase)?;
    let threshold = effective_threshold(kb, options);
    let result = infer_phase(kb, phase, inputs, options)?;
    let probable = refine_list(report.map(|r| r.final_list.as_slice()), &result, threshold);
    let mut phases = report.map(|r| r.phases.clone()).unwrap_or_default();
    phases.push(PhaseOutcome {
        result,
        probable: probable.clone(),
    });
    Ok(ConsultationReport {
        threshold,
        phases,
        final_list: probable,
    })
}

/// Run phases in order, refining the probable list after each.
pub fn run_consultation(
    kb: &CompiledKb,
    phases: &[(usize, PatientInputs)],
    options: &InferenceOptions,
) -> Result<ConsultationReport, InferenceError> {
    let mut report: Option<ConsultationReport> = None;
    for (phase, inputs) in phases {
        report = Some(continue_consultation(
            kb,
            report.as_ref(),
            *phase,
            inputs,
            options,
        )?);
    }
    report.ok_or(InferenceError::NoPhases)
}
