use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use latfuzz_core::inference::{continue_consultation, PhaseOutcome, ProbableEntry};
use latfuzz_core::{
    CompiledKb, ConsultationReport, InferenceError, InferenceOptions, MatchingMode, PatientInputs,
    PhaseResult,
};
use serde::{Deserialize, Serialize};

/// One accepted phase submission, kept even after a later resubmission
/// replaces its result in the live consultation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub phase: usize,
    pub inputs: PatientInputs,
    pub mode: MatchingMode,
    pub submitted_at: String,
    /// The submission replaced phases already completed.
    pub rewound: bool,
    pub result: PhaseResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forked_from: Option<String>,
    pub report: Option<ConsultationReport>,
    pub audit: Vec<AuditEntry>,
}

impl Session {
    pub fn new(id: String, created_at: String) -> Self {
        Self {
            id,
            created_at,
            forked_from: None,
            report: None,
            audit: Vec::new(),
        }
    }

    /// A new session starting from this one's current consultation.
    pub fn fork(&self, id: String, created_at: String) -> Self {
        Self {
            id,
            created_at,
            forked_from: Some(self.id.clone()),
            report: self.report.clone(),
            audit: Vec::new(),
        }
    }

    pub fn last_phase(&self) -> Option<usize> {
        self.report
            .as_ref()
            .and_then(ConsultationReport::last_phase)
    }

    /// Run `phase` on `inputs`. A phase at or before the last completed one
    /// rewinds the consultation to just before it; the audit keeps every
    /// submission regardless.
    pub fn submit(
        &mut self,
        kb: &CompiledKb,
        phase: usize,
        inputs: PatientInputs,
        options: &InferenceOptions,
        submitted_at: String,
    ) -> Result<Submitted<'_>, InferenceError> {
        let rewound = self.last_phase().is_some_and(|last| phase <= last);
        let base = match (&self.report, rewound) {
            (Some(report), true) => report.before_phase(phase),
            (report, _) => report.clone(),
        };
        let report = continue_consultation(kb, base.as_ref(), phase, &inputs, options)?;
        let outcome = report.phases.last().expect("phase just appended").clone();
        self.audit.push(AuditEntry {
            phase,
            inputs,
            mode: options.mode,
            submitted_at,
            rewound,
            result: outcome.result,
        });
        self.report = Some(report);
        Ok(Submitted {
            session: &self.id,
            rewound,
            outcome: self.report.as_ref().unwrap().phases.last().unwrap(),
        })
    }

    pub fn view(&self) -> SessionView<'_> {
        SessionView {
            id: &self.id,
            created_at: &self.created_at,
            forked_from: self.forked_from.as_deref(),
            last_phase: self.last_phase(),
            completed_phases: self
                .report
                .iter()
                .flat_map(|r| r.phases.iter().map(|p| p.result.phase))
                .collect(),
            probable: self.report.as_ref().map(|r| r.final_list.as_slice()),
            audit: &self.audit,
        }
    }
}

/// Response to a phase submission.
#[derive(Debug, Serialize)]
pub struct Submitted<'a> {
    pub session: &'a str,
    pub rewound: bool,
    #[serde(flatten)]
    pub outcome: &'a PhaseOutcome,
}

#[derive(Debug, Serialize)]
pub struct SessionView<'a> {
    pub id: &'a str,
    pub created_at: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forked_from: Option<&'a str>,
    pub last_phase: Option<usize>,
    pub completed_phases: Vec<usize>,
    pub probable: Option<&'a [ProbableEntry]>,
    pub audit: &'a [AuditEntry],
}

pub type SessionHandle = Arc<Mutex<Session>>;

/// In-memory sessions, each behind its own lock.
#[derive(Debug)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, SessionHandle>>,
    max_sessions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityExceeded {
    pub max_sessions: usize,
}

impl SessionStore {
    pub fn new(max_sessions: usize) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            max_sessions,
        }
    }

    pub fn max_sessions(&self) -> usize {
        self.max_sessions
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    /// Insert `session` unless the store is full. `before_insert` runs under
    /// the store lock once room is confirmed; its error aborts the insert.
    pub fn insert_with<E>(
        &self,
        session: Session,
        before_insert: impl FnOnce(&Session) -> Result<(), E>,
    ) -> Result<Result<SessionHandle, E>, CapacityExceeded> {
        let mut sessions = self.sessions.write().unwrap();
        if sessions.len() >= self.max_sessions {
            return Err(CapacityExceeded {
                max_sessions: self.max_sessions,
            });
        }
        if let Err(e) = before_insert(&session) {
            return Ok(Err(e));
        }
        let id = session.id.clone();
        let handle = Arc::new(Mutex::new(session));
        sessions.insert(id, handle.clone());
        Ok(Ok(handle))
    }

    pub fn insert(&self, session: Session) -> Result<SessionHandle, CapacityExceeded> {
        self.insert_with(session, |_| Ok::<_, std::convert::Infallible>(()))
            .map(|r| r.unwrap_or_else(|never| match never {}))
    }

    pub fn remove(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.write().unwrap().remove(id)
    }
}
