//! Append-only session journal. One JSON event per line; replaying the
//! events against the same knowledge base rebuilds every session.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use latfuzz_core::{CompiledKb, InferenceOptions, MatchingMode, PatientInputs};
use serde::{Deserialize, Serialize};

use crate::session::{Session, SessionStore};
use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum JournalEvent {
    Created {
        session: String,
        at: String,
    },
    Forked {
        session: String,
        source: String,
        at: String,
    },
    Submitted {
        session: String,
        phase: usize,
        inputs: PatientInputs,
        mode: MatchingMode,
        at: String,
    },
    Deleted {
        session: String,
    },
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: Mutex<File>,
}

impl Journal {
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| ServiceError::Io {
                path: path.to_owned(),
                source,
            })?;
        Ok(Self {
            path: path.to_owned(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, event: &JournalEvent) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(event).expect("journal events serialize");
        line.push('\n');
        let mut file = self.file.lock().unwrap();
        file.write_all(line.as_bytes())
            .and_then(|()| file.flush())
            .map_err(|source| ServiceError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

/// Rebuild sessions from the journal at `path`, if it exists.
pub fn replay(
    path: &Path,
    kb: &CompiledKb,
    base: &InferenceOptions,
    store: &SessionStore,
) -> Result<usize, ServiceError> {
    let file = match File::open(path) {
        Ok(file) => file,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(source) => {
            return Err(ServiceError::Io {
                path: path.to_owned(),
                source,
            })
        }
    };
    let mut events = 0;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ServiceError::Io {
            path: path.to_owned(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| ServiceError::Journal {
            path: path.to_owned(),
            line: n + 1,
            message,
        };
        let event: JournalEvent = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        apply(&event, kb, base, store).map_err(fail)?;
        events += 1;
    }
    Ok(events)
}

fn apply(
    event: &JournalEvent,
    kb: &CompiledKb,
    base: &InferenceOptions,
    store: &SessionStore,
) -> Result<(), String> {
    let full = |e: crate::session::CapacityExceeded| {
        format!("session limit of {} reached", e.max_sessions)
    };
    match event {
        JournalEvent::Created { session, at } => {
            store
                .insert(Session::new(session.clone(), at.clone()))
                .map_err(full)?;
        }
        JournalEvent::Forked {
            session,
            source,
            at,
        } => {
            let parent = store
                .get(source)
                .ok_or_else(|| format!("unknown session `{source}`"))?;
            let fork = parent.lock().unwrap().fork(session.clone(), at.clone());
            store.insert(fork).map_err(full)?;
        }
        JournalEvent::Submitted {
            session,
            phase,
            inputs,
            mode,
            at,
        } => {
            let handle = store
                .get(session)
                .ok_or_else(|| format!("unknown session `{session}`"))?;
            let options = InferenceOptions {
                mode: *mode,
                ..*base
            };
            handle
                .lock()
                .unwrap()
                .submit(kb, *phase, inputs.clone(), &options, at.clone())
                .map_err(|e| e.to_string())?;
        }
        JournalEvent::Deleted { session } => {
            store
                .remove(session)
                .ok_or_else(|| format!("unknown session `{session}`"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use latfuzz_core::reference_kb;

    #[test]
    fn replay_rebuilds_sessions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let journal = Journal::open(&path).unwrap();
        let events = [
            JournalEvent::Created {
                session: "a".into(),
                at: "t0".into(),
            },
            JournalEvent::Submitted {
                session: "a".into(),
                phase: 1,
                inputs: PatientInputs::new().with("a1", 4.8).with("a4", 5.0),
                mode: MatchingMode::SubsetClosure,
                at: "t1".into(),
            },
            JournalEvent::Forked {
                session: "b".into(),
                source: "a".into(),
                at: "t2".into(),
            },
            JournalEvent::Created {
                session: "c".into(),
                at: "t3".into(),
            },
            JournalEvent::Deleted {
                session: "c".into(),
            },
        ];
        for event in &events {
            journal.append(event).unwrap();
        }

        let kb = reference_kb();
        let store = SessionStore::new(8);
        let n = replay(&path, &kb, &InferenceOptions::default(), &store).unwrap();
        assert_eq!(n, events.len());
        assert_eq!(store.len(), 2);
        let a = store.get("a").unwrap();
        let b = store.get("b").unwrap();
        let a = a.lock().unwrap();
        assert_eq!(a.audit.len(), 1);
        assert_eq!(b.lock().unwrap().report, a.report);
    }

    #[test]
    fn missing_journal_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::new(8);
        let n = replay(
            &dir.path().join("absent.jsonl"),
            &reference_kb(),
            &InferenceOptions::default(),
            &store,
        )
        .unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn bad_event_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        std::fs::write(
            &path,
            "{\"event\":\"created\",\"session\":\"a\",\"at\":\"t\"}\n\
             {\"event\":\"submitted\",\"session\":\"a\",\"phase\":1,\"inputs\":{\"a1\":42},\"mode\":\"subset-closure\",\"at\":\"t\"}\n",
        )
        .unwrap();
        let err = replay(
            &path,
            &reference_kb(),
            &InferenceOptions::default(),
            &SessionStore::new(8),
        )
        .unwrap_err();
        match err {
            ServiceError::Journal { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("a1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
