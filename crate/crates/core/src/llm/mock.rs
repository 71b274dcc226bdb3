//! Offline clients. A scenario file is either
//! `{"mode": "scripted", "responses": [...]}` (served in order) or
//! `{"mode": "replay", "entries": [{"request_hash", "responses", "label"?}]}`
//! (served per request hash, each hash's list in order).

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::client::{ChatRequest, LlmClient, LlmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub request_hash: String,
    pub responses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Scenario {
    Scripted { responses: Vec<String> },
    Replay { entries: Vec<ScenarioEntry> },
}

impl Scenario {
    pub fn load(path: &Path) -> io::Result<Scenario> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(path, text)
    }

    pub fn into_client(self) -> Box<dyn LlmClient> {
        match self {
            Scenario::Scripted { responses } => Box::new(ScriptedClient::new(
                responses.into_iter().map(ScriptedReply::Ok),
            )),
            Scenario::Replay { entries } => Box::new(ReplayClient::new(entries)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptedReply {
    Ok(String),
    Err(LlmError),
}

/// Serves replies in order regardless of the request. Calls must be
/// sequential for the order to mean anything, hence a concurrency of 1.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    replies: Mutex<VecDeque<ScriptedReply>>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedClient {
    pub fn new(replies: impl IntoIterator<Item = ScriptedReply>) -> Self {
        ScriptedClient {
            replies: Mutex::new(replies.into_iter().collect()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(texts.into_iter().map(|t| ScriptedReply::Ok(t.into())))
    }

    /// Every request received, in order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("poisoned").clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("poisoned").len()
    }
}

impl LlmClient for ScriptedClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        self.requests
            .lock()
            .expect("poisoned")
            .push(request.clone());
        match self.replies.lock().expect("poisoned").pop_front() {
            Some(ScriptedReply::Ok(s)) => Ok(s),
            Some(ScriptedReply::Err(e)) => Err(e),
            None => Err(LlmError::Mock("scripted replies exhausted".into())),
        }
    }

    fn max_concurrency(&self) -> Option<usize> {
        Some(1)
    }
}

#[derive(Debug)]
struct Slot {
    responses: Vec<String>,
    next: usize,
}

/// Serves canned responses keyed by [`ChatRequest::hash`].
#[derive(Debug)]
pub struct ReplayClient {
    slots: Mutex<HashMap<String, Slot>>,
}

impl ReplayClient {
    pub fn new(entries: impl IntoIterator<Item = ScenarioEntry>) -> Self {
        let mut slots: HashMap<String, Slot> = HashMap::new();
        for e in entries {
            slots
                .entry(e.request_hash)
                .or_insert_with(|| Slot {
                    responses: Vec::new(),
                    next: 0,
                })
                .responses
                .extend(e.responses);
        }
        ReplayClient {
            slots: Mutex::new(slots),
        }
    }
}

impl LlmClient for ReplayClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let hash = request.hash();
        let mut slots = self.slots.lock().expect("poisoned");
        let slot = slots
            .get_mut(&hash)
            .ok_or_else(|| LlmError::Mock(format!("no response recorded for request {hash}")))?;
        let r = slot
            .responses
            .get(slot.next)
            .cloned()
            .ok_or_else(|| LlmError::Mock(format!("responses for request {hash} exhausted")))?;
        slot.next += 1;
        Ok(r)
    }
}

type Responder = Box<dyn Fn(&ChatRequest) -> String + Send + Sync>;

/// Answers with a closure and remembers every exchange as a replay scenario.
pub struct RecordingClient {
    respond: Responder,
    log: Mutex<Vec<(String, String, Option<String>)>>,
    label: Mutex<Option<String>>,
}

impl RecordingClient {
    pub fn new(respond: impl Fn(&ChatRequest) -> String + Send + Sync + 'static) -> Self {
        RecordingClient {
            respond: Box::new(respond),
            log: Mutex::new(Vec::new()),
            label: Mutex::new(None),
        }
    }

    /// Label attached to subsequently recorded entries.
    pub fn set_label(&self, label: Option<String>) {
        *self.label.lock().expect("poisoned") = label;
    }

    /// Entries grouped by hash in first-seen order.
    pub fn scenario(&self) -> Scenario {
        let log = self.log.lock().expect("poisoned");
        let mut entries: Vec<ScenarioEntry> = Vec::new();
        for (hash, resp, label) in log.iter() {
            match entries.iter_mut().find(|e| &e.request_hash == hash) {
                Some(e) => e.responses.push(resp.clone()),
                None => entries.push(ScenarioEntry {
                    request_hash: hash.clone(),
                    responses: vec![resp.clone()],
                    label: label.clone(),
                }),
            }
        }
        Scenario::Replay { entries }
    }
}

impl LlmClient for RecordingClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let r = (self.respond)(request);
        let label = self.label.lock().expect("poisoned").clone();
        self.log
            .lock()
            .expect("poisoned")
            .push((request.hash(), r.clone(), label));
        Ok(r)
    }

    fn max_concurrency(&self) -> Option<usize> {
        Some(1)
    }
}
