//! Deterministic scripted chat backend for tests and offline runs.
//!
//! A fixture file holds an ordered rule list; each incoming request is
//! answered by the first rule whose tag, optional prompt substring, and
//! optional per-tag call index all match. Replies are therefore a pure
//! function of (tag, prompt, call index), which makes whole end-to-end runs
//! bit-reproducible.

use super::{CallTag, ChatProvider, ChatRequest, Completion};
use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

/// Extracts the reply from the prompt itself: the first substring between
/// `start` and `end`. Lets one rule answer many calls (e.g. "reply with the
/// current task content") without enumerating every prompt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Capture {
    pub start: String,
    pub end: String,
}

/// One canned reply. `when_contains` matches against the concatenated
/// system + user prompt; `index` matches the 0-based per-tag call counter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRule {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Capture>,
    #[serde(default)]
    pub reply: String,
}

/// A fixture: the ordered rule list loaded from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptFixture {
    pub rules: Vec<ScriptRule>,
}

impl ScriptFixture {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Records every request a scripted provider saw, for prompt-inspection tests.
pub type RequestLog = Arc<Mutex<Vec<(CallTag, String)>>>;

/// The scripted backend. Construct one per session: the per-tag call counters
/// are instance state, so concurrent sessions stay independent and
/// deterministic.
pub struct ScriptedProvider {
    rules: Arc<Vec<ScriptRule>>,
    counters: Mutex<BTreeMap<String, usize>>,
    request_log: Option<RequestLog>,
}

impl ScriptedProvider {
    pub fn new(rules: Arc<Vec<ScriptRule>>) -> Self {
        ScriptedProvider {
            rules,
            counters: Mutex::new(BTreeMap::new()),
            request_log: None,
        }
    }

    pub fn from_fixture(fixture: &ScriptFixture) -> Self {
        ScriptedProvider::new(Arc::new(fixture.rules.clone()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(ScriptedProvider::from_fixture(&ScriptFixture::from_file(path)?))
    }

    /// Attaches a log that records every (tag, prompt) this provider serves.
    pub fn with_request_log(mut self, log: RequestLog) -> Self {
        self.request_log = Some(log);
        self
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, req: &ChatRequest) -> Result<Completion> {
        let tag_name = req.tag.name();
        let call_index = {
            let mut counters = self.counters.lock().unwrap();
            let slot = counters.entry(tag_name.to_string()).or_insert(0);
            let current = *slot;
            *slot += 1;
            current
        };
        let prompt = format!("{}\n{}", req.system_prompt, req.user_prompt);
        if let Some(log) = &self.request_log {
            log.lock().unwrap().push((req.tag, prompt.clone()));
        }
        for rule in self.rules.iter() {
            if rule.tag != tag_name {
                continue;
            }
            if let Some(needle) = &rule.when_contains {
                if !prompt.contains(needle.as_str()) {
                    continue;
                }
            }
            if let Some(index) = rule.index {
                if index != call_index {
                    continue;
                }
            }
            let text = match &rule.capture {
                Some(capture) => capture_between(&prompt, &capture.start, &capture.end)
                    .map(str::to_string)
                    .unwrap_or_else(|| rule.reply.clone()),
                None => rule.reply.clone(),
            };
            return Ok(Completion { text, usage: None });
        }
        Err(TairaError::ProviderFailure(format!(
            "no scripted reply for tag `{tag_name}` call #{call_index}"
        )))
    }
}

/// First substring of `text` strictly between `start` and `end`.
fn capture_between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = text.find(start)? + start.len();
    let until = text[from..].find(end)? + from;
    Some(&text[from..until])
}
