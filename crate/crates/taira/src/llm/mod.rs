//! Uniform chat-completion gateway.
//!
//! Every model call in the framework goes through [`LlmClient`]: it dispatches
//! to a [`ChatProvider`] backend (deterministic scripted replies for tests, an
//! HTTP chat-completions client for real runs), records token/latency
//! telemetry per call site in a [`TokenLedger`], and offers
//! [`LlmClient::complete_json`] for structured output with bounded re-prompting.

mod extract;
mod http;
mod ledger;
mod scripted;

pub use extract::extract_json;
pub use http::HttpProvider;
pub use ledger::{approx_tokens, TagStats, TokenLedger};
pub use scripted::{Capture, RequestLog, ScriptFixture, ScriptRule, ScriptedProvider};

use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// How many times `complete_json` re-prompts after an unusable reply.
pub const JSON_REPROMPT_BUDGET: usize = 2;

/// Default completion cap passed to providers.
pub const DEFAULT_MAX_TOKENS: u32 = 1024;

// ---------------------------------------------------------------------------
// Call tags
// ---------------------------------------------------------------------------

/// Fixed enumeration of call sites; the ledger keys its counters on these.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CallTag {
    Plan,
    Replan,
    Match,
    Distill,
    Searcher,
    RetrieverPrefs,
    Interpreter,
    Interactor,
    Simulator,
    QueryGen,
}

impl CallTag {
    /// Every tag, in ledger display order.
    pub const ALL: [CallTag; 10] = [
        CallTag::Plan,
        CallTag::Replan,
        CallTag::Match,
        CallTag::Distill,
        CallTag::Searcher,
        CallTag::RetrieverPrefs,
        CallTag::Interpreter,
        CallTag::Interactor,
        CallTag::Simulator,
        CallTag::QueryGen,
    ];

    /// Stable snake_case name, used in fixtures and reports.
    pub fn name(self) -> &'static str {
        match self {
            CallTag::Plan => "plan",
            CallTag::Replan => "replan",
            CallTag::Match => "match",
            CallTag::Distill => "distill",
            CallTag::Searcher => "searcher",
            CallTag::RetrieverPrefs => "retriever_prefs",
            CallTag::Interpreter => "interpreter",
            CallTag::Interactor => "interactor",
            CallTag::Simulator => "simulator",
            CallTag::QueryGen => "query_gen",
        }
    }

    /// Default sampling temperature for this call site. Planning and parsing
    /// sites run at 0.0 for reproducibility; query generation needs variety.
    pub fn default_temperature(self) -> f64 {
        match self {
            CallTag::QueryGen => 0.7,
            _ => 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Requests, completions, providers
// ---------------------------------------------------------------------------

/// One chat call: a system prompt, a user prompt, and sampling settings.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub tag: CallTag,
}

impl ChatRequest {
    /// Builds a request with the tag's default temperature and token cap.
    pub fn new(tag: CallTag, system_prompt: impl Into<String>, user_prompt: impl Into<String>) -> Self {
        ChatRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: tag.default_temperature(),
            max_tokens: DEFAULT_MAX_TOKENS,
            tag,
        }
    }

    /// Both prompts must be non-empty; enforced before dispatch.
    fn validate(&self) -> Result<()> {
        if self.system_prompt.is_empty() || self.user_prompt.is_empty() {
            return Err(TairaError::InvalidInput(
                "chat request prompts must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// A provider reply: the completion text plus the provider's own token usage
/// report when it has one (the scripted backend does not).
#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    /// `(prompt_tokens, completion_tokens)` as reported by the backend.
    pub usage: Option<(u64, u64)>,
}

/// A chat backend. Implementations must be shareable across concurrent
/// sessions; the scripted backend is a pure function of
/// (tag, prompt, per-tag call index).
pub trait ChatProvider: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<Completion>;
}

// ---------------------------------------------------------------------------
// Client: provider + ledger + structured output
// ---------------------------------------------------------------------------

/// Provider plus ledger; the handle every module calls the model through.
#[derive(Clone)]
pub struct LlmClient {
    provider: Arc<dyn ChatProvider>,
    ledger: Arc<TokenLedger>,
}

impl LlmClient {
    pub fn new(provider: Arc<dyn ChatProvider>, ledger: Arc<TokenLedger>) -> Self {
        LlmClient { provider, ledger }
    }

    pub fn ledger(&self) -> &TokenLedger {
        &self.ledger
    }

    /// Runs one chat call, recording tokens (provider-reported when available,
    /// else `ceil(chars / 4)`) and latency under the request's tag.
    pub fn complete(&self, req: &ChatRequest) -> Result<String> {
        req.validate()?;
        let started = Instant::now();
        let completion = self.provider.complete(req)?;
        let elapsed = started.elapsed();
        let (prompt_tokens, completion_tokens) = completion.usage.unwrap_or_else(|| {
            (
                approx_tokens(&req.system_prompt) + approx_tokens(&req.user_prompt),
                approx_tokens(&completion.text),
            )
        });
        self.ledger
            .record(req.tag, prompt_tokens, completion_tokens, elapsed);
        Ok(completion.text)
    }

    /// Runs a chat call whose reply must contain a JSON object satisfying
    /// `schema_check`. Tolerates code fences and prose around the object.
    /// Re-prompts up to [`JSON_REPROMPT_BUDGET`] times with a "return only
    /// JSON" suffix, then fails with [`TairaError::MalformedOutput`] carrying
    /// the last raw reply.
    pub fn complete_json(
        &self,
        req: &ChatRequest,
        schema_check: &dyn Fn(&serde_json::Value) -> std::result::Result<(), String>,
    ) -> Result<serde_json::Value> {
        let mut attempt_req = req.clone();
        let mut last_output = String::new();
        for attempt in 0..=JSON_REPROMPT_BUDGET {
            let text = self.complete(&attempt_req)?;
            let problem = match extract_json(&text) {
                Some(value) => match schema_check(&value) {
                    Ok(()) => return Ok(value),
                    Err(reason) => reason,
                },
                None => "no JSON object found in the reply".to_string(),
            };
            log::debug!(
                "unusable {} reply on attempt {}: {problem}",
                req.tag.name(),
                attempt + 1
            );
            last_output = text;
            attempt_req = req.clone();
            attempt_req.user_prompt = format!(
                "{}\n\nYour previous reply could not be used ({problem}). \
                 Respond ONLY with a valid JSON object in the requested format, no other text.",
                req.user_prompt
            );
        }
        Err(TairaError::MalformedOutput {
            attempts: JSON_REPROMPT_BUDGET + 1,
            last_output,
        })
    }
}
