//! HTTP chat-completions backend.
//!
//! Speaks the de-facto wire protocol: `POST {base_url}/v1/chat/completions`
//! with `{model, messages, temperature, max_tokens}`. The API key comes from
//! the `TAIRA_API_KEY` environment variable and is never read from config
//! files or flags.

use super::{ChatProvider, ChatRequest, Completion};
use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Environment variable holding the bearer token for the HTTP backend.
pub const API_KEY_ENV: &str = "TAIRA_API_KEY";

/// Transport attempts per call (1 initial + 2 retries) with exponential backoff.
const TRANSPORT_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 250;

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

/// Chat backend over HTTP. Stateless per call; safe to share across sessions.
pub struct HttpProvider {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: Option<String>,
}

impl HttpProvider {
    /// `base_url` like `https://api.example.com`; the path suffix is fixed.
    pub fn new(base_url: &str, model: &str, timeout_secs: u64) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(timeout_secs)))
            .build()
            .into();
        HttpProvider {
            agent,
            endpoint: format!("{}/v1/chat/completions", base_url.trim_end_matches('/')),
            model: model.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok(),
        }
    }

    fn call_once(&self, body: &serde_json::Value) -> std::result::Result<WireResponse, String> {
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| format!("transport: {e}"))?;
        response
            .body_mut()
            .read_json::<WireResponse>()
            .map_err(|e| format!("response parse: {e}"))
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, req: &ChatRequest) -> Result<Completion> {
        let wire = WireRequest {
            model: &self.model,
            messages: vec![
                WireMessage { role: "system", content: &req.system_prompt },
                WireMessage { role: "user", content: &req.user_prompt },
            ],
            temperature: req.temperature,
            max_tokens: req.max_tokens,
        };
        let body = serde_json::to_value(&wire)?;

        let mut last_error = String::new();
        for attempt in 0..TRANSPORT_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            match self.call_once(&body) {
                Ok(parsed) => {
                    let choice = parsed.choices.into_iter().next().ok_or_else(|| {
                        TairaError::ProviderFailure("response carried no choices".into())
                    })?;
                    let usage = parsed.usage.map(|u| (u.prompt_tokens, u.completion_tokens));
                    return Ok(Completion { text: choice.message.content, usage });
                }
                Err(error) => {
                    log::warn!("chat call attempt {} failed: {error}", attempt + 1);
                    last_error = error;
                }
            }
        }
        Err(TairaError::ProviderFailure(format!(
            "gave up after {TRANSPORT_ATTEMPTS} attempts: {last_error}"
        )))
    }
}
