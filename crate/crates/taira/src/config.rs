//! Runtime configuration: one human-editable TOML document with
//! `${VAR}` environment-variable interpolation, layered under command-line
//! flags (flags win).
//!
//! Secrets never live in the file: the HTTP provider reads its API key from
//! the `TAIRA_API_KEY` environment variable, and interpolation lets fields
//! like the base URL point at environment values instead of literals.

use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use crate::llm::{
    ChatProvider, HttpProvider, LlmClient, ScriptFixture, ScriptRule, ScriptedProvider,
    TokenLedger,
};
use crate::orchestrator::SessionLimits;
use crate::retrieval::{HashedBowEmbedder, Ranker};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "TAIRA_CONFIG";

/// Default config filename looked up in the working directory.
pub const DEFAULT_CONFIG_FILE: &str = "taira.toml";

/// Which chat backend to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderConfig {
    /// An OpenAI-compatible HTTP endpoint; the API key comes from
    /// `TAIRA_API_KEY`, never from the file.
    Http {
        base_url: String,
        model: String,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
    /// Deterministic scripted replies from a JSON fixture file.
    Scripted { fixture: String },
}

fn default_timeout() -> u64 {
    60
}

/// Which retrieval index ranks catalog candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalBackend {
    Bm25,
    Embedding,
}

/// Run-shape knobs outside the per-session limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub parallelism: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { parallelism: crate::evalharness::DEFAULT_PARALLELISM, seed: 42 }
    }
}

/// Everything the command-line entry point needs to wire a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory of the ingested catalog store.
    pub catalog_dir: String,
    /// Directory of the thought-pattern store.
    pub pattern_dir: String,
    /// JSONL corpus backing the file-based search client.
    pub search_corpus: String,
    /// Names the product domain in prompts ("clothing", "beauty product").
    pub domain_noun: String,
    pub provider: ProviderConfig,
    pub retrieval: RetrievalBackend,
    pub limits: SessionLimits,
    pub run: RunConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            catalog_dir: "data/store".into(),
            pattern_dir: "data/patterns".into(),
            search_corpus: "data/search_corpus.jsonl".into(),
            domain_noun: "product".into(),
            provider: ProviderConfig::Scripted { fixture: "data/fixtures/script.json".into() },
            retrieval: RetrievalBackend::Bm25,
            limits: SessionLimits::default(),
            run: RunConfig::default(),
        }
    }
}

impl Config {
    /// Parses a TOML document after interpolating `${VAR}` references.
    pub fn from_toml(text: &str) -> Result<Config> {
        let interpolated = interpolate_env(text)?;
        let config: Config = toml::from_str(&interpolated)
            .map_err(|e| TairaError::Config(format!("could not parse config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads and parses a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            TairaError::Config(format!("could not read config {}: {e}", path.display()))
        })?;
        Config::from_toml(&text)
    }

    /// Serializes back to TOML. `from_toml(to_toml(c))` reproduces `c`.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is plain data")
    }

    /// All numeric bounds must be positive.
    pub fn validate(&self) -> Result<()> {
        let bounds = [
            ("limits.max_phases", self.limits.max_phases),
            ("limits.retry_limit", self.limits.retry_limit as usize),
            ("limits.match_k", self.limits.match_k),
            ("limits.candidate_pool_size", self.limits.candidate_pool_size),
            ("limits.attribute_count", self.limits.attribute_count),
            ("limits.max_react_steps", self.limits.max_react_steps),
            ("run.parallelism", self.run.parallelism),
        ];
        for (name, value) in bounds {
            if value == 0 {
                return Err(TairaError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Builds the configured chat backend.
    pub fn build_provider(&self) -> Result<Arc<dyn ChatProvider>> {
        match &self.provider {
            ProviderConfig::Http { base_url, model, timeout_secs } => {
                Ok(Arc::new(HttpProvider::new(base_url, model, *timeout_secs)))
            }
            ProviderConfig::Scripted { fixture } => {
                Ok(Arc::new(ScriptedProvider::from_file(fixture)?))
            }
        }
    }

    /// Builds the configured retrieval index over `catalog`.
    pub fn build_ranker(&self, catalog: &Catalog) -> Ranker {
        match self.retrieval {
            RetrievalBackend::Bm25 => Ranker::bm25(catalog),
            RetrievalBackend::Embedding => {
                Ranker::with_embedding(catalog, Arc::new(HashedBowEmbedder::default()))
            }
        }
    }

    /// Builds a factory of per-session model clients.
    pub fn provider_factory(&self) -> Result<ProviderFactory> {
        match &self.provider {
            ProviderConfig::Scripted { fixture } => {
                Ok(ProviderFactory::Scripted(Arc::new(ScriptFixture::from_file(fixture)?.rules)))
            }
            ProviderConfig::Http { .. } => Ok(ProviderFactory::Shared(self.build_provider()?)),
        }
    }
}

/// Hands out model clients, one per session. Scripted backends get a fresh
/// provider each time so per-tag rule indices restart per session; HTTP
/// backends share one connection pool. Every client carries its own ledger.
pub enum ProviderFactory {
    Scripted(Arc<Vec<ScriptRule>>),
    Shared(Arc<dyn ChatProvider>),
}

impl ProviderFactory {
    pub fn client(&self) -> LlmClient {
        let provider: Arc<dyn ChatProvider> = match self {
            ProviderFactory::Scripted(rules) => Arc::new(ScriptedProvider::new(rules.clone())),
            ProviderFactory::Shared(provider) => provider.clone(),
        };
        LlmClient::new(provider, Arc::new(TokenLedger::new()))
    }
}

/// Replaces every `${NAME}` with the value of environment variable `NAME`.
/// An unset variable is a config error naming the variable.
fn interpolate_env(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let tail = &rest[start + 2..];
        let Some(end) = tail.find('}') else {
            return Err(TairaError::Config("unterminated ${ in config".into()));
        };
        let name = &tail[..end];
        let value = std::env::var(name).map_err(|_| {
            TairaError::Config(format!("environment variable {name} is not set"))
        })?;
        out.push_str(&value);
        rest = &tail[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
