//! Thought patterns: the reusable planning experience of the manager agent.
//!
//! A pattern is a distilled triple — task description, solution description,
//! thought template — plus provenance. The store persists patterns, retrieves
//! the top-K nearest to a query for LLM selection ([`match_pattern`]), and is
//! updated by distillation ([`distill`]) from task routes, expert-corrected
//! failures, or direct expert text.

mod distill;
mod matching;

pub use distill::{distill, DistillInputs};
pub use matching::match_pattern;

use crate::error::{Result, TairaError};
use crate::retrieval::{cosine, tokenize, EmbeddingProvider, HashedBowEmbedder};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Default number of candidate patterns retrieved for matching.
pub const DEFAULT_MATCH_K: usize = 5;

/// Scenario tag given to patterns distilled outside a known scenario.
pub const UNTAGGED_SCENARIO: &str = "untagged";

const PATTERNS_FILE: &str = "patterns.json";
const EMBEDDINGS_FILE: &str = "embeddings.json";

// ---------------------------------------------------------------------------
// Pattern type
// ---------------------------------------------------------------------------

/// Where a pattern came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternSource {
    /// Distilled from a route the agent completed successfully on its own.
    AgentSuccess,
    /// Distilled from a failed route together with an expert's correction.
    AgentFailedExpertCorrected,
    /// Written from expert instruction text alone, no route.
    ExpertDirect,
}

impl PatternSource {
    pub fn name(self) -> &'static str {
        match self {
            PatternSource::AgentSuccess => "agent_success",
            PatternSource::AgentFailedExpertCorrected => "agent_failed_expert_corrected",
            PatternSource::ExpertDirect => "expert_direct",
        }
    }
}

/// One distilled thought pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThoughtPattern {
    pub id: String,
    pub task_description: String,
    pub solution_description: String,
    /// Phase/step structured plan skeleton; must contain ≥1 "Step" marker.
    pub thought_template: String,
    pub source: PatternSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_tag: Option<String>,
    /// Embedding of `task_description`; persisted in the store's sidecar.
    #[serde(skip)]
    pub embedding: Vec<f32>,
}

impl ThoughtPattern {
    /// Checks the structural invariants: non-empty id and text fields, and a
    /// thought template with at least one "Step" marker.
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(TairaError::InvalidInput("pattern id is empty".into()));
        }
        for (field, value) in [
            ("task_description", &self.task_description),
            ("solution_description", &self.solution_description),
            ("thought_template", &self.thought_template),
        ] {
            if value.trim().is_empty() {
                return Err(TairaError::InvalidInput(format!(
                    "pattern `{}` has an empty {field}",
                    self.id
                )));
            }
        }
        if !self.thought_template.contains("Step") {
            return Err(TairaError::InvalidInput(format!(
                "pattern `{}` thought_template has no \"Step\" marker",
                self.id
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Match result
// ---------------------------------------------------------------------------

/// What pattern matching decided for a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchOutcome {
    /// The selector chose this candidate pattern.
    Matched(String),
    /// No candidate suits the query; carries the nearest pattern ids so the
    /// planner can still draw on their solution descriptions.
    Novel(Vec<String>),
}

/// Match decision plus the retrieved candidate list with similarities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub outcome: MatchOutcome,
    pub candidates: Vec<(String, f64)>,
}

impl MatchResult {
    pub fn matched_id(&self) -> Option<&str> {
        match &self.outcome {
            MatchOutcome::Matched(id) => Some(id),
            MatchOutcome::Novel(_) => None,
        }
    }

    pub fn is_novel(&self) -> bool {
        matches!(self.outcome, MatchOutcome::Novel(_))
    }
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

/// In-memory pattern collection with similarity retrieval and persistence.
///
/// Reads are lock-free on a shared reference; evaluation runs treat the store
/// as read-only, and mutation (insert, removal) happens through `&mut self`
/// before a run starts or through the CLI's single-writer commands.
#[derive(Debug, Clone)]
pub struct PatternStore {
    patterns: Vec<ThoughtPattern>,
    embedder: HashedBowEmbedder,
}

impl Default for PatternStore {
    fn default() -> Self {
        Self::new()
    }
}

impl PatternStore {
    pub fn new() -> Self {
        PatternStore { patterns: Vec::new(), embedder: HashedBowEmbedder::default() }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ThoughtPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ThoughtPattern> {
        self.patterns.iter()
    }

    /// Validates and inserts a pattern, replacing any existing pattern with
    /// the same id in place. Computes the embedding when absent.
    pub fn upsert(&mut self, mut pattern: ThoughtPattern) -> Result<()> {
        pattern.validate()?;
        if pattern.embedding.is_empty() {
            pattern.embedding = self.embedder.embed(&pattern.task_description);
        }
        match self.patterns.iter_mut().find(|p| p.id == pattern.id) {
            Some(slot) => *slot = pattern,
            None => self.patterns.push(pattern),
        }
        Ok(())
    }

    /// Smallest unused id of the form `tp-N`, for newly distilled patterns.
    pub fn mint_id(&self) -> String {
        let used: BTreeSet<&str> = self.patterns.iter().map(|p| p.id.as_str()).collect();
        (1..)
            .map(|n| format!("tp-{n}"))
            .find(|candidate| !used.contains(candidate.as_str()))
            .expect("unbounded id space")
    }

    /// Removes every pattern tagged with `scenario_tag`; it is an error if no
    /// pattern carries the tag (e.g. removing the same tag twice).
    pub fn remove_by_scenario(&mut self, scenario_tag: &str) -> Result<usize> {
        let before = self.patterns.len();
        self.patterns.retain(|p| p.scenario_tag.as_deref() != Some(scenario_tag));
        let removed = before - self.patterns.len();
        if removed == 0 {
            return Err(TairaError::UnknownScenario(scenario_tag.to_string()));
        }
        Ok(removed)
    }

    /// Keeps only patterns whose source satisfies `keep` (ablation loading).
    pub fn retain_sources(&mut self, keep: impl Fn(PatternSource) -> bool) {
        self.patterns.retain(|p| keep(p.source));
    }

    /// Top-`k` patterns nearest to `query` by cosine similarity between the
    /// query embedding and each pattern's task-description embedding. When
    /// every cosine score is zero, falls back to distinct-token overlap with
    /// the task description. Ties break by ascending pattern id.
    pub fn top_k(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        let query_vec = self.embedder.embed(query);
        let mut scored: Vec<(String, f64)> = self
            .patterns
            .iter()
            .map(|p| (p.id.clone(), cosine(&query_vec, &p.embedding)))
            .collect();
        if scored.iter().all(|(_, s)| *s == 0.0) {
            let query_tokens: BTreeSet<String> = tokenize(query).into_iter().collect();
            scored = self
                .patterns
                .iter()
                .map(|p| {
                    let pattern_tokens: BTreeSet<String> =
                        tokenize(&p.task_description).into_iter().collect();
                    let overlap = pattern_tokens.intersection(&query_tokens).count();
                    (p.id.clone(), overlap as f64)
                })
                .collect();
        }
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).expect("finite similarity").then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        scored
    }

    /// Writes `patterns.json` (JSON array, store order) and the embeddings
    /// sidecar into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join(PATTERNS_FILE),
            serde_json::to_string_pretty(&self.patterns)? + "\n",
        )?;
        let sidecar: BTreeMap<&str, &Vec<f32>> =
            self.patterns.iter().map(|p| (p.id.as_str(), &p.embedding)).collect();
        std::fs::write(
            dir.join(EMBEDDINGS_FILE),
            serde_json::to_string(&sidecar)? + "\n",
        )?;
        Ok(())
    }

    /// Loads a store saved by [`PatternStore::save`]. A missing sidecar (or
    /// missing entry) is tolerated: embeddings are recomputed, so
    /// hand-authored fixture stores need only `patterns.json`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let raw = std::fs::read_to_string(dir.join(PATTERNS_FILE))?;
        let mut patterns: Vec<ThoughtPattern> = serde_json::from_str(&raw)?;
        let sidecar: BTreeMap<String, Vec<f32>> = match std::fs::read_to_string(dir.join(EMBEDDINGS_FILE)) {
            Ok(raw) => serde_json::from_str(&raw)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        let embedder = HashedBowEmbedder::default();
        let mut ids = BTreeSet::new();
        for pattern in &mut patterns {
            if !ids.insert(pattern.id.clone()) {
                return Err(TairaError::DuplicateId(pattern.id.clone()));
            }
            pattern.embedding = match sidecar.get(&pattern.id) {
                Some(vector) => vector.clone(),
                None => embedder.embed(&pattern.task_description),
            };
            pattern.validate()?;
        }
        Ok(PatternStore { patterns, embedder })
    }
}
