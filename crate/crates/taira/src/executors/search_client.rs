//! External-knowledge search clients.
//!
//! The default client is offline and deterministic: a fixture corpus of
//! `{pattern, results}` records matched by case-insensitive substring against
//! the query. A live web-search client can implement the same trait behind
//! config; nothing downstream can tell the difference.

use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::Path;

/// One search hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub snippet: String,
}

/// Knowledge lookup used by the searcher agent.
pub trait SearchClient: Send + Sync {
    fn search(&self, query: &str) -> Result<Vec<SearchResult>>;
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusEntry {
    /// Case-insensitive substring that must occur in the query.
    pattern: String,
    results: Vec<SearchResult>,
}

/// Offline search backed by a JSONL corpus of `{pattern, results}` entries.
#[derive(Debug, Default)]
pub struct FixtureSearchClient {
    entries: Vec<CorpusEntry>,
}

impl FixtureSearchClient {
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut entries = Vec::new();
        for (line_index, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CorpusEntry =
                serde_json::from_str(&line).map_err(|e| TairaError::MalformedRecord {
                    line: line_index + 1,
                    message: e.to_string(),
                })?;
            entries.push(entry);
        }
        Ok(FixtureSearchClient { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_reader(std::io::BufReader::new(file))
    }
}

impl SearchClient for FixtureSearchClient {
    fn search(&self, query: &str) -> Result<Vec<SearchResult>> {
        let query = query.to_lowercase();
        let mut results = Vec::new();
        for entry in &self.entries {
            if query.contains(&entry.pattern.to_lowercase()) {
                results.extend(entry.results.iter().cloned());
            }
        }
        Ok(results)
    }
}
