//! Ranking catalog items against attribute keywords, and mapping free text
//! back onto the closed attribute vocabulary.
//!
//! Two backends share one [`RankedList`] shape: lexical BM25 (default, no
//! model needed) and cosine similarity over a pluggable [`EmbeddingProvider`].
//! Both indexes are immutable after build, so ranking is safe under
//! concurrent callers.

mod attrmap;
mod bm25;
mod embedding;

pub use attrmap::map_attributes;
pub use bm25::{bm25_rank, Bm25Index, BM25_B, BM25_K1};
pub use embedding::{cosine, embed_rank, EmbeddingIndex, EmbeddingProvider, HashedBowEmbedder};

use crate::catalog::Catalog;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default number of vocabulary entries `map_attributes` returns.
pub const DEFAULT_ATTRIBUTE_COUNT: usize = 5;

/// An ordered ranking over catalog items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    /// `(item_id, score)` in non-increasing score order, no duplicates.
    pub entries: Vec<(String, f64)>,
    pub query_terms: Vec<String>,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|(id, _)| id.as_str()).collect()
    }
}

/// Splits text into normalized tokens: lowercased alphanumeric runs with a
/// light plural fold (trailing `s` dropped when the token is longer than
/// three characters and does not end in `ss`).
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(normalize_token)
        .collect()
}

fn normalize_token(token: &str) -> String {
    let lower = token.to_lowercase();
    if lower.len() > 3 && lower.ends_with('s') && !lower.ends_with("ss") {
        lower[..lower.len() - 1].to_string()
    } else {
        lower
    }
}

/// Sorts `(id, score)` pairs by descending score, breaking exact ties by
/// ascending item id — the shared determinism rule for both backends.
fn sort_ranked(entries: &mut [(String, f64)]) {
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
}

/// The configured retrieval backend: BM25 always indexed, embedding opt-in.
/// When an embedding backend is present, [`Ranker::rank`] uses it; the BM25
/// index remains available either way. Immutable after construction.
pub struct Ranker {
    bm25: Bm25Index,
    embedding: Option<(EmbeddingIndex, Arc<dyn EmbeddingProvider>)>,
}

impl Ranker {
    /// Lexical-only backend (the default).
    pub fn bm25(catalog: &Catalog) -> Self {
        Ranker { bm25: Bm25Index::build(catalog), embedding: None }
    }

    /// Embedding backend: ranks by cosine similarity over `provider`.
    pub fn with_embedding(catalog: &Catalog, provider: Arc<dyn EmbeddingProvider>) -> Self {
        let index = EmbeddingIndex::build(catalog, provider.as_ref());
        Ranker { bm25: Bm25Index::build(catalog), embedding: Some((index, provider)) }
    }

    /// Ranks the top-`k` items for the given query terms.
    pub fn rank(&self, query_terms: &[String], k: usize) -> Result<RankedList> {
        match &self.embedding {
            Some((index, provider)) => {
                embed_rank(&query_terms.join(" "), index, k, provider.as_ref())
            }
            None => bm25_rank(query_terms, &self.bm25, k),
        }
    }

    /// The embedding provider, when configured (used by attribute mapping).
    pub fn embedder(&self) -> Option<&dyn EmbeddingProvider> {
        self.embedding.as_ref().map(|(_, provider)| provider.as_ref())
    }

    pub fn bm25_index(&self) -> &Bm25Index {
        &self.bm25
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_lowercases_and_splits_on_punctuation() {
        assert_eq!(
            tokenize("Loafers & Slip-Ons"),
            vec!["loafer", "slip", "ons"],
            "three-letter tokens keep their trailing s"
        );
    }

    #[test]
    fn plural_fold_spares_short_and_double_s_tokens() {
        assert_eq!(normalize_token("dress"), "dress");
        assert_eq!(normalize_token("gas"), "gas");
        assert_eq!(normalize_token("its"), "its");
        assert_eq!(normalize_token("boots"), "boot");
        assert_eq!(normalize_token("Blouses"), "blouse");
    }

    #[test]
    fn tie_break_is_ascending_id() {
        let mut entries = vec![
            ("z9".to_string(), 1.0),
            ("a1".to_string(), 1.0),
            ("m5".to_string(), 2.0),
        ];
        sort_ranked(&mut entries);
        let ids: Vec<&str> = entries.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, vec!["m5", "a1", "z9"]);
    }
}
