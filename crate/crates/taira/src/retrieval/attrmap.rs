//! Mapping free text onto the closed attribute vocabulary.
//!
//! This is the mechanism that makes searcher outputs retrievable: whatever a
//! search step produces, the mapped keywords are guaranteed members of the
//! catalog's attribute vocabulary, so downstream item retrieval can never
//! ask for an attribute the catalog has not seen.

use super::{cosine, tokenize, EmbeddingProvider};
use crate::catalog::AttributeVocab;
use std::collections::BTreeSet;

/// Returns the `m` vocabulary entries nearest to `free_text`.
///
/// Primary signal: distinct-token overlap between the text and the entry,
/// highest first; ties prefer shorter entries (fewer tokens), then
/// lexicographic order. When every overlap is zero and an embedder is
/// supplied, cosine similarity over the embedder decides instead; with no
/// embedder, the zero-overlap fallback is plain lexicographic order. Total:
/// always returns `min(m, vocab size)` entries, all drawn from the
/// vocabulary.
pub fn map_attributes(
    free_text: &str,
    vocab: &AttributeVocab,
    m: usize,
    embedder: Option<&dyn EmbeddingProvider>,
) -> Vec<String> {
    let query_tokens: BTreeSet<String> = tokenize(free_text).into_iter().collect();
    let mut scored: Vec<(usize, usize, String)> = vocab
        .entries()
        .map(|entry| {
            let entry_tokens: BTreeSet<String> = tokenize(entry).into_iter().collect();
            let overlap = entry_tokens.intersection(&query_tokens).count();
            (overlap, entry_tokens.len(), entry.to_string())
        })
        .collect();

    let all_zero = scored.iter().all(|(overlap, _, _)| *overlap == 0);
    if all_zero {
        if let Some(embedder) = embedder {
            let query_vec = embedder.embed(free_text);
            let mut by_cosine: Vec<(f64, String)> = scored
                .into_iter()
                .map(|(_, _, entry)| {
                    let sim = cosine(&query_vec, &embedder.embed(&entry));
                    (sim, entry)
                })
                .collect();
            by_cosine.sort_by(|a, b| {
                b.0.partial_cmp(&a.0).expect("cosine is finite").then_with(|| a.1.cmp(&b.1))
            });
            return by_cosine.into_iter().take(m).map(|(_, entry)| entry).collect();
        }
        scored.sort_by(|a, b| a.2.cmp(&b.2));
        return scored.into_iter().take(m).map(|(_, _, entry)| entry).collect();
    }

    scored.sort_by(|a, b| {
        b.0.cmp(&a.0) // overlap, descending
            .then_with(|| a.1.cmp(&b.1)) // entry token count, ascending
            .then_with(|| a.2.cmp(&b.2)) // entry text, ascending
    });
    scored.into_iter().take(m).map(|(_, _, entry)| entry).collect()
}
