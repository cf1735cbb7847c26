//! The searcher agent: external knowledge in, vocabulary-closed attribute
//! keywords out.

use super::SearchClient;
use crate::catalog::AttributeVocab;
use crate::error::Result;
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts;
use crate::retrieval::{map_attributes, EmbeddingProvider};

/// Longest keyword summary accepted from the model, in words.
pub const MAX_SUMMARY_WORDS: usize = 20;

/// Searches for knowledge relevant to `query`, asks the model to compress the
/// results into a ≤20-word keyword combination, and maps that text onto the
/// attribute vocabulary. The output is therefore always retrievable
/// downstream, whatever the model said.
///
/// With no search results, the mapping falls back to the raw query (logged).
pub fn searcher(
    query: &str,
    client: &dyn SearchClient,
    vocab: &AttributeVocab,
    llm: &LlmClient,
    attribute_count: usize,
    embedder: Option<&dyn EmbeddingProvider>,
) -> Result<Vec<String>> {
    let results = client.search(query)?;
    if results.is_empty() {
        log::info!("no search results for \"{query}\"; mapping the raw query");
        return Ok(map_attributes(query, vocab, attribute_count, embedder));
    }
    let context = results
        .iter()
        .map(|r| format!("{}: {}", r.title, r.snippet))
        .collect::<Vec<_>>()
        .join("\n");
    let req = ChatRequest::new(
        CallTag::Searcher,
        prompts::SEARCHER_SYSTEM,
        prompts::searcher_prompt(query, &context),
    );
    let summary = llm.complete(&req)?;
    let truncated = truncate_words(summary.trim(), MAX_SUMMARY_WORDS);
    Ok(map_attributes(&truncated, vocab, attribute_count, embedder))
}

/// First `limit` whitespace-separated words of `text`.
pub(crate) fn truncate_words(text: &str, limit: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= limit {
        text.to_string()
    } else {
        words[..limit].join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ingest_catalog;
    use crate::executors::FixtureSearchClient;
    use crate::llm::{ChatProvider, Completion, ScriptRule, ScriptedProvider, TokenLedger};
    use std::io::Cursor;
    use std::sync::Arc;

    fn vocab() -> AttributeVocab {
        let line = serde_json::json!({
            "id": "v", "title": "t", "description": "d",
            "attributes": "Clothing | Women | Blouses | Casual | Semi-Formal | Thermal",
        })
        .to_string();
        ingest_catalog(Cursor::new(line)).unwrap().vocab().clone()
    }

    fn client() -> FixtureSearchClient {
        let line = r#"{"pattern": "gathering", "results": [{"title": "Style guide", "snippet": "what to wear to gatherings"}]}"#;
        FixtureSearchClient::from_reader(Cursor::new(line)).unwrap()
    }

    fn llm_replying(reply: &str) -> LlmClient {
        let rules = vec![ScriptRule {
            tag: "searcher".into(),
            when_contains: None,
            index: None,
            capture: None,
            reply: reply.into(),
        }];
        LlmClient::new(
            Arc::new(ScriptedProvider::new(Arc::new(rules))),
            Arc::new(TokenLedger::new()),
        )
    }

    #[test]
    fn summary_is_mapped_into_the_vocabulary() {
        let vocab = vocab();
        let llm = llm_replying("casual semi-formal blouse styles");
        let attrs =
            searcher("blouse styles for a gathering", &client(), &vocab, &llm, 3, None).unwrap();
        assert_eq!(attrs.len(), 3);
        for attr in &attrs {
            assert!(vocab.contains(attr), "`{attr}` escaped the vocabulary");
        }
        assert!(attrs.contains(&"Casual".to_string()));
        assert!(attrs.contains(&"Semi-Formal".to_string()));
    }

    #[test]
    fn long_summaries_are_truncated_to_twenty_words() {
        struct CaptureProvider(std::sync::Mutex<Vec<String>>);
        impl ChatProvider for CaptureProvider {
            fn complete(&self, req: &ChatRequest) -> crate::error::Result<Completion> {
                self.0.lock().unwrap().push(req.user_prompt.clone());
                // 30 words, the 21st onward must be dropped before mapping.
                let mut words: Vec<String> = (1..=30).map(|i| format!("w{i}")).collect();
                words[24] = "casual".into(); // inside the dropped tail
                Ok(Completion { text: words.join(" "), usage: None })
            }
        }
        let vocab = vocab();
        let provider = Arc::new(CaptureProvider(std::sync::Mutex::new(Vec::new())));
        let llm = LlmClient::new(provider, Arc::new(TokenLedger::new()));
        let attrs = searcher("gathering outfit", &client(), &vocab, &llm, 2, None).unwrap();
        // "casual" sat beyond the 20-word cut, so zero overlap remains and the
        // lexicographic fallback fires instead.
        assert_eq!(attrs, vec!["Blouses", "Casual"]);
    }

    #[test]
    fn empty_results_fall_back_to_the_raw_query() {
        let vocab = vocab();
        let llm = llm_replying("never called");
        let attrs = searcher("thermal blouses", &client(), &vocab, &llm, 2, None).unwrap();
        assert!(attrs.contains(&"Thermal".to_string()));
        assert!(attrs.contains(&"Blouses".to_string()));
        assert_eq!(llm.ledger().calls(CallTag::Searcher), 0, "no LLM call without results");
    }

    #[test]
    fn truncate_words_keeps_short_text_intact() {
        assert_eq!(truncate_words("a b c", 20), "a b c");
        assert_eq!(truncate_words("a b c d", 2), "a b");
    }
}
