//! Pattern matching: top-K similarity retrieval plus LLM selection.

use super::{MatchOutcome, MatchResult, PatternStore};
use crate::error::Result;
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts;

/// Retrieves the `k` patterns nearest to `query` and asks the selector LLM to
/// pick exactly one or declare none suitable.
///
/// An empty store yields a novel outcome with no candidates and no LLM call.
/// A selector reply naming an id outside the candidate list is treated as
/// novel (logged), never as a match.
pub fn match_pattern(
    query: &str,
    store: &PatternStore,
    k: usize,
    llm: &LlmClient,
) -> Result<MatchResult> {
    let candidates = store.top_k(query, k);
    if candidates.is_empty() {
        return Ok(MatchResult { outcome: MatchOutcome::Novel(Vec::new()), candidates });
    }
    let listing: Vec<(String, String)> = candidates
        .iter()
        .map(|(id, _)| {
            let pattern = store.get(id).expect("top_k returns stored ids");
            (id.clone(), pattern.task_description.clone())
        })
        .collect();
    let req = ChatRequest::new(
        CallTag::Match,
        prompts::MANAGER_SYSTEM,
        prompts::selector_prompt(query, &listing),
    );
    let value = llm.complete_json(&req, &|v| {
        if v.get("selected").and_then(|s| s.as_str()).is_some() {
            Ok(())
        } else {
            Err("missing string field `selected`".to_string())
        }
    })?;
    let selected = value["selected"].as_str().expect("schema checked").trim().to_string();

    let candidate_ids: Vec<String> = candidates.iter().map(|(id, _)| id.clone()).collect();
    let outcome = if selected.eq_ignore_ascii_case("none") {
        MatchOutcome::Novel(candidate_ids)
    } else if candidate_ids.iter().any(|id| *id == selected) {
        MatchOutcome::Matched(selected)
    } else {
        log::warn!("selector chose `{selected}`, which is not a candidate; treating as novel");
        MatchOutcome::Novel(candidate_ids)
    };
    Ok(MatchResult { outcome, candidates })
}
