//! The interactor agent: composes the final multi-list recommendation
//! response from the task history, with an anti-hallucination check against
//! the items actually retrieved.

use super::{ItemRef, RecommendationList, RecommendationResponse, ITEMS_PER_LIST, MAX_LABEL_WORDS};
use crate::error::{Result, TairaError};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::orchestrator::TaskHistory;
use crate::prompts;
use std::collections::BTreeMap;

/// Builds the final response for `instruction` over `history`.
///
/// The reply must contain ≥1 list of exactly 10 items each (enforced through
/// the JSON re-prompt budget). Item ids must come from the history's
/// retrieval outputs: unknown ids trigger one corrective re-prompt, then the
/// executor fails. Accepted items get their catalog titles from the history
/// (the model cannot rewrite them), and labels longer than five words are
/// truncated with a log line.
pub fn interactor(
    history: &TaskHistory,
    instruction: &str,
    llm: &LlmClient,
) -> Result<RecommendationResponse> {
    let known: BTreeMap<String, String> = history.retrieved_items().into_iter().collect();
    if known.is_empty() {
        return Err(TairaError::InvalidInput(
            "the task history holds no retrieved items to recommend".into(),
        ));
    }

    let user_prompt = prompts::interactor_prompt(&history.render(), instruction);
    let req = ChatRequest::new(CallTag::Interactor, prompts::INTERACTOR_SYSTEM, user_prompt.clone());
    let value = llm.complete_json(&req, &schema_check)?;
    let response = build_response(&value, &known);

    match response {
        Ok(response) => Ok(response),
        Err(unknown_ids) => {
            log::warn!("interactor cited unknown ids {unknown_ids:?}; re-prompting once");
            let corrected = ChatRequest::new(
                CallTag::Interactor,
                prompts::INTERACTOR_SYSTEM,
                format!("{user_prompt}{}", prompts::interactor_correction(&unknown_ids)),
            );
            let value = llm.complete_json(&corrected, &schema_check)?;
            build_response(&value, &known).map_err(|still_unknown| {
                TairaError::ExecutorFailure(format!(
                    "response cites ids outside the retrieval outputs: {}",
                    still_unknown.join(", ")
                ))
            })
        }
    }
}

/// Wire-shape check run inside the JSON re-prompt budget: ≥1 list, each with
/// a non-empty label and exactly 10 items carrying string ids.
fn schema_check(value: &serde_json::Value) -> std::result::Result<(), String> {
    let lists = value
        .get("lists")
        .and_then(|l| l.as_array())
        .ok_or("missing \"lists\" array")?;
    if lists.is_empty() {
        return Err("\"lists\" must hold at least one list".into());
    }
    for (i, list) in lists.iter().enumerate() {
        if list
            .get("recommendation")
            .and_then(|r| r.as_str())
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .is_none()
        {
            return Err(format!("list {i} is missing a non-empty \"recommendation\" label"));
        }
        let items = list
            .get("items")
            .and_then(|v| v.as_array())
            .ok_or_else(|| format!("list {i} is missing its \"items\" array"))?;
        if items.len() != ITEMS_PER_LIST {
            return Err(format!(
                "list {i} has {} items; you must output exactly {ITEMS_PER_LIST} items per list",
                items.len()
            ));
        }
        for item in items {
            if item.get("id").and_then(|id| id.as_str()).is_none() {
                return Err(format!("every item in list {i} needs a string \"id\""));
            }
        }
    }
    Ok(())
}

/// Converts schema-checked JSON into a response, resolving titles from the
/// history. Returns the unknown ids when any item falls outside it.
fn build_response(
    value: &serde_json::Value,
    known: &BTreeMap<String, String>,
) -> std::result::Result<RecommendationResponse, Vec<String>> {
    let mut unknown = Vec::new();
    let mut lists = Vec::new();
    for list in value["lists"].as_array().expect("schema checked") {
        let label_raw = list["recommendation"].as_str().expect("schema checked").trim();
        let words: Vec<&str> = label_raw.split_whitespace().collect();
        let label = if words.len() > MAX_LABEL_WORDS {
            log::warn!("label \"{label_raw}\" exceeds {MAX_LABEL_WORDS} words; truncating");
            words[..MAX_LABEL_WORDS].join(" ")
        } else {
            label_raw.to_string()
        };
        let mut items = Vec::new();
        for item in list["items"].as_array().expect("schema checked") {
            let id = item["id"].as_str().expect("schema checked").to_string();
            match known.get(&id) {
                Some(title) => items.push(ItemRef { id, title: title.clone() }),
                None => unknown.push(id),
            }
        }
        lists.push(RecommendationList { label, items });
    }
    if unknown.is_empty() {
        let response = RecommendationResponse { lists };
        debug_assert!(response.validate().is_ok());
        Ok(response)
    } else {
        unknown.sort();
        unknown.dedup();
        Err(unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ScriptRule, ScriptedProvider, TokenLedger};
    use crate::orchestrator::{AgentKind, HistoryRecord};
    use std::sync::Arc;

    fn history_with_items(ids: &[&str]) -> TaskHistory {
        let mut history = TaskHistory::default();
        history.push(HistoryRecord {
            phase: 0,
            subtask_index: 1,
            agent: AgentKind::ItemRetriever,
            content: "retrieve".into(),
            input: "pajamas".into(),
            output: "items".into(),
            retrieved: Some(
                ids.iter().map(|id| (id.to_string(), format!("Title {id}"))).collect(),
            ),
        });
        history
    }

    fn reply_with_ids(ids: &[String]) -> String {
        let items: Vec<String> =
            ids.iter().map(|id| format!(r#"{{"id": "{id}", "title": "whatever"}}"#)).collect();
        format!(
            r#"{{"lists": [{{"recommendation": "warm pajama sets", "items": [{}]}}]}}"#,
            items.join(", ")
        )
    }

    fn llm_replying(replies: &[String]) -> LlmClient {
        let rules = replies
            .iter()
            .enumerate()
            .map(|(i, reply)| ScriptRule {
                tag: "interactor".into(),
                when_contains: None,
                index: Some(i),
                capture: None,
                reply: reply.clone(),
            })
            .collect();
        LlmClient::new(
            Arc::new(ScriptedProvider::new(Arc::new(rules))),
            Arc::new(TokenLedger::new()),
        )
    }

    fn ten_ids(prefix: &str) -> Vec<String> {
        (0..10).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn valid_reply_becomes_a_response_with_canonical_titles() {
        let ids = ten_ids("a");
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let history = history_with_items(&id_refs);
        let llm = llm_replying(&[reply_with_ids(&ids)]);
        let response = interactor(&history, "final response", &llm).unwrap();
        response.validate().unwrap();
        assert_eq!(response.lists.len(), 1);
        assert_eq!(response.lists[0].items[3].title, "Title a3", "titles come from history");
    }

    #[test]
    fn hallucinated_ids_get_one_corrective_reprompt() {
        let ids = ten_ids("a");
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let history = history_with_items(&id_refs);
        let mut bad = ids.clone();
        bad[5] = "ghost".into();
        let llm = llm_replying(&[reply_with_ids(&bad), reply_with_ids(&ids)]);
        let response = interactor(&history, "final", &llm).unwrap();
        assert_eq!(response.lists[0].items.len(), 10);
        assert_eq!(llm.ledger().calls(CallTag::Interactor), 2);
    }

    #[test]
    fn persistent_hallucination_is_an_executor_failure() {
        let ids = ten_ids("a");
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let history = history_with_items(&id_refs);
        let mut bad = ids.clone();
        bad[0] = "ghost".into();
        let llm = llm_replying(&[reply_with_ids(&bad), reply_with_ids(&bad)]);
        let err = interactor(&history, "final", &llm).unwrap_err();
        assert!(matches!(err, TairaError::ExecutorFailure(_)), "{err}");
    }

    #[test]
    fn short_lists_are_rejected_through_the_json_budget() {
        let ids: Vec<String> = (0..9).map(|i| format!("a{i}")).collect();
        let full = ten_ids("a");
        let id_refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let history = history_with_items(&id_refs);
        let llm = llm_replying(&[reply_with_ids(&ids), reply_with_ids(&full)]);
        let response = interactor(&history, "final", &llm).unwrap();
        assert_eq!(response.lists[0].items.len(), 10);
    }

    #[test]
    fn history_without_retrievals_is_a_precondition_error() {
        let llm = llm_replying(&[]);
        let err = interactor(&TaskHistory::default(), "final", &llm).unwrap_err();
        assert!(matches!(err, TairaError::InvalidInput(_)));
        assert_eq!(llm.ledger().calls(CallTag::Interactor), 0);
    }

    #[test]
    fn long_labels_are_truncated_to_five_words() {
        let ids = ten_ids("a");
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let history = history_with_items(&id_refs);
        let items: Vec<String> =
            ids.iter().map(|id| format!(r#"{{"id": "{id}", "title": "t"}}"#)).collect();
        let reply = format!(
            r#"{{"lists": [{{"recommendation": "one two three four five six seven", "items": [{}]}}]}}"#,
            items.join(", ")
        );
        let llm = llm_replying(&[reply]);
        let response = interactor(&history, "final", &llm).unwrap();
        assert_eq!(response.lists[0].label, "one two three four five");
    }
}
