//! The item retriever agent: preference parse → candidate retrieval →
//! preference reorder → top-n ranked list.

use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts;
use crate::retrieval::{tokenize, RankedList, Ranker};

/// Parse length cap, in words (item type + preferences combined).
pub const MAX_PARSE_WORDS: usize = 15;

/// The extracted "[type]; [preference]" structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceParse {
    pub item_type: String,
    pub preferences: Vec<String>,
}

impl PreferenceParse {
    pub fn word_count(&self) -> usize {
        self.item_type.split_whitespace().count()
            + self.preferences.iter().map(|p| p.split_whitespace().count()).sum::<usize>()
    }
}

/// Parses the model's "[type]; [preference]" reply. Brackets are cosmetic and
/// stripped; everything before the first `;` is the item type, the rest are
/// preference terms. Parses longer than 15 words are truncated (logged) so
/// every accepted parse honors the length bound.
pub fn parse_preferences(reply: &str) -> Result<PreferenceParse> {
    let cleaned = reply.replace(['[', ']'], "");
    let (type_part, pref_part) = match cleaned.split_once(';') {
        Some((t, p)) => (t.trim(), p.trim()),
        None => (cleaned.trim(), ""),
    };
    if type_part.is_empty() {
        return Err(TairaError::MalformedOutput {
            attempts: 1,
            last_output: reply.to_string(),
        });
    }
    let mut item_type = type_part.to_string();
    let mut preferences: Vec<String> = pref_part
        .split(';')
        .flat_map(str::split_whitespace)
        .map(str::to_string)
        .collect();

    let mut parse = PreferenceParse { item_type: item_type.clone(), preferences: preferences.clone() };
    if parse.word_count() > MAX_PARSE_WORDS {
        log::warn!("preference parse exceeds {MAX_PARSE_WORDS} words; truncating: {reply:?}");
        let type_words: Vec<&str> = item_type.split_whitespace().collect();
        let kept_type = type_words.len().min(MAX_PARSE_WORDS);
        item_type = type_words[..kept_type].join(" ");
        let budget = MAX_PARSE_WORDS - kept_type;
        preferences.truncate(budget);
        parse = PreferenceParse { item_type, preferences };
    }
    Ok(parse)
}

/// Retrieves up to `n` items for a recommendation request: extract the
/// preference parse, pull `candidate_pool_size` candidates by item-type
/// terms, reorder by how many preference terms each candidate matches
/// (stable, so ties keep the base retrieval order), and truncate.
pub fn item_retriever(
    request: &str,
    catalog: &Catalog,
    ranker: &Ranker,
    llm: &LlmClient,
    domain_noun: &str,
    candidate_pool_size: usize,
    n: usize,
) -> Result<RankedList> {
    if request.trim().is_empty() {
        return Err(TairaError::InvalidInput("retrieval request is empty".into()));
    }
    let req = ChatRequest::new(
        CallTag::RetrieverPrefs,
        prompts::RETRIEVER_SYSTEM,
        prompts::retriever_prefs_prompt(request, domain_noun),
    );
    let parse = parse_preferences(&llm.complete(&req)?)?;

    let type_terms = tokenize(&parse.item_type);
    if type_terms.is_empty() {
        return Err(TairaError::ExecutorFailure(format!(
            "item type \"{}\" has no usable terms",
            parse.item_type
        )));
    }
    let candidates = ranker.rank(&type_terms, candidate_pool_size)?;
    if candidates.entries.is_empty() {
        return Err(TairaError::ExecutorFailure(format!(
            "no catalog items match item type \"{}\"",
            parse.item_type
        )));
    }

    let preference_terms: Vec<String> =
        parse.preferences.iter().flat_map(|p| tokenize(p)).collect();
    let mut reordered: Vec<(String, f64)> = candidates
        .entries
        .iter()
        .map(|(id, _)| {
            let item = catalog.get(id).expect("ranker returns catalog ids");
            let doc_tokens = tokenize(&item.document_text());
            let score = preference_terms
                .iter()
                .filter(|term| doc_tokens.contains(term))
                .count() as f64;
            (id.clone(), score)
        })
        .collect();
    // Stable: equal preference scores keep the base retrieval order.
    reordered.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite"));
    reordered.truncate(n);
    Ok(RankedList { entries: reordered, query_terms: candidates.query_terms })
}
