//! Thought-pattern matching: similarity retrieval over the pattern store, the
//! scripted selector choosing a template, and the novel-task fallback after
//! the matching scenario's pattern is withheld.
//!
//! ```text
//! cargo run --example match_patterns
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use taira::llm::{LlmClient, ScriptFixture, ScriptedProvider, TokenLedger};
use taira::thought::{match_pattern, MatchOutcome, PatternStore};

const QUERY: &str = "Can you suggest some blouses for a gathering with friends? \
                     I'm not sure about the specific wearing scene.";

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn selector() -> Result<LlmClient, Box<dyn std::error::Error>> {
    let fixture = ScriptFixture::from_file(data("fixtures/golden_session.json"))?;
    Ok(LlmClient::new(
        Arc::new(ScriptedProvider::new(Arc::new(fixture.rules))),
        Arc::new(TokenLedger::new()),
    ))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = PatternStore::load(data("patterns"))?;
    println!("loaded {} thought patterns:", store.len());
    for pattern in store.iter() {
        println!(
            "  {:<5} [{}] {}",
            pattern.id,
            pattern.source.name(),
            pattern.scenario_tag.as_deref().unwrap_or("untagged")
        );
    }

    println!("\nquery: {QUERY}\n");
    let llm = selector()?;
    let result = match_pattern(QUERY, &store, 5, &llm)?;
    println!("candidates by similarity:");
    for (id, score) in &result.candidates {
        println!("  {score:6.4}  {id}");
    }
    match &result.outcome {
        MatchOutcome::Matched(id) => {
            let pattern = store.get(id).expect("matched ids are stored");
            println!("\nselector matched {id}; its thought template:");
            for line in pattern.thought_template.lines() {
                println!("  {line}");
            }
        }
        MatchOutcome::Novel(_) => println!("\nunexpectedly novel"),
    }

    // Withhold the matching scenario's pattern: the same query now takes the
    // novel path, with the nearest solution descriptions as a consolation.
    let mut reduced = store.clone();
    let removed = reduced.remove_by_scenario("ambiguous")?;
    println!("\nremoved {removed} pattern(s) tagged `ambiguous`; matching again:");
    let llm = selector()?;
    let result = match_pattern(QUERY, &reduced, 5, &llm)?;
    match &result.outcome {
        MatchOutcome::Novel(nearest) => {
            println!("novel task — nearest solution descriptions to draw on:");
            for id in nearest {
                let pattern = reduced.get(id).expect("candidate ids are stored");
                let first_words: Vec<&str> =
                    pattern.solution_description.split_whitespace().take(12).collect();
                println!("  {id}: {} …", first_words.join(" "));
            }
        }
        MatchOutcome::Matched(id) => println!("unexpectedly matched {id}"),
    }
    Ok(())
}
