//! A full two-phase manager session against the scripted model backend:
//! pattern match, phase-0 plan ending in the planner, mid-session replan,
//! executor dispatch, and the final two-list recommendation.
//!
//! ```text
//! cargo run --example scripted_session
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;

use taira::catalog::{ingest_catalog, load_histories};
use taira::executors::FixtureSearchClient;
use taira::llm::{LlmClient, ScriptFixture, ScriptedProvider, TokenLedger};
use taira::orchestrator::{run_session, PlannerStrategy, SessionDeps, SessionLimits, StrategyKind};
use taira::retrieval::Ranker;
use taira::thought::PatternStore;

const QUERY: &str = "Can you suggest some blouses for a gathering with friends? \
                     I'm not sure about the specific wearing scene.";

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut catalog = ingest_catalog(BufReader::new(File::open(data("catalog_clothing.jsonl"))?))?;
    catalog.set_histories(load_histories(BufReader::new(File::open(
        data("histories_clothing.jsonl"),
    )?))?);
    let ranker = Ranker::bm25(&catalog);
    let search = FixtureSearchClient::from_file(data("search_corpus.jsonl"))?;
    let store = PatternStore::load(data("patterns"))?;

    let fixture = ScriptFixture::from_file(data("fixtures/golden_session.json"))?;
    let llm = LlmClient::new(
        Arc::new(ScriptedProvider::new(Arc::new(fixture.rules))),
        Arc::new(TokenLedger::new()),
    );

    let deps = SessionDeps {
        store: &store,
        catalog: &catalog,
        ranker: &ranker,
        search: &search,
        llm: &llm,
        limits: SessionLimits::default(),
        domain_noun: "clothing",
        judge: None,
    };
    let strategy = PlannerStrategy::new(StrategyKind::Taira);
    let result = run_session(QUERY, &strategy, &deps);
    let trajectory = &result.trajectory;

    println!("query: {QUERY}\n");
    if let Some(matched) = trajectory.match_result.as_ref().and_then(|m| m.matched_id()) {
        println!("matched thought pattern: {matched}");
    }

    for plan in &trajectory.plans {
        println!("\nphase {} plan — {}", plan.phase, plan.main_task);
        for task in &plan.sub_tasks {
            println!("  task {}: [{}] {}", task.index, task.agent.wire_name(), task.content);
        }
    }

    println!("\nexecution history:");
    for record in trajectory.history.records() {
        println!(
            "  phase {}, task {} ({}):\n    in:  {}\n    out: {}",
            record.phase,
            record.subtask_index,
            record.agent.wire_name(),
            record.input,
            record.output
        );
    }

    let response = result.response.as_ref().expect("the scripted session succeeds");
    println!("\nfinal recommendation ({} lists):", response.lists.len());
    for list in &response.lists {
        println!("  {}:", list.label);
        for item in &list.items {
            println!("    {}  {}", item.id, item.title);
        }
    }

    let ledger = llm.ledger().snapshot();
    println!("\nmodel calls by tag:");
    for (tag, stats) in &ledger {
        println!("  {:<16} {} call(s)", tag.name(), stats.calls);
    }
    Ok(())
}
