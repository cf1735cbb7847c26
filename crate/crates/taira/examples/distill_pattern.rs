//! Pattern distillation: turn a failed session route plus an expert's
//! correction into a reusable thought pattern, then persist it alongside the
//! bootstrap patterns.
//!
//! ```text
//! cargo run --example distill_pattern
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;

use taira::llm::{LlmClient, ScriptFixture, ScriptedProvider, TokenLedger};
use taira::orchestrator::Trajectory;
use taira::thought::{distill, DistillInputs, PatternStore};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let route: Trajectory =
        serde_json::from_reader(BufReader::new(File::open(data("routes/failed_route.json"))?))?;
    let opinion = std::fs::read_to_string(data("opinions/expert_correction.txt"))?;

    println!("failed route: {}", route.query);
    println!("  {} recorded steps, failed = {}", route.history.len(), route.failed);
    println!("\nexpert correction:\n  {}", opinion.trim().replace('\n', "\n  "));

    let fixture = ScriptFixture::from_file(data("fixtures/distill.json"))?;
    let llm = LlmClient::new(
        Arc::new(ScriptedProvider::new(Arc::new(fixture.rules))),
        Arc::new(TokenLedger::new()),
    );

    let pattern = distill(
        &DistillInputs {
            route: Some(&route),
            expert_opinion: Some(opinion.trim()),
            old: None,
            scenario_tag: Some("ambiguous"),
            new_id: Some("tp-amb-derived"),
        },
        &llm,
    )?;

    println!("\ndistilled pattern {} ({}):", pattern.id, pattern.source.name());
    println!("  task:     {}", pattern.task_description);
    println!("  solution: {}", pattern.solution_description);
    println!("  template:");
    for line in pattern.thought_template.lines() {
        println!("    {line}");
    }

    let mut store = PatternStore::load(data("patterns"))?;
    store.upsert(pattern)?;
    let dir = tempfile::tempdir()?;
    store.save(dir.path())?;
    let reloaded = PatternStore::load(dir.path())?;
    println!(
        "\nsaved the grown store to {} — {} patterns on reload",
        dir.path().display(),
        reloaded.len()
    );
    Ok(())
}
