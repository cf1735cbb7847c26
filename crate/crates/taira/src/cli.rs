//! Command-line entry point: wires config, stores and providers into the
//! subcommands `ingest`, `genqueries`, `ask`, `evaluate`, `patterns`,
//! `distill` and `report`.
//!
//! Exit codes: 0 success, 1 domain error (printed with the originating
//! module's error label), 2 usage error. Only `distill` and
//! `patterns remove-scenario` mutate the pattern store; `ask` writes its
//! trajectory (and any distilled correction) into a run directory without
//! touching the store.

use crate::catalog::{ingest_catalog, load_histories, load_store, save_store};
use crate::config::{Config, CONFIG_ENV, DEFAULT_CONFIG_FILE};
use crate::error::{Result, TairaError};
use crate::evalharness::{
    load_report, paired_ttest, render_csv, run_experiment, write_report, Ablation,
    ExperimentConfig, ExperimentEnv, RunReport,
};
use crate::executors::FixtureSearchClient;
use crate::orchestrator::{run_session, PlannerStrategy, SessionDeps, StrategyKind, Trajectory};
use crate::thought::{distill, DistillInputs, PatternStore, ThoughtPattern};
use crate::usersim::{generate_queries, load_suite, save_suite, DifficultyCounts};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Parses process arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default()).try_init();
    run_from(std::env::args_os())
}

/// Runs with explicit arguments (the first is the program name).
pub fn run_from(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// Argument shapes
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "taira",
    version,
    about = "Thought-augmented multi-agent interactive recommendation"
)]
struct Cli {
    /// Config file (default: $TAIRA_CONFIG, then ./taira.toml if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a catalog store from JSONL exports.
    Ingest {
        /// Items file: one JSON object per line.
        #[arg(long)]
        items: PathBuf,
        /// Optional user-histories file, one JSON object per line.
        #[arg(long)]
        histories: Option<PathBuf>,
        /// Output store directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded evaluation query suite from user histories.
    Genqueries {
        #[arg(long, default_value_t = 0)]
        easy: usize,
        #[arg(long, default_value_t = 0)]
        medium: usize,
        #[arg(long, default_value_t = 0)]
        hard: usize,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output suite file (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one recommendation session and write its trajectory.
    Ask {
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "taira", value_parser = parse_strategy)]
        strategy: StrategyKind,
        /// Directory for trajectory/response artifacts (default: runs/ask).
        #[arg(long)]
        run_dir: Option<PathBuf>,
        /// Expert-opinion text file: after the session, distill the
        /// trajectory with this opinion. The result is written to the run
        /// directory and printed — the pattern store is not modified.
        #[arg(long)]
        expert_correct: Option<PathBuf>,
        /// Scenario tag for a distilled correction.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Evaluate a query suite and write report files.
    Evaluate {
        /// Suite file produced by `genqueries` (JSON lines).
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "taira", value_parser = parse_strategy)]
        strategy: StrategyKind,
        /// Components to ablate: T, H, E, A (repeat or comma-separate).
        #[arg(long, value_delimiter = ',', value_parser = parse_ablation)]
        ablate: Vec<Ablation>,
        /// Scenario tags to strip from the store (novel-task mode).
        #[arg(long, value_delimiter = ',')]
        novel: Vec<String>,
        /// Output directory for report.json / report.csv / telemetry.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Inspect or prune the thought-pattern store.
    Patterns {
        #[command(subcommand)]
        action: PatternsCmd,
    },
    /// Distill a thought pattern and persist it to the store.
    Distill {
        /// Trajectory JSON of an executed route.
        #[arg(long)]
        route: Option<PathBuf>,
        /// Expert-opinion text file.
        #[arg(long)]
        opinion: Option<PathBuf>,
        /// Id of a stored pattern to revise in place.
        #[arg(long)]
        old: Option<String>,
        /// Scenario tag for the result.
        #[arg(long)]
        tag: Option<String>,
    },
    /// Print a stored evaluation report as its metrics table.
    Report {
        /// Report directory (or a report.json path).
        #[arg(long)]
        dir: PathBuf,
        /// Second report to compare against with paired t-tests.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PatternsCmd {
    /// List stored patterns.
    List,
    /// Print one pattern as JSON.
    Show { id: String },
    /// Remove every pattern tagged with a scenario, persisting the store.
    RemoveScenario { tag: String },
}

fn parse_strategy(s: &str) -> std::result::Result<StrategyKind, String> {
    StrategyKind::from_str(s)
}

fn parse_ablation(s: &str) -> std::result::Result<Ablation, String> {
    Ablation::from_str(s)
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn dispatch(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { items, histories, out } => cmd_ingest(&items, histories.as_deref(), &out),
        Command::Genqueries { easy, medium, hard, seed, out } => {
            cmd_genqueries(&config, DifficultyCounts { easy, medium, hard }, seed, &out)
        }
        Command::Ask { query, strategy, run_dir, expert_correct, scenario } => cmd_ask(
            &config,
            &query,
            strategy,
            run_dir.as_deref(),
            expert_correct.as_deref(),
            scenario.as_deref(),
        ),
        Command::Evaluate { suite, strategy, ablate, novel, out, parallelism, seed } => {
            cmd_evaluate(&config, &suite, strategy, ablate, novel, &out, parallelism, seed)
        }
        Command::Patterns { action } => cmd_patterns(&config, action),
        Command::Distill { route, opinion, old, tag } => {
            cmd_distill(&config, route.as_deref(), opinion.as_deref(), old.as_deref(), tag.as_deref())
        }
        Command::Report { dir, compare } => cmd_report(&dir, compare.as_deref()),
    }
}

/// Config resolution: explicit flag, then $TAIRA_CONFIG, then ./taira.toml
/// if present, then built-in defaults.
fn load_config(flag: Option<&Path>) -> Result<Config> {
    if let Some(path) = flag {
        return Config::load(path);
    }
    if let Ok(path) = std::env::var(CONFIG_ENV) {
        return Config::load(path);
    }
    if Path::new(DEFAULT_CONFIG_FILE).exists() {
        return Config::load(DEFAULT_CONFIG_FILE);
    }
    Ok(Config::default())
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_ingest(items: &Path, histories: Option<&Path>, out: &Path) -> Result<()> {
    let mut catalog = ingest_catalog(BufReader::new(std::fs::File::open(items)?))?;
    let history_count = match histories {
        Some(path) => {
            let histories = load_histories(BufReader::new(std::fs::File::open(path)?))?;
            let count = histories.len();
            catalog.set_histories(histories);
            count
        }
        None => 0,
    };
    save_store(&catalog, out)?;
    println!(
        "ingested {} items, {} histories, {} vocabulary entries -> {}",
        catalog.len(),
        history_count,
        catalog.vocab().len(),
        out.display()
    );
    Ok(())
}

fn cmd_genqueries(
    config: &Config,
    counts: DifficultyCounts,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let catalog = load_store(&config.catalog_dir)?;
    let llm = config.provider_factory()?.client();
    let seed = seed.unwrap_or(config.run.seed);
    let suite = generate_queries(&catalog, catalog.histories(), counts, seed, &llm)?;
    save_suite(out, &suite)?;
    println!("wrote {} queries (seed {seed}) -> {}", suite.len(), out.display());
    Ok(())
}

fn cmd_ask(
    config: &Config,
    query: &str,
    kind: StrategyKind,
    run_dir: Option<&Path>,
    expert_correct: Option<&Path>,
    scenario: Option<&str>,
) -> Result<()> {
    let catalog = load_store(&config.catalog_dir)?;
    let store = PatternStore::load(&config.pattern_dir)?;
    let ranker = config.build_ranker(&catalog);
    let search = FixtureSearchClient::from_file(&config.search_corpus)?;
    let llm = config.provider_factory()?.client();
    let strategy = PlannerStrategy::new(kind);
    let deps = SessionDeps {
        store: &store,
        catalog: &catalog,
        ranker: &ranker,
        search: &search,
        llm: &llm,
        limits: config.limits,
        domain_noun: &config.domain_noun,
        judge: None,
    };
    let result = run_session(query, &strategy, &deps);

    let run_dir = run_dir.unwrap_or_else(|| Path::new("runs/ask"));
    std::fs::create_dir_all(run_dir)?;
    write_json(&run_dir.join("trajectory.json"), &result.trajectory)?;
    match &result.response {
        Some(response) => {
            write_json(&run_dir.join("response.json"), response)?;
            println!("{}", serde_json::to_string_pretty(response)?);
        }
        None => {
            let failure = serde_json::json!({
                "failed": true,
                "failure_reason": result.trajectory.failure_reason.map(|r| r.name()),
            });
            println!("{}", serde_json::to_string_pretty(&failure)?);
        }
    }

    if let Some(opinion_path) = expert_correct {
        let opinion = std::fs::read_to_string(opinion_path)?;
        let new_id = store.mint_id();
        let pattern = distill(
            &DistillInputs {
                route: Some(&result.trajectory),
                expert_opinion: Some(opinion.trim()),
                old: None,
                scenario_tag: scenario,
                new_id: Some(&new_id),
            },
            &llm,
        )?;
        write_json(&run_dir.join("pattern.json"), &pattern)?;
        println!("{}", serde_json::to_string_pretty(&pattern)?);
        println!("distilled correction written to {} (store unchanged)", run_dir.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    config: &Config,
    suite_path: &Path,
    kind: StrategyKind,
    ablate: Vec<Ablation>,
    novel: Vec<String>,
    out: &Path,
    parallelism: Option<usize>,
    seed: Option<u64>,
) -> Result<()> {
    let suite = load_suite(suite_path)?;
    let catalog = load_store(&config.catalog_dir)?;
    let store = PatternStore::load(&config.pattern_dir)?;
    let ranker = config.build_ranker(&catalog);
    let search = FixtureSearchClient::from_file(&config.search_corpus)?;
    let factory = config.provider_factory()?;
    let make_llm = |_: usize| factory.client();

    let env = ExperimentEnv {
        store: &store,
        catalog: &catalog,
        ranker: &ranker,
        search: &search,
        make_llm: &make_llm,
        limits: config.limits,
        domain_noun: &config.domain_noun,
    };
    let experiment = ExperimentConfig {
        strategy: PlannerStrategy::new(kind),
        ablations: ablate.into_iter().collect(),
        novel_tags: novel,
        parallelism: parallelism.unwrap_or(config.run.parallelism),
        seed: seed.unwrap_or(config.run.seed),
    };
    let report = run_experiment(&suite, &env, &experiment)?;
    write_report(out, &report)?;
    print!("{}", render_csv(&report));
    println!(
        "{} queries, {} calls, report -> {}",
        report.overall.queries,
        report.tokens.calls,
        out.display()
    );
    Ok(())
}

fn cmd_patterns(config: &Config, action: PatternsCmd) -> Result<()> {
    let mut store = PatternStore::load(&config.pattern_dir)?;
    match action {
        PatternsCmd::List => {
            for pattern in store.iter() {
                println!(
                    "{}\t{}\t{}\t{}",
                    pattern.id,
                    pattern.source.name(),
                    pattern.scenario_tag.as_deref().unwrap_or("-"),
                    truncate_chars(&pattern.task_description, 72),
                );
            }
            println!("{} pattern(s)", store.len());
        }
        PatternsCmd::Show { id } => {
            let pattern =
                store.get(&id).ok_or_else(|| TairaError::UnknownPattern(id.clone()))?;
            println!("{}", serde_json::to_string_pretty(pattern)?);
        }
        PatternsCmd::RemoveScenario { tag } => {
            let removed = store.remove_by_scenario(&tag)?;
            store.save(&config.pattern_dir)?;
            println!("removed {removed} pattern(s) tagged {tag}");
        }
    }
    Ok(())
}

fn cmd_distill(
    config: &Config,
    route: Option<&Path>,
    opinion: Option<&Path>,
    old: Option<&str>,
    tag: Option<&str>,
) -> Result<()> {
    let mut store = PatternStore::load(&config.pattern_dir)?;
    let trajectory: Option<Trajectory> = match route {
        Some(path) => Some(serde_json::from_str(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let opinion_text = match opinion {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let old_pattern: Option<ThoughtPattern> = match old {
        Some(id) => Some(
            store.get(id).cloned().ok_or_else(|| TairaError::UnknownPattern(id.to_string()))?,
        ),
        None => None,
    };
    let new_id = store.mint_id();
    let llm = config.provider_factory()?.client();
    let pattern = distill(
        &DistillInputs {
            route: trajectory.as_ref(),
            expert_opinion: opinion_text.as_deref().map(str::trim),
            old: old_pattern.as_ref(),
            scenario_tag: tag,
            new_id: Some(&new_id),
        },
        &llm,
    )?;
    store.upsert(pattern.clone())?;
    store.save(&config.pattern_dir)?;
    println!("{}", serde_json::to_string_pretty(&pattern)?);
    println!("stored pattern {} ({})", pattern.id, pattern.source.name());
    Ok(())
}

fn cmd_report(dir: &Path, compare: Option<&Path>) -> Result<()> {
    let report = load_report(report_file(dir))?;
    print!("{}", render_csv(&report));
    println!(
        "strategy {}, seed {}, {} model calls",
        report.strategy, report.seed, report.tokens.calls
    );
    if let Some(other_path) = compare {
        let other = load_report(report_file(other_path))?;
        compare_reports(&report, &other)?;
    }
    Ok(())
}

fn compare_reports(a: &RunReport, b: &RunReport) -> Result<()> {
    if a.outcomes.len() != b.outcomes.len() {
        return Err(TairaError::InvalidInput(format!(
            "reports cover different suites: {} vs {} queries",
            a.outcomes.len(),
            b.outcomes.len()
        )));
    }
    for (metric, pick) in [
        ("HR@10", (|o: &crate::evalharness::QueryOutcome| o.hr_at_10) as fn(_) -> f64),
        ("NDCG@10", |o: &crate::evalharness::QueryOutcome| o.ndcg_at_10),
    ] {
        let xs: Vec<f64> = a.outcomes.iter().map(pick).collect();
        let ys: Vec<f64> = b.outcomes.iter().map(pick).collect();
        let test = paired_ttest(&xs, &ys)?;
        let note = if test.degenerate { " (degenerate: constant difference)" } else { "" };
        println!("{metric}: t = {:.4}, p = {:.4}{note}", test.t, test.p);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// `dir` may be the report directory or the report.json itself.
fn report_file(dir: &Path) -> PathBuf {
    if dir.is_dir() {
        dir.join("report.json")
    } else {
        dir.to_path_buf()
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn truncate_chars(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let head: String = text.chars().take(limit).collect();
    format!("{head}…")
}
