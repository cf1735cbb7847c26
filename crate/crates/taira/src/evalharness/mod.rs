//! The evaluation harness: run query suites through a chosen strategy,
//! judge each response with the simulated user, and aggregate success rate,
//! hit rate and ranking quality overall and per difficulty tier.
//!
//! Sessions run concurrently up to a parallelism bound. Each query gets a
//! fresh model client from a caller-supplied factory, so scripted backends
//! start from a clean slate per session and real backends can share a
//! connection pool. Aggregation is a deterministic fold over outcomes in
//! suite order — reports never depend on completion order.

mod metrics;
mod report;
mod ttest;

pub use metrics::{hr_at_10, ndcg_at_10, success_rate, HIT_THRESHOLD};
pub use report::{load_report, render_csv, write_report};
pub use ttest::{paired_ttest, TTest};

use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use crate::executors::SearchClient;
use crate::llm::{CallTag, LlmClient, TagStats, TokenLedger};
use crate::orchestrator::{
    run_session, FailureReason, PlannerStrategy, SessionDeps, SessionLimits,
};
use crate::retrieval::Ranker;
use crate::thought::{PatternSource, PatternStore};
use crate::usersim::{judge, Difficulty, QuerySpec, Scenario, SimVerdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Concurrent sessions evaluated at once unless configured otherwise.
pub const DEFAULT_PARALLELISM: usize = 4;

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

/// A component switched off for an ablation run: thought-pattern matching,
/// hierarchical replanning, or one of the two pattern-source families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ablation {
    /// Skip thought-pattern matching entirely.
    #[serde(rename = "T")]
    Thoughts,
    /// Withhold the replanning agent (single-pass planning).
    #[serde(rename = "H")]
    Hierarchy,
    /// Drop expert-sourced patterns; only agent successes load.
    #[serde(rename = "E")]
    ExpertSources,
    /// Drop agent-success patterns; only expert-sourced ones load.
    #[serde(rename = "A")]
    AgentSources,
}

impl Ablation {
    pub fn code(self) -> &'static str {
        match self {
            Ablation::Thoughts => "T",
            Ablation::Hierarchy => "H",
            Ablation::ExpertSources => "E",
            Ablation::AgentSources => "A",
        }
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "T" | "t" | "thoughts" => Ok(Ablation::Thoughts),
            "H" | "h" | "hierarchy" => Ok(Ablation::Hierarchy),
            "E" | "e" | "expert" => Ok(Ablation::ExpertSources),
            "A" | "a" | "agent" => Ok(Ablation::AgentSources),
            other => Err(format!(
                "unknown ablation `{other}`; use T (thoughts), H (hierarchy), E (expert \
sources) or A (agent sources)"
            )),
        }
    }
}

/// The pattern store a run actually loads: novel-tagged patterns removed,
/// then source families filtered per the E/A ablations.
pub fn prepared_store(
    base: &PatternStore,
    ablations: &BTreeSet<Ablation>,
    novel_tags: &[String],
) -> Result<PatternStore> {
    let mut store = base.clone();
    for tag in novel_tags {
        let removed = store.remove_by_scenario(tag)?;
        log::info!("novel-task mode: removed {removed} pattern(s) tagged {tag}");
    }
    if ablations.contains(&Ablation::ExpertSources) {
        store.retain_sources(|s| s == PatternSource::AgentSuccess);
    }
    if ablations.contains(&Ablation::AgentSources) {
        store.retain_sources(|s| s != PatternSource::AgentSuccess);
    }
    Ok(store)
}

// ---------------------------------------------------------------------------
// Outcomes and reports
// ---------------------------------------------------------------------------

/// Token counters without latency — the deterministic part of the ledger,
/// safe to embed in canonical reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl From<&TagStats> for TokenCounts {
    fn from(stats: &TagStats) -> Self {
        TokenCounts {
            calls: stats.calls,
            prompt_tokens: stats.prompt_tokens,
            completion_tokens: stats.completion_tokens,
        }
    }
}

/// One query's evaluated outcome. Exactly one of `failure_reason` and
/// `verdict` is set: either the session failed, or it produced a response
/// that the simulated user judged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryOutcome {
    /// Position of the query in its suite (the suite is the identity space).
    pub index: usize,
    pub user_id: String,
    pub scenario: Scenario,
    pub difficulty: Difficulty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<SimVerdict>,
    /// True when planning took the novel-task path (no matched pattern).
    pub novel_path: bool,
    pub succeeded: bool,
    pub hr_at_10: f64,
    pub ndcg_at_10: f64,
    pub tokens: TokenCounts,
    /// Wall-clock time for the session plus judging. Excluded from reports
    /// (it varies run to run); surfaced through the telemetry side-file.
    #[serde(skip)]
    pub latency_micros: u64,
}

impl QueryOutcome {
    /// Builds an outcome, deriving the success flag and both metrics. A
    /// missing verdict (failed session) contributes zero to both.
    pub fn new(
        index: usize,
        spec: &QuerySpec,
        failure_reason: Option<FailureReason>,
        verdict: Option<SimVerdict>,
        novel_path: bool,
        tokens: TokenCounts,
        latency_micros: u64,
    ) -> Self {
        let hr = verdict.as_ref().map_or(0.0, hr_at_10);
        let ndcg = verdict.as_ref().map_or(0.0, ndcg_at_10);
        let succeeded =
            failure_reason.is_none() && verdict.as_ref().is_some_and(|v| !v.failed);
        QueryOutcome {
            index,
            user_id: spec.user_id.clone(),
            scenario: spec.scenario,
            difficulty: spec.difficulty,
            failure_reason,
            verdict,
            novel_path,
            succeeded,
            hr_at_10: hr,
            ndcg_at_10: ndcg,
            tokens,
            latency_micros,
        }
    }
}

/// Aggregated metrics for one group of queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub queries: usize,
    pub sr: f64,
    pub hr_at_10: f64,
    pub ndcg_at_10: f64,
}

impl MetricRow {
    fn over<'a>(outcomes: impl Iterator<Item = &'a QueryOutcome>) -> MetricRow {
        let outcomes: Vec<&QueryOutcome> = outcomes.collect();
        let n = outcomes.len() as f64;
        MetricRow {
            queries: outcomes.len(),
            sr: outcomes.iter().filter(|o| o.succeeded).count() as f64 / n,
            hr_at_10: outcomes.iter().map(|o| o.hr_at_10).sum::<f64>() / n,
            ndcg_at_10: outcomes.iter().map(|o| o.ndcg_at_10).sum::<f64>() / n,
        }
    }

    fn in_bounds(&self) -> bool {
        [self.sr, self.hr_at_10, self.ndcg_at_10]
            .iter()
            .all(|m| (0.0..=1.0).contains(m))
    }
}

/// The full result of an experiment run: a config echo, aggregate metrics
/// overall and per difficulty, every per-query outcome, and token totals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub strategy: String,
    pub ablations: BTreeSet<Ablation>,
    pub novel_tags: Vec<String>,
    pub seed: u64,
    pub parallelism: usize,
    pub overall: MetricRow,
    pub per_difficulty: BTreeMap<Difficulty, MetricRow>,
    pub outcomes: Vec<QueryOutcome>,
    pub tokens: TokenCounts,
    pub tokens_by_tag: BTreeMap<CallTag, TokenCounts>,
}

impl RunReport {
    /// Internal-consistency checks: metric bounds, count conservation, and
    /// one outcome per suite slot in order.
    pub fn validate(&self) -> Result<()> {
        if !self.overall.in_bounds()
            || self.per_difficulty.values().any(|row| !row.in_bounds())
        {
            return Err(TairaError::InvalidInput("report metric out of [0,1]".into()));
        }
        if self.overall.queries != self.outcomes.len() {
            return Err(TairaError::InvalidInput("overall count != outcome count".into()));
        }
        let tier_sum: usize = self.per_difficulty.values().map(|row| row.queries).sum();
        if tier_sum != self.outcomes.len() {
            return Err(TairaError::InvalidInput(
                "per-difficulty counts do not sum to the suite size".into(),
            ));
        }
        if self.outcomes.iter().enumerate().any(|(i, o)| o.index != i) {
            return Err(TairaError::InvalidInput(
                "outcomes are not the suite slots in order".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Running experiments
// ---------------------------------------------------------------------------

/// Shared, read-only dependencies of an experiment. `make_llm` is invoked
/// once per query (with the query's suite index) to build that session's
/// model client.
pub struct ExperimentEnv<'a> {
    pub store: &'a PatternStore,
    pub catalog: &'a Catalog,
    pub ranker: &'a Ranker,
    pub search: &'a (dyn SearchClient + Sync),
    pub make_llm: &'a (dyn Fn(usize) -> LlmClient + Sync),
    pub limits: SessionLimits,
    pub domain_noun: &'a str,
}

/// What to run: the strategy, which components to ablate, which scenario
/// tags to strip from the store (novel-task mode), and the run shape.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub strategy: PlannerStrategy,
    pub ablations: BTreeSet<Ablation>,
    pub novel_tags: Vec<String>,
    pub parallelism: usize,
    pub seed: u64,
}

/// Runs every suite query through a session and the simulated-user judge,
/// then aggregates. Per-query errors are captured as failed outcomes — one
/// broken query never aborts the batch.
pub fn run_experiment(
    suite: &[QuerySpec],
    env: &ExperimentEnv<'_>,
    config: &ExperimentConfig,
) -> Result<RunReport> {
    if suite.is_empty() {
        return Err(TairaError::InvalidInput("the query suite is empty".into()));
    }
    let store = prepared_store(env.store, &config.ablations, &config.novel_tags)?;
    let mut strategy = config.strategy.clone();
    if config.ablations.contains(&Ablation::Thoughts) {
        strategy.ablate_thoughts = true;
    }
    if config.ablations.contains(&Ablation::Hierarchy) {
        strategy.ablate_hierarchy = true;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.max(1))
        .build()
        .map_err(|e| TairaError::Config(format!("evaluation thread pool: {e}")))?;
    let store = &store;
    let strategy = &strategy;
    let evaluated: Vec<(QueryOutcome, BTreeMap<CallTag, TagStats>)> = pool.install(|| {
        suite
            .par_iter()
            .enumerate()
            .map(|(index, spec)| evaluate_one(index, spec, env, store, strategy))
            .collect()
    });

    // Deterministic fold in suite order, independent of completion order.
    let ledger = TokenLedger::new();
    let mut outcomes = Vec::with_capacity(evaluated.len());
    for (outcome, snapshot) in evaluated {
        ledger.merge_snapshot(&snapshot);
        outcomes.push(outcome);
    }

    let overall = MetricRow::over(outcomes.iter());
    let mut per_difficulty = BTreeMap::new();
    for difficulty in Difficulty::ALL {
        let tier: Vec<&QueryOutcome> =
            outcomes.iter().filter(|o| o.difficulty == difficulty).collect();
        if !tier.is_empty() {
            per_difficulty.insert(difficulty, MetricRow::over(tier.into_iter()));
        }
    }
    let tokens_by_tag = ledger
        .snapshot()
        .iter()
        .map(|(tag, stats)| (*tag, TokenCounts::from(stats)))
        .collect();

    let report = RunReport {
        strategy: config.strategy.kind.cli_name().to_string(),
        ablations: config.ablations.clone(),
        novel_tags: config.novel_tags.clone(),
        seed: config.seed,
        parallelism: config.parallelism,
        overall,
        per_difficulty,
        outcomes,
        tokens: TokenCounts::from(&ledger.total()),
        tokens_by_tag,
    };
    report.validate()?;
    Ok(report)
}

/// One query: session, then judge; all errors fold into the outcome.
fn evaluate_one(
    index: usize,
    spec: &QuerySpec,
    env: &ExperimentEnv<'_>,
    store: &PatternStore,
    strategy: &PlannerStrategy,
) -> (QueryOutcome, BTreeMap<CallTag, TagStats>) {
    let started = Instant::now();
    let llm = (env.make_llm)(index);
    let deps = SessionDeps {
        store,
        catalog: env.catalog,
        ranker: env.ranker,
        search: env.search,
        llm: &llm,
        limits: env.limits,
        domain_noun: env.domain_noun,
        judge: None,
    };
    let result = run_session(&spec.query_text, strategy, &deps);
    let novel_path = result.trajectory.novel_path;
    let (failure_reason, verdict) = match (result.response, result.trajectory.failure_reason) {
        (Some(response), None) => match judge(spec, &response, env.catalog, &llm) {
            Ok(verdict) => (None, Some(verdict)),
            Err(err) => {
                log::error!("query {index}: judging failed: {err}");
                (Some(FailureReason::ExecutorFailure), None)
            }
        },
        (_, Some(reason)) => (Some(reason), None),
        (None, None) => {
            log::error!("query {index}: session ended with neither response nor failure");
            (Some(FailureReason::ExecutorFailure), None)
        }
    };

    let snapshot = llm.ledger().snapshot();
    let outcome = QueryOutcome::new(
        index,
        spec,
        failure_reason,
        verdict,
        novel_path,
        TokenCounts::from(&llm.ledger().total()),
        started.elapsed().as_micros() as u64,
    );
    (outcome, snapshot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Item;
    use crate::executors::FixtureSearchClient;
    use crate::llm::{RequestLog, ScriptRule, ScriptedProvider};
    use crate::orchestrator::StrategyKind;
    use crate::thought::ThoughtPattern;
    use crate::usersim::Opener;
    use serde_json::json;
    use std::sync::Arc;

    fn blouse_catalog() -> Catalog {
        let items = (1..=10)
            .map(|i| Item {
                id: format!("b{i:03}"),
                title: format!("Casual Blouse {i}"),
                description: "a light casual blouse for everyday wear".into(),
                attribute_path: vec!["Blouses".into(), "Casual".into()],
                meta: Default::default(),
            })
            .collect();
        Catalog::from_items(items).unwrap()
    }

    fn pattern(id: &str, source: PatternSource, tag: Option<&str>) -> ThoughtPattern {
        ThoughtPattern {
            id: id.into(),
            task_description: "the user asks for a product without naming the scene".into(),
            solution_description: "gather scenes first, then recommend per scene".into(),
            thought_template: "Phase 1: Step 1: search. Phase 2: Step 2: recommend.".into(),
            source,
            scenario_tag: tag.map(String::from),
            embedding: Vec::new(),
        }
    }

    fn spec(query: &str, target: &str, scenario: Scenario, opener: Opener) -> QuerySpec {
        QuerySpec {
            query_text: query.into(),
            user_id: format!("user-of-{target}"),
            target_item_id: target.into(),
            scenario,
            difficulty: scenario.difficulty(),
            semantic: opener,
            scenario_description: scenario.description().into(),
        }
    }

    fn suite4() -> Vec<QuerySpec> {
        vec![
            spec(
                "Can you recommend casual blouses for work?",
                "b003",
                Scenario::DirectReference,
                Opener::CanYouRecommend,
            ),
            spec(
                "Can you recommend semi formal blouses for a dinner?",
                "b007",
                Scenario::DirectReference,
                Opener::CanYouRecommend,
            ),
            spec(
                "I am looking for blouses for a beach trip",
                "b001",
                Scenario::Occasions,
                Opener::IAmLookingFor,
            ),
            spec(
                "Show me blouses, I am not sure about the scene",
                "b005",
                Scenario::Ambiguous,
                Opener::ShowMe,
            ),
        ]
    }

    fn when(tag: &str, needle: &str, reply: String) -> ScriptRule {
        ScriptRule {
            tag: tag.into(),
            when_contains: Some(needle.into()),
            index: None,
            capture: None,
            reply,
        }
    }

    fn rule(tag: &str, reply: String) -> ScriptRule {
        ScriptRule { tag: tag.into(), when_contains: None, index: None, capture: None, reply }
    }

    fn plan_json(content: &str) -> String {
        json!({
            "user_input": "q",
            "main_task": "recommend blouses",
            "sub_tasks": {
                "task_1": {"content": content, "agent": "ItemRetrievalAgent"},
                "task_2": {"content": "compose the final response", "agent": "InteractorAgent"},
            }
        })
        .to_string()
    }

    fn interactor_reply() -> String {
        let items: Vec<String> = (1..=10)
            .map(|i| format!(r#"{{"id": "b{i:03}", "title": "x"}}"#))
            .collect();
        format!(
            r#"{{"lists": [{{"recommendation": "casual blouses", "items": [{}]}}]}}"#,
            items.join(", ")
        )
    }

    fn verdict_reply(fail: bool, scores: &[f64]) -> String {
        json!({"reason": "judged", "fail": fail, "scores": [scores]}).to_string()
    }

    /// Scripted rules covering all four suite queries: two clean successes,
    /// one unplannable query, one simulated-user rejection.
    fn suite_rules() -> Vec<ScriptRule> {
        vec![
            rule("match", r#"{"selected": "tp-1"}"#.into()),
            when("plan", "beach trip", "I cannot plan this.".into()),
            when("plan", "for work", plan_json("retrieve casual blouses")),
            when("plan", "for a dinner", plan_json("retrieve dressier blouses")),
            when("plan", "not sure about the scene", plan_json("retrieve blouses")),
            ScriptRule {
                tag: "interpreter".into(),
                when_contains: None,
                index: None,
                capture: Some(crate::llm::Capture {
                    start: "The current task is \"".into(),
                    end: "\"".into(),
                }),
                reply: String::new(),
            },
            rule("retriever_prefs", "[blouses]; [casual]".into()),
            rule("interactor", interactor_reply()),
            when(
                "simulator",
                "for work",
                verdict_reply(false, &[1.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ),
            when(
                "simulator",
                "for a dinner",
                verdict_reply(false, &[0.0, 1.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ),
            when(
                "simulator",
                "not sure about the scene",
                verdict_reply(true, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
            ),
        ]
    }

    /// Owns everything an experiment borrows.
    struct Env {
        store: PatternStore,
        catalog: Catalog,
        ranker: Ranker,
        search: FixtureSearchClient,
        rules: Arc<Vec<ScriptRule>>,
        log: RequestLog,
    }

    impl Env {
        fn new(rules: Vec<ScriptRule>) -> Self {
            let mut store = PatternStore::new();
            store.upsert(pattern("tp-1", PatternSource::AgentSuccess, Some("ambiguous"))).unwrap();
            let catalog = blouse_catalog();
            let ranker = Ranker::bm25(&catalog);
            let corpus = r#"{"pattern": "blouse", "results": [{"title": "Guide", "snippet": "casual blouses"}]}"#;
            Env {
                store,
                catalog,
                ranker,
                search: FixtureSearchClient::from_reader(corpus.as_bytes()).unwrap(),
                rules: Arc::new(rules),
                log: RequestLog::default(),
            }
        }

        fn run(&self, config: &ExperimentConfig) -> Result<RunReport> {
            let make_llm = |_: usize| {
                LlmClient::new(
                    Arc::new(
                        ScriptedProvider::new(self.rules.clone())
                            .with_request_log(self.log.clone()),
                    ),
                    Arc::new(TokenLedger::new()),
                )
            };
            let env = ExperimentEnv {
                store: &self.store,
                catalog: &self.catalog,
                ranker: &self.ranker,
                search: &self.search,
                make_llm: &make_llm,
                limits: SessionLimits::default(),
                domain_noun: "clothing",
            };
            run_experiment(&suite4(), &env, config)
        }

        fn calls(&self, tag: CallTag) -> usize {
            self.log.lock().unwrap().iter().filter(|(t, _)| *t == tag).count()
        }
    }

    fn taira_config() -> ExperimentConfig {
        ExperimentConfig {
            strategy: PlannerStrategy::new(StrategyKind::Taira),
            ablations: BTreeSet::new(),
            novel_tags: Vec::new(),
            parallelism: 2,
            seed: 42,
        }
    }

    #[test]
    fn a_mixed_suite_aggregates_to_the_hand_computed_report() {
        let env = Env::new(suite_rules());
        let report = env.run(&taira_config()).unwrap();
        report.validate().unwrap();

        assert_eq!(report.overall.queries, 4);
        assert_eq!(report.overall.sr, 0.5);
        assert!((report.overall.hr_at_10 - 0.075).abs() < 1e-12);
        assert!((report.overall.ndcg_at_10 - 0.4108306020826582).abs() < 1e-12);

        let easy = &report.per_difficulty[&Difficulty::Easy];
        assert_eq!((easy.queries, easy.sr), (2, 1.0));
        assert!((easy.hr_at_10 - 0.15).abs() < 1e-12);
        assert!((easy.ndcg_at_10 - 0.8216612041653164).abs() < 1e-12);
        assert_eq!(report.per_difficulty[&Difficulty::Medium].sr, 0.0);
        assert_eq!(report.per_difficulty[&Difficulty::Hard].sr, 0.0);

        // The unplannable query failed in the session; the rejected one
        // failed at judging; both fail differently.
        let beach = &report.outcomes[2];
        assert_eq!(beach.failure_reason, Some(FailureReason::MalformedOutput));
        assert!(beach.verdict.is_none() && !beach.succeeded);
        let rejected = &report.outcomes[3];
        assert!(rejected.failure_reason.is_none());
        assert!(rejected.verdict.as_ref().unwrap().failed);
        assert_eq!(rejected.hr_at_10, 0.0, "rejected verdicts zero their scores");

        // Ledger totals are the fold of the per-query snapshots.
        let calls: u64 = report.outcomes.iter().map(|o| o.tokens.calls).sum();
        assert_eq!(report.tokens.calls, calls);
        assert_eq!(report.tokens_by_tag[&CallTag::Match].calls, 4);
    }

    #[test]
    fn reports_are_deterministic_across_runs() {
        let env = Env::new(suite_rules());
        let a = serde_json::to_string(&env.run(&taira_config()).unwrap()).unwrap();
        let b = serde_json::to_string(&env.run(&taira_config()).unwrap()).unwrap();
        assert_eq!(a, b, "latency is excluded, so serialized reports are identical");
    }

    #[test]
    fn the_thought_ablation_makes_zero_match_calls() {
        let env = Env::new(suite_rules());
        let mut config = taira_config();
        config.ablations.insert(Ablation::Thoughts);
        let report = env.run(&config).unwrap();
        assert_eq!(env.calls(CallTag::Match), 0);
        assert!(!report.tokens_by_tag.contains_key(&CallTag::Match));
        assert_eq!(report.overall.sr, 0.5, "the rest of the pipeline is unchanged");
        assert_eq!(report.ablations.iter().map(|a| a.code()).collect::<Vec<_>>(), ["T"]);
    }

    #[test]
    fn novel_tags_strip_patterns_and_force_the_novel_path() {
        let env = Env::new(suite_rules());
        let mut config = taira_config();
        config.novel_tags = vec!["ambiguous".into()];
        let report = env.run(&config).unwrap();
        // The store's only pattern was tagged `ambiguous`, so every query
        // plans on the novel path and the match selector is never consulted.
        assert!(report.outcomes.iter().all(|o| o.novel_path));
        assert_eq!(env.calls(CallTag::Match), 0);

        config.novel_tags = vec!["no_such_tag".into()];
        assert!(matches!(
            env.run(&config).unwrap_err(),
            TairaError::UnknownScenario(_)
        ));
    }

    #[test]
    fn source_ablations_filter_the_loaded_store() {
        let mut store = PatternStore::new();
        store.upsert(pattern("tp-1", PatternSource::AgentSuccess, None)).unwrap();
        store.upsert(pattern("tp-2", PatternSource::ExpertDirect, None)).unwrap();
        store
            .upsert(pattern("tp-3", PatternSource::AgentFailedExpertCorrected, None))
            .unwrap();

        let only_agent =
            prepared_store(&store, &BTreeSet::from([Ablation::ExpertSources]), &[]).unwrap();
        let ids: Vec<&str> = only_agent.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["tp-1"], "w/o E keeps only agent successes");

        let only_expert =
            prepared_store(&store, &BTreeSet::from([Ablation::AgentSources]), &[]).unwrap();
        let mut ids: Vec<&str> = only_expert.iter().map(|p| p.id.as_str()).collect();
        ids.sort();
        assert_eq!(ids, ["tp-2", "tp-3"], "w/o A keeps only expert-sourced patterns");

        let none = prepared_store(
            &store,
            &BTreeSet::from([Ablation::ExpertSources, Ablation::AgentSources]),
            &[],
        )
        .unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn ablation_codes_parse_case_insensitively() {
        use std::str::FromStr;
        assert_eq!(Ablation::from_str("T").unwrap(), Ablation::Thoughts);
        assert_eq!(Ablation::from_str("h").unwrap(), Ablation::Hierarchy);
        assert_eq!(Ablation::from_str("expert").unwrap(), Ablation::ExpertSources);
        assert_eq!(Ablation::from_str("A").unwrap(), Ablation::AgentSources);
        assert!(Ablation::from_str("X").is_err());
    }

    #[test]
    fn an_empty_suite_is_rejected() {
        let env = Env::new(suite_rules());
        let make_llm = |_: usize| {
            LlmClient::new(
                Arc::new(ScriptedProvider::new(env.rules.clone())),
                Arc::new(TokenLedger::new()),
            )
        };
        let experiment_env = ExperimentEnv {
            store: &env.store,
            catalog: &env.catalog,
            ranker: &env.ranker,
            search: &env.search,
            make_llm: &make_llm,
            limits: SessionLimits::default(),
            domain_noun: "clothing",
        };
        assert!(run_experiment(&[], &experiment_env, &taira_config()).is_err());
    }
}
