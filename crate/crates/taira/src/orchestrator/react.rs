//! Thought/action/observation planning: the step-loop strategies.
//!
//! Each step asks the model for `{"thought", "action", "action_input"}`,
//! executes the named agent with the given input, and appends the observation
//! to a textual scratchpad. The reflective variant retries once after a
//! failed first attempt — internal failure or rejection by the judge — with a
//! self-written reflection prepended to the fresh scratchpad. Steps are not
//! retried in place: a failing executor fails the attempt.

use super::{
    error_reason, fail_session, render_response_summary, AgentKind, FailureReason, HistoryRecord,
    PlannerStrategy, SessionDeps, SessionResult, StrategyKind, Trajectory,
};
use crate::executors::{interactor, item_retriever, searcher, RecommendationResponse, ITEMS_PER_LIST};
use crate::llm::{CallTag, ChatRequest};
use crate::prompts;

/// Runs one session under a step-loop strategy (plain or reflective).
///
/// Step calls are billed to the planning tag and the reflection to the
/// replanning tag, so ledgers stay comparable across strategies. History
/// records carry the attempt index in their `phase` field.
pub fn run_react(
    query: &str,
    strategy: &PlannerStrategy,
    deps: &SessionDeps,
    max_steps: usize,
) -> SessionResult {
    let mut trajectory = Trajectory::new(query);
    let reflective = strategy.kind == StrategyKind::Reflexion;

    let mut scratchpad = String::new();
    for attempt in 0..2 {
        let outcome = run_attempt(query, deps, max_steps, attempt, &mut scratchpad, &mut trajectory);
        let failure = match outcome {
            Ok(response) => {
                let rejected = reflective
                    && attempt == 0
                    && deps.judge.map(|judge| !judge(&response)).unwrap_or(false);
                if !rejected {
                    return SessionResult { response: Some(response), trajectory };
                }
                log::info!("first attempt rejected by the judge; reflecting");
                None
            }
            Err(reason) => {
                if !reflective || attempt == 1 {
                    return fail_session(trajectory, reason);
                }
                log::info!("first attempt failed ({}); reflecting", reason.name());
                Some(reason)
            }
        };

        // Reflection: summarize what went wrong, then restart the scratchpad.
        let req = ChatRequest::new(
            CallTag::Replan,
            prompts::REACT_SYSTEM,
            prompts::reflection_prompt(query, &scratchpad),
        );
        match deps.llm.complete(&req) {
            Ok(reflection) => {
                scratchpad =
                    format!("Reflection from the previous failed attempt: {}\n", reflection.trim());
            }
            Err(err) => {
                log::warn!("reflection failed: {err}");
                return fail_session(trajectory, failure.unwrap_or_else(|| error_reason(&err)));
            }
        }
    }
    unreachable!("the second attempt always returns");
}

/// One attempt of the step loop. Appends to `scratchpad` and to the
/// trajectory's history (records tagged with `attempt` as their phase).
fn run_attempt(
    query: &str,
    deps: &SessionDeps,
    max_steps: usize,
    attempt: usize,
    scratchpad: &mut String,
    trajectory: &mut Trajectory,
) -> Result<RecommendationResponse, FailureReason> {
    let agents = prompts::agents_instruction(false);
    for step in 1..=max_steps {
        let rendered = if scratchpad.is_empty() { "(nothing yet)" } else { scratchpad.as_str() };
        let req = ChatRequest::new(
            CallTag::Plan,
            prompts::REACT_SYSTEM,
            prompts::react_step_prompt(query, &agents, rendered),
        );
        let value = deps.llm.complete_json(&req, &step_check).map_err(|err| {
            log::warn!("step {step} produced no usable action: {err}");
            error_reason(&err)
        })?;
        let thought = value["thought"].as_str().unwrap_or("").to_string();
        let action = value["action"].as_str().expect("schema checked").to_string();
        let action_input = value["action_input"].as_str().unwrap_or("").to_string();

        let agent = match AgentKind::from_wire_name(&action) {
            Some(agent) if agent != AgentKind::Planner => agent,
            _ => {
                log::warn!("step {step} named unavailable agent \"{action}\"");
                return Err(FailureReason::ExecutorFailure);
            }
        };

        let (observation, retrieved, response) = match execute_action(agent, &action_input, deps, trajectory) {
            Ok(executed) => executed,
            Err(err) => {
                log::warn!("step {step} ({action}) failed: {err}");
                return Err(error_reason(&err));
            }
        };

        scratchpad.push_str(&format!(
            "Thought: {thought}\nAction: {action}[{action_input}]\nObservation: {observation}\n"
        ));
        trajectory.history.push(HistoryRecord {
            phase: attempt,
            subtask_index: step,
            agent,
            content: thought,
            input: action_input,
            output: observation,
            retrieved,
        });
        if let Some(response) = response {
            return Ok(response);
        }
    }
    log::warn!("step budget exhausted ({max_steps} steps)");
    Err(FailureReason::IterationThreshold)
}

type ActionOutcome =
    (String, Option<Vec<(String, String)>>, Option<RecommendationResponse>);

fn execute_action(
    agent: AgentKind,
    action_input: &str,
    deps: &SessionDeps,
    trajectory: &Trajectory,
) -> crate::error::Result<ActionOutcome> {
    match agent {
        AgentKind::Searcher => {
            let attributes = searcher(
                action_input,
                deps.search,
                deps.catalog.vocab(),
                deps.llm,
                deps.limits.attribute_count,
                deps.ranker.embedder(),
            )?;
            Ok((attributes.join(", "), None, None))
        }
        AgentKind::ItemRetriever => {
            let ranked = item_retriever(
                action_input,
                deps.catalog,
                deps.ranker,
                deps.llm,
                deps.domain_noun,
                deps.limits.candidate_pool_size,
                ITEMS_PER_LIST,
            )?;
            let retrieved: Vec<(String, String)> = ranked
                .ids()
                .into_iter()
                .map(|id| {
                    let title =
                        deps.catalog.get(id).map(|item| item.title.clone()).unwrap_or_default();
                    (id.to_string(), title)
                })
                .collect();
            let observation = retrieved
                .iter()
                .map(|(id, title)| format!("{id}: {title}"))
                .collect::<Vec<_>>()
                .join("; ");
            Ok((observation, Some(retrieved), None))
        }
        AgentKind::Interactor => {
            let response = interactor(&trajectory.history, action_input, deps.llm)?;
            Ok((render_response_summary(&response), None, Some(response)))
        }
        AgentKind::Planner => unreachable!("filtered out by the step loop"),
    }
}

/// A step reply must name an action; thought and input may be empty.
fn step_check(value: &serde_json::Value) -> Result<(), String> {
    value
        .get("action")
        .and_then(|a| a.as_str())
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|_| ())
        .ok_or_else(|| "the reply must name an \"action\" agent".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, Item};
    use crate::executors::FixtureSearchClient;
    use crate::llm::{LlmClient, ScriptRule, ScriptedProvider, TokenLedger};
    use crate::orchestrator::{run_session, SessionLimits};
    use crate::retrieval::Ranker;
    use crate::thought::PatternStore;
    use serde_json::json;
    use std::sync::Arc;

    fn pajama_catalog() -> Catalog {
        let items = (1..=10)
            .map(|i| Item {
                id: format!("p{i:03}"),
                title: format!("Thermal Pajama Set {i}"),
                description: "a warm thermal pajama set for cold nights".into(),
                attribute_path: vec!["Pajamas".into(), "Thermal".into()],
                meta: Default::default(),
            })
            .collect();
        Catalog::from_items(items).unwrap()
    }

    struct Fixture {
        store: PatternStore,
        catalog: Catalog,
        ranker: Ranker,
        search: FixtureSearchClient,
        llm: LlmClient,
        log: crate::llm::RequestLog,
    }

    impl Fixture {
        fn new(rules: Vec<ScriptRule>) -> Self {
            let catalog = pajama_catalog();
            let ranker = Ranker::bm25(&catalog);
            let corpus = r#"{"pattern": "sleepwear", "results": [{"title": "Guide", "snippet": "thermal pajamas keep you warm"}]}"#;
            let search = FixtureSearchClient::from_reader(corpus.as_bytes()).unwrap();
            let log: crate::llm::RequestLog = Default::default();
            let llm = LlmClient::new(
                Arc::new(ScriptedProvider::new(Arc::new(rules)).with_request_log(log.clone())),
                Arc::new(TokenLedger::new()),
            );
            Fixture { store: PatternStore::new(), catalog, ranker, search, llm, log }
        }

        fn deps(&self) -> SessionDeps<'_> {
            SessionDeps {
                store: &self.store,
                catalog: &self.catalog,
                ranker: &self.ranker,
                search: &self.search,
                llm: &self.llm,
                limits: SessionLimits::default(),
                domain_noun: "clothing",
                judge: None,
            }
        }
    }

    fn step(index: usize, thought: &str, action: &str, input: &str) -> ScriptRule {
        ScriptRule {
            tag: "plan".into(),
            when_contains: None,
            index: Some(index),
            capture: None,
            reply: json!({"thought": thought, "action": action, "action_input": input})
                .to_string(),
        }
    }

    fn rule(tag: &str, reply: String) -> ScriptRule {
        ScriptRule { tag: tag.into(), when_contains: None, index: None, capture: None, reply }
    }

    fn interactor_reply(label: &str) -> String {
        let items: Vec<String> =
            (1..=10).map(|i| format!(r#"{{"id": "p{i:03}", "title": "x"}}"#)).collect();
        format!(
            r#"{{"lists": [{{"recommendation": "{label}", "items": [{}]}}]}}"#,
            items.join(", ")
        )
    }

    fn happy_path_rules(from: usize, label: &str) -> Vec<ScriptRule> {
        vec![
            step(from, "learn the right attributes", "SearcherAgent", "warm sleepwear attributes"),
            step(from + 1, "retrieve matching items", "ItemRetrievalAgent", "thermal pajamas"),
            step(from + 2, "enough gathered, respond", "InteractorAgent", "compose the list"),
            rule("searcher", "thermal pajamas".into()),
            rule("retriever_prefs", "[pajamas]; [thermal]".into()),
            rule("interactor", interactor_reply(label)),
        ]
    }

    #[test]
    fn three_step_loop_reaches_a_response() {
        let fixture = Fixture::new(happy_path_rules(0, "thermal pajamas"));
        let strategy = PlannerStrategy::new(StrategyKind::React);
        let result = run_session("I need warm pajamas", &strategy, &fixture.deps());

        assert!(result.succeeded(), "failure: {:?}", result.failure_reason());
        let response = result.response.unwrap();
        assert_eq!(response.lists.len(), 1);
        assert_eq!(response.lists[0].items.len(), 10);
        assert_eq!(result.trajectory.history.len(), 3);
        assert!(result.trajectory.plans.is_empty(), "the step loop has no phased plans");
        assert_eq!(fixture.llm.ledger().calls(CallTag::Plan), 3);
        assert_eq!(fixture.llm.ledger().calls(CallTag::Replan), 0);

        // The scratchpad accumulates: the last step prompt shows both
        // earlier observations.
        let step_prompts: Vec<String> = fixture
            .log
            .lock()
            .unwrap()
            .iter()
            .filter(|(tag, _)| *tag == CallTag::Plan)
            .map(|(_, p)| p.clone())
            .collect();
        assert!(step_prompts[0].contains("(nothing yet)"));
        assert!(step_prompts[2].contains("Action: SearcherAgent[warm sleepwear attributes]"));
        assert!(step_prompts[2].contains("Observation: p001: Thermal Pajama Set 1"));
    }

    #[test]
    fn unknown_actions_fail_immediately() {
        for action in ["WizardAgent", "PlannerAgent"] {
            let fixture = Fixture::new(vec![step(0, "hmm", action, "x")]);
            let strategy = PlannerStrategy::new(StrategyKind::React);
            let result = run_session("anything", &strategy, &fixture.deps());
            assert_eq!(result.failure_reason(), Some(FailureReason::ExecutorFailure));
            assert_eq!(fixture.llm.ledger().calls(CallTag::Plan), 1, "no further steps");
        }
    }

    #[test]
    fn exhausted_steps_hit_the_iteration_threshold() {
        let rules = vec![
            rule("plan", json!({"thought": "search more", "action": "SearcherAgent", "action_input": "sleepwear"}).to_string()),
            rule("searcher", "thermal pajamas".into()),
        ];
        let fixture = Fixture::new(rules);
        let strategy = PlannerStrategy::new(StrategyKind::React);
        let mut deps = fixture.deps();
        deps.limits.max_react_steps = 2;
        let result = run_session("pajamas", &strategy, &deps);

        assert_eq!(result.failure_reason(), Some(FailureReason::IterationThreshold));
        assert_eq!(result.trajectory.history.len(), 2, "both steps executed and recorded");
    }

    #[test]
    fn reflective_variant_retries_once_after_judge_rejection() {
        let mut rules = vec![
            step(0, "retrieve items", "ItemRetrievalAgent", "thermal pajamas"),
            step(1, "respond", "InteractorAgent", "compose"),
            step(2, "retrieve again", "ItemRetrievalAgent", "thermal pajamas"),
            step(3, "respond properly", "InteractorAgent", "compose"),
            rule("retriever_prefs", "[pajamas]; [thermal]".into()),
            rule("replan", "Gather the items before answering, and name the list precisely.".into()),
        ];
        rules.push(ScriptRule {
            tag: "interactor".into(),
            when_contains: None,
            index: Some(0),
            capture: None,
            reply: interactor_reply("wrong label"),
        });
        rules.push(ScriptRule {
            tag: "interactor".into(),
            when_contains: None,
            index: Some(1),
            capture: None,
            reply: interactor_reply("right label"),
        });
        let fixture = Fixture::new(rules);
        let strategy = PlannerStrategy::new(StrategyKind::Reflexion);
        let judge = |response: &RecommendationResponse| response.lists[0].label == "right label";
        let mut deps = fixture.deps();
        deps.judge = Some(&judge);
        let result = run_session("pajamas", &strategy, &deps);

        assert!(result.succeeded(), "failure: {:?}", result.failure_reason());
        assert_eq!(result.response.unwrap().lists[0].label, "right label");
        assert_eq!(fixture.llm.ledger().calls(CallTag::Replan), 1, "one reflection");
        let phases: Vec<usize> =
            result.trajectory.history.records().iter().map(|r| r.phase).collect();
        assert_eq!(phases, vec![0, 0, 1, 1], "both attempts recorded");

        // The reflection text opens the second attempt's scratchpad.
        let log = fixture.log.lock().unwrap();
        let third_step_prompt = &log
            .iter()
            .filter(|(tag, _)| *tag == CallTag::Plan)
            .nth(2)
            .unwrap()
            .1;
        assert!(third_step_prompt
            .contains("Reflection from the previous failed attempt: Gather the items"));
        assert!(
            !third_step_prompt.contains("Action: ItemRetrievalAgent[thermal pajamas]\nObservation"),
            "the failed attempt's scratchpad is replaced, not extended"
        );
    }

    #[test]
    fn reflective_variant_retries_after_internal_failure() {
        let mut rules = vec![step(0, "hmm", "WizardAgent", "x")];
        rules.extend(happy_path_rules(1, "thermal pajamas"));
        rules.push(rule("replan", "Name a real agent next time.".into()));
        let fixture = Fixture::new(rules);
        let strategy = PlannerStrategy::new(StrategyKind::Reflexion);
        let result = run_session("pajamas", &strategy, &fixture.deps());

        assert!(result.succeeded(), "failure: {:?}", result.failure_reason());
        assert_eq!(fixture.llm.ledger().calls(CallTag::Replan), 1);
        assert_eq!(fixture.llm.ledger().calls(CallTag::Plan), 4, "1 failed + 3 good steps");
        assert!(result.trajectory.history.records().iter().all(|r| r.phase == 1));
    }

    #[test]
    fn second_failure_ends_the_session_with_its_reason() {
        let rules = vec![
            step(0, "hmm", "WizardAgent", "x"),
            step(1, "hmm again", "WizardAgent", "y"),
            rule("replan", "Pick a real agent.".into()),
        ];
        let fixture = Fixture::new(rules);
        let strategy = PlannerStrategy::new(StrategyKind::Reflexion);
        let result = run_session("pajamas", &strategy, &fixture.deps());
        assert_eq!(result.failure_reason(), Some(FailureReason::ExecutorFailure));
        assert_eq!(fixture.llm.ledger().calls(CallTag::Replan), 1);
    }

    #[test]
    fn plain_step_loop_ignores_the_judge() {
        let fixture = Fixture::new(happy_path_rules(0, "thermal pajamas"));
        let strategy = PlannerStrategy::new(StrategyKind::React);
        let judge = |_: &RecommendationResponse| false;
        let mut deps = fixture.deps();
        deps.judge = Some(&judge);
        let result = run_session("pajamas", &strategy, &deps);
        assert!(result.succeeded());
        assert_eq!(fixture.llm.ledger().calls(CallTag::Replan), 0);
    }
}
