//! The manager agent: pattern-guided planning, subtask dispatch, and the
//! phased replanning loop.
//!
//! `run_session` is the single entry point for every planning strategy. It is
//! a total function: model failures, invalid plans, and executor errors never
//! escape as `Err` — they end the session with a recorded
//! [`FailureReason`] inside the trajectory. The phased strategies plan with
//! `P_next = replan(P_current, history)` until a plan terminates in the
//! interactor; the step-loop strategies live in [`react`].

mod plan;
mod react;

pub use plan::{
    parse_plan_json, AgentKind, FailureReason, HistoryRecord, Plan, SubTask, SubTaskStatus,
    TaskHistory, Trajectory,
};
pub use react::run_react;

use crate::catalog::Catalog;
use crate::error::TairaError;
use crate::executors::{
    interactor, interpret, item_retriever, searcher, RecommendationResponse, SearchClient,
    ITEMS_PER_LIST,
};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts::{self, PatternGuidance};
use crate::retrieval::{Ranker, DEFAULT_ATTRIBUTE_COUNT};
use crate::thought::{match_pattern, MatchOutcome, PatternStore, DEFAULT_MATCH_K};
use serde::{Deserialize, Serialize};

/// Highest number of phased plans per session before the session is failed
/// with `iteration_threshold`.
pub const DEFAULT_MAX_PHASES: usize = 4;
/// Attempts per subtask (interpretation + execution) before the session is
/// failed with `executor_failure`.
pub const DEFAULT_RETRY_LIMIT: u32 = 3;
/// Candidate pool handed to the item retriever before preference reordering.
pub const DEFAULT_CANDIDATE_POOL: usize = 50;
/// Step budget of the thought/action/observation loop.
pub const DEFAULT_MAX_REACT_STEPS: usize = 8;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// The planning strategies a session can run under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Pattern matching + hierarchical replanning (the full system).
    Taira,
    /// Full system minus thought patterns (no match step, no guidance).
    TairaNoT,
    /// Full system minus hierarchical planning (single-shot plans).
    TairaNoH,
    /// Devise one complete plan, then execute it in a single pass.
    PlanAndSolve,
    /// Thought/action/observation step loop.
    React,
    /// Step loop plus one reflection-and-retry round after a failure.
    Reflexion,
    /// Plain planning: no pattern guidance, full replanning loop.
    ZeroShot,
}

impl StrategyKind {
    /// The hyphenated name used on the command line and in reports.
    pub fn cli_name(self) -> &'static str {
        match self {
            StrategyKind::Taira => "taira",
            StrategyKind::TairaNoT => "taira-no-t",
            StrategyKind::TairaNoH => "taira-no-h",
            StrategyKind::PlanAndSolve => "plan-solve",
            StrategyKind::React => "react",
            StrategyKind::Reflexion => "reflexion",
            StrategyKind::ZeroShot => "zero-shot",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taira" => Ok(StrategyKind::Taira),
            "taira-no-t" => Ok(StrategyKind::TairaNoT),
            "taira-no-h" => Ok(StrategyKind::TairaNoH),
            "plan-solve" => Ok(StrategyKind::PlanAndSolve),
            "react" => Ok(StrategyKind::React),
            "reflexion" => Ok(StrategyKind::Reflexion),
            "zero-shot" => Ok(StrategyKind::ZeroShot),
            other => Err(format!(
                "unknown strategy `{other}`; use taira, taira-no-t, taira-no-h, plan-solve, \
react, reflexion or zero-shot"
            )),
        }
    }
}

/// A strategy kind plus the planner-level ablation switches.
///
/// The thought ablation disables the match step (so planning runs unguided);
/// the hierarchy ablation withholds the planner agent (so every plan must
/// finish in the interactor). Pattern-source ablations are applied by the
/// evaluation harness by filtering the store, not here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerStrategy {
    pub kind: StrategyKind,
    /// Disable thought-pattern matching even where the kind would use it.
    #[serde(default)]
    pub ablate_thoughts: bool,
    /// Disable hierarchical replanning even where the kind would allow it.
    #[serde(default)]
    pub ablate_hierarchy: bool,
}

impl PlannerStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        PlannerStrategy { kind, ablate_thoughts: false, ablate_hierarchy: false }
    }

    /// Whether the session starts with a pattern-match step.
    pub fn uses_matching(&self) -> bool {
        matches!(self.kind, StrategyKind::Taira | StrategyKind::TairaNoH) && !self.ablate_thoughts
    }

    /// Whether plans may terminate in the planner agent (replanning allowed).
    pub fn planner_allowed(&self) -> bool {
        !matches!(self.kind, StrategyKind::TairaNoH | StrategyKind::PlanAndSolve)
            && !self.ablate_hierarchy
    }

    /// Whether the session runs the thought/action/observation loop instead
    /// of phased planning.
    pub fn is_step_loop(&self) -> bool {
        matches!(self.kind, StrategyKind::React | StrategyKind::Reflexion)
    }
}

// ---------------------------------------------------------------------------
// Session wiring
// ---------------------------------------------------------------------------

/// Session-level bounds and sizes. The defaults match the evaluation setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionLimits {
    /// Phased plans allowed per session (phase indices 0..max_phases).
    pub max_phases: usize,
    /// Attempts per subtask before the session fails.
    pub retry_limit: u32,
    /// Candidate patterns shown to the match selector.
    pub match_k: usize,
    /// Lexical candidate pool ranked before preference reordering.
    pub candidate_pool_size: usize,
    /// Attributes returned by the searcher's vocabulary mapping.
    pub attribute_count: usize,
    /// Steps allowed per attempt of the step-loop strategies.
    pub max_react_steps: usize,
}

impl Default for SessionLimits {
    fn default() -> Self {
        SessionLimits {
            max_phases: DEFAULT_MAX_PHASES,
            retry_limit: DEFAULT_RETRY_LIMIT,
            match_k: DEFAULT_MATCH_K,
            candidate_pool_size: DEFAULT_CANDIDATE_POOL,
            attribute_count: DEFAULT_ATTRIBUTE_COUNT,
            max_react_steps: DEFAULT_MAX_REACT_STEPS,
        }
    }
}

/// Everything a session borrows: shared, immutable state plus the client.
pub struct SessionDeps<'a> {
    pub store: &'a PatternStore,
    pub catalog: &'a Catalog,
    pub ranker: &'a Ranker,
    pub search: &'a dyn SearchClient,
    pub llm: &'a LlmClient,
    pub limits: SessionLimits,
    /// Names the product domain in prompts ("clothing", "beauty product").
    pub domain_noun: &'a str,
    /// Accept/reject callback consulted by the reflective step-loop strategy
    /// before it decides whether to retry. `None` disables reflection-on-
    /// rejection (internal failures still trigger it).
    pub judge: Option<&'a (dyn Fn(&RecommendationResponse) -> bool + Sync)>,
}

/// What a session produced: the response (when it reached the interactor)
/// and the full trajectory, including any failure reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionResult {
    pub response: Option<RecommendationResponse>,
    pub trajectory: Trajectory,
}

impl SessionResult {
    pub fn failure_reason(&self) -> Option<FailureReason> {
        self.trajectory.failure_reason
    }

    /// True when the session produced a response without failing.
    pub fn succeeded(&self) -> bool {
        self.response.is_some() && !self.trajectory.failed
    }
}

pub(crate) fn fail_session(mut trajectory: Trajectory, reason: FailureReason) -> SessionResult {
    trajectory.failed = true;
    trajectory.failure_reason = Some(reason);
    SessionResult { response: None, trajectory }
}

/// Folds an error into the per-session failure taxonomy: output the model
/// could not fix within budget is `malformed_output`; everything else that
/// happens while executing is `executor_failure`.
pub(crate) fn error_reason(err: &TairaError) -> FailureReason {
    match err {
        TairaError::MalformedOutput { .. } | TairaError::InvalidPlan(_) => {
            FailureReason::MalformedOutput
        }
        _ => FailureReason::ExecutorFailure,
    }
}

// ---------------------------------------------------------------------------
// The session loop
// ---------------------------------------------------------------------------

/// Runs one full session for `query` under `strategy`.
///
/// Phased strategies: optional match step, initial plan, then execute
/// subtasks in order — the task interpreter translates each subtask for its
/// executor, every outcome is appended to the history, a planner-terminal
/// plan triggers a replan, an interactor-terminal plan produces the final
/// response. Step-loop strategies delegate to [`run_react`].
pub fn run_session(query: &str, strategy: &PlannerStrategy, deps: &SessionDeps) -> SessionResult {
    if strategy.is_step_loop() {
        return react::run_react(query, strategy, deps, deps.limits.max_react_steps);
    }

    let mut trajectory = Trajectory::new(query);
    let agents = prompts::agents_instruction(strategy.planner_allowed());

    // Match step: full template on a hit, nearest solution descriptions on a
    // novel outcome, nothing when matching is off or the store has no help.
    let mut guidance = PatternGuidance::None;
    if strategy.uses_matching() {
        match match_pattern(query, deps.store, deps.limits.match_k, deps.llm) {
            Ok(result) => {
                trajectory.novel_path = result.is_novel();
                match &result.outcome {
                    MatchOutcome::Matched(id) => {
                        if let Some(pattern) = deps.store.get(id) {
                            guidance = PatternGuidance::Matched(pattern);
                        }
                    }
                    MatchOutcome::Novel(ids) => {
                        let solutions: Vec<&str> = ids
                            .iter()
                            .filter_map(|id| deps.store.get(id))
                            .map(|p| p.solution_description.as_str())
                            .collect();
                        if !solutions.is_empty() {
                            guidance = PatternGuidance::Novel(solutions);
                        }
                    }
                }
                trajectory.match_result = Some(result);
            }
            Err(err) => {
                log::warn!("pattern matching failed: {err}");
                return fail_session(trajectory, error_reason(&err));
            }
        }
    }

    // Initial plan (phase 0).
    let mut prompt = prompts::plan_prompt(query, &agents, &guidance);
    if strategy.kind == StrategyKind::PlanAndSolve {
        prompt = format!("{}\n\n{prompt}", prompts::PLAN_AND_SOLVE_PREFACE);
    }
    let mut plan =
        match request_plan(deps.llm, CallTag::Plan, prompt, 0, strategy.planner_allowed()) {
            Ok(plan) => plan,
            Err(err) => {
                log::warn!("initial planning failed: {err}");
                return fail_session(trajectory, error_reason(&err));
            }
        };

    loop {
        let end = run_phase(&mut plan, query, &agents, &guidance, deps, &mut trajectory.history);
        trajectory.plans.push(plan.clone());
        match end {
            PhaseEnd::Response(response) => {
                return SessionResult { response: Some(response), trajectory };
            }
            PhaseEnd::Replan(next) => plan = next,
            PhaseEnd::Failed(reason) => return fail_session(trajectory, reason),
        }
    }
}

enum PhaseEnd {
    Response(RecommendationResponse),
    Replan(Plan),
    Failed(FailureReason),
}

/// Executes every subtask of `plan` in order, mutating statuses in place and
/// appending a history record per completed subtask.
fn run_phase(
    plan: &mut Plan,
    query: &str,
    agents: &str,
    guidance: &PatternGuidance,
    deps: &SessionDeps,
    history: &mut TaskHistory,
) -> PhaseEnd {
    let phase = plan.phase;
    for position in 0..plan.sub_tasks.len() {
        let subtask = plan.sub_tasks[position].clone();

        if subtask.agent == AgentKind::Planner {
            if phase + 1 >= deps.limits.max_phases {
                log::warn!("phase budget exhausted (max_phases = {})", deps.limits.max_phases);
                plan.sub_tasks[position].status = SubTaskStatus::Failed;
                return PhaseEnd::Failed(FailureReason::IterationThreshold);
            }
            let prompt = prompts::replan_prompt(query, agents, &history.render(), guidance);
            return match request_plan(deps.llm, CallTag::Replan, prompt, phase + 1, true) {
                Ok(next) => {
                    history.push(HistoryRecord {
                        phase,
                        subtask_index: subtask.index,
                        agent: AgentKind::Planner,
                        content: subtask.content,
                        input: String::new(),
                        output: next.main_task.clone(),
                        retrieved: None,
                    });
                    plan.sub_tasks[position].status = SubTaskStatus::Done;
                    plan.sub_tasks[position].attempts = 1;
                    PhaseEnd::Replan(next)
                }
                Err(err) => {
                    log::warn!("replanning failed: {err}");
                    plan.sub_tasks[position].status = SubTaskStatus::Failed;
                    PhaseEnd::Failed(error_reason(&err))
                }
            };
        }

        // Executor subtask: interpret + execute, retried as a unit.
        let mut attempts = 0;
        let executed = loop {
            attempts += 1;
            match execute_subtask(&subtask, agents, deps, history) {
                Ok(executed) => break Ok(executed),
                Err(err) if attempts < deps.limits.retry_limit => {
                    log::warn!(
                        "subtask {} ({}) attempt {attempts} failed: {err}; retrying",
                        subtask.index,
                        subtask.agent.wire_name()
                    );
                }
                Err(err) => break Err(err),
            }
        };
        plan.sub_tasks[position].attempts = attempts;
        match executed {
            Ok(executed) => {
                plan.sub_tasks[position].status = SubTaskStatus::Done;
                history.push(HistoryRecord {
                    phase,
                    subtask_index: subtask.index,
                    agent: subtask.agent,
                    content: subtask.content,
                    input: executed.input,
                    output: executed.output,
                    retrieved: executed.retrieved,
                });
                if let Some(response) = executed.response {
                    return PhaseEnd::Response(response);
                }
            }
            Err(err) => {
                log::warn!(
                    "subtask {} ({}) failed after {attempts} attempts: {err}",
                    subtask.index,
                    subtask.agent.wire_name()
                );
                plan.sub_tasks[position].status = SubTaskStatus::Failed;
                return PhaseEnd::Failed(FailureReason::ExecutorFailure);
            }
        }
    }
    // Unreachable for validated plans: the terminal subtask always returns.
    log::error!("phase {phase} ended without a terminal subtask");
    PhaseEnd::Failed(FailureReason::MalformedOutput)
}

/// What one executed subtask contributed.
struct Executed {
    input: String,
    output: String,
    retrieved: Option<Vec<(String, String)>>,
    response: Option<RecommendationResponse>,
}

/// Interprets `subtask` for its executor, runs the executor, and renders the
/// output text that enters the history.
fn execute_subtask(
    subtask: &SubTask,
    agents: &str,
    deps: &SessionDeps,
    history: &TaskHistory,
) -> crate::error::Result<Executed> {
    let input = interpret(&subtask.content, history, subtask.agent, deps.llm, agents)?;
    match subtask.agent {
        AgentKind::Searcher => {
            let attributes = searcher(
                &input,
                deps.search,
                deps.catalog.vocab(),
                deps.llm,
                deps.limits.attribute_count,
                deps.ranker.embedder(),
            )?;
            Ok(Executed {
                input,
                output: attributes.join(", "),
                retrieved: None,
                response: None,
            })
        }
        AgentKind::ItemRetriever => {
            let ranked = item_retriever(
                &input,
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
            let output = retrieved
                .iter()
                .map(|(id, title)| format!("{id}: {title}"))
                .collect::<Vec<_>>()
                .join("; ");
            Ok(Executed { input, output, retrieved: Some(retrieved), response: None })
        }
        AgentKind::Interactor => {
            let response = interactor(history, &input, deps.llm)?;
            let output = render_response_summary(&response);
            Ok(Executed { input, output, retrieved: None, response: Some(response) })
        }
        AgentKind::Planner => unreachable!("planner subtasks are handled by the phase loop"),
    }
}

/// One-line history rendering of a final response.
pub(crate) fn render_response_summary(response: &RecommendationResponse) -> String {
    let lists = response
        .lists
        .iter()
        .map(|list| format!("\"{}\" ({} items)", list.label, list.items.len()))
        .collect::<Vec<_>>()
        .join("; ");
    format!("{} list(s): {lists}", response.lists.len())
}

/// Requests one plan, giving the model a single corrective re-prompt when the
/// reply parses as JSON but violates the planning contract.
fn request_plan(
    llm: &LlmClient,
    tag: CallTag,
    user_prompt: String,
    phase: usize,
    allow_planner: bool,
) -> crate::error::Result<Plan> {
    let object_check = |value: &serde_json::Value| {
        if value.is_object() {
            Ok(())
        } else {
            Err("the plan must be a JSON object".to_string())
        }
    };
    let req = ChatRequest::new(tag, prompts::MANAGER_SYSTEM, user_prompt.clone());
    let value = llm.complete_json(&req, &object_check)?;
    match parse_plan_json(&value, phase, allow_planner) {
        Ok(plan) => Ok(plan),
        Err(reason) => {
            log::warn!("plan rejected ({reason}); issuing one corrective re-prompt");
            let corrected = ChatRequest::new(
                tag,
                prompts::MANAGER_SYSTEM,
                format!("{user_prompt}{}", prompts::plan_correction(&reason)),
            );
            let value = llm.complete_json(&corrected, &object_check)?;
            parse_plan_json(&value, phase, allow_planner)
                .map_err(TairaError::InvalidPlan)
        }
    }
}
